"""Fenchel subdifferential of ``sigma_m`` and Clarke / Michel-Penot subdifferential of ``-d_m``.

Both sets are convex hulls of explicit families of negative semidefinite
matrices. They are represented here by finite samples of extreme points
together with the exact support function in a given direction; the hull
itself is never formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._random import complex_gaussian, make_rng, orthonormal_columns
from .core import PD_TOL, SympsensError, herm_eigen, sym_eigen, symmetrize
from .sensitivity import (CLUSTER_TOL, MultiplicityIndices, frame_blocks, multiplicity_indices,
                          reduce_direction)
from .williamson import WilliamsonDecomposition, standard_j, symplectic_eigenvalues, williamson


class NotComparableError(SympsensError, ValueError):
    """``B - A`` is not positive semidefinite."""


@dataclass(frozen=True)
class DeltaElement:
    """A ``2n x 2m`` matrix ``H`` in the template set for ``sigma_m``.

    ``H`` has an identity on the ``m - i_m`` pairs below the cluster and the
    real embedding ``[[U, V], [-V, U]]`` of ``U + 1j V`` (``r_m x i_m``, orthonormal
    columns) on the cluster.
    """
    h: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return self.u + 1j * self.v


@dataclass(frozen=True)
class NormalizedPair:
    """A normalised symplectic eigenvector pair: ``A x = d J y``, ``A y = -d J x``, ``<x, J y> = 1``."""
    x: np.ndarray
    y: np.ndarray


@dataclass
class SubgradientSample:
    """Extreme points of a subdifferential with the parameter that generated each.

    ``kind`` is ``'fenchel-sigma'`` (provenance: :class:`DeltaElement`) or
    ``'clarke-mp'`` (provenance: unit vectors in ``C^{r_m}``). When a direction
    was supplied, ``optimal`` is the index of the element appended to attain
    the support function in that direction.
    """
    kind: str
    elements: list = field(default_factory=list)
    provenance: list = field(default_factory=list)
    optimal: int | None = None

    def support(self, b) -> float:
        """Largest ``<G, b>`` over the sampled elements (``-inf`` if empty)."""
        b = symmetrize(b, name="direction")
        if not self.elements:
            return -np.inf
        return max(float(np.sum(g * b)) for g in self.elements)


def delta_template(idx: MultiplicityIndices, u, v) -> np.ndarray:
    """Assemble ``H`` from the ``r_m x i_m`` blocks ``u`` and ``v``."""
    n, m, below, r, i = idx.n, idx.m, idx.below, idx.r_m, idx.i_m
    u = np.asarray(u, dtype=np.float64).reshape(r, i)
    v = np.asarray(v, dtype=np.float64).reshape(r, i)
    h = np.zeros((2 * n, 2 * m))
    eye = np.eye(below)
    h[:below, :below] = eye
    h[n:n + below, m:m + below] = eye
    rows = slice(below, below + r)
    h[rows, below:m] = u
    h[rows, m + below:2 * m] = v
    h[n + below:n + below + r, below:m] = -v
    h[n + below:n + below + r, m + below:2 * m] = u
    return h


def delta_element(idx: MultiplicityIndices, z) -> DeltaElement:
    z = np.asarray(z, dtype=np.complex128).reshape(idx.r_m, idx.i_m)
    return DeltaElement(delta_template(idx, z.real, z.imag), z.real.copy(), z.imag.copy())


def sample_delta_m(idx: MultiplicityIndices, count: int, seed) -> list[DeltaElement]:
    """``count`` template matrices with Haar-like ``U + 1j V`` (orthonormalised complex Gaussians)."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    rng = make_rng(seed)
    out = []
    for _ in range(count):
        z = orthonormal_columns(complex_gaussian(rng, (idx.r_m, idx.i_m)))
        out.append(delta_element(idx, z))
    return out


def fenchel_element(w: WilliamsonDecomposition, h: np.ndarray) -> np.ndarray:
    mh = w.M @ h
    g = -(mh @ mh.T)
    return 0.5 * (g + g.T)


def fenchel_extreme_points(w: WilliamsonDecomposition, m: int, count: int, seed, *,
                           direction=None, cluster_tol: float = CLUSTER_TOL) -> SubgradientSample:
    """Sampled extreme points ``-M H H^T M^T`` of the Fenchel subdifferential of ``sigma_m``.

    With ``direction`` given, the element built from the top ``i_m``
    eigenvectors of the direction's Hermitian reduction is appended, so that
    :meth:`SubgradientSample.support` equals ``sigma_m'(A; direction)``.
    """
    idx = multiplicity_indices(w.d, m, cluster_tol)
    deltas = sample_delta_m(idx, count, seed)
    sample = SubgradientSample("fenchel-sigma")
    for delta in deltas:
        sample.elements.append(fenchel_element(w, delta.h))
        sample.provenance.append(delta)
    if direction is not None:
        red = reduce_direction(w, direction, idx)
        top = herm_eigen(red.b_tt).vectors[:, :idx.i_m]
        delta = delta_element(idx, top)
        sample.optimal = len(sample.elements)
        sample.elements.append(fenchel_element(w, delta.h))
        sample.provenance.append(delta)
    return sample


def clarke_extreme_point(w: WilliamsonDecomposition, idx: MultiplicityIndices, z) -> tuple[NormalizedPair, np.ndarray]:
    """Normalised pair ``[x, y] = M_tilde [[u, v], [-v, u]]`` for a unit ``z = u + 1j v`` in ``C^{r_m}``.

    Returns the pair and the extreme point ``-(x x^T + y y^T) / 2``.
    """
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    if z.shape[0] != idx.r_m:
        raise ValueError(f"expected a vector of length r_m={idx.r_m}, got {z.shape[0]}")
    if abs(np.linalg.norm(z) - 1.0) > 1e-12:
        raise ValueError(f"z must be a unit vector, has norm {np.linalg.norm(z):.17g}")
    _, m_tilde, _ = frame_blocks(w, idx)
    r = idx.r_m
    mu, mv = m_tilde[:, :r], m_tilde[:, r:]
    x = mu @ z.real - mv @ z.imag
    y = mu @ z.imag + mv @ z.real
    g = -0.5 * (np.outer(x, x) + np.outer(y, y))
    return NormalizedPair(x, y), g


def clarke_extreme_points(w: WilliamsonDecomposition, m: int, count: int, seed, *,
                          direction=None, cluster_tol: float = CLUSTER_TOL) -> SubgradientSample:
    """Sampled extreme points of the Clarke (= Michel-Penot) subdifferential of ``-d_m``.

    With ``direction`` given, the point generated by the top eigenvector of
    the direction's Hermitian reduction is appended.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    idx = multiplicity_indices(w.d, m, cluster_tol)
    rng = make_rng(seed)
    sample = SubgradientSample("clarke-mp")
    for _ in range(count):
        z = complex_gaussian(rng, idx.r_m)
        z /= np.linalg.norm(z)
        sample.elements.append(clarke_extreme_point(w, idx, z)[1])
        sample.provenance.append(z)
    if direction is not None:
        z = _top_vector(w, direction, idx)
        sample.optimal = len(sample.elements)
        sample.elements.append(clarke_extreme_point(w, idx, z)[1])
        sample.provenance.append(z)
    return sample


def _top_vector(w, direction, idx) -> np.ndarray:
    z = herm_eigen(reduce_direction(w, direction, idx).b_tt).vectors[:, 0]
    return z / np.linalg.norm(z)


def clarke_mp_dderiv(a, b, m: int, *, frame: WilliamsonDecomposition | None = None,
                     cluster_tol: float = CLUSTER_TOL, pd_tol: float = PD_TOL) -> float:
    """Clarke / Michel-Penot directional derivative of ``-d_m``: ``lambda_max(B_tt) / 2``.

    Only the cluster containing ``d_m`` matters, so every ``m`` in one cluster
    gives the same value.
    """
    a = symmetrize(a)
    w = williamson(a, pd_tol=pd_tol) if frame is None else frame
    idx = multiplicity_indices(w.d, m, cluster_tol)
    lam = herm_eigen(reduce_direction(w, b, idx).b_tt).values
    return 0.5 * float(lam[0])


@dataclass(frozen=True)
class SupportGapReport:
    sampled_max: float
    exact: float
    gap: float
    count: int


def support_gap(a, b, m: int, count: int, seed, *, frame: WilliamsonDecomposition | None = None,
                cluster_tol: float = CLUSTER_TOL, pd_tol: float = PD_TOL) -> SupportGapReport:
    """Compare the sampled Clarke support value in direction ``b`` with its exact value.

    The optimal extreme point is always part of the sample, so the gap is
    zero up to rounding.
    """
    a = symmetrize(a)
    w = williamson(a, pd_tol=pd_tol) if frame is None else frame
    sample = clarke_extreme_points(w, m, count, seed, direction=b, cluster_tol=cluster_tol)
    exact = clarke_mp_dderiv(a, b, m, frame=w, cluster_tol=cluster_tol)
    sampled = sample.support(b)
    return SupportGapReport(sampled, exact, exact - sampled, count)


def weyl_gap(b_tt, c, i: int) -> float:
    """``lambda_i(b_tt + c) - lambda_i(c)`` with 1-based, descending eigenvalue index ``i``."""
    lhs = herm_eigen(np.asarray(b_tt) + np.asarray(c)).values[i - 1]
    rhs = herm_eigen(c).values[i - 1]
    return float(lhs - rhs)


def weyl_equality_witness(b_tt, i: int) -> np.ndarray:
    """A Hermitian ``C`` with ``lambda_i(b_tt + C) - lambda_i(C) = lambda_1(b_tt)``.

    In the eigenbasis of ``b_tt`` put 0 on the top eigenvector, a large value
    on the next ``i - 1`` eigenvectors and a large negative value on the rest.
    """
    eig = herm_eigen(b_tt)
    r = eig.values.shape[0]
    if not 1 <= i <= r:
        raise ValueError(f"index {i} out of range 1..{r}")
    big = 2.0 * float(np.max(np.abs(eig.values))) + 1.0
    c = np.full(r, -big)
    c[0] = 0.0
    c[1:i] = big
    v = eig.vectors
    out = (v * c) @ v.conj().T
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True)
class MonotonicityReport:
    d_a: np.ndarray
    d_b: np.ndarray
    margins: np.ndarray
    passed: bool


def monotonicity_check(a, b, *, pd_tol: float = PD_TOL) -> MonotonicityReport:
    """Check ``d_j(A) <= d_j(B)`` for all ``j`` when ``A <= B`` in the Loewner order.

    Raises :class:`NotComparableError` when ``B - A`` has an eigenvalue below
    ``-(1e-10 ||B - A||_F + 1e-13 max(||A||_F, ||B||_F))``; the second term
    absorbs the rounding of the difference itself.
    """
    a = symmetrize(a)
    b = symmetrize(b)
    diff = b - a
    lo = sym_eigen(diff).values[0] if diff.size else 0.0
    slack = 1e-10 * np.linalg.norm(diff) + 1e-13 * max(np.linalg.norm(a), np.linalg.norm(b))
    if lo < -slack:
        raise NotComparableError(f"not comparable: B - A has eigenvalue {lo:.6g} < 0")
    d_a = symplectic_eigenvalues(a, pd_tol)
    d_b = symplectic_eigenvalues(b, pd_tol)
    margins = d_b - d_a
    passed = bool(np.all(d_a <= d_b + 1e-9 * np.maximum(1.0, d_b)))
    return MonotonicityReport(d_a, d_b, margins, passed)


def is_normalized_pair(a, pair: NormalizedPair, d: float, tol: float = 1e-8) -> bool:
    """Whether ``pair`` is a normalised symplectic eigenvector pair of ``a`` for ``d``."""
    a = np.asarray(a)
    j = standard_j(a.shape[0] // 2)
    x, y = pair.x, pair.y
    scale = max(1.0, float(np.max(np.abs(a))))
    ok_eig = (np.linalg.norm(a @ x - d * (j @ y)) <= tol * scale
              and np.linalg.norm(a @ y + d * (j @ x)) <= tol * scale)
    return bool(ok_eig and abs(x @ j @ y - 1.0) <= 1e-10 * max(1.0, x @ x + y @ y))
