"""First-order sensitivity of symplectic eigenvalues.

For ``sigma_m(A) = -2 (d_1 + ... + d_m)`` the one-sided directional derivative
in a symmetric direction ``B`` is read off a Williamson frame ``M``: the frame
is split into the pairs below the cluster of ``d_m`` (``M_bar``) and the
cluster itself (``M_tilde``), ``B`` is compressed to ``B_bar = -M_bar^T B M_bar``
and ``B_tilde = -M_tilde^T B M_tilde``, and the Hermitian matrix
``B_tt = B11 + B22 + 1j (B12 - B12^T)`` built from the blocks of ``B_tilde``
carries all the non-smooth information.

Indices ``m`` are 1-based throughout, as in the usual ordering
``d_1 <= ... <= d_n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PD_TOL, SympsensError, herm_eigen, symmetrize
from .williamson import (WilliamsonDecomposition, diagonal_residual, half_dim, partition_indices,
                         symplectic_eigenvalues, verify_symplectic, williamson)

#: Default relative tolerance for deciding that two symplectic eigenvalues are equal.
CLUSTER_TOL = 1e-8


class GapConditionError(SympsensError, ValueError):
    """``d_m`` is not separated from ``d_{m+1}``."""


@dataclass(frozen=True)
class MultiplicityIndices:
    """Position of index ``m`` inside its cluster of equal symplectic eigenvalues.

    ``i_m`` counts cluster members with index ``<= m`` and ``j_m`` those with
    index ``> m``; ``r_m = i_m + j_m`` and ``m_hat = m - i_m + 1`` is the first
    index of the cluster. ``ill_conditioned`` is set when a neighbour lies
    outside the cluster by less than ten times the clustering threshold, or
    the cluster is not the same when seen from each of its members.
    """
    n: int
    m: int
    i_m: int
    j_m: int
    cluster_tol: float
    ill_conditioned: bool = False

    @property
    def r_m(self) -> int:
        return self.i_m + self.j_m

    @property
    def m_hat(self) -> int:
        return self.m - self.i_m + 1

    @property
    def below(self) -> int:
        """Number of pairs strictly below the cluster, ``m - i_m``."""
        return self.m - self.i_m

    @property
    def above(self) -> int:
        """Number of pairs strictly above the cluster, ``n - m - j_m``."""
        return self.n - self.m - self.j_m

    @property
    def cluster(self) -> range:
        """1-based indices of the cluster."""
        return range(self.m_hat, self.m + self.j_m + 1)


def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(b))


def multiplicity_indices(d, m: int, cluster_tol: float = CLUSTER_TOL) -> MultiplicityIndices:
    """Multiplicity bookkeeping for ``d_m`` in the ascending sequence ``d``."""
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"index m={m} out of range 1..{n}")
    if np.any(np.diff(d) < 0):
        raise ValueError("symplectic eigenvalues must be ascending")
    dm = d[m - 1]
    lo = m
    while lo > 1 and _close(d[lo - 2], dm, cluster_tol):
        lo -= 1
    hi = m
    while hi < n and _close(d[hi], dm, cluster_tol):
        hi += 1
    ill = False
    # neighbours just outside the cluster
    if lo > 1 and _close(d[lo - 2], dm, 10 * cluster_tol):
        ill = True
    if hi < n and _close(d[hi], dm, 10 * cluster_tol):
        ill = True
    # the cluster must look the same from its end points (no chaining)
    if not (_close(d[lo - 1], d[hi - 1], cluster_tol)):
        ill = True
    return MultiplicityIndices(n=n, m=m, i_m=m - lo + 1, j_m=hi - m, cluster_tol=cluster_tol,
                               ill_conditioned=ill)


@dataclass(frozen=True)
class ReducedDirection:
    """The compressions of a direction ``B`` through a Williamson frame.

    ``b_bar`` is ``2(m - i_m)`` square (possibly empty), ``b_tilde`` is
    ``2 r_m`` square and ``b_tt`` is the ``r_m x r_m`` Hermitian reduction.
    """
    b_bar: np.ndarray
    b_tilde: np.ndarray
    b_tt: np.ndarray
    idx: MultiplicityIndices

    @property
    def trace_bar(self) -> float:
        return float(np.trace(self.b_bar))


def frame_blocks(w: WilliamsonDecomposition, idx: MultiplicityIndices) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split ``w.M`` into ``(M_bar, M_tilde, M_hat)`` of orders ``(m - i_m, r_m, n - m - j_m)``."""
    bar, tilde, hat = partition_indices(w.n, (idx.below, idx.r_m, idx.above))
    return w.M[:, bar], w.M[:, tilde], w.M[:, hat]


def hermitian_reduction(b_tilde: np.ndarray) -> np.ndarray:
    """``B11 + B22 + 1j (B12 - B12^T)`` for a ``2r x 2r`` block matrix."""
    r = b_tilde.shape[0] // 2
    b11, b12, b22 = b_tilde[:r, :r], b_tilde[:r, r:], b_tilde[r:, r:]
    return (b11 + b22) + 1j * (b12 - b12.T)


def reduce_direction(w: WilliamsonDecomposition, b, idx: MultiplicityIndices) -> ReducedDirection:
    """Compress the direction ``b`` through the frame blocks selected by ``idx``."""
    b = symmetrize(b, name="direction")
    if b.shape != w.M.shape:
        raise ValueError(f"direction shape {b.shape} does not match frame {w.M.shape}")
    check = multiplicity_indices(w.d, idx.m, idx.cluster_tol)
    if (check.n, check.i_m, check.j_m) != (idx.n, idx.i_m, idx.j_m):
        raise ValueError(f"multiplicity indices {idx} are inconsistent with the frame's "
                         f"symplectic eigenvalues (expected i_m={check.i_m}, j_m={check.j_m})")
    m_bar, m_tilde, _ = frame_blocks(w, idx)
    b_bar = -(m_bar.T @ b @ m_bar)
    b_tilde = -(m_tilde.T @ b @ m_tilde)
    b_tilde = 0.5 * (b_tilde + b_tilde.T)
    b_tt = hermitian_reduction(b_tilde)
    return ReducedDirection(b_bar, b_tilde, b_tt, idx)


def _frame(a, frame: WilliamsonDecomposition | None, pd_tol: float) -> WilliamsonDecomposition:
    return williamson(a, pd_tol=pd_tol) if frame is None else frame


def sigma_m(a, m: int, pd_tol: float = PD_TOL) -> float:
    """``-2 (d_1 + ... + d_m)``; ``m = 0`` gives the zero map."""
    d = symplectic_eigenvalues(a, pd_tol)
    if not 0 <= m <= d.shape[0]:
        raise ValueError(f"index m={m} out of range 0..{d.shape[0]}")
    return float(-2.0 * np.sum(d[:m]))


def sigma_dderiv(a, b, m: int, *, frame: WilliamsonDecomposition | None = None,
                 cluster_tol: float = CLUSTER_TOL, pd_tol: float = PD_TOL) -> float:
    """Directional derivative of ``sigma_m`` at ``a`` in direction ``b``.

    ``tr B_bar`` plus the sum of the ``i_m`` largest eigenvalues of ``B_tt``.
    ``m = 0`` returns 0. A precomputed Williamson frame of ``a`` may be passed
    as ``frame``; any valid frame gives the same value.
    """
    a = symmetrize(a)
    if m == 0:
        half_dim(a)
        return 0.0
    w = _frame(a, frame, pd_tol)
    idx = multiplicity_indices(w.d, m, cluster_tol)
    red = reduce_direction(w, b, idx)
    lam = herm_eigen(red.b_tt).values
    return red.trace_bar + float(np.sum(lam[:idx.i_m]))


def d_dderiv(a, b, m: int, *, frame: WilliamsonDecomposition | None = None,
             cluster_tol: float = CLUSTER_TOL, pd_tol: float = PD_TOL) -> float:
    """One-sided directional derivative of ``d_m`` at ``a`` in direction ``b``.

    Equals ``-lambda_{i_m}(B_tt) / 2`` with eigenvalues in descending order.
    """
    a = symmetrize(a)
    w = _frame(a, frame, pd_tol)
    idx = multiplicity_indices(w.d, m, cluster_tol)
    red = reduce_direction(w, b, idx)
    lam = herm_eigen(red.b_tt).values
    return -0.5 * float(lam[idx.i_m - 1])


def sigma_gradient(a, m: int, *, frame: WilliamsonDecomposition | None = None,
                   cluster_tol: float = CLUSTER_TOL, pd_tol: float = PD_TOL) -> np.ndarray:
    """Gradient ``-(M_bar M_bar^T + M_tilde M_tilde^T)`` of ``sigma_m`` when ``d_m < d_{m+1}``."""
    a = symmetrize(a)
    w = _frame(a, frame, pd_tol)
    idx = multiplicity_indices(w.d, m, cluster_tol)
    if idx.j_m > 0:
        members = ", ".join(str(k) for k in idx.cluster)
        raise GapConditionError(
            f"sigma_{m} is not differentiable here: d_{m} = d_{m + 1} = {w.d[m - 1]:.17g} "
            f"(cluster of indices {members})")
    cols = partition_indices(w.n, (m, w.n - m))[0]
    s = w.M[:, cols]
    g = -(s @ s.T)
    return 0.5 * (g + g.T)


@dataclass(frozen=True)
class DerivativeReport:
    """A derivative value with the frame quality and clustering it was computed from."""
    value: float
    which: str
    m: int
    idx: MultiplicityIndices
    symplectic_residual: float
    diagonal_residual: float
    b_tt_eigenvalues: np.ndarray


def derivative_report(a, b, m: int, which: str = "d", *, cluster_tol: float = CLUSTER_TOL,
                      pd_tol: float = PD_TOL) -> DerivativeReport:
    """Evaluate ``d_m'`` (``which='d'``) or ``sigma_m'`` (``which='sigma'``) with diagnostics."""
    a = symmetrize(a)
    w = williamson(a, pd_tol=pd_tol, check=False)
    idx = multiplicity_indices(w.d, m, cluster_tol)
    if which == "d":
        value = d_dderiv(a, b, m, frame=w, cluster_tol=cluster_tol)
    elif which == "sigma":
        value = sigma_dderiv(a, b, m, frame=w, cluster_tol=cluster_tol)
    else:
        raise ValueError(f"which must be 'd' or 'sigma', not {which!r}")
    lam = herm_eigen(reduce_direction(w, b, idx).b_tt).values
    return DerivativeReport(value=value, which=which, m=m, idx=idx,
                            symplectic_residual=verify_symplectic(w.M).residual,
                            diagonal_residual=diagonal_residual(a, w),
                            b_tt_eigenvalues=lam)
