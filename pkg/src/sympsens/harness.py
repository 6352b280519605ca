"""Independent oracles and test-case generators.

Nothing here uses the derivative formulas: finite differences only evaluate
symplectic eigenvalues, and the spectrum generator builds ``A`` from a known
Williamson form instead of decomposing it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._random import complex_gaussian, make_rng, orthonormal_columns
from .core import SympsensError, check_pd, herm_eigen, sqrt_pd, sym_eigen, symmetrize
from .sensitivity import CLUSTER_TOL, multiplicity_indices
from .williamson import WilliamsonDecomposition, partition_indices, standard_j


class FDError(SympsensError):
    """The function could not be evaluated at any point of the step grid."""


@dataclass(frozen=True)
class FDReport:
    """One-sided finite-difference estimate of ``f'(A; B)``.

    ``samples`` lists ``(t, quotient)`` for every step that could be
    evaluated, largest step first.
    """
    estimate: float
    step_used: float
    error_estimate: float
    samples: list = field(default_factory=list)


def default_fd_steps(a, b) -> tuple[float, float]:
    """``(t_min, t_max)`` with ``t_max = 1e-2 (1 + ||A||_2) / (1 + ||B||_2)`` and ``t_min = 1e-8``."""
    na = float(np.max(np.abs(sym_eigen(a).values)))
    nb = float(np.max(np.abs(sym_eigen(b).values)))
    return 1e-8, 1e-2 * (1.0 + na) / (1.0 + nb)


def fd_directional_derivative(f, a, b, t_min: float | None = None, t_max: float | None = None) -> FDReport:
    """Forward-difference quotients ``(f(A + t B) - f(A)) / t`` on ``t = t_max 2^-k``.

    The estimate is taken where successive quotients agree best: for the
    first ``k`` minimising ``|q_k - q_{k+1}|`` the estimate is ``q_{k+1}``
    and the error estimate is that difference. Points where ``f`` raises
    (e.g. ``A + t B`` leaves the positive definite cone) are skipped.
    """
    a = symmetrize(a)
    b = symmetrize(b, name="direction")
    if t_min is None or t_max is None:
        lo, hi = default_fd_steps(a, b)
        t_min = lo if t_min is None else t_min
        t_max = hi if t_max is None else t_max
    if not 0 < t_min <= t_max:
        raise ValueError(f"need 0 < t_min <= t_max, got {t_min}, {t_max}")
    f0 = float(f(a))
    samples = []
    t = t_max
    while t >= t_min:
        try:
            samples.append((t, (float(f(a + t * b)) - f0) / t))
        except SympsensError:
            pass
        t *= 0.5
    if not samples:
        raise FDError(f"f failed at every step in [{t_min:.3g}, {t_max:.3g}]")
    if len(samples) == 1:
        t, q = samples[0]
        return FDReport(q, t, np.inf, samples)
    q = np.array([s[1] for s in samples])
    diffs = np.abs(np.diff(q))
    k = int(np.argmin(diffs))
    return FDReport(float(q[k + 1]), samples[k + 1][0], float(diffs[k]), samples)


def orthosymplectic_from_unitary(x) -> np.ndarray:
    """``[[X, Y], [-Y, X]]`` for a unitary ``X + 1j Y``."""
    x = np.asarray(x, dtype=np.complex128)
    re, im = x.real, x.imag
    return np.block([[re, im], [-im, re]])


def random_unitary(n: int, rng) -> np.ndarray:
    return orthonormal_columns(complex_gaussian(make_rng(rng), (n, n)))


def random_symplectic(n: int, seed, spread: float = 0.0) -> np.ndarray:
    """Random ``2n x 2n`` symplectic matrix.

    ``spread = 0`` gives an orthosymplectic matrix from a random unitary;
    otherwise ``O1 diag(e^s, e^-s) O2`` with ``s`` uniform in ``[-spread, spread]``.
    """
    if spread < 0:
        raise ValueError(f"spread must be non-negative, got {spread}")
    rng = make_rng(seed)
    o1 = orthosymplectic_from_unitary(random_unitary(n, rng))
    if spread == 0:
        return o1
    s = rng.uniform(-spread, spread, n)
    o2 = orthosymplectic_from_unitary(random_unitary(n, rng))
    return (o1 * np.exp(np.concatenate([s, -s]))) @ o2


@dataclass(frozen=True)
class SpectrumSpec:
    """Target symplectic spectrum for :func:`pd_with_spectrum` (any order, all positive)."""
    d: tuple
    seed: int = 0
    spread: float = 0.5

    def __post_init__(self):
        d = tuple(float(x) for x in np.atleast_1d(self.d))
        if not d or not all(x > 0 for x in d):
            raise ValueError(f"symplectic spectrum must be non-empty and positive, got {d}")
        object.__setattr__(self, "d", d)


def pd_from_factors(d, n_factor) -> np.ndarray:
    """``N^T diag(d, d) N``."""
    d = np.asarray(d, dtype=np.float64)
    n_factor = np.asarray(n_factor, dtype=np.float64)
    a = n_factor.T @ (np.concatenate([d, d])[:, None] * n_factor)
    return 0.5 * (a + a.T)


def pd_with_spectrum(target: SpectrumSpec) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """Positive definite ``A = N^T (D+D) N`` whose symplectic eigenvalues are ``target.d``.

    Returns ``A`` and the certificate ``(N, d)``; ``N^{-1}`` is a Williamson frame of ``A``.
    """
    d = np.asarray(target.d)
    n_factor = random_symplectic(d.shape[0], target.seed, target.spread)
    return pd_from_factors(d, n_factor), (n_factor, d)


def random_symmetric(size: int, rng, scale: float = 1.0) -> np.ndarray:
    """Symmetric Gaussian matrix normalised to Frobenius norm ``scale``."""
    rng = make_rng(rng)
    x = rng.standard_normal((size, size))
    x = x + x.T
    return scale * x / np.linalg.norm(x)


def random_psd(size: int, rng, rank: int | None = None, scale: float = 1.0) -> np.ndarray:
    """``G G^T`` with ``G`` Gaussian of ``rank`` columns, normalised to Frobenius norm ``scale``."""
    rng = make_rng(rng)
    g = rng.standard_normal((size, size if rank is None else rank))
    p = g @ g.T
    return scale * p / np.linalg.norm(p)


def frame_from_factor(n_factor, d) -> WilliamsonDecomposition:
    """Williamson frame ``N^{-1}`` of ``N^T (D+D) N`` (sorted to ascending ``d``).

    ``N^{-1} = -J N^T J`` for symplectic ``N``, so no inversion is needed.
    """
    n_factor = np.asarray(n_factor)
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    j = standard_j(n)
    m = -j @ n_factor.T @ j
    order = np.argsort(d, kind="stable")
    cols = np.concatenate([order, order + n])
    return WilliamsonDecomposition(m[:, cols], d[order])


def perturb_frame(w: WilliamsonDecomposition, seed, cluster_tol: float = CLUSTER_TOL) -> WilliamsonDecomposition:
    """Another valid Williamson frame of the same matrix.

    Right-multiplies ``M`` by an orthosymplectic matrix acting within each
    cluster of equal symplectic eigenvalues (a random unitary mixing of the
    cluster's pairs; a random phase for simple ones).
    """
    rng = make_rng(seed)
    n = w.n
    rot = np.zeros((2 * n, 2 * n))
    start = 1
    while start <= n:
        idx = multiplicity_indices(w.d, start, cluster_tol)
        r = idx.r_m
        block = orthosymplectic_from_unitary(random_unitary(r, rng))
        cols = partition_indices(n, (start - 1, r, n - start + 1 - r))[1]
        rot[np.ix_(cols, cols)] = block
        start += r
    return WilliamsonDecomposition(w.M @ rot, w.d.copy())


def random_symplectic_frame(n: int, m: int, seed, spread: float = 1.0) -> np.ndarray:
    """The first ``m`` pairs (columns ``u_1..u_m, v_1..v_m``) of a random symplectic matrix."""
    s = random_symplectic(n, seed, spread)
    return s[:, partition_indices(n, (m, n - m))[0]]


@dataclass(frozen=True)
class NonconvexityReport:
    phi_identity: np.ndarray
    phi_a: np.ndarray
    phi_midpoint: np.ndarray
    gap: np.ndarray
    gap_eigenvalues: np.ndarray
    verdict: str


def phi(a) -> np.ndarray:
    """``1j A^{1/2} J A^{1/2}``."""
    root = sqrt_pd(a)
    return 1j * (root @ standard_j(a.shape[0] // 2) @ root)


def nonconvexity_example() -> NonconvexityReport:
    """Midpoint test of ``A -> 1j A^{1/2} J A^{1/2}`` between ``I_2`` and ``diag(1, 4)``."""
    eye = np.eye(2)
    a = np.diag([1.0, 4.0])
    p_i, p_a, p_mid = phi(eye), phi(a), phi(0.5 * (eye + a))
    gap = p_mid - 0.5 * (p_i + p_a)
    lam = herm_eigen(gap).values
    if lam[0] > 0 and lam[-1] < 0:
        verdict = "indefinite: neither negative semidefinite nor positive semidefinite"
    elif lam[-1] >= 0:
        verdict = "positive semidefinite"
    else:
        verdict = "negative semidefinite"
    return NonconvexityReport(p_i, p_a, p_mid, gap, lam, verdict)


@dataclass(frozen=True)
class NormBoundReport:
    frame_norm_sq: float
    bound: float
    passed: bool


def norm_bound_check(a, w: WilliamsonDecomposition) -> NormBoundReport:
    """``||M||_F^2 <= 2 n kappa(A)`` with ``kappa = ||A||_2 ||A^{-1}||_2``."""
    values = check_pd(a, 0.0).values
    kappa = float(values[-1] / values[0])
    norm_sq = float(np.sum(w.M * w.M))
    bound = 2 * w.n * kappa
    return NormBoundReport(norm_sq, bound, norm_sq <= bound * (1 + 1e-9))
