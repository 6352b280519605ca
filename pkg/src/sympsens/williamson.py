"""Williamson normal form, symplectic eigenvalues and symplectic frames.

Columns of a Williamson frame ``M`` are ordered ``[u_1..u_n, v_1..v_n]`` so that
``M.T @ A @ M == diag(d, d)`` and ``M.T @ J @ M == J``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PD_TOL, SympsensError, herm_eigen, spectral_norm, sqrt_and_inverse_sqrt, symmetrize


class ResidualError(SympsensError):
    """A computed decomposition misses its residual tolerance."""

    def __init__(self, message: str, symplectic_residual: float, diagonal_residual: float):
        self.symplectic_residual = symplectic_residual
        self.diagonal_residual = diagonal_residual
        super().__init__(
            f"{message}: ||M^T J M - J||_F = {symplectic_residual:.3e}, "
            f"||M^T A M - (D+D)||_F = {diagonal_residual:.3e}")


def half_dim(a) -> int:
    size = np.shape(a)[0]
    if size % 2:
        raise ValueError(f"expected an even dimension, got {size}")
    return size // 2


def standard_j(n: int) -> np.ndarray:
    """The matrix ``[[0, I_n], [-I_n, 0]]``."""
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return j


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """Symplectic frame ``M`` and ascending symplectic eigenvalues ``d``."""
    M: np.ndarray
    d: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @property
    def u(self) -> np.ndarray:
        return self.M[:, :self.n]

    @property
    def v(self) -> np.ndarray:
        return self.M[:, self.n:]


@dataclass(frozen=True)
class SymplecticResidual:
    residual: float
    tol: float
    passed: bool


@dataclass(frozen=True)
class EigenPairResidual:
    """Worst residuals of the symplectic eigenpair conditions.

    ``eigen`` covers ``A u_j = d_j J v_j`` and ``A v_j = -d_j J u_j``;
    ``orthogonality`` covers ``<u_j, J u_k> = <v_j, J v_k> = 0``;
    ``normalization`` covers ``<u_j, J v_k> = delta_jk``.
    """
    eigen: float
    orthogonality: float
    normalization: float
    per_pair: np.ndarray
    tol: float
    passed: bool

    @property
    def worst(self) -> float:
        return max(self.eigen, self.orthogonality, self.normalization)


def symplectic_eigenvalues(a, pd_tol: float = PD_TOL) -> np.ndarray:
    """Ascending symplectic eigenvalues of a positive definite matrix.

    These are the positive eigenvalues of the Hermitian matrix
    ``1j * A^{1/2} J A^{1/2}``.
    """
    a = symmetrize(a)
    n = half_dim(a)
    root, _, _ = sqrt_and_inverse_sqrt(a, pd_tol)
    k = root @ standard_j(n) @ root
    values = herm_eigen(1j * k).values
    return np.ascontiguousarray(values[:n][::-1])


def _pair_columns(w: np.ndarray) -> np.ndarray:
    """Turn eigenvectors ``p + 1j q`` of ``1j K`` into the columns ``sqrt(2) [q.., p..]``.

    Each pair vector ``q + 1j p`` (parallel to ``R u + 1j R v``) is first rotated
    so that its largest-magnitude entry is real positive.
    """
    z = 1j * w.conj()
    idx = np.argmax(np.abs(z), axis=0)
    lead = z[idx, np.arange(z.shape[1])]
    z = z * (np.abs(lead) / lead)
    return np.sqrt(2.0) * np.hstack([z.real, z.imag])


def williamson(a, *, pd_tol: float = PD_TOL, check: bool = True,
               rtol: float = 1e-9) -> WilliamsonDecomposition:
    """Williamson decomposition of a positive definite matrix.

    Parameters
    ----------
    a : array_like, shape (2n, 2n)
        Symmetric positive definite matrix.
    check : bool
        Verify the result and raise :class:`ResidualError` when
        ``||M^T J M - J||_F > rtol * ||M||_F^2`` or
        ``||M^T A M - (D+D)||_F > rtol * ||A||_F``.

    Notes
    -----
    With ``R = A^{1/2}`` the skew matrix ``K = R J R`` has Hermitian companion
    ``1j * K`` whose eigenvector ``p + 1j q`` for eigenvalue ``d > 0`` satisfies
    ``K p = d q`` and ``K q = -d p``. Stacking ``sqrt(2) [q_1..q_n, p_1..p_n]``
    gives an orthogonal ``Q`` with ``Q^T K Q = [[0, D], [-D, 0]]`` and then
    ``M = R^{-1} Q (D+D)^{1/2}``.
    """
    a = symmetrize(a)
    n = half_dim(a)
    root, inv_root, _ = sqrt_and_inverse_sqrt(a, pd_tol)
    k = root @ standard_j(n) @ root
    eig = herm_eigen(1j * k)
    d = eig.values[:n][::-1].copy()
    q = _pair_columns(eig.vectors[:, :n][:, ::-1])
    scale = np.sqrt(np.concatenate([d, d]))
    m = (inv_root @ q) * scale
    out = WilliamsonDecomposition(M=m, d=d)
    if check:
        sym = verify_symplectic(m, rtol * float(np.sum(m * m)))
        diag = diagonal_residual(a, out)
        if not sym.passed or diag > rtol * np.linalg.norm(a):
            raise ResidualError("Williamson decomposition failed its residual check",
                                sym.residual, diag)
    return out


def diagonal_residual(a, w: WilliamsonDecomposition) -> float:
    """``||M^T A M - diag(d, d)||_F``."""
    target = np.diag(np.concatenate([w.d, w.d]))
    return float(np.linalg.norm(w.M.T @ a @ w.M - target))


def verify_symplectic(m, tol: float = 1e-9) -> SymplecticResidual:
    """Frobenius residual ``||M^T J M - J||_F`` and whether it is within ``tol``."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    j = standard_j(half_dim(m))
    res = float(np.linalg.norm(m.T @ j @ m - j))
    return SymplecticResidual(res, tol, res <= tol)


def verify_eigen_pairs(a, w: WilliamsonDecomposition, tol: float = 1e-8) -> EigenPairResidual:
    """Check the symplectic eigenpair and symplectic orthonormality conditions.

    The frame ``w.M`` may have ``2m <= 2n`` columns (a partial frame), in which
    case ``w.d`` has length ``m``.
    """
    a = symmetrize(a)
    n = half_dim(a)
    m = w.d.shape[0]
    frame = np.asarray(w.M, dtype=np.float64)
    if frame.shape != (2 * n, 2 * m):
        raise ValueError(f"frame shape {frame.shape} does not match A ({a.shape}) and d ({m},)")
    j = standard_j(n)
    u, v = frame[:, :m], frame[:, m:]
    ru = a @ u - (j @ v) * w.d
    rv = a @ v + (j @ u) * w.d
    per_pair = np.maximum(np.linalg.norm(ru, axis=0), np.linalg.norm(rv, axis=0))
    eigen = float(per_pair.max()) if m else 0.0
    ortho = float(max(np.abs(u.T @ j @ u).max(initial=0.0), np.abs(v.T @ j @ v).max(initial=0.0)))
    norm = float(np.abs(u.T @ j @ v - np.eye(m)).max(initial=0.0))
    passed = max(eigen, ortho, norm) <= tol
    return EigenPairResidual(eigen, ortho, norm, per_pair, tol, passed)


@dataclass(frozen=True)
class ColumnPartition:
    """Symplectic column partition of a matrix with ``2m`` columns."""
    orders: tuple
    index_sets: tuple
    blocks: tuple

    def reassemble(self) -> np.ndarray:
        total = sum(len(ix) for ix in self.index_sets)
        rows = self.blocks[0].shape[0] if self.blocks else 0
        out = np.zeros((rows, total))
        for ix, block in zip(self.index_sets, self.blocks):
            out[:, ix] = block
        return out


def partition_indices(m: int, orders) -> list[np.ndarray]:
    """Zero-based column index sets of the symplectic partition of order ``orders``.

    Block ``i`` takes columns ``s..s+a_i-1`` and ``m+s..m+s+a_i-1`` where
    ``s = a_1 + ... + a_{i-1}``. Zero orders give empty index sets.
    """
    orders = [int(x) for x in orders]
    if any(x < 0 for x in orders):
        raise ValueError(f"orders must be non-negative, got {orders}")
    if sum(orders) != m:
        raise ValueError(f"orders {orders} sum to {sum(orders)}, expected {m}")
    out = []
    start = 0
    for x in orders:
        first = np.arange(start, start + x)
        out.append(np.concatenate([first, first + m]))
        start += x
    return out


def symplectic_column_partition(s, orders) -> ColumnPartition:
    s = np.asarray(s)
    if s.ndim != 2 or s.shape[1] % 2:
        raise ValueError(f"expected a matrix with an even number of columns, got {s.shape}")
    sets = partition_indices(s.shape[1] // 2, orders)
    return ColumnPartition(tuple(int(x) for x in orders), tuple(sets), tuple(s[:, ix] for ix in sets))


def extend_to_symplectic_basis(a, partial, *, pd_tol: float = PD_TOL,
                               tol: float = 1e-8) -> WilliamsonDecomposition:
    """Complete a symplectically orthonormal set of eigenvector pairs of ``a``.

    Parameters
    ----------
    partial : array_like, shape (2n, 2m)
        Columns ``[u_1..u_m, v_1..v_m]``; each ``(u_j, v_j)`` must be a
        normalised symplectic eigenvector pair of ``a`` and the set must be
        symplectically orthonormal.

    Returns
    -------
    WilliamsonDecomposition
        A full frame whose columns ``j`` and ``n + j`` for ``j < m`` are the
        given pairs. The remaining pairs are sorted by symplectic eigenvalue;
        the given pairs keep their order.
    """
    a = symmetrize(a)
    n = half_dim(a)
    partial = np.asarray(partial, dtype=np.float64)
    if partial.ndim != 2 or partial.shape[0] != 2 * n or partial.shape[1] % 2:
        raise ValueError(f"partial frame shape {partial.shape} incompatible with A {a.shape}")
    m = partial.shape[1] // 2
    u, v = partial[:, :m], partial[:, m:]
    j = standard_j(n)
    # recover d_j = <u_j, A u_j> since <u_j, J v_j> = 1
    d_given = np.einsum("ij,ij->j", u, a @ u)
    report = verify_eigen_pairs(a, WilliamsonDecomposition(partial, d_given), tol * max(1.0, spectral_norm(a)))
    if not report.passed:
        raise ValueError(f"partial frame is not a symplectically orthonormal set of eigenvector pairs "
                         f"(worst residual {report.worst:.3e})")
    if m == n:
        return WilliamsonDecomposition(partial.copy(), d_given)

    # Work in the Hermitian picture: pairs (u, v) correspond to vectors
    # R u - 1j R v of 1j R J R for eigenvalue d. The complement of the given
    # pairs' span and its conjugate is invariant; diagonalise the compressed
    # operator there.
    root, inv_root, _ = sqrt_and_inverse_sqrt(a, pd_tol)
    k = root @ j @ root
    given = np.hstack([root @ u, root @ v])
    # orthonormal basis of span(given)^perp in R^{2n}
    q_full, _ = np.linalg.qr(np.hstack([given, np.eye(2 * n)]))
    comp = q_full[:, 2 * m:2 * n]
    # orthogonality of q_full columns against `given` follows from the
    # pairs being symplectically orthogonal (R u_j, R v_j span K-invariant planes)
    k_small = comp.T @ k @ comp
    eig = herm_eigen(1j * k_small)
    r = n - m
    d_new = eig.values[:r][::-1].copy()
    q = _pair_columns(comp @ eig.vectors[:, :r][:, ::-1])
    scale = np.sqrt(np.concatenate([d_new, d_new]))
    new = (inv_root @ q) * scale
    frame = np.hstack([u, new[:, :r], v, new[:, r:]])
    return WilliamsonDecomposition(frame, np.concatenate([d_given, d_new]))
