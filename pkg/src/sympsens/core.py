"""Dense symmetric/Hermitian eigendecompositions and positive definite square roots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

#: Relative positive-definiteness threshold: smallest eigenvalue must exceed pd_tol * ||A||_2.
PD_TOL = 1e-12


class SympsensError(Exception):
    """Base class for errors raised by this package."""


class ConvergenceError(SympsensError, ArithmeticError):
    """The QL iteration did not converge."""

    def __init__(self, norm: float, sweeps: int):
        self.norm = norm
        self.sweeps = sweeps
        super().__init__(
            f"eigensolver failed to converge after {sweeps} QL sweeps "
            f"(matrix 2-norm estimate {norm:.6g})")


class NotPositiveDefiniteError(SympsensError, ValueError):
    """Raised when a matrix that must be positive definite is not."""

    def __init__(self, smallest_eigenvalue: float, norm: float | None = None):
        self.smallest_eigenvalue = smallest_eigenvalue
        self.norm = norm
        msg = f"matrix is not positive definite: smallest eigenvalue {smallest_eigenvalue:.17g}"
        if norm is not None:
            msg += f" (2-norm {norm:.6g})"
        super().__init__(msg)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues and column-orthonormal eigenvectors.

    ``values`` are sorted per the order requested from the solver.
    """
    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values) @ v.conj().T


def symmetrize(a, *, name: str = "matrix") -> np.ndarray:
    """Return ``(a + a.T) / 2`` as a fresh float64 array, after shape checks."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return 0.5 * (a + a.T)


def asymmetry(a) -> float:
    """Largest ``|a_ij - a_ji|``."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.T))) if a.size else 0.0


def hermitize(h, *, name: str = "matrix") -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"{name} must be square, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError(f"{name} has non-finite entries")
    return 0.5 * (h + h.conj().T)


def _solve(re, im, order):
    values, vr, vi, sweeps = kernels.hermitian_eigh(re, im)
    if sweeps < 0:
        norm = float(np.max(np.sum(np.abs(re) + np.abs(im), axis=0))) if re.size else 0.0
        raise ConvergenceError(norm, -sweeps - 1)
    if order == "descending":
        values, vr, vi = values[::-1], vr[:, ::-1], vi[:, ::-1]
    elif order != "ascending":
        raise ValueError(f"order must be 'ascending' or 'descending', not {order!r}")
    return np.ascontiguousarray(values), np.ascontiguousarray(vr), np.ascontiguousarray(vi)


def sym_eigen(s, order: str = "ascending") -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    s : array_like, shape (k, k)
        Symmetric matrix (symmetrised on entry).
    order : {'ascending', 'descending'}
        Sort order of the returned eigenvalues.

    Returns
    -------
    EigenDecomposition
        Real eigenvalues and a real orthogonal eigenvector matrix.
    """
    s = symmetrize(s)
    if s.shape[0] == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0)))
    values, vr, _ = _solve(s, np.zeros_like(s), order)
    return EigenDecomposition(values, vr)


def herm_eigen(h) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The complex input is split into real and imaginary parts before it reaches
    the kernels; the returned eigenvectors are reassembled as ``complex128``.
    """
    h = hermitize(h)
    if h.shape[0] == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    values, vr, vi = _solve(np.ascontiguousarray(h.real), np.ascontiguousarray(h.imag), "descending")
    return EigenDecomposition(values, vr + 1j * vi)


def spectral_norm(a) -> float:
    """2-norm of a symmetric matrix."""
    values = sym_eigen(a).values
    return float(np.max(np.abs(values))) if values.size else 0.0


def check_pd(a, pd_tol: float = PD_TOL) -> EigenDecomposition:
    """Eigendecompose ``a`` and raise :class:`NotPositiveDefiniteError` unless it is PD.

    The threshold is relative: ``lambda_min > pd_tol * ||a||_2``.
    """
    eig = sym_eigen(a)
    if eig.values.size == 0:
        raise ValueError("empty matrix")
    lo, hi = eig.values[0], np.max(np.abs(eig.values))
    if not lo > pd_tol * hi:
        raise NotPositiveDefiniteError(float(lo), float(hi))
    return eig


def _pd_power(eig: EigenDecomposition, power: float) -> np.ndarray:
    v = eig.vectors
    out = (v * eig.values ** power) @ v.T
    return 0.5 * (out + out.T)


def sqrt_pd(a, pd_tol: float = PD_TOL) -> np.ndarray:
    """Symmetric positive definite square root of a PD matrix."""
    return _pd_power(check_pd(a, pd_tol), 0.5)


def sqrt_and_inverse_sqrt(a, pd_tol: float = PD_TOL) -> tuple[np.ndarray, np.ndarray, EigenDecomposition]:
    """Return ``(A^{1/2}, A^{-1/2}, eig(A))`` from a single eigendecomposition."""
    eig = check_pd(a, pd_tol)
    return _pd_power(eig, 0.5), _pd_power(eig, -0.5), eig


def condition_number(a) -> float:
    """``||A||_2 * ||A^{-1}||_2`` for a symmetric positive definite matrix."""
    values = check_pd(a, 0.0).values
    return float(values[-1] / values[0])
