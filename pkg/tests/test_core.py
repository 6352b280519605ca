import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sympsens import kernels
from sympsens.core import (ConvergenceError, NotPositiveDefiniteError, SympsensError, asymmetry,
                           check_pd, condition_number, herm_eigen, sqrt_and_inverse_sqrt, sqrt_pd,
                           sym_eigen, symmetrize)

from conftest import random_pd

seeds = st.integers(0, 2**32 - 1)


class TestSymEigen:
    def test_identity(self):
        eig = sym_eigen(np.eye(2))
        np.testing.assert_array_equal(eig.values, [1.0, 1.0])
        np.testing.assert_allclose(eig.vectors.T @ eig.vectors, np.eye(2), atol=1e-15)

    def test_diagonal(self):
        eig = sym_eigen(np.diag([4.0, 1.0]))
        np.testing.assert_array_equal(eig.values, [1.0, 4.0])
        np.testing.assert_allclose(np.abs(eig.vectors), [[0, 1], [1, 0]], atol=1e-15)

    def test_exchange_matrix(self):
        eig = sym_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(eig.values, [-1.0, 1.0], atol=1e-15)
        s = 1 / np.sqrt(2)
        # columns (1, -1)/sqrt2 and (1, 1)/sqrt2 up to sign
        np.testing.assert_allclose(np.abs(eig.vectors.T @ [[s, s], [-s, s]]), np.eye(2), atol=1e-15)

    def test_descending(self):
        eig = sym_eigen(np.diag([1.0, 3.0, 2.0]), order="descending")
        np.testing.assert_array_equal(eig.values, [3.0, 2.0, 1.0])

    def test_bad_order(self):
        with pytest.raises(ValueError, match="order"):
            sym_eigen(np.eye(2), order="sideways")

    def test_empty(self):
        assert sym_eigen(np.zeros((0, 0))).values.shape == (0,)

    @given(seed=seeds, size=st.integers(1, 16))
    def test_reconstruction(self, seed, size):
        rng = np.random.default_rng(seed)
        s = rng.standard_normal((size, size))
        s = s + s.T
        eig = sym_eigen(s)
        assert np.all(np.diff(eig.values) >= 0)
        assert np.linalg.norm(eig.reconstruct() - s) <= 1e-9 * np.linalg.norm(s)
        np.testing.assert_allclose(eig.vectors.T @ eig.vectors, np.eye(size), atol=1e-12)
        np.testing.assert_allclose(eig.values, np.linalg.eigvalsh(s), atol=1e-12 * np.abs(s).max())


class TestHermEigen:
    def test_scalar(self):
        np.testing.assert_array_equal(herm_eigen(np.array([[-6.0]])).values, [-6.0])

    def test_phi_of_example_matrix(self):
        h = 1j * np.array([[0.0, 2.0], [-2.0, 0.0]])
        np.testing.assert_array_equal(herm_eigen(h).values, [2.0, -2.0])

    def test_diagonal_descending(self):
        np.testing.assert_array_equal(herm_eigen(np.diag([-2.0, -4.0])).values, [-2.0, -4.0])

    def test_uses_hermitian_part(self):
        # (H + H^H)/2 of [[0, 1j], [1j, 0]] is zero
        np.testing.assert_array_equal(herm_eigen(np.array([[0.0, 1j], [1j, 0.0]])).values, [0.0, 0.0])

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            herm_eigen(np.ones((2, 3), dtype=complex))

    @given(seed=seeds, size=st.integers(1, 12))
    def test_reconstruction(self, seed, size):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        h = x + x.conj().T
        eig = herm_eigen(h)
        v = eig.vectors
        assert np.all(np.diff(eig.values) <= 0)
        assert np.linalg.norm((v * eig.values) @ v.conj().T - h) <= 1e-9 * np.linalg.norm(h)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(size), atol=1e-12)

    @given(seed=seeds, size=st.integers(1, 10))
    def test_real_embedding_matches_sym_eigen(self, seed, size):
        rng = np.random.default_rng(seed)
        s = rng.standard_normal((size, size))
        s = s + s.T
        np.testing.assert_allclose(herm_eigen(s.astype(complex)).values,
                                   sym_eigen(s, order="descending").values, atol=1e-10)


class TestSqrt:
    def test_identity(self):
        np.testing.assert_array_equal(sqrt_pd(np.eye(4)), np.eye(4))

    @pytest.mark.parametrize("diag, root", [([1.0, 4.0], [1.0, 2.0]),
                                            ([1.0, 9.0, 4.0, 16.0], [1.0, 3.0, 2.0, 4.0])])
    def test_diagonal(self, diag, root):
        np.testing.assert_allclose(sqrt_pd(np.diag(diag)), np.diag(root), atol=1e-15)

    def test_inverse(self, rng):
        a = random_pd(rng, 6, kappa=1e4)
        root, inv_root, _ = sqrt_and_inverse_sqrt(a)
        np.testing.assert_allclose(root @ inv_root, np.eye(6), atol=1e-10)

    @given(seed=seeds, size=st.integers(1, 16), log_kappa=st.floats(0.0, 6.0))
    def test_involution(self, seed, size, log_kappa):
        a = random_pd(np.random.default_rng(seed), size, kappa=10.0**log_kappa)
        r = sqrt_pd(a)
        np.testing.assert_array_equal(r, r.T)
        assert np.linalg.norm(r @ r - a) <= 1e-10 * np.linalg.norm(a)

    def test_not_pd_message(self):
        with pytest.raises(NotPositiveDefiniteError, match="smallest eigenvalue -1") as info:
            sqrt_pd(np.diag([1.0, -1.0]))
        assert info.value.smallest_eigenvalue == -1.0

    def test_singular_is_not_pd(self):
        with pytest.raises(NotPositiveDefiniteError):
            check_pd(np.diag([1.0, 0.0]))

    def test_condition_number(self):
        assert condition_number(np.diag([1.0, 4.0])) == 4.0


class TestValidation:
    def test_non_square(self):
        with pytest.raises(ValueError, match="square"):
            symmetrize(np.ones((2, 3)))

    def test_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            symmetrize(np.array([[1.0, np.nan], [np.nan, 1.0]]))

    def test_symmetrize_and_asymmetry(self):
        a = np.array([[1.0, 2.0], [0.0, 1.0]])
        np.testing.assert_array_equal(symmetrize(a), [[1.0, 1.0], [1.0, 1.0]])
        assert asymmetry(a) == 2.0

    def test_error_hierarchy(self):
        assert issubclass(NotPositiveDefiniteError, SympsensError)
        assert issubclass(ConvergenceError, SympsensError)
        err = ConvergenceError(3.5, 60)
        assert "3.5" in str(err) and "60" in str(err)


class TestKernels:
    @given(seed=seeds, size=st.integers(1, 12))
    def test_compiled_matches_source(self, seed, size):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        h = x + x.conj().T
        v1, *_ = kernels.hermitian_eigh(h.real, h.imag, accelerated=True)
        v2, *_ = kernels.hermitian_eigh(h.real, h.imag, accelerated=False)
        np.testing.assert_allclose(v1, v2, atol=1e-12 * np.abs(h).max())

    def test_two_by_two_block_is_exact(self):
        values, *_ = kernels.hermitian_eigh(np.zeros((2, 2)), np.array([[0.0, 2.0], [-2.0, 0.0]]))
        np.testing.assert_array_equal(values, [-2.0, 2.0])

    @pytest.mark.parametrize("size", [1, 2, 5])
    def test_zero_matrix(self, size):
        values, vr, vi, sweeps = kernels.hermitian_eigh(np.zeros((size, size)), np.zeros((size, size)))
        np.testing.assert_array_equal(values, np.zeros(size))
        np.testing.assert_allclose(vr, np.eye(size))
        assert sweeps >= 0

    @pytest.mark.parametrize("accelerated", [True, False])
    @pytest.mark.parametrize("scale", [1e-300, 1e-161, 1e150, 1e300])
    def test_extreme_scales(self, rng, scale, accelerated):
        # unscaled, tiny matrices stall QL through underflow in the deflation product
        x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        h = (x + x.conj().T) / 8.0
        ref, *_ = kernels.hermitian_eigh(h.real, h.imag, accelerated=accelerated)
        values, vr, vi, sweeps = kernels.hermitian_eigh(scale * h.real, scale * h.imag,
                                                        accelerated=accelerated)
        assert sweeps >= 0
        np.testing.assert_allclose(values / scale, ref, rtol=1e-12, atol=1e-12)
        v = vr + 1j * vi
        np.testing.assert_allclose(h @ v, v * ref, atol=1e-12)

    def test_rank_one_update_at_tiny_scale(self):
        u = np.array([1.0, -2.0, 0.5, 3.0])
        b = 1e-161 * np.outer(u, u)
        eig = sym_eigen(b)
        np.testing.assert_allclose(eig.values[-1], 1e-161 * (u @ u), rtol=1e-12)
        np.testing.assert_allclose(eig.values[:3], 0.0, atol=1e-175)

    def test_tridiagonal_form(self, rng):
        x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        h = x + x.conj().T
        diag, off, wr, wi = kernels.herm_tridiagonalize_py(h.real.copy(), h.imag.copy())
        t = np.diag(diag) + np.diag(off[:-1], 1) + np.diag(off[:-1], -1)
        w = wr + 1j * wi
        assert off[-1] == 0.0 and np.all(off >= 0)
        np.testing.assert_allclose(w @ t @ w.conj().T, h, atol=1e-12)


def test_numpy_fallback_mode():
    """With numba disabled the package runs the plain sources and gives the same answers."""
    code = (
        "import numpy as np\n"
        "from sympsens._jit import NUMBA_ENABLED\n"
        "from sympsens import kernels, symplectic_eigenvalues\n"
        "assert not NUMBA_ENABLED\n"
        "assert kernels.tridiagonal_ql is kernels.tridiagonal_ql_py\n"
        "print(repr(symplectic_eigenvalues(np.diag([1.0, 9.0, 4.0, 16.0])).tolist()))\n"
    )
    env = dict(os.environ, SYMPSENS_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "[2.0, 12.0]"
