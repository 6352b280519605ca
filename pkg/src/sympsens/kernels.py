"""Eigensolver kernels: Householder tridiagonalisation and implicit-shift QL.

Complex matrices are carried as separate real and imaginary float64 arrays.
A real symmetric matrix is the special case of a zero imaginary part, in
which every reflector and phase stays real.

Each kernel exists in two forms: the ``*_py`` function (plain numpy, always
available) and the exported name, which is the numba-compiled version of the
same source unless numba is disabled (see :mod:`sympsens._jit`).
"""

import math
import time

import numpy as np

from ._jit import maybe_njit

#: QL sweeps allowed per eigenvalue before giving up.
QL_MAX_SWEEPS = 60


def herm_tridiagonalize_py(ar, ai):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Parameters
    ----------
    ar, ai : ndarray, shape (k, k)
        Real and imaginary parts of a Hermitian matrix. Not modified.

    Returns
    -------
    diag, offdiag : ndarray, shape (k,)
        Diagonal and sub-diagonal of the real tridiagonal matrix ``T``;
        ``offdiag[k-1]`` is zero.
    wr, wi : ndarray, shape (k, k)
        Unitary ``W`` with ``A = W T W^H``.
    """
    k = ar.shape[0]
    hr = ar.copy()
    hi = ai.copy()
    wr = np.eye(k)
    wi = np.zeros((k, k))
    vr = np.zeros(k)
    vi = np.zeros(k)
    pr = np.zeros(k)
    pi = np.zeros(k)
    tr = np.zeros(k)
    ti = np.zeros(k)

    for c in range(k - 2):
        lo = c + 1
        tail = 0.0
        for j in range(lo + 1, k):
            tail += hr[j, c] * hr[j, c] + hi[j, c] * hi[j, c]
        if tail == 0.0:
            continue
        x0r = hr[lo, c]
        x0i = hi[lo, c]
        ax0 = math.hypot(x0r, x0i)
        sigma = math.sqrt(tail + ax0 * ax0)
        if ax0 > 0.0:
            phr = x0r / ax0
            phi = x0i / ax0
        else:
            phr = 1.0
            phi = 0.0
        # v = x + phase*sigma*e1 sends x to -phase*sigma*e1
        for j in range(lo, k):
            vr[j] = hr[j, c]
            vi[j] = hi[j, c]
        vr[lo] += phr * sigma
        vi[lo] += phi * sigma
        vnorm2 = 0.0
        for j in range(lo, k):
            vnorm2 += vr[j] * vr[j] + vi[j] * vi[j]
        tau = 2.0 / vnorm2

        # p = tau * S v on the trailing block S = H[lo:, lo:]
        for i in range(lo, k):
            sr = 0.0
            si = 0.0
            for j in range(lo, k):
                sr += hr[i, j] * vr[j] - hi[i, j] * vi[j]
                si += hr[i, j] * vi[j] + hi[i, j] * vr[j]
            pr[i] = tau * sr
            pi[i] = tau * si
        # K = tau/2 * v^H p is real for Hermitian S
        kk = 0.0
        for j in range(lo, k):
            kk += vr[j] * pr[j] + vi[j] * pi[j]
        kk *= 0.5 * tau
        for j in range(lo, k):
            pr[j] -= kk * vr[j]
            pi[j] -= kk * vi[j]
        # S <- S - v q^H - q v^H
        for i in range(lo, k):
            for j in range(lo, k):
                hr[i, j] -= (vr[i] * pr[j] + vi[i] * pi[j]) + (pr[i] * vr[j] + pi[i] * vi[j])
                hi[i, j] -= (vi[i] * pr[j] - vr[i] * pi[j]) + (pi[i] * vr[j] - pr[i] * vi[j])
        hr[lo, c] = -phr * sigma
        hi[lo, c] = -phi * sigma
        hr[c, lo] = -phr * sigma
        hi[c, lo] = phi * sigma
        for j in range(lo + 1, k):
            hr[j, c] = 0.0
            hi[j, c] = 0.0
            hr[c, j] = 0.0
            hi[c, j] = 0.0

        # W <- W P, P = I - tau v v^H acting on columns lo..k-1
        for i in range(k):
            sr = 0.0
            si = 0.0
            for j in range(lo, k):
                sr += wr[i, j] * vr[j] - wi[i, j] * vi[j]
                si += wr[i, j] * vi[j] + wi[i, j] * vr[j]
            tr[i] = tau * sr
            ti[i] = tau * si
        for i in range(k):
            for j in range(lo, k):
                wr[i, j] -= tr[i] * vr[j] + ti[i] * vi[j]
                wi[i, j] -= ti[i] * vr[j] - tr[i] * vi[j]

    diag = np.zeros(k)
    offdiag = np.zeros(k)
    for i in range(k):
        diag[i] = hr[i, i]
    # diagonal phase similarity makes the sub-diagonal real and non-negative
    fr = 1.0
    fi = 0.0
    for i in range(k - 1):
        er = hr[i + 1, i]
        ei = hi[i + 1, i]
        ae = math.hypot(er, ei)
        offdiag[i] = ae
        if ae > 0.0:
            gr = (fr * er - fi * ei) / ae
            gi = (fr * ei + fi * er) / ae
            fr = gr
            fi = gi
        for j in range(k):
            xr = wr[j, i + 1]
            xi = wi[j, i + 1]
            wr[j, i + 1] = xr * fr - xi * fi
            wi[j, i + 1] = xr * fi + xi * fr
    return diag, offdiag, wr, wi


def tridiagonal_ql_py(diag, offdiag, z):
    """Implicit-shift QL iteration on a real symmetric tridiagonal matrix.

    Parameters
    ----------
    diag : ndarray, shape (k,)
        Diagonal; overwritten with the eigenvalues in ascending order.
    offdiag : ndarray, shape (k,)
        ``offdiag[i]`` couples rows ``i`` and ``i + 1``; destroyed.
    z : ndarray, shape (k, k)
        Overwritten with ``z @ Z`` where ``Z`` holds the eigenvectors.

    Returns
    -------
    int
        Total number of QL sweeps, or ``-1 - sweeps`` if some eigenvalue
        did not converge within ``QL_MAX_SWEEPS`` sweeps.
    """
    k = diag.shape[0]
    e = offdiag
    d = diag
    eps = 2.220446049250313e-16
    f = 0.0
    tst1 = 0.0
    total = 0
    for l in range(k):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < k - 1:
            if abs(e[m]) <= eps * tst1:
                break
            m += 1
        if m == l + 1:
            # unreduced 2x2 block: closed form as in LAPACK dlaev2
            a = d[l] + f
            b = e[l]
            c = d[l + 1] + f
            sm = a + c
            df = a - c
            adf = abs(df)
            tb = b + b
            ab = abs(tb)
            if abs(a) > abs(c):
                acmx = a
                acmn = c
            else:
                acmx = c
                acmn = a
            if adf > ab:
                rt = adf * math.sqrt(1.0 + (ab / adf) ** 2)
            elif adf < ab:
                rt = ab * math.sqrt(1.0 + (adf / ab) ** 2)
            else:
                rt = ab * math.sqrt(2.0)
            if sm < 0.0:
                rt1 = 0.5 * (sm - rt)
                sgn1 = -1
                rt2 = (acmx / rt1) * acmn - (b / rt1) * b
            elif sm > 0.0:
                rt1 = 0.5 * (sm + rt)
                sgn1 = 1
                rt2 = (acmx / rt1) * acmn - (b / rt1) * b
            else:
                rt1 = 0.5 * rt
                rt2 = -0.5 * rt
                sgn1 = 1
            if df >= 0.0:
                cs = df + rt
                sgn2 = 1
            else:
                cs = df - rt
                sgn2 = -1
            if abs(cs) > ab:
                ct = -tb / cs
                sn1 = 1.0 / math.sqrt(1.0 + ct * ct)
                cs1 = ct * sn1
            elif ab == 0.0:
                cs1 = 1.0
                sn1 = 0.0
            else:
                tn = -cs / tb
                cs1 = 1.0 / math.sqrt(1.0 + tn * tn)
                sn1 = tn * cs1
            if sgn1 == sgn2:
                tn = cs1
                cs1 = -sn1
                sn1 = tn
            # (cs1, sn1) is the eigenvector of rt1
            for j in range(z.shape[0]):
                h = z[j, l]
                z[j, l] = cs1 * h + sn1 * z[j, l + 1]
                z[j, l + 1] = -sn1 * h + cs1 * z[j, l + 1]
            d[l] = rt1 - f
            d[l + 1] = rt2 - f
            e[l] = 0.0
            total += 1
        elif m > l:
            sweeps = 0
            while True:
                sweeps += 1
                total += 1
                if sweeps > QL_MAX_SWEEPS:
                    return -1 - total
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, k):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for j in range(z.shape[0]):
                        h = z[j, i + 1]
                        z[j, i + 1] = s * z[j, i] + c * h
                        z[j, i] = c * z[j, i] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= eps * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0

    # selection sort, ascending
    for i in range(k - 1):
        j = i
        p = d[i]
        for q in range(i + 1, k):
            if d[q] < p:
                j = q
                p = d[q]
        if j != i:
            d[j] = d[i]
            d[i] = p
            for r2 in range(z.shape[0]):
                p2 = z[r2, i]
                z[r2, i] = z[r2, j]
                z[r2, j] = p2
    return total


herm_tridiagonalize = maybe_njit(herm_tridiagonalize_py)
tridiagonal_ql = maybe_njit(tridiagonal_ql_py)


def compile_kernels() -> float:
    """Trigger numba compilation (or load it from the on-disk cache).

    Returns the wall time spent, in seconds. A no-op when numba is disabled.
    """
    start = time.perf_counter()
    for imag in (0.0, 1.0):
        hermitian_eigh(np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]]),
                       imag * np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 0.0]]))
    return time.perf_counter() - start


def hermitian_eigh(ar, ai, *, accelerated=True):
    """Full eigendecomposition of a Hermitian matrix given as (re, im) parts.

    Returns ``(values, vr, vi, sweeps)`` with ascending ``values``. ``sweeps``
    is negative when the QL iteration failed to converge.

    The input is scaled by a power of two so its largest entry lies in
    ``[0.5, 1)``; the scaling is exact and keeps the QL products away from
    underflow and overflow.
    """
    tridiag = herm_tridiagonalize if accelerated else herm_tridiagonalize_py
    ql = tridiagonal_ql if accelerated else tridiagonal_ql_py
    ar = np.asarray(ar, dtype=np.float64)
    ai = np.asarray(ai, dtype=np.float64)
    amax = max(float(np.max(np.abs(ar), initial=0.0)), float(np.max(np.abs(ai), initial=0.0)))
    shift = np.frexp(amax)[1] if 0.0 < amax < np.inf else 0
    diag, offdiag, wr, wi = tridiag(np.ascontiguousarray(np.ldexp(ar, -shift)),
                                    np.ascontiguousarray(np.ldexp(ai, -shift)))
    z = np.eye(diag.shape[0])
    sweeps = ql(diag, offdiag, z)
    return np.ldexp(diag, shift), wr @ z, wi @ z, sweeps
