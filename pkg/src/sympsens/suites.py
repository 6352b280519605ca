"""Randomised verification suites.

Each suite draws its cases from a seed, checks one family of identities at
fixed tolerances and returns a :class:`SuiteResult` with pass counts and the
worst residual seen for every check. ``SYMPSENS_WORKERS`` (default 1) caps
the number of threads used to run trials.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._random import make_rng, spawn
from .core import check_pd, herm_eigen
from .harness import (SpectrumSpec, fd_directional_derivative, nonconvexity_example, norm_bound_check,
                      pd_with_spectrum, perturb_frame, random_psd, random_symmetric,
                      random_symplectic_frame)
from .sensitivity import (d_dderiv, multiplicity_indices, reduce_direction, sigma_dderiv,
                          sigma_gradient, sigma_m)
from .subdifferential import (clarke_extreme_points, clarke_mp_dderiv, fenchel_extreme_points,
                              monotonicity_check, weyl_equality_witness, weyl_gap)
from .williamson import (diagonal_residual, partition_indices, symplectic_eigenvalues,
                         verify_eigen_pairs, verify_symplectic, williamson)

SUITES = ("williamson", "derivative", "gateaux", "subdiff", "extremal", "monotonicity", "example1")


@dataclass
class SuiteResult:
    name: str
    total: int = 0
    failed: int = 0
    worst: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> int:
        return self.total - self.failed

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.total > 0

    def record(self, check: str, value: float) -> None:
        value = float(value)
        if check not in self.worst or value > self.worst[check] or np.isnan(value):
            self.worst[check] = value

    def merge(self, case: "CaseResult") -> None:
        self.total += 1
        for check, value in case.values.items():
            self.record(check, value)
        if case.failed:
            self.failed += 1
            if len(self.failures) < 20:
                self.failures.append(f"{case.label}: {', '.join(case.failed)}")

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        worst = ", ".join(f"{k}={v:.3g}" for k, v in sorted(self.worst.items()))
        return f"{status} {self.name}: {self.passed}/{self.total} ({worst}) [{self.elapsed:.2f}s]"


@dataclass
class CaseResult:
    label: str
    values: dict = field(default_factory=dict)
    failed: list = field(default_factory=list)

    def check(self, name: str, value: float, tol: float) -> None:
        """Record ``value`` (a non-negative violation measure) and fail if it exceeds ``tol``."""
        value = float(value)
        self.values[name] = max(self.values.get(name, -np.inf), value)
        if not value <= tol:
            self.failed.append(f"{name}={value:.3g}>{tol:g}")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SYMPSENS_WORKERS", "1")))
    except ValueError:
        return 1


def _run(name: str, cases, fn) -> SuiteResult:
    start = time.perf_counter()
    result = SuiteResult(name)
    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(lambda c: fn(*c), cases))
    else:
        outcomes = [fn(*c) for c in cases]
    for case in outcomes:
        result.merge(case)
    result.elapsed = time.perf_counter() - start
    return result


def _pick_n(rng, n, lo, hi) -> int:
    return int(n) if n is not None else int(rng.integers(lo, hi + 1))


def random_spectrum(rng, n: int, degenerate: bool, min_gap: float = 0.0,
                    low: float = 0.5, high: float = 10.0) -> np.ndarray:
    """Ascending symplectic spectrum; ``degenerate`` forces bit-identical repeats.

    ``min_gap`` is the smallest relative separation between distinct values.
    """
    distinct = n
    if degenerate and n > 1:
        distinct = int(rng.integers(1, n))
    while True:
        vals = np.sort(rng.uniform(low, high, distinct))
        if distinct == 1 or np.all(np.diff(vals) >= min_gap * vals[1:]):
            break
    if distinct == n:
        return vals
    # every distinct value appears at least once, extra copies drawn at random
    counts = np.ones(distinct, dtype=int)
    for k in rng.integers(0, distinct, n - distinct):
        counts[k] += 1
    return np.repeat(vals, counts)


def conditioned_pd(rng, d, max_spread: float, kappa_max: float = 1e4):
    """``pd_with_spectrum`` with a random spread, shrunk until ``kappa(A) <= kappa_max``."""
    spread = float(rng.uniform(0.0, max_spread))
    seed = int(rng.integers(2**63))
    while True:
        a, cert = pd_with_spectrum(SpectrumSpec(tuple(d), seed=seed, spread=spread))
        vals = check_pd(a, 0.0).values
        if vals[-1] / vals[0] <= kappa_max:
            return a, cert
        spread *= 0.7


# --------------------------------------------------------------------------- williamson

def _williamson_case(label, rng, n):
    case = CaseResult(label)
    n = _pick_n(rng, n, 1, 8)
    d = random_spectrum(rng, n, degenerate=bool(rng.integers(2)))
    a, _ = conditioned_pd(rng, d, 1.5)
    w = williamson(a, check=False)
    norm_a = np.linalg.norm(a)
    case.check("symplectic_residual", verify_symplectic(w.M).residual, 1e-8)
    case.check("diagonal_residual_rel", diagonal_residual(a, w) / norm_a, 1e-8)
    case.check("spectrum_rel_error", np.max(np.abs(w.d - d) / d), 1e-8)
    route = symplectic_eigenvalues(a)
    case.check("route_rel_error", np.max(np.abs(route - w.d) / w.d), 1e-9)
    case.check("eigenpair_residual_rel", verify_eigen_pairs(a, w).worst / np.max(np.abs(check_pd(a).values)), 1e-8)
    nb = norm_bound_check(a, w)
    case.check("norm_bound_ratio_excess", nb.frame_norm_sq / nb.bound - 1.0, 1e-9)
    return case


def williamson_suite(trials: int = 500, seed=0, n: int | None = None) -> SuiteResult:
    """Williamson residuals, recovered spectra, route equivalence and the frame norm bound."""
    rngs = spawn(seed, trials)
    return _run("williamson", [(f"trial {k}", rngs[k], n) for k in range(trials)], _williamson_case)


# --------------------------------------------------------------------------- derivatives

def _d_value(m):
    return lambda x: symplectic_eigenvalues(x)[m - 1]


def _derivative_case(label, rng, n, degenerate):
    case = CaseResult(label)
    n = _pick_n(rng, n, 1, 6)
    if degenerate and n == 1:
        n = 2
    d = random_spectrum(rng, n, degenerate=degenerate, min_gap=0.1, low=1.0, high=5.0)
    a, _ = conditioned_pd(rng, d, 0.6, kappa_max=1e3)
    b = random_symmetric(2 * n, rng)
    m = int(rng.integers(1, n + 1))
    w = williamson(a)
    formula = d_dderiv(a, b, m, frame=w)
    fd = fd_directional_derivative(_d_value(m), a, b)
    case.check("fd_degenerate" if degenerate else "fd_separated", abs(fd.estimate - formula),
               1e-4 if degenerate else 5e-6)
    fd_sigma = fd_directional_derivative(lambda x: sigma_m(x, m), a, b)
    case.check("fd_sigma_degenerate" if degenerate else "fd_sigma_separated",
               abs(fd_sigma.estimate - sigma_dderiv(a, b, m, frame=w)),
               2e-4 if degenerate else 1e-5)
    for k in range(1, n + 1):
        rel = 2 * d_dderiv(a, b, k, frame=w) - (sigma_dderiv(a, b, k - 1, frame=w) - sigma_dderiv(a, b, k, frame=w))
        case.check("relation", abs(rel), 1e-9)
    # positive homogeneity and frame independence
    t = float(rng.uniform(0.1, 10.0))
    case.check("homogeneity_rel", abs(d_dderiv(a, t * b, m, frame=w) - t * formula) / max(1.0, abs(t * formula)), 1e-10)
    w2 = perturb_frame(w, rng)
    case.check("frame_independence", max(abs(d_dderiv(a, b, m, frame=w2) - formula),
                                         abs(sigma_dderiv(a, b, m, frame=w2) - sigma_dderiv(a, b, m, frame=w))), 1e-8)
    return case


def _piecewise_case(label):
    case = CaseResult(label)
    a, b = np.eye(4), np.diag([1.0, 2.0, 1.0, 2.0])
    case.check("piecewise_exact", max(abs(d_dderiv(a, b, 1) - 1.0), abs(d_dderiv(a, b, 2) - 2.0)), 1e-10)
    rel = [2 * d_dderiv(a, b, k) - (sigma_dderiv(a, b, k - 1) - sigma_dderiv(a, b, k)) for k in (1, 2)]
    case.check("relation", max(abs(x) for x in rel), 1e-9)
    return case


def derivative_suite(trials_separated: int = 200, trials_degenerate: int = 100, seed=0,
                     n: int | None = None) -> SuiteResult:
    """Directional derivative formulas against one-sided finite differences."""
    rngs = spawn(seed, trials_separated + trials_degenerate)
    cases = [(f"separated {k}", rngs[k], n, False) for k in range(trials_separated)]
    cases += [(f"degenerate {k}", rngs[trials_separated + k], n, True) for k in range(trials_degenerate)]
    result = _run("derivative", cases, _derivative_case)
    result.merge(_piecewise_case("I4 / diag(1,2,1,2)"))
    return result


def _gateaux_case(label, rng, n):
    case = CaseResult(label)
    n = _pick_n(rng, n, 1, 6)
    d = random_spectrum(rng, n, degenerate=bool(rng.integers(2)))
    a, _ = conditioned_pd(rng, d, 1.0)
    w = williamson(a)
    b = random_symmetric(2 * n, rng)
    # indices at the top of their cluster: d_m < d_{m+1}
    tops = [m for m in range(1, n + 1) if multiplicity_indices(w.d, m).j_m == 0]
    for m in tops:
        g = sigma_gradient(a, m, frame=w)
        s_plus = sigma_dderiv(a, b, m, frame=w)
        case.check("gradient_vs_dderiv", abs(float(np.sum(g * b)) - s_plus), 1e-8)
        case.check("two_sided", abs(sigma_dderiv(a, -b, m, frame=w) + s_plus), 1e-8)
    return case


def gateaux_suite(trials: int = 100, seed=0, n: int | None = None) -> SuiteResult:
    """Gradient of ``sigma_m`` at indices with ``d_m < d_{m+1}``."""
    rngs = spawn(seed, trials)
    return _run("gateaux", [(f"trial {k}", rngs[k], n) for k in range(trials)], _gateaux_case)


# --------------------------------------------------------------------------- subdifferentials

def _probes(rng, a, count):
    """Positive definite probe matrices: local perturbations, rescalings and unrelated matrices."""
    size = a.shape[0]
    lam_min = check_pd(a).values[0]
    out = []
    for k in range(count):
        kind = k % 3
        if kind == 0:
            p = a + random_symmetric(size, rng, scale=0.5 * lam_min * rng.uniform(0.01, 1.0))
        elif kind == 1:
            p = float(rng.uniform(0.5, 2.0)) * a + random_psd(size, rng, scale=rng.uniform(0, 1))
        else:
            d = random_spectrum(rng, size // 2, degenerate=False)
            p, _ = pd_with_spectrum(SpectrumSpec(tuple(d), seed=int(rng.integers(2**63)), spread=0.8))
        out.append(p)
    return out


def _subdiff_case(label, rng, n, count, probes):
    case = CaseResult(label)
    n = _pick_n(rng, n, 1, 5)
    d = random_spectrum(rng, n, degenerate=bool(rng.integers(2)))
    a, _ = conditioned_pd(rng, d, 1.0)
    w = williamson(a)
    b = random_symmetric(2 * n, rng)
    m = int(rng.integers(1, n + 1))
    idx = multiplicity_indices(w.d, m)

    # Fenchel subdifferential of sigma_m
    sample = fenchel_extreme_points(w, m, count, rng, direction=b)
    sig_a = sigma_m(a, m)
    for p in _probes(rng, a, probes):
        rhs = sigma_m(p, m) - sig_a
        for g in sample.elements:
            case.check("fenchel_violation", float(np.sum(g * (p - a))) - rhs, 1e-8)
    s_prime = sigma_dderiv(a, b, m, frame=w)
    case.check("fenchel_support", abs(sample.support(b) - s_prime), 1e-8)
    random_part = sample.elements[:sample.optimal]
    if random_part:
        case.check("fenchel_dominance", max(float(np.sum(g * b)) for g in random_part) - s_prime, 1e-9)

    # Clarke = Michel-Penot subdifferential of -d_m
    lam = herm_eigen(reduce_direction(w, b, idx).b_tt).values
    cmp = clarke_mp_dderiv(a, b, m, frame=w)
    case.check("clarke_formula", abs(cmp - 0.5 * lam[0]), 1e-12)
    case.check("clarke_vs_dhat", abs(cmp + d_dderiv(a, b, idx.m_hat, frame=w)), 1e-10)
    clarke = clarke_extreme_points(w, m, count, rng, direction=b)
    case.check("clarke_support", abs(clarke.support(b) - 0.5 * lam[0]), 1e-8)
    if clarke.optimal:
        case.check("clarke_dominance", max(float(np.sum(g * b)) for g in clarke.elements[:clarke.optimal]) - cmp, 1e-9)
    for g in clarke.elements:
        ev = np.linalg.eigvalsh(g)
        tr = -float(np.trace(g))
        case.check("clarke_psd", ev[-1], 1e-10 * max(1.0, tr))
        case.check("clarke_rank", float(np.sum(np.abs(ev) > 1e-9 * max(1.0, tr))) - 2, 0)
    for k in idx.cluster:
        case.check("cluster_independence", abs(clarke_mp_dderiv(a, b, k, frame=w) - cmp), 1e-12)

    # Weyl-type inequality behind the Michel-Penot derivative
    r = idx.r_m
    worst = -np.inf
    for _ in range(5):
        c = random_symmetric(r, rng) + 1j * (lambda x: x - x.T)(rng.standard_normal((r, r)))
        worst = max(worst, weyl_gap(red_tt := reduce_direction(w, b, idx).b_tt, c, idx.i_m))
    case.check("weyl_upper", worst - lam[0], 1e-9)
    witness = weyl_equality_witness(red_tt, idx.i_m)
    case.check("weyl_equality", abs(weyl_gap(red_tt, witness, idx.i_m) - lam[0]), 1e-9 * max(1.0, abs(lam[0])) * 10)
    return case


def subdiff_suite(trials: int = 100, seed=0, n: int | None = None, count: int = 4,
                  probes: int = 20) -> SuiteResult:
    """Fenchel inequality, max formula and Clarke = Michel-Penot support values."""
    rngs = spawn(seed, trials)
    return _run("subdiff", [(f"trial {k}", rngs[k], n, count, probes) for k in range(trials)], _subdiff_case)


def _extremal_case(label, rng, n):
    case = CaseResult(label)
    n = _pick_n(rng, n, 1, 6)
    d = random_spectrum(rng, n, degenerate=bool(rng.integers(2)))
    a, _ = conditioned_pd(rng, d, 1.0)
    m = int(rng.integers(1, n + 1))
    s = random_symplectic_frame(n, m, rng, spread=float(rng.uniform(0, 1.5)))
    target = sigma_m(a, m)
    case.check("extremal_bound", -float(np.trace(s.T @ a @ s)) - target, 1e-9)
    w = williamson(a)
    s_opt = w.M[:, partition_indices(n, (m, n - m))[0]]
    case.check("extremal_equality", abs(-float(np.trace(s_opt.T @ a @ s_opt)) - target), 1e-8)
    return case


def extremal_suite(trials: int = 100, seed=0, n: int | None = None) -> SuiteResult:
    """``-tr S^T A S <= sigma_m(A)`` over random symplectic frames, with equality at a Williamson frame."""
    rngs = spawn(seed, trials)
    return _run("extremal", [(f"trial {k}", rngs[k], n) for k in range(trials)], _extremal_case)


def _monotonicity_case(label, rng, n):
    case = CaseResult(label)
    n = _pick_n(rng, n, 1, 6)
    d = random_spectrum(rng, n, degenerate=bool(rng.integers(2)))
    a, _ = conditioned_pd(rng, d, 1.0)
    kind = int(rng.integers(4))
    scale = float(np.linalg.norm(a)) * [1.0, 1e-3, 1e-8, 0.0][kind]
    rank = int(rng.integers(1, 2 * n + 1))
    b = a + random_psd(2 * n, rng, rank=rank, scale=scale)
    report = monotonicity_check(a, b)
    case.check("monotonicity_violation", float(np.max(report.d_a - report.d_b)), 1e-9)
    return case


def monotonicity_suite(trials: int = 1000, seed=0, n: int | None = None) -> SuiteResult:
    """``d_j(A) <= d_j(B)`` whenever ``A <= B``."""
    rngs = spawn(seed, trials)
    return _run("monotonicity", [(f"trial {k}", rngs[k], n) for k in range(trials)], _monotonicity_case)


def example1_suite(trials: int = 1, seed=0, n: int | None = None) -> SuiteResult:
    """The midpoint non-convexity example for ``A -> 1j A^{1/2} J A^{1/2}``."""
    start = time.perf_counter()
    case = CaseResult("diag(1,4)")
    rep = nonconvexity_example()
    root10 = np.sqrt(10.0)
    expected = {
        "phi_identity": 1j * np.array([[0.0, 1.0], [-1.0, 0.0]]),
        "phi_a": 1j * np.array([[0.0, 2.0], [-2.0, 0.0]]),
        "phi_midpoint": 0.5j * np.array([[0.0, root10], [-root10, 0.0]]),
        "gap": 0.5j * np.array([[0.0, root10 - 3], [-(root10 - 3), 0.0]]),
    }
    for key, target in expected.items():
        case.check(key, np.max(np.abs(getattr(rep, key) - target)), 1e-12)
    half = (root10 - 3) / 2
    case.check("gap_eigenvalues", np.max(np.abs(rep.gap_eigenvalues - [half, -half])), 1e-12)
    case.check("indefinite", 0.0 if rep.verdict.startswith("indefinite") else 1.0, 0.0)
    result = SuiteResult("example1")
    result.merge(case)
    result.elapsed = time.perf_counter() - start
    return result


def run_suite(name: str, trials: int | None = None, seed=0, n: int | None = None) -> SuiteResult:
    """Run one suite by name; ``trials=None`` uses the suite's default size."""
    funcs = {
        "williamson": williamson_suite,
        "gateaux": gateaux_suite,
        "subdiff": subdiff_suite,
        "extremal": extremal_suite,
        "monotonicity": monotonicity_suite,
        "example1": example1_suite,
    }
    if name == "derivative":
        if trials is None:
            return derivative_suite(seed=seed, n=n)
        return derivative_suite(trials, max(1, trials // 2), seed=seed, n=n)
    if name not in funcs:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if trials is None:
        return funcs[name](seed=seed, n=n)
    return funcs[name](trials, seed=seed, n=n)
