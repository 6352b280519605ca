import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_pd(rng, size, kappa=1e3):
    """Random SPD matrix with eigenvalues log-uniform in ``[1, kappa]``."""
    q, _ = np.linalg.qr(rng.standard_normal((size, size)))
    vals = np.exp(rng.uniform(0.0, np.log(kappa), size))
    vals[0], vals[-1] = 1.0, kappa
    a = (q * vals) @ q.T
    return 0.5 * (a + a.T)


def write_matrix(path, a):
    a = np.asarray(a, dtype=float)
    lines = [str(a.shape[0])] + [" ".join(repr(float(x)) for x in row) for row in a]
    path.write_text("\n".join(lines) + "\n")
    return path


#: (criterion number, title, passed, detail) collected by the acceptance tests
ACCEPTANCE = []


def record_criterion(number, title, passed, detail):
    ACCEPTANCE.append((number, title, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}")
