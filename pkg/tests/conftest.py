import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from weaklevy.core import GammaRay, JumpAtom, SubordinatorSpec, BrownianSpec, validate_wvag

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

CRITERIA = []


def record_criterion(number, passed, detail):
    """Store one acceptance line; printed in the terminal summary."""
    CRITERIA.append((number, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")


def random_cov(rng, n, ridge=0.1):
    L = rng.normal(size=(n, n))
    S = L @ L.T + ridge * np.eye(n)
    return 0.5 * (S + S.T)


def random_wvag(rng, n=None):
    n = int(rng.integers(2, 5)) if n is None else n
    a = rng.uniform(0.2, 3.0)
    alpha = rng.uniform(0.3, 2.0, size=n)
    b = a * alpha.max() * (1.0 + rng.uniform(0.05, 2.0))
    return validate_wvag(a, b, alpha, rng.normal(size=n), random_cov(rng, n))


def random_subordinator(rng, n, n_rays=None, n_atoms=None, drift=True):
    n_rays = int(rng.integers(1, 4)) if n_rays is None else n_rays
    n_atoms = int(rng.integers(0, 3)) if n_atoms is None else n_atoms
    rays = []
    for _ in range(n_rays):
        u = rng.uniform(0, 2, size=n) * (rng.uniform(size=n) < 0.7)
        if not np.any(u > 0):
            u[rng.integers(n)] = 1.0
        rays.append(GammaRay(u, rng.uniform(0.2, 3.0), rng.uniform(0.3, 4.0)))
    atoms = []
    for _ in range(n_atoms):
        t = rng.uniform(0, 2, size=n)
        atoms.append(JumpAtom(t, rng.uniform(0.1, 2.0)))
    d = rng.uniform(0, 1, size=n) * (rng.uniform(size=n) < 0.5) if drift else np.zeros(n)
    return SubordinatorSpec(d, tuple(rays), tuple(atoms))


def random_brownian(rng, n):
    return BrownianSpec(rng.normal(size=n), random_cov(rng, n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ref_wvag():
    return validate_wvag(1.0, 2.0, [1.0, 1.0], [1.0, -1.0], np.eye(2))
