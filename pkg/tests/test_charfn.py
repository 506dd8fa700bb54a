import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weaklevy.charfn import (
    bm_exponent,
    multitime_exponent,
    multitime_exponent_direct,
    subordinator_exponent,
    thorin_laplace,
    vg_exponent,
    vggc_exponent,
    weak_pair_exponent,
    wvag_exponent,
)
from weaklevy.core import (
    BrownianSpec,
    GammaRay,
    SpecError,
    SubordinatorSpec,
    ThorinAtomicMeasure,
    VGParams,
    project_spec,
    validate_wvag,
    wvag_subordinator,
    wvag_thorin_measure,
)
from weaklevy.measure import thorin_to_rays

from conftest import random_brownian, random_subordinator, random_wvag


def test_bm_exponent_examples():
    B = BrownianSpec([0, 0], np.eye(2))
    assert bm_exponent([0, 0], B) == 0
    assert bm_exponent([1, 1], B) == -1
    B2 = BrownianSpec([0.3, -1], [[2, 0.5], [0.5, 1]])
    th = np.array([0.7, -1.2])
    assert bm_exponent(-th, B2) == np.conj(bm_exponent(th, B2))


def test_bm_exponent_dimension_mismatch():
    with pytest.raises(SpecError):
        bm_exponent([1, 2, 3], BrownianSpec([0, 0], np.eye(2)))


def test_multitime_examples():
    rho = 0.3
    B = BrownianSpec([0, 0], [[1, rho], [rho, 1]])
    assert multitime_exponent([0, 0], [1, 1], B) == 0
    assert multitime_exponent([1, 3], [1, 1], B) == pytest.approx(-2 - rho, abs=1e-15)


def test_multitime_diagonal_sigma_splits():
    B = BrownianSpec([0.5, -1, 2], np.diag([1.0, 2.0, 0.5]))
    t = np.array([0.4, 2.0, 1.1])
    th = np.array([1.0, -0.3, 0.8])
    parts = sum(
        t[k] * bm_exponent([th[k]], BrownianSpec([B.mu[k]], [[B.sigma[k, k]]])) for k in range(3)
    )
    assert multitime_exponent(t, th, B) == pytest.approx(parts, abs=1e-14)


@given(st.integers(0, 2**32 - 1))
def test_multitime_spacing_sum_equals_direct(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    B = random_brownian(rng, n)
    t = rng.uniform(0, 3, size=n)
    t[rng.uniform(size=n) < 0.3] = t[0]  # ties
    th = rng.normal(size=n)
    assert multitime_exponent(t, th, B) == pytest.approx(multitime_exponent_direct(t, th, B), abs=1e-12)


def test_vg_exponent_examples():
    p = VGParams(1.0, 0.0, 1.0)
    assert vg_exponent([0.0], p) == 0
    assert vg_exponent([1.0], p) == pytest.approx(-math.log(1.5), abs=1e-15)
    q = VGParams(2.0, [0.3, -0.2], [[1, 0.2], [0.2, 0.5]])
    th = np.array([0.9, 1.7])
    assert vg_exponent(-th, q) == pytest.approx(np.conj(vg_exponent(th, q)), abs=1e-15)


def test_wvag_exponent_example(ref_wvag):
    p = validate_wvag(1, 2, [1, 1], [0, 0], np.eye(2))
    expected = -math.log(1.5) - 2 * math.log(1.25)
    assert wvag_exponent([1, 1], p) == pytest.approx(expected, abs=1e-15)
    assert wvag_exponent([0, 0], ref_wvag) == 0


def test_vggc_single_atom_example():
    B = BrownianSpec([0, 0], np.eye(2))
    U = ThorinAtomicMeasure([[1, 1]], [1.0])
    assert vggc_exponent([1, 0], [0, 0], B, U) == pytest.approx(-math.log(1.25), abs=1e-15)
    assert vggc_exponent([0, 0], [0, 0], B, U) == 0


def test_thorin_laplace_examples():
    U = ThorinAtomicMeasure([[1, 1]], [1.0])
    assert thorin_laplace([0, 0], [0, 0], U) == 0
    assert thorin_laplace([1, 1], [0, 0], U) == pytest.approx(math.log(2), abs=1e-15)
    with pytest.raises(SpecError):
        thorin_laplace([-1, 0], [0, 0], U)


@given(st.integers(0, 2**32 - 1))
def test_thorin_laplace_of_alpha_gamma(seed):
    rng = np.random.default_rng(seed)
    p = random_wvag(rng)
    lam = rng.uniform(0, 4, size=p.dim)
    ref = p.a * math.log((p.b + lam @ p.alpha) / p.b) + sum(
        p.beta[k] * math.log((p.b / p.alpha[k] + lam[k]) / (p.b / p.alpha[k])) for k in range(p.dim)
    )
    assert thorin_laplace(lam, np.zeros(p.dim), wvag_thorin_measure(p)) == pytest.approx(ref, rel=1e-13)


@given(st.integers(0, 2**32 - 1))
def test_wvag_equals_vggc_and_pair(seed):
    rng = np.random.default_rng(seed)
    p = random_wvag(rng)
    th = rng.normal(scale=2, size=p.dim)
    ref = wvag_exponent(th, p)
    assert vggc_exponent(th, np.zeros(p.dim), p.brownian, wvag_thorin_measure(p)) == pytest.approx(ref, abs=1e-12)
    T = wvag_subordinator(p)
    assert weak_pair_exponent(np.zeros(p.dim), th, T, p.brownian) == pytest.approx(ref, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_exponent_basic_properties(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    T = random_subordinator(rng, n)
    B = random_brownian(rng, n)
    th1, th2 = rng.normal(size=n), rng.normal(size=n)
    psi = weak_pair_exponent(th1, th2, T, B)
    assert psi.real <= 1e-15
    assert weak_pair_exponent(-th1, -th2, T, B) == pytest.approx(np.conj(psi), abs=1e-13)
    assert weak_pair_exponent(np.zeros(n), np.zeros(n), T, B) == 0


@given(st.integers(0, 2**32 - 1))
def test_time_marginal_is_subordinator(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    T = random_subordinator(rng, n)
    B = random_brownian(rng, n)
    th1 = rng.normal(size=n)
    assert weak_pair_exponent(th1, np.zeros(n), T, B) == pytest.approx(subordinator_exponent(th1, T), abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_superposition_additivity(seed):
    rng = np.random.default_rng(seed)
    n = 3
    T = random_subordinator(rng, n, n_rays=4, n_atoms=2)
    B = random_brownian(rng, n)
    th1, th2 = rng.normal(size=n), rng.normal(size=n)
    zero = np.zeros(n)
    T1 = SubordinatorSpec(zero, T.rays[:2], T.atoms[:1])
    T2 = SubordinatorSpec(zero, T.rays[2:], T.atoms[1:])
    D = SubordinatorSpec(T.drift)
    total = sum(weak_pair_exponent(th1, th2, S, B) for S in (T1, T2, D))
    assert weak_pair_exponent(th1, th2, T, B) == pytest.approx(total, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_diagonal_sigma_closed_vs_quadrature(seed):
    rng = np.random.default_rng(seed)
    n = 2
    T = random_subordinator(rng, n, n_atoms=0)
    B = BrownianSpec(rng.normal(size=n), np.diag(rng.uniform(0.2, 2, size=n)))
    th1, th2 = rng.normal(size=n), rng.normal(size=n)
    a = weak_pair_exponent(th1, th2, T, B, method="closed")
    b = weak_pair_exponent(th1, th2, T, B, method="quadrature")
    assert abs(a - b) <= 1e-8 * abs(a)


@given(st.integers(0, 2**32 - 1))
def test_thorin_rays_pair_equals_vggc(seed):
    rng = np.random.default_rng(seed)
    n = 3
    U = ThorinAtomicMeasure(rng.uniform(0, 2, size=(3, n)) + 0.05, rng.uniform(0.1, 2, size=3))
    d = rng.uniform(0, 1, size=n)
    B = random_brownian(rng, n)
    th = rng.normal(size=n)
    lhs = weak_pair_exponent(np.zeros(n), th, thorin_to_rays(d, U), B)
    assert lhs == pytest.approx(vggc_exponent(th, d, B, U), abs=1e-12)


def test_projection_of_pair():
    rng = np.random.default_rng(5)
    n = 3
    T = random_subordinator(rng, n, n_rays=3, n_atoms=2)
    B = random_brownian(rng, n)
    th1, th2 = rng.normal(size=n), rng.normal(size=n)
    J = [0, 2]
    mask = np.isin(np.arange(n), J)
    lhs = weak_pair_exponent(th1 * mask, th2 * mask, T, B)
    rhs = weak_pair_exponent(th1, th2, project_spec(J, T), project_spec(J, B))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_unknown_method_and_dims():
    T = SubordinatorSpec([0, 0], (GammaRay([1, 1], 1, 1),))
    B = BrownianSpec([0, 0], np.eye(2))
    with pytest.raises(SpecError):
        weak_pair_exponent([0, 0], [1, 1], T, B, method="simpson")
    with pytest.raises(SpecError):
        weak_pair_exponent([0, 0], [1, 1], T, BrownianSpec([0, 0, 0], np.eye(3)))
