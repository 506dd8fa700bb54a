import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weaklevy.charfn import thorin_laplace, wvag_exponent
from weaklevy.core import (
    BrownianSpec,
    SpecError,
    SubordinatorSpec,
    ThorinAtomicMeasure,
    VGParams,
    time_product_cov,
    validate_wvag,
    wvag_thorin_measure,
)
from weaklevy.measure import (
    FV_DRIFTLESS,
    FV_UNKNOWN,
    NOT_FV,
    alpha_gamma_rays,
    axis_exponent_by_quadrature,
    classify_variation,
    rays_to_thorin,
    thorin_to_rays,
    truncated_second_moment,
    vg_levy_density,
    vggc_levy_density,
    wvag_exponent_from_density,
    wvag_levy_density,
)

from conftest import random_wvag


def _laplace_of_rays(lam, T):
    return T.drift @ lam + sum(r.shape * math.log1p((r.direction @ lam) / r.rate) for r in T.rays)


def test_vg_density_closed_form_n1():
    assert vg_levy_density([1.0], VGParams(1.0, 0.0, 1.0)) == pytest.approx(math.exp(-math.sqrt(2)), rel=1e-14)


def test_vg_density_symmetric_when_centred():
    rng = np.random.default_rng(3)
    p = VGParams(1.3, [0, 0, 0], [[1, 0.2, 0], [0.2, 2, 0.1], [0, 0.1, 0.7]])
    v = rng.normal(size=(20, 3))
    assert np.allclose(vg_levy_density(v, p), vg_levy_density(-v, p), rtol=1e-14)


def test_vg_density_against_mixture_integral():
    # ν(v) = ∫ N(v; g μ, g Σ) b e^{-b g}/g dg, independent quadrature in g
    from scipy import integrate, stats

    p = VGParams(1.5, [0.4, -0.2], [[1.0, 0.3], [0.3, 0.8]])
    v = np.array([0.6, -0.9])

    def f(g):
        return stats.multivariate_normal(g * p.mu, g * p.sigma).pdf(v) * p.b * math.exp(-p.b * g) / g

    ref, _ = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    assert vg_levy_density(v, p) == pytest.approx(ref, rel=1e-9)


def test_vg_density_errors():
    with pytest.raises(SpecError):
        vg_levy_density([0.0, 0.0], VGParams(1.0, [0, 0], np.eye(2)))
    with pytest.raises(SpecError):
        vg_levy_density([1.0, 0.0], VGParams(1.0, [0, 0], [[1, 1], [1, 1]]))


def test_vg_density_finite_truncated_moment():
    p = VGParams(1.0, 0.3, 1.0)
    dens = lambda v: vg_levy_density(v[:, None], p)
    coarse = truncated_second_moment(dens, 1, rtol=1e-6)
    fine = truncated_second_moment(dens, 1, rtol=1e-10)
    assert np.isfinite(fine) and fine > 0
    assert coarse == pytest.approx(fine, rel=1e-5)


def test_alpha_gamma_rays_examples():
    T = alpha_gamma_rays(validate_wvag(1, 2, [1, 1], [0, 0], np.eye(2)))
    got = [(tuple(r.direction), r.shape, r.rate) for r in T.rays]
    assert got == [((1, 1), 1, 2), ((1, 0), 1, 2), ((0, 1), 1, 2)]
    T = alpha_gamma_rays(validate_wvag(2, 3, [1, 0.5], [0, 0], np.eye(2)))
    got = [(tuple(r.direction), r.shape, r.rate) for r in T.rays]
    assert got == [((1, 0.5), 2, 3), ((1, 0), 1, 3), ((0, 1), 4, 6)]
    assert not np.any(T.drift)


@given(st.integers(0, 2**32 - 1))
def test_alpha_gamma_marginals_standard_gamma(seed):
    rng = np.random.default_rng(seed)
    p = random_wvag(rng)
    T = alpha_gamma_rays(p)
    k = int(rng.integers(p.dim))
    lam = np.zeros(p.dim)
    lam[k] = rng.uniform(0, 5)
    c = p.b / p.alpha[k]
    assert _laplace_of_rays(lam, T) == pytest.approx(c * math.log1p(lam[k] / c), rel=1e-13)


@given(st.integers(0, 2**32 - 1))
def test_thorin_to_rays_matches_alpha_gamma(seed):
    rng = np.random.default_rng(seed)
    p = random_wvag(rng)
    T = thorin_to_rays(np.zeros(p.dim), wvag_thorin_measure(p))
    lam = rng.uniform(0, 4, size=p.dim)
    assert _laplace_of_rays(lam, T) == pytest.approx(_laplace_of_rays(lam, alpha_gamma_rays(p)), rel=1e-12)


def test_thorin_single_atom_and_empty():
    U = ThorinAtomicMeasure([[0.5, 2.0]], [1.7])
    T = thorin_to_rays([0, 0], U)
    lam = np.array([0.3, 1.1])
    assert _laplace_of_rays(lam, T) == pytest.approx(thorin_laplace(lam, [0, 0], U), rel=1e-14)
    D = thorin_to_rays([1.0, 2.0], ThorinAtomicMeasure.empty(2))
    assert D.rays == () and np.array_equal(D.drift, [1, 2])


def test_rays_thorin_round_trip(ref_wvag):
    d, U = rays_to_thorin(alpha_gamma_rays(ref_wvag))
    V = wvag_thorin_measure(ref_wvag)
    assert np.allclose(U.locations, V.locations) and np.allclose(U.weights, V.weights)
    assert not np.any(d)


def test_f0_equals_vg_density_of_common_component():
    p = validate_wvag(0.7, 3.0, [1.2, 0.5], [0.3, -0.4], [[1, 0.5], [0.5, 2]])
    dec = wvag_levy_density(p)
    vg = VGParams(p.a, (p.a / p.b) * p.alpha * p.mu, (p.a / p.b) * time_product_cov(p.alpha, p.sigma))
    rng = np.random.default_rng(0)
    y = rng.normal(size=(50, 2))
    assert np.allclose(dec.f0(y), vg_levy_density(y, vg), rtol=1e-10, atol=0)
    q = validate_wvag(1, 2, [1, 1], [0, 0], np.eye(2))
    vq = VGParams(1.0, [0, 0], 0.5 * np.eye(2))
    assert wvag_levy_density(q).f0([1.0, 0.0]) == pytest.approx(vg_levy_density([1.0, 0.0], vq), rel=1e-10)


def test_fk_example():
    p = validate_wvag(1, 2, [1, 1], [0, 0], np.eye(2))
    assert wvag_levy_density(p).fk(0, 1.0) == pytest.approx(math.exp(-2), rel=1e-15)


def test_centred_densities_are_even():
    p = validate_wvag(1.1, 2.5, [1.0, 0.8, 1.3], [0, 0, 0], [[1, 0.2, 0.1], [0.2, 1.5, 0.3], [0.1, 0.3, 0.9]])
    dec = wvag_levy_density(p)
    y = np.random.default_rng(1).normal(size=(10, 3))
    assert np.allclose(dec.f0(y), dec.f0(-y), rtol=1e-14)
    for k in range(3):
        assert np.allclose(dec.fk(k, y[:, k]), dec.fk(k, -y[:, k]), rtol=1e-14)


@given(st.integers(0, 2**32 - 1))
def test_densities_nonnegative(seed):
    rng = np.random.default_rng(seed)
    p = random_wvag(rng)
    dec = wvag_levy_density(p)
    y = rng.normal(scale=3, size=(20, p.dim))
    assert np.all(dec.f0(y) >= 0)
    for k in range(p.dim):
        assert np.all(dec.fk(k, y[:, k]) >= 0)


def test_wvag_density_singular_alpha_sigma():
    p = validate_wvag(1, 3, [1, 1], [0, 0], [[1, 1], [1, 1]])
    with pytest.raises(SpecError):
        wvag_levy_density(p)


@given(st.integers(0, 2**32 - 1))
def test_vggc_density_reproduces_wvag_parts(seed):
    rng = np.random.default_rng(seed)
    p = random_wvag(rng, n=int(rng.integers(2, 4)))
    U = wvag_thorin_measure(p)
    dec = wvag_levy_density(p)
    y = rng.normal(size=p.dim)
    full = list(range(p.dim))
    assert vggc_levy_density(y, full, p.brownian, U) == pytest.approx(dec.f0(y), rel=1e-10)
    k = int(rng.integers(p.dim))
    yk = np.zeros(p.dim)
    yk[k] = y[k]
    assert vggc_levy_density(yk, [k], p.brownian, U) == pytest.approx(dec.fk(k, y[k]), rel=1e-10)


def test_vggc_verbatim_ambient_power_disagrees_on_axes():
    # with |y|^n in place of |y|^{#J} the axis part is off by |y|_Q^{n-1}
    p = validate_wvag(1, 2, [1, 1], [0.2, 0.1], np.eye(2))
    U = wvag_thorin_measure(p)
    y = np.array([0.0, 0.4])
    verbatim = vggc_levy_density(y, [1], p.brownian, U, power="n")
    ref = wvag_levy_density(p).fk(1, 0.4)
    assert verbatim != pytest.approx(ref, rel=1e-3)
    # both conventions agree on the full index set
    y = np.array([0.3, -0.5])
    assert vggc_levy_density(y, [0, 1], p.brownian, U, power="n") == vggc_levy_density(y, [0, 1], p.brownian, U)


def test_vggc_support_condition():
    B = BrownianSpec([0, 0], np.eye(2))
    U = ThorinAtomicMeasure([[1.0, 0.0]], [1.0])
    assert vggc_levy_density(np.array([0.5, -0.2]), [0, 1], B, U) == 0.0
    with pytest.raises(SpecError):
        vggc_levy_density(np.array([0.5, 0.0]), [0, 1], B, U)
    with pytest.raises(SpecError):
        vggc_levy_density(np.array([0.5, 0.1]), [0], B, U)


def test_classify_variation_examples(ref_wvag):
    U = wvag_thorin_measure(ref_wvag)
    assert classify_variation(np.zeros(2), U, True) == FV_DRIFTLESS
    assert classify_variation([1, 0], U, True) == NOT_FV
    assert classify_variation([1, 0], U, False) == FV_UNKNOWN


def test_axis_density_integrates_to_idiosyncratic_term():
    p = validate_wvag(0.8, 2.2, [1.3, 0.6], [0.5, -0.4], [[1.2, 0.3], [0.3, 0.7]])
    # f_k alone carries the idiosyncratic part: β_k ln(...) term of the exponent
    k = 0
    th = 1.3
    ref = -p.beta[k] * np.log(
        complex(p.b + 0.5 * p.alpha[k] * th**2 * p.sigma[k, k], -p.alpha[k] * p.mu[k] * th) / p.b
    )
    assert axis_exponent_by_quadrature(th, p, k) == pytest.approx(ref, rel=1e-8)


def test_density_exponent_reconciliation_with_drift_and_correlation():
    p = validate_wvag(0.7, 3.0, [1.2, 0.5], [0.3, -0.4], [[1, 0.5], [0.5, 2]])
    th = np.array([1.0, -0.7])
    got = wvag_exponent_from_density(th, p, n_angles=128)
    assert abs(got - wvag_exponent(th, p)) <= 1e-6 * abs(wvag_exponent(th, p))


def test_wvag_truncated_second_moment_finite():
    p = validate_wvag(1, 2, [1, 1], [0.2, -0.1], np.eye(2))
    dec = wvag_levy_density(p)
    m0 = truncated_second_moment(dec.f0, 2, n_angles=64, rtol=1e-6)
    m1 = truncated_second_moment(dec.f0, 2, n_angles=128, rtol=1e-9)
    assert np.isfinite(m1) and m0 == pytest.approx(m1, rel=1e-5)
    for k in range(2):
        mk = truncated_second_moment(lambda y: dec.fk(k, y), 1)
        assert np.isfinite(mk) and mk > 0
