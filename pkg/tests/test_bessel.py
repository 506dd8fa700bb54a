import math

import mpmath
import numpy as np
import pytest
from scipy import special

from weaklevy.bessel import SEAM, bessel_k, k01, log_scaled_bessel_k, scaled_bessel_k
from weaklevy.core import SpecError

# exact reference: sqrt(pi/2) e^{-1}
K_HALF_AT_1 = math.sqrt(math.pi / 2) * math.exp(-1)


def test_k_half_closed_form():
    assert bessel_k(0.5, 1.0) == pytest.approx(K_HALF_AT_1, rel=1e-15)
    assert K_HALF_AT_1 == pytest.approx(float(mpmath.besselk(0.5, 1)), rel=1e-15)


def test_k_three_halves_one_recurrence_step():
    assert bessel_k(1.5, 1.0) == pytest.approx(2.0 * K_HALF_AT_1, rel=1e-15)


@pytest.mark.parametrize("rho", [0, 0.5, 1, 1.5, 2, 2.5, 3, 4.5, 7])
def test_matches_scipy(rho):
    r = np.geomspace(1e-6, 600, 400)
    assert np.allclose(bessel_k(rho, r), special.kv(rho, r), rtol=2e-14, atol=0)
    assert np.allclose(bessel_k(rho, r, scaled=True), special.kve(rho, r), rtol=2e-14, atol=0)


@pytest.mark.parametrize("r", [0.01, 0.7, 2.0, 9.5, 40.0])
def test_integer_orders_against_mpmath(r):
    for rho in (0, 1, 3):
        assert bessel_k(rho, r) == pytest.approx(float(mpmath.besselk(rho, r)), rel=1e-14)


def test_seam_branches_agree():
    x = np.linspace(SEAM - 0.5, SEAM + 0.5, 41)
    s0, s1 = k01(x, branch="series")
    c0, c1 = k01(x, branch="cf2")
    assert np.max(np.abs(s0 / c0 - 1)) < 1e-12
    assert np.max(np.abs(s1 / c1 - 1)) < 1e-12


def test_recurrence_residuals():
    r = np.linspace(0.1, 10, 100)
    for rho in np.arange(0.5, 5.0, 1.0):
        lhs = bessel_k(rho + 1, r)
        rhs = bessel_k(rho - 1, r) + (2 * rho / r) * bessel_k(rho, r)
        assert np.max(np.abs(lhs / rhs - 1)) <= 1e-12


def test_negative_order_symmetry():
    assert bessel_k(-2.5, 1.3) == bessel_k(2.5, 1.3)


def test_scaled_limits():
    assert scaled_bessel_k(0.5, 0.0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-15)
    assert scaled_bessel_k(0.5, 1e-12) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-11)
    # r^rho K_rho(r) -> 2^{rho-1} Gamma(rho)
    assert scaled_bessel_k(1.0, 1e-8) == pytest.approx(1.0, rel=1e-12)


def test_log_scaled_no_overflow():
    val = log_scaled_bessel_k(1.0, 2000.0)
    ref = float(mpmath.log(mpmath.mpf(2000) * mpmath.besselk(1, 2000)))
    assert val == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("rho, r", [(0.3, 1.0), (1, 0.0), (1, -1.0), (0.5, float("nan"))])
def test_errors(rho, r):
    with pytest.raises(SpecError):
        bessel_k(rho, r)


def test_positive():
    r = np.geomspace(1e-3, 300, 50)
    for rho in (0, 0.5, 1, 2.5, 6):
        assert np.all(bessel_k(rho, r) > 0)
