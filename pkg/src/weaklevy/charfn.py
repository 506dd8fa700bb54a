"""Characteristic exponents of Brownian, VG, WVaG, VGGC and weak-pair laws.

All exponents return Python/numpy complex scalars ``Psi`` with
``E exp(i<theta, X(t)>) = exp(t * Psi(theta))``.
"""
from __future__ import annotations

import numpy as np

from .core import (
    BrownianSpec,
    NumericalError,
    SpecError,
    SubordinatorSpec,
    ThorinAtomicMeasure,
    VGParams,
    WVaGParams,
    time_ordering,
    time_product_cov,
)
from .quadrature import adaptive_quad

QUAD_RTOL = 1e-10


def _vec(theta, n: int, name: str = "theta") -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (n,):
        raise SpecError(f"{name} has shape {theta.shape}, expected ({n},)")
    return theta


def _log_ratio(num: complex, den: float) -> complex:
    """Principal ``log(num/den)``; the argument must lie in the right half plane."""
    z = num / den
    if not z.real > 0:
        raise NumericalError(f"logarithm argument {z} left the right half plane")
    return np.log(z)


def bm_exponent(theta, B: BrownianSpec) -> complex:
    """``i<mu, theta> - theta Sigma theta' / 2``."""
    theta = _vec(theta, B.dim)
    return complex(-0.5 * theta @ B.sigma @ theta, B.mu @ theta)


def multitime_exponent(t, theta, B: BrownianSpec) -> complex:
    """Exponent of ``(B_1(t_1), ..., B_n(t_n))``.

    Evaluated as the spacing sum ``sum_k Δt(k) Psi(pi_{(k..n)} theta)``.
    """
    theta = _vec(theta, B.dim)
    t = _vec(t, B.dim, "t")
    order, spacings = time_ordering(t)
    out = 0j
    for k, dt in enumerate(spacings):
        if dt == 0.0:
            continue
        proj = np.zeros_like(theta)
        proj[order[k:]] = theta[order[k:]]
        out += dt * bm_exponent(proj, B)
    return out


def multitime_exponent_direct(t, theta, B: BrownianSpec) -> complex:
    """Same as :func:`multitime_exponent` via ``i<t⊙mu, θ> - ½ θ(t⊙Σ)θ'``."""
    theta = _vec(theta, B.dim)
    t = _vec(t, B.dim, "t")
    return complex(-0.5 * theta @ time_product_cov(t, B.sigma) @ theta, (t * B.mu) @ theta)


def vg_exponent(theta, p: VGParams) -> complex:
    theta = _vec(theta, p.dim)
    num = complex(p.b + 0.5 * theta @ p.sigma @ theta, -(p.mu @ theta))
    return -p.b * _log_ratio(num, p.b)


def wvag_exponent(theta, p: WVaGParams) -> complex:
    """Closed-form WVaG exponent: one VG-type term for the common clock plus one per axis."""
    theta = _vec(theta, p.dim)
    am = p.alpha * p.mu
    a_sigma = time_product_cov(p.alpha, p.sigma)
    common = complex(p.b + 0.5 * theta @ a_sigma @ theta, -(am @ theta))
    out = -p.a * _log_ratio(common, p.b)
    diag = np.diag(p.sigma)
    for k in range(p.dim):
        idio = complex(p.b + 0.5 * p.alpha[k] * theta[k] ** 2 * diag[k], -am[k] * theta[k])
        out -= p.beta[k] * _log_ratio(idio, p.b)
    return out


def vggc_exponent(theta, d, B: BrownianSpec, U: ThorinAtomicMeasure) -> complex:
    """VGGC exponent for a finitely supported Thorin measure ``U`` and drift ``d``."""
    theta = _vec(theta, B.dim)
    d = _vec(d, B.dim, "d")
    if U.dim != B.dim:
        raise SpecError("Thorin measure dimension mismatch")
    out = complex(-0.5 * theta @ time_product_cov(d, B.sigma) @ theta, (d * B.mu) @ theta)
    for u, w in zip(U.locations, U.weights):
        nu2 = u @ u
        num = complex(nu2 + 0.5 * theta @ time_product_cov(u, B.sigma) @ theta, -((u * B.mu) @ theta))
        out -= w * _log_ratio(num, nu2)
    return out


def thorin_laplace(lam, d, U: ThorinAtomicMeasure) -> float:
    """Laplace exponent ``<d, λ> + Σ w ln((|u|² + <λ, u>)/|u|²)`` of a Thorin subordinator."""
    lam = _vec(lam, U.dim, "lambda")
    d = _vec(d, U.dim, "d")
    if np.any(lam < 0):
        raise SpecError("Laplace argument must be componentwise nonnegative")
    nu2 = np.sum(U.locations**2, axis=1)
    return float(d @ lam + U.weights @ np.log1p((U.locations @ lam) / nu2))


def subordinator_exponent(theta1, T: SubordinatorSpec) -> complex:
    """Characteristic exponent of the subordinator ``T`` alone."""
    theta1 = _vec(theta1, T.dim, "theta1")
    out = 1j * (T.drift @ theta1)
    for r in T.rays:
        out -= r.shape * _log_ratio(complex(r.rate, -(r.direction @ theta1)), r.rate)
    for a in T.atoms:
        out += a.intensity * (np.exp(1j * (a.point @ theta1)) - 1.0)
    return complex(out)


def ray_z(theta1, theta2, u, B: BrownianSpec) -> complex:
    """``z`` with ``E exp(i<θ, (g u, B(g u))>) = exp(-g z)``; ``Re z >= 0``."""
    quad = theta2 @ time_product_cov(u, B.sigma) @ theta2
    return complex(0.5 * quad, -(theta1 @ u) - (u * B.mu) @ theta2)


def _ray_quadrature(z: complex, shape: float, rate: float) -> complex:
    # integrand is (exp(-g z) - 1) a exp(-b g)/g, O(1) at g = 0
    # truncate where a e^{-b g} < 1e-16 b
    g_max = max(np.log(shape / (1e-16 * rate)) / rate, 1.0 / rate)

    def f(g):
        return shape * np.exp(-rate * g) * np.expm1(-g * z) / g

    val, _ = adaptive_quad(f, 0.0, g_max, rtol=QUAD_RTOL, initial_panels=8)
    return val


def weak_pair_exponent(theta1, theta2, T: SubordinatorSpec, B: BrownianSpec, method: str = "closed") -> complex:
    """Exponent of the pair ``(T, B ⊙ T)`` at ``(theta1, theta2)``.

    ``method="closed"`` uses ``-a ln((b + z)/b)`` per ray; ``"quadrature"``
    integrates ``(exp(-g z) - 1) a e^{-bg}/g`` numerically and serves as an
    independent check. Atom and drift parts are finite sums either way.
    """
    if T.dim != B.dim:
        raise SpecError("subordinator and Brownian motion dimensions differ")
    theta1 = _vec(theta1, T.dim, "theta1")
    theta2 = _vec(theta2, T.dim, "theta2")
    if method not in ("closed", "quadrature"):
        raise SpecError(f"unknown method {method!r}")
    out = 1j * (T.drift @ theta1) + multitime_exponent_direct(T.drift, theta2, B)
    for r in T.rays:
        z = ray_z(theta1, theta2, r.direction, B)
        if method == "closed":
            out -= r.shape * _log_ratio(r.rate + z, r.rate)
        else:
            out += _ray_quadrature(z, r.shape, r.rate)
    for a in T.atoms:
        inner = 1j * (theta1 @ a.point) + multitime_exponent_direct(a.point, theta2, B)
        out += a.intensity * np.expm1(inner)
    return complex(out)
