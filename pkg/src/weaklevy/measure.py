"""Lévy densities, Thorin-to-ray conversion and path-variation classification."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bessel import log_scaled_bessel_k
from .core import (
    BrownianSpec,
    GammaRay,
    SpecError,
    SubordinatorSpec,
    ThorinAtomicMeasure,
    VGParams,
    WVaGParams,
    time_product_cov,
    wvag_subordinator,
)
from .quadrature import adaptive_quad

COND_LIMIT = 1e12

FV_DRIFTLESS = "FV-driftless"
NOT_FV = "notFV"
FV_UNKNOWN = "FV-unknown"


def _checked_inverse(S: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SpecError(f"{what} is singular or ill-conditioned (condition number {cond:.3g})")
    return np.linalg.inv(S), float(np.linalg.det(S))


def _gaussian_subordinated_density(y, rate, m, S, prefactor, power=None):
    """Shared VG-type density ``prefactor * exp(<y,m>_Q) K(...) / ((2π)^{k/2} |S|^{1/2} |y|_Q^power)``.

    ``Q = S^{-1}``; ``k`` is the dimension of ``y``; ``rate`` enters the Bessel
    argument as ``(2 rate + |m|_Q^2)^{1/2} |y|_Q``. Works on arrays ``(..., k)``.
    """
    y = np.asarray(y, dtype=float)
    k = S.shape[0]
    Q, det = _checked_inverse(S, "covariance")
    power = k if power is None else power
    norm_y = np.sqrt(np.einsum("...i,ij,...j->...", y, Q, y))
    if np.any(norm_y == 0):
        raise SpecError("Lévy density is not defined at the origin")
    cross = y @ (Q @ m)
    m_norm2 = m @ Q @ m
    r = norm_y * np.sqrt(2.0 * rate + m_norm2)
    log_kk = log_scaled_bessel_k(k / 2.0, r)
    log_val = np.log(prefactor) + cross + log_kk - 0.5 * k * np.log(2 * np.pi) - 0.5 * np.log(det) - power * np.log(norm_y)
    out = np.exp(log_val)
    return float(out) if out.ndim == 0 else out


def vg_levy_density(v, p: VGParams):
    """Lévy density of ``VG^n(b, mu, Sigma)`` at ``v != 0`` (array ``(..., n)`` accepted)."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (p.dim,):
        raise SpecError("point dimension mismatch")
    return _gaussian_subordinated_density(v, p.b, p.mu, p.sigma, 2.0 * p.b)


alpha_gamma_rays = wvag_subordinator


def thorin_to_rays(d, U: ThorinAtomicMeasure) -> SubordinatorSpec:
    """Thorin atom ``(u, w)`` becomes a gamma ray with direction ``u``, shape ``w``, rate ``|u|^2``."""
    rays = tuple(GammaRay(u, w, u @ u) for u, w in zip(U.locations, U.weights))
    return SubordinatorSpec(np.asarray(d, dtype=float), rays)


def rays_to_thorin(T: SubordinatorSpec) -> tuple[np.ndarray, ThorinAtomicMeasure]:
    """Inverse of :func:`thorin_to_rays`: ray ``(u, a, b)`` maps to atom ``b u/|u|^2`` of weight ``a``.

    Jump atoms have no Thorin representation and are rejected.
    """
    if T.atoms:
        raise SpecError("jump atoms have no Thorin representation")
    if not T.rays:
        return T.drift.copy(), ThorinAtomicMeasure.empty(T.dim)
    locs = np.array([r.rate * r.direction / (r.direction @ r.direction) for r in T.rays])
    return T.drift.copy(), ThorinAtomicMeasure(locs, np.array([r.shape for r in T.rays]))


@dataclass(frozen=True)
class WvagLevyDecomposition:
    """WVaG Lévy measure: full-support density ``f0`` plus one axis density per coordinate."""

    full_support_density: Callable
    axis_densities: tuple

    def f0(self, y):
        return self.full_support_density(y)

    def fk(self, k: int, y):
        return self.axis_densities[k](y)


def wvag_levy_density(p: WVaGParams) -> WvagLevyDecomposition:
    n = p.dim
    S = time_product_cov(p.alpha, p.sigma)
    m = p.alpha * p.mu
    # fail early on a singular α⊙Σ
    _checked_inverse(S, "alpha ⊙ Sigma")

    def f0(y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1:] != (n,):
            raise SpecError("point dimension mismatch")
        return _gaussian_subordinated_density(y, p.b, m, S, 2.0 * p.a)

    def make_fk(k):
        ak, mk, skk, bk = p.alpha[k], p.mu[k], p.sigma[k, k], p.beta[k]
        if not skk > 0:
            raise SpecError(f"axis density {k} needs Sigma[{k},{k}] > 0")
        root = np.sqrt(2.0 * p.b * skk + ak * mk**2)

        def fk(y):
            y = np.asarray(y, dtype=float)
            if np.any(y == 0):
                raise SpecError("axis density is not defined at 0")
            out = bk / np.abs(y) * np.exp((np.sqrt(ak) * mk * y - np.abs(y) * root) / (np.sqrt(ak) * skk))
            return float(out) if out.ndim == 0 else out

        return fk

    return WvagLevyDecomposition(f0, tuple(make_fk(k) for k in range(n)))


def vggc_levy_density(y, J: Sequence[int], B: BrownianSpec, U: ThorinAtomicMeasure, power: str = "card"):
    """Density of the ``J``-part of a VGGC Lévy measure at ``y`` (0-based ``J``).

    ``y`` is a length-``n`` vector with ``y_j != 0`` for ``j`` in ``J`` and
    zeros elsewhere. Only Thorin atoms whose support is exactly ``J`` contribute.
    ``power`` selects the exponent on ``|y|``: ``"card"`` uses ``#J``
    (consistent with the axis densities), ``"n"`` uses the ambient
    dimension; the two agree when ``J`` is everything.
    """
    y = np.asarray(y, dtype=float)
    n = B.dim
    if y.shape != (n,) or U.dim != n:
        raise SpecError("dimension mismatch")
    J = sorted(set(int(j) for j in J))
    if not J or J[0] < 0 or J[-1] >= n:
        raise SpecError(f"invalid index set {J}")
    mask = np.zeros(n, dtype=bool)
    mask[J] = True
    if np.any(y[mask] == 0) or np.any(y[~mask] != 0):
        raise SpecError("y must be nonzero exactly on J")
    if power not in ("card", "n"):
        raise SpecError(f"unknown power convention {power!r}")
    pw = len(J) if power == "card" else n
    total = 0.0
    for u, w in zip(U.locations, U.weights):
        if not np.array_equal(u > 0, mask):
            continue
        S = time_product_cov(u, B.sigma)[np.ix_(J, J)]
        m = (u * B.mu)[J]
        # U(du)/|u|^2 times the VG prefactor 2|u|^2 leaves 2w
        total += _gaussian_subordinated_density(y[J], u @ u, m, S, 2.0 * w, power=pw)
    return total


def classify_variation(d, U: ThorinAtomicMeasure, sigma_invertible: bool) -> str:
    """Path-variation class of ``B ⊙ T`` for a Thorin subordinator with finite support.

    Finite support makes ``∫ |u|^{-1/2} U(du)`` finite, so only the drift
    matters: zero drift gives a drift-less FV process; nonzero drift with
    invertible ``Sigma`` rules out FV; otherwise the question is left open.
    """
    d = np.asarray(d, dtype=float)
    if not np.any(d):
        return FV_DRIFTLESS
    return NOT_FV if sigma_invertible else FV_UNKNOWN


# ---------------------------------------------------------------------------
# Numerical reconciliation of densities against exponents
# ---------------------------------------------------------------------------


def _axis_decay(p: WVaGParams, k: int) -> float:
    ak, mk, skk = p.alpha[k], p.mu[k], p.sigma[k, k]
    return (np.sqrt(2.0 * p.b * skk + ak * mk**2) - np.sqrt(ak) * abs(mk)) / (np.sqrt(ak) * skk)


def axis_exponent_by_quadrature(theta_k: float, p: WVaGParams, k: int, rtol: float = 1e-10) -> complex:
    """``∫ (e^{i θ y} - 1) f_k(y) dy`` over ``R \\ {0}``."""
    fk = wvag_levy_density(p).axis_densities[k]
    L = 40.0 / _axis_decay(p, k)

    def g(y):
        return np.expm1(1j * theta_k * y) * fk(y) + np.expm1(-1j * theta_k * y) * fk(-y)

    val, _ = adaptive_quad(g, 1e-300, L, rtol=rtol, initial_panels=16)
    return val


def full_exponent_by_quadrature(theta, p: WVaGParams, n_angles: int = 256, rtol: float = 1e-9) -> complex:
    """``∬ (e^{i<θ,y>} - 1) f_0(y) dy`` for ``n = 2`` in polar coordinates.

    The radial integrand ``(e^{i r<θ,s>} - 1) f_0(r s) r`` is bounded at
    ``r = 0``; the angular integrand is smooth and periodic, so the trapezoid
    rule in the angle converges geometrically.
    """
    if p.dim != 2:
        raise SpecError("polar reconciliation is implemented for n = 2")
    theta = np.asarray(theta, dtype=float)
    f0 = wvag_levy_density(p).full_support_density
    S = time_product_cov(p.alpha, p.sigma)
    m = p.alpha * p.mu
    Q = np.linalg.inv(S)
    # slowest radial decay over all directions bounds the truncation radius
    lam_min = np.linalg.eigvalsh(Q)[0]
    rate = np.sqrt(2.0 * p.b + m @ Q @ m) * np.sqrt(lam_min) - np.linalg.norm(Q @ m)
    if not rate > 0:
        rate = 1e-3
    L = 40.0 / rate
    phis = 2 * np.pi * np.arange(n_angles) / n_angles
    total = 0j
    for phi in phis:
        s = np.array([np.cos(phi), np.sin(phi)])
        ts = theta @ s

        def g(r):
            pts = r[:, None] * s[None, :]
            return np.expm1(1j * r * ts) * f0(pts) * r

        val, _ = adaptive_quad(g, 1e-300, L, rtol=rtol, initial_panels=8)
        total += val
    return total * (2 * np.pi / n_angles)


def wvag_exponent_from_density(theta, p: WVaGParams, n_angles: int = 256) -> complex:
    """WVaG exponent rebuilt from its Lévy density (no linear term: FV and drift-less)."""
    theta = np.asarray(theta, dtype=float)
    out = full_exponent_by_quadrature(theta, p, n_angles=n_angles)
    for k in range(p.dim):
        out += axis_exponent_by_quadrature(theta[k], p, k)
    return out


def truncated_second_moment(density: Callable, dim: int, radius_max: float = 60.0, n_angles: int = 128, rtol: float = 1e-8) -> float:
    """``∫ min(|y|^2, 1) density(y) dy`` for ``dim`` in {1, 2} by (polar) quadrature."""
    if dim == 1:
        g = lambda y: np.minimum(y * y, 1.0) * (density(y) + density(-y))
        val, _ = adaptive_quad(g, 1e-300, radius_max, rtol=rtol, initial_panels=16, breakpoints=(1.0,))
        return float(np.real(val))
    if dim == 2:
        total = 0.0
        for phi in 2 * np.pi * np.arange(n_angles) / n_angles:
            s = np.array([np.cos(phi), np.sin(phi)])
            g = lambda r: np.minimum(r * r, 1.0) * density(r[:, None] * s[None, :]) * r
            val, _ = adaptive_quad(g, 1e-300, radius_max, rtol=rtol, initial_panels=8, breakpoints=(1.0,))
            total += float(np.real(val))
        return total * 2 * np.pi / n_angles
    raise SpecError("truncated moment quadrature is implemented for dim 1 and 2")
