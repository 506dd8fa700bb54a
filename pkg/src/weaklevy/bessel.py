"""Modified Bessel functions of the second kind for integer and half-integer order.

Half-integer orders start from the elementary ``K_{1/2}`` and recur upwards.
Integer orders start from ``K_0``/``K_1``: power series for ``r <= 2`` and
Steed's continued fraction (Temme's CF2) above, then recur upwards. Upward
recurrence is the stable direction for ``K``.

Everything is vectorised over ``r``. ``scaled=True`` returns ``e^r K_rho(r)``,
which stays representable for large ``r``.
"""
from __future__ import annotations

import numpy as np

from .core import SpecError

SEAM = 2.0
_EULER = 0.57721566490153286061
_EPS = 1e-16
_SERIES_TERMS = 30  # q = r^2/4 <= 1 on the series branch; 30 terms reach 1e-60


def _order(rho: float) -> tuple[int, bool]:
    rho = abs(float(rho))
    twice = 2.0 * rho
    if twice != round(twice):
        raise SpecError(f"order must be an integer or half-integer, got {rho}")
    twice = int(round(twice))
    return twice // 2, bool(twice % 2)


def _k01_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = 0.25 * x * x
    lg = np.log(0.5 * x)
    term0 = np.ones_like(x)  # q^k / (k!)^2
    term1 = np.ones_like(x)  # q^k / (k! (k+1)!)
    i0 = np.ones_like(x)
    i1 = np.ones_like(x)
    s0 = np.zeros_like(x)
    s1 = np.full_like(x, 1.0 - 2.0 * _EULER)  # psi(1) + psi(2)
    h = 0.0
    for k in range(1, _SERIES_TERMS):
        term0 = term0 * q / (k * k)
        term1 = term1 * q / (k * (k + 1))
        h += 1.0 / k
        i0 += term0
        i1 += term1
        s0 += h * term0
        s1 += (2.0 * h - 2.0 * _EULER + 1.0 / (k + 1)) * term1
    i1 *= 0.5 * x
    k0 = -(lg + _EULER) * i0 + s0
    k1 = 1.0 / x + lg * i1 - 0.25 * x * s1
    return k0, k1


def _k01_cf2_scaled(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``e^x K_0(x)``, ``e^x K_1(x)`` by Steed's algorithm (fractional order 0)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    done = np.zeros(x.shape, dtype=bool)
    for i in range(2, 2000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        # freeze converged lanes so later (tiny, noisy) updates cannot move them
        s = np.where(done, s, s + dels)
        done |= np.abs(dels / s) < _EPS
        if done.all():
            break
    else:  # pragma: no cover - converges in < 100 steps for x >= 2
        raise RuntimeError("CF2 did not converge")
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def k01(x, branch: str | None = None, scaled: bool = False):
    """``(K_0(x), K_1(x))``; ``branch`` forces ``"series"`` or ``"cf2"`` (used by seam tests)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise SpecError("Bessel K argument must be positive")
    xs = np.atleast_1d(x)
    k0 = np.empty_like(xs)
    k1 = np.empty_like(xs)
    if branch is None:
        lo = xs <= SEAM
    else:
        lo = np.full(xs.shape, branch == "series")
    if lo.any():
        a, b = _k01_series(xs[lo])
        if scaled:
            a, b = a * np.exp(xs[lo]), b * np.exp(xs[lo])
        k0[lo], k1[lo] = a, b
    hi = ~lo
    if hi.any():
        a, b = _k01_cf2_scaled(xs[hi])
        if not scaled:
            a, b = a * np.exp(-xs[hi]), b * np.exp(-xs[hi])
        k0[hi], k1[hi] = a, b
    if x.ndim == 0:
        return float(k0[0]), float(k1[0])
    return k0.reshape(x.shape), k1.reshape(x.shape)


def bessel_k(rho: float, r, scaled: bool = False):
    """Modified Bessel function ``K_rho(r)`` for integer or half-integer ``rho``.

    Negative orders use ``K_{-rho} = K_rho``. ``r`` may be an array.
    """
    n, half = _order(rho)
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise SpecError("Bessel K argument must be positive")
    if half:
        k = np.sqrt(np.pi / (2.0 * r_arr))
        if not scaled:
            k = k * np.exp(-r_arr)
        k_prev = k  # K_{-1/2} = K_{1/2}
        nu = 0.5
    else:
        k_prev, k = k01(r_arr, scaled=scaled)
        if n == 0:
            return k_prev
        nu = 1.0
        n -= 1
    for _ in range(n):
        k_prev, k = k, k_prev + (2.0 * nu / r_arr) * k
        nu += 1.0
    return float(k) if np.ndim(k) == 0 else k


def scaled_bessel_k(rho: float, r):
    """``r**rho * K_rho(r)``; for ``rho > 0`` the limit at ``r -> 0+`` is finite."""
    r_arr = np.asarray(r, dtype=float)
    n, half = _order(rho)
    if half and n == 0:
        # sqrt(pi/2) e^{-r}, also valid at r = 0
        if np.any(r_arr < 0):
            raise SpecError("Bessel K argument must be nonnegative")
        out = np.sqrt(np.pi / 2.0) * np.exp(-r_arr)
        return float(out) if out.ndim == 0 else out
    out = r_arr ** abs(rho) * bessel_k(rho, r_arr)
    return float(out) if np.ndim(out) == 0 else out


def log_scaled_bessel_k(rho: float, r):
    """``log(r**rho * K_rho(r))`` without overflow or underflow for large ``r``."""
    r_arr = np.asarray(r, dtype=float)
    return abs(rho) * np.log(r_arr) + np.log(bessel_k(rho, r_arr, scaled=True)) - r_arr
