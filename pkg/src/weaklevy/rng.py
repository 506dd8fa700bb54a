"""Per-path random streams and the scalar variate generators used by the samplers.

Path ``p`` of a run with seed ``s`` owns a xoshiro256** stream whose state is
expanded by splitmix64 from ``(s, p)``, so a path's draws never depend on
which worker runs it.
"""
from __future__ import annotations

import math

from . import _threads

_threads.prepare()

import numba  # noqa: E402
import numpy as np  # noqa: E402

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_PATH_KEY = np.uint64(0xD1B54A32D192ED03)
_U53 = 1.0 / 9007199254740992.0
_EULER = 0.5772156649015329

jit = numba.njit(cache=True, nogil=True)


@jit
def _splitmix(x):
    z = x + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@jit
def seed_state(seed, path):
    """xoshiro256** state for stream ``path`` under ``seed`` (both uint64)."""
    s = np.empty(4, dtype=np.uint64)
    x = _splitmix(seed) ^ (np.uint64(path) * _PATH_KEY)
    for i in range(4):
        x = x + _GOLDEN
        z = x
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        s[i] = z ^ (z >> np.uint64(31))
    return s


@jit
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@jit
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@jit
def uniform(s):
    """Uniform on the open interval (0, 1)."""
    return (float(next_u64(s) >> np.uint64(11)) + 0.5) * _U53


@jit
def normal(s):
    # Box-Muller, one variate per call keeps the stream layout trivial
    u1 = uniform(s)
    u2 = uniform(s)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@jit
def _gamma_ge1(s, k):
    # Marsaglia-Tsang; acceptance >= 0.95 for every k >= 1
    d = k - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = normal(s)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = uniform(s)
        if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
            return d * v


@jit
def gamma(s, shape, rate):
    """Gamma(shape, rate); shapes below 1 use ``G(shape+1) U^{1/shape}`` in log space."""
    if shape <= 0.0:
        return 0.0
    if shape >= 1.0:
        return _gamma_ge1(s, shape) / rate
    g = _gamma_ge1(s, shape + 1.0)
    return math.exp(math.log(g) + math.log(uniform(s)) / shape) / rate


@jit
def poisson(s, mean):
    """Poisson variate: multiplication method below mean 10, PTRS above."""
    if mean <= 0.0:
        return 0
    if mean < 10.0:
        limit = math.exp(-mean)
        k = 0
        p = uniform(s)
        while p > limit:
            k += 1
            p *= uniform(s)
        return k
    slam = math.sqrt(mean)
    loglam = math.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)
    while True:
        u = uniform(s) - 0.5
        v = uniform(s)
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + mean + 0.43)
        if us >= 0.07 and v <= vr:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b) <= -mean + k * loglam - math.lgamma(k + 1.0):
            return int(k)


@jit
def e1_scaled(x):
    """``e^x E1(x)`` for ``x > 0``: power series up to 1, Lentz continued fraction above."""
    if x <= 1.0:
        total = 0.0
        term = 1.0
        for k in range(1, 60):
            term *= -x / k
            inc = term / k
            total += inc
            if abs(inc) < 1e-17 * abs(total):
                break
        return math.exp(x) * (-_EULER - math.log(x) - total)
    b = x + 1.0
    c = 1e300
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


@jit
def log_e1(x):
    return math.log(e1_scaled(x)) - x


# ---------------------------------------------------------------------------
# Truncated gamma-ray jump sizes
# ---------------------------------------------------------------------------
# With x = b g the normalised jump density on (b ε, ∞) is e^{-x}/(x E1(bε)).
# Drawing V uniform and solving log E1(x) = log V + log E1(x0) inverts the
# CDF. A cubic Hermite table in (log E1(x), log x) with exact slopes gives
# the start; Newton steps in log x polish to 1e-13.


def jump_table(x0: float, nodes: int = 512, span: float = 80.0):
    """Tabulate ``(y, s, ds)`` = ``(log E1(x), log x, d log x / d y)`` on ``[x0, x0+span]``.

    ``y`` decreases along the table.
    """
    s = np.linspace(math.log(x0), math.log(x0 + span), nodes)
    x = np.exp(s)
    es = np.array([e1_scaled(v) for v in x])
    y = np.log(es) - x
    ds = -es  # d(log x)/dy = -e^x E1(x)
    return y, s, ds


@jit
def jump_from_table(y_target, y, s, ds):
    """Solve ``log E1(x) = y_target`` for ``x``; ``y`` is the decreasing table grid."""
    m = y.shape[0]
    if y_target >= y[0]:
        sv = s[0]
    elif y_target <= y[m - 1]:
        # beyond the table log E1(x) ~ -x - log x; start from the last node
        sv = math.log(max(math.exp(s[m - 1]), -y_target - math.log(-y_target)))
    else:
        # binary search on decreasing y
        lo = 0
        hi = m - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if y[mid] >= y_target:
                lo = mid
            else:
                hi = mid
        h = y[hi] - y[lo]
        t = (y_target - y[lo]) / h
        t2 = t * t
        t3 = t2 * t
        sv = (
            (2 * t3 - 3 * t2 + 1) * s[lo]
            + (t3 - 2 * t2 + t) * h * ds[lo]
            + (-2 * t3 + 3 * t2) * s[hi]
            + (t3 - t2) * h * ds[hi]
        )
    for _ in range(50):
        x = math.exp(sv)
        es = e1_scaled(x)
        f = math.log(es) - x - y_target
        step = f * es  # f / (dy/ds) with dy/ds = -1/(e^x E1(x)), sign folded in
        sv += step
        if abs(step) < 1e-13:
            break
    return math.exp(sv)
