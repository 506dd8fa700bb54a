"""Path samplers for ``(T, B ⊙ T)``.

Three schemes:

* ``superposition``: exact increments for drift plus gamma rays plus jump
  atoms. Each ray contributes ``G u`` to ``T`` and ``N(G u⊙mu, G u⊙Sigma)``
  to ``Y`` with ``G ~ Gamma(a dt, b)``; this is strong subordination of the
  Brownian motion ``(I u, W^{(u)})`` along the ray by ``G``.
* ``marked``: jumps of ``T`` above ``epsilon`` are simulated one by one and
  each jump ``dT`` is marked with an independent ``N(dT⊙mu, dT⊙Sigma)``.
* ``strong``: ``B`` evaluated at its own accumulated time ``T``, only in
  the two regimes where that is the same law (all components of ``T``
  equal, or ``Sigma`` diagonal).

All samplers are deterministic functions of ``(seed, model, grid, n_paths)``:
path ``p`` draws from its own stream and writes only its own output slab.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import _threads
from .rng import e1_scaled, gamma, jump_from_table, jump_table, normal, poisson, seed_state, uniform

import numba  # noqa: E402  (imported after rng configured the pool)
import numpy as np  # noqa: E402
from numba import prange  # noqa: E402

from .core import (  # noqa: E402
    BrownianSpec,
    SpecError,
    SubordinatorSpec,
    WVaGParams,
    psd_factor,
    time_product_cov,
    wvag_subordinator,
)
from .moments import subordinator_moments  # noqa: E402

SUPERPOSITION = "superposition"
MARKED = "marked"
STRONG = "strong"
SCHEMES = (SUPERPOSITION, MARKED, STRONG)

DEFAULT_BIAS_RATIO = 1e-6
_TABLE_NODES = 512


@dataclass(frozen=True)
class PathSample:
    """Sampled paths on ``time_grid[1:]``.

    ``t_paths`` and ``y_paths`` have shape ``(n_paths, steps, n)`` and hold
    cumulative values; ``time_grid`` starts at 0, where both are zero.
    ``bias_report`` is the expected jump mass of ``T`` per unit time left out
    by the truncation (zero for exact schemes).
    """

    time_grid: np.ndarray
    t_paths: np.ndarray
    y_paths: np.ndarray
    seed: int
    scheme: str
    bias_report: np.ndarray
    epsilon: tuple = field(default=())

    @property
    def n_paths(self) -> int:
        return self.t_paths.shape[0]

    def at_step(self, j: int = -1) -> np.ndarray:
        """Joint samples ``(T, Y)`` at grid point ``j``, shape ``(n_paths, 2n)``."""
        return np.concatenate((self.t_paths[:, j, :], self.y_paths[:, j, :]), axis=1)


# ---------------------------------------------------------------------------
# Input plumbing
# ---------------------------------------------------------------------------


def _prepare_grid(grid) -> tuple[np.ndarray, np.ndarray]:
    g = np.atleast_1d(np.asarray(grid, dtype=float))
    if g.ndim != 1 or g.size == 0 or not np.all(np.isfinite(g)):
        raise SpecError("time grid must be a nonempty 1-d array of finite times")
    if g[0] != 0.0:
        g = np.concatenate(([0.0], g))
    dts = np.diff(g)
    if g[0] < 0 or dts.size == 0 or np.any(dts <= 0):
        raise SpecError("time grid must be strictly increasing and start at or after 0")
    return g, dts


def _seed(seed) -> np.uint64:
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise SpecError("seed must be an integer")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise SpecError("seed must fit in 64 unsigned bits")
    return np.uint64(seed)


def _n_paths(n_paths) -> int:
    if isinstance(n_paths, (bool, np.bool_)) or not isinstance(n_paths, (int, np.integer)) or n_paths < 1:
        raise SpecError("number of paths must be a positive integer")
    return int(n_paths)


def _check_pair(T: SubordinatorSpec, B) -> None:
    if not isinstance(B, BrownianSpec):
        raise SpecError("only Brownian subordinates can be sampled")
    if T.dim != B.dim:
        raise SpecError("subordinator and Brownian motion dimensions differ")


def _ray_arrays(T: SubordinatorSpec, B: BrownianSpec):
    n, R = T.dim, len(T.rays)
    dirs = np.zeros((R, n))
    shape = np.zeros(R)
    rate = np.zeros(R)
    mus = np.zeros((R, n))
    facs = np.zeros((R, n, n))
    for i, r in enumerate(T.rays):
        dirs[i], shape[i], rate[i] = r.direction, r.shape, r.rate
        mus[i] = r.direction * B.mu
        facs[i] = psd_factor(time_product_cov(r.direction, B.sigma))
    return dirs, shape, rate, mus, facs


def _atom_arrays(T: SubordinatorSpec, B: BrownianSpec):
    n, A = T.dim, len(T.atoms)
    pts = np.zeros((A, n))
    lam = np.zeros(A)
    mus = np.zeros((A, n))
    facs = np.zeros((A, n, n))
    for i, a in enumerate(T.atoms):
        pts[i], lam[i] = a.point, a.intensity
        mus[i] = a.point * B.mu
        facs[i] = psd_factor(time_product_cov(a.point, B.sigma))
    return pts, lam, mus, facs


def _drift_arrays(T: SubordinatorSpec, B: BrownianSpec):
    return T.drift.copy(), T.drift * B.mu, psd_factor(time_product_cov(T.drift, B.sigma))


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _add_gaussian(st, y, mean, fac, scale, z):
    n = y.shape[0]
    for i in range(n):
        z[i] = normal(st)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += fac[i, j] * z[j]
        y[i] += mean[i] + scale * acc


@numba.njit(cache=True, nogil=True)
def _ray_increment(st, t, y, g, direction, dmu, fac, z):
    # strong subordination of (I u, W^{(u)}) by the scalar time g
    if g <= 0.0:
        return
    n = t.shape[0]
    for i in range(n):
        t[i] += g * direction[i]
    m = np.empty(n)
    for i in range(n):
        m[i] = g * dmu[i]
    _add_gaussian(st, y, m, fac, math.sqrt(g), z)


@numba.njit(cache=True, nogil=True, parallel=True)
def _weak_kernel(
    seed, dts, marked,
    drift, drift_mu, drift_fac, drift_noise,
    ray_dir, ray_shape, ray_rate, ray_mu, ray_fac,
    ray_lam, ray_log_e1, tab_y, tab_s, tab_ds,
    atom_pt, atom_lam, atom_mu, atom_fac,
    t_out, y_out,
):
    n_paths, steps, n = t_out.shape
    R = ray_dir.shape[0]
    A = atom_pt.shape[0]
    for p in prange(n_paths):
        st = seed_state(seed, p)
        t = np.zeros(n)
        y = np.zeros(n)
        z = np.empty(n)
        m = np.empty(n)
        for j in range(steps):
            dt = dts[j]
            for i in range(n):
                t[i] += drift[i] * dt
            if drift_noise:
                for i in range(n):
                    m[i] = drift_mu[i] * dt
                _add_gaussian(st, y, m, drift_fac, math.sqrt(dt), z)
            else:
                for i in range(n):
                    y[i] += drift_mu[i] * dt
            for r in range(R):
                if marked:
                    count = poisson(st, ray_lam[r] * dt)
                    for _ in range(count):
                        target = math.log(uniform(st)) + ray_log_e1[r]
                        g = jump_from_table(target, tab_y[r], tab_s[r], tab_ds[r]) / ray_rate[r]
                        _ray_increment(st, t, y, g, ray_dir[r], ray_mu[r], ray_fac[r], z)
                else:
                    g = gamma(st, ray_shape[r] * dt, ray_rate[r])
                    _ray_increment(st, t, y, g, ray_dir[r], ray_mu[r], ray_fac[r], z)
            for a in range(A):
                count = poisson(st, atom_lam[a] * dt)
                if count > 0:
                    for i in range(n):
                        t[i] += count * atom_pt[a, i]
                        m[i] = count * atom_mu[a, i]
                    # sum of `count` independent marks
                    _add_gaussian(st, y, m, atom_fac[a], math.sqrt(count), z)
            for i in range(n):
                t_out[p, j, i] = t[i]
                y_out[p, j, i] = y[i]


@numba.njit(cache=True, nogil=True, parallel=True)
def _strong_kernel(
    seed, dts, common,
    drift, ray_dir, ray_shape, ray_rate, atom_pt, atom_lam,
    mu, fac, sd,
    t_out, y_out,
):
    n_paths, steps, n = t_out.shape
    R = ray_dir.shape[0]
    A = atom_pt.shape[0]
    for p in prange(n_paths):
        st = seed_state(seed, p)
        t = np.zeros(n)
        y = np.zeros(n)
        dT = np.empty(n)
        z = np.empty(n)
        m = np.empty(n)
        for j in range(steps):
            dt = dts[j]
            for i in range(n):
                dT[i] = drift[i] * dt
            for r in range(R):
                g = gamma(st, ray_shape[r] * dt, ray_rate[r])
                for i in range(n):
                    dT[i] += g * ray_dir[r, i]
            for a in range(A):
                count = poisson(st, atom_lam[a] * dt)
                for i in range(n):
                    dT[i] += count * atom_pt[a, i]
            if common:
                tau = dT[0]
                for i in range(n):
                    m[i] = mu[i] * tau
                _add_gaussian(st, y, m, fac, math.sqrt(tau), z)
            else:
                for i in range(n):
                    y[i] += mu[i] * dT[i] + sd[i] * math.sqrt(dT[i]) * normal(st)
            for i in range(n):
                t[i] += dT[i]
                t_out[p, j, i] = t[i]
                y_out[p, j, i] = y[i]


# ---------------------------------------------------------------------------
# Public samplers
# ---------------------------------------------------------------------------


def _run_weak(T, B, grid, n_paths, seed, marked, eps):
    _check_pair(T, B)
    g, dts = _prepare_grid(grid)
    n_paths = _n_paths(n_paths)
    seed64 = _seed(seed)
    _threads.apply()
    dirs, shape, rate, mus, facs = _ray_arrays(T, B)
    pts, lam, amus, afacs = _atom_arrays(T, B)
    d, dmu, dfac = _drift_arrays(T, B)
    R = len(T.rays)
    if marked:
        x0 = rate * eps
        ray_log_e1 = np.array([math.log(e1_scaled(x)) - x for x in x0])
        ray_lam = shape * np.exp(ray_log_e1)
        tabs = [jump_table(x, _TABLE_NODES) for x in x0]
        tab_y = np.array([tb[0] for tb in tabs]).reshape(R, _TABLE_NODES)
        tab_s = np.array([tb[1] for tb in tabs]).reshape(R, _TABLE_NODES)
        tab_ds = np.array([tb[2] for tb in tabs]).reshape(R, _TABLE_NODES)
    else:
        ray_lam = np.zeros(R)
        ray_log_e1 = np.zeros(R)
        tab_y = tab_s = tab_ds = np.zeros((R, 1))
    n = T.dim
    t_out = np.zeros((n_paths, dts.size, n))
    y_out = np.zeros((n_paths, dts.size, n))
    _weak_kernel(
        seed64, dts, marked,
        d, dmu, dfac, bool(np.any(dfac)),
        dirs, shape, rate, mus, facs,
        ray_lam, ray_log_e1, tab_y, tab_s, tab_ds,
        pts, lam, amus, afacs,
        t_out, y_out,
    )
    return g, t_out, y_out, int(seed64)


def sample_superposition(T: SubordinatorSpec, B: BrownianSpec, grid, n_paths: int, seed: int) -> PathSample:
    """Exact sampler for a drift plus gamma rays plus jump atoms subordinator."""
    g, t_out, y_out, s = _run_weak(T, B, grid, n_paths, seed, False, None)
    return PathSample(g, t_out, y_out, s, SUPERPOSITION, np.zeros(T.dim))


def sample_wvag(p: WVaGParams, grid, n_paths: int, seed: int) -> PathSample:
    """Exact WVaG sampler: the common ray plus one idiosyncratic ray per axis."""
    return sample_superposition(wvag_subordinator(p), p.brownian, grid, n_paths, seed)


def default_epsilon(T: SubordinatorSpec, ratio: float = DEFAULT_BIAS_RATIO) -> np.ndarray:
    """Per-ray cutoff with ``|u| a (1 - e^{-b ε})/b = ratio |E T(1)|``."""
    mean_norm = np.linalg.norm(subordinator_moments(T)[0])
    eps = np.empty(len(T.rays))
    for i, r in enumerate(T.rays):
        c = ratio * mean_norm * r.rate / (np.linalg.norm(r.direction) * r.shape)
        eps[i] = -math.log1p(-min(c, 0.5)) / r.rate
    return eps


def _epsilons(T: SubordinatorSpec, epsilon) -> np.ndarray:
    if epsilon is None:
        return default_epsilon(T)
    eps = np.broadcast_to(np.asarray(epsilon, dtype=float), (len(T.rays),)).copy()
    if np.any(~(eps > 0)) or not np.all(np.isfinite(eps)):
        raise SpecError("epsilon must be positive and finite")
    return eps


def truncation_bias(T: SubordinatorSpec, epsilon) -> np.ndarray:
    """Expected jump mass of ``T`` below the cutoff per unit time: ``Σ u a (1 - e^{-b ε})/b``."""
    eps = _epsilons(T, epsilon) if epsilon is not None else None
    if eps is None:
        raise SpecError("epsilon must be given")
    out = np.zeros(T.dim)
    for r, e in zip(T.rays, eps):
        out += r.direction * (-r.shape * math.expm1(-r.rate * e) / r.rate)
    return out


def sample_weak_marked(
    T: SubordinatorSpec, B: BrownianSpec, grid, n_paths: int, epsilon, seed: int
) -> PathSample:
    """Marked-jump sampler; ``epsilon`` is a scalar, one value per ray, or ``None`` for the default."""
    eps = _epsilons(T, epsilon)
    g, t_out, y_out, s = _run_weak(T, B, grid, n_paths, seed, True, eps)
    return PathSample(g, t_out, y_out, s, MARKED, truncation_bias(T, eps), tuple(float(e) for e in eps))


def strong_regime(T: SubordinatorSpec, B: BrownianSpec) -> str:
    """``"common"`` if every jump and the drift have equal components, else
    ``"independent"`` if ``Sigma`` is diagonal; raises :class:`SpecError` otherwise.
    """
    _check_pair(T, B)
    n = T.dim
    pts = [r.direction for r in T.rays] + [a.point for a in T.atoms] + [T.drift]
    if all(np.all(v == v[0]) for v in pts):
        return "common"
    if not np.any(B.sigma[~np.eye(n, dtype=bool)]):
        return "independent"
    raise SpecError(
        "strong subordination needs equal time components or independent Brownian components (diagonal Sigma)"
    )


def sample_strong(T: SubordinatorSpec, B: BrownianSpec, grid, n_paths: int, seed: int) -> PathSample:
    """Traditional subordination ``B(T)`` in the regimes where it agrees with the weak law."""
    common = strong_regime(T, B) == "common"
    g, dts = _prepare_grid(grid)
    n_paths = _n_paths(n_paths)
    seed64 = _seed(seed)
    _threads.apply()
    dirs, shape, rate, _, _ = _ray_arrays(T, B)
    pts, lam, _, _ = _atom_arrays(T, B)
    n = T.dim
    t_out = np.zeros((n_paths, dts.size, n))
    y_out = np.zeros((n_paths, dts.size, n))
    _strong_kernel(
        seed64, dts, common,
        T.drift.copy(), dirs, shape, rate, pts, lam,
        B.mu.copy(), psd_factor(B.sigma), np.sqrt(np.diag(B.sigma)),
        t_out, y_out,
    )
    return PathSample(g, t_out, y_out, int(seed64), STRONG, np.zeros(n))
