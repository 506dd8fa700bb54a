"""Empirical characteristic function and moment checks of samples against analytic laws."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from .charfn import vg_exponent
from .core import SpecError, VGParams
from .moments import MomentReport

DEFAULT_THRESHOLD = 4.0
GRID_LEVELS = (-3.0, -1.5, 0.5, 1.5, 3.0)
_CHUNK = 8192


@dataclass(frozen=True)
class ECFReport:
    """Per-θ comparison of an empirical characteristic function with a reference.

    For two-sample comparisons ``analytic`` holds the second sample's ECF.
    """

    theta_grid: np.ndarray
    ecf: np.ndarray
    analytic: np.ndarray
    studentized: np.ndarray
    max_studentized: float
    passed: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "max_studentized": self.max_studentized,
            "pass": self.passed,
            "rows": [
                {
                    "theta": th.tolist(),
                    "ecf": [e.real, e.imag],
                    "reference": [a.real, a.imag],
                    "studentized": s,
                }
                for th, e, a, s in zip(self.theta_grid, self.ecf, self.analytic, self.studentized.tolist())
            ],
        }


@dataclass(frozen=True)
class MomentTestReport:
    labels: tuple
    sample: np.ndarray
    analytic: np.ndarray
    std_error: np.ndarray
    studentized: np.ndarray
    max_studentized: float
    passed: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "max_studentized": self.max_studentized,
            "pass": self.passed,
            "rows": [
                {"entry": l, "sample": s, "analytic": a, "std_error": e, "studentized": z}
                for l, s, a, e, z in zip(
                    self.labels, self.sample.tolist(), self.analytic.tolist(),
                    self.std_error.tolist(), self.studentized.tolist(),
                )
            ],
        }


def _samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise SpecError("samples must be an array of shape (N, m)")
    if x.shape[0] == 0:
        raise SpecError("empty sample set")
    return x


def _grid(theta_grid, m: int) -> np.ndarray:
    g = np.asarray(theta_grid, dtype=float)
    if g.size == 0:
        return np.zeros((0, m))
    if g.ndim == 1 and m == 1:
        g = g[:, None]
    if g.ndim != 2 or g.shape[1] != m:
        raise SpecError(f"theta grid must have shape (G, {m})")
    return g


def ecf_grid(samples, theta_grid) -> np.ndarray:
    """``mean_j exp(i<θ_g, x_j>)`` for every row of ``theta_grid``."""
    x = _samples(samples)
    g = _grid(theta_grid, x.shape[1])
    total = np.zeros(g.shape[0], dtype=complex)
    for lo in range(0, x.shape[0], _CHUNK):
        total += np.exp(1j * (x[lo:lo + _CHUNK] @ g.T)).sum(axis=0)
    return total / x.shape[0]


def ecf(samples, theta) -> complex:
    x = _samples(samples)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return complex(ecf_grid(x, theta[None, :])[0])


def standard_grid(m: int) -> np.ndarray:
    """Default θ grid in ``R^m``.

    The 5x5 tensor grid over every coordinate pair, the five levels on each
    axis, and the five levels on the diagonal. For ``m = 1`` this is just
    the five levels.
    """
    if m < 1:
        raise SpecError("grid dimension must be positive")
    lv = np.array(GRID_LEVELS)
    rows = []
    for i, j in combinations(range(m), 2):
        for a in lv:
            for b in lv:
                th = np.zeros(m)
                th[i], th[j] = a, b
                rows.append(th)
    for i in range(m):
        for a in lv:
            th = np.zeros(m)
            th[i] = a
            rows.append(th)
    if m > 2:
        rows.extend(np.full(m, a) for a in lv)
    return np.unique(np.array(rows), axis=0)


def _report(grid, e, ref, se, threshold) -> ECFReport:
    stud = np.abs(e - ref) / se if grid.shape[0] else np.zeros(0)
    mx = float(stud.max()) if stud.size else 0.0
    return ECFReport(grid, e, ref, stud, mx, bool(mx <= threshold), float(threshold))


def ecf_test(samples, exponent_fn: Callable, t: float, theta_grid, threshold: float = DEFAULT_THRESHOLD) -> ECFReport:
    """Studentized ECF comparison with ``exp(t * exponent_fn(θ))``.

    The standard error is ``sqrt((1 - |φ|²)/N)``, floored at ``1/N`` so that
    points with ``|φ| = 1`` (such as θ = 0) stay finite.
    """
    x = _samples(samples)
    grid = _grid(theta_grid, x.shape[1])
    N = x.shape[0]
    e = ecf_grid(x, grid)
    ref = np.array([np.exp(t * exponent_fn(th)) for th in grid], dtype=complex)
    se = np.maximum(np.sqrt(np.clip(1.0 - np.abs(ref) ** 2, 0.0, None) / N), 1.0 / N)
    return _report(grid, e, ref, se, threshold)


def two_sample_ecf_test(samples1, samples2, theta_grid, threshold: float = DEFAULT_THRESHOLD) -> ECFReport:
    """Studentized difference of two independent ECFs."""
    x1, x2 = _samples(samples1), _samples(samples2)
    if x1.shape[1] != x2.shape[1]:
        raise SpecError("sample dimensions differ")
    grid = _grid(theta_grid, x1.shape[1])
    n1, n2 = x1.shape[0], x2.shape[0]
    e1, e2 = ecf_grid(x1, grid), ecf_grid(x2, grid)
    var = np.clip(1.0 - np.abs(e1) ** 2, 0.0, None) / n1 + np.clip(1.0 - np.abs(e2) ** 2, 0.0, None) / n2
    se = np.maximum(np.sqrt(var), 1.0 / min(n1, n2))
    return _report(grid, e1, e2, se, threshold)


def marginal_vg_test(samples, k: int, p: VGParams, t: float, theta_grid, threshold: float = DEFAULT_THRESHOLD) -> ECFReport:
    """ECF test of coordinate ``k`` (0-based) against a univariate VG law."""
    x = _samples(samples)
    if not 0 <= k < x.shape[1]:
        raise SpecError(f"coordinate {k} out of range")
    if p.dim != 1:
        raise SpecError("marginal law must be univariate")
    grid = np.asarray(theta_grid, dtype=float).reshape(-1, 1)
    return ecf_test(x[:, [k]], lambda th: vg_exponent(th, p), t, grid, threshold)


def joint_moments(report: MomentReport, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of ``(T(t), Y(t))`` from a per-unit-time report."""
    mean = t * np.concatenate((report.meanT, report.meanY))
    cov = t * np.block([[report.covT, report.covYT.T], [report.covYT, report.covY]])
    return mean, cov


def moment_test(samples, report: MomentReport, t: float, threshold: float = DEFAULT_THRESHOLD) -> MomentTestReport:
    """Studentize sample means and covariances of joint ``(T, Y)`` samples.

    ``samples`` has shape ``(N, 2n)`` with ``T`` first. Covariance standard
    errors use the delta method: the sample variance of the centred products
    divided by ``N``. An entry with zero standard error must match exactly
    (up to rounding).
    """
    x = _samples(samples)
    N, m = x.shape
    if N < 2:
        raise SpecError("moment test needs at least two samples")
    mean_a, cov_a = joint_moments(report, t)
    if mean_a.size != m:
        raise SpecError("sample dimension does not match the moment report")
    mean_s = x.mean(axis=0)
    c = x - mean_s
    labels, samp, anal, se = [], [], [], []
    for i in range(m):
        labels.append(f"mean[{i}]")
        samp.append(mean_s[i])
        anal.append(mean_a[i])
        se.append(c[:, i].std(ddof=1) / np.sqrt(N))
    for i in range(m):
        for j in range(i, m):
            prod = c[:, i] * c[:, j]
            labels.append(f"cov[{i},{j}]")
            samp.append(prod.sum() / (N - 1))
            anal.append(cov_a[i, j])
            se.append(prod.std(ddof=1) / np.sqrt(N))
    samp, anal, se = np.array(samp), np.array(anal), np.array(se)
    diff = np.abs(samp - anal)
    exact_tol = 1e-12 * (1.0 + np.abs(anal))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(diff <= exact_tol, 0.0, np.inf))
    mx = float(z.max())
    return MomentTestReport(tuple(labels), samp, anal, se, z, mx, bool(mx <= threshold), float(threshold))
