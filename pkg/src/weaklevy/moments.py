"""Per-unit-time first and second moments of ``T`` and ``B ⊙ T``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BrownianSpec, SpecError, SubordinatorSpec, WVaGParams, time_product_cov


@dataclass(frozen=True)
class MomentReport:
    """Moments per unit time.

    ``covYT[k, l]`` is ``Cov(Y_k, T_l)``.
    """

    meanT: np.ndarray
    covT: np.ndarray
    meanY: np.ndarray
    covY: np.ndarray
    covYT: np.ndarray

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("meanT", "covT", "meanY", "covY", "covYT")}

    def project(self, J) -> "MomentReport":
        J = np.asarray(sorted(J))
        sub = np.ix_(J, J)
        return MomentReport(self.meanT[J], self.covT[sub], self.meanY[J], self.covY[sub], self.covYT[sub])


def subordinator_moments(T: SubordinatorSpec) -> tuple[np.ndarray, np.ndarray]:
    """``(E T(1), Cov T(1))``; a gamma ray contributes ``(a/b) u`` and ``(a/b²) u'u``."""
    mean = T.drift.copy()
    cov = np.zeros((T.dim, T.dim))
    for r in T.rays:
        mean += (r.shape / r.rate) * r.direction
        cov += (r.shape / r.rate**2) * np.outer(r.direction, r.direction)
    for a in T.atoms:
        mean += a.intensity * a.point
        cov += a.intensity * np.outer(a.point, a.point)
    return mean, cov


def weak_bm_moments(T: SubordinatorSpec, B: BrownianSpec) -> MomentReport:
    if T.dim != B.dim:
        raise SpecError("subordinator and Brownian motion dimensions differ")
    mu, sigma = B.mu, B.sigma
    meanT, covT = subordinator_moments(T)
    meanY = T.drift * mu
    covY = time_product_cov(T.drift, sigma)
    covYT = np.zeros((T.dim, T.dim))
    for r in T.rays:
        um = r.direction * mu
        m1, m2 = r.shape / r.rate, r.shape / r.rate**2
        meanY = meanY + m1 * um
        covY = covY + m1 * time_product_cov(r.direction, sigma) + m2 * np.outer(um, um)
        covYT += m2 * np.outer(um, r.direction)
    for a in T.atoms:
        tm = a.point * mu
        meanY = meanY + a.intensity * tm
        covY = covY + a.intensity * (time_product_cov(a.point, sigma) + np.outer(tm, tm))
        covYT += a.intensity * np.outer(tm, a.point)
    return MomentReport(meanT, covT, meanY, covY, covYT)


def wvag_moments(p: WVaGParams) -> MomentReport:
    """Closed-form WVaG moments: ``E Y_k = mu_k`` and the extra ``a α_k α_l μ_k μ_l / b²`` covariance."""
    a, b, al, mu, sig = p.a, p.b, p.alpha, p.mu, p.sigma
    covT = a * np.outer(al, al) / b**2
    covT[np.diag_indices(p.dim)] = al / b
    covY = (a * b * np.minimum.outer(al, al) * sig + a * np.outer(al * mu, al * mu)) / b**2
    covY[np.diag_indices(p.dim)] = (b * np.diag(sig) + mu**2 * al) / b
    return MomentReport(np.ones(p.dim), covT, mu.copy(), covY, mu[:, None] * covT)
