"""Domain types and the multivariate-time algebra.

Every Lévy measure handled by the package is one of: zero, a finite sum of
point masses, or a finite superposition of gamma rays. That keeps every
integral in closed form or one-dimensional.

Vectors are row vectors, ``t ⊙ mu`` is the componentwise product and
``t ⊙ Sigma`` has entries ``Sigma[k, l] * min(t[k], t[l])``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

PSD_JITTER = 1e-10


class SpecError(ValueError):
    """Invalid model parameters or inconsistent dimensions."""


class NumericalError(RuntimeError):
    """A numerical routine failed (quadrature non-convergence, branch guard)."""


def _frozen(x, ndim: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != ndim:
        raise SpecError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpecError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _check_len(x: np.ndarray, n: int, name: str) -> None:
    if x.shape != (n,):
        raise SpecError(f"{name} has length {x.shape[0] if x.ndim else 0}, expected {n}")


def is_psd(sigma: np.ndarray, jitter: float = PSD_JITTER) -> bool:
    """True if ``sigma + jitter*max|sigma_kk|*I`` admits a Cholesky factor."""
    sigma = np.asarray(sigma, dtype=float)
    scale = np.max(np.abs(np.diag(sigma))) if sigma.size else 0.0
    if scale == 0.0:
        return not np.any(sigma)
    try:
        np.linalg.cholesky(sigma + jitter * scale * np.eye(sigma.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def psd_factor(sigma: np.ndarray) -> np.ndarray:
    """Return ``L`` with ``L @ L.T == sigma`` for a symmetric PSD matrix.

    Uses an eigendecomposition so that rank-deficient matrices (frozen
    coordinates, perfectly correlated components) are reproduced exactly
    instead of picking up jitter noise.
    """
    sigma = np.asarray(sigma, dtype=float)
    if not np.any(sigma):
        return np.zeros_like(sigma)
    w, v = np.linalg.eigh(sigma)
    return v * np.sqrt(np.clip(w, 0.0, None))


def _check_cov(sigma: np.ndarray, n: int, name: str = "sigma") -> None:
    if sigma.shape != (n, n):
        raise SpecError(f"{name} has shape {sigma.shape}, expected {(n, n)}")
    if np.any(sigma != sigma.T):
        raise SpecError(f"{name} is not symmetric")
    if not is_psd(sigma):
        raise SpecError(f"{name} is not positive semidefinite")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BrownianSpec:
    """Brownian motion with drift ``mu`` and covariance ``sigma`` per unit time."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = _frozen(self.mu, 1, "mu")
        sigma = _frozen(self.sigma, 2, "sigma")
        if mu.shape[0] < 1:
            raise SpecError("dimension must be positive")
        _check_cov(sigma, mu.shape[0])
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class GammaRay:
    """Jumps ``g * direction`` where ``g`` has Lévy density ``shape*exp(-rate*g)/g``."""

    direction: np.ndarray
    shape: float
    rate: float

    def __post_init__(self):
        u = _frozen(self.direction, 1, "direction")
        if np.any(u < 0) or not np.any(u > 0):
            raise SpecError("ray direction must be nonnegative and nonzero")
        if not (self.shape > 0 and self.rate > 0):
            raise SpecError("ray shape and rate must be positive")
        object.__setattr__(self, "direction", u)
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(frozen=True)
class JumpAtom:
    """Fixed-size jump ``point`` arriving at ``intensity`` per unit time."""

    point: np.ndarray
    intensity: float

    def __post_init__(self):
        t = _frozen(self.point, 1, "point")
        if np.any(t < 0) or not np.any(t > 0):
            raise SpecError("atom point must be nonnegative and nonzero")
        if not self.intensity > 0:
            raise SpecError("atom intensity must be positive")
        object.__setattr__(self, "point", t)
        object.__setattr__(self, "intensity", float(self.intensity))


@dataclass(frozen=True)
class SubordinatorSpec:
    """Drift plus a superposition of gamma rays and jump atoms."""

    drift: np.ndarray
    rays: tuple = ()
    atoms: tuple = ()

    def __post_init__(self):
        d = _frozen(self.drift, 1, "drift")
        if np.any(d < 0):
            raise SpecError("subordinator drift must be nonnegative")
        rays, atoms = tuple(self.rays), tuple(self.atoms)
        for r in rays:
            _check_len(r.direction, d.shape[0], "ray direction")
        for a in atoms:
            _check_len(a.point, d.shape[0], "atom point")
        object.__setattr__(self, "drift", d)
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "atoms", atoms)

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    def canonical(self, rtol: float = 1e-12) -> "SubordinatorSpec":
        """Law-equivalent spec with unit-norm ray directions and parallel rays merged.

        ``g*u`` with rate ``b`` equals ``g'*(u/|u|)`` with rate ``b/|u|``; rays
        sharing direction and rate add their shapes.
        """
        merged: list[list] = []
        for r in self.rays:
            norm = np.linalg.norm(r.direction)
            u, b = r.direction / norm, r.rate / norm
            for m in merged:
                if np.allclose(m[0], u, rtol=rtol, atol=rtol) and np.isclose(m[2], b, rtol=rtol):
                    m[1] += r.shape
                    break
            else:
                merged.append([u, r.shape, b])
        rays = tuple(GammaRay(u, a, b) for u, a, b in merged)
        return SubordinatorSpec(self.drift, rays, self.atoms)


@dataclass(frozen=True)
class ThorinAtomicMeasure:
    """Finitely supported Thorin measure: ``sum_i weight_i * delta(location_i)``."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loc = np.array(self.locations, dtype=float)
        if loc.ndim == 1 and loc.size == 0:
            raise SpecError("empty Thorin measure needs an explicit dimension; use ThorinAtomicMeasure.empty(n)")
        loc = _frozen(loc, 2, "locations")
        w = _frozen(self.weights, 1, "weights")
        if w.shape[0] != loc.shape[0]:
            raise SpecError("one weight per location required")
        if np.any(loc < 0) or np.any(~np.any(loc > 0, axis=1)):
            raise SpecError("Thorin locations must be nonnegative and nonzero")
        if np.any(w <= 0):
            raise SpecError("Thorin weights must be positive")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)

    @classmethod
    def empty(cls, n: int) -> "ThorinAtomicMeasure":
        return cls(np.zeros((0, n)), np.zeros(0))

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    def __len__(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class WVaGParams:
    """Weak variance-alpha-gamma parameters ``(a, b, alpha, mu, sigma)``."""

    a: float
    b: float
    alpha: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    beta: np.ndarray = field(init=False)

    def __post_init__(self):
        alpha = _frozen(self.alpha, 1, "alpha")
        n = alpha.shape[0]
        if n < 2:
            raise SpecError("WVaG requires dimension n >= 2")
        mu = _frozen(self.mu, 1, "mu")
        _check_len(mu, n, "mu")
        sigma = _frozen(self.sigma, 2, "sigma")
        _check_cov(sigma, n)
        a, b = float(self.a), float(self.b)
        if not (a > 0 and b > 0):
            raise SpecError("a and b must be positive")
        if np.any(alpha <= 0):
            raise SpecError("alpha must be strictly positive")
        if np.any(b <= a * alpha):
            raise SpecError(f"need b > a*alpha_k for every k (b={b}, a*alpha={a * alpha})")
        beta = (b - a * alpha) / alpha
        beta.setflags(write=False)
        for name, val in (("a", a), ("b", b), ("alpha", alpha), ("mu", mu), ("sigma", sigma), ("beta", beta)):
            object.__setattr__(self, name, val)

    @property
    def dim(self) -> int:
        return self.alpha.shape[0]

    @property
    def brownian(self) -> BrownianSpec:
        return BrownianSpec(self.mu, self.sigma)


@dataclass(frozen=True)
class VGParams:
    """Variance-gamma parameters: standard gamma clock rate ``b`` and Brownian ``(mu, sigma)``."""

    b: float
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.array(self.mu, dtype=float))
        sigma = np.atleast_2d(np.array(self.sigma, dtype=float))
        bm = BrownianSpec(mu, sigma)
        if not float(self.b) > 0:
            raise SpecError("VG rate b must be positive")
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "mu", bm.mu)
        object.__setattr__(self, "sigma", bm.sigma)

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class FiniteAtomicMeasure:
    """Finite Lévy measure ``sum_i mass_i * delta(point_i)`` on ``R^n \\ {0}``."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points, 2, "points")
        m = _frozen(self.masses, 1, "masses")
        if m.shape[0] != pts.shape[0]:
            raise SpecError("one mass per point required")
        if np.any(m <= 0):
            raise SpecError("masses must be positive")
        if np.any(~np.any(pts != 0, axis=1)):
            raise SpecError("no atom may sit at the origin")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", m)

    @classmethod
    def empty(cls, n: int) -> "FiniteAtomicMeasure":
        return cls(np.zeros((0, n)), np.zeros(0))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def merged(self) -> "FiniteAtomicMeasure":
        """Combine coincident points and sort lexicographically."""
        if len(self.masses) == 0:
            return self
        uniq, inv = np.unique(self.points, axis=0, return_inverse=True)
        masses = np.zeros(len(uniq))
        np.add.at(masses, inv.ravel(), self.masses)
        return FiniteAtomicMeasure(uniq, masses)


@dataclass(frozen=True)
class WeakPairCharacteristics:
    """Triplet of the weakly subordinated pair ``(T, X ⊙ T)`` for Brownian ``X``.

    ``theta`` is ``2n x 2n`` with only the lower-right block ``d ⊙ Sigma``
    nonzero. The jump part always has finite variation here, so ``m1``/``m2``
    are drifts relative to the zero truncation function (``d`` and
    ``d ⊙ mu``). The Lévy measure is described structurally: ``rays``/``atoms``
    of ``T``, each jump ``t`` marked by ``N(t ⊙ mu, t ⊙ Sigma)``.
    """

    m1: np.ndarray
    m2: np.ndarray
    theta: np.ndarray
    rays: tuple
    atoms: tuple
    marking: str = "gaussian: N(t*mu, t (.) Sigma)"


# ---------------------------------------------------------------------------
# Multivariate-time algebra
# ---------------------------------------------------------------------------


def time_ordering(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stable ascending order of ``t`` and its spacings ``t(k) - t(k-1)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise SpecError("time vector must be componentwise nonnegative")
    order = np.argsort(t, kind="stable")
    spacings = np.diff(np.concatenate(([0.0], t[order])))
    return order, spacings


def _as_vec(x, name="vector") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise SpecError(f"{name} must be a vector")
    return arr


def time_product_drift(t, mu) -> np.ndarray:
    """``t ⊙ mu`` (componentwise product)."""
    t, mu = _as_vec(t, "t"), _as_vec(mu, "mu")
    if t.shape != mu.shape:
        raise SpecError("dimension mismatch between t and mu")
    if np.any(t < 0):
        raise SpecError("time vector must be componentwise nonnegative")
    return t * mu


def time_product_cov(t, sigma) -> np.ndarray:
    """``t ⊙ Sigma``: entry ``(k, l)`` is ``Sigma[k, l] * min(t_k, t_l)``."""
    t = _as_vec(t, "t")
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (t.shape[0], t.shape[0]):
        raise SpecError("dimension mismatch between t and sigma")
    if np.any(sigma != sigma.T):
        raise SpecError("sigma is not symmetric")
    if np.any(t < 0):
        raise SpecError("time vector must be componentwise nonnegative")
    return sigma * np.minimum.outer(t, t)


def _check_measure_dim(t: np.ndarray, X: FiniteAtomicMeasure) -> None:
    if X.dim != t.shape[0]:
        raise SpecError("dimension mismatch between t and measure")


def time_product_measure(t, X: FiniteAtomicMeasure) -> FiniteAtomicMeasure:
    """``t ⊙ X = sum_k Δt(k) * X pushed through the projection onto {(k),...,(n)}``.

    Atoms landing on the origin are dropped; coincident atoms are merged so the
    result does not depend on how ties in ``t`` are ordered.
    """
    t = _as_vec(t, "t")
    _check_measure_dim(t, X)
    order, spacings = time_ordering(t)
    pts, masses = [], []
    for k, dt in enumerate(spacings):
        if dt == 0.0 or len(X.masses) == 0:
            continue
        proj = np.zeros_like(X.points)
        idx = order[k:]
        proj[:, idx] = X.points[:, idx]
        keep = np.any(proj != 0, axis=1)
        pts.append(proj[keep])
        masses.append(dt * X.masses[keep])
    if not pts:
        return FiniteAtomicMeasure.empty(t.shape[0])
    return FiniteAtomicMeasure(np.vstack(pts), np.concatenate(masses)).merged()


def compensation_vector(t, X: FiniteAtomicMeasure) -> np.ndarray:
    """Compensation ``c(t, X)`` for a finite atomic Lévy measure.

    Sums, over spacings beyond the first, the projected atoms that start
    outside the closed unit ball and land inside it.
    """
    t = _as_vec(t, "t")
    _check_measure_dim(t, X)
    order, spacings = time_ordering(t)
    c = np.zeros(t.shape[0])
    if len(X.masses) == 0:
        return c
    outside = np.linalg.norm(X.points, axis=1) > 1.0
    for k in range(1, t.shape[0]):
        dt = spacings[k]
        if dt == 0.0:
            continue
        proj = np.zeros_like(X.points)
        idx = order[k:]
        proj[:, idx] = X.points[:, idx]
        hit = outside & (np.linalg.norm(proj, axis=1) <= 1.0)
        c += dt * (X.masses[hit] @ proj[hit])
    return c


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------

ModelKind = Union[BrownianSpec, SubordinatorSpec, ThorinAtomicMeasure]


def _index_mask(J: Iterable[int], n: int) -> np.ndarray:
    J = sorted(set(int(j) for j in J))
    if not J:
        raise SpecError("projection index set must be nonempty")
    if J[0] < 0 or J[-1] >= n:
        raise SpecError(f"projection indices {J} out of range for dimension {n}")
    mask = np.zeros(n, dtype=bool)
    mask[J] = True
    return mask


def project_spec(J: Sequence[int], model: ModelKind) -> ModelKind:
    """Project a model onto the coordinates ``J`` (0-based), keeping dimension ``n``.

    Coordinates outside ``J`` are zeroed; rays and atoms whose projected
    direction vanishes are dropped. A Thorin atom at ``u`` is moved to
    ``pi(u) * |u|^2 / |pi(u)|^2`` so that the projected Thorin measure
    describes the projected subordinator (the gamma rate ``|u|^2`` of the
    corresponding ray must be preserved).
    """
    if isinstance(model, BrownianSpec):
        mask = _index_mask(J, model.dim)
        keep = np.outer(mask, mask)
        return BrownianSpec(np.where(mask, model.mu, 0.0), np.where(keep, model.sigma, 0.0))
    if isinstance(model, SubordinatorSpec):
        mask = _index_mask(J, model.dim)
        rays = []
        for r in model.rays:
            u = np.where(mask, r.direction, 0.0)
            if np.any(u > 0):
                rays.append(GammaRay(u, r.shape, r.rate))
        atoms = []
        for a in model.atoms:
            p = np.where(mask, a.point, 0.0)
            if np.any(p > 0):
                atoms.append(JumpAtom(p, a.intensity))
        return SubordinatorSpec(np.where(mask, model.drift, 0.0), tuple(rays), tuple(atoms))
    if isinstance(model, ThorinAtomicMeasure):
        mask = _index_mask(J, model.dim)
        proj = np.where(mask, model.locations, 0.0)
        keep = np.any(proj > 0, axis=1)
        proj, loc, w = proj[keep], model.locations[keep], model.weights[keep]
        if len(w) == 0:
            return ThorinAtomicMeasure.empty(model.dim)
        scale = np.sum(loc**2, axis=1) / np.sum(proj**2, axis=1)
        return ThorinAtomicMeasure(proj * scale[:, None], w)
    raise SpecError(f"cannot project object of type {type(model).__name__}")


def validate_wvag(a: float, b: float, alpha, mu, sigma) -> WVaGParams:
    """Build validated WVaG parameters; raises :class:`SpecError` on violations."""
    return WVaGParams(a, b, alpha, mu, sigma)


def wvag_subordinator(p: WVaGParams) -> SubordinatorSpec:
    """Alpha-gamma subordinator: common ray ``alpha`` plus one axis ray per coordinate."""
    n = p.dim
    rays = [GammaRay(p.alpha, p.a, p.b)]
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        rays.append(GammaRay(e, p.beta[k], p.b / p.alpha[k]))
    return SubordinatorSpec(np.zeros(n), tuple(rays))


def wvag_thorin_measure(p: WVaGParams) -> ThorinAtomicMeasure:
    """``a*δ(b α/|α|²) + Σ β_k δ(b e_k/α_k)``."""
    n = p.dim
    locs = [p.b * p.alpha / np.dot(p.alpha, p.alpha)]
    locs += [p.b / p.alpha[k] * np.eye(n)[k] for k in range(n)]
    return ThorinAtomicMeasure(np.array(locs), np.concatenate(([p.a], p.beta)))


def weak_pair_characteristics(T: SubordinatorSpec, B: BrownianSpec) -> WeakPairCharacteristics:
    """Characteristics of ``(T, B ⊙ T)`` in zero-truncation form."""
    if T.dim != B.dim:
        raise SpecError("subordinator and Brownian motion dimensions differ")
    n = T.dim
    theta = np.zeros((2 * n, 2 * n))
    theta[n:, n:] = time_product_cov(T.drift, B.sigma)
    return WeakPairCharacteristics(
        m1=T.drift.copy(),
        m2=time_product_drift(T.drift, B.mu),
        theta=theta,
        rays=T.rays,
        atoms=T.atoms,
    )
