"""Weak subordination of multivariate Lévy processes.

Light modules (types, exponents, densities, moments) are imported eagerly;
the numba-backed samplers load on first use of :mod:`weaklevy.simulate`.
``WEAKLEVY_THREADS`` sizes the worker pool only if this package is imported
before numba.
"""
from . import _threads

_threads.prepare()

from .charfn import (
    bm_exponent,
    multitime_exponent,
    subordinator_exponent,
    thorin_laplace,
    vg_exponent,
    vggc_exponent,
    weak_pair_exponent,
    wvag_exponent,
)
from .core import (
    BrownianSpec,
    FiniteAtomicMeasure,
    GammaRay,
    JumpAtom,
    NumericalError,
    SpecError,
    SubordinatorSpec,
    ThorinAtomicMeasure,
    VGParams,
    WeakPairCharacteristics,
    WVaGParams,
    compensation_vector,
    project_spec,
    time_product_cov,
    time_product_drift,
    time_product_measure,
    validate_wvag,
    weak_pair_characteristics,
    wvag_subordinator,
    wvag_thorin_measure,
)
from .measure import (
    alpha_gamma_rays,
    classify_variation,
    rays_to_thorin,
    thorin_to_rays,
    vg_levy_density,
    vggc_levy_density,
    wvag_levy_density,
)
from .moments import MomentReport, subordinator_moments, weak_bm_moments, wvag_moments

__version__ = "0.1.0"
