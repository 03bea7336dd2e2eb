"""Selmer ratios of rational p-isogenies of elliptic curves over Q.

Computes local and global Selmer ratios c_l(phi), c(phi) for rational
p-isogenies, enumerates quadratic-twist families that preserve them, and
emits certified lower bounds on rank + dim_Fp Sha[p] per twist, with an
independent sampling oracle for the local ratios.
"""

from .census import CensusReport, TwistFamily, census, predicted_density, sigma_membership
from .errors import (
    CompositionMismatch,
    DualNotFoundError,
    InconclusiveSampling,
    InvariantViolation,
    IsoratioError,
    NonPPowerTamagawaRatio,
    NotAKernelError,
    ParseError,
    PrecisionExhausted,
    SingularModelError,
)
from .exact import kronecker, lvaluation, squarefree_range
from .isogeny import Isogeny, division_poly, dual, gamma_p_exponent, rational_p_isogenies, velu
from .localdata import LocalData, RealData, real_data, tate
from .oracle import OracleEstimate, cokernel_order_sampled, kernel_order_local, oracle_estimate
from .padic import PadicApprox, count_roots_in_Ql, ql_roots
from .polys import PolyQ
from .selmer import (
    INF_PLACE,
    ApplicabilityReport,
    BoundRecord,
    RatioExponent,
    applicability,
    composition_check,
    global_ratio,
    infinity_ratio,
    local_ratio,
    sha_bound,
    twist_isogeny,
    twist_ratio,
)
from .weierstrass import CurvePoint, ModelMap, WeierstrassModel, isomorphism

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
