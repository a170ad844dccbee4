"""Equiripple rational approximation on unions of segments, and the filters
built from it.

The package is organized bottom-up:

- ``elliptic``: arbitrary-precision AGM / Landen / theta layer.
- ``rational``: real rational functions with exact coefficient arithmetic.
- ``zolotarev``: the closed-form two-band equiripple fraction.
- ``bands``: projective band geometry, cross-ratios, sign classes.
- ``minimax``: the exchange solver and equiripple certificates.
- ``ansatz``: branching/genus verification for candidate extremal functions.
- ``synthesis``: magnitude masks, spectral factorization, IIR simulation.
- ``cli``: the ``multiband`` command.
"""

from .bands import (
    PASS,
    STOP,
    Band,
    BandSystem,
    RangeSystem,
    SettingSolution,
    SignClass,
    chart_rotation,
    convert_setting,
    cross_ratio,
    cross_ratio_points,
    indicator,
    kappa_from_theta,
    mu_from_theta,
    sign_class_of,
    theta_from_kappa,
    theta_from_mu,
)
from .elliptic import (
    DEFAULT_PRECISION,
    EllipticModulus,
    Precision,
    QuarterPeriods,
    agm,
    agm_chain,
    complete_elliptic,
    jacobi_sn_cn_dn,
    landen_descend,
    rectangle_map,
    theta3,
)
from .errors import (
    AmbiguityError,
    ClassEmptyError,
    DomainError,
    EquirippleRefusal,
    GridError,
    InfeasibleError,
    InstabilityError,
    NonConvergedError,
    NotAMagnitudeError,
    PoleSignal,
)
from .rational import Mobius, RationalFunction
from .zolotarev import (
    TwoBandDeviation,
    ZolotarevFraction,
    adapt_to_segments,
    build_zolotarev,
    deviation,
    eval_parametric,
    zolotarev_for_bands,
)

__all__ = [
    "PASS",
    "STOP",
    "Band",
    "BandSystem",
    "Mobius",
    "RangeSystem",
    "RationalFunction",
    "SettingSolution",
    "SignClass",
    "TwoBandDeviation",
    "ZolotarevFraction",
    "adapt_to_segments",
    "build_zolotarev",
    "chart_rotation",
    "convert_setting",
    "cross_ratio",
    "cross_ratio_points",
    "deviation",
    "eval_parametric",
    "indicator",
    "kappa_from_theta",
    "mu_from_theta",
    "sign_class_of",
    "theta_from_kappa",
    "theta_from_mu",
    "zolotarev_for_bands",
    "DEFAULT_PRECISION",
    "EllipticModulus",
    "Precision",
    "QuarterPeriods",
    "agm",
    "agm_chain",
    "complete_elliptic",
    "jacobi_sn_cn_dn",
    "landen_descend",
    "rectangle_map",
    "theta3",
    "AmbiguityError",
    "ClassEmptyError",
    "DomainError",
    "EquirippleRefusal",
    "GridError",
    "InfeasibleError",
    "InstabilityError",
    "NonConvergedError",
    "NotAMagnitudeError",
    "PoleSignal",
]

__version__ = "0.1.0"
