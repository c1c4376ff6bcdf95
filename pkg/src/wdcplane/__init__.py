"""Distance functions, DC auras and weak regularity for planar sets."""

__version__ = "0.1.0"

from .dc1 import DCFun1, TotalPL, dc_combine, dc_from_pl, dc_restrict, extend_clamped, lipschitz_constant
from .geometry import CompactSetModel, PLGraph, SubdiffHull, distance_field, hausdorff_distance, metric_projection
from .clarke import fu_subdifferential, sampled_clarke
from .sectors import BasicOpenSector, DegenerateClosedSector, PRZLocalModel, build_local_set, validate_sector
from .aura import DegenerateAuraData, aura_distance, tilde_distance, weak_regularity_certificate
from .spacex import XFunction, membership_A_truncated, psi, sphere_net

__all__ = [
    "BasicOpenSector",
    "CompactSetModel",
    "DCFun1",
    "DegenerateAuraData",
    "DegenerateClosedSector",
    "PLGraph",
    "PRZLocalModel",
    "SubdiffHull",
    "TotalPL",
    "XFunction",
    "aura_distance",
    "build_local_set",
    "dc_combine",
    "dc_from_pl",
    "dc_restrict",
    "distance_field",
    "extend_clamped",
    "fu_subdifferential",
    "hausdorff_distance",
    "lipschitz_constant",
    "membership_A_truncated",
    "metric_projection",
    "psi",
    "sampled_clarke",
    "sphere_net",
    "tilde_distance",
    "validate_sector",
    "weak_regularity_certificate",
]
