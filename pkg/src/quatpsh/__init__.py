"""Quaternionic linear algebra, plurisubharmonic functions and their Monge-Ampère measures."""

from .convex import Ball, Box, HalfBall, Polytope, body_from_json
from .dirac import check_transformation, d, dbar, hessian
from .dirichlet import NonConvergenceError, solve_n1
from .fields import ADField, GridField, PolyField, norm_sq_field
from .hypercomplex import del_, del_J, hkt_flat_check, t_map
from .hyperherm import (
    HMatrix,
    aleksandrov_gap,
    is_positive_definite,
    mixed_discriminant,
    moore_det,
    real_embedding,
    signature_of_B,
)
from .psh import blocki_residual, is_psh_hessian, ma_density
from .quaternion import Quaternion
from .valuations import ValuationSpec, valuation

__version__ = "0.1.0"

__all__ = [
    "ADField",
    "Ball",
    "Box",
    "GridField",
    "HMatrix",
    "HalfBall",
    "NonConvergenceError",
    "PolyField",
    "Polytope",
    "Quaternion",
    "ValuationSpec",
    "aleksandrov_gap",
    "blocki_residual",
    "body_from_json",
    "check_transformation",
    "d",
    "dbar",
    "del_",
    "del_J",
    "hessian",
    "hkt_flat_check",
    "is_positive_definite",
    "is_psh_hessian",
    "ma_density",
    "mixed_discriminant",
    "moore_det",
    "norm_sq_field",
    "real_embedding",
    "signature_of_B",
    "solve_n1",
    "t_map",
    "valuation",
]
