"""Exact and Monte Carlo experiments with product sets in free groups,
lattices and a dyadic affine group."""

from .groups import FreeGroup, Lattice, AffineModel, format_word, parse_word
from .measures import FiniteMeasure, sphere_measure, convolve, tv_distance
from .boundary import BoundaryPoint, CylinderUnion, parse_cyl, parse_point
from .sets import density_profile, parse_set, product_set

__version__ = "0.1.0"

__all__ = [
    "AffineModel",
    "BoundaryPoint",
    "CylinderUnion",
    "FiniteMeasure",
    "FreeGroup",
    "Lattice",
    "convolve",
    "density_profile",
    "format_word",
    "parse_cyl",
    "parse_point",
    "parse_set",
    "parse_word",
    "product_set",
    "sphere_measure",
    "tv_distance",
]
