"""Spectral, isoperimetric, growth and percolation numerics on Cayley graphs."""

from .bounds import BoundReport, Endpoint
from .cayley import Ball, build_ball, growth_estimate
from .errors import CayleyLabError, InvariantError, ParseError, SizeLimitError, ValidationError
from .gensets import GenSet, MultiGenSet, power_multiset, power_set, standard_genset, symmetric_closure
from .groups import Cyclic, DirectProduct, FreeAbelian, FreeGroup, FreeProduct

__all__ = [
    "Ball", "BoundReport", "CayleyLabError", "Cyclic", "DirectProduct", "Endpoint", "FreeAbelian",
    "FreeGroup", "FreeProduct", "GenSet", "InvariantError", "MultiGenSet", "ParseError",
    "SizeLimitError", "ValidationError", "build_ball", "growth_estimate", "power_multiset",
    "power_set", "standard_genset", "symmetric_closure",
]
