"""Radial solutions of Dirichlet problems for Pucci extremal operators with
power nonlinearity: shooting, critical exponents, nodal solutions and
weighted energies."""
from .model import Branch, OperatorSpec, dimension_like, sobolev_exponent
from .integrator import Event, EventKind, RadialProfile, StopRule, integrate_exterior, integrate_from_center

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "Event",
    "EventKind",
    "OperatorSpec",
    "RadialProfile",
    "StopRule",
    "dimension_like",
    "integrate_exterior",
    "integrate_from_center",
    "sobolev_exponent",
]
