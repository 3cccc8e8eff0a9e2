"""limitlab: natural extensions, solenoid models and inductive-limit diagnostics.

``limitlab.BACKEND`` names the active kernel implementation ("cython" or "python").
"""
from .kernels import BACKEND
from .poly import (ComplexPolynomial, Cycle, critical_points, find_attracting_cycles,
                   is_desk_hyperbolic, preimages)
from .fatou import (ComponentAtlas, GridSpec, boundary_parametrization, classify_point,
                    component_map, equipotential, interior_components)
from .natext import History, continue_along_path, fiber, shift, unshift
from .solenoid import ConePoint, SolenoidPoint, decode, encode_history_p0, encode_polar
from .conjugacy import conjugacy_map, psi_hat, verify_conjugacy
from .henon import (HenonParams, TorusPoint, accessible_boundary_sample, cantor_accessible,
                    classify_henon_orbit, f_gamma, f_solid_torus, henon, henon_fixed_points,
                    torus_diagnostics)
from .limits import (ComponentGraph, LimitGroupElement, LocalizedInteger, covering_trivial,
                     h1_model, winding_vector)
from .config import RunConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ComplexPolynomial", "Cycle", "critical_points", "find_attracting_cycles",
    "is_desk_hyperbolic", "preimages", "ComponentAtlas", "GridSpec", "boundary_parametrization",
    "classify_point", "component_map", "equipotential", "interior_components", "History",
    "continue_along_path", "fiber", "shift", "unshift", "ConePoint", "SolenoidPoint", "decode",
    "encode_history_p0", "encode_polar", "conjugacy_map", "psi_hat", "verify_conjugacy",
    "HenonParams", "TorusPoint", "accessible_boundary_sample", "cantor_accessible",
    "classify_henon_orbit", "f_gamma", "f_solid_torus", "henon", "henon_fixed_points",
    "torus_diagnostics", "ComponentGraph", "LimitGroupElement", "LocalizedInteger",
    "covering_trivial", "h1_model", "winding_vector", "RunConfig",
]
