"""Critical vector measures for the cubic external field."""

__version__ = "0.1.0"

from .curve import (BranchPointSet, CurveParam, alpha_from_tau, branch_points,  # noqa: E402
                    coefficient_c, cubic_roots, eval_D, eval_R, eval_discriminant)
from .errors import (ContinuationError, DomainError, GeometryError,  # noqa: E402
                     QuadratureError, TopologyError)
from .sheets import CutSystem, Regime, Side  # noqa: E402
from .widths import CriticalTaus, WidthReport, critical_taus, width_grid  # noqa: E402
from .tracer import CriticalGraph, TraceConfig, critical_graph, trace  # noqa: E402
from .measures import (VectorMeasure, example_fixture, family_measure,  # noqa: E402
                       masses)
from .variational import (STRUCTURE, ExternalField, energy,  # noqa: E402
                          variation_Dhz, verify_equilibrium)

__all__ = [
    "BranchPointSet", "CurveParam", "alpha_from_tau", "branch_points", "coefficient_c",
    "cubic_roots", "eval_D", "eval_R", "eval_discriminant",
    "ContinuationError", "DomainError", "GeometryError", "QuadratureError",
    "TopologyError", "CutSystem", "Regime", "Side", "CriticalTaus", "WidthReport",
    "critical_taus", "width_grid", "CriticalGraph", "TraceConfig", "critical_graph",
    "trace", "VectorMeasure", "example_fixture", "family_measure", "masses",
    "STRUCTURE", "ExternalField", "energy", "variation_Dhz", "verify_equilibrium",
]
