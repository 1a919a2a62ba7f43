"""Countable iterated function systems of affine similarities.

Fixed points of finite compositions, truncated invariant sets, chaos-game
approximations of invariant measures, and numerical checks of the
invariant-set and invariant-measure statements for such families.
"""

from ._kernels import BACKEND
from .contraction import CompositionWord, MapDescriptor, compose, fixed_point, power_compose
from .errors import (
    BudgetError,
    ContractionError,
    DimensionError,
    DSLEvaluationError,
    DSLSyntaxError,
    FamilyError,
    IFSError,
    PreconditionError,
)
from .family import IndexedFamily, builtin, family_from_dict, fixed_point_set, load_config, sup_ratio
from .measure import (
    EmpiricalMeasure,
    ProbabilitySequence,
    chaos_game,
    kravchenko_sum,
    markov_residual,
    support_estimate,
)
from .setops import (
    PointCloud,
    attractor_approx,
    check_invariance,
    enumerate_P,
    hausdorff,
    hutchinson_step,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BudgetError",
    "CompositionWord",
    "ContractionError",
    "DSLEvaluationError",
    "DSLSyntaxError",
    "DimensionError",
    "EmpiricalMeasure",
    "FamilyError",
    "IFSError",
    "IndexedFamily",
    "MapDescriptor",
    "PointCloud",
    "PreconditionError",
    "ProbabilitySequence",
    "attractor_approx",
    "builtin",
    "chaos_game",
    "check_invariance",
    "compose",
    "enumerate_P",
    "family_from_dict",
    "fixed_point",
    "fixed_point_set",
    "hausdorff",
    "hutchinson_step",
    "kravchenko_sum",
    "load_config",
    "markov_residual",
    "power_compose",
    "support_estimate",
    "sup_ratio",
]
