"""Point-cloud set machinery for invariant sets of countable families."""

from .cloud import PointCloud, dedup, read_csv, write_csv
from .hausdorff import Grid, directed_distances, directed_hausdorff, hausdorff
from .invariance import (
    AttractorResult,
    InvarianceResiduals,
    attractor_approx,
    check_invariance,
    enumerate_P,
    hutchinson_step,
    image_cloud,
)
from .theorems import (
    Enlargement,
    enlargement,
    verify_enlargement_invariance,
    verify_enlargement_lemma,
    verify_nondecreasing_interval,
    witness_unbounded_P,
)

__all__ = [
    "PointCloud", "dedup", "read_csv", "write_csv",
    "Grid", "directed_distances", "directed_hausdorff", "hausdorff",
    "AttractorResult", "InvarianceResiduals", "attractor_approx", "check_invariance",
    "enumerate_P", "hutchinson_step", "image_cloud",
    "Enlargement", "enlargement", "verify_enlargement_invariance", "verify_enlargement_lemma",
    "verify_nondecreasing_interval", "witness_unbounded_P",
]
