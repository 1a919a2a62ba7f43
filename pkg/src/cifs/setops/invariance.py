"""Invariant-set approximations for truncated families.

Everything here works on float point clouds; the truncation ``N`` selects
the maps with index ``i <= N`` in every branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..contraction import fixed_point
from ..errors import BudgetError, IFSError, PreconditionError
from ..family import IndexedFamily, sup_ratio
from .cloud import PointCloud, dedup
from .hausdorff import directed_hausdorff, hausdorff

DEFAULT_WORD_BUDGET = 10**6
DEFAULT_IMAGE_BUDGET = 2 * 10**7
RATIO_REFUSAL_MARGIN = 1e-9

# words are expanded a block of outer letters at a time at the last level
_LAST_LEVEL_BLOCK = 1 << 22


def word_count(alphabet: int, k: int) -> int:
    """Number of words of length ``1..k`` over ``alphabet`` letters."""
    return sum(alphabet**L for L in range(1, k + 1))


def _diameter_bound(ratios: np.ndarray, shifts: np.ndarray) -> float:
    """Upper bound on the diameter of the attractor of a finite family.

    With all ratios non-negative the bounding box of the fixed points is
    invariant, so its diagonal bounds the diameter.  Otherwise the ball
    around the first fixed point of radius ``delta (1 + r) / (1 - r)`` is
    invariant.
    """
    fixed = shifts / (1.0 - ratios)[:, None]
    if np.all(ratios >= 0):
        span = fixed.max(axis=0) - fixed.min(axis=0)
        return float(np.sqrt(np.sum(span * span)))
    r = float(np.max(np.abs(ratios)))
    delta = float(np.sqrt(((fixed - fixed[0]) ** 2).sum(axis=1)).max())
    return 2.0 * delta * (1.0 + r) / (1.0 - r)


@dataclass(frozen=True)
class PEnumeration:
    cloud: PointCloud
    words: int
    raw_points: int
    resolution: float
    diameter_bound: float


def enumerate_P(
    family: IndexedFamily,
    N: Optional[int] = None,
    k: int = 6,
    budget: int = DEFAULT_WORD_BUDGET,
    details: bool = False,
):
    """Fixed points of every composition word of length ``<= k``.

    Words run over the ``B * N`` maps of the truncated family in
    length-lexicographic order (leftmost letter outermost).  The returned
    cloud's ``resolution`` is ``r_max**k * diam_bound``: every point of the
    truncated attractor lies within that distance of some enumerated point.

    Raises
    ------
    BudgetError
        When the number of words exceeds ``budget``.
    """
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise IFSError(f"word length k must be a positive integer, got {k!r}")
    ratios, shifts = family.float_arrays(N)
    M, d = shifts.shape
    total = word_count(M, k)
    if total > budget:
        raise BudgetError(
            f"{total} words (alphabet {M}, k={k}) exceed the budget of {budget}; reduce N or k"
        )
    buf = np.empty((total, d), dtype=np.float64)
    R = ratios.copy()
    B = shifts.copy()
    # single letters: round the exact fixed points once
    buf[:M] = [[float(c) for c in fixed_point(F)] for F in family.maps(N)]
    filled = M
    for level in range(2, k + 1):
        if level < k:
            R, B = _prepend(ratios, shifts, R, B)
            buf[filled:filled + len(R)] = B / (1.0 - R)[:, None]
            filled += len(R)
        else:
            filled = _last_level_fixed_points(ratios, shifts, R, B, buf, filled)
    assert filled == total
    points = dedup(buf, in_place=True)
    del buf
    r_max = float(np.max(np.abs(ratios)))
    diam = _diameter_bound(ratios, shifts)
    resolution = r_max**k * diam
    cloud = PointCloud.from_sorted_unique(points, resolution)
    if details:
        return PEnumeration(cloud, total, total, resolution, diam)
    return cloud


def _prepend(ratios, shifts, R, B):
    """Maps ``F_i o G`` for every letter ``i`` (major) and current word map ``G``."""
    newR = (ratios[:, None] * R[None, :]).ravel()
    newB = (ratios[:, None, None] * B[None, :, :] + shifts[:, None, :]).reshape(-1, B.shape[1])
    return newR, newB


def _last_level_fixed_points(ratios, shifts, R, B, buf, filled):
    # fixed point of F_i o G is (r_i b_G + b_i) / (1 - r_i r_G); maps are not kept
    per_letter = len(R)
    step = max(1, _LAST_LEVEL_BLOCK // max(per_letter, 1))
    for lo in range(0, len(ratios), step):
        r = ratios[lo:lo + step]
        b = shifts[lo:lo + step]
        num = r[:, None, None] * B[None, :, :] + b[:, None, :]
        den = 1.0 - r[:, None] * R[None, :]
        block = (num / den[:, :, None]).reshape(-1, B.shape[1])
        buf[filled:filled + len(block)] = block
        filled += len(block)
    return filled


def image_cloud(points: np.ndarray, family: IndexedFamily, N: Optional[int] = None) -> np.ndarray:
    """Stacked images ``F_i(points)`` for all maps with ``i <= N`` (not deduplicated)."""
    ratios, shifts = family.float_arrays(N)
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=np.float64)
    return (ratios[:, None, None] * pts[None, :, :] + shifts[:, None, :]).reshape(-1, pts.shape[1])


def hutchinson_step(cloud: PointCloud, family: IndexedFamily, N: Optional[int] = None) -> PointCloud:
    """``U_{i<=N} F_i(cloud)``, deduplicated (finite sets are already closed)."""
    if len(cloud) == 0:
        raise IFSError("hutchinson_step needs a non-empty cloud")
    if cloud.dimension != family.dimension:
        raise IFSError("cloud and family dimensions differ")
    return PointCloud.from_sorted_unique(dedup(image_cloud(cloud, family, N)), cloud.resolution)


@dataclass(frozen=True)
class AttractorResult:
    cloud: PointCloud
    converged: bool
    last_delta: float
    iterations: int
    reason: str

    def summary(self) -> dict:
        lo, hi = self.cloud.bounds
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "last_delta": self.last_delta,
            "reason": self.reason,
            "points": len(self.cloud),
            "bounding_box": [lo.tolist(), hi.tolist()],
        }


def attractor_approx(
    family: IndexedFamily,
    N: Optional[int] = None,
    tol: float = 1e-3,
    max_iters: int = 100,
    max_points: int = 2_000_000,
) -> AttractorResult:
    """Iterate the Hutchinson operator from the fixed point of the first map.

    Stops when the Hausdorff distance between successive clouds drops below
    ``tol``.  Refuses (``PreconditionError``) when the truncated family's
    largest ratio is within 1e-9 of 1, since the Banach argument then gives
    no convergence guarantee.  Hitting ``max_iters`` or ``max_points``
    returns the partial cloud with ``converged=False``.
    """
    emp = float(sup_ratio(family, N).empirical)
    if emp >= 1 - RATIO_REFUSAL_MARGIN:
        raise PreconditionError(
            f"largest ratio over i <= {N or family.truncation} is {emp}; attractor iteration refused"
        )
    if tol <= 0:
        raise IFSError("tol must be positive")
    ratios, shifts = family.float_arrays(N)
    seed = shifts[0] / (1.0 - ratios[0])
    cloud = PointCloud(seed.reshape(1, -1))
    delta = math.inf
    for it in range(1, max_iters + 1):
        if len(cloud) * len(ratios) > max_points:
            return AttractorResult(cloud, False, delta, it - 1, "max_points")
        nxt = hutchinson_step(cloud, family, N)
        delta = hausdorff(cloud, nxt)
        cloud = nxt
        if delta < tol:
            return AttractorResult(cloud, True, delta, it, "tolerance")
    return AttractorResult(cloud, False, delta, max_iters, "max_iters")


@dataclass(frozen=True)
class InvarianceResiduals:
    """``outer``: how far images leave the cloud; ``inner``: how far the cloud is from its image."""

    outer: float
    inner: float
    resolution: float = 0.0

    def as_dict(self) -> dict:
        return {"outer_residual": self.outer, "inner_residual": self.inner, "resolution": self.resolution}


def check_invariance(
    cloud: PointCloud,
    family: IndexedFamily,
    N: Optional[int] = None,
    max_images: int = DEFAULT_IMAGE_BUDGET,
) -> InvarianceResiduals:
    """Directed Hausdorff distances between ``cloud`` and its image under the truncated family.

    Raises
    ------
    BudgetError
        When ``len(cloud) * maps`` exceeds ``max_images``.
    """
    if len(cloud) == 0:
        raise IFSError("check_invariance needs a non-empty cloud")
    count = len(cloud) * family.alphabet_size(N)
    if count > max_images:
        raise BudgetError(f"{count} image points exceed the budget of {max_images}")
    images = image_cloud(cloud, family, N)
    outer = directed_hausdorff(images, cloud)
    inner = directed_hausdorff(cloud, images)
    return InvarianceResiduals(outer, inner, cloud.resolution)
