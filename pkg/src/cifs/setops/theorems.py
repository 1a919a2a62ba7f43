"""Numerical checks of invariant-set statements for truncated families.

Interval and rectangle computations run in exact rationals whenever the
family coefficients are exact; float clouds enter through
``Fraction(float)``, which is exact as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..contraction import compose, fixed_point
from ..errors import FamilyError, IFSError, PreconditionError
from ..family import IndexedFamily
from .cloud import PointCloud
from .hausdorff import directed_distances
from .invariance import check_invariance, image_cloud


def _exact(x):
    return x if isinstance(x, Fraction) else Fraction(x)


# enlargements


@dataclass(frozen=True)
class Enlargement:
    """Open ``eps``-neighbourhood of a cloud."""

    cloud: PointCloud
    eps: float
    intervals: Optional[list] = None

    def contains(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        single = y.ndim == 0 or (y.ndim == 1 and self.cloud.dimension > 1)
        pts = y.reshape(-1, self.cloud.dimension)
        inside = directed_distances(pts, self.cloud) < self.eps
        return bool(inside[0]) if single else inside

    __call__ = contains

    def boundary_samples(self, directions: int = 64, seed: int = 0) -> PointCloud:
        """Points at distance exactly ``eps`` from the cloud.

        In one dimension these are the interval endpoints; otherwise each
        generating point contributes ``directions`` sphere points and only
        those not covered by another ball are kept.
        """
        d = self.cloud.dimension
        if d == 1:
            ends = [e for iv in self.intervals for e in iv]
            return PointCloud(np.array(ends).reshape(-1, 1))
        if d == 2:
            theta = np.linspace(0.0, 2 * np.pi, directions, endpoint=False)
            dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        else:
            g = np.random.default_rng(seed).standard_normal((directions, d))
            dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
        cand = (self.cloud.points[:, None, :] + self.eps * dirs[None, :, :]).reshape(-1, d)
        dist = directed_distances(cand, self.cloud)
        keep = dist >= self.eps * (1 - 1e-9)
        return PointCloud(cand[keep])


def _merge_open_intervals(centers: np.ndarray, eps: float) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for c in np.sort(centers):
        lo, hi = c - eps, c + eps
        if out and lo < out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(float(a), float(b)) for a, b in out]


def enlargement(cloud: PointCloud, eps: float) -> Enlargement:
    """``{y : dist(y, cloud) < eps}``; in one dimension also as merged open intervals."""
    if not eps > 0:
        raise IFSError("enlargement radius must be positive")
    intervals = _merge_open_intervals(cloud.points[:, 0], eps) if cloud.dimension == 1 else None
    return Enlargement(cloud, eps, intervals)


# monotone families on the line


@dataclass(frozen=True)
class NondecreasingReport:
    alpha: Fraction
    beta: Fraction
    checks: list  # (branch, i, passed)
    N: int

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.checks)

    @property
    def failures(self) -> list:
        return [(b, i) for b, i, ok in self.checks if not ok]

    def as_dict(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "N": self.N,
            "maps_checked": len(self.checks),
            "failures": self.failures,
            "passed": self.passed,
        }


def verify_nondecreasing_interval(family: IndexedFamily, N: Optional[int] = None) -> NondecreasingReport:
    """Check ``F_i([inf D, sup D]) ⊆ [inf D, sup D]`` for every map with ``i <= N``.

    Requires a one-dimensional family whose ratios are all non-negative;
    a negative ratio is refused with ``PreconditionError`` naming the map.
    """
    if family.dimension != 1:
        raise PreconditionError("the monotone interval check needs a one-dimensional family")
    N = family._check_N(N)
    maps = []
    for i in range(1, N + 1):
        for b in range(family.n_branches):
            F = family.materialize(b, i)
            if F.ratio < 0:
                raise PreconditionError(f"map (branch={b}, i={i}) has negative ratio {F.ratio}")
            maps.append((b, i, F))
    fixed = [_exact(fixed_point(F)[0]) for _, _, F in maps]
    alpha, beta = min(fixed), max(fixed)
    checks = []
    for b, i, F in maps:
        r, t = _exact(F.ratio), _exact(F.translation[0])
        # non-decreasing, so F([alpha, beta]) = [F(alpha), F(beta)]
        checks.append((b, i, r * alpha + t >= alpha and r * beta + t <= beta))
    return NondecreasingReport(alpha, beta, checks, N)


# enlargement invariance for similarities


@dataclass(frozen=True)
class EnlargementResult:
    eps: float
    outer_residual: float
    inner_residual: float
    exact: bool
    resolution: float
    outer_is_zero: bool
    inner_residual_half_N: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "outer_residual": self.outer_residual,
            "inner_residual": self.inner_residual,
            "outer_is_exactly_zero": self.outer_is_zero,
            "exact": self.exact,
            "resolution": self.resolution,
            "inner_residual_half_N": self.inner_residual_half_N,
        }


@dataclass(frozen=True)
class EnlargementReport:
    N: int
    base: dict
    declared_sup_ratio_is_one: bool
    results: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "base_residuals": self.base,
            "declared_sup_ratio_is_one": self.declared_sup_ratio_is_one,
            "results": [r.as_dict() for r in self.results],
        }


def _image_boxes(family: IndexedFamily, N: int, lo: list, hi: list):
    """Exact image rectangles ``F_i(prod [lo_j, hi_j])``."""
    boxes = []
    for F in family.maps(N):
        r = _exact(F.ratio)
        blo, bhi = [], []
        for j, t in enumerate(F.translation):
            t = _exact(t)
            a, b = r * lo[j] + t, r * hi[j] + t
            blo.append(min(a, b))
            bhi.append(max(a, b))
        boxes.append((blo, bhi))
    return boxes


def _outer_excess_sq(boxes, lo, hi) -> Fraction:
    worst = Fraction(0)
    for blo, bhi in boxes:
        sq = Fraction(0)
        for j in range(len(lo)):
            e = max(lo[j] - blo[j], bhi[j] - hi[j], Fraction(0))
            sq += e * e
        worst = max(worst, sq)
    return worst


def _inner_gap_1d(boxes, lo: Fraction, hi: Fraction) -> Fraction:
    """``sup_{x in [lo, hi]} dist(x, union of image intervals)``, exactly."""
    merged: list[list[Fraction]] = []
    for a, b in sorted((blo[0], bhi[0]) for blo, bhi in boxes):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])

    def dist(x):
        return min(max(a - x, x - b, Fraction(0)) for a, b in merged)

    # distance is a tent over each gap, so its maximum on [lo, hi] sits at an
    # end of [lo, hi] or at a gap midpoint clamped into [lo, hi]
    candidates = [lo, hi]
    for (_, b), (a, _) in zip(merged, merged[1:]):
        candidates.append(min(max((a + b) / 2, lo), hi))
    return max(dist(x) for x in candidates)


def _inner_sampled(boxes, lo, hi, per_axis: int):
    blo = np.array([[float(v) for v in b[0]] for b in boxes])
    bhi = np.array([[float(v) for v in b[1]] for b in boxes])
    grid = PointCloud.grid([float(v) for v in lo], [float(v) for v in hi], per_axis)
    worst = 0.0
    for chunk in np.array_split(grid.points, max(1, len(grid.points) // 2048 + 1)):
        below = np.maximum(blo[None, :, :] - chunk[:, None, :], 0.0)
        above = np.maximum(chunk[:, None, :] - bhi[None, :, :], 0.0)
        out = np.maximum(below, above)
        dist = np.sqrt((out * out).sum(axis=2)).min(axis=1)
        worst = max(worst, float(dist.max()))
    return worst, grid.resolution


def _rectangle_residuals(family, N, lo, hi, eps, per_axis):
    e = _exact(eps)
    R_lo = [v - e for v in lo]
    R_hi = [v + e for v in hi]
    boxes = _image_boxes(family, N, R_lo, R_hi)
    outer_sq = _outer_excess_sq(boxes, R_lo, R_hi)
    if family.dimension == 1:
        inner = float(_inner_gap_1d(boxes, R_lo[0], R_hi[0]))
        return math.sqrt(outer_sq), outer_sq == 0, inner, 0.0, True
    inner, res = _inner_sampled(boxes, R_lo, R_hi, per_axis)
    return math.sqrt(outer_sq), outer_sq == 0, inner, res, False


def verify_enlargement_invariance(
    family: IndexedFamily,
    N: Optional[int],
    cloud: PointCloud,
    eps_grid: Sequence[float],
    samples_per_axis: int = 201,
) -> EnlargementReport:
    """Invariance residuals of the closed rectangle enlargements of ``cloud``.

    For each ``eps > 0`` the enlargement is the box hull of the cloud grown
    by ``eps`` per side; the images of that box are exact rectangles.  The
    outer residual (how far images leave the box) is exact; the inner
    residual (how far the box is from the union of images) is exact in one
    dimension and sampled on a grid otherwise.  ``eps == 0`` falls back to
    :func:`check_invariance` on the cloud itself.  Each result also carries
    the inner residual at ``N // 2`` to expose the truncation trend.
    """
    N = family._check_N(N)
    if cloud.dimension != family.dimension:
        raise IFSError("cloud and family dimensions differ")
    base = check_invariance(cloud, family, N).as_dict()
    lo_f, hi_f = cloud.bounds
    lo = [_exact(float(v)) for v in lo_f]
    hi = [_exact(float(v)) for v in hi_f]
    declared_one = family.declared_sup_ratio is not None and family.declared_sup_ratio == 1
    results = []
    for eps in eps_grid:
        if eps == 0:
            res = check_invariance(cloud, family, N)
            results.append(EnlargementResult(0.0, res.outer, res.inner, False, cloud.resolution, res.outer == 0))
            continue
        if eps < 0:
            raise IFSError("enlargement radii must be non-negative")
        outer, outer_zero, inner, res, exact = _rectangle_residuals(family, N, lo, hi, eps, samples_per_axis)
        half = None
        if N >= 2:
            half = _rectangle_residuals(family, N // 2, lo, hi, eps, samples_per_axis)[2]
        results.append(EnlargementResult(float(eps), outer, inner, exact, res, outer_zero, half))
    return EnlargementReport(N, base, declared_one, results)


@dataclass(frozen=True)
class LemmaReport:
    eps: float
    max_excess: float
    tolerance: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_excess <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "max_excess": self.max_excess,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "passed": self.passed,
        }


def verify_enlargement_lemma(
    family: IndexedFamily,
    N: Optional[int],
    cloud: PointCloud,
    eps: float,
    n_samples: int = 2000,
    seed: int = 0,
) -> LemmaReport:
    """Sampled check that every ``F_i`` maps the open ``eps``-enlargement into itself.

    Points ``y = a + t * eps * u`` (``a`` in the cloud, ``0 <= t < 1``, ``u``
    a unit vector) are pushed through every map; ``max_excess`` is the
    largest ``dist(F_i(y), cloud) - eps``.  Because the cloud is invariant
    only up to its outer residual, the tolerance is that residual.
    """
    if not eps > 0:
        raise IFSError("eps must be positive")
    rng = np.random.default_rng(seed)
    d = cloud.dimension
    anchors = cloud.points[rng.integers(0, len(cloud), n_samples)]
    u = rng.standard_normal((n_samples, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    t = rng.random(n_samples)
    ys = anchors + (t * eps)[:, None] * u
    images = image_cloud(ys, family, N)
    excess = float(directed_distances(images, cloud).max()) - eps
    tol = check_invariance(cloud, family, N).outer
    return LemmaReport(float(eps), excess, tol, n_samples)


# composition fixed points that escape to infinity


@dataclass(frozen=True)
class UnboundedWitness:
    i_max: int
    y: list
    z: list
    closed_form_match: bool
    max_abs_y: Fraction
    max_abs_z: Fraction
    monotone_y: bool
    monotone_z: bool
    first_i_abs_y_over_100: Optional[int]

    def as_dict(self) -> dict:
        return {
            "i_max": self.i_max,
            "y_1": str(self.y[0]),
            "z_1": str(self.z[0]),
            "closed_form_match": self.closed_form_match,
            "max_abs_y": float(self.max_abs_y),
            "max_abs_z": float(self.max_abs_z),
            "monotone_growth_y": self.monotone_y,
            "monotone_growth_z": self.monotone_z,
            "first_i_with_abs_y_over_100": self.first_i_abs_y_over_100,
        }


def closed_form_y(i: int) -> Fraction:
    return Fraction(-2 * i * (i + 1), 2 * i + 1)


def closed_form_z(i: int) -> Fraction:
    return Fraction(-i * i + (i + 1) ** 2 * (2 * i + 1), i * (2 * i + 1))


def witness_unbounded_P(family: IndexedFamily, i_max: int) -> UnboundedWitness:
    """Fixed points of the cross compositions of a two-branch family.

    ``y_i`` is the fixed point of ``G_i o F_i`` and ``z_i`` that of
    ``F_i o G_i`` where ``F_i``/``G_i`` are the branch-0/branch-1 maps.  The
    values are compared exactly with the closed forms
    ``-2i(i+1)/(2i+1)`` and ``(-i^2 + (i+1)^2 (2i+1)) / (i (2i+1))``;
    unboundedness is certified only as monotone growth up to ``i_max``.
    """
    if family.n_branches != 2 or family.dimension != 1:
        raise PreconditionError("the unboundedness witness needs a one-dimensional two-branch family")
    if i_max < 1 or i_max > family.truncation:
        raise FamilyError(f"i_max must lie in 1..{family.truncation}")
    ys, zs = [], []
    match = True
    first_over = None
    for i in range(1, i_max + 1):
        F, G = family.materialize(0, i), family.materialize(1, i)
        y = fixed_point(compose(G, F))[0]
        z = fixed_point(compose(F, G))[0]
        ys.append(y)
        zs.append(z)
        match = match and y == closed_form_y(i) and z == closed_form_z(i)
        if first_over is None and abs(y) > 100:
            first_over = i
    ay = [abs(v) for v in ys]
    az = [abs(v) for v in zs]
    return UnboundedWitness(
        i_max,
        ys,
        zs,
        match,
        max(ay),
        max(az),
        all(b > a for a, b in zip(ay, ay[1:])),
        all(b > a for a, b in zip(az, az[1:])),
        first_over,
    )
