"""Hausdorff distances between point clouds via uniform grid buckets.

The grid only prunes candidates: every reported distance is the minimum of
the same coordinate-wise squared sums a brute-force double loop computes,
so results agree with the O(|A||B|) search exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .. import _kernels
from ..errors import DimensionError, IFSError
from .cloud import PointCloud

# target mean occupancy of non-empty cells
_MAX_CELLS_PER_POINT = 8
_POINTS_PER_CELL = 2.0


@dataclass(frozen=True)
class Grid:
    """Bucketed copy of a point set, cells of side ``h`` keyed in C order."""

    points: np.ndarray
    ukeys: np.ndarray
    starts: np.ndarray
    clo: np.ndarray
    chi: np.ndarray
    strides: np.ndarray
    h: float

    @classmethod
    def build(cls, points: np.ndarray, h: float | None = None) -> "Grid":
        points = np.ascontiguousarray(points, dtype=np.float64)
        n, d = points.shape
        if n == 0:
            raise IFSError("cannot bucket an empty point set")
        if h is None:
            h = _cell_size(points)
        cells = np.floor(points / h).astype(np.int64)
        clo = cells.min(axis=0)
        chi = cells.max(axis=0)
        dims = chi - clo + 1
        strides = np.ones(d, dtype=np.int64)
        for j in range(d - 2, -1, -1):
            strides[j] = strides[j + 1] * dims[j + 1]
        if d == 1:
            keys = cells.reshape(-1)
            keys -= clo[0]
        else:
            keys = ((cells - clo) * strides).sum(axis=1)
        del cells
        if np.all(keys[1:] >= keys[:-1]):
            # lexicographically sorted clouds arrive with sorted keys
            spoints = points
        else:
            order = np.argsort(keys, kind="stable")
            keys = keys[order]
            spoints = np.ascontiguousarray(points[order])
            del order
        first = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
        ukeys = keys[first]
        del keys
        starts = np.append(first, n).astype(np.int64)
        return cls(spoints, ukeys, starts, clo, chi, strides, float(h))

    def min_sq(self, queries: np.ndarray, backend=None) -> np.ndarray:
        kern = backend.directed_min_sq if backend is not None else _kernels.directed_min_sq
        queries = np.ascontiguousarray(queries, dtype=np.float64)
        if queries.shape[1] != self.points.shape[1]:
            raise DimensionError("query and bucket dimensions differ")
        return kern(queries, self.points, self.ukeys, self.starts, self.clo, self.chi, self.strides, self.h)


def _cell_size(points: np.ndarray) -> float:
    n, d = points.shape
    ext = points.max(axis=0) - points.min(axis=0)
    active = ext[ext > 0]
    if active.size == 0:
        return 1.0
    # geometric-mean extent spread over about n / _POINTS_PER_CELL cells
    gmean = float(np.exp(np.mean(np.log(active))))
    h = gmean / max(n / _POINTS_PER_CELL, 1.0) ** (1.0 / active.size)
    # floor(x / h) must stay an exact integer
    h = max(h, float(np.abs(points).max()) / 2**52)
    # bound the box's cell count so searches through empty shells stay short
    cap = math.log(_MAX_CELLS_PER_POINT * n + 64)
    while np.sum(np.log(active / h + 1.0)) > cap:
        h *= 2.0
    return h


def _as_array(cloud) -> np.ndarray:
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[0] == 0:
        raise IFSError("Hausdorff distance needs non-empty point sets")
    return pts


def directed_distances(a, b, backend=None) -> np.ndarray:
    """``dist(x, b)`` for every point ``x`` of ``a``."""
    pa, pb = _as_array(a), _as_array(b)
    if pa.shape[1] != pb.shape[1]:
        raise DimensionError(f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}")
    return np.sqrt(Grid.build(pb).min_sq(pa, backend))


def directed_hausdorff(a, b, backend=None) -> float:
    """``sup_{x in a} dist(x, b)``."""
    pa, pb = _as_array(a), _as_array(b)
    if pa.shape[1] != pb.shape[1]:
        raise DimensionError(f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}")
    return float(np.sqrt(Grid.build(pb).min_sq(pa, backend).max()))


def hausdorff(a, b, backend=None) -> float:
    """Symmetric Hausdorff distance ``max(h(a, b), h(b, a))``."""
    return max(directed_hausdorff(a, b, backend), directed_hausdorff(b, a, backend))
