"""Finite point clouds standing in for (closed) subsets of R^d."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, IFSError

DEDUP_TOL = 1e-12


def dedup(points: np.ndarray, tol: float = DEDUP_TOL, in_place: bool = False) -> np.ndarray:
    """Sort and merge points closer than ``tol``.

    In one dimension consecutive sorted values within ``tol`` are merged
    (chains collapse onto their smallest member).  In higher dimensions
    points are merged when they round to the same ``tol``-lattice node.
    The result is sorted, so it does not depend on input order.  With
    ``in_place`` a one-dimensional float64 input is sorted in its own buffer.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise DimensionError("points must be an (n, d) array")
    n, d = points.shape
    if n == 0:
        return points.copy()
    if d == 1:
        if in_place and points.flags.c_contiguous:
            x = points.reshape(-1)
            x.sort()
        else:
            x = np.sort(points[:, 0])
        keep = np.empty(n, dtype=bool)
        keep[0] = True
        np.greater(np.diff(x), tol, out=keep[1:])
        return x[keep].reshape(-1, 1)
    if tol > 0:
        lattice = np.round(points / tol)
        _, first = np.unique(lattice, axis=0, return_index=True)
        points = points[first]
    order = np.lexsort(points.T[::-1])
    return np.ascontiguousarray(points[order])


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A deduplicated, sorted ``(n, d)`` float64 array.

    ``resolution`` optionally records the spacing at which the cloud
    samples the set it approximates; it is carried into reports.
    """

    points: np.ndarray
    resolution: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DimensionError("points must be an (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise IFSError("point clouds must have finite coordinates")
        pts = dedup(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_sorted_unique(cls, points: np.ndarray, resolution: float = 0.0) -> "PointCloud":
        """Wrap an array that is already the output of :func:`dedup`."""
        obj = object.__new__(cls)
        pts = np.ascontiguousarray(points, dtype=np.float64)
        pts.setflags(write=False)
        object.__setattr__(obj, "points", pts)
        object.__setattr__(obj, "resolution", resolution)
        return obj

    @classmethod
    def grid(cls, lower, upper, n) -> "PointCloud":
        """Regular grid with ``n`` points per axis on the box ``[lower, upper]``."""
        lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
        upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
        axes = [np.linspace(a, b, n) for a, b in zip(lower, upper)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
        spacing = float(np.max((upper - lower) / (n - 1))) if n > 1 else 0.0
        return cls(mesh, resolution=spacing)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    def union(self, other: "PointCloud") -> "PointCloud":
        if other.dimension != self.dimension:
            raise DimensionError("cannot join clouds of different dimension")
        return PointCloud(np.vstack([self.points, other.points]), max(self.resolution, other.resolution))

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_csv(self.points, buf)
        return buf.getvalue()


def write_csv(points: np.ndarray, fh) -> None:
    """One point per row, comma separated, 17 significant digits."""
    np.savetxt(fh, np.asarray(points).reshape(len(points), -1), fmt="%.17g", delimiter=",")


def read_csv(fh) -> PointCloud:
    data = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=np.float64)
    return PointCloud(data)
