"""Affine similarities ``F(x) = r x + b`` on R^d and their compositions.

Coefficients keep whatever numeric type they were built from: ``Fraction``
inputs stay exact through ``compose``/``fixed_point``, floats stay floats.
Geometry code asks for float copies via :meth:`MapDescriptor.as_float`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Callable, Sequence

import numpy as np

from .errors import ContractionError, DimensionError, IFSError

__all__ = [
    "MapDescriptor",
    "CompositionWord",
    "fixed_point",
    "compose",
    "power_compose",
]


def _coerce(value):
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, (Real, np.floating)):
        return float(value)
    raise TypeError(f"unsupported coefficient type {type(value).__name__}")


@dataclass(frozen=True)
class MapDescriptor:
    """One contraction ``x -> ratio * x + translation``.

    ``ratio`` is a signed scalar with ``|ratio| < 1``; ``translation`` has one
    entry per coordinate.
    """

    ratio: Fraction | float
    translation: tuple

    def __post_init__(self):
        ratio = _coerce(self.ratio)
        if isinstance(self.translation, (str, bytes)) or not isinstance(self.translation, Sequence):
            raise TypeError("translation must be a sequence of coordinates")
        translation = tuple(_coerce(t) for t in self.translation)
        if not translation:
            raise DimensionError("translation must have at least one coordinate")
        if not abs(ratio) < 1:
            raise ContractionError(f"|ratio| must be < 1, got {ratio}")
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def on_line(cls, ratio, shift) -> "MapDescriptor":
        return cls(ratio, (shift,))

    @property
    def dimension(self) -> int:
        return len(self.translation)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.ratio, Fraction) and all(isinstance(t, Fraction) for t in self.translation)

    def __call__(self, x):
        """Apply the map to one point (a scalar is accepted when ``d == 1``)."""
        if self.dimension == 1 and not isinstance(x, (Sequence, np.ndarray)):
            return self.ratio * x + self.translation[0]
        if len(x) != self.dimension:
            raise DimensionError(f"point has {len(x)} coordinates, map has {self.dimension}")
        return tuple(self.ratio * xj + bj for xj, bj in zip(x, self.translation))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Vectorised float image of an ``(n, d)`` array."""
        r, b = self.as_float()
        return r * points + b

    def as_float(self) -> tuple[float, np.ndarray]:
        return float(self.ratio), np.array([float(t) for t in self.translation], dtype=np.float64)


def fixed_point(F: MapDescriptor) -> tuple:
    """Closed-form fixed point ``b / (1 - r)``, one entry per coordinate."""
    denom = 1 - F.ratio
    return tuple(t / denom for t in F.translation)


def compose(outer: MapDescriptor, inner: MapDescriptor) -> MapDescriptor:
    """``outer o inner``: ratio ``r_o r_i``, translation ``r_o b_i + b_o``."""
    if outer.dimension != inner.dimension:
        raise DimensionError(f"cannot compose maps of dimension {outer.dimension} and {inner.dimension}")
    return MapDescriptor(
        outer.ratio * inner.ratio,
        tuple(outer.ratio * bi + bo for bi, bo in zip(inner.translation, outer.translation)),
    )


def power_compose(F: MapDescriptor, k: int) -> MapDescriptor:
    """k-fold self composition, ``k >= 1``."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise IFSError(f"power must be a positive integer, got {k!r}")
    # square-and-multiply; compose is associative so the grouping does not matter
    result = None
    base = F
    while k:
        if k & 1:
            result = base if result is None else compose(result, base)
        k >>= 1
        if k:
            base = compose(base, base)
    return result


@dataclass(frozen=True)
class CompositionWord:
    """Finite index sequence ``(i_1, ..., i_k)`` naming ``F_{i_1} o ... o F_{i_k}``."""

    indices: tuple[int, ...]

    def __post_init__(self):
        indices = tuple(self.indices)
        if not indices:
            raise IFSError("a composition word needs at least one index")
        for i in indices:
            if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or i < 1:
                raise IFSError(f"word indices must be positive integers, got {i!r}")
        object.__setattr__(self, "indices", tuple(int(i) for i in indices))

    def __len__(self):
        return len(self.indices)

    def map(self, lookup: Callable[[int], MapDescriptor]) -> MapDescriptor:
        """Compose the looked-up maps, leftmost index outermost."""
        result = lookup(self.indices[-1])
        for i in reversed(self.indices[:-1]):
            result = compose(lookup(i), result)
        return result

    def fixed_point(self, lookup: Callable[[int], MapDescriptor]) -> tuple:
        return fixed_point(self.map(lookup))
