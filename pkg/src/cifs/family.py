"""Countable families ``{F_i}`` defined by coefficient expressions.

A family is a union of *branches*; each branch maps an index ``i >= 1`` to a
similarity whose ratio and translation are DSL expressions in ``i``.  Maps
are addressed either as ``(branch, i)`` pairs or by a global index that
interleaves branches: global index ``k`` is ``(branch=(k-1) % B, i=(k-1)//B+1)``
for a family of ``B`` branches.  Global indices are what probability
sequences and composition words refer to.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dsl
from .contraction import MapDescriptor, fixed_point
from .errors import ContractionError, FamilyError

__all__ = [
    "Branch",
    "IndexedFamily",
    "SupRatio",
    "BUILTIN_NAMES",
    "builtin",
    "load_config",
    "family_from_dict",
    "materialize",
    "fixed_point_set",
    "sup_ratio",
]

TRUNCATION_GAP_WARNING = Fraction(1, 100)


@dataclass(frozen=True)
class Branch:
    ratio: str
    translation: tuple[str, ...]

    def __post_init__(self):
        translation = (self.translation,) if isinstance(self.translation, str) else tuple(self.translation)
        object.__setattr__(self, "translation", translation)
        # parse eagerly so syntax errors surface at load time
        object.__setattr__(self, "_ratio_expr", dsl.parse(self.ratio))
        object.__setattr__(self, "_translation_exprs", tuple(dsl.parse(t) for t in translation))

    def evaluate(self, i: int) -> tuple[Fraction, tuple[Fraction, ...]]:
        return (
            dsl.evaluate(self._ratio_expr, i),
            tuple(dsl.evaluate(e, i) for e in self._translation_exprs),
        )


@dataclass(frozen=True)
class HalvingShiftBranch(Branch):
    """Constant ratio with translation ``1/2^i``.

    The exponent depends on ``i``, which the expression language does not
    allow, so the translation is evaluated natively.  ``translation`` is kept
    only as a label.
    """

    translation: tuple[str, ...] = ("1/2^i",)

    def __post_init__(self):
        object.__setattr__(self, "translation", ("1/2^i",))
        object.__setattr__(self, "_ratio_expr", dsl.parse(self.ratio))

    def evaluate(self, i: int) -> tuple[Fraction, tuple[Fraction, ...]]:
        return dsl.evaluate(self._ratio_expr, i), (Fraction(1, 2**i),)


@dataclass(frozen=True, eq=False)
class IndexedFamily:
    """A (possibly countable) family of similarities materialised up to ``truncation``.

    ``finite`` marks families that genuinely have only ``truncation`` maps per
    branch (DYADIC, tabulated families); their truncation cannot be raised.
    """

    dimension: int
    branches: tuple[Branch, ...]
    truncation: int
    declared_sup_ratio: Optional[Fraction] = None
    name: str = "custom"
    finite: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if self.dimension < 1:
            raise FamilyError("dimension must be a positive integer")
        if not self.branches:
            raise FamilyError("a family needs at least one branch")
        for b, branch in enumerate(self.branches):
            if len(branch.translation) != self.dimension:
                raise FamilyError(
                    f"branch {b}: translation has {len(branch.translation)} entries, dimension is {self.dimension}"
                )
        if isinstance(self.truncation, bool) or not isinstance(self.truncation, int) or self.truncation < 1:
            raise FamilyError(f"truncation must be a positive integer, got {self.truncation!r}")
        if self.declared_sup_ratio is not None:
            declared = Fraction(self.declared_sup_ratio)
            if not 0 < declared <= 1:
                raise FamilyError(f"declared_sup_ratio must lie in (0, 1], got {declared}")
            object.__setattr__(self, "declared_sup_ratio", declared)
        self._validate()

    def _validate(self):
        emp = Fraction(0)
        for b in range(len(self.branches)):
            for i in range(1, self.truncation + 1):
                emp = max(emp, abs(self.materialize(b, i).ratio))
        if self.declared_sup_ratio is not None and emp > self.declared_sup_ratio + Fraction(1, 10**12):
            raise FamilyError(
                f"materialised ratio {emp} exceeds declared_sup_ratio {self.declared_sup_ratio}"
            )

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    def alphabet_size(self, N: Optional[int] = None) -> int:
        return self.n_branches * self._check_N(N)

    def _check_N(self, N):
        if N is None:
            return self.truncation
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
            raise FamilyError(f"N must be a positive integer, got {N!r}")
        if N > self.truncation:
            raise FamilyError(f"N={N} exceeds the family truncation {self.truncation}")
        return int(N)

    def with_truncation(self, N: int) -> "IndexedFamily":
        """Copy with a different truncation; finite families are capped at their size."""
        if self.finite:
            N = min(N, self.truncation)
        if N == self.truncation:
            return self
        return replace(self, truncation=N, _cache={}, _lock=threading.Lock())

    def materialize(self, branch: int, i: int) -> MapDescriptor:
        key = (branch, i)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if not 0 <= branch < self.n_branches:
            raise FamilyError(f"no branch {branch}; family has {self.n_branches}")
        if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 1 <= i <= self.truncation:
            raise FamilyError(f"index i={i} outside 1..{self.truncation}")
        ratio, translation = self.branches[branch].evaluate(int(i))
        try:
            F = MapDescriptor(ratio, translation)
        except ContractionError:
            raise ContractionError(f"map (branch={branch}, i={i}) has |ratio| = {abs(ratio)} >= 1") from None
        with self._lock:
            self._cache[key] = F
        return F

    def split_index(self, k: int) -> tuple[int, int]:
        """Global index -> ``(branch, i)``."""
        if k < 1:
            raise FamilyError(f"global index must be >= 1, got {k}")
        return (k - 1) % self.n_branches, (k - 1) // self.n_branches + 1

    def global_index(self, branch: int, i: int) -> int:
        return (i - 1) * self.n_branches + branch + 1

    def map(self, k: int) -> MapDescriptor:
        """Map at global index ``k``."""
        return self.materialize(*self.split_index(k))

    def maps(self, N: Optional[int] = None) -> list[MapDescriptor]:
        """All maps with ``i <= N`` in global-index order."""
        N = self._check_N(N)
        return [self.materialize(b, i) for i in range(1, N + 1) for b in range(self.n_branches)]

    def float_arrays(self, N: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
        """``(ratios (M,), translations (M, d))`` as float64, global-index order."""
        N = self._check_N(N)
        key = ("float", N)
        cached = self._cache.get(key)
        if cached is None:
            maps = self.maps(N)
            ratios = np.array([float(F.ratio) for F in maps], dtype=np.float64)
            shifts = np.array([[float(t) for t in F.translation] for F in maps], dtype=np.float64)
            cached = (ratios, shifts.reshape(len(maps), self.dimension))
            with self._lock:
                self._cache[key] = cached
        return cached

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "truncation": self.truncation,
            "declared_sup_ratio": None if self.declared_sup_ratio is None else str(self.declared_sup_ratio),
            "branches": [{"ratio": b.ratio, "translation": list(b.translation)} for b in self.branches],
            "finite": self.finite,
            "name": self.name,
        }


def materialize(family: IndexedFamily, index: tuple[int, int]) -> MapDescriptor:
    branch, i = index
    return family.materialize(branch, i)


def fixed_point_set(family: IndexedFamily, N: Optional[int] = None):
    """The fixed points of all maps with ``i <= N`` (the truncated ``D``)."""
    from .setops.cloud import PointCloud

    points = [[float(c) for c in fixed_point(F)] for F in family.maps(N)]
    return PointCloud(np.array(points, dtype=np.float64))


def exact_fixed_points(family: IndexedFamily, N: Optional[int] = None) -> list[tuple]:
    return [fixed_point(F) for F in family.maps(N)]


@dataclass(frozen=True)
class SupRatio:
    empirical: Fraction | float
    declared: Optional[Fraction]
    N: int

    @property
    def truncation_warning(self) -> bool:
        """Empirical supremum falls short of the declared one by more than 0.01."""
        return self.declared is not None and self.declared - self.empirical > TRUNCATION_GAP_WARNING


def sup_ratio(family: IndexedFamily, N: Optional[int] = None) -> SupRatio:
    N = family._check_N(N)
    empirical = max(abs(F.ratio) for F in family.maps(N))
    return SupRatio(empirical, family.declared_sup_ratio, N)


# builtin catalog

BUILTIN_NAMES = ("EX1", "EX2", "DYADIC", "GEO(q)")
_GEO = re.compile(r"^GEO\(\s*([0-9./]+)\s*\)$", re.IGNORECASE)


def builtin(name: str, truncation: int = 100) -> IndexedFamily:
    """Builtin family by name: ``EX1``, ``EX2``, ``DYADIC`` or ``GEO(q)``."""
    key = name.strip().upper()
    if key == "EX1":
        return IndexedFamily(1, (Branch("i/(i+1)", ("1/(i+1)^2",)),), truncation, Fraction(1), "EX1")
    if key == "EX2":
        return IndexedFamily(
            1,
            (Branch("-i/(i+1)", ("(2*i+1)/i",)), Branch("-i/(i+1)", ("1/(i+1)",))),
            truncation,
            Fraction(1),
            "EX2",
        )
    if key == "DYADIC":
        return IndexedFamily(1, (Branch("1/2", ("(i-1)/2",)),), 2, Fraction(1, 2), "DYADIC", finite=True)
    m = _GEO.match(name.strip())
    if m:
        try:
            q = Fraction(m.group(1))
        except (ValueError, ZeroDivisionError):
            raise FamilyError(f"bad GEO parameter {m.group(1)!r}") from None
        if not 0 <= q < 1:
            raise FamilyError(f"GEO(q) needs 0 <= q < 1, got {q}")
        return IndexedFamily(1, (HalvingShiftBranch(_fraction_source(q)),), truncation, q, f"GEO({q})")
    raise FamilyError(f"unknown builtin family {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def _fraction_source(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def family_from_dict(config: dict, name: str = "config") -> IndexedFamily:
    """Build a family from the JSON config schema.

    ``{"dimension": d, "truncation": N, "declared_sup_ratio": x|null,
    "branches": [{"ratio": "<expr>", "translation": ["<expr>", ...]}]}``;
    an optional ``"finite": true`` pins the truncation.
    """
    try:
        dimension = config["dimension"]
        truncation = config["truncation"]
        branches = config["branches"]
    except (KeyError, TypeError) as exc:
        raise FamilyError(f"config is missing required key {exc}") from None
    declared = config.get("declared_sup_ratio")
    if declared is not None:
        declared = Fraction(str(declared))
    if not isinstance(branches, Sequence) or not branches:
        raise FamilyError("branches must be a non-empty list")
    parsed = []
    for b, entry in enumerate(branches):
        if not isinstance(entry, dict) or "ratio" not in entry or "translation" not in entry:
            raise FamilyError(f"branch {b} needs 'ratio' and 'translation'")
        translation = entry["translation"]
        if isinstance(translation, str):
            translation = [translation]
        parsed.append(Branch(str(entry["ratio"]), tuple(str(t) for t in translation)))
    return IndexedFamily(
        int(dimension),
        tuple(parsed),
        int(truncation),
        declared,
        config.get("name", name),
        bool(config.get("finite", False)),
    )


def load_config(path) -> IndexedFamily:
    path = Path(path)
    try:
        config = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FamilyError(f"{path}: invalid JSON ({exc})") from None
    return family_from_dict(config, name=path.stem)
