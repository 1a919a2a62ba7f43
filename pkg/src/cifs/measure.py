"""Probability sequences, chaos-game sampling and invariant-measure diagnostics."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .contraction import fixed_point
from .errors import IFSError, PreconditionError
from .family import IndexedFamily, sup_ratio
from .setops.cloud import PointCloud
from .setops.hausdorff import hausdorff

RATIO_REFUSAL_MARGIN = 1e-9
DEFAULT_BURN_IN = 1000

# geometric inverse-CDF guesses this close to an integer are re-checked exactly
_BOUNDARY_SLACK = 1e-6


def _num(x):
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class ProbabilitySequence:
    """Positive weights ``rho_1, rho_2, ...`` summing to one.

    ``kind`` is ``"finite"`` (explicit ``weights``) or ``"geometric"``
    (``rho_i = (1 - q) q**(i - 1)``).
    """

    kind: str
    weights: tuple = ()
    q: Optional[Fraction | float] = None

    def __post_init__(self):
        if self.kind == "finite":
            w = tuple(_num(x) for x in self.weights)
            if not w:
                raise IFSError("a finite probability sequence needs at least one weight")
            if any(not 0 < x <= 1 for x in w):
                raise IFSError("weights must lie in (0, 1]")
            if abs(float(sum(w)) - 1.0) > 1e-12:
                raise IFSError(f"weights sum to {float(sum(w))}, not 1")
            object.__setattr__(self, "weights", w)
            cum = np.cumsum(np.array([float(x) for x in w]))
            cum[-1] = 1.0
            object.__setattr__(self, "_cum", cum)
            exact = [Fraction(0)]
            for x in w:
                exact.append(exact[-1] + Fraction(x))
            exact[-1] = Fraction(1)
            object.__setattr__(self, "_exact_cum", exact)
        elif self.kind == "geometric":
            q = _num(self.q)
            if not 0 < q < 1:
                raise IFSError(f"geometric parameter must lie in (0, 1), got {q}")
            object.__setattr__(self, "q", q)
            object.__setattr__(self, "_log_q", math.log(float(q)))
        else:
            raise IFSError(f"unknown probability sequence kind {self.kind!r}")

    @classmethod
    def finite(cls, weights: Sequence) -> "ProbabilitySequence":
        return cls("finite", tuple(weights))

    @classmethod
    def geometric(cls, q) -> "ProbabilitySequence":
        return cls("geometric", q=q)

    @classmethod
    def uniform(cls, n: int) -> "ProbabilitySequence":
        return cls("finite", (Fraction(1, n),) * n)

    @classmethod
    def parse(cls, text: str) -> "ProbabilitySequence":
        """``geometric:q``, ``uniform:n`` or a comma-separated weight list."""
        text = text.strip()
        if text.startswith("geometric:"):
            return cls.geometric(Fraction(text.split(":", 1)[1]))
        if text.startswith("uniform:"):
            return cls.uniform(int(text.split(":", 1)[1]))
        return cls.finite([Fraction(t) for t in text.split(",")])

    def describe(self) -> str:
        """Inverse of :meth:`parse`."""
        if self.kind == "geometric":
            return f"geometric:{self.q}"
        return ",".join(str(w) for w in self.weights)

    @property
    def length(self) -> Optional[int]:
        return len(self.weights) if self.kind == "finite" else None

    def weight(self, i: int):
        if i < 1:
            raise IFSError("indices start at 1")
        if self.kind == "finite":
            return self.weights[i - 1] if i <= len(self.weights) else 0
        return (1 - self.q) * self.q ** (i - 1)

    def mass(self, M: int):
        """``sum_{i <= M} rho_i``."""
        if self.kind == "finite":
            return sum(self.weights[:M])
        return 1 - self.q**M

    def truncated_weights(self, M: int) -> np.ndarray:
        """Float weights of indices ``1..M`` renormalised to unit mass."""
        w = np.array([float(self.weight(i)) for i in range(1, M + 1)])
        return w / w.sum()

    def sample_index(self, u: float) -> int:
        """Smallest ``i`` with ``rho_1 + ... + rho_i >= u``."""
        return int(self.sample_indices(np.array([u], dtype=np.float64))[0])

    def sample_indices(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "finite":
            idx = np.searchsorted(self._cum, u, side="left").astype(np.int64)
            # float prefix sums can straddle u; settle close calls exactly
            lo = self._cum[np.maximum(idx - 1, 0)]
            hi = self._cum[np.minimum(idx, len(self._cum) - 1)]
            near = np.minimum(np.abs(u - lo), np.abs(u - hi)) <= _BOUNDARY_SLACK
            for j in np.flatnonzero(near):
                idx[j] = max(bisect.bisect_left(self._exact_cum, Fraction(float(u[j]))) - 1, 0)
            return np.minimum(idx, len(self._cum) - 1) + 1
        if u.size and not (u.min() >= 0.0 and u.max() < 1.0):
            # the geometric cdf never reaches 1
            raise IFSError("geometric sampling needs u in [0, 1)")
        t = np.log1p(-u) / self._log_q
        idx = np.maximum(np.ceil(t), 1).astype(np.int64)
        near = np.abs(t - np.rint(t)) <= _BOUNDARY_SLACK * np.maximum(1.0, t)
        for j in np.flatnonzero(near):
            idx[j] = self._exact_geometric(float(u[j]), int(idx[j]))
        return idx

    def _exact_geometric(self, u: float, guess: int) -> int:
        # cdf(i) >= u  <=>  q**i <= 1 - u, decided in exact arithmetic
        q = Fraction(self.q)
        rest = 1 - Fraction(u)
        i = max(guess, 1)
        while i > 1 and q ** (i - 1) <= rest:
            i -= 1
        while q**i > rest:
            i += 1
        return i


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Equal-weight samples; ``meta`` records how they were produced."""

    samples: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim == 1:
            s = s.reshape(-1, 1)
        if s.shape[0] == 0:
            raise IFSError("an empirical measure needs at least one sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def dimension(self) -> int:
        return self.samples.shape[1]

    def histogram(self, h: float, origin=None) -> tuple[np.ndarray, np.ndarray]:
        """Occupied cells of side ``h`` as ``(cell index rows, counts)``; counts sum to ``n``."""
        origin = _origin(origin, h, self.dimension)
        cells = np.floor((self.samples - origin) / h).astype(np.int64)
        keys, counts = np.unique(cells, axis=0, return_counts=True)
        return keys, counts

    def merge(self, *others: "EmpiricalMeasure") -> "EmpiricalMeasure":
        """Pool several chains; every sample keeps weight ``1 / total``."""
        parts = [self.samples] + [o.samples for o in others]
        return EmpiricalMeasure(np.vstack(parts), {"merged_chains": len(parts)})


def _origin(origin, h, d):
    if origin is None:
        return np.full(d, -h / 2.0)
    return np.broadcast_to(np.asarray(origin, dtype=np.float64), (d,))


def chaos_game(
    family: IndexedFamily,
    N: Optional[int],
    seq: ProbabilitySequence,
    n_samples: int,
    burn_in: int = DEFAULT_BURN_IN,
    rng_seed: int = 42,
    backend=None,
) -> EmpiricalMeasure:
    """Sample the orbit ``x_{t+1} = F_{I_t}(x_t)`` with ``I_t ~ rho``.

    The chain starts at the fixed point of the first map; the first
    ``burn_in`` states are dropped.  Indices beyond the ``B * N`` maps of
    the truncated family are redrawn, and the number of redraws is reported
    in ``meta["truncation_resamples"]``.  Given the seed the output is
    bit-for-bit reproducible on either kernel backend.
    """
    if n_samples < 1 or burn_in < 0:
        raise IFSError("need n_samples >= 1 and burn_in >= 0")
    emp = float(sup_ratio(family, N).empirical)
    if emp >= 1 - RATIO_REFUSAL_MARGIN:
        raise PreconditionError(f"largest truncated ratio is {emp}; the chaos game is refused")
    ratios, shifts = family.float_arrays(N)
    M = len(ratios)
    rng = np.random.default_rng(rng_seed)
    T = burn_in + n_samples
    idx = seq.sample_indices(rng.random(T))
    resamples = 0
    over = np.flatnonzero(idx > M)
    while over.size:
        resamples += over.size
        idx[over] = seq.sample_indices(rng.random(over.size))
        over = over[idx[over] > M]
    x0 = np.ascontiguousarray(shifts[0] / (1.0 - ratios[0]))
    kern = backend if backend is not None else _kernels
    samples = kern.chaos_orbit(ratios, np.ascontiguousarray(shifts), np.ascontiguousarray(idx - 1), x0, burn_in)
    meta = {
        "n": n_samples,
        "burn_in": burn_in,
        "seed": rng_seed,
        "N": N if N is not None else family.truncation,
        "alphabet": M,
        "truncation_resamples": int(resamples),
        "empirical_sup_ratio": emp,
    }
    return EmpiricalMeasure(samples, meta)


@dataclass(frozen=True)
class MarkovResidual:
    residual: float
    n: int
    method: str
    truncated_mass: float
    support_hausdorff: Optional[float] = None

    def as_dict(self) -> dict:
        out = {"residual": self.residual, "n": self.n, "method": self.method, "truncated_mass": self.truncated_mass}
        if self.support_hausdorff is not None:
            out["support_hausdorff"] = self.support_hausdorff
        return out


def wasserstein1_weighted(x: np.ndarray, wx: np.ndarray, y: np.ndarray, wy: np.ndarray) -> float:
    """Exact W1 between two weighted atomic measures on the line (``∫ |F - G|``)."""
    pos = np.concatenate([x, y])
    w = np.concatenate([wx, -wy])
    order = np.argsort(pos, kind="stable")
    pos = pos[order]
    cum = np.cumsum(w[order])
    return float(np.sum(np.abs(cum[:-1]) * np.diff(pos)))


def markov_residual(
    measure: EmpiricalMeasure,
    family: IndexedFamily,
    N: Optional[int],
    seq: ProbabilitySequence,
    h: Optional[float] = None,
) -> MarkovResidual:
    """Distance between ``mu`` and ``sum_i rho_i F_i# mu`` over the truncated family.

    One dimension: exact Wasserstein-1 between the two atomic measures.
    Higher dimensions: L1 distance of the masses binned on cells of side
    ``h`` plus the Hausdorff distance between the two binned supports.
    """
    ratios, shifts = family.float_arrays(N)
    M = len(ratios)
    w = seq.truncated_weights(M)
    s = measure.samples
    n = measure.n
    mass = float(seq.mass(M))
    images = ratios[:, None, None] * s[None, :, :] + shifts[:, None, :]
    if measure.dimension == 1:
        x = s[:, 0]
        wx = np.full(n, 1.0 / n)
        y = images[:, :, 0].ravel()
        wy = np.repeat(w / n, n)
        return MarkovResidual(wasserstein1_weighted(x, wx, y, wy), n, "wasserstein1", mass)
    if h is None:
        raise IFSError("a cell size h is required for the binned residual in dimension >= 2")
    d = measure.dimension
    origin = _origin(None, h, d)
    a_keys, a_counts = measure.histogram(h)
    img = images.reshape(-1, d)
    cells = np.floor((img - origin) / h).astype(np.int64)
    weights = np.repeat(w, n) / n
    b_keys, inverse = np.unique(cells, axis=0, return_inverse=True)
    b_mass = np.bincount(inverse.ravel(), weights=weights)
    all_keys, inv = np.unique(np.vstack([a_keys, b_keys]), axis=0, return_inverse=True)
    inv = inv.ravel()
    diff = np.zeros(len(all_keys))
    np.add.at(diff, inv[: len(a_keys)], a_counts / n)
    np.add.at(diff, inv[len(a_keys):], -b_mass)
    centers_a = origin + (a_keys + 0.5) * h
    centers_b = origin + (b_keys + 0.5) * h
    return MarkovResidual(
        float(np.abs(diff).sum()), n, "histogram_l1", mass, hausdorff(centers_a, centers_b)
    )


def support_estimate(measure: EmpiricalMeasure, h: float, min_count: int = 1, origin=None) -> PointCloud:
    """Centres of the cells of side ``h`` holding at least ``min_count`` samples.

    By default cells are centred on the lattice ``h * Z^d``.
    """
    if not h > 0:
        raise IFSError("cell size must be positive")
    org = _origin(origin, h, measure.dimension)
    keys, counts = measure.histogram(h, org)
    keys = keys[counts >= min_count]
    return PointCloud(org + (keys + 0.5) * h, resolution=h)


@dataclass(frozen=True)
class KravchenkoReport:
    partial_sum: Fraction | float
    weight_mass: Fraction | float
    diameter: Fraction | float
    diameter_bound: Fraction | float
    tail_mass: Fraction | float
    N: int
    exact: bool

    @property
    def tail_note(self) -> str:
        return (
            f"indices beyond the {self.N} materialised per branch carry mass {float(self.tail_mass):.3e}; "
            "their contribution is not bounded here"
        )

    def as_dict(self) -> dict:
        conv = str if self.exact else float
        return {
            "partial_sum": conv(self.partial_sum),
            "partial_sum_float": float(self.partial_sum),
            "weight_mass": conv(self.weight_mass),
            "diameter_D": conv(self.diameter),
            "diameter_bound": conv(self.diameter_bound),
            "diameter_bound_float": float(self.diameter_bound),
            "tail_mass": float(self.tail_mass),
            "tail_note": self.tail_note,
            "exact": self.exact,
        }


def kravchenko_sum(family: IndexedFamily, N: Optional[int], seq: ProbabilitySequence) -> KravchenkoReport:
    """``sum_{i <= M} rho_i d(x_1, x_i)`` with the bound ``(sum rho_i) diam(D)``.

    Exact when the family is exact and one-dimensional (the distance is an
    absolute value); otherwise evaluated in floats.
    """
    maps = family.maps(N)
    pts = [fixed_point(F) for F in maps]
    seq_exact = all(isinstance(w, Fraction) for w in seq.weights) if seq.kind == "finite" else isinstance(seq.q, Fraction)
    exact = seq_exact and family.dimension == 1 and all(F.is_exact for F in maps)
    if exact:
        xs = [p[0] for p in pts]
        dist = [abs(x - xs[0]) for x in xs]
        diam = max(xs) - min(xs)
        partial = sum((seq.weight(k) * dist[k - 1] for k in range(1, len(maps) + 1)), Fraction(0))
    else:
        arr = np.array([[float(c) for c in p] for p in pts])
        dist = np.sqrt(((arr - arr[0]) ** 2).sum(axis=1))
        diam = _diameter(arr)
        partial = float(sum(float(seq.weight(k)) * dist[k - 1] for k in range(1, len(maps) + 1)))
    mass = seq.mass(len(maps))
    if not exact:
        mass = float(mass)
    return KravchenkoReport(partial, mass, diam, mass * diam, 1 - mass, family._check_N(N), exact)


def _diameter(arr: np.ndarray) -> float:
    best = 0.0
    for p in arr:
        best = max(best, float(np.sqrt(((arr - p) ** 2).sum(axis=1)).max()))
    return best
