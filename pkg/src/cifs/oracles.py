"""Independent reference computations used to cross-check the fast paths.

Nothing here shares code with the production routines it checks: distances
are brute force, fixed points come from iterating the map, sampling walks
exact rational prefix sums, and expressions are evaluated by Python itself.
"""

from __future__ import annotations

import random
import re
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np


def brute_directed(a, b) -> float:
    """``max_{x in a} min_{y in b} |x - y|`` by full pairwise comparison."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    worst = 0.0
    for lo in range(0, len(a), 512):
        block = a[lo:lo + 512]
        sq = np.zeros((len(block), len(b)))
        for j in range(a.shape[1]):
            diff = block[:, j][:, None] - b[:, j][None, :]
            sq += diff * diff
        worst = max(worst, float(np.sqrt(sq.min(axis=1).max())))
    return worst


def brute_hausdorff(a, b) -> float:
    return max(brute_directed(a, b), brute_directed(b, a))


def banach_fixed_point(ratio: float, translation: Sequence[float], tol: float = 1e-14,
                       max_iters: int = 10**6) -> np.ndarray:
    """Iterate ``x <- r x + b`` from the origin until a step is below ``tol``."""
    b = np.asarray(translation, dtype=np.float64)
    x = np.zeros_like(b)
    for _ in range(max_iters):
        nxt = ratio * x + b
        step = float(np.abs(nxt - x).max())
        x = nxt
        if step < tol:
            break
    return x


class PrefixSampler:
    """Inverse CDF by walking exact rational prefix sums ``rho_1 + ... + rho_k``."""

    def __init__(self, weight: Callable[[int], Fraction], limit: int = 10**6):
        self.weight = weight
        self.limit = limit
        self._cum = [Fraction(0)]

    def __call__(self, u) -> int:
        u = Fraction(u)
        k = 0
        # smallest k with cum[k] >= u
        while True:
            k += 1
            if k >= len(self._cum):
                if k > self.limit:
                    raise RuntimeError("prefix walk exceeded its limit")
                self._cum.append(self._cum[-1] + Fraction(self.weight(k)))
            if self._cum[k] >= u:
                return k


_INT = re.compile(r"\d+")


def eval_expression(source: str, i: int) -> Fraction:
    """Evaluate a DSL string with Python's own parser.

    Integer literals become ``Fraction`` and ``^`` becomes ``**``, so the
    result is exact and independent of the package's parser.
    """
    text = _INT.sub(lambda m: f"Fraction({m.group(0)})", source).replace("^", "**")
    value = eval(text, {"__builtins__": {}}, {"Fraction": Fraction, "i": Fraction(i)})
    return Fraction(value)


def random_expression(rng: random.Random, depth: int = 3) -> str:
    """Random well-formed DSL source over ``i`` and small integers."""
    if depth <= 0 or rng.random() < 0.25:
        return "i" if rng.random() < 0.5 else str(rng.randint(1, 9))
    kind = rng.choice(["+", "-", "*", "/", "neg", "pow"])
    if kind == "neg":
        return f"-({random_expression(rng, depth - 1)})"
    if kind == "pow":
        return f"({random_expression(rng, depth - 1)})^{rng.randint(0, 3)}"
    if kind == "/":
        # keep denominators positive for i >= 1
        return f"({random_expression(rng, depth - 1)})/(i+{rng.randint(1, 5)})"
    return f"({random_expression(rng, depth - 1)}){kind}({random_expression(rng, depth - 1)})"
