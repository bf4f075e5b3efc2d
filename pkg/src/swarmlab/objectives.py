"""Objective functions used by the experiments.

All functions accept an array whose last axis is the search-space dimension
and reduce over that axis only, so ``f(X)`` with ``X`` of shape ``(B, D)``
equals row-wise evaluation bit for bit.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
import math

import numpy as np

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Objective:
    """A named objective on R^D with an optional known minimizer."""

    name: str
    dimension: int
    evaluate: Evaluator = field(repr=False)
    optimum: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(
                f"{self.name}: expected last axis of length {self.dimension}, got {x.shape}"
            )
        return self.evaluate(x)


def sphere(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1)


def rosenbrock(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise ValueError("rosenbrock needs D >= 2")
    head = x[..., :-1]
    tail = x[..., 1:]
    return np.sum(100.0 * (tail - head * head) ** 2 + (1.0 - head) ** 2, axis=-1)


def neg_sum(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return -np.sum(x, axis=-1)


def weighted_neg_sum(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    weights = np.arange(1, x.shape[-1] + 1, dtype=float)
    return -np.sum(weights * x, axis=-1)


def valley(x, b: float = 1.1) -> np.ndarray:
    """Sphere everywhere except a narrow valley around the positive diagonal.

    Outside the cone where every coordinate ratio stays below ``b`` the value
    is ``sum(x**2)``; inside it the value drops to ``-sum(x**2)`` on the
    diagonal. Continuous, not differentiable on the cone boundary.
    """
    if not b > 1:
        raise ValueError(f"valley needs b > 1, got {b}")
    x = np.asarray(x, dtype=float)
    D = x.shape[-1]
    if D < 2:
        raise ValueError("valley needs D >= 2")
    sq = np.sum(x * x, axis=-1)
    xi = x[..., :, None]
    xj = x[..., None, :]
    off = ~np.eye(D, dtype=bool)
    # x_i >= b*x_j over ordered pairs covers both disjuncts
    outside = np.any((xi >= b * xj) & off, axis=(-2, -1))
    has_zero = np.any(x == 0.0, axis=-1)
    use_sphere = outside | has_zero
    # masked lanes may divide by zero or overflow; np.where discards them
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratios = np.where(off & (xj != 0.0), xi / xj, -np.inf)
        max_ratio = np.max(ratios, axis=(-2, -1))
        inside = sq / (b - 1.0) * (2.0 * max_ratio - b - 1.0)
    return np.where(use_sphere, sq, inside)


def build_rotation(D: int) -> np.ndarray:
    """Rotation taking ``sqrt(D) * e1`` to the all-ones vector.

    Acts as a plane rotation in span{e1, ones} and as the identity on the
    orthogonal complement of that plane.
    """
    if D < 2:
        raise ValueError("rotation needs D >= 2")
    e1 = np.zeros(D)
    e1[0] = 1.0
    w = np.ones(D)
    w[0] = 0.0
    w /= math.sqrt(D - 1)
    cos = 1.0 / math.sqrt(D)
    sin = math.sqrt((D - 1) / D)
    R = np.eye(D)
    R += (cos - 1.0) * (np.outer(e1, e1) + np.outer(w, w))
    R += sin * (np.outer(w, e1) - np.outer(e1, w))
    return R


def rotate_objective(f: Objective, R: np.ndarray, name: str | None = None) -> Objective:
    """Return ``x -> f(R @ x)``."""
    R = np.asarray(R, dtype=float)
    if R.shape != (f.dimension, f.dimension):
        raise ValueError(f"rotation shape {R.shape} does not match dimension {f.dimension}")

    def evaluate(x: np.ndarray) -> np.ndarray:
        # explicit multiply-sum keeps row results independent of batch shape (no BLAS)
        return f.evaluate(np.sum(R * x[..., None, :], axis=-1))

    optimum = None if f.optimum is None else R.T @ f.optimum
    return Objective(name or f"{f.name}-rot", f.dimension, evaluate, optimum)


OBJECTIVE_KEYS = ("sphere", "rosenbrock", "neg-sum", "weighted-neg-sum", "valley", "valley-rot")


def make_objective(key: str, D: int, b: float = 1.1) -> Objective:
    """Build an objective from its config key."""
    if key == "sphere":
        return Objective(key, D, sphere, np.zeros(D))
    if key == "rosenbrock":
        if D < 2:
            raise ValueError("rosenbrock needs D >= 2")
        return Objective(key, D, rosenbrock, np.ones(D))
    if key == "neg-sum":
        return Objective(key, D, neg_sum)
    if key == "weighted-neg-sum":
        return Objective(key, D, weighted_neg_sum)
    if key in ("valley", "valley-rot"):
        if D < 2:
            raise ValueError("valley needs D >= 2")
        if not b > 1:
            raise ValueError(f"valley needs b > 1, got {b}")
        base = Objective("valley", D, _ValleyEval(b))
        if key == "valley":
            return base
        return rotate_objective(base, build_rotation(D), name=key)
    raise ValueError(f"unknown objective {key!r}; expected one of {', '.join(OBJECTIVE_KEYS)}")


class _ValleyEval:
    # picklable closure over b
    def __init__(self, b: float):
        self.b = float(b)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return valley(x, self.b)
