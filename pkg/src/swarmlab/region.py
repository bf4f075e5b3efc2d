"""Parameter-region analysis for the running-swarm energy bound.

In the normalized one-step setting (particle position 0, global attractor 1,
remaining particles summarized by ``R``) the expected energy ratio for a
leading particle with velocity ``V`` is

    I = int_0^1 sqrt((a V + N + R) / ((a-1)(chi V + c2 s) + N max(1, chi V + c2 s) + R)) ds

Parameters are accepted when the deterministic step shrinks the ratio
(``a < (a + N - 1) chi``), ``I <= 1`` for every particle, and ``I`` stays below
``1 - margin`` for the particle with the largest energy contribution, which
constrains ``R <= (N - 1) a V``.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
import math

import numpy as np

from swarmlab.quadrature import simpson_batch
from swarmlab.rng import RngStream

TOL = 1e-10
_BLOCK = 40_000


class DomainError(ValueError):
    """Integrand denominator not positive: parameters outside the bound's domain."""


def _denominator(chi, c2, N, a, V, R, s):
    vel = chi * V + c2 * s
    return (a - 1.0) * vel + N * np.maximum(1.0, vel) + R


def _kink(chi, c2, V):
    """``s`` where ``chi V + c2 s = 1``, clipped to [0, 1]."""
    V = np.asarray(V, dtype=float)
    if c2 == 0:
        return np.where(chi * V < 1.0, 1.0, 0.0)
    return np.clip((1.0 - chi * V) / c2, 0.0, 1.0)


def _check_args(chi, c2, N, a, V, R):
    if not chi > 0 or not c2 >= 0 or not a > 0:
        raise DomainError(f"need chi > 0, c2 >= 0, a > 0 (got chi={chi}, c2={c2}, a={a})")
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N}")
    if np.any(np.asarray(V) < 0):
        raise DomainError("V must be >= 0")
    if np.any(np.asarray(R) <= -(N - 1)):
        raise DomainError(f"R must exceed -(N-1) = {-(N - 1)}")


def eval_I_many(chi: float, c2: float, N: int, a: float, V, R, tol: float = TOL) -> np.ndarray:
    """The ratio integral at many ``(V, R)`` points (broadcast together)."""
    V, R = np.broadcast_arrays(np.asarray(V, dtype=float), np.asarray(R, dtype=float))
    shape = V.shape
    V = V.ravel()
    R = R.ravel()
    _check_args(chi, c2, N, a, V, R)
    kink = _kink(chi, c2, V)
    # denominator is linear in s on each side of the kink
    for s in (np.zeros_like(V), kink, np.ones_like(V)):
        den = _denominator(chi, c2, N, a, V, R, s)
        bad = den <= 0
        if bad.any():
            k = int(np.argmax(bad))
            raise DomainError(
                f"integrand denominator {den[k]} <= 0 at s={s[k]} (V={V[k]}, R={R[k]})"
            )
    out = np.empty(V.size)
    for start in range(0, V.size, _BLOCK):
        sl = slice(start, start + _BLOCK)
        v, r, k = V[sl], R[sl], kink[sl]
        num = a * v + N + r
        owners = np.concatenate([np.arange(v.size), np.arange(v.size)])
        vv, rr, nn = v[owners], r[owners], num[owners]

        def f(idx, s):
            return np.sqrt(nn[idx] / _denominator(chi, c2, N, a, vv[idx], rr[idx], s))

        lo = np.concatenate([np.zeros(v.size), k])
        hi = np.concatenate([k, np.ones(v.size)])
        pieces = simpson_batch(f, lo, hi, tol / 2.0)
        out[sl] = pieces[: v.size] + pieces[v.size:]
    return out.reshape(shape)


def eval_I(chi: float, c2: float, N: int, a: float, V: float, R: float, tol: float = TOL) -> float:
    """Expected energy ratio for one step of a particle that trails the global attractor."""
    return float(eval_I_many(chi, c2, N, a, V, R, tol))


def deterministic_condition(a: float, N: int, chi: float) -> bool:
    """Whether the step of the particle sitting on the global attractor shrinks the ratio."""
    return bool(a < (a + (N - 1)) * chi)


Sampler = Callable[[np.random.Generator | RngStream, int], tuple[np.ndarray, np.ndarray]]


def estimate_ratio_mc(
    chi: float,
    c2: float,
    N: int,
    a: float,
    sampler: tuple[float, float] | Sampler,
    samples: int,
    rng: RngStream,
) -> tuple[float, float]:
    """Monte-Carlo estimate of the one-step energy ratio and its standard error.

    Simulates the step directly: particle at 0 with velocity ``V`` and local
    attractor at its position, global attractor at 1. ``sampler`` is either a
    fixed ``(V, R)`` pair or a callable ``(rng, n) -> (V, R)`` arrays.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples for a standard error")
    if callable(sampler):
        V, R = (np.asarray(z, dtype=float) for z in sampler(rng, samples))
    else:
        V = np.full(samples, float(sampler[0]))
        R = np.full(samples, float(sampler[1]))
    s = rng.uniform(samples)
    X, G = 0.0, 1.0
    V_new = chi * V + c2 * s * (G - X)
    X_new = X + V_new
    G_new = np.where(X_new >= G, X_new, G)
    before = a * V + N * G - X + R
    after = a * V_new + N * G_new - X_new + R
    ratio = np.sqrt(before / after)
    return float(np.mean(ratio)), float(np.std(ratio, ddof=1) / math.sqrt(samples))


@dataclass(frozen=True)
class ValidityQuery:
    chi: float
    c2: float
    N: int
    a: float
    v_max: float = 50.0
    v_points: int = 501
    r_max: float = 1e3
    r_points: int = 2001
    r_floor: float = 1e-6  # closest approach of R to -(N-1)
    v_probe: float = 1e6
    r_probe: float = 1e6
    domain: str = "leading"  # or "all": supremum over every (V, R)

    def __post_init__(self):
        if self.v_points < 1 or self.r_points < 1:
            raise ValueError("grids must be non-empty")
        if not self.r_floor > 0:
            raise ValueError("r_floor must be > 0 so R stays above -(N-1)")
        if self.domain not in ("leading", "all"):
            raise ValueError(f"domain must be 'leading' or 'all', got {self.domain!r}")

    def v_grid(self) -> np.ndarray:
        return np.append(np.linspace(0.0, self.v_max, self.v_points), self.v_probe)

    def r_grid(self) -> np.ndarray:
        low = -(self.N - 1)
        span = np.logspace(math.log10(self.r_floor), math.log10(self.r_max - low), self.r_points)
        return np.append(low + span, self.r_probe)


@dataclass(frozen=True)
class ValidityResult:
    deterministic_ok: bool
    sup_I: float
    sup_location: tuple[float, float]
    sup_I_all: float
    sup_all_location: tuple[float, float]
    valid: bool


def check_validity(q: ValidityQuery, margin: float = 0.01) -> ValidityResult:
    Vs = q.v_grid()
    Rs = q.r_grid()
    VV, RR = np.meshgrid(Vs, Rs, indexing="ij")
    grid = eval_I_many(q.chi, q.c2, q.N, q.a, VV, RR)
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    sup_all = float(grid[i, j])
    loc_all = (float(Vs[i]), float(Rs[j]))

    cap = (q.N - 1) * q.a * Vs
    edge_R = np.maximum(cap, -(q.N - 1) + q.r_floor)
    edge = eval_I_many(q.chi, q.c2, q.N, q.a, Vs, edge_R)
    lead = np.where(RR <= cap[:, None], grid, -np.inf)
    i, j = np.unravel_index(int(np.argmax(lead)), lead.shape)
    k = int(np.argmax(edge))
    if edge[k] > lead[i, j]:
        sup_lead, loc_lead = float(edge[k]), (float(Vs[k]), float(edge_R[k]))
    else:
        sup_lead, loc_lead = float(lead[i, j]), (float(Vs[i]), float(Rs[j]))

    det = deterministic_condition(q.a, q.N, q.chi)
    if q.domain == "all":
        valid = det and sup_all < 1.0 - margin
        return ValidityResult(det, sup_all, loc_all, sup_all, loc_all, valid)
    valid = det and sup_all <= 1.0 and sup_lead < 1.0 - margin
    return ValidityResult(det, sup_lead, loc_lead, sup_all, loc_all, valid)


@dataclass(frozen=True)
class BoundaryPoint:
    chi: float
    c2_boundary: float  # nan when unbracketed
    sup_I_at_boundary: float
    bracketed: bool


def trace_boundary(
    N: int,
    a: float,
    chi_grid: Sequence[float],
    c2_range: tuple[float, float],
    margin: float = 0.01,
    width: float = 1e-4,
    **grid,
) -> list[BoundaryPoint]:
    """Smallest valid ``c2`` per ``chi`` by bisection.

    A ``chi`` whose range is not bracketed (invalid at the low end, valid at
    the high end) is reported with ``bracketed=False``.
    """
    c2_lo, c2_hi = map(float, c2_range)
    if not 0 <= c2_lo < c2_hi:
        raise ValueError(f"bad c2_range {c2_range}")

    def check(chi, c2):
        return check_validity(ValidityQuery(chi, c2, N, a, **grid), margin)

    points = []
    for chi in chi_grid:
        chi = float(chi)
        low, high = check(chi, c2_lo), check(chi, c2_hi)
        if low.valid or not high.valid:
            points.append(BoundaryPoint(chi, math.nan, math.nan, False))
            continue
        lo, hi, best = c2_lo, c2_hi, high
        while hi - lo > width:
            mid = 0.5 * (lo + hi)
            res = check(chi, mid)
            if res.valid:
                hi, best = mid, res
            else:
                lo = mid
        points.append(BoundaryPoint(chi, hi, best.sup_I, True))
    return points
