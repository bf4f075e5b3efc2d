"""Classical and modified PSO as a step-by-step state machine.

A ``SwarmState`` holds a batch of independent swarms along its leading axis
(one per repetition); a single swarm is a batch of one. Every operation is
elementwise across the batch, so each swarm evolves exactly as it would on
its own. Particles move one at a time in ascending order and the global
attractor is updated as soon as a particle finds a point at least as good.

Random draws per particle step, per swarm: ``r_1..r_D`` then ``s_1..s_D``.
A forced step (modified mode) instead consumes ``D`` draws for the new
velocity.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
import enum
from typing import TYPE_CHECKING

import numpy as np

from swarmlab.potential import potential_per_dim
from swarmlab.rng import RngStream, StreamBank

if TYPE_CHECKING:
    from swarmlab.config import ExperimentConfig

Objective = Callable[[np.ndarray], np.ndarray]


class Mode(str, enum.Enum):
    CLASSIC = "classic"
    MODIFIED = "modified"


@dataclass(frozen=True)
class Parameters:
    chi: float = 0.729
    c1: float = 1.49
    c2: float = 1.49
    N: int = 2
    D: int = 1
    mode: Mode = Mode.CLASSIC
    delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        for name in ("chi", "c1", "c2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if int(self.D) != self.D or self.D < 1:
            raise ValueError(f"D must be a positive integer, got {self.D}")
        if not self.delta >= 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")


@dataclass
class SwarmState:
    """Positions, velocities and attractors for ``B`` independent swarms.

    Shapes: ``X, V, L`` are ``(B, N, D)``; ``G`` is ``(B, D)``; ``fL`` is
    ``(B, N)``; ``fG`` is ``(B,)``.
    """

    X: np.ndarray
    V: np.ndarray
    L: np.ndarray
    G: np.ndarray
    fL: np.ndarray
    fG: np.ndarray
    iteration: int = 0

    @property
    def batch(self) -> int:
        return self.X.shape[0]

    def copy(self) -> SwarmState:
        return SwarmState(
            self.X.copy(), self.V.copy(), self.L.copy(), self.G.copy(),
            self.fL.copy(), self.fG.copy(), self.iteration,
        )

    def lane(self, b: int) -> SwarmState:
        """Copy of swarm ``b`` as a batch of one."""
        s = slice(b, b + 1)
        return SwarmState(
            self.X[s].copy(), self.V[s].copy(), self.L[s].copy(), self.G[s].copy(),
            self.fL[s].copy(), self.fG[s].copy(), self.iteration,
        )

    def equals(self, other: SwarmState) -> bool:
        """Bit-level equality of every field."""
        return self.iteration == other.iteration and all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("X", "V", "L", "G", "fL", "fG")
        )


@dataclass
class StepEvent:
    """Outcome of one particle step; flags are per swarm in the batch."""

    particle: int
    forced: np.ndarray
    local_updated: np.ndarray
    global_updated: np.ndarray
    improved: np.ndarray  # strict improvement of the global attractor


class ObjectiveError(RuntimeError):
    def __init__(self, particle: int, iteration: int, swarm: int, position: np.ndarray, value):
        self.particle = particle
        self.iteration = iteration
        self.swarm = swarm
        self.position = position
        super().__init__(
            f"objective returned {value} for particle {particle} in iteration {iteration} "
            f"(swarm {swarm}) at position {np.array2string(position, precision=17)}"
        )


def _boxes(box, D: int, what: str) -> np.ndarray:
    box = np.asarray(box, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (D, 1))
    if box.shape != (D, 2):
        raise ValueError(f"{what} must have {D} intervals, got shape {box.shape}")
    bad = np.nonzero(box[:, 0] > box[:, 1])[0]
    if bad.size:
        d = int(bad[0])
        raise ValueError(f"{what}[{d}]: lower bound {box[d, 0]} > upper bound {box[d, 1]}")
    return box


def init_swarm(
    params: Parameters,
    pos_box,
    vel_box,
    overrides: Sequence[tuple[int, Sequence[float]]],
    objective: Objective,
    rng: RngStream | StreamBank | Sequence[RngStream],
) -> SwarmState:
    """Draw initial positions and velocities uniformly from the boxes.

    Each swarm draws ``N*D`` position uniforms then ``N*D`` velocity uniforms
    (particle-major); overridden particles still consume their draws. The
    global attractor is the best initial point, ties going to the highest
    particle index.
    """
    N, D = params.N, params.D
    pos = _boxes(pos_box, D, "pos_box")
    vel = _boxes(vel_box, D, "vel_box")
    fixed = []
    for n, point in overrides:
        if not 0 <= n < N:
            raise ValueError(f"override particle index {n} out of range for N={N}")
        point = np.asarray(point, dtype=float)
        if point.shape != (D,):
            raise ValueError(f"override for particle {n} must have {D} coordinates")
        fixed.append((n, point))

    bank = StreamBank.coerce(rng)
    B = len(bank)
    u = bank.draw(N * D).reshape(B, N, D)
    X = pos[:, 0] + (pos[:, 1] - pos[:, 0]) * u
    u = bank.draw(N * D).reshape(B, N, D)
    V = vel[:, 0] + (vel[:, 1] - vel[:, 0]) * u
    for n, point in fixed:
        X[:, n] = point
    fL = np.asarray(objective(X), dtype=float)
    bad = ~np.isfinite(fL)
    if bad.any():
        b, n = map(int, np.argwhere(bad)[0])
        raise ObjectiveError(n, 0, b, X[b, n], fL[b, n])
    best = N - 1 - np.argmin(fL[:, ::-1], axis=1)
    rows = np.arange(B)
    return SwarmState(
        X=X, V=V, L=X.copy(), G=X[rows, best].copy(),
        fL=fL, fG=fL[rows, best].copy(), iteration=0,
    )


def classic_velocity_update(v, x, l, g, params: Parameters, r, s):
    """``chi*v + c1*r*(l - x) + c2*s*(g - x)``; works on scalars and arrays."""
    return params.chi * v + params.c1 * r * (l - x) + params.c2 * s * (g - x)


def forced_mask(v: np.ndarray, x: np.ndarray, g: np.ndarray, delta: float) -> np.ndarray:
    """Whether ``|v_d| + |g_d - x_d| < delta`` in every dimension (last axis)."""
    return np.all(np.abs(v) + np.abs(g - x) < delta, axis=-1)


def modified_velocity_update(v, x, l, g, params: Parameters, rng):
    """Velocity update of the modified PSO for one particle (or a batch of rows).

    Returns ``(new_v, forced)``. When the forced condition holds, the whole row
    is redrawn uniformly from ``[-delta, delta]``.
    """
    if params.mode is not Mode.MODIFIED:
        raise ValueError("modified_velocity_update requires mode=modified")
    bank = StreamBank.coerce(rng)
    v2 = np.atleast_2d(np.asarray(v, dtype=float))
    x2 = np.atleast_2d(np.asarray(x, dtype=float))
    l2 = np.atleast_2d(np.asarray(l, dtype=float))
    g2 = np.atleast_2d(np.asarray(g, dtype=float))
    new_v, forced = _velocity(v2, x2, l2, g2, params, bank)
    if np.ndim(v) == 1:
        return new_v[0], bool(forced[0])
    return new_v, forced


def _velocity(v, x, l, g, params: Parameters, bank: StreamBank):
    D = v.shape[-1]
    if params.mode is Mode.MODIFIED:
        forced = forced_mask(v, x, g, params.delta)
    else:
        forced = np.zeros(v.shape[0], dtype=bool)
    if forced.any():
        u = bank.draw(2 * D, np.where(forced, D, 2 * D))
    else:
        u = bank.draw(2 * D)
    r = u[:, :D]
    s = u[:, D:]
    new_v = classic_velocity_update(v, x, l, g, params, r, s)
    if forced.any():
        new_v = np.where(forced[:, None], (2.0 * r - 1.0) * params.delta, new_v)
    return new_v, forced


def step_particle(
    state: SwarmState,
    n: int,
    params: Parameters,
    objective: Objective,
    rng: RngStream | StreamBank,
) -> tuple[SwarmState, StepEvent]:
    """Move particle ``n`` of every swarm once; updates ``state`` in place."""
    if not 0 <= n < params.N:
        raise IndexError(f"particle index {n} out of range for N={params.N}")
    bank = StreamBank.coerce(rng)
    x = state.X[:, n]
    new_v, forced = _velocity(state.V[:, n], x, state.L[:, n], state.G, params, bank)
    new_x = x + new_v
    fx = np.asarray(objective(new_x), dtype=float)
    bad = ~np.isfinite(fx)
    if bad.any():
        b = int(np.argmax(bad))
        raise ObjectiveError(n, state.iteration + 1, b, new_x[b], fx[b])

    state.V[:, n] = new_v
    state.X[:, n] = new_x
    local = fx <= state.fL[:, n]
    glob = fx <= state.fG
    improved = fx < state.fG
    if local.any():
        state.L[local, n] = new_x[local]
        state.fL[local, n] = fx[local]
    if glob.any():
        state.G[glob] = new_x[glob]
        state.fG[glob] = fx[glob]
    return state, StepEvent(n, forced, local, glob, improved)


def iterate(
    state: SwarmState,
    params: Parameters,
    objective: Objective,
    rng: RngStream | StreamBank,
) -> tuple[SwarmState, list[StepEvent]]:
    """One sweep over particles ``0..N-1``."""
    bank = StreamBank.coerce(rng)
    events = []
    for n in range(params.N):
        state, ev = step_particle(state, n, params, objective, bank)
        events.append(ev)
    state.iteration += 1
    return state, events


@dataclass
class Trace:
    """What ``run`` records besides the final state.

    ``phi`` has shape ``(snapshots, B, D)`` and is sampled at ``iterations``.
    ``forced_points[b]`` lists ``(iteration, particle, position)`` for every
    forced step of swarm ``b`` when recording is on. ``last_improvement[b]``
    is the last iteration in which swarm ``b`` strictly improved its global
    attractor through a non-forced step (-1 if never).
    """

    iterations: np.ndarray
    phi: np.ndarray
    forced_points: list[list[tuple[int, int, np.ndarray]]] = field(default_factory=list)
    forced_counts: np.ndarray | None = None
    last_improvement: np.ndarray | None = None


def run(
    config: ExperimentConfig,
    objective: Objective,
    rng: RngStream | StreamBank | Sequence[RngStream],
) -> tuple[SwarmState, Trace]:
    """Initialize from ``config`` and execute ``config.iterations`` iterations.

    The potential is snapshotted at every iteration divisible by
    ``config.cadence``, including iteration 0.
    """
    params = config.params
    bank = StreamBank.coerce(rng)
    state = init_swarm(params, config.pos_box, config.vel_box, config.overrides, objective, bank)
    B = state.batch
    snaps = [potential_per_dim(state)]
    its = [0]
    forced_points: list[list] = [[] for _ in range(B)]
    forced_counts = np.zeros(B, dtype=np.int64)
    last_improvement = np.full(B, -1, dtype=np.int64)
    modified = params.mode is Mode.MODIFIED

    for t in range(1, config.iterations + 1):
        for n in range(params.N):
            state, ev = step_particle(state, n, params, objective, bank)
            if modified and ev.forced.any():
                forced_counts += ev.forced
                if config.record_forced:
                    for b in np.nonzero(ev.forced)[0]:
                        forced_points[b].append((t, n, state.X[b, n].copy()))
            hit = ev.improved & ~ev.forced
            if hit.any():
                last_improvement[hit] = t
        state.iteration = t
        if t % config.cadence == 0:
            snaps.append(potential_per_dim(state))
            its.append(t)

    trace = Trace(
        iterations=np.asarray(its),
        phi=np.stack(snaps),
        forced_points=forced_points,
        forced_counts=forced_counts,
        last_improvement=last_improvement,
    )
    return state, trace

