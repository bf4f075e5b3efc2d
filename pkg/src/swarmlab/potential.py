"""Per-dimension potential and related observables of a swarm."""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from swarmlab.swarm import SwarmState


@dataclass(frozen=True)
class PotentialSnapshot:
    iteration: int
    phi: np.ndarray  # (B, D)


@dataclass(frozen=True)
class ImbalanceStats:
    sorted_phi: np.ndarray
    max_over_median: float  # math.inf when the median is 0
    argmax_dim: int

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.max_over_median)


def potential_per_dim(state: SwarmState) -> np.ndarray:
    """Sum over particles of ``|V_d| + |G_d - X_d|``; shape ``(B, D)``."""
    return np.sum(np.abs(state.V) + np.abs(state.G[:, None, :] - state.X), axis=1)


def snapshot(state: SwarmState) -> PotentialSnapshot:
    return PotentialSnapshot(state.iteration, potential_per_dim(state))


def sorted_potentials(phi) -> np.ndarray:
    """Potentials in descending order along the last axis."""
    return -np.sort(-np.asarray(phi, dtype=float), axis=-1)


def imbalance_ratio(phi) -> ImbalanceStats:
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 1 or phi.size == 0:
        raise ValueError("imbalance_ratio expects a non-empty 1-D potential vector")
    ordered = sorted_potentials(phi)
    med = float(np.median(phi))
    ratio = math.inf if med == 0.0 else float(ordered[0] / med)
    return ImbalanceStats(ordered, ratio, int(np.argmax(phi)))


def forced_condition(state: SwarmState, n: int, delta: float) -> np.ndarray:
    """Modified-PSO trigger for particle ``n`` of each swarm, shape ``(B,)``."""
    from swarmlab.swarm import forced_mask

    return forced_mask(state.V[:, n], state.X[:, n], state.G, delta)


def running_energy(state: SwarmState, d0: int, a: float) -> np.ndarray:
    """Signed energy ``sum_n a*V[n, d0] + (G[d0] - X[n, d0])`` per swarm."""
    V = state.V[:, :, d0]
    gap = state.G[:, None, d0] - state.X[:, :, d0]
    return np.sum(a * V + gap, axis=1)
