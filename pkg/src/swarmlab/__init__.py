"""Particle swarm laboratory: classical and modified PSO with potential tracking."""

from swarmlab.objectives import Objective, build_rotation, make_objective, rotate_objective
from swarmlab.rng import RngStream, StreamBank
from swarmlab.swarm import (
    Mode,
    Parameters,
    StepEvent,
    SwarmState,
    init_swarm,
    iterate,
    run,
    step_particle,
)

__all__ = [
    "Mode",
    "Objective",
    "Parameters",
    "RngStream",
    "StepEvent",
    "StreamBank",
    "SwarmState",
    "build_rotation",
    "init_swarm",
    "iterate",
    "make_objective",
    "rotate_objective",
    "run",
    "step_particle",
]
