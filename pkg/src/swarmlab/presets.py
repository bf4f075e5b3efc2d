"""Named experiment presets, each a list of configs (one per variant)."""

from __future__ import annotations

import math

from swarmlab.config import ExperimentConfig
from swarmlab.rng import DEFAULT_SEED
from swarmlab.swarm import Mode, Parameters

CK = dict(chi=0.729, c1=1.49, c2=1.49)
SPHERE_BOXES = dict(pos_box=(-100.0, 100.0), vel_box=(-50.0, 50.0))
ROSENBROCK_BOXES = dict(pos_box=(-5.0, 10.0), vel_box=(-2.5, 5.0))
TABLE_GRID = ((4, 2, 10_000), (60, 10, 100_000), (150, 20, 100_000))
TABLE3_DELTA = {
    ("sphere", 4): 1e-12,
    ("sphere", 60): 1e-12,
    ("sphere", 150): 1e-12,
    ("rosenbrock", 4): 1e-7,
    ("rosenbrock", 60): 1e-7,
    ("rosenbrock", 150): 1e-3,
}

# sorted-dimension aggregation applies to these presets
SORTED = {"fig3"}


def _scaled(n: int, scale: float) -> int:
    return max(1, math.ceil(n * scale))


def _table_cadence(t_max: int) -> int:
    return 100 if t_max <= 10_000 else 1000


def _fig1(seed, scale):
    chi_b = 0.729
    sets = {
        "a": dict(chi=0.729, c1=1.49, c2=1.49, N=2),
        "b": dict(chi=chi_b, c1=2.8 * chi_b, c2=1.3 * chi_b, N=2),
        "c": dict(chi=chi_b, c1=2.8 * chi_b, c2=1.3 * chi_b, N=3),
        "d": dict(chi=0.6, c1=1.7, c2=1.7, N=2),
        "e": dict(chi=0.6, c1=1.7, c2=1.7, N=3),
    }
    return [
        ExperimentConfig(
            "neg-sum", Parameters(D=1, **p), _scaled(1000, scale), seed,
            repetitions=_scaled(1000, scale), name=f"fig1_{k}", **SPHERE_BOXES,
        )
        for k, p in sets.items()
    ]


def _fig3(seed, scale):
    return [
        ExperimentConfig(
            obj, Parameters(N=10, D=10, **CK), _scaled(500, scale), seed,
            repetitions=_scaled(1000, scale), name=f"fig3_{obj}", **SPHERE_BOXES,
        )
        for obj in ("neg-sum", "weighted-neg-sum")
    ]


def _table(objective, mode, seed, scale, prefix):
    boxes = SPHERE_BOXES if objective == "sphere" else ROSENBROCK_BOXES
    out = []
    for D, N, t_max in TABLE_GRID:
        delta = TABLE3_DELTA[(objective, D)] if mode is Mode.MODIFIED else 0.0
        out.append(
            ExperimentConfig(
                objective, Parameters(N=N, D=D, mode=mode, delta=delta, **CK),
                _scaled(t_max, scale), seed, repetitions=_scaled(1000, scale),
                cadence=_table_cadence(t_max), name=f"{prefix}_{objective}_D{D}", **boxes,
            )
        )
    return out


def _valley(seed, scale):
    return [
        ExperimentConfig(
            "valley", Parameters(N=N, D=3, **CK), _scaled(5000, scale), seed, b=1.1,
            repetitions=_scaled(1000, scale), cadence=10, overrides=((0, (1.0, 1.0, 1.0)),),
            name=f"valley_N{N}", **SPHERE_BOXES,
        )
        for N in (10, 50)
    ]


def _valley_rot(seed, scale):
    # pre-image of (1, 1, 1) under the rotation, i.e. the start of the rotated valley
    start = (math.sqrt(3.0), 0.0, 0.0)
    return [
        ExperimentConfig(
            "valley-rot", Parameters(N=10, D=3, **CK), _scaled(100, scale), seed, b=1.1,
            repetitions=_scaled(1000, scale), overrides=((0, start),),
            name="valley-rot_N10", **SPHERE_BOXES,
        )
    ]


def _forced_trace(seed, scale):
    return [
        ExperimentConfig(
            "sphere", Parameters(N=3, D=2, mode=Mode.MODIFIED, delta=1e-7, **CK),
            _scaled(10_000, scale), seed, repetitions=_scaled(20, scale), cadence=10,
            record_forced=True, name="forced-trace_sphere_D2", **SPHERE_BOXES,
        )
    ]


PRESETS = {
    "fig1": _fig1,
    "fig3": _fig3,
    "table-sphere": lambda seed, scale: _table("sphere", Mode.CLASSIC, seed, scale, "table-sphere"),
    "table-rosenbrock": lambda seed, scale: _table("rosenbrock", Mode.CLASSIC, seed, scale, "table-rosenbrock"),
    "table-modified": lambda seed, scale: (
        _table("sphere", Mode.MODIFIED, seed, scale, "table-modified")
        + _table("rosenbrock", Mode.MODIFIED, seed, scale, "table-modified")
    ),
    "valley": _valley,
    "valley-rot": _valley_rot,
    "forced-trace": _forced_trace,
}


def preset(name: str, scale: float = 1.0, seed: int = DEFAULT_SEED) -> list[ExperimentConfig]:
    """Configs for a named experiment; ``scale`` multiplies iterations and
    repetitions (rounded up) and changes nothing else."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    if not scale > 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    configs = PRESETS[name](int(seed), float(scale))
    return configs
