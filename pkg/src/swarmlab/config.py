"""Experiment configuration and its ``key = value`` text format.

One setting per line, ``#`` starts a comment, values are JSON literals
(bare words are read as strings)::

    objective = sphere
    D = 4
    N = 2
    iterations = 10000
    seed = 7
    pos_box = [-100, 100]          # one interval for all dimensions
    vel_box = [[-50, 50], [-5, 5]] # or one per dimension
    overrides = [[0, [1, 1]]]      # particle index, fixed start position

Required keys: objective, D, N, iterations, seed. Everything else has a
default (see ``DEFAULTS``).
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

from swarmlab.objectives import OBJECTIVE_KEYS
from swarmlab.swarm import Mode, Parameters

REQUIRED = ("objective", "D", "N", "iterations", "seed")
DEFAULTS = {
    "name": "run",
    "b": 1.1,
    "chi": 0.729,
    "c1": 1.49,
    "c2": 1.49,
    "mode": "classic",
    "delta": 0.0,
    "pos_box": [-100.0, 100.0],
    "vel_box": [-50.0, 50.0],
    "overrides": [],
    "repetitions": 1,
    "cadence": 1,
    "record_forced": False,
    "known_optimum": None,
    "output": "out/run",
}
KEYS = REQUIRED + tuple(DEFAULTS)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class ExperimentConfig:
    objective: str
    params: Parameters
    iterations: int
    seed: int
    b: float = 1.1
    pos_box: tuple[tuple[float, float], ...] = ((-100.0, 100.0),)
    vel_box: tuple[tuple[float, float], ...] = ((-50.0, 50.0),)
    overrides: tuple[tuple[int, tuple[float, ...]], ...] = ()
    repetitions: int = 1
    cadence: int = 1
    record_forced: bool = False
    known_optimum: tuple[float, ...] | None = None
    output: str = "out/run"
    name: str = "run"

    def __post_init__(self):
        D = self.params.D
        object.__setattr__(self, "pos_box", _intervals(self.pos_box, D, "pos_box"))
        object.__setattr__(self, "vel_box", _intervals(self.vel_box, D, "vel_box"))
        ovs = []
        for item in self.overrides:
            n, point = item
            point = tuple(float(p) for p in point)
            if int(n) != n or not 0 <= n < self.params.N:
                raise ConfigError(f"overrides: particle index {n} out of range for N={self.params.N}")
            if len(point) != D:
                raise ConfigError(f"overrides: position for particle {n} needs {D} coordinates")
            ovs.append((int(n), point))
        object.__setattr__(self, "overrides", tuple(ovs))
        if self.known_optimum is not None:
            opt = tuple(float(v) for v in self.known_optimum)
            if len(opt) != D:
                raise ConfigError(f"known_optimum needs {D} coordinates")
            object.__setattr__(self, "known_optimum", opt)
        if self.objective not in OBJECTIVE_KEYS:
            raise ConfigError(f"objective: unknown key {self.objective!r}")
        if self.iterations < 0:
            raise ConfigError(f"iterations must be >= 0, got {self.iterations}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.cadence < 1:
            raise ConfigError(f"cadence must be >= 1, got {self.cadence}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def to_dict(self) -> dict:
        p = self.params
        return {
            "name": self.name,
            "objective": self.objective,
            "b": self.b,
            "D": p.D,
            "N": p.N,
            "chi": p.chi,
            "c1": p.c1,
            "c2": p.c2,
            "mode": p.mode.value,
            "delta": p.delta,
            "pos_box": [list(iv) for iv in self.pos_box],
            "vel_box": [list(iv) for iv in self.vel_box],
            "overrides": [[n, list(pt)] for n, pt in self.overrides],
            "iterations": self.iterations,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "cadence": self.cadence,
            "record_forced": self.record_forced,
            "known_optimum": None if self.known_optimum is None else list(self.known_optimum),
            "output": self.output,
        }

    def optimum(self) -> np.ndarray | None:
        """Known minimizer: the configured one, else the objective's own."""
        if self.known_optimum is not None:
            return np.asarray(self.known_optimum)
        from swarmlab.objectives import make_objective

        return make_objective(self.objective, self.params.D, self.b).optimum


def _intervals(box, D: int, what: str) -> tuple[tuple[float, float], ...]:
    arr = np.asarray(box, dtype=float)
    if arr.shape == (2,) or arr.shape == (1, 2):
        arr = np.tile(arr.reshape(2), (D, 1))
    if arr.shape != (D, 2):
        raise ConfigError(f"{what} must be one interval or {D} intervals, got shape {arr.shape}")
    for d, (lo, hi) in enumerate(arr):
        if lo > hi:
            raise ConfigError(f"{what}[{d}]: lower bound {lo} > upper bound {hi}")
    return tuple((float(lo), float(hi)) for lo, hi in arr)


def _value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


_INT_KEYS = ("D", "N", "iterations", "repetitions", "seed", "cadence")
_FLOAT_KEYS = ("b", "chi", "c1", "c2", "delta")


def parse_config(text: str) -> ExperimentConfig:
    values: dict = {}
    lines: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", lineno)
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", lineno)
        values[key] = _value(raw)
        lines[key] = lineno

    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    merged = {**DEFAULTS, **values}

    def at(key):
        return lines.get(key)

    for key in _INT_KEYS:
        v = merged[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{key} must be an integer, got {v!r}", at(key))
    for key in _FLOAT_KEYS:
        v = merged[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{key} must be a number, got {v!r}", at(key))
    if not isinstance(merged["record_forced"], bool):
        raise ConfigError("record_forced must be true or false", at("record_forced"))
    if merged["mode"] not in (m.value for m in Mode):
        raise ConfigError(f"mode must be 'classic' or 'modified', got {merged['mode']!r}", at("mode"))

    try:
        params = Parameters(
            chi=float(merged["chi"]), c1=float(merged["c1"]), c2=float(merged["c2"]),
            N=merged["N"], D=merged["D"], mode=merged["mode"], delta=float(merged["delta"]),
        )
    except ValueError as exc:
        field_name = str(exc).split()[0]
        raise ConfigError(str(exc), at(field_name)) from None

    try:
        return ExperimentConfig(
            objective=str(merged["objective"]),
            params=params,
            iterations=merged["iterations"],
            seed=merged["seed"],
            b=float(merged["b"]),
            pos_box=merged["pos_box"],
            vel_box=merged["vel_box"],
            overrides=merged["overrides"],
            repetitions=merged["repetitions"],
            cadence=merged["cadence"],
            record_forced=merged["record_forced"],
            known_optimum=merged["known_optimum"],
            output=str(merged["output"]),
            name=str(merged["name"]),
        )
    except ConfigError as exc:
        key = str(exc).split(":")[0].split()[0].split("[")[0]
        raise ConfigError(str(exc), at(key)) from None


def serialize_config(config: ExperimentConfig) -> str:
    out = []
    for key, value in config.to_dict().items():
        out.append(f"{key} = {json.dumps(value)}")
    return "\n".join(out) + "\n"
