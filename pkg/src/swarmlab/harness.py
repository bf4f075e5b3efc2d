"""Repetition management, aggregation and CSV output."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import json
import logging
from pathlib import Path

import numpy as np

from swarmlab.config import ExperimentConfig, serialize_config
from swarmlab.objectives import make_objective
from swarmlab.potential import potential_per_dim
from swarmlab.rng import RngStream
from swarmlab.swarm import run

log = logging.getLogger(__name__)

DEFAULT_BATCH = 128


@dataclass
class RunRecord:
    rep: int
    final_value: float
    final_phi: np.ndarray
    dist_opt: np.ndarray | None
    argmin_phi: int
    argmax_phi: int
    forced_points: list | None = None
    forced_count: int = 0
    last_improvement: int = -1
    trace_iterations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    phi_trace: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def phi_min(self) -> float:
        return float(self.final_phi[self.argmin_phi])

    @property
    def phi_max(self) -> float:
        return float(self.final_phi[self.argmax_phi])

    @property
    def dist_at_min(self) -> float:
        return float("nan") if self.dist_opt is None else float(self.dist_opt[self.argmin_phi])

    @property
    def dist_at_max(self) -> float:
        return float("nan") if self.dist_opt is None else float(self.dist_opt[self.argmax_phi])

    @property
    def last_forced(self) -> int:
        if not self.forced_points:
            return -1
        return int(self.forced_points[-1][0])


def _run_chunk(config: ExperimentConfig, reps: Sequence[int]) -> list[RunRecord]:
    objective = make_objective(config.objective, config.params.D, config.b)
    streams = [RngStream.for_repetition(config.seed, k) for k in reps]
    state, trace = run(config, objective, streams)
    opt = config.optimum()
    final_phi = potential_per_dim(state)
    records = []
    for b, k in enumerate(reps):
        phi = final_phi[b]
        dist = None if opt is None else np.abs(state.G[b] - opt)
        records.append(
            RunRecord(
                rep=int(k),
                final_value=float(state.fG[b]),
                final_phi=phi,
                dist_opt=dist,
                argmin_phi=int(np.argmin(phi)),
                argmax_phi=int(np.argmax(phi)),
                forced_points=trace.forced_points[b] if config.record_forced else None,
                forced_count=int(trace.forced_counts[b]),
                last_improvement=int(trace.last_improvement[b]),
                trace_iterations=trace.iterations,
                phi_trace=trace.phi[:, b].copy(),
            )
        )
    return records


def _chunks(reps: Sequence[int], size: int) -> list[list[int]]:
    reps = list(reps)
    return [reps[i : i + size] for i in range(0, len(reps), size)]


def run_experiment(
    config: ExperimentConfig,
    workers: int = 1,
    batch_size: int = DEFAULT_BATCH,
    reps: Iterable[int] | None = None,
) -> list[RunRecord]:
    """Run every repetition of ``config``; records come back sorted by ``rep``.

    Repetition ``k`` always draws from the stream ``(config.seed, k)``, so the
    result does not depend on ``workers`` or ``batch_size``.
    """
    reps = list(range(config.repetitions)) if reps is None else list(reps)
    if workers > 1 and len(reps) > 1:
        size = max(1, min(batch_size, -(-len(reps) // workers)))
        chunks = _chunks(reps, size)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(chunks), chunks))
    else:
        parts = [_run_chunk(config, chunk) for chunk in _chunks(reps, batch_size)]
    records = [r for part in parts for r in part]
    records.sort(key=lambda r: r.rep)
    return records


def _mean_std(values: np.ndarray, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    # potentials reach 1e250 and beyond; scale by a power of two so squares stay finite
    values = np.asarray(values, dtype=float)
    peak = np.max(np.abs(values), axis=axis, keepdims=True)
    _, exp = np.frexp(np.where(np.isfinite(peak) & (peak > 0), peak, 1.0))
    scale = np.ldexp(1.0, exp)
    scaled = values / scale
    mean = np.mean(scaled, axis=axis) * np.squeeze(scale, axis=axis)
    if values.shape[axis] < 2:
        return mean, np.zeros_like(mean)
    std = np.std(scaled, axis=axis, ddof=1) * np.squeeze(scale, axis=axis)
    return mean, std


@dataclass
class AggregateRow:
    """Mean and sample standard deviation of the quantities in a record set."""

    label: str
    count: int
    scalars: dict[str, tuple[float, float]]
    phi_mean: np.ndarray
    phi_std: np.ndarray
    dist_mean: np.ndarray | None
    dist_std: np.ndarray | None
    trace_iterations: np.ndarray
    trace_mean: np.ndarray
    trace_std: np.ndarray
    sorted: bool = False


SCALARS = ("final_value", "phi_min", "dist_at_min", "phi_max", "dist_at_max", "forced_count")


def aggregate(records: Sequence[RunRecord], sort_dimensions: bool = False, label: str = "") -> AggregateRow:
    """Average records; with ``sort_dimensions`` each record's dimensions are
    first reordered by descending final potential (ranks instead of axes)."""
    if not records:
        raise ValueError("aggregate needs at least one record")
    records = sorted(records, key=lambda r: r.rep)
    phi = np.stack([r.final_phi for r in records])
    has_dist = all(r.dist_opt is not None for r in records)
    dist = np.stack([r.dist_opt for r in records]) if has_dist else None
    traces = np.stack([r.phi_trace for r in records])  # (R, T, D)
    if sort_dimensions:
        order = np.argsort(-phi, axis=1, kind="stable")
        phi = np.take_along_axis(phi, order, axis=1)
        if dist is not None:
            dist = np.take_along_axis(dist, order, axis=1)
        traces = np.take_along_axis(traces, order[:, None, :], axis=2)

    scalars = {}
    for name in SCALARS:
        vals = np.array([getattr(r, name) for r in records], dtype=float)
        if np.all(np.isnan(vals)):
            continue
        m, s = _mean_std(vals)
        scalars[name] = (float(m), float(s))
    phi_mean, phi_std = _mean_std(phi)
    dist_mean, dist_std = _mean_std(dist) if dist is not None else (None, None)
    trace_mean, trace_std = _mean_std(traces)
    return AggregateRow(
        label=label,
        count=len(records),
        scalars=scalars,
        phi_mean=phi_mean,
        phi_std=phi_std,
        dist_mean=dist_mean,
        dist_std=dist_std,
        trace_iterations=records[0].trace_iterations,
        trace_mean=trace_mean,
        trace_std=trace_std,
        sorted=sort_dimensions,
    )


def _render(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(rows: Sequence[dict], path, fieldnames: Sequence[str] | None = None) -> Path:
    """Write dict rows as UTF-8 CSV with LF endings; floats use ``repr`` so
    they parse back to the identical double."""
    path = Path(path)
    if fieldnames is None:
        if not rows:
            raise ValueError("write_csv needs fieldnames when rows is empty")
        fieldnames = list(rows[0].keys())
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fieldnames)
            for row in rows:
                writer.writerow([_render(row[k]) for k in fieldnames])
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc
    return path


def read_csv(path) -> list[dict[str, str]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def trace_rows(agg: AggregateRow) -> list[dict]:
    key = "rank" if agg.sorted else "dim"
    rows = []
    total = agg.trace_mean.sum(axis=1)
    for t, it in enumerate(agg.trace_iterations):
        row = {"iteration": int(it), "phi_total_mean": float(total[t])}
        for d in range(agg.trace_mean.shape[1]):
            row[f"phi_{key}{d + 1}_mean"] = float(agg.trace_mean[t, d])
            row[f"phi_{key}{d + 1}_std"] = float(agg.trace_std[t, d])
        rows.append(row)
    return rows


def summary_rows(agg: AggregateRow) -> list[dict]:
    row: dict = {"label": agg.label, "runs": agg.count}
    for name, (m, s) in agg.scalars.items():
        row[f"{name}_mean"] = m
        row[f"{name}_std"] = s
    return [row]


def record_rows(records: Sequence[RunRecord]) -> list[dict]:
    rows = []
    for r in records:
        rows.append({
            "rep": r.rep,
            "final_value": r.final_value,
            "argmin_phi": r.argmin_phi,
            "phi_min": r.phi_min,
            "dist_at_min": r.dist_at_min,
            "argmax_phi": r.argmax_phi,
            "phi_max": r.phi_max,
            "dist_at_max": r.dist_at_max,
            "phi_total": float(np.sum(r.final_phi)),
            "forced_count": r.forced_count,
            "last_improvement": r.last_improvement,
        })
    return rows


def forced_rows(records: Sequence[RunRecord], D: int) -> list[dict]:
    rows = []
    for r in records:
        for it, n, pos in r.forced_points or ():
            row = {"rep": r.rep, "iteration": int(it), "particle": int(n)}
            for d in range(D):
                row[f"x{d + 1}"] = float(pos[d])
            rows.append(row)
    return rows


def emit(config: ExperimentConfig, records: Sequence[RunRecord], stem: Path, sort_dimensions: bool) -> list[Path]:
    """Write the CSV family for one experiment: ``<stem>.csv`` (aggregated
    potential trace), ``<stem>_summary.csv``, ``<stem>_runs.csv`` and, when
    forced steps are recorded, ``<stem>_forced.csv``."""
    agg = aggregate(records, sort_dimensions=sort_dimensions, label=config.name)
    stem = Path(stem)
    paths = [
        write_csv(trace_rows(agg), stem.with_name(stem.name + ".csv")),
        write_csv(summary_rows(agg), stem.with_name(stem.name + "_summary.csv")),
        write_csv(record_rows(records), stem.with_name(stem.name + "_runs.csv")),
    ]
    if config.record_forced:
        D = config.params.D
        fields = ["rep", "iteration", "particle"] + [f"x{d + 1}" for d in range(D)]
        paths.append(write_csv(forced_rows(records, D), stem.with_name(stem.name + "_forced.csv"), fields))
    return paths


def write_manifest(entries: Sequence[tuple[ExperimentConfig, Sequence[Path]]], path) -> Path:
    """JSON manifest: fully resolved config (and its text form) per experiment."""
    path = Path(path)
    doc = []
    for config, files in entries:
        doc.append({
            "config": config.to_dict(),
            "config_text": serialize_config(config),
            "files": [Path(f).name for f in files],
        })
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path
