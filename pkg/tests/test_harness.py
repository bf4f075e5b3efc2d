from fractions import Fraction
import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swarmlab.config import ExperimentConfig
from swarmlab.harness import (
    RunRecord,
    aggregate,
    emit,
    read_csv,
    run_experiment,
    write_csv,
)
from swarmlab.objectives import make_objective
from swarmlab.presets import preset
from swarmlab.rng import RngStream
from swarmlab.swarm import Parameters, init_swarm

CK = dict(chi=0.729, c1=1.49, c2=1.49)


def record(rep, phi, dist=None, trace=None):
    phi = np.asarray(phi, float)
    trace = np.asarray(trace if trace is not None else [phi], float)
    return RunRecord(rep, float(rep), phi, None if dist is None else np.asarray(dist, float),
                     int(np.argmin(phi)), int(np.argmax(phi)),
                     trace_iterations=np.arange(len(trace)), phi_trace=trace)


def same_records(a, b):
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x.rep == y.rep and x.final_value == y.final_value
        assert np.array_equal(x.final_phi, y.final_phi)
        assert np.array_equal(x.phi_trace, y.phi_trace)
        assert (x.dist_opt is None) == (y.dist_opt is None)
        if x.dist_opt is not None:
            assert np.array_equal(x.dist_opt, y.dist_opt)
        assert x.forced_count == y.forced_count and x.last_improvement == y.last_improvement


# --- run_experiment -----------------------------------------------------------

def test_zero_iterations_single_record_is_initial_state():
    cfg = ExperimentConfig("sphere", Parameters(N=3, D=2, **CK), 0, 4)
    (rec,) = run_experiment(cfg)
    s = init_swarm(cfg.params, cfg.pos_box, cfg.vel_box, (), make_objective("sphere", 2), RngStream.for_repetition(4, 0))
    assert rec.final_value == s.fG[0]
    assert np.array_equal(rec.dist_opt, np.abs(s.G[0]))
    assert rec.argmin_phi == int(np.argmin(rec.final_phi))


def test_serial_parallel_and_batching_agree():
    cfg = ExperimentConfig("rosenbrock", Parameters(N=3, D=3, mode="modified", delta=1e-5, **CK), 200, 77,
                           repetitions=7, cadence=20, pos_box=(-5, 10), vel_box=(-2.5, 5))
    serial = run_experiment(cfg)
    same_records(serial, run_experiment(cfg, workers=3, batch_size=2))
    same_records(serial, run_experiment(cfg, batch_size=1))
    same_records(serial[2:5], run_experiment(cfg, reps=[4, 2, 3]))


def test_fig3_records_show_dominant_dimension():
    cfg = preset("fig3", scale=0.05)[0]
    recs = run_experiment(cfg)
    agg = aggregate(recs, sort_dimensions=True)
    assert agg.phi_mean[0] > 5 * agg.phi_mean[1]


# --- aggregate --------------------------------------------------------------------

def test_single_record_std_zero():
    agg = aggregate([record(0, [1.0, 3.0], dist=[0.5, 0.25])])
    assert agg.phi_mean.tolist() == [1.0, 3.0] and agg.phi_std.tolist() == [0.0, 0.0]
    assert agg.scalars["phi_max"] == (3.0, 0.0)
    assert agg.scalars["dist_at_max"] == (0.25, 0.0)


def test_sorted_rank_means():
    recs = [record(0, [2.0, 0.0]), record(1, [0.0, 2.0])]
    assert aggregate(recs, sort_dimensions=True).phi_mean.tolist() == [2.0, 0.0]
    assert aggregate(recs).phi_mean.tolist() == [1.0, 1.0]


def test_identical_records_std_exactly_zero():
    recs = [record(k, [0.1, 1e300, 7.3]) for k in range(5)]
    agg = aggregate(recs)
    assert agg.phi_std.tolist() == [0.0, 0.0, 0.0]
    assert agg.phi_mean.tolist() == [0.1, 1e300, 7.3]


def test_sorting_carries_distances_and_traces():
    recs = [record(0, [1.0, 5.0], dist=[10.0, 20.0], trace=[[0.0, 1.0], [1.0, 5.0]])]
    agg = aggregate(recs, sort_dimensions=True)
    assert agg.dist_mean.tolist() == [20.0, 10.0]
    assert agg.trace_mean.tolist() == [[1.0, 0.0], [5.0, 1.0]]


def test_huge_values_do_not_overflow():
    recs = [record(k, [1e300 * (k + 1), 1.0]) for k in range(4)]
    agg = aggregate(recs)
    assert math.isfinite(agg.phi_std[0])
    assert agg.phi_mean[0] == pytest.approx(2.5e300, rel=1e-12)
    assert agg.phi_std[0] == pytest.approx(statistics.stdev([1.0, 2.0, 3.0, 4.0]) * 1e300, rel=1e-12)


def test_aggregate_needs_records():
    with pytest.raises(ValueError):
        aggregate([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.floats(0, 1e12), min_size=3, max_size=3), min_size=2, max_size=12))
def test_aggregate_matches_naive_oracle(rows):
    recs = [record(k, r) for k, r in enumerate(rows)]
    agg = aggregate(recs)
    for d in range(3):
        # exact rational arithmetic so the oracle neither rounds nor underflows
        col = [Fraction(r[d]) for r in rows]
        mean = sum(col) / len(col)
        var = sum((v - mean) ** 2 for v in col) / (len(col) - 1)
        std = float(Fraction(math.isqrt(math.floor(var * 2**4400)), 2**2200))
        assert agg.phi_mean[d] == pytest.approx(float(mean), rel=1e-12, abs=1e-300)
        assert agg.phi_std[d] == pytest.approx(std, rel=1e-12, abs=1e-12 * float(max(col)) + 1e-300)


# --- CSV ---------------------------------------------------------------------------

def test_empty_rows_header_only(tmp_path):
    p = write_csv([], tmp_path / "e.csv", ["a", "b"])
    assert p.read_bytes() == b"a,b\n"
    with pytest.raises(ValueError):
        write_csv([], tmp_path / "f.csv")


def test_csv_round_trip_is_exact(tmp_path):
    rows = [{"x": 0.1, "y": 1e-300, "n": 3, "flag": True, "s": "a,b"}, {"x": -2.5e250, "y": math.nan, "n": 0, "flag": False, "s": ""}]
    p = write_csv(rows, tmp_path / "sub" / "r.csv")
    back = read_csv(p)
    assert float(back[0]["x"]) == 0.1 and float(back[0]["y"]) == 1e-300
    assert float(back[1]["x"]) == -2.5e250 and math.isnan(float(back[1]["y"]))
    assert back[0]["flag"] == "1" and back[0]["s"] == "a,b"
    assert b"\r" not in p.read_bytes()


def test_csv_unwritable_path_mentions_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        write_csv([{"a": 1}], blocker / "x.csv")


def test_emit_is_byte_identical_across_runs(tmp_path):
    cfg = preset("forced-trace", scale=0.02)[0]
    a = emit(cfg, run_experiment(cfg), tmp_path / "a" / cfg.name, False)
    b = emit(cfg, run_experiment(cfg, workers=2), tmp_path / "b" / cfg.name, False)
    assert [p.name for p in a] == [p.name for p in b]
    assert len(a) == 4
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()


# --- presets ---------------------------------------------------------------------

def test_fig1_preset_parameters():
    configs = preset("fig1")
    assert [c.name for c in configs] == [f"fig1_{k}" for k in "abcde"]
    for c in configs:
        assert c.objective == "neg-sum" and c.params.D == 1
        assert c.iterations == 1000 and c.repetitions == 1000
    a, b, c_, d, e = (c.params for c in configs)
    assert (a.chi, a.c1, a.c2, a.N) == (0.729, 1.49, 1.49, 2)
    assert (b.chi, b.c1, b.c2, b.N) == (0.729, 2.8 * 0.729, 1.3 * 0.729, 2)
    assert (c_.c1, c_.N) == (b.c1, 3)
    assert (d.chi, d.c1, d.c2, d.N) == (0.6, 1.7, 1.7, 2)
    assert (e.chi, e.N) == (0.6, 3)


def test_table_presets():
    full = preset("table-sphere")
    small = preset("table-sphere", scale=0.01)
    assert [(c.params.D, c.params.N, c.iterations) for c in full] == [(4, 2, 10_000), (60, 10, 100_000), (150, 20, 100_000)]
    for f, s in zip(full, small):
        assert s.repetitions == 10 and s.iterations == math.ceil(f.iterations * 0.01)
        assert s.params == f.params and s.pos_box == f.pos_box and s.seed == f.seed
    rb = preset("table-rosenbrock")[0]
    assert rb.pos_box[0] == (-5.0, 10.0) and rb.vel_box[0] == (-2.5, 5.0)
    deltas = [(c.objective, c.params.D, c.params.delta) for c in preset("table-modified")]
    assert deltas == [("sphere", 4, 1e-12), ("sphere", 60, 1e-12), ("sphere", 150, 1e-12),
                      ("rosenbrock", 4, 1e-7), ("rosenbrock", 60, 1e-7), ("rosenbrock", 150, 1e-3)]


def test_preset_errors():
    with pytest.raises(ValueError, match="unknown preset"):
        preset("unknown")
    with pytest.raises(ValueError):
        preset("fig1", scale=0)


def test_scale_does_not_change_physics():
    short = preset("valley", scale=0.01, seed=5)[0]
    long = preset("valley", scale=0.03, seed=5)[0]
    a = run_experiment(short)
    b = run_experiment(long, reps=range(short.repetitions))
    for x, y in zip(a, b):
        assert np.array_equal(y.phi_trace[: len(x.phi_trace)], x.phi_trace)
