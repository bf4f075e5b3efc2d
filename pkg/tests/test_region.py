import math

import numpy as np
import pytest
from scipy import integrate

from swarmlab.quadrature import QuadratureError, simpson, simpson_batch
from swarmlab.region import (
    DomainError,
    ValidityQuery,
    check_validity,
    deterministic_condition,
    estimate_ratio_mc,
    eval_I,
    eval_I_many,
    trace_boundary,
)
from swarmlab.rng import RngStream

SMALL = dict(v_points=101, r_points=201)


def quad_oracle(chi, c2, N, a, V, R):
    def f(s):
        vel = chi * V + c2 * s
        return math.sqrt((a * V + N + R) / ((a - 1) * vel + N * max(1.0, vel) + R))

    kink = (1 - chi * V) / c2 if c2 > 0 else -1
    pts = [kink] if 0 < kink < 1 else None
    return integrate.quad(f, 0, 1, points=pts, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


# --- quadrature -------------------------------------------------------------

def test_simpson_polynomials_and_smooth():
    assert simpson(lambda s: 3 * s * s, 0, 1) == pytest.approx(1.0, abs=1e-14)
    assert simpson(math.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-10)
    assert simpson(math.sqrt, 0, 1) == pytest.approx(2 / 3, abs=1e-9)


def test_simpson_batch_independent_integrals():
    k = np.arange(1, 6)
    out = simpson_batch(lambda o, s: s ** k[o], np.zeros(5), np.ones(5))
    assert np.allclose(out, 1 / (k + 1), atol=1e-10, rtol=0)


def test_simpson_gives_up_on_singularity():
    with pytest.raises(QuadratureError):
        simpson(lambda s: 1 / s if s > 0 else 1e300, 0, 1, max_depth=10)


# --- eval_I -------------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 3, 10])
@pytest.mark.parametrize("a", [0.5, 1.0, 5.0])
def test_constant_integrand_gives_one(N, a):
    for R in (-(N - 1) + 1e-3, 7.5, 1e4) + ((0.0,) if N > 1 else ()):
        assert abs(eval_I(0.729, 0.0, N, a, 0.0, R) - 1.0) <= 1e-12


def test_reference_point_against_monte_carlo():
    value = eval_I(0.729, 1.49, 3, 1.0, 1.0, 0.0)
    mean, se = estimate_ratio_mc(0.729, 1.49, 3, 1.0, (1.0, 0.0), 10**6, RngStream(2024))
    assert abs(value - mean) <= 3 * se
    assert value == pytest.approx(0.968911, abs=1e-6)


def test_large_R_tends_to_one():
    for V in (0.0, 1.0, 10.0):
        assert abs(eval_I(0.729, 1.49, 3, 2.0, V, 1e6) - 1.0) < 1e-3


@pytest.mark.parametrize("seed", range(8))
def test_matches_scipy_quad(seed):
    rng = np.random.default_rng(seed)
    chi, c2, a = rng.uniform(0.3, 1.0), rng.uniform(0.1, 3.0), rng.uniform(0.3, 6.0)
    N = int(rng.integers(1, 12))
    V = rng.uniform(0, 3)
    R = -(N - 1) + rng.uniform(1e-3, 50)
    assert eval_I(chi, c2, N, a, V, R) == pytest.approx(quad_oracle(chi, c2, N, a, V, R), abs=1e-9)


def test_kink_inside_and_outside_the_interval():
    # kink at s = 0.5, then kink beyond 1, then kink before 0
    for V in (0.5 / 0.729 * (1 - 0.745), 0.0, 2.0):
        assert eval_I(0.729, 1.49, 3, 2.0, V, 0.3) == pytest.approx(quad_oracle(0.729, 1.49, 3, 2.0, V, 0.3), abs=1e-9)


def test_tolerance_halving_stable():
    a = eval_I(0.729, 1.49, 3, 2.0, 0.2, 0.1, tol=1e-10)
    b = eval_I(0.729, 1.49, 3, 2.0, 0.2, 0.1, tol=5e-11)
    assert abs(a - b) < 1e-10


def test_many_matches_single():
    V = np.array([[0.0, 0.5], [2.0, 7.0]])
    R = np.array([[0.0, 1.0], [-1.5, 30.0]])
    out = eval_I_many(0.7, 1.2, 3, 1.5, V, R)
    assert out.shape == (2, 2)
    for i in range(2):
        for j in range(2):
            assert out[i, j] == pytest.approx(eval_I(0.7, 1.2, 3, 1.5, V[i, j], R[i, j]), abs=1e-10)


def test_domain_errors():
    with pytest.raises(DomainError, match=r"-\(N-1\)"):
        eval_I(0.729, 1.49, 3, 1.0, 1.0, -2.0)
    with pytest.raises(DomainError):
        eval_I(0.729, 1.49, 3, 1.0, -1.0, 0.0)
    with pytest.raises(DomainError):
        eval_I(0.729, 1.49, 0, 1.0, 1.0, 0.0)


# --- deterministic condition ----------------------------------------------------

def test_deterministic_condition_examples():
    assert deterministic_condition(1, 3, 0.729)
    assert not deterministic_condition(1, 1, 0.9)
    for a in (0.1, 1.0, 7.0):
        assert not deterministic_condition(a, 1, 1.0)
        for N in (2, 5):
            assert deterministic_condition(a, N, 1.0)


# --- Monte-Carlo estimator --------------------------------------------------------

def test_mc_constant_case_is_exact():
    mean, se = estimate_ratio_mc(0.729, 0.0, 3, 1.0, (0.0, 2.0), 1000, RngStream(1))
    assert mean == pytest.approx(1.0, abs=1e-15)
    assert se == pytest.approx(0.0, abs=1e-15)


def test_mc_standard_error_shrinks_like_root_n():
    _, se1 = estimate_ratio_mc(0.729, 1.49, 3, 1.0, (1.0, 0.0), 100_000, RngStream(1))
    _, se2 = estimate_ratio_mc(0.729, 1.49, 3, 1.0, (1.0, 0.0), 200_000, RngStream(2))
    assert se2 / se1 == pytest.approx(1 / math.sqrt(2), rel=0.05)


def test_mc_with_sampler():
    def sampler(rng, n):
        return np.full(n, 0.5), np.full(n, 1.0)

    mean, se = estimate_ratio_mc(0.729, 1.49, 3, 2.0, sampler, 200_000, RngStream(3))
    assert abs(mean - eval_I(0.729, 1.49, 3, 2.0, 0.5, 1.0)) <= 3 * se


# --- validity -------------------------------------------------------------------

def test_grid_shape_and_lower_end():
    q = ValidityQuery(0.729, 1.49, 3, 1.0)
    assert q.v_grid().size == 502 and q.v_grid()[-1] == 1e6
    r = q.r_grid()
    assert r.size == 2002 and r[0] > -2 and r[-2] == pytest.approx(1e3) and r[-1] == 1e6
    with pytest.raises(ValueError):
        ValidityQuery(0.729, 1.49, 3, 1.0, r_floor=0.0)


def test_c2_zero_never_valid():
    for domain in ("leading", "all"):
        res = check_validity(ValidityQuery(0.729, 0.0, 3, 2.0, domain=domain, **SMALL))
        assert res.sup_I_all >= 1.0 - 1e-12
        assert not res.valid


def test_deterministic_failure_forces_invalid():
    res = check_validity(ValidityQuery(0.3, 2.5, 1, 2.0, **SMALL))
    assert not res.deterministic_ok
    assert not res.valid


def test_golden_scan_over_a():
    # default grid; frozen after checking the grid supremum
    valid = {a: check_validity(ValidityQuery(0.729, 1.49, 3, a)).valid for a in (0.5, 1.0, 2.0, 5.0)}
    assert valid == {0.5: False, 1.0: False, 2.0: True, 5.0: False}


def test_margin_monotone():
    q = ValidityQuery(0.729, 1.49, 3, 2.0, **SMALL)
    results = [check_validity(q, m).valid for m in (0.0, 0.01, 0.03, 0.05, 0.2)]
    assert results == sorted(results, reverse=True)
    assert results[0] and not results[-1]


def test_all_domain_is_stricter():
    q = dict(chi=0.729, c2=1.49, N=3, a=2.0, **SMALL)
    lead = check_validity(ValidityQuery(**q))
    full = check_validity(ValidityQuery(domain="all", **q))
    assert full.sup_I >= lead.sup_I
    assert lead.valid and not full.valid


# --- boundary ---------------------------------------------------------------------

def test_boundary_unbracketed_is_flagged():
    pts = trace_boundary(3, 2.0, [0.729], (0.05, 0.3), **SMALL)
    assert len(pts) == 1 and not pts[0].bracketed and math.isnan(pts[0].c2_boundary)
    pts = trace_boundary(3, 2.0, [0.729], (1.8, 3.0), **SMALL)
    assert not pts[0].bracketed


def test_boundary_non_increasing_in_chi():
    chis = [0.55, 0.65, 0.729, 0.8, 0.9]
    pts = trace_boundary(3, 2.0, chis, (0.05, 4.0), **SMALL)
    assert all(p.bracketed for p in pts)
    c2 = [p.c2_boundary for p in pts]
    assert all(x >= y for x, y in zip(c2, c2[1:]))
    assert c2[2] == pytest.approx(1.2066, abs=1e-3)


def test_boundary_reproducible_on_finer_grid():
    coarse = trace_boundary(3, 2.0, [0.6, 0.8], (0.05, 4.0), **SMALL)
    fine = trace_boundary(3, 2.0, [0.6, 0.7, 0.8], (0.05, 4.0), **SMALL)
    assert abs(coarse[0].c2_boundary - fine[0].c2_boundary) <= 1e-4
    assert abs(coarse[1].c2_boundary - fine[2].c2_boundary) <= 1e-4


def test_boundary_bad_range():
    with pytest.raises(ValueError):
        trace_boundary(3, 2.0, [0.7], (2.0, 1.0))
