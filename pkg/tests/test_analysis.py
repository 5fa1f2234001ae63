import itertools
from fractions import Fraction

import numpy as np
import pytest

from conftest import C3E8, QUANT_S, node, triangle_tag
from toflab._jit import python_impl
from toflab import kernels
from toflab.analysis import (
    FormulaTerms,
    analytic_error,
    approximation_slack,
    corners,
    drift_error_samples,
    exact_error_oracle,
    terms_for,
    worst_case_bound,
)
from toflab.protocols import Method, Schedule, estimate, simulate, true_value
from toflab.timebase import IdealInstant, PpmDrift

P20 = PpmDrift.from_ppm(20)
M20 = PpmDrift.from_ppm(-20)
EPS = 20e-6


def drifts(method, first, second):
    return dict(zip(method.clock_symbols, (first, second)))


# representative terms: 1 s since sync, unequal delays, 80 ns baseline, 50 ns TDoA
TERMS = FormulaTerms(t1=1.0, d_a=1.2e-3, d_b=1e-3, d_ab=80e-9, tdoa=50e-9, pulse_gap=5e-3)


def test_analytic_examples():
    toa = analytic_error(Method.SIMPLE_TOA, FormulaTerms(t1=1.0), {"A": M20, "B": P20})
    assert toa == pytest.approx(4e-5, rel=1e-12)
    assert toa * 3e8 == pytest.approx(12_000, rel=1e-12)
    sds = analytic_error(Method.SDS_TWR, FormulaTerms(d_a=1e-3, d_b=1e-3), {"A": P20, "B": M20})
    assert sds == 0
    twr = analytic_error(Method.TWR, FormulaTerms(d_b=1e-3), {"A": P20, "B": M20})
    assert twr == pytest.approx(2e-8, rel=1e-12)
    assert twr * 3e8 == pytest.approx(6, rel=1e-12)


def test_analytic_missing_terms():
    with pytest.raises(ValueError, match="d_b"):
        analytic_error(Method.WHISTLE, FormulaTerms(d_ab=1e-7), {"A": P20, "B": P20})
    with pytest.raises(ValueError):
        analytic_error(Method.DJKM, FormulaTerms(d_b=1e-3), {"A": P20, "B": P20})


def test_worst_case_examples():
    w = worst_case_bound(Method.WHISTLE, FormulaTerms(d_b=1e-3), P20, C3E8)
    assert w.worst_error_s == pytest.approx(4e-8, rel=1e-12)
    assert w.worst_error_m == pytest.approx(12, rel=1e-12)
    dp = worst_case_bound(Method.DP_WHISTLE, FormulaTerms(d_ab=80e-9), P20, C3E8)
    assert dp.worst_error_s == pytest.approx(3.2e-12, rel=1e-12)
    assert dp.worst_error_m == pytest.approx(0.96e-3, rel=1e-12)
    assert dp.corner == {"A": P20, "B": P20}
    for method in Method:
        assert worst_case_bound(method, TERMS, PpmDrift(0)).worst_error_s == 0


def test_corner_enumeration():
    got = list(corners(("A", "B"), P20))
    assert len(got) == 4
    assert {(c["A"].ppm, c["B"].ppm) for c in got} == set(itertools.product((20.0, -20.0), repeat=2))


def test_whistle_and_djkm_bounds_equal():
    for d_b in (1e-4, 1e-3, 7e-3):
        t = FormulaTerms(d_b=d_b, d_ab=80e-9, tdoa=10e-9)
        w = worst_case_bound(Method.WHISTLE, t, P20)
        d = worst_case_bound(Method.DJKM, t, P20)
        assert w.worst_error_s == d.worst_error_s


def test_oracle_examples():
    for method in Method:
        assert exact_error_oracle(method, TERMS, drifts(method, PpmDrift(0), PpmDrift(0))) == 0
    twr = exact_error_oracle(Method.TWR, FormulaTerms(d_b=1e-3, d_ab=100e-9), {"A": P20, "B": M20})
    # 1/2 (eps_A R_A - eps_B D_B) with R_A = 1.0002 ms
    assert float(twr) * 3e8 == pytest.approx(6.0006, abs=1e-9)
    toa = exact_error_oracle(Method.SIMPLE_TOA, FormulaTerms(t1=1.0, d_ab=100e-9), {"A": P20, "B": M20})
    # eps_B t2 - eps_A t1 = -2e-5 (1 + 1e-7) - 2e-5
    assert float(toa) * 3e8 == pytest.approx(-12_000.0006, abs=1e-7)


def test_oracle_is_exact_rational():
    got = exact_error_oracle(
        Method.ASYM_DS_TWR, FormulaTerms(d_a=Fraction(5, 1000), d_b=Fraction(1, 1000), d_ab=Fraction(1, 10**7)), {"A": P20, "B": P20}
    )
    # equal drifts: estimate is exactly (1 + eps) d_AB
    assert got == Fraction(2, 10**5) * Fraction(1, 10**7)


@pytest.mark.parametrize("method", list(Method))
def test_approximation_soundness_on_corners(method):
    for corner in corners(method.clock_symbols, P20):
        exact = float(exact_error_oracle(method, TERMS, corner))
        first_order = analytic_error(method, TERMS, corner)
        assert abs(exact - first_order) <= approximation_slack(method, TERMS, P20)


@pytest.mark.parametrize("method", list(Method))
def test_bound_dominates_random_drifts(method):
    rng = np.random.default_rng(list(Method).index(method))
    bound = worst_case_bound(method, TERMS, P20)
    limit = bound.worst_error_s + bound.slack_s
    for micro in rng.integers(-20_000_000, 20_000_000, size=(1000, 2), endpoint=True):
        d = drifts(method, PpmDrift(int(micro[0])), PpmDrift(int(micro[1])))
        assert abs(float(exact_error_oracle(method, TERMS, d))) <= limit


def _scenario(method, rng):
    if method.is_tdoa:
        b_role = "anchor" if method is Method.SIMPLE_TDOA else "mirror"
        pts = rng.uniform(-40, 40, size=(3, 2))
        return [node("S", "tag", *pts[0]), node("A", "anchor", *pts[1]), node("B", b_role, *pts[2])]
    pts = rng.uniform(-40, 40, size=(2, 2))
    return [node("A", "tag", *pts[0]), node("B", "anchor", *pts[1])]


@pytest.mark.parametrize("method", list(Method))
def test_simulation_agrees_with_oracle(method):
    rng = np.random.default_rng(21)
    for _ in range(30):
        base = _scenario(method, rng)
        micro = rng.integers(-20_000_000, 20_000_000, size=3, endpoint=True)
        nodes = [type(n)(n.id, n.role, n.position, type(n.clock)(PpmDrift(int(m)))) for n, m in zip(base, micro)]
        d_b = rng.uniform(1e-4, 3e-3)
        sched = Schedule(
            IdealInstant(int(rng.integers(0, 2 * 10**12))),
            reply_delay_b=d_b,
            reply_delay_a=rng.uniform(1e-4, 3e-3),
            pulse_gap=d_b + 2e-3,
        )
        _, iv = simulate(method, nodes, sched, C3E8)
        sim_err = estimate(iv).value_s - true_value(method, nodes, C3E8)
        by_id = {n.id: n.clock.drift for n in nodes}
        sym = {s: by_id[iv.roles[s]] for s in method.clock_symbols}
        oracle = exact_error_oracle(method, terms_for(method, nodes, sched, C3E8), sym)
        assert abs(sim_err - float(oracle)) <= QUANT_S


def test_terms_for_matches_geometry():
    sx, sy = triangle_tag(30, 45, 24)
    nodes = [node("S", "tag", sx, sy), node("A", "anchor", 0, 0), node("B", "mirror", 24, 0)]
    t = terms_for(Method.WHISTLE, nodes, Schedule(IdealInstant(10**9)), C3E8)
    assert (t.d_ab, t.tdoa, t.t1) == (Fraction(80, 10**9), Fraction(50, 10**9), Fraction(1_000_100, 10**9))


@pytest.mark.parametrize("method", list(Method))
def test_float_fast_path_matches_oracle(method):
    rng = np.random.default_rng(3)
    eps_micro = rng.integers(-20_000_000, 20_000_000, size=(200, 2), endpoint=True)
    fast = drift_error_samples(method, TERMS, eps_micro * 1e-12)
    for row, got in zip(eps_micro, fast):
        want = exact_error_oracle(method, TERMS, drifts(method, PpmDrift(int(row[0])), PpmDrift(int(row[1]))))
        # float rounding of (1+eps) * t with t up to 1 s
        assert got == pytest.approx(float(want), abs=1e-15)


def test_kernel_matches_python_source():
    eps = np.random.default_rng(0).uniform(-EPS, EPS, size=(500, 2))
    q = np.array([1.00013e-3, 3.99987e-3, 4e-3, 1e-3])
    for family in range(6):
        jit = kernels.drift_errors(family, q, 80e-9, 50e-9, eps)
        ref = python_impl(kernels.drift_errors)(family, q, 80e-9, 50e-9, eps)
        np.testing.assert_allclose(jit, ref, rtol=0, atol=1e-21)


def test_slack_ignores_unmeasured_intervals():
    # t1 plays no part in DP-Whistle, so it must not widen the slack
    base = approximation_slack(Method.DP_WHISTLE, FormulaTerms(d_ab=80e-9, d_b=1e-3, pulse_gap=5e-3), P20)
    with_t1 = approximation_slack(Method.DP_WHISTLE, FormulaTerms(t1=1e6, d_ab=80e-9, d_b=1e-3, pulse_gap=5e-3), P20)
    assert base == with_t1
    assert base == pytest.approx(2 * EPS * 80e-9 + EPS**2 * (5e-3 + 160e-9), rel=1e-12)
