import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holofact.errors import BoxHitsExceptionalValue, NonElhSpec, SeedAtExceptionalValue
from holofact.ivp import (
    IvpSpec,
    benchmark_spec,
    bounds_hille,
    factorization_residual,
    residual_check,
    searched_boxes,
    solve_local,
    taylor_solution,
)
from holofact.series import PowerSeries

LN2 = math.log(2)
SQRT2 = math.sqrt(2)


def type2_spec():
    return IvpSpec("type2", (0, 1), (0,), N=1, a=0.0, a0=SQRT2)


def test_benchmark_coefficients():
    L = taylor_solution(benchmark_spec(), 8)
    assert np.allclose(L.coeffs[:5], [0, 1, 1, 1, 13 / 12], atol=1e-14)


def test_constant_g_rejected_for_type1():
    with pytest.raises(NonElhSpec):
        IvpSpec("type1", (0, 0, -1), (0,))


def test_seed_at_exceptional_value():
    with pytest.raises(SeedAtExceptionalValue):
        IvpSpec("type2", (0, 1), (0,), N=1, a=0.5, a0=0.5)


def test_type2_root_solution():
    c = solve_local(type2_spec(), 8)
    assert np.allclose(c.L.coeffs[:3], [SQRT2, SQRT2 / 2, SQRT2 / 8])


def test_type2_is_entire_at_full_order():
    assert solve_local(type2_spec(), 64).r_emp.unbounded


def test_linear_coefficient_matches_ode(benchmark_chart):
    s = dataclasses.replace(benchmark_spec(), alpha=0.2 + 0.1j, a0=0.3 - 0.2j)
    c = solve_local(s, 32, bounds=False)
    assert c.L.coeffs[0] == s.a0
    want = np.exp(s.alpha) * np.exp(s.a0)  # e^{F(alpha)} e^{-G(a0)}
    assert abs(c.L.coeffs[1] - want) < 1e-12


def test_bounds_benchmark_box():
    b = bounds_hille(benchmark_spec(), 1.0, 1.0)
    assert b.M == pytest.approx(math.e ** 2, rel=1e-6)
    assert b.K == pytest.approx(math.e ** 2, rel=1e-6)
    assert b.banach == pytest.approx(0.1353, abs=1e-4)
    assert b.picard == pytest.approx(0.1353, abs=1e-4)
    assert b.cauchy == pytest.approx(0.0654, abs=1e-4)


def test_bounds_thin_box():
    b = bounds_hille(benchmark_spec(), 0.1, 10.0)
    assert b.M == pytest.approx(math.exp(10.1), rel=1e-6)
    assert b.picard == pytest.approx(min(0.1, 10.0 / math.exp(10.1)), rel=1e-6)


def test_box_hits_exceptional_value():
    with pytest.raises(BoxHitsExceptionalValue):
        bounds_hille(IvpSpec("type2", (0, 1), (5,), N=1, a=0.0, a0=1.0), 1.0, 2.0)


def test_chart_bounds_below_radius(benchmark_chart):
    c = benchmark_chart
    assert abs(c.r_emp.value - LN2) < 0.01 * LN2
    assert c.r_theory.banach <= c.r_theory.picard
    assert max(c.r_theory.banach, c.r_theory.picard, c.r_theory.cauchy) <= c.r_emp.value * 1.05


@given(st.floats(0.05, 4.0), st.floats(0.05, 8.0))
def test_benchmark_bounds_sound(a, b):
    r = bounds_hille(benchmark_spec(), a, b)
    assert r.banach <= r.picard
    assert max(r.banach, r.picard, r.cauchy) <= LN2 + 1e-9


@given(
    st.lists(st.complex_numbers(max_magnitude=1.0, allow_nan=False), min_size=2, max_size=4),
    st.lists(st.complex_numbers(max_magnitude=1.0, allow_nan=False), min_size=2, max_size=3),
)
def test_bound_ordering(F, G):
    F[-1] = F[-1] if abs(F[-1]) > 1e-3 else 0.5
    G[-1] = G[-1] if abs(G[-1]) > 1e-3 else 0.5
    spec = IvpSpec("type1", F, G)
    for r in searched_boxes(spec):
        assert r.banach <= r.picard


def test_residuals(benchmark_chart):
    assert residual_check(benchmark_chart, 100) < 1e-10
    assert residual_check(solve_local(type2_spec(), 64), 100) < 1e-10


def test_residual_detects_corruption(benchmark_chart):
    c = benchmark_chart.L.coeffs.copy()
    c[3] += 0.1
    bad = dataclasses.replace(benchmark_chart, L=PowerSeries(c))
    assert residual_check(bad, 100) > 1e-3


def test_factorization_on_disk(benchmark_chart):
    assert factorization_residual(benchmark_chart, 200, 0.4) < 1e-9


def test_orders_agree():
    a = taylor_solution(benchmark_spec(), 48).coeffs
    b = taylor_solution(benchmark_spec(), 64).coeffs[:48]
    assert np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)) < 1e-12
