import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rk4_first_zero
from lm_shooter.integrator import (
    EventKind,
    IntegratorConfig,
    Termination,
    default_h0,
    integrate,
    quadrature_crosscheck,
    rhs,
    series_start,
)
from lm_shooter.model import DomainError, Parameters


def test_rhs_examples():
    assert rhs(1.0, (1.0, 0.0), Parameters(3, 3.0, 1.0)) == (0.0, -1.0)
    du, dw = rhs(2.0, (0.0, 1.0), Parameters(3, 3.0, 1.0))
    assert du == pytest.approx(1 / math.sqrt(2), abs=1e-15) and dw == pytest.approx(-1.0, abs=1e-15)
    assert rhs(1.0, (-1.0, 0.0), Parameters(4, 3.0, 1.0)) == (0.0, 1.0)
    with pytest.raises(DomainError):
        rhs(0.0, (1.0, 0.0), Parameters(3, 3.0, 1.0))


def test_series_start_examples():
    u, w = series_start(Parameters(3, 3.0, 1.0), 1e-3)
    assert u == pytest.approx(1 - 1.6667e-7, abs=1e-11)
    assert w == pytest.approx(-3.3333e-4, rel=1e-4)
    _, w = series_start(Parameters(3, 3.0, 2.0), 1e-3)
    assert w == pytest.approx(-8e-3 / 3, rel=1e-6)
    u, w = series_start(Parameters(3, 3.0, 1e-8), 1e-3)
    assert abs(u) <= 1e-8 and abs(w) < 1e-20


def test_config_validation():
    for bad in ({"r_max": 0.0}, {"rel_tol": 0.0}, {"abs_tol": -1.0}, {"h0": 0.0}, {"max_steps": 0}):
        with pytest.raises(DomainError):
            IntegratorConfig(**bad)


def test_subcritical_first_zero_matches_rk4_oracle():
    traj = integrate(Parameters(3, 3.0, 1.0), IntegratorConfig(r_max=50.0))
    assert any(e.kind is EventKind.ZERO_OF_U for e in traj.events)
    R0_oracle = rk4_first_zero(3, 3.0, 1.0, h=1e-5, r_max=10.0)
    assert traj.first_zero == pytest.approx(R0_oracle, abs=1e-8)


def test_supercritical_small_xi_stays_positive():
    traj = integrate(Parameters(3, 7.0, 0.1), IntegratorConfig(r_max=1e4))
    assert traj.termination is Termination.REACHED_HORIZON
    assert len(traj.zeros) == 0
    assert np.all(traj.u > 0) and np.all(np.diff(traj.u) <= 0) and traj.u[-1] < traj.u[0]


def test_empty_span_single_sample():
    p = Parameters(3, 5.5, 0.7)
    h0 = default_h0(p)
    traj = integrate(p, IntegratorConfig(r_max=h0))
    assert len(traj) == 1 and traj.termination is Termination.REACHED_HORIZON


def test_step_budget():
    traj = integrate(Parameters(3, 3.0, 1.0), IntegratorConfig(r_max=50.0, max_steps=10))
    assert traj.termination is Termination.STEP_BUDGET_EXHAUSTED
    assert traj.r[-1] < 50.0


def test_trajectory_is_read_only(super_half):
    with pytest.raises(ValueError):
        super_half.u[0] = 0.0


def test_quadrature_crosscheck_acceptance_run(super_half):
    assert quadrature_crosscheck(super_half) <= 1e-7


def test_quadrature_crosscheck_detects_corruption(super_half):
    w = super_half.w.copy()
    w[len(w) // 2] += 1e-3
    bad = super_half.with_arrays(w=w)
    assert quadrature_crosscheck(bad) >= 5e-4


def test_quadrature_crosscheck_converges():
    vals = []
    for tol in (1e-8, 1e-10, 1e-12):
        t = integrate(Parameters(3, 7.0, 0.5), IntegratorConfig(r_max=50.0, rel_tol=tol, abs_tol=tol))
        vals.append(quadrature_crosscheck(t))
    assert vals[0] > vals[1] > vals[2]


def test_tolerance_halving_sanity():
    p = Parameters(3, 3.0, 1.0)
    tol = 1e-9
    a = integrate(p, IntegratorConfig(r_max=20.0, rel_tol=tol, abs_tol=tol))
    b = integrate(p, IntegratorConfig(r_max=20.0, rel_tol=tol / 2, abs_tol=tol / 2))
    assert abs(a.u[-1] - b.u[-1]) < 10 * tol


def test_large_xi_starter_respects_light_cone():
    traj = integrate(Parameters(3, 7.0, 100.0), IntegratorConfig(r_max=200.0))
    assert np.all(traj.light_cone_gap > 0)
    assert np.max(np.abs(traj.E_resid)) <= 1e-7 * traj.F_xi
    assert traj.first_zero < 101.0


def test_log_output_grid_keeps_events():
    full = integrate(Parameters(3, 3.0, 1.0), IntegratorConfig(r_max=200.0))
    thin = integrate(Parameters(3, 3.0, 1.0), IntegratorConfig(r_max=200.0, output="log", points_per_decade=20))
    assert len(thin) < len(full)
    np.testing.assert_allclose(thin.zeros, full.zeros, rtol=0, atol=1e-12)
    for z in thin.zeros:
        assert np.min(np.abs(thin.r - z)) == 0.0


def test_deterministic():
    p = Parameters(3, 7.0, 0.5)
    a = integrate(p, IntegratorConfig(r_max=30.0))
    b = integrate(p, IntegratorConfig(r_max=30.0))
    assert np.array_equal(a.r, b.r) and np.array_equal(a.u, b.u) and np.array_equal(a.w, b.w)


cases = st.tuples(
    st.sampled_from([3, 4, 5]),
    st.sampled_from([2.0, 3.0, 4.5, 7.0]),
    st.floats(0.05, 20.0),
)


@settings(max_examples=25, deadline=None)
@given(cases)
def test_solution_bounds(c):
    N, p, xi = c
    traj = integrate(Parameters(N, p, xi), IntegratorConfig(r_max=30.0, rel_tol=1e-9, abs_tol=1e-11))
    assert not traj.tripped
    body = traj.r > traj.r[0]
    assert np.all(np.abs(traj.u[body]) < xi)
    assert np.all(traj.light_cone_gap > 0)
    # strictly decreasing while positive, before the first zero
    pre = traj.r < traj.first_zero
    u = traj.u[pre]
    assert np.all(np.diff(u) <= 0)
    assert np.max(np.abs(traj.E_resid)) <= 1e-6 * traj.F_xi
