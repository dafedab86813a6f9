import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lm_shooter.classify import Verdict, classify
from lm_shooter.integrator import IntegratorConfig, integrate
from lm_shooter.model import DomainError, Parameters
from lm_shooter.rescale import (
    EPS_SEQUENCE,
    EpsFamilyParams,
    closeness,
    lane_emden_bubble,
    map_from_eps,
    map_to_eps,
    solve_eps_family,
    solve_lane_emden,
)


def test_bubble_solves_lane_emden_symbolically():
    sp = pytest.importorskip("sympy")
    r = sp.symbols("r", positive=True)
    v = (1 + r**2 / 3) ** sp.Rational(-1, 2)
    residual = sp.diff(v, r, 2) + 2 / r * sp.diff(v, r) + v**5
    assert sp.simplify(residual) == 0


def test_bubble_residual_machine_precision():
    # same substitution in floating point: v' = -r/3 a^(-3/2), a = 1 + r^2/3
    r = np.linspace(0.01, 20.0, 2001)
    a = 1 + r * r / 3
    v1 = -r / 3 * a**-1.5
    v2 = -a**-1.5 / 3 + r * r / 3 * a**-2.5
    res = v2 + 2 / r * v1 + lane_emden_bubble(r) ** 5
    assert np.max(np.abs(res)) < 1e-15


def test_lane_emden_bubble_numerics():
    traj = solve_lane_emden(3, 5.0, IntegratorConfig(r_max=20.0))
    grid = np.linspace(traj.r[0], 20.0, 4001)
    u, _ = traj.interpolate(grid)
    assert np.max(np.abs(u - lane_emden_bubble(grid))) <= 1e-6
    assert np.max(np.abs(traj.u - lane_emden_bubble(traj.r))) <= 1e-6


def test_lane_emden_subcritical_zero():
    traj = solve_lane_emden(3, 3.0, IntegratorConfig(r_max=20.0))
    # first zero of the n = 3 polytrope
    assert traj.first_zero == pytest.approx(6.896848619, abs=1e-8)
    e = [e for e in traj.events if e.kind.value == "ZeroOfU"][0]
    assert e.w < 0


def test_lane_emden_supercritical_positive():
    traj = solve_lane_emden(3, 7.0, IntegratorConfig(r_max=1e3))
    assert len(traj.zeros) == 0
    assert np.all(traj.u > 0) and np.all(np.diff(traj.u) <= 0)


def test_eps_zero_matches_lane_emden():
    cfg = IntegratorConfig(r_max=10.0)
    a = solve_eps_family(EpsFamilyParams(0.0, 3, 3.0), cfg)
    b = solve_lane_emden(3, 3.0, cfg)
    assert closeness(a, b, (0.0, 10.0)) == 0.0


def test_eps_one_is_the_original_problem():
    cfg = IntegratorConfig(r_max=20.0)
    a = solve_eps_family(EpsFamilyParams(1.0, 3, 3.0), cfg)
    b = integrate(Parameters(3, 3.0, 1.0), cfg)
    assert closeness(a, b, (0.0, 20.0)) == 0.0


def test_eps_family_close_to_lane_emden():
    cfg = IntegratorConfig(r_max=20.0)
    le = solve_lane_emden(3, 3.0, cfg)
    R = le.first_zero
    d = [closeness(le, solve_eps_family(EpsFamilyParams(e, 3, 3.0), cfg), (0.0, 0.9 * R)) for e in EPS_SEQUENCE]
    assert all(b < a for a, b in zip(d, d[1:]))
    # positivity margin of Lane-Emden on [0, 0.9 R] bounds the distance that keeps the sign pattern
    margin = float(np.min(le.interpolate(np.linspace(le.r[0], 0.9 * R, 100))[0]))
    assert d[-1] < margin


def test_map_examples():
    t = integrate(Parameters(3, 3.0, 1.0), IntegratorConfig(r_max=20.0))
    same = map_to_eps(t, 1.0)
    assert same.eps == 1.0 and np.array_equal(same.u, t.u) and np.array_equal(same.r, t.r)
    m = map_to_eps(t, 2.0)
    assert m.eps == pytest.approx(2 ** (2 / 3), rel=1e-15)
    np.testing.assert_allclose(m.r, t.r * 2 ** (1 / 6), rtol=1e-15)
    back = map_from_eps(m, m.eps)
    np.testing.assert_allclose(back.u, t.u, rtol=0, atol=1e-10)
    np.testing.assert_allclose(back.w, t.w, rtol=0, atol=1e-10)
    np.testing.assert_allclose(back.r, t.r, rtol=1e-10)
    ident = map_from_eps(t, 1.0)
    np.testing.assert_array_equal(ident.u, t.u)


def test_map_from_eps_initial_value():
    fam = solve_eps_family(EpsFamilyParams(1e-6, 3, 3.0), IntegratorConfig(r_max=5.0))
    back = map_from_eps(fam, 1e-6)
    assert back.xi == pytest.approx(1e-6**0.25, rel=1e-14)
    assert back.xi == pytest.approx(0.0316, abs=1e-4)


def test_map_errors(super_half):
    with pytest.raises(DomainError):
        map_from_eps(super_half, 0.0)
    with pytest.raises(DomainError):
        map_to_eps(super_half, -1.0)
    with pytest.raises(ValueError):
        map_from_eps(super_half, 0.5)


def test_mapped_trajectory_keeps_first_integral():
    t = integrate(Parameters(3, 3.0, 1.0), IntegratorConfig(r_max=20.0))
    m = map_to_eps(t, 2.0)
    assert np.max(np.abs(m.E_resid)) <= 1e-8
    direct = solve_eps_family(EpsFamilyParams(m.eps, 3, 3.0), IntegratorConfig(r_max=float(m.r[-1])))
    # the family is normalized to w(0)=1, the mapped run starts at lambda^(-1/(2p))
    assert m.xi == pytest.approx(2 ** (-1 / 6), rel=1e-15)
    assert direct.xi == 1.0


def test_mapped_resampling_grid():
    t = integrate(Parameters(3, 3.0, 1.0), IntegratorConfig(r_max=20.0))
    grid = np.linspace(1e-3, 15.0, 500)
    m = map_to_eps(t, 2.0, grid=grid)
    assert np.array_equal(m.r, grid)
    assert np.max(np.abs(m.E_resid)) <= 1e-6


def test_closeness_examples(super_half):
    assert closeness(super_half, super_half, (0.0, 50.0)) == 0.0
    shifted = super_half.with_arrays(u=super_half.u + 0.1)
    assert closeness(super_half, shifted, (0.0, 50.0)) == pytest.approx(0.1, abs=1e-12)


def test_small_xi_subcritical_sign_change():
    # xi = eps^(1/(p+1)) built from the eps-family close to Lane-Emden
    for eps in (1e-2, 1e-3):
        xi = eps ** 0.25
        b = eps ** (2 / 8)  # radial scale eps^((p-1)/(2(p+1)))
        traj = integrate(Parameters(3, 3.0, xi), IntegratorConfig(r_max=20.0 / b))
        assert classify(traj).verdict is Verdict.SIGN_CHANGING


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 20.0), st.sampled_from([2.0, 3.0, 7.0]))
def test_round_trip_identity(lam, p):
    t = integrate(Parameters(3, p, 0.8), IntegratorConfig(r_max=10.0, rel_tol=1e-8, abs_tol=1e-10))
    m = map_to_eps(t, lam)
    back = map_from_eps(m, lam ** ((p + 1) / (2 * p)))
    assert np.max(np.abs(back.u - t.u)) <= 1e-10
    assert np.max(np.abs(back.w - t.w)) <= 1e-10 * max(1.0, np.max(np.abs(t.w)))
    assert np.max(np.abs(m.E_resid)) <= 1e-8 * max(1.0, abs(m.F_xi))
