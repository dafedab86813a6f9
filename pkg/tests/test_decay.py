import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lm_shooter.decay import (
    DecayFit,
    DecayVerdict,
    bootstrap_exponents,
    d12_proxy,
    decay_band,
    fit_tail_exponent,
    tail_table,
)
from lm_shooter.diagnostics import integral_J
from lm_shooter.integrator import Trajectory
from lm_shooter.model import DomainError, Parameters


def synthetic(u_fn, du_fn, r, params=Parameters(3, 7.0, 1.0), D=None):
    u, w = u_fn(r), du_fn(r)
    z = np.zeros_like(r)
    return Trajectory(params=params, r=r, u=u, w=w, M=z, J=z, D=z if D is None else D, eps=0.0)


def test_band_examples():
    b = decay_band(Parameters(3, 7.0, 1.0))
    assert b.alpha_upper_exponent == pytest.approx(1 / 3, abs=1e-15)
    assert b.alpha_lower_exponent == pytest.approx(0.6, abs=1e-15)
    assert b.alpha_d12 == 1.0
    b = decay_band(Parameters(4, 4.0, 1.0))
    assert b.alpha_upper_exponent == pytest.approx(2 / 3)
    assert b.alpha_lower_exponent == pytest.approx(8 / 7)
    assert b.alpha_d12 == 2.0
    # just above criticality the lower exponent tends to N - 2 (the denominator
    # only vanishes at p = (N+1)/(N-1), outside the supercritical range)
    b = decay_band(Parameters(3, 5 + 1e-9, 1.0))
    assert b.alpha_lower_exponent == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        decay_band(Parameters(3, 3.0, 1.0))


def test_exact_power_law():
    r = np.geomspace(1.0, 1e5, 400)
    t = synthetic(lambda r: r ** (-1 / 3), lambda r: -(1 / 3) * r ** (-4 / 3), r)
    fit = fit_tail_exponent(t, (10.0, 1e4))
    assert fit.alpha_hat == pytest.approx(1 / 3, abs=1e-10)
    assert fit.verdict is DecayVerdict.IN_BAND and not fit.residual_flagged


def test_oscillating_tail_flagged():
    r = np.geomspace(1.0, 1e6, 2000)
    u = lambda r: (1 + 0.1 * np.sin(np.log(r))) / r
    du = lambda r: (0.1 * np.cos(np.log(r)) - 1 - 0.1 * np.sin(np.log(r))) / r**2
    fit = fit_tail_exponent(synthetic(u, du, r), (10.0, 1e5))
    assert fit.residual_flagged


def test_insufficient_window(super_small):
    assert fit_tail_exponent(super_small, (100.0, 500.0)).verdict is DecayVerdict.INSUFFICIENT_TAIL
    assert fit_tail_exponent(super_small, (1e11, 1e14)).verdict is DecayVerdict.INSUFFICIENT_TAIL


def test_d12_regime_detected():
    r = np.geomspace(1.0, 1e5, 400)
    t = synthetic(lambda r: 1 / r, lambda r: -1 / r**2, r)
    assert fit_tail_exponent(t, (10.0, 1e4)).verdict is DecayVerdict.D12_REGIME


def test_fit_json_round_trip(super_small):
    fit = fit_tail_exponent(super_small, (1e8, 1e10))
    back = DecayFit.from_json(fit.to_json())
    assert back == fit


def test_tail_table_columns(super_small):
    x, y = tail_table(super_small, (1e8, 1e10))
    assert x[0] == pytest.approx(math.log(1e8)) and x[-1] == pytest.approx(math.log(1e10))
    assert np.all(np.isfinite(y))


def test_d12_proxy_synthetic_converging():
    r = np.geomspace(1.0, 1e6, 500)
    # rho = r^-(N-1): integrand r^2 rho^2 = r^-2, integral 1 - 1/r
    t = synthetic(lambda r: 1 / r, lambda r: -1 / r**2, r, D=1 - 1 / r)
    g = d12_proxy(t)
    assert g.converging is True


def test_d12_proxy_truncated():
    r = np.geomspace(1.0, 10.0, 50)
    t = synthetic(lambda r: 1 / r, lambda r: -1 / r**2, r, D=1 - 1 / r)
    g = d12_proxy(t)
    assert g.converging is None and g.trend == "undetermined"


def test_d12_proxy_small_xi_diverges(super_small):
    g = d12_proxy(super_small)
    assert g.converging is False
    assert integral_J(super_small).trend == "diverging"


def test_proxy_and_J_equivalence(super_small):
    # divergent gradient energy goes with J trending to -infinity
    g, J = d12_proxy(super_small), integral_J(super_small)
    assert (g.converging is False) == (J.trend == "diverging")


def test_envelope_bounds_on_tail(super_small):
    m = (super_small.r >= 1e6) & (super_small.r <= 1e12)
    r, u = super_small.r[m], super_small.u[m]
    upper = u * r ** (1 / 3)
    lower = u * r**0.6
    assert upper.max() / upper.min() < 2.0
    assert np.all(np.diff(lower) > 0)


def test_fit_stable_under_window_doubling(super_small):
    a = fit_tail_exponent(super_small, (1e6, 1e8))
    b = fit_tail_exponent(super_small, (1e6, 2e8))
    assert abs(a.alpha_hat - b.alpha_hat) < a.confidence


def test_bootstrap_examples():
    seq, up = bootstrap_exponents(0.35, 7.0, 3)
    assert up and seq[1] == pytest.approx(0.45)
    seq, up = bootstrap_exponents(0.2, 7.0, 3)
    assert not up


@given(st.floats(5.01, 12.0), st.floats(0.0, 1.0))
def test_bootstrap_divergence_rule(p, t):
    # supercritical p, starting exponents below N/p
    alpha = t * 3 / p
    fixed = 2 / (p - 1)
    if abs(alpha - fixed) < 1e-6:
        return
    _, up = bootstrap_exponents(alpha, p, 3, max_iter=2000)
    assert up == (alpha > fixed)


def test_band_on_rescaled_tail_window(super_small):
    # u(r) = xi v(xi^((p-1)/2) r): the far field of the small-xi profile starts
    # near r ~ xi^(-(p-1)/2) = 8000, so a two-decade window is moved there
    s = 0.05 ** -3.0
    fit = fit_tail_exponent(super_small, (1e2 * s, 1e4 * s))
    assert fit.verdict is DecayVerdict.IN_BAND
    assert 1 / 3 - 0.05 <= fit.alpha_hat <= 0.6 + 0.05


def test_unscaled_window_sits_in_the_core(super_small):
    # on [1e2, 1e4] the profile has barely left u(0): the fitted slope is near zero
    fit = fit_tail_exponent(super_small, (1e2, 1e4))
    assert fit.alpha_hat < 0.1
    u, _ = super_small.interpolate(np.array([1e4]))
    assert u[0] > 0.7 * super_small.xi
