"""
Tail decay of a small-data ground state
=======================================

The ground states built from small data are not of finite energy: u decays
no faster than r^(-2/(p-1)) and not slower than r^(-2N/((N-1)(p+1)-2N)).
For a small u(0) the far field only begins at r ~ u(0)^(-(p-1)/2), so the
fit window has to be placed there.
"""
from lm_shooter import IntegratorConfig, Parameters, d12_proxy, decay_band, fit_tail_exponent, integrate
from lm_shooter.decay import bootstrap_exponents

params = Parameters(3, 7.0, 0.05)
traj = integrate(params, IntegratorConfig(r_max=1e12, output="log"))
band = decay_band(params)
print(f"band: [{band.alpha_upper_exponent:.4f}, {band.alpha_lower_exponent:.4f}], finite energy: {band.alpha_d12}")

for window in [(1e2, 1e4), (1e6, 1e8), (1e8, 1e10), (1e10, 1e12)]:
    fit = fit_tail_exponent(traj, window)
    print(f"window {window[0]:.0e}..{window[1]:.0e}: alpha={fit.alpha_hat:.4f} +- {fit.confidence:.4f}  {fit.verdict.value}")

g = d12_proxy(traj)
print("gradient energy partials at 1e8, 1e10, 1e12:", [f"{v:.3g}" for v in g.partials[-5::2]], "->", g.trend)

###############################################################################
# Faster decay would bootstrap itself past the finite-energy threshold
seq, up = bootstrap_exponents(0.35, params.p, params.N)
print("alpha iterates:", [round(a, 3) for a in seq], "diverges:", up)
