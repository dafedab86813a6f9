"""
No ground states below the critical exponent
============================================

For 1 < p < (N+2)/(N-2) every radial solution changes sign.  Sweep u(0)
over four decades and look at the zeros and the envelope of one solution.
"""
from lm_shooter import Parameters, IntegratorConfig, envelope, find_zeros, integrate
from lm_shooter.sweep import SweepConfig, geometric_grid, run_sweep

###############################################################################
# Sweep
# -----
# Horizons grow like xi^(-(p-1)/2) for small data and are extended tenfold
# while the verdict is undecided.
report = run_sweep(SweepConfig(N=3, p=3.0, xi_grid=tuple(geometric_grid(0.01, 10.0, 12))))
for row in report.rows:
    print(f"xi={row.xi:9.4g}  {row.verdict:15s}  R0={row.R0:10.4f}")

###############################################################################
# Zeros and envelope
# ------------------
# At each critical point rho = 0, so F(|u|) = F(xi) - M(r): the local maxima
# of |u| decrease strictly while the zeros spread out.
traj = integrate(Parameters(3, 3.0, 1.0), IntegratorConfig(r_max=500.0))
print("zeros:", ", ".join(f"{z:.3f}" for z in find_zeros(traj)))
print("|u| at critical points:", ", ".join(f"{m:.4f}" for _, m in envelope(traj)))
