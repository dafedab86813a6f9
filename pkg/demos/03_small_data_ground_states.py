"""
Small data give ground states above the critical exponent
=========================================================

For p supercritical, a run whose slope never exceeds the zero delta of
L(rho) = 1/(p+1) - sqrt(1-rho^2)/(1+sqrt(1-rho^2)) + 1/N keeps dP/dr < 0
and cannot reach a zero.  Small u(0) achieves that.
"""
from lm_shooter import Parameters, delta_root
from lm_shooter.sweep import SweepConfig, geometric_grid, positivity_certificate, run_sweep

N, p = 3, 7.0
print(f"delta = {delta_root(N, p):.12f}  (closed form sqrt(48)/13)")

report = run_sweep(SweepConfig(N, p, tuple(geometric_grid(0.01, 0.2, 6)) + (20.0, 50.0)))
for row in report.rows:
    print(f"xi={row.xi:8.4g}  {row.verdict:21s} max rho={row.max_rho:.3e}  "
          f"certified={row.certified}  J trend={row.J_trend}")
print("empirical boundary:", report.empirical_boundary)

###############################################################################
# The certificate on its own
# --------------------------
c = positivity_certificate(Parameters(N, p, 0.05))
print(c)
