"""
From Lorentz-Minkowski to Lane-Emden by rescaling
=================================================

u -> lam^(-1/(2p)) u(lam^(-(p-1)/(4p)) r) maps solutions to the eps-family
with eps = lam^((p+1)/(2p)).  As eps -> 0 the family tends to Lane-Emden,
which for p = 5, N = 3 has the closed form (1 + r^2/3)^(-1/2).
"""
import numpy as np

from lm_shooter import (
    EPS_SEQUENCE,
    EpsFamilyParams,
    IntegratorConfig,
    Parameters,
    closeness,
    integrate,
    lane_emden_bubble,
    map_from_eps,
    map_to_eps,
    solve_eps_family,
    solve_lane_emden,
)

cfg = IntegratorConfig(r_max=20.0)
bubble = solve_lane_emden(3, 5.0, cfg)
print(f"bubble deviation: {np.max(np.abs(bubble.u - lane_emden_bubble(bubble.r))):.2e}")

traj = integrate(Parameters(3, 3.0, 1.0), cfg)
m = map_to_eps(traj, 2.0)
back = map_from_eps(m, m.eps)
print(f"eps = {m.eps:.6f}, new u(0) = {m.xi:.6f}, round trip error = {np.max(np.abs(back.u - traj.u)):.1e}")

le = solve_lane_emden(3, 3.0, cfg)
print(f"Lane-Emden p=3 first zero: {le.first_zero:.6f}")
for eps in EPS_SEQUENCE:
    fam = solve_eps_family(EpsFamilyParams(eps, 3, 3.0), cfg)
    print(f"eps={eps:7.0e}: sup |w_eps - v| on [0, 0.9 R] = {closeness(le, fam, (0.0, 0.9 * le.first_zero)):.3e}")
