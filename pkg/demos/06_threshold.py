"""
Where ground states stop
========================

Bisect between a small-data ground state and a large-data sign-changing
solution.  Probes inside the bracket test the monotonicity of the verdict.
"""
from lm_shooter.sweep import estimate_threshold

res = estimate_threshold(3, 7.0, (0.1, 50.0), iters=20, n_probes=6)
print("probes:", res.probes)
print(f"boundary in [{res.xi_lo:.8f}, {res.xi_hi:.8f}] after {res.iterations} steps; "
      f"non-monotone={res.non_monotone}")
