"""Scaling correspondence between the Lorentz-Minkowski problem and the
``eps``-family, and the Lane-Emden limit ``eps = 0``.

If ``u`` solves the radial Lorentz-Minkowski equation then for ``lam > 0``
``lam^(-1/(2p)) u(lam^(-(p-1)/(4p)) r)`` solves the ``eps``-equation

    (w' / sqrt(1 - eps w'^2))' + (N-1)/r w' / sqrt(1 - eps w'^2) + |w|^(p-1) w = 0

with ``eps = lam^((p+1)/(2p))``; conversely ``eps^(1/(p+1)) w(eps^((p-1)/(2(p+1))) r)``
maps a solution of the ``eps``-equation back.  Both maps are pointwise
dilations, so they act on stored nodes exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrator import Event, IntegratorConfig, Trajectory, integrate
from .model import DomainError, Parameters

__all__ = [
    "EPS_SEQUENCE",
    "EpsFamilyParams",
    "closeness",
    "lane_emden_bubble",
    "map_from_eps",
    "map_to_eps",
    "solve_eps_family",
    "solve_lane_emden",
]

EPS_SEQUENCE = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class EpsFamilyParams:
    """Member of the rescaled family with ``w(0) = 1``; ``eps = 0`` is Lane-Emden."""

    eps: float
    N: int
    p: float

    def __post_init__(self):
        if not self.eps >= 0:
            raise DomainError(f"eps must be >= 0, got {self.eps!r}")
        Parameters(self.N, self.p, 1.0)

    @property
    def params(self) -> Parameters:
        return Parameters(self.N, self.p, 1.0)


def lane_emden_bubble(r):
    """Closed-form ``N = 3``, ``p = 5`` Lane-Emden solution ``(1 + r^2/3)^(-1/2)``."""
    r = np.asarray(r, dtype=float)
    return 1.0 / np.sqrt(1.0 + r * r / 3.0)


def solve_lane_emden(N: int, p: float, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate ``v'' + (N-1)/r v' + |v|^(p-1) v = 0`` with ``v(0) = 1``."""
    return integrate(Parameters(N, p, 1.0), cfg, eps=0.0)


def solve_eps_family(fam: EpsFamilyParams, cfg: IntegratorConfig | None = None) -> Trajectory:
    return integrate(fam.params, cfg, eps=fam.eps)


def _dilate(traj: Trajectory, a: float, b: float, eps_new: float, grid=None) -> Trajectory:
    # u_new(r) = a u(b r); reduced slope scales by a*b, rho*Omega by (a*b)^2
    N = traj.params.N
    k = (a * b) ** 2
    r = traj.r / b
    u = a * traj.u
    w = (a * b) * traj.w
    M = k * traj.M
    J = k * b ** (-N) * traj.J
    D = k * b ** (-N) * traj.D
    events = tuple(Event(e.kind, e.r / b, a * e.u, a * b * e.w) for e in traj.events)
    out = Trajectory(
        params=traj.params.with_xi(a * traj.xi),
        r=r, u=u, w=w, M=M, J=J, D=D,
        events=events,
        termination=traj.termination,
        reason=traj.reason,
        eps=eps_new,
        n_steps=traj.n_steps,
        n_rejected=traj.n_rejected,
    )
    if grid is not None:
        # the dilated nodes solve the target equation, so its slopes drive the interpolant
        out = out.resample(grid)
    return out


def map_to_eps(traj: Trajectory, lam: float, grid=None) -> Trajectory:
    """Send a solution of the ``eps = 1`` problem to the family member ``eps = lam^((p+1)/(2p))``.

    With ``grid`` the mapped nodes are resampled there by cubic Hermite
    interpolation with slopes from the target equation; otherwise the dilated
    nodes are returned as is.
    """
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if traj.eps != 1.0:
        raise ValueError("map_to_eps expects a trajectory of the eps = 1 problem")
    p = traj.params.p
    a = lam ** (-1.0 / (2 * p))
    b = lam ** (-(p - 1) / (4 * p))
    return _dilate(traj, a, b, lam ** ((p + 1) / (2 * p)), grid)


def map_from_eps(traj: Trajectory, eps: float, grid=None) -> Trajectory:
    """Send a solution of the ``eps``-equation back to the ``eps = 1`` problem.

    The result starts at ``xi = eps^(1/(p+1)) * w(0)``.
    """
    if not eps > 0:
        raise DomainError("map_from_eps needs eps > 0; the eps = 0 map is degenerate")
    if not np.isclose(traj.eps, eps, rtol=1e-12, atol=0.0):
        raise ValueError(f"trajectory belongs to eps={traj.eps!r}, not {eps!r}")
    p = traj.params.p
    a = eps ** (1.0 / (p + 1))
    b = eps ** ((p - 1) / (2 * (p + 1)))
    return _dilate(traj, a, b, 1.0, grid)


def closeness(t1: Trajectory, t2: Trajectory, interval: tuple[float, float], n_grid: int = 4001) -> float:
    """Sup-norm distance of ``u`` over ``interval`` (cubic Hermite interpolation)."""
    lo, hi = interval
    lo = max(lo, t1.r[0], t2.r[0])
    hi = min(hi, t1.r[-1], t2.r[-1])
    if not hi >= lo:
        raise ValueError("trajectories do not overlap on the requested interval")
    grid = np.linspace(lo, hi, n_grid)
    nodes = np.concatenate([t1.r, t2.r])
    grid = np.unique(np.concatenate([grid, nodes[(nodes >= lo) & (nodes <= hi)]]))
    u1, _ = t1.interpolate(grid)
    u2, _ = t2.interpolate(grid)
    return float(np.max(np.abs(u1 - u2)))
