"""Ground state versus sign-changing classification of trajectories."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .integrator import Trajectory

__all__ = [
    "Classification",
    "ClassifyCriteria",
    "Intersections",
    "Verdict",
    "classify",
    "count_intersections",
    "envelope",
    "find_zeros",
    "zero_gaps",
]


class Verdict(str, Enum):
    GROUND_STATE_CANDIDATE = "GroundStateCandidate"
    SIGN_CHANGING = "SignChanging"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ClassifyCriteria:
    """Thresholds for a finite-horizon verdict.

    A positive run is a ground-state candidate once ``u(r_max)`` has dropped
    below ``tail_threshold * xi`` while still decaying like a power law, i.e.
    with log-slope ``r |u'| / u`` at most ``max_log_slope``.  A run heading
    straight for a zero just past the horizon has a much steeper log-slope.
    ``max_log_slope=None`` picks ``2 max(N - 2, 2/(p-1)) + 1``.
    """

    horizon: float | None = None
    tail_threshold: float = 1e-2
    max_log_slope: float | None = None


@dataclass
class Classification:
    verdict: Verdict
    zeros: list[float] = field(default_factory=list)
    first_zero: float | None = None
    envelope: list[tuple[float, float]] = field(default_factory=list)
    evidence: dict = field(default_factory=dict)

    def to_json(self, **kw) -> str:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return json.dumps(d, **kw)

    @classmethod
    def from_json(cls, text: str) -> "Classification":
        d = json.loads(text)
        d["verdict"] = Verdict(d["verdict"])
        d["envelope"] = [tuple(x) for x in d["envelope"]]
        return cls(**d)


def find_zeros(traj: Trajectory) -> np.ndarray:
    """Refined radii where ``u`` changes sign, strictly increasing."""
    z = np.sort(traj.zeros)
    if len(z) > 1:
        keep = np.concatenate([[True], np.diff(z) > 0])
        z = z[keep]
    return z


def zero_gaps(traj: Trajectory) -> np.ndarray:
    return np.diff(find_zeros(traj))


def envelope(traj: Trajectory) -> list[tuple[float, float]]:
    """``(r, |u|)`` at the interior critical points of ``u``.

    At such points ``rho = 0`` so the first integral gives
    ``F(|u|) = F(xi) - M_partial(r)``; since ``M_partial`` increases the
    magnitudes decrease strictly.
    """
    return [(e.r, abs(e.u)) for e in traj.critical_points]


def _default_max_log_slope(N: int, p: float) -> float:
    return 2.0 * max(N - 2.0, 2.0 / (p - 1.0)) + 1.0


def classify(traj: Trajectory, criteria: ClassifyCriteria | None = None) -> Classification:
    """Finite-horizon verdict on a trajectory.

    ``SignChanging`` as soon as ``u`` has a zero; ``GroundStateCandidate``
    when ``u`` stays positive and decreasing and has decayed below the tail
    threshold with a power-law log-slope; ``Undetermined`` otherwise,
    including guard-tripped runs.
    """
    criteria = criteria or ClassifyCriteria()
    N, p, xi = traj.params.N, traj.params.p, traj.xi
    zeros = find_zeros(traj)
    r_end, u_end = float(traj.r[-1]), float(traj.u[-1])
    up_end = float(traj.up[-1])
    log_slope = r_end * abs(up_end) / u_end if u_end > 0 else math.inf
    evidence = {
        "horizon": r_end,
        "tail_value": u_end,
        "tail_ratio": u_end / xi,
        "tail_slope": up_end,
        "tail_log_slope": log_slope,
        "termination": traj.termination.value,
    }
    if criteria.horizon is not None and r_end < criteria.horizon * (1 - 1e-12) and not traj.tripped:
        evidence["reason"] = "trajectory shorter than requested horizon"

    if len(zeros):
        return Classification(
            Verdict.SIGN_CHANGING,
            zeros=[float(z) for z in zeros],
            first_zero=float(zeros[0]),
            envelope=envelope(traj),
            evidence=evidence,
        )
    if traj.tripped:
        evidence["reason"] = traj.reason
        return Classification(Verdict.UNDETERMINED, evidence=evidence)

    max_slope = criteria.max_log_slope
    if max_slope is None:
        max_slope = _default_max_log_slope(N, p)
    # non-increasing node to node (rounding can leave equal neighbours near h0)
    decreasing = bool(np.all(np.diff(traj.u) <= 0) and traj.u[-1] < traj.u[0]) if len(traj) > 1 else False
    ok = (
        decreasing
        and bool(np.all(traj.u > 0))
        and u_end < criteria.tail_threshold * xi
        and log_slope <= max_slope
    )
    if ok:
        return Classification(Verdict.GROUND_STATE_CANDIDATE, evidence=evidence)
    if not decreasing:
        evidence.setdefault("reason", "u not strictly decreasing")
    elif u_end >= criteria.tail_threshold * xi:
        evidence.setdefault("reason", "tail not yet below threshold")
    else:
        evidence.setdefault("reason", "tail log-slope too steep for a power law")
    return Classification(Verdict.UNDETERMINED, evidence=evidence)


@dataclass(frozen=True)
class Intersections:
    count: int
    window: tuple[float, float]
    crossings: tuple[float, ...] = ()
    tangency_suspected: bool = False


def count_intersections(t1: Trajectory, t2: Trajectory, n_grid: int = 20001,
                        contact_tol: float | None = None) -> Intersections:
    """Transversal crossings of the graphs of ``u1`` and ``u2``.

    The window is ``[0, min(R_0(t1), R_0(t2), common horizon)]`` restricted to
    where both functions are positive.  Both trajectories are resampled on a
    common grid (uniform in ``r``, plus every node of either run) by cubic
    Hermite interpolation.  A near-contact without a sign change only raises
    ``tangency_suspected``.
    """
    if (t1.params.N, t1.params.p) != (t2.params.N, t2.params.p) or t1.eps != t2.eps:
        raise ValueError("trajectories must share N, p and eps")
    r_lo = max(t1.r[0], t2.r[0])
    r_hi = min(t1.first_zero, t2.first_zero, t1.r[-1], t2.r[-1])
    if not r_hi > r_lo:
        return Intersections(0, (float(r_lo), float(r_hi)))
    grid = np.linspace(r_lo, r_hi, n_grid)
    extra = np.concatenate([t1.r, t2.r])
    grid = np.unique(np.concatenate([grid, extra[(extra >= r_lo) & (extra <= r_hi)]]))
    u1, _ = t1.interpolate(grid)
    u2, _ = t2.interpolate(grid)
    pos = (u1 > 0) & (u2 > 0)
    grid, u1, u2 = grid[pos], u1[pos], u2[pos]
    diff = u1 - u2
    if contact_tol is None:
        contact_tol = 1e-9 * max(t1.xi, t2.xi)
    if np.all(np.abs(diff) <= contact_tol):
        # identical curves: no transversal crossing
        return Intersections(0, (float(r_lo), float(r_hi)))
    sgn = np.sign(diff)
    nz = sgn != 0
    idx = np.nonzero(nz)[0]
    crossings = []
    for a, b in zip(idx[:-1], idx[1:]):
        if sgn[a] != sgn[b]:
            # linear estimate of the crossing radius
            ra, rb = grid[a], grid[b]
            crossings.append(float(ra - diff[a] * (rb - ra) / (diff[b] - diff[a])))
    tangent = False
    if len(diff) > 2:
        ad = np.abs(diff)
        local_min = (ad[1:-1] <= ad[:-2]) & (ad[1:-1] <= ad[2:]) & (ad[1:-1] < contact_tol)
        same_side = sgn[:-2] == sgn[2:]
        tangent = bool(np.any(local_min & same_side))
    return Intersections(len(crossings), (float(r_lo), float(r_hi)), tuple(crossings), tangent)
