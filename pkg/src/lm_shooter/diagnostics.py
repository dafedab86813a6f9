"""Conserved and monotone quantities along computed trajectories."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .integrator import Trajectory
from .model import DomainError, Parameters, eval_auxiliary, eval_L, regime, Regime

__all__ = [
    "DiagnosticsReport",
    "JIntegral",
    "check_P_consistency",
    "diagnose",
    "eval_P",
    "eval_dPdr",
    "first_integral_residual",
    "integral_J",
    "P_series",
    "dPdr_series",
    "partial_trend",
]

#: relative decrease per decade that counts as divergence of a partial integral
TREND_FRACTION = 0.01


class PreconditionError(ValueError):
    pass


def first_integral_residual(traj: Trajectory) -> tuple[np.ndarray, np.ndarray, float]:
    """Return ``(r, E_resid, max |E_resid|)``.

    ``E_resid = H(rho) + M_partial + F(u) - F(xi)`` vanishes identically on
    exact solutions.
    """
    e = traj.E_resid
    return traj.r.copy(), e, float(np.max(np.abs(e)))


def eval_P(r: float, u: float, rho: float, params: Parameters) -> float:
    """Pucci-Serrin function ``r^N [H + F] - N r^(N-1) Omega K``.

    ``rho`` is taken as the slope magnitude of a decreasing solution
    (``u' = -rho``).  At ``u = 0`` the ``Omega K`` term is zero since
    ``K(u) = u / (p+1)``.
    """
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r!r}")
    aux = eval_auxiliary(rho)
    N, p = params.N, params.p
    F = abs(u) ** (p + 1) / (p + 1)
    K = u / (p + 1)
    return r**N * (aux["H"] + F) - N * r ** (N - 1) * aux["Omega"] * K


def eval_dPdr(r: float, rho: float, params: Parameters) -> float:
    """Closed form ``N r^(N-1) rho Omega(rho) L(rho)``."""
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r!r}")
    aux = eval_auxiliary(rho)
    N = params.N
    return N * r ** (N - 1) * rho * aux["Omega"] * eval_L(rho, params.p, N)


def _P_arrays(params: Parameters, r, u, w):
    # signed form: the Omega K term carries the sign of u'
    N, p = params.N, params.p
    a = np.sqrt(1.0 + w * w)
    H = w * w / (a + 1.0)
    F = np.abs(u) ** (p + 1) / (p + 1)
    return r**N * (H + F) + N * r ** (N - 1) * w * u / (p + 1)


def _dPdr_arrays(params: Parameters, r, w):
    N, p = params.N, params.p
    a = np.sqrt(1.0 + w * w)
    L = 1.0 / (p + 1) + 1.0 / N - 1.0 / (a + 1.0)
    return N * r ** (N - 1) * (w * w / a) * L


def P_series(traj: Trajectory) -> np.ndarray:
    return _P_arrays(traj.params, traj.r, traj.u, traj.w)


def dPdr_series(traj: Trajectory) -> np.ndarray:
    return _dPdr_arrays(traj.params, traj.r, traj.w)


def _before_first_zero(traj: Trajectory) -> np.ndarray:
    return traj.r < traj.first_zero


def check_P_consistency(traj: Trajectory) -> float:
    """Compare difference quotients of ``P`` against the closed-form ``dP/dr``.

    On each interval between consecutive nodes before the first zero, the
    quotient ``(P_{i+1} - P_i) / h`` is compared with the Simpson average of
    ``dP/dr`` over the endpoints and the midpoint (state at the midpoint from
    cubic Hermite interpolation).  Returns the largest discrepancy divided by
    ``max |P|`` over the same range.
    """
    mask = _before_first_zero(traj)
    if mask.sum() < 2:
        raise PreconditionError("need at least two nodes before the first zero")
    r = traj.r[mask]
    P = _P_arrays(traj.params, r, traj.u[mask], traj.w[mask])
    dP = _dPdr_arrays(traj.params, r, traj.w[mask])
    h = np.diff(r)
    quotient = np.diff(P) / h
    mid = 0.5 * (r[:-1] + r[1:])
    _, w_mid = traj.interpolate(mid)
    dP_mid = _dPdr_arrays(traj.params, mid, w_mid)
    simpson = (dP[:-1] + 4.0 * dP_mid + dP[1:]) / 6.0
    scale = float(np.max(np.abs(P)))
    if scale == 0.0:
        return float(np.max(np.abs(quotient - simpson)))
    return float(np.max(np.abs(quotient - simpson)) / scale)


def partial_trend(horizons: np.ndarray, partials: np.ndarray, fraction: float = TREND_FRACTION,
                  decades: int = 2) -> str:
    """Classify the tail of a monotone partial-integral sequence.

    ``horizons`` must be one decade apart.  Returns ``"diverging"`` when the
    magnitude grew by more than ``fraction`` in each of the last ``decades``
    decades, ``"converging"`` when it changed by less than that in each, and
    ``"undetermined"`` otherwise or when fewer decades are available.
    """
    if len(partials) < decades + 1:
        return "undetermined"
    tail = np.asarray(partials[-(decades + 1):], dtype=float)
    ref = np.maximum(np.abs(tail[:-1]), 1e-300)
    rel = np.abs(np.diff(tail)) / ref
    grows = np.abs(tail[1:]) > np.abs(tail[:-1])
    if np.all((rel > fraction) & grows):
        return "diverging"
    if np.all(rel <= fraction):
        return "converging"
    return "undetermined"


def decade_partials(traj: Trajectory, values: np.ndarray, r_min: float = 1.0):
    """Running integral ``values`` at ``10^k`` horizons inside the trajectory."""
    r_lo = max(r_min, traj.r[0])
    k0 = math.ceil(math.log10(r_lo) - 1e-12)
    k1 = math.floor(math.log10(traj.r[-1]) + 1e-12)
    if k1 < k0:
        return np.array([]), np.array([])
    horizons = 10.0 ** np.arange(k0, k1 + 1)
    horizons = horizons[horizons <= traj.r[-1] * (1 + 1e-12)]
    horizons = np.minimum(horizons, traj.r[-1])
    return horizons, np.interp(horizons, traj.r, values)


@dataclass(frozen=True)
class JIntegral:
    J_estimate: float
    diverging: bool
    trend: str
    horizons: tuple[float, ...] = ()
    partials: tuple[float, ...] = ()


def integral_J(traj: Trajectory, fraction: float = TREND_FRACTION) -> JIntegral:
    """Partial integrals of ``r^(N-1) rho Omega L`` with tail-trend analysis.

    The running integral is carried by the integrator.  A partial integral
    that keeps decreasing by more than ``fraction`` per decade over the last
    two decades is flagged as diverging (to minus infinity); a plateau at a
    finite value is not conclusive and reported as ``"undetermined"`` unless
    it sits at zero.
    """
    if len(traj.zeros):
        raise PreconditionError("J is only defined for ground-state candidates")
    if np.all(traj.w == 0.0):
        return JIntegral(0.0, False, "converging")
    horizons, partials = decade_partials(traj, traj.J)
    trend = partial_trend(horizons, partials, fraction)
    if trend == "converging":
        scale = float(np.max(np.abs(traj.J))) or 1.0
        if abs(partials[-1]) > fraction * scale:
            trend = "undetermined"
    return JIntegral(
        J_estimate=float(traj.J[-1]),
        diverging=trend == "diverging",
        trend=trend,
        horizons=tuple(float(x) for x in horizons),
        partials=tuple(float(x) for x in partials),
    )


@dataclass
class DiagnosticsReport:
    max_first_integral_residual: float
    P_series: list[tuple[float, float]]
    dPdr_series: list[tuple[float, float]]
    dPdr_sign_violations: dict
    M_total: float
    J_estimate: float | None
    J_diverging: bool | None
    J_trend: str
    max_H_observed: float
    F_xi: float = 0.0
    P_consistency: float | None = None
    extras: dict = field(default_factory=dict)

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), allow_nan=True, **kw)

    @classmethod
    def from_json(cls, text: str) -> "DiagnosticsReport":
        d = json.loads(text)
        d["P_series"] = [tuple(x) for x in d["P_series"]]
        d["dPdr_series"] = [tuple(x) for x in d["dPdr_series"]]
        return cls(**d)


def sign_violations(traj: Trajectory, tol: float = 1e-12) -> dict:
    """Nodes before ``R_0`` where ``dP/dr`` has the wrong sign for the regime.

    Subcritical: ``dP/dr`` must be ``>= -tol``.  Supercritical: only nodes
    with ``rho`` below the zero of ``L`` are constrained, to ``<= tol``.
    """
    from .model import delta_root

    mask = _before_first_zero(traj)
    r = traj.r[mask]
    d = _dPdr_arrays(traj.params, r, traj.w[mask])
    reg = regime(traj.params.N, traj.params.p)
    if reg is Regime.SUBCRITICAL:
        bad = d < -tol
    elif reg is Regime.SUPERCRITICAL:
        delta = delta_root(traj.params.N, traj.params.p)
        bad = (traj.rho[mask] <= delta) & (d > tol)
    else:
        bad = np.zeros_like(d, dtype=bool)
    return {"count": int(bad.sum()), "locations": [float(x) for x in r[bad]]}


def diagnose(traj: Trajectory, with_consistency: bool = True) -> DiagnosticsReport:
    """Collect every diagnostic of one trajectory into a report."""
    _, _, emax = first_integral_residual(traj)
    P = P_series(traj)
    dP = dPdr_series(traj)
    if len(traj.zeros) == 0:
        jres = integral_J(traj)
        J_est, J_div, J_trend = jres.J_estimate, jres.diverging, jres.trend
    else:
        J_est, J_div, J_trend = None, None, "not-applicable"
    consistency = None
    if with_consistency and _before_first_zero(traj).sum() >= 2:
        consistency = check_P_consistency(traj)
    return DiagnosticsReport(
        max_first_integral_residual=emax,
        P_series=[(float(a), float(b)) for a, b in zip(traj.r, P)],
        dPdr_series=[(float(a), float(b)) for a, b in zip(traj.r, dP)],
        dPdr_sign_violations=sign_violations(traj),
        M_total=traj.M_total,
        J_estimate=J_est,
        J_diverging=J_div,
        J_trend=J_trend,
        max_H_observed=float(np.max(traj.H)),
        F_xi=traj.F_xi,
        P_consistency=consistency,
    )
