"""Tail analysis of ground-state candidates."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .diagnostics import decade_partials, partial_trend
from .integrator import Trajectory
from .model import DomainError, Parameters, Regime, regime

__all__ = [
    "BAND_TOL",
    "DecayBand",
    "DecayFit",
    "DecayVerdict",
    "GradientEnergy",
    "bootstrap_exponents",
    "d12_proxy",
    "decay_band",
    "fit_power_law",
    "fit_tail_exponent",
    "tail_table",
]

BAND_TOL = 0.05
RESIDUAL_THRESHOLD = 1e-2


class DecayVerdict(str, Enum):
    IN_BAND = "InBand"
    D12_REGIME = "D12Regime"
    OUT_OF_BAND = "OutOfBand"
    INSUFFICIENT_TAIL = "InsufficientTail"


@dataclass(frozen=True)
class DecayBand:
    alpha_upper_exponent: float
    alpha_lower_exponent: float
    alpha_d12: float


def decay_band(params: Parameters) -> DecayBand:
    """Exponents of the decay alternatives for supercritical ``p``.

    ``alpha_upper_exponent = 2/(p-1)`` is the exponent of the upper bound on
    ``u``, ``alpha_lower_exponent = 2N/((N-1)(p+1) - 2N)`` that of the lower
    bound, and ``alpha_d12 = N - 2`` the decay of finite-energy solutions.
    Near criticality the lower exponent blows up; it is reported unclamped.
    """
    N, p = params.N, params.p
    if regime(N, p) is not Regime.SUPERCRITICAL:
        raise DomainError("decay bands are defined for supercritical p only")
    denom = (N - 1) * (p + 1) - 2 * N
    if not denom > 0:
        raise DomainError("(N-1)(p+1) must exceed 2N")
    return DecayBand(2.0 / (p - 1), 2.0 * N / denom, float(N - 2))


@dataclass
class DecayFit:
    alpha_hat: float
    window: tuple[float, float]
    residual: float
    band: tuple[float, float]
    verdict: DecayVerdict
    confidence: float = math.nan
    residual_flagged: bool = False
    n_points: int = 0

    def to_json(self, **kw) -> str:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return json.dumps(d, **kw)

    @classmethod
    def from_json(cls, text: str) -> "DecayFit":
        d = json.loads(text)
        d["verdict"] = DecayVerdict(d["verdict"])
        d["window"] = tuple(d["window"])
        d["band"] = tuple(d["band"])
        return cls(**d)


def fit_power_law(r, u) -> tuple[float, float, float]:
    """Least-squares decay exponent of ``u ~ c r^(-alpha)``.

    Returns ``(alpha, rms residual in log u, standard error of alpha)``.
    """
    x, y = np.log(np.asarray(r, float)), np.log(np.asarray(u, float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    n = len(x)
    se = float(np.sqrt(np.sum(resid**2) / max(n - 2, 1) / np.sum((x - x.mean()) ** 2))) if n > 2 else math.inf
    return float(-coef[0]), rms, se


def _log_grid(lo: float, hi: float, per_decade: int = 50) -> np.ndarray:
    n = max(int(round(per_decade * math.log10(hi / lo))), 2) + 1
    grid = np.logspace(math.log10(lo), math.log10(hi), n)
    grid[0], grid[-1] = lo, hi
    return grid


def tail_table(traj: Trajectory, window: tuple[float, float], per_decade: int = 50):
    """Log-uniform ``(log r, log u)`` samples of the tail, for export and fitting."""
    grid = _log_grid(*window, per_decade)
    u, _ = traj.interpolate(grid)
    return np.log(grid), np.log(u)


def fit_tail_exponent(traj: Trajectory, window: tuple[float, float], tol: float = BAND_TOL,
                      per_decade: int = 50, residual_threshold: float = RESIDUAL_THRESHOLD) -> DecayFit:
    """Fit ``log u`` against ``log r`` on log-uniform nodes inside ``window``.

    ``confidence`` is the half spread of the exponents fitted separately on
    the two halves of the window (in ``log r``), plus two standard errors.
    Windows shorter than one decade, outside the trajectory, or where
    ``u <= 0`` give ``InsufficientTail``.
    """
    lo, hi = float(window[0]), float(window[1])
    N, p = traj.params.N, traj.params.p
    try:
        b = decay_band(traj.params)
        band = (b.alpha_upper_exponent, b.alpha_lower_exponent)
        d12 = b.alpha_d12
    except DomainError:
        band, d12 = (math.nan, math.nan), float(N - 2)

    def insufficient(reason_window=(lo, hi)):
        return DecayFit(math.nan, reason_window, math.nan, band, DecayVerdict.INSUFFICIENT_TAIL)

    if not (lo > 0 and hi / lo >= 10.0 * (1 - 1e-12)):
        return insufficient()
    if lo < traj.r[0] or hi > traj.r[-1] * (1 + 1e-12):
        return insufficient()
    hi = min(hi, float(traj.r[-1]))
    grid = _log_grid(lo, hi, per_decade)
    u, _ = traj.interpolate(grid)
    if not np.all(np.isfinite(u)) or np.any(u <= 0):
        return insufficient()
    alpha, rms, se = fit_power_law(grid, u)
    mid = len(grid) // 2
    a1, _, _ = fit_power_law(grid[: mid + 1], u[: mid + 1])
    a2, _, _ = fit_power_law(grid[mid:], u[mid:])
    conf = 0.5 * abs(a1 - a2) + 2.0 * se

    if band[0] - tol <= alpha <= band[1] + tol:
        verdict = DecayVerdict.IN_BAND
    elif abs(alpha - d12) <= tol:
        verdict = DecayVerdict.D12_REGIME
    else:
        verdict = DecayVerdict.OUT_OF_BAND
    return DecayFit(
        alpha_hat=alpha,
        window=(lo, hi),
        residual=rms,
        band=band,
        verdict=verdict,
        confidence=conf,
        residual_flagged=rms > residual_threshold,
        n_points=len(grid),
    )


@dataclass(frozen=True)
class GradientEnergy:
    horizons: tuple[float, ...]
    partials: tuple[float, ...]
    converging: bool | None
    trend: str


def d12_proxy(traj: Trajectory) -> GradientEnergy:
    """Partial integrals of ``r^(N-1) rho Omega`` at decade horizons.

    ``converging`` is True on a plateau, False when the partials keep growing by
    more than 1% per decade, and None when fewer than two decades are
    available or the trend is mixed.
    """
    horizons, partials = decade_partials(traj, traj.D)
    trend = partial_trend(horizons, partials)
    conv = {"converging": True, "diverging": False}.get(trend)
    return GradientEnergy(tuple(map(float, horizons)), tuple(map(float, partials)), conv, trend)


def bootstrap_exponents(alpha: float, p: float, N: int, max_iter: int = 200) -> tuple[list[float], bool]:
    """Iterate the decay improvement ``alpha -> alpha p - 2``.

    Stops once the exponent exceeds ``N / p``.  Returns the sequence and
    whether it diverged upward; it does iff ``alpha > 2/(p-1)``.
    """
    seq = [alpha]
    a = alpha
    for _ in range(max_iter):
        if a > N / p:
            return seq, True
        a = a * p - 2.0
        seq.append(a)
        if a < -1e6:
            break
    return seq, a > N / p
