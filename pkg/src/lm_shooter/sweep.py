"""Initial-datum sweeps: classification maps, thresholds and certificates."""
from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .classify import ClassifyCriteria, Verdict, classify, count_intersections
from .decay import fit_tail_exponent
from .diagnostics import integral_J
from .integrator import IntegratorConfig, Trajectory, integrate
from .model import DomainError, Parameters, Regime, delta_root, regime

__all__ = [
    "CSV_HEADER",
    "Certificate",
    "SweepConfig",
    "SweepReport",
    "SweepRow",
    "ThresholdResult",
    "classify_xi",
    "default_horizon",
    "estimate_threshold",
    "geometric_grid",
    "run_sweep",
    "positivity_certificate",
]

CSV_HEADER = "xi,verdict,R0,n_zeros,max_rho,alpha_hat,J_trend,certified"
THREADS_ENV = "LM_SHOOTER_THREADS"


def geometric_grid(start: float, stop: float, num: int) -> list[float]:
    return [float(x) for x in np.geomspace(start, stop, num)]


def default_horizon(N: int, p: float, xi: float) -> float:
    """``max(100, 100 / xi^((p-1)/2))``: small data unfold on stretched radii."""
    return max(100.0, 100.0 / xi ** ((p - 1) / 2))


@dataclass(frozen=True)
class Certificate:
    max_rho: float
    delta_from_L: float
    certified: bool


def positivity_certificate(params: Parameters, traj: Trajectory | None = None,
                           cfg: IntegratorConfig | None = None) -> Certificate:
    """Sufficient condition for a ground state: ``sup rho`` below the zero of ``L``.

    Below that slope ``dP/dr < 0``, and since ``P`` starts at 0 and is
    nonnegative at a first zero, such a run cannot change sign.
    """
    if regime(params.N, params.p) is not Regime.SUPERCRITICAL:
        raise DomainError("the certificate needs supercritical p")
    delta = delta_root(params.N, params.p)
    if traj is None:
        cfg = cfg or IntegratorConfig(r_max=default_horizon(params.N, params.p, params.xi))
        traj = integrate(params, cfg)
    max_rho = float(np.max(traj.rho))
    return Certificate(max_rho, delta, bool(max_rho < delta and not traj.tripped))


@dataclass
class SweepRow:
    xi: float
    verdict: str
    R0: float | None = None
    n_zeros: int = 0
    max_rho: float | None = None
    alpha_hat: float | None = None
    J_trend: str | None = None
    certified: bool | None = None
    horizon: float | None = None
    tail_ratio: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class SweepConfig:
    """A list of initial data for fixed ``N`` and ``p``.

    ``horizon=None`` uses :func:`default_horizon`; an ``Undetermined`` row is
    re-integrated with the horizon multiplied by ``horizon_growth`` up to
    ``max_extensions`` times.
    """

    N: int
    p: float
    xi_grid: tuple[float, ...]
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    criteria: ClassifyCriteria = field(default_factory=ClassifyCriteria)
    horizon: float | None = None
    horizon_growth: float = 10.0
    max_extensions: int = 8
    intersection_checks: bool = False
    max_pairs: int = 4
    workers: int | None = None

    def __post_init__(self):
        Parameters(self.N, self.p, 1.0)
        grid = tuple(float(x) for x in self.xi_grid)
        object.__setattr__(self, "xi_grid", grid)
        if any(x <= 0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("xi_grid must be strictly increasing and positive")
        if self.horizon_growth <= 1 or self.max_extensions < 0:
            raise DomainError("horizon_growth must exceed 1 and max_extensions be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        d = dict(d)
        if "xi_grid" not in d:
            g = d.pop("xi_geometric")
            d["xi_grid"] = geometric_grid(g["start"], g["stop"], g["num"])
        else:
            d.pop("xi_geometric", None)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown sweep config keys: {sorted(unknown)}")
        if "integrator" in d:
            d["integrator"] = IntegratorConfig(**d["integrator"])
        if "criteria" in d:
            d["criteria"] = ClassifyCriteria(**d["criteria"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "SweepConfig":
        return cls.from_dict(json.loads(text))


def classify_xi(params: Parameters, cfg: IntegratorConfig | None = None,
                criteria: ClassifyCriteria | None = None, horizon: float | None = None,
                horizon_growth: float = 10.0, max_extensions: int = 8):
    """Integrate and classify one initial datum, extending the horizon while undetermined.

    Returns ``(classification, trajectory, horizons_tried)``.
    """
    cfg = cfg or IntegratorConfig()
    criteria = criteria or ClassifyCriteria()
    H = horizon if horizon is not None else default_horizon(params.N, params.p, params.xi)
    tried = []
    for _ in range(max_extensions + 1):
        traj = integrate(params, cfg.with_(r_max=H))
        tried.append(H)
        cls = classify(traj, criteria)
        if cls.verdict is not Verdict.UNDETERMINED or traj.tripped:
            break
        if traj.termination.value == "StepBudgetExhausted":
            break
        H *= horizon_growth
    return cls, traj, tried


def _row(params: Parameters, cfg: SweepConfig) -> SweepRow:
    try:
        cls, traj, tried = classify_xi(
            params, cfg.integrator, cfg.criteria, cfg.horizon, cfg.horizon_growth, cfg.max_extensions
        )
    except Exception as exc:  # recorded per row, never aborts the sweep
        return SweepRow(xi=params.xi, verdict=Verdict.UNDETERMINED.value, error=f"{type(exc).__name__}: {exc}")
    row = SweepRow(
        xi=params.xi,
        verdict=cls.verdict.value,
        n_zeros=len(cls.zeros),
        R0=cls.first_zero,
        max_rho=float(np.max(traj.rho)),
        horizon=float(traj.r[-1]),
        tail_ratio=float(traj.u[-1] / params.xi),
    )
    if traj.tripped:
        row.error = traj.reason
    if regime(params.N, params.p) is Regime.SUPERCRITICAL:
        row.certified = positivity_certificate(params, traj).certified
    if cls.verdict is Verdict.GROUND_STATE_CANDIDATE:
        r_end = float(traj.r[-1])
        fit = fit_tail_exponent(traj, (r_end / 100.0, r_end))
        row.alpha_hat = None if math.isnan(fit.alpha_hat) else fit.alpha_hat
        row.J_trend = integral_J(traj).trend
    return row


def _row_task(args):
    return _row(*args)


def _workers(requested: int | None) -> int:
    env = os.environ.get(THREADS_ENV)
    n = requested or (int(env) if env else (os.cpu_count() or 1))
    if env:
        n = min(n, int(env))
    return max(1, n)


@dataclass
class SweepReport:
    N: int
    p: float
    rows: list[SweepRow]
    empirical_boundary: dict
    intersection_checks: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in self.rows:
            vals = [row.xi, row.verdict, row.R0, row.n_zeros, row.max_rho, row.alpha_hat, row.J_trend, row.certified]
            buf.write(",".join(_csv_cell(v) for v in vals) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "SweepReport":
        d = json.loads(text)
        d["rows"] = [SweepRow(**r) for r in d["rows"]]
        return cls(**d)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _boundary(rows: list[SweepRow]) -> dict:
    gs = [r.xi for r in rows if r.verdict == Verdict.GROUND_STATE_CANDIDATE.value]
    sc = [r.xi for r in rows if r.verdict == Verdict.SIGN_CHANGING.value]
    return {
        "largest_ground_state_xi": max(gs) if gs else None,
        "smallest_sign_changing_xi": min(sc) if sc else None,
    }


def _intersection_checks(cfg: SweepConfig, rows: list[SweepRow]) -> list[dict]:
    gs = [r for r in rows if r.verdict == Verdict.GROUND_STATE_CANDIDATE.value and r.certified]
    sc = [r for r in rows if r.verdict == Verdict.SIGN_CHANGING.value]
    out = []
    for g in gs[: cfg.max_pairs]:
        tg = integrate(Parameters(cfg.N, cfg.p, g.xi), cfg.integrator.with_(r_max=g.horizon))
        for s in sc[: cfg.max_pairs]:
            ts = integrate(Parameters(cfg.N, cfg.p, s.xi), cfg.integrator.with_(r_max=s.horizon))
            res = count_intersections(tg, ts)
            out.append({
                "ground_state_xi": g.xi,
                "sign_changing_xi": s.xi,
                "precondition": s.xi < g.xi,
                "count": res.count,
                "tangency_suspected": res.tangency_suspected,
            })
    return out


def run_sweep(cfg: SweepConfig) -> SweepReport:
    """Integrate and classify every ``xi`` of the grid.

    Rows are independent and may run in worker processes; the report keeps
    the input order, so identical configurations give identical reports.
    """
    tasks = [(Parameters(cfg.N, cfg.p, xi), cfg) for xi in cfg.xi_grid]
    n = min(_workers(cfg.workers), max(len(tasks), 1))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            rows = list(ex.map(_row_task, tasks))
    else:
        rows = [_row(*t) for t in tasks]
    checks = _intersection_checks(cfg, rows) if cfg.intersection_checks else []
    return SweepReport(cfg.N, cfg.p, rows, _boundary(rows), checks)


@dataclass
class ThresholdResult:
    xi_lo: float
    xi_hi: float
    width: float
    iterations: int
    undetermined: list[float] = field(default_factory=list)
    non_monotone: bool = False
    probes: list[tuple[float, str]] = field(default_factory=list)

    @property
    def interval(self) -> tuple[float, float] | None:
        return None if self.non_monotone else (self.xi_lo, self.xi_hi)

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), **kw)


class BracketError(ValueError):
    pass


def estimate_threshold(N: int, p: float, bracket: tuple[float, float], iters: int = 20,
                       resolution: float = 0.0, cfg: IntegratorConfig | None = None,
                       criteria: ClassifyCriteria | None = None, n_probes: int = 0,
                       max_extensions: int = 8) -> ThresholdResult:
    """Bisect on the classification between a ground state and a sign-changing datum.

    ``bracket[0]`` must classify as a ground-state candidate and
    ``bracket[1]`` as sign-changing.  With ``n_probes > 0`` a geometric grid
    inside the bracket is classified first; a ground state above a
    sign-changing datum marks the result ``non_monotone`` and no threshold is
    reported.  An undetermined midpoint ends the bisection early.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise BracketError("bracket must satisfy 0 < xi_lo < xi_hi")

    def verdict(xi):
        c, _, _ = classify_xi(Parameters(N, p, xi), cfg, criteria, max_extensions=max_extensions)
        return c.verdict

    if verdict(lo) is not Verdict.GROUND_STATE_CANDIDATE:
        raise BracketError(f"xi_lo={lo} does not classify as a ground-state candidate")
    if verdict(hi) is not Verdict.SIGN_CHANGING:
        raise BracketError(f"xi_hi={hi} does not classify as sign-changing")

    result = ThresholdResult(lo, hi, hi - lo, 0)
    if n_probes > 0:
        grid = np.geomspace(lo, hi, n_probes + 2)[1:-1]
        seen_sc = False
        for xi in grid:
            v = verdict(float(xi))
            result.probes.append((float(xi), v.value))
            if v is Verdict.SIGN_CHANGING:
                seen_sc = True
                hi = min(hi, float(xi))
            elif v is Verdict.GROUND_STATE_CANDIDATE:
                if seen_sc:
                    result.non_monotone = True
                lo = max(lo, float(xi)) if not seen_sc else lo
            else:
                result.undetermined.append(float(xi))
        if result.non_monotone:
            result.xi_lo, result.xi_hi, result.width = lo, hi, hi - lo
            return result

    it = 0
    while it < iters and hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        v = verdict(mid)
        it += 1
        if v is Verdict.GROUND_STATE_CANDIDATE:
            lo = mid
        elif v is Verdict.SIGN_CHANGING:
            hi = mid
        else:
            result.undetermined.append(mid)
            break
    result.xi_lo, result.xi_hi, result.width, result.iterations = lo, hi, hi - lo, it
    return result
