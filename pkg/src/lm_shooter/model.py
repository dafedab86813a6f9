"""Closed-form scalar functions of the radial Lorentz-Minkowski problem.

The operator is ``div(grad u / sqrt(1 - |grad u|^2))`` with the pure power
nonlinearity ``f(u) = |u|^(p-1) u``.  Everything here is a pure function of
its arguments.

Most functions come in two flavours: one taking the slope magnitude ``rho``
(as in the analysis) and a ``*_w`` variant taking the reduced slope
``w = u' / sqrt(1 - u'^2)``.  The ``w`` forms never round ``rho`` to 1 and are
what the integrator and diagnostics use internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "CRITICAL_TOL",
    "DomainError",
    "Parameters",
    "Regime",
    "TrajectorySample",
    "critical_exponent",
    "delta_root",
    "eval_L",
    "eval_L_w",
    "eval_auxiliary",
    "eval_nonlinearity",
    "regime",
]

#: |p - (2* - 1)| below this counts as critical.
CRITICAL_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the domain of a closed-form function."""


class Regime(str, Enum):
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"


def critical_exponent(N: int) -> float:
    """Return the critical exponent ``(N + 2) / (N - 2)``."""
    if int(N) != N or N < 3:
        raise DomainError(f"dimension must be an integer >= 3, got {N!r}")
    return (N + 2) / (N - 2)


def regime(N: int, p: float, tol: float = CRITICAL_TOL) -> Regime:
    pc = critical_exponent(N)
    if abs(p - pc) < tol:
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if p < pc else Regime.SUPERCRITICAL


@dataclass(frozen=True)
class Parameters:
    """Problem instance: dimension ``N``, exponent ``p`` and initial value ``xi``."""

    N: int
    p: float
    xi: float

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 3:
            raise DomainError(f"N must be an integer >= 3, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not (math.isfinite(self.p) and self.p > 1):
            raise DomainError(f"p must be > 1, got {self.p!r}")
        if not (math.isfinite(self.xi) and self.xi > 0):
            raise DomainError(f"xi must be > 0, got {self.xi!r}")

    @property
    def critical(self) -> float:
        return critical_exponent(self.N)

    @property
    def regime(self) -> Regime:
        return regime(self.N, self.p)

    def with_xi(self, xi: float) -> "Parameters":
        return Parameters(self.N, self.p, xi)


@dataclass(frozen=True)
class TrajectorySample:
    """One integration node.

    ``M_partial`` is ``(N-1) * int_0^r rho Omega / s ds`` and ``E_resid`` the
    first-integral residual at ``r``.
    """

    r: float
    u: float
    w: float
    rho: float
    M_partial: float
    E_resid: float

    @property
    def up(self) -> float:
        return self.w / math.sqrt(1.0 + self.w * self.w)


def _check_rho(rho: float) -> None:
    if not (0.0 <= rho < 1.0):
        raise DomainError(f"rho must lie in [0, 1), got {rho!r}")


def eval_auxiliary(rho: float) -> dict[str, float]:
    """Return ``A``, ``Omega``, ``G`` and ``H`` at slope magnitude ``rho``.

    >>> eval_auxiliary(0.6)
    {'A': 1.25, 'Omega': 0.75, 'G': 0.19999999999999996, 'H': 0.25}
    """
    _check_rho(rho)
    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    A = 1.0 / s
    # rho^2 / (1 + s) avoids cancellation in 1 - s for small rho
    G = rho * rho / (1.0 + s)
    return {"A": A, "Omega": rho / s, "G": G, "H": G / s}


def aux_from_w(w: float) -> dict[str, float]:
    """Same quantities as :func:`eval_auxiliary`, from the reduced slope."""
    w2 = w * w
    A = math.sqrt(1.0 + w2)
    H = w2 / (A + 1.0)
    return {"A": A, "Omega": abs(w), "G": H / A, "H": H, "rho": abs(w) / A}


def eval_nonlinearity(u: float, p: float) -> dict[str, float]:
    """Return ``f(u)``, ``F(u)`` and ``K(u) = F(u) / f(u)``.

    ``K`` is ``nan`` at ``u = 0`` where the quotient is 0/0.
    """
    if not p > 1:
        raise DomainError(f"p must be > 1, got {p!r}")
    a = abs(u)
    f = math.copysign(a**p, u) if u != 0 else 0.0
    F = a ** (p + 1) / (p + 1)
    K = u / (p + 1) if u != 0 else math.nan
    return {"f": f, "F": F, "K": K}


def eval_L(rho: float, p: float, N: int) -> float:
    """Evaluate ``1/(p+1) - sqrt(1-rho^2)/(1+sqrt(1-rho^2)) + 1/N``.

    The value does not depend on ``u``.  Its sign is the sign of ``dP/dr``
    for the Pucci-Serrin function wherever ``rho > 0``.
    """
    _check_rho(rho)
    if not p > 1:
        raise DomainError(f"p must be > 1, got {p!r}")
    critical_exponent(N)
    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    return 1.0 / (p + 1) - s / (1.0 + s) + 1.0 / N


def eval_L_w(w: float, p: float, N: int) -> float:
    # s / (1 + s) with s = 1/sqrt(1+w^2) equals 1 / (sqrt(1+w^2) + 1)
    return 1.0 / (p + 1) - 1.0 / (np.sqrt(1.0 + w * w) + 1.0) + 1.0 / N


def delta_root(N: int, p: float) -> float:
    """Slope magnitude where ``L`` vanishes, for supercritical ``p``.

    Solved by a bracketing root find on ``eval_L`` over ``[0, 1)``.
    """
    from scipy.optimize import brentq

    if regime(N, p) is not Regime.SUPERCRITICAL:
        raise DomainError("L has a zero in (0, 1) only for supercritical p")
    # L(0) < 0 < L(1-) = 1/(p+1) + 1/N in the supercritical regime
    return brentq(eval_L, 0.0, 1.0 - 1e-15, args=(p, N), xtol=1e-15, rtol=1e-15)
