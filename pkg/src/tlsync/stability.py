"""Fixed point, linear stability, and the analytic limit cycle.

The dissipative fixed point sits on the z-axis; its Jacobian is block
diagonal (the z row and column decouple, and the planar block is a rotation
plus uniform growth/contraction), so the eigenvalues come in closed form and
no general eigensolver is needed.

Conventions: the system counts as synchronized only for a strictly positive
planar growth rate; exactly marginal points belong to the non-synchronized
set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import EnsembleParams


class DegeneratePhase(ValueError):
    """sin(theta) = 0: the interaction is a pure rotation and can never
    destabilize the fixed point, so no finite boundary exists."""


def fixed_point(p: EnsembleParams) -> np.ndarray:
    """Dissipative fixed point (0, 0, (g+ - g-)/(g+ + g-))."""
    return np.array([0.0, 0.0, (p.gamma_plus - p.gamma_minus) / p.rate_sum])


def planar_growth_rate(p: EnsembleParams) -> float:
    """Real part of the planar eigenvalue pair at the fixed point."""
    mzs = (p.gamma_plus - p.gamma_minus) / p.rate_sum
    return p.V * mzs * math.sin(p.theta) - 0.5 * p.rate_sum


def jacobian_at_fixed_point(p: EnsembleParams) -> np.ndarray:
    mzs = (p.gamma_plus - p.gamma_minus) / p.rate_sum
    a = p.V * mzs * math.sin(p.theta) - 0.5 * p.rate_sum
    c = p.V * mzs * math.cos(p.theta) - p.omega0
    return np.array([
        [a, c, 0.0],
        [-c, a, 0.0],
        [0.0, 0.0, -p.rate_sum],
    ])


def jacobian_eigenvalues(p: EnsembleParams) -> tuple[complex, complex, complex]:
    """Closed-form eigenvalues (lambda_1 real, lambda_2/3 a conjugate pair)."""
    mzs = (p.gamma_plus - p.gamma_minus) / p.rate_sum
    a = p.V * mzs * math.sin(p.theta) - 0.5 * p.rate_sum
    c = p.V * mzs * math.cos(p.theta) - p.omega0
    return (complex(-p.rate_sum, 0.0), complex(a, -c), complex(a, +c))


def is_synchronized(p: EnsembleParams) -> bool:
    return planar_growth_rate(p) > 0.0


def synchronization_boundary(theta: float, gamma_ratio: float) -> Optional[float]:
    """Critical coupling V_c in units of gamma_plus + gamma_minus.

    Returns None when no finite boundary exists (the fixed point stays stable
    for every V: sin(theta) and the fixed-point hemisphere have incompatible
    signs, or the fixed point sits on the equator).  Raises DegeneratePhase
    for sin(theta) = 0.
    """
    if math.sin(theta) == 0.0:
        raise DegeneratePhase("sin(theta) = 0: interaction is a pure rotation")
    if gamma_ratio < 0:
        raise ValueError("gamma_ratio must be >= 0")
    if math.isinf(gamma_ratio):
        mzs = 1.0
    else:
        mzs = (gamma_ratio - 1.0) / (gamma_ratio + 1.0)
    denom = 2.0 * mzs * math.sin(theta)
    if denom <= 0.0:
        return None
    return 1.0 / denom


@dataclass(frozen=True)
class LimitCycle:
    """Analytic limit cycle: plane height, radius, rotation frequency."""

    C_z: float
    r: float
    omega_sync: float
    delta_omega: float


def analytic_limit_cycle(p: EnsembleParams) -> Optional[LimitCycle]:
    """Self-consistent limit cycle of the mean-field flow, if one exists.

    Existence coincides exactly with the instability of the fixed point:
    the squared radius is r^2 = a * (g+ + g-) / (V sin theta)^2 with a the
    planar growth rate, positive iff a > 0.
    """
    s = math.sin(p.theta)
    if s == 0.0:
        raise DegeneratePhase("sin(theta) = 0: interaction is a pure rotation")
    a = planar_growth_rate(p)
    if a <= 0.0:
        return None
    G = p.rate_sum
    C_z = G / (2.0 * p.V * s)
    r = math.sqrt(a * G) / (p.V * abs(s))
    delta_omega = (math.cos(p.theta) / s) * 0.5 * G
    return LimitCycle(C_z=C_z, r=r, omega_sync=p.omega0 - delta_omega,
                      delta_omega=delta_omega)


@dataclass(frozen=True)
class StabilityReport:
    fixed_point: np.ndarray
    eigenvalues: tuple[complex, complex, complex]
    synchronized: bool
    limit_cycle: Optional[LimitCycle]
    note: str = ""


def stability_report(p: EnsembleParams) -> StabilityReport:
    """Aggregate fixed point, spectrum, verdict, and cycle parameters."""
    eig = jacobian_eigenvalues(p)
    sync = is_synchronized(p)
    try:
        cycle = analytic_limit_cycle(p)
        note = ""
    except DegeneratePhase as exc:
        cycle = None
        note = str(exc)
    return StabilityReport(fixed_point=fixed_point(p), eigenvalues=eig,
                           synchronized=sync, limit_cycle=cycle, note=note)
