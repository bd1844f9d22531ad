"""Right-hand sides of the deterministic Bloch-vector flows.

All functions are pure, accept states of shape (..., 3), and broadcast over
leading axes, so the same code serves scalar integration and vectorized
parameter sweeps.  States are Bloch vectors m = (m_x, m_y, m_z).

The interaction flow at phase theta is

    dm_x =  V m_z (m_y cos t + m_x sin t)
    dm_y = -V m_z (m_x cos t - m_y sin t)
    dm_z = -V (m_x^2 + m_y^2) sin t

which is linear in (cos t, sin t):  f(theta) = cos t * f(0) + sin t * f(pi/2).
"""
from __future__ import annotations

import numpy as np

from .params import EnsembleParams, TwoGroupParams


def rhs_rotation(m: np.ndarray, omega0: float) -> np.ndarray:
    """Coherent precession about z at the bare frequency."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    out[..., 0] = -omega0 * m[..., 1]
    out[..., 1] = omega0 * m[..., 0]
    out[..., 2] = 0.0
    return out


def rhs_dissipative(m: np.ndarray, gamma_plus: float, gamma_minus: float) -> np.ndarray:
    """Local gain/damping flow: planar contraction plus z relaxation."""
    m = np.asarray(m, dtype=float)
    half = 0.5 * (gamma_plus + gamma_minus)
    out = np.empty_like(m)
    out[..., 0] = -half * m[..., 0]
    out[..., 1] = -half * m[..., 1]
    out[..., 2] = gamma_plus * (1.0 - m[..., 2]) - gamma_minus * (1.0 + m[..., 2])
    return out


def rhs_bare(m: np.ndarray, p: EnsembleParams) -> np.ndarray:
    """Non-interacting flow: rotation plus dissipation."""
    return rhs_rotation(m, p.omega0) + rhs_dissipative(m, p.gamma_plus, p.gamma_minus)


def rhs_driven(m: np.ndarray, n: np.ndarray, V: float, theta: float) -> np.ndarray:
    """Interaction flow of target m driven by the planar amplitude of n.

    The drive is the precession dm = w x m with w = V R(theta) (n_x, n_y, 0),
    R a planar rotation.  With n = m this is the self-consistent intra-ensemble
    interaction; with n the partner ensemble it is the cross-group drive.
    V and theta may be scalars or arrays broadcastable against the batch axes.
    """
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    ct = np.cos(theta)
    st = np.sin(theta)
    wx = V * (n[..., 0] * ct - n[..., 1] * st)
    wy = V * (n[..., 1] * ct + n[..., 0] * st)
    out = np.empty(np.broadcast(m, n).shape, dtype=float)
    out[..., 0] = wy * m[..., 2]
    out[..., 1] = -wx * m[..., 2]
    out[..., 2] = wx * m[..., 1] - wy * m[..., 0]
    return out


def rhs_interaction(m: np.ndarray, V: float, theta: float) -> np.ndarray:
    """Self-driven interaction flow (the ensemble drives itself)."""
    return rhs_driven(m, m, V, theta)


def rhs_meanfield(m: np.ndarray, p: EnsembleParams) -> np.ndarray:
    """Full nonlinear mean-field flow: bare + interaction."""
    return rhs_bare(m, p) + rhs_interaction(m, p.V, p.theta)


def rhs_twogroup(mA: np.ndarray, mB: np.ndarray,
                 p: TwoGroupParams) -> tuple[np.ndarray, np.ndarray]:
    """Coupled flows of two detuned groups in the common rotating frame.

    Each group sees its own bare term at +-delta/2, its intra-group drive, and
    the cross drive by the partner's planar amplitude at phase theta_AB.  The
    cross term is symmetric: both groups are driven at the same phase, which
    preserves the exchange symmetry of the ideal delta = 0 configuration.
    """
    dA = (rhs_rotation(mA, +0.5 * p.delta)
          + rhs_dissipative(mA, p.gamma_plus, p.gamma_minus)
          + rhs_driven(mA, mA, p.V_A, p.theta_A)
          + rhs_driven(mA, mB, p.V_AB, p.theta_AB))
    dB = (rhs_rotation(mB, -0.5 * p.delta)
          + rhs_dissipative(mB, p.gamma_plus, p.gamma_minus)
          + rhs_driven(mB, mB, p.V_B, p.theta_B)
          + rhs_driven(mB, mA, p.V_AB, p.theta_AB))
    return dA, dB


FLOW_COMPONENTS = ("rotation", "dissipation", "interaction", "bare",
                   "interaction+dissipation", "meanfield")


def component_flow(name: str, p: EnsembleParams):
    """Named sub-flow of the mean-field dynamics, as m -> dm/dt.

    Used by the flow-field exporter to render each contribution separately.
    """
    if name == "rotation":
        return lambda m: rhs_rotation(m, p.omega0)
    if name == "dissipation":
        return lambda m: rhs_dissipative(m, p.gamma_plus, p.gamma_minus)
    if name == "interaction":
        return lambda m: rhs_interaction(m, p.V, p.theta)
    if name == "bare":
        return lambda m: rhs_bare(m, p)
    if name == "interaction+dissipation":
        return lambda m: (rhs_interaction(m, p.V, p.theta)
                          + rhs_dissipative(m, p.gamma_plus, p.gamma_minus))
    if name == "meanfield":
        return lambda m: rhs_meanfield(m, p)
    raise ValueError(f"unknown flow component {name!r}; "
                     f"expected one of {FLOW_COMPONENTS}")


def sigma_plus(m: np.ndarray) -> np.ndarray:
    """Mean amplitude <sigma+> = (m_x + i m_y)/2 of a state array (..., 3)."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m[..., 0] + 1j * m[..., 1])
