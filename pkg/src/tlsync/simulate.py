"""Run controls and the standard simulation drivers.

A RunControls bundle fixes everything about a run except the physics:
duration, sampling, integrator settings, transient policy, and the FFT
window.  The transient default discards max(20/(g+ + g-), 40*pi/|omega0|)
or half the run, whichever is larger.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .flows import rhs_meanfield, rhs_twogroup
from .integrate import IntegratorControls, Trajectory, integrate
from .params import EnsembleParams, TwoGroupParams
from .spectral import dominant_frequency, order_parameter, spectrum

DEFAULT_M0 = np.array([-0.5, 0.4, 0.1])
# deliberately asymmetric pair so two-group runs never start on the
# exchange-symmetric manifold
DEFAULT_M0_PAIR = np.array([[-0.5, 0.4, 0.1], [0.4, -0.5, 0.1]])


@dataclass(frozen=True)
class RunControls:
    t_end: float
    dt_sample: float
    integrator: IntegratorControls = field(default_factory=IntegratorControls)
    transient_fraction: Optional[float] = None  # None = automatic policy
    window: str = "rectangular"

    def __post_init__(self):
        if self.t_end <= 0 or self.dt_sample <= 0:
            raise ValueError("t_end and dt_sample must be > 0")

    def with_(self, **kw) -> "RunControls":
        return replace(self, **kw)


def resolve_transient_fraction(run: RunControls, rate_sum: float,
                               omega0: float = 0.0) -> float:
    """Transient discard as a fraction of the run."""
    if run.transient_fraction is not None:
        return run.transient_fraction
    t_tr = 20.0 / rate_sum
    if omega0 != 0.0:
        t_tr = max(t_tr, 40.0 * math.pi / abs(omega0))
    return min(0.9, max(0.5, t_tr / run.t_end))


def simulate_ensemble(p: EnsembleParams, run: RunControls,
                      m0: np.ndarray | None = None) -> Trajectory:
    """Integrate the mean-field flow from m0 (default (-0.5, 0.4, 0.1))."""
    m0 = DEFAULT_M0 if m0 is None else np.asarray(m0, dtype=float)
    return integrate(lambda m: rhs_meanfield(m, p), m0, run.t_end,
                     run.dt_sample, run.integrator)


def simulate_two_group(p: TwoGroupParams, run: RunControls,
                       m0_pair: np.ndarray | None = None) -> Trajectory:
    """Integrate the coupled pair; trajectory samples have shape (n, 2, 3)."""
    m0 = DEFAULT_M0_PAIR if m0_pair is None else np.asarray(m0_pair, dtype=float)

    def rhs(y):
        dA, dB = rhs_twogroup(y[0], y[1], p)
        return np.stack([dA, dB])

    return integrate(rhs, m0, run.t_end, run.dt_sample, run.integrator)


def measure_frequency(traj: Trajectory, run: RunControls, rate_sum: float,
                      omega0: float = 0.0) -> tuple[float, float]:
    """Dominant signed frequency and the spectral resolution of the run."""
    frac = resolve_transient_fraction(run, rate_sum, omega0)
    s = spectrum(traj, frac, run.window)
    return dominant_frequency(s), s.resolution


def measure_order_parameter(traj: Trajectory, run: RunControls, rate_sum: float,
                            omega0: float = 0.0) -> float:
    frac = resolve_transient_fraction(run, rate_sum, omega0)
    return order_parameter(traj, frac)


def integrate_ensemble_cells(omega0, v, theta, gamma_plus, gamma_minus,
                             run: RunControls,
                             m0: np.ndarray | None = None) -> np.ndarray:
    """Fixed-step batch integration of independent mean-field cells.

    All parameters may be scalars or per-cell arrays (broadcast together).
    Returns raw samples of shape (n_samples, n_cells, 3); cells evolve
    elementwise, so results do not depend on batch grouping and a diverging
    cell poisons only itself.
    """
    from .flows import rhs_dissipative, rhs_driven, rhs_rotation
    from .integrate import rk4_accumulate

    omega0, v, theta, gp, gm = np.broadcast_arrays(
        np.atleast_1d(np.asarray(omega0, dtype=float)),
        np.atleast_1d(np.asarray(v, dtype=float)),
        np.atleast_1d(np.asarray(theta, dtype=float)),
        np.atleast_1d(np.asarray(gamma_plus, dtype=float)),
        np.atleast_1d(np.asarray(gamma_minus, dtype=float)))
    k = omega0.shape[0]
    start = DEFAULT_M0 if m0 is None else np.asarray(m0, dtype=float)
    y0 = np.broadcast_to(start, (k, 3)).copy()

    def rhs(y):
        return (rhs_rotation(y, omega0) + rhs_dissipative(y, gp, gm)
                + rhs_driven(y, y, v, theta))

    n_samples = int(np.floor(run.t_end / run.dt_sample + 1e-9)) + 1
    store = np.empty((n_samples, k, 3))

    def on_sample(i, _t, y):
        store[i] = y

    dt_step = run.integrator.dt_step or run.dt_sample / 16.0
    rk4_accumulate(rhs, y0, run.t_end, run.dt_sample, dt_step, on_sample)
    return store
