"""Time integration of the Bloch flows.

Two modes behind one interface: an adaptive embedded Runge-Kutta 4(5)
(scipy's RK45) with tight default tolerances, and a fixed-step classical RK4
for bit-reproducible sweeps.  Flows are autonomous; rhs callables map a state
array to its time derivative, preserving shape.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

NORM_SLACK = 1e-6  # integration slack on the unit-ball invariant


class StepFailure(RuntimeError):
    """Adaptive controller could not meet tolerance above the minimum step."""


@dataclass(frozen=True)
class IntegratorControls:
    method: str = "rk45"        # "rk45" (adaptive) or "rk4" (fixed step)
    rtol: float = 1e-9
    atol: float = 1e-9
    dt_step: Optional[float] = None   # fixed-step size; defaults to dt_sample/16
    max_step: Optional[float] = None  # optional cap for the adaptive controller

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError("method must be 'rk45' or 'rk4'")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled time series of one or two Bloch vectors.

    samples has shape (n, 3) for a single ensemble or (n, 2, 3) for a pair;
    sample k sits at time t0 + k * dt_sample.
    """

    t0: float
    dt_sample: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim not in (2, 3) or s.shape[-1] != 3 or s.shape[0] == 0:
            raise ValueError("samples must be non-empty with shape (n,3) or (n,2,3)")
        if self.dt_sample <= 0:
            raise ValueError("dt_sample must be > 0")
        norms2 = np.sum(s * s, axis=-1)
        worst = float(np.max(norms2))
        if worst > 1.0 + 3.0 * NORM_SLACK:
            raise ValueError(f"trajectory exits the unit ball: max |m|^2 = {worst}")
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt_sample * np.arange(len(self))

    @property
    def n_ensembles(self) -> int:
        return 1 if self.samples.ndim == 2 else self.samples.shape[1]

    def ensemble(self, i: int) -> "Trajectory":
        """Single-ensemble view of a two-ensemble trajectory."""
        if self.samples.ndim == 2:
            if i != 0:
                raise IndexError("single-ensemble trajectory has only index 0")
            return self
        return Trajectory(self.t0, self.dt_sample, self.samples[:, i, :])

    def sigma_plus(self) -> np.ndarray:
        """Complex series <sigma+>(t); shape (n,) or (n, 2)."""
        return 0.5 * (self.samples[..., 0] + 1j * self.samples[..., 1])

    def in_rotating_frame(self, offset: float) -> "Trajectory":
        """Re-express the trajectory with planar phases advanced by offset*t.

        A pure gauge change: <sigma+> picks up e^{i offset t}, norms and m_z
        are untouched.  Used to move spectral carriers away from the
        transform's mean bin before peak measurement.
        """
        if offset == 0.0:
            return self
        ang = offset * self.times
        c, s = np.cos(ang), np.sin(ang)
        while c.ndim < self.samples.ndim - 1:
            c = c[:, None]
            s = s[:, None]
        out = self.samples.copy()
        out[..., 0] = c * self.samples[..., 0] - s * self.samples[..., 1]
        out[..., 1] = s * self.samples[..., 0] + c * self.samples[..., 1]
        return Trajectory(self.t0, self.dt_sample, out)


def _sample_times(t_end: float, dt_sample: float) -> np.ndarray:
    n = int(np.floor(t_end / dt_sample + 1e-9)) + 1
    return dt_sample * np.arange(n)


def integrate(rhs: Callable[[np.ndarray], np.ndarray], m0: np.ndarray,
              t_end: float, dt_sample: float,
              controls: IntegratorControls | None = None) -> Trajectory:
    """Integrate dm/dt = rhs(m) from t=0 to t_end, sampling every dt_sample.

    m0 may be a single Bloch vector (3,) or a stacked pair (2, 3); the state
    shape is preserved.  Raises StepFailure when the adaptive controller gives
    up (pathological parameters).
    """
    if t_end <= 0 or dt_sample <= 0:
        raise ValueError("t_end and dt_sample must be > 0")
    controls = controls or IntegratorControls()
    y0 = np.asarray(m0, dtype=float)
    shape = y0.shape
    if np.max(np.sum(y0.reshape(-1, 3) ** 2, axis=-1)) > 1.0 + NORM_SLACK:
        raise ValueError("initial state lies outside the unit ball")
    ts = _sample_times(t_end, dt_sample)

    if controls.method == "rk4":
        dt = controls.dt_step if controls.dt_step is not None else dt_sample / 16.0
        samples = rk4_sampled(rhs, y0, ts, dt)
    else:
        def f(_t, y):
            return rhs(y.reshape(shape)).ravel()

        kw = {}
        if controls.max_step is not None:
            kw["max_step"] = controls.max_step
        sol = solve_ivp(f, (0.0, float(ts[-1] if len(ts) > 1 else t_end)),
                        y0.ravel(), method="RK45", t_eval=ts,
                        rtol=controls.rtol, atol=controls.atol, **kw)
        if sol.status == -1:
            raise StepFailure(sol.message)
        samples = sol.y.T.reshape((len(ts),) + shape)

    return Trajectory(t0=0.0, dt_sample=dt_sample, samples=samples)


def rk4_sampled(rhs, y0: np.ndarray, sample_times: np.ndarray,
                dt_step: float) -> np.ndarray:
    """Fixed-step RK4, returning the state at each requested sample time.

    Substeps are sized so samples land exactly on step boundaries, keeping the
    arithmetic (and hence the output bytes) independent of how the caller
    chunks the work.
    """
    y = np.array(y0, dtype=float)
    out = np.empty((len(sample_times),) + y.shape, dtype=float)
    out[0] = y
    for k in range(1, len(sample_times)):
        span = float(sample_times[k] - sample_times[k - 1])
        nsub = max(1, int(np.ceil(span / dt_step - 1e-12)))
        h = span / nsub
        for _ in range(nsub):
            y = rk4_step(rhs, y, h)
        out[k] = y
    return out


def rk4_step(rhs, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_accumulate(rhs, y0: np.ndarray, t_end: float, dt_sample: float,
                   dt_step: float, on_sample) -> np.ndarray:
    """Memory-light fixed-step driver for vectorized batches.

    y0 may carry arbitrary leading batch axes; on_sample(k, t, y) is called at
    every sample time (including t = 0).  Returns the final state.
    """
    ts = _sample_times(t_end, dt_sample)
    y = np.array(y0, dtype=float)
    on_sample(0, 0.0, y)
    for k in range(1, len(ts)):
        span = float(ts[k] - ts[k - 1])
        nsub = max(1, int(np.ceil(span / dt_step - 1e-12)))
        h = span / nsub
        for _ in range(nsub):
            y = rk4_step(rhs, y, h)
        on_sample(k, float(ts[k]), y)
    return y
