"""Two-group orchestration: classification, detuning sweeps, Arnold tongue.

Grid sweeps integrate all requested cells in one vectorized fixed-step batch
(deterministic regardless of chunking), then classify each cell through the
same spectral pipeline used for single runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .flows import rhs_dissipative, rhs_driven, rhs_rotation
from .integrate import Trajectory, rk4_accumulate
from .params import TwoGroupParams
from .simulate import (DEFAULT_M0_PAIR, RunControls, resolve_transient_fraction,
                       simulate_two_group)
from .spectral import (SYNC_ORDER_THRESHOLD, NoDominantLine, WindowTooShort,
                       dominant_frequency, order_parameter, spectrum)


@dataclass(frozen=True)
class SyncClassification:
    """full: one shared dominant frequency; partial: two distinct ones;
    none: at least one group shows no dominant line."""

    verdict: str
    omega_A: Optional[float]
    omega_B: Optional[float]
    delta_omega_AB: Optional[float]
    resolution: float


def classify_trajectory(traj: Trajectory, run: RunControls, rate_sum: float,
                        op_threshold: float = SYNC_ORDER_THRESHOLD) -> SyncClassification:
    """Apply the full/partial/none rule to an already-computed pair trajectory."""
    frac = resolve_transient_fraction(run, rate_sum)
    freqs: list[Optional[float]] = []
    resolution = 0.0
    for i in (0, 1):
        sub = traj.ensemble(i)
        if order_parameter(sub, frac) < op_threshold:
            freqs.append(None)
            continue
        s = spectrum(sub, frac, run.window)
        resolution = s.resolution
        try:
            freqs.append(dominant_frequency(s))
        except NoDominantLine:
            freqs.append(None)
    if resolution == 0.0:
        resolution = spectrum(traj.ensemble(0), frac, run.window).resolution
    wa, wb = freqs
    if wa is None or wb is None:
        return SyncClassification("none", wa, wb, None, resolution)
    diff = wa - wb
    verdict = "full" if abs(diff) < resolution else "partial"
    return SyncClassification(verdict, wa, wb, diff, resolution)


def classify(p: TwoGroupParams, run: RunControls,
             m0_pair: np.ndarray | None = None,
             op_threshold: float = SYNC_ORDER_THRESHOLD) -> SyncClassification:
    """Integrate the coupled pair and classify its long-time state."""
    traj = simulate_two_group(p, run, m0_pair)
    return classify_trajectory(traj, run, p.rate_sum, op_threshold)


def _integrate_cells(p: TwoGroupParams, deltas, vabs, theta_as,
                     run: RunControls,
                     m0_pair: np.ndarray | None = None) -> np.ndarray:
    """Fixed-step batch integration with per-cell (delta, V_AB, theta_A).

    Returns raw samples of shape (n_samples, n_cells, 2, 3).  Cells evolve
    independently and elementwise, so the result is independent of how cells
    are grouped into batches, and a diverging cell poisons only itself.
    """
    deltas, vabs, theta_as = np.broadcast_arrays(
        np.atleast_1d(np.asarray(deltas, dtype=float)),
        np.atleast_1d(np.asarray(vabs, dtype=float)),
        np.atleast_1d(np.asarray(theta_as, dtype=float)))
    k = deltas.shape[0]
    m0 = DEFAULT_M0_PAIR if m0_pair is None else np.asarray(m0_pair, dtype=float)
    y0 = np.broadcast_to(m0, (k, 2, 3)).copy()
    gp, gm = p.gamma_plus, p.gamma_minus

    def rhs(y):
        a = y[:, 0, :]
        b = y[:, 1, :]
        dA = (rhs_rotation(a, +0.5 * deltas)
              + rhs_dissipative(a, gp, gm)
              + rhs_driven(a, a, p.V_A, theta_as)
              + rhs_driven(a, b, vabs, p.theta_AB))
        dB = (rhs_rotation(b, -0.5 * deltas)
              + rhs_dissipative(b, gp, gm)
              + rhs_driven(b, b, p.V_B, p.theta_B)
              + rhs_driven(b, a, vabs, p.theta_AB))
        return np.stack([dA, dB], axis=1)

    n_samples = int(np.floor(run.t_end / run.dt_sample + 1e-9)) + 1
    store = np.empty((n_samples, k, 2, 3))

    def on_sample(i, _t, y):
        store[i] = y

    dt_step = run.integrator.dt_step or run.dt_sample / 16.0
    rk4_accumulate(rhs, y0, run.t_end, run.dt_sample, dt_step, on_sample)
    return store


def simulate_cells(p: TwoGroupParams, deltas, vabs, theta_as,
                   run: RunControls,
                   m0_pair: np.ndarray | None = None) -> list[Trajectory]:
    """Batch variant of simulate_two_group, one trajectory per cell."""
    store = _integrate_cells(p, deltas, vabs, theta_as, run, m0_pair)
    return [Trajectory(0.0, run.dt_sample, store[:, j])
            for j in range(store.shape[1])]


def classify_cells(p: TwoGroupParams, deltas, vabs, theta_as,
                   run: RunControls, m0_pair: np.ndarray | None = None,
                   op_threshold: float = SYNC_ORDER_THRESHOLD,
                   ) -> tuple[list[Optional[SyncClassification]], list[str]]:
    """Batch classification; per-cell failures are reported, never raised."""
    store = _integrate_cells(p, deltas, vabs, theta_as, run, m0_pair)
    results: list[Optional[SyncClassification]] = []
    errors: list[str] = []
    for j in range(store.shape[1]):
        try:
            traj = Trajectory(0.0, run.dt_sample, store[:, j])
            results.append(classify_trajectory(traj, run, p.rate_sum,
                                               op_threshold))
            errors.append("")
        except (WindowTooShort, ValueError, RuntimeError) as exc:
            results.append(None)
            errors.append(type(exc).__name__)
    return results, errors


@dataclass(frozen=True)
class TongueGrid:
    """Frequency-difference map over (detuning, inter-group coupling)."""

    delta_grid: np.ndarray
    vab_grid: np.ndarray
    omega_A: np.ndarray       # (n_vab, n_delta)
    omega_B: np.ndarray
    freq_diff: np.ndarray
    verdict: np.ndarray       # strings: full | partial | none | ""
    error_code: np.ndarray    # exception type name, "" when clean
    resolution: float

    def locked_width(self, row: int) -> float:
        """Detuning extent of the contiguous locked run starting at the
        smallest detuning of the grid."""
        full = self.verdict[row] == "full"
        n = 0
        for flag in full:
            if not flag:
                break
            n += 1
        if n == 0:
            return 0.0
        return float(self.delta_grid[n - 1] - self.delta_grid[0])


def _fill(shape, cells, errors):
    wa = np.full(shape, np.nan)
    wb = np.full(shape, np.nan)
    diff = np.full(shape, np.nan)
    verdict = np.full(shape, "", dtype=object)
    err = np.full(shape, "", dtype=object)
    resolution = 0.0
    for idx in range(shape[0] * shape[1]):
        i, j = divmod(idx, shape[1])
        err[i, j] = errors[idx]
        c = cells[idx]
        if c is None:
            continue
        resolution = c.resolution
        verdict[i, j] = c.verdict
        wa[i, j] = np.nan if c.omega_A is None else c.omega_A
        wb[i, j] = np.nan if c.omega_B is None else c.omega_B
        diff[i, j] = np.nan if c.delta_omega_AB is None else c.delta_omega_AB
    return wa, wb, diff, verdict, err, resolution


def arnold_tongue(p_base: TwoGroupParams, delta_grid: Sequence[float],
                  vab_grid: Sequence[float], run: RunControls,
                  op_threshold: float = SYNC_ORDER_THRESHOLD) -> TongueGrid:
    """Classify every (delta, V_AB) cell; cell errors never abort the grid."""
    delta_grid = np.asarray(delta_grid, dtype=float)
    vab_grid = np.asarray(vab_grid, dtype=float)
    if len(delta_grid) == 0 or len(vab_grid) == 0:
        raise ValueError("grids must be non-empty")
    if np.any(np.diff(delta_grid) < 0) or np.any(np.diff(vab_grid) < 0):
        raise ValueError("grids must be sorted ascending")
    dmesh, vmesh = np.meshgrid(delta_grid, vab_grid)  # (nv, nd)
    cells, errors = classify_cells(p_base, dmesh.ravel(), vmesh.ravel(),
                                   p_base.theta_A, run,
                                   op_threshold=op_threshold)
    wa, wb, diff, verdict, err, resolution = _fill(dmesh.shape, cells, errors)
    return TongueGrid(delta_grid, vab_grid, wa, wb, diff, verdict, err,
                      resolution)


@dataclass(frozen=True)
class PhaseTuningScan:
    """Per-theta_A classification curves over detuning."""

    theta_A_values: np.ndarray
    delta_grid: np.ndarray
    omega_A: np.ndarray       # (n_theta, n_delta)
    omega_B: np.ndarray
    freq_diff: np.ndarray
    verdict: np.ndarray
    error_code: np.ndarray
    resolution: float

    def full_sync_window(self, row: int) -> tuple[float, float] | None:
        """Detuning interval of the widest contiguous fully locked stretch."""
        full = self.verdict[row] == "full"
        best = None
        start = None
        for j, flag in enumerate(list(full) + [False]):
            if flag and start is None:
                start = j
            elif not flag and start is not None:
                if best is None or (j - start) > (best[1] - best[0] + 1):
                    best = (start, j - 1)
                start = None
        if best is None:
            return None
        return float(self.delta_grid[best[0]]), float(self.delta_grid[best[1]])


def phase_tuning_scan(p_base: TwoGroupParams, theta_A_values: Sequence[float],
                      delta_grid: Sequence[float], run: RunControls,
                      op_threshold: float = SYNC_ORDER_THRESHOLD) -> PhaseTuningScan:
    """Sweep the group-A interaction phase and map the locking window."""
    theta_A_values = np.asarray(theta_A_values, dtype=float)
    delta_grid = np.asarray(delta_grid, dtype=float)
    if len(theta_A_values) == 0 or len(delta_grid) == 0:
        raise ValueError("grids must be non-empty")
    dmesh, tmesh = np.meshgrid(delta_grid, theta_A_values)  # (nt, nd)
    cells, errors = classify_cells(p_base, dmesh.ravel(), p_base.V_AB,
                                   tmesh.ravel(), run,
                                   op_threshold=op_threshold)
    wa, wb, diff, verdict, err, resolution = _fill(dmesh.shape, cells, errors)
    return PhaseTuningScan(theta_A_values, delta_grid, wa, wb, diff, verdict,
                           err, resolution)
