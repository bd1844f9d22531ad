"""Mode runners: turn a resolved config into CSV (and optional SVG) files.

Sweep rows are computed in vectorized chunks submitted to a thread pool
sized by the parallelism hint and merged in grid order, so output bytes are
independent of the worker count.  Quick-look SVGs are always rendered from
the finished CSV, which also exercises the file round-trip.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .csvio import RowWriter
from .flows import component_flow, rhs_meanfield
from .integrate import Trajectory, integrate
from .oracle import PositivityBreach, evolve_exact, product_state
from .params import EnsembleParams
from .simulate import (integrate_ensemble_cells, resolve_transient_fraction,
                       simulate_ensemble, simulate_two_group)
from .spectral import (SYNC_ORDER_THRESHOLD, NoDominantLine, WindowTooShort,
                       dominant_frequency, order_parameter, spectrum)
from .stability import (DegeneratePhase, analytic_limit_cycle,
                        is_synchronized, jacobian_eigenvalues,
                        stability_report, synchronization_boundary)
from .sweepcfg import ResolvedConfig
from .twogroup import classify_cells, classify_trajectory
from . import svgplot

NAN = float("nan")


def _v_critical(theta: float, gamma_ratio: float) -> float:
    """Critical coupling in rate-sum units; inf when no finite boundary,
    nan for the degenerate pure-rotation phase."""
    try:
        vc = synchronization_boundary(theta, gamma_ratio)
    except DegeneratePhase:
        return NAN
    return float("inf") if vc is None else vc


def _stream_chunks(chunks, rows_done, compute, emit, parallelism):
    """Evaluate row chunks concurrently, emit rows strictly in grid order."""
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        futures = []
        for rows in chunks:
            if rows[-1] < rows_done:
                futures.append(None)
            else:
                futures.append(pool.submit(compute, rows))
        for rows, fut in zip(chunks, futures):
            if fut is None:
                continue
            result = fut.result()
            for local, ri in enumerate(rows):
                if ri < rows_done:
                    continue
                emit(ri, local, result)


def _chunk_rows(n_rows: int, cells_per_row: int, target_cells: int) -> list[list[int]]:
    per = max(1, target_cells // max(1, cells_per_row))
    return [list(range(i, min(i + per, n_rows)))
            for i in range(0, n_rows, per)]


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    """Read back an emitted CSV: (columns, data rows as strings)."""
    columns = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                continue
            if columns is None:
                columns = line.split(",")
            else:
                rows.append(line.split(","))
    if columns is None:
        raise ValueError(f"{path}: no column header found")
    return columns, rows


def _col(columns, rows, name, as_float=True):
    idx = columns.index(name)
    if as_float:
        return np.array([float(r[idx]) for r in rows])
    return [r[idx] for r in rows]


# --------------------------------------------------------------------------
# single-trajectory modes

def run_simulate(rc: ResolvedConfig) -> None:
    p = rc.ensemble_params()
    traj = simulate_ensemble(p, rc.run, rc.ensemble["m0"])
    frac = resolve_transient_fraction(rc.run, p.rate_sum, p.omega0)
    op = order_parameter(traj, frac)
    rep = stability_report(p)
    extra = {
        "order_parameter": op,
        "transient_fraction": frac,
        "synchronized_analytic": int(rep.synchronized),
        "v_critical": _v_critical(p.theta, p.gamma_ratio),
        "C_z": rep.limit_cycle.C_z if rep.limit_cycle else NAN,
        "r": rep.limit_cycle.r if rep.limit_cycle else NAN,
        "omega_sync": rep.limit_cycle.omega_sync if rep.limit_cycle else NAN,
        "delta_omega": rep.limit_cycle.delta_omega if rep.limit_cycle else NAN,
    }
    cols = ["t", "m_x", "m_y", "m_z", "re_sigma_plus", "im_sigma_plus",
            "abs_sigma_plus"]
    units = ["time"] + ["dimensionless"] * 6
    sig = traj.sigma_plus()
    lines = [
        (t, m[0], m[1], m[2], s.real, s.imag, abs(s))
        for t, m, s in zip(traj.times, traj.samples, sig)
    ]
    with RowWriter(rc.output.csv, rc.mode, rc.raw, cols, units,
                   lines_per_row=len(lines), extra=extra) as w:
        if w.rows_done == 0:
            w.write_row(lines)
    if rc.output.svg:
        columns, rows = read_csv(rc.output.csv)
        t = _col(columns, rows, "t")
        svgplot.line_plot(rc.output.svg, t,
                          [_col(columns, rows, "re_sigma_plus"),
                           _col(columns, rows, "abs_sigma_plus")],
                          ["Re<sigma+>", "|<sigma+>|"],
                          "mean amplitude", "t", "<sigma+>")


def run_flowfield(rc: ResolvedConfig) -> None:
    p = rc.ensemble_params()
    comp = rc.flowfield["component"]
    n = rc.flowfield["grid_points"]
    radius = rc.flowfield["radius"]
    f = component_flow(comp, p)
    cols = ["m_x", "m_y", "m_z", "dm_x", "dm_y", "dm_z"]
    units = ["dimensionless"] * 3 + ["1/time"] * 3
    polar = math.pi * (np.arange(n) + 0.5) / n
    azim = 2.0 * math.pi * np.arange(2 * n) / (2 * n)
    with RowWriter(rc.output.csv, rc.mode, rc.raw, cols, units,
                   lines_per_row=2 * n) as w:
        for i in range(w.rows_done, n):
            st, ct = math.sin(polar[i]), math.cos(polar[i])
            pts = np.stack([radius * st * np.cos(azim),
                            radius * st * np.sin(azim),
                            radius * ct * np.ones_like(azim)], axis=-1)
            d = f(pts)
            w.write_row([tuple(pt) + tuple(dv) for pt, dv in zip(pts, d)])
    if rc.output.trajectory_csv:
        traj = integrate(f, rc.ensemble["m0"], rc.run.t_end, rc.run.dt_sample,
                         rc.run.integrator)
        tcols = ["t", "m_x", "m_y", "m_z"]
        tunits = ["time"] + ["dimensionless"] * 3
        lines = [(t, m[0], m[1], m[2]) for t, m in zip(traj.times, traj.samples)]
        with RowWriter(rc.output.trajectory_csv, rc.mode, rc.raw, tcols, tunits,
                       lines_per_row=len(lines)) as w:
            if w.rows_done == 0:
                w.write_row(lines)
    if rc.output.svg and rc.output.trajectory_csv:
        columns, rows = read_csv(rc.output.trajectory_csv)
        svgplot.line_plot(rc.output.svg, _col(columns, rows, "m_x"),
                          [_col(columns, rows, "m_y")], ["trajectory"],
                          f"{comp} flow trajectory", "m_x", "m_y")


def run_two_group(rc: ResolvedConfig) -> None:
    p = rc.two_group_params()
    traj = simulate_two_group(p, rc.run, rc.two_group["m0_pair"])
    c = classify_trajectory(traj, rc.run, p.rate_sum)
    frac = resolve_transient_fraction(rc.run, p.rate_sum)
    extra = {
        "verdict": c.verdict,
        "omega_A": NAN if c.omega_A is None else c.omega_A,
        "omega_B": NAN if c.omega_B is None else c.omega_B,
        "freq_diff": NAN if c.delta_omega_AB is None else c.delta_omega_AB,
        "resolution": c.resolution,
        "order_parameter_A": order_parameter(traj.ensemble(0), frac),
        "order_parameter_B": order_parameter(traj.ensemble(1), frac),
        "transient_fraction": frac,
    }
    cols = ["t", "mA_x", "mA_y", "mA_z", "mB_x", "mB_y", "mB_z",
            "re_sigma_plus_A", "im_sigma_plus_A",
            "re_sigma_plus_B", "im_sigma_plus_B"]
    units = ["time"] + ["dimensionless"] * 10
    sa = traj.ensemble(0).sigma_plus()
    sb = traj.ensemble(1).sigma_plus()
    lines = [
        (t, m[0, 0], m[0, 1], m[0, 2], m[1, 0], m[1, 1], m[1, 2],
         a.real, a.imag, b.real, b.imag)
        for t, m, a, b in zip(traj.times, traj.samples, sa, sb)
    ]
    with RowWriter(rc.output.csv, rc.mode, rc.raw, cols, units,
                   lines_per_row=len(lines), extra=extra) as w:
        if w.rows_done == 0:
            w.write_row(lines)
    if rc.output.spectra_csv:
        spec_a = spectrum(traj.ensemble(0), frac, rc.run.window)
        spec_b = spectrum(traj.ensemble(1), frac, rc.run.window)
        scols = ["omega", "magnitude_A", "magnitude_B"]
        sunits = ["rad/time", "amplitude", "amplitude"]
        lines = list(zip(spec_a.omega_grid, spec_a.magnitudes,
                         spec_b.magnitudes))
        with RowWriter(rc.output.spectra_csv, rc.mode, rc.raw, scols, sunits,
                       lines_per_row=len(lines), extra=extra) as w:
            if w.rows_done == 0:
                w.write_row(lines)
    if rc.output.svg:
        columns, rows = read_csv(rc.output.csv)
        t = _col(columns, rows, "t")
        svgplot.line_plot(rc.output.svg, t,
                          [_col(columns, rows, "re_sigma_plus_A"),
                           _col(columns, rows, "re_sigma_plus_B")],
                          ["group A", "group B"],
                          f"two-group amplitudes ({c.verdict})", "t",
                          "Re<sigma+>")


# --------------------------------------------------------------------------
# sweep modes

def run_stability(rc: ResolvedConfig) -> None:
    ranged = sorted(rc.ranges)
    row_key = ranged[0] if ranged else None
    cell_key = ranged[1] if len(ranged) > 1 else None
    row_vals = rc.ranges[row_key] if row_key else np.array([NAN])
    cell_vals = rc.ranges[cell_key] if cell_key else np.array([NAN])
    cols = ["omega0", "v", "theta", "gamma_ratio", "gamma_plus", "gamma_minus",
            "m_z_fixed", "re_lambda_1", "im_lambda_1", "re_lambda_2",
            "im_lambda_2", "re_lambda_3", "im_lambda_3", "synchronized",
            "v_critical", "C_z", "r", "omega_sync", "delta_omega", "error"]
    units = (["rad/time", "rate", "rad", "ratio", "rate", "rate",
              "dimensionless"] + ["1/time"] * 6
             + ["flag", "rate", "dimensionless", "dimensionless",
                "rad/time", "rad/time", "code"])

    def line_for(overrides):
        p = rc.ensemble_params(**overrides)
        eig = jacobian_eigenvalues(p)
        rep = stability_report(p)
        cyc = rep.limit_cycle
        return (p.omega0, p.V, p.theta, p.gamma_ratio, p.gamma_plus,
                p.gamma_minus, rep.fixed_point[2],
                eig[0].real, eig[0].imag, eig[1].real, eig[1].imag,
                eig[2].real, eig[2].imag, int(rep.synchronized),
                _v_critical(p.theta, p.gamma_ratio),
                cyc.C_z if cyc else NAN, cyc.r if cyc else NAN,
                cyc.omega_sync if cyc else NAN,
                cyc.delta_omega if cyc else NAN, "")

    with RowWriter(rc.output.csv, rc.mode, rc.raw, cols, units,
                   lines_per_row=len(cell_vals)) as w:
        for i in range(w.rows_done, len(row_vals)):
            lines = []
            for j in range(len(cell_vals)):
                overrides = {}
                if row_key:
                    overrides[row_key] = float(row_vals[i])
                if cell_key:
                    overrides[cell_key] = float(cell_vals[j])
                lines.append(line_for(overrides))
            w.write_row(lines)
    if rc.output.svg and row_key:
        columns, rows = read_csv(rc.output.csv)
        re2 = _col(columns, rows, "re_lambda_2")
        if cell_key:
            z = re2.reshape(len(row_vals), len(cell_vals))
            svgplot.heatmap(rc.output.svg, cell_vals, row_vals, z,
                            "planar growth rate", cell_key, row_key,
                            log_y=rc.range_scales.get(row_key) == "log")
        else:
            svgplot.line_plot(rc.output.svg, row_vals, [re2],
                              ["Re lambda_2"], "planar growth rate",
                              row_key, "Re lambda")


def run_phase_diagram(rc: ResolvedConfig) -> None:
    ratios = rc.ranges["gamma_ratio"]
    vs = rc.ranges["v"]
    ny, nx = len(ratios), len(vs)
    omega0 = rc.ensemble["omega0"]
    theta = rc.ensemble["theta"]
    m0 = rc.ensemble["m0"]
    frac = resolve_transient_fraction(rc.run, 1.0, omega0)
    k0 = int(math.floor(frac * (int(rc.run.t_end / rc.run.dt_sample + 1e-9) + 1)))

    def compute(rows):
        ratio_block = np.repeat(ratios[rows], nx)
        gp = ratio_block / (1.0 + ratio_block)
        v_block = np.tile(vs, len(rows))
        store = integrate_ensemble_cells(omega0, v_block, theta, gp, 1.0 - gp,
                                         rc.run, m0)
        ops = np.full(len(v_block), NAN)
        errs = [""] * len(v_block)
        for c in range(len(v_block)):
            try:
                traj = Trajectory(0.0, rc.run.dt_sample, store[:, c])
                ops[c] = order_parameter(traj, frac)
            except (ValueError, WindowTooShort) as exc:
                errs[c] = type(exc).__name__
        return ops, errs

    cols = ["v", "gamma_ratio", "order_parameter", "synchronized_numeric",
            "synchronized_analytic", "v_critical", "error"]
    units = ["rate", "ratio", "dimensionless", "flag", "flag", "rate", "code"]
    with RowWriter(rc.output.csv, rc.mode, rc.raw, cols, units,
                   lines_per_row=nx) as w:
        def emit(ri, local, result):
            ops, errs = result
            ratio = float(ratios[ri])
            vc = _v_critical(theta, ratio)
            lines = []
            for j in range(nx):
                op = ops[local * nx + j]
                err = errs[local * nx + j]
                p = EnsembleParams.from_ratios(float(vs[j]), ratio, theta,
                                               omega0)
                lines.append((vs[j], ratio, op,
                              int(bool(op >= SYNC_ORDER_THRESHOLD)),
                              int(is_synchronized(p)), vc, err))
            w.write_row(lines)

        chunks = _chunk_rows(ny, nx, 512)
        _stream_chunks(chunks, w.rows_done, compute, emit,
                       rc.output.parallelism)
    if rc.output.svg:
        columns, rows = read_csv(rc.output.csv)
        z = _col(columns, rows, "order_parameter").reshape(ny, nx)
        svgplot.heatmap(rc.output.svg, vs, ratios, z, "order parameter",
                        "V/(g+ + g-)", "g+/g-",
                        log_y=rc.range_scales.get("gamma_ratio") == "log")


def run_freq_shift(rc: ResolvedConfig) -> None:
    thetas = rc.ranges["theta"]
    ratios = rc.ranges.get("gamma_ratio")
    row_vals = ratios if ratios is not None else np.array(
        [rc.ensemble["gamma_ratio"]])
    ny, nx = len(row_vals), len(thetas)
    omega0 = rc.ensemble["omega0"]
    v = rc.ensemble["v"]
    m0 = rc.ensemble["m0"]
    frac = resolve_transient_fraction(rc.run, 1.0, omega0)

    def compute(rows):
        ratio_block = np.repeat(row_vals[rows], nx)
        gp = ratio_block / (1.0 + ratio_block)
        theta_block = np.tile(thetas, len(rows))
        store = integrate_ensemble_cells(omega0, v, theta_block, gp, 1.0 - gp,
                                         rc.run, m0)
        out = []
        for c in range(store.shape[1]):
            try:
                traj = Trajectory(0.0, rc.run.dt_sample, store[:, c])
                op = order_parameter(traj, frac)
                if op < SYNC_ORDER_THRESHOLD:
                    out.append((0, NAN, NAN, ""))
                    continue
                s = spectrum(traj, frac, rc.run.window)
                try:
                    w_dom = dominant_frequency(s)
                    out.append((1, w_dom, s.resolution, ""))
                except NoDominantLine:
                    out.append((0, NAN, s.resolution, ""))
            except (ValueError, WindowTooShort) as exc:
                out.append((0, NAN, NAN, type(exc).__name__))
        return out

    cols = ["theta", "gamma_ratio", "synchronized_numeric",
            "synchronized_analytic", "omega_dominant", "delta_omega_measured",
            "delta_omega_analytic", "shift_ratio_measured",
            "shift_ratio_analytic", "resolution", "error"]
    units = ["rad", "ratio", "flag", "flag", "rad/time", "rad/time",
             "rad/time", "dimensionless", "dimensionless", "rad/time", "code"]
    with RowWriter(rc.output.csv, rc.mode, rc.raw, cols, units,
                   lines_per_row=nx) as w:
        def emit(ri, local, result):
            ratio = float(row_vals[ri])
            lines = []
            for j in range(nx):
                sync_num, w_dom, res, err = result[local * nx + j]
                th = float(thetas[j])
                p = EnsembleParams.from_ratios(v, ratio, th, omega0)
                sync_an = is_synchronized(p)
                if sync_an and math.sin(th) != 0.0:
                    dw_an = 0.5 * math.cos(th) / math.sin(th)
                else:
                    dw_an = NAN
                dw_meas = omega0 - w_dom if sync_num else NAN
                lines.append((th, ratio, sync_num, int(sync_an), w_dom,
                              dw_meas, dw_an,
                              dw_meas / v if sync_num else NAN,
                              dw_an / v if sync_an else NAN, res, err))
            w.write_row(lines)

        chunks = _chunk_rows(ny, nx, 256)
        _stream_chunks(chunks, w.rows_done, compute, emit,
                       rc.output.parallelism)
    if rc.output.svg:
        columns, rows = read_csv(rc.output.csv)
        z = _col(columns, rows, "shift_ratio_measured")
        if ny > 1:
            svgplot.heatmap(rc.output.svg, thetas, row_vals, z.reshape(ny, nx),
                            "frequency shift / V", "theta", "g+/g-",
                            log_y=rc.range_scales.get("gamma_ratio") == "log")
        else:
            svgplot.line_plot(rc.output.svg, thetas,
                              [z, _col(columns, rows, "shift_ratio_analytic")],
                              ["measured", "analytic"],
                              "frequency shift / V", "theta", "shift/V")


def _run_locking_grid(rc: ResolvedConfig, row_key: str, row_vals: np.ndarray,
                      first_col: str) -> None:
    deltas = rc.ranges["delta"]
    nd = len(deltas)
    # ranged quantities are injected per cell; placeholders keep the
    # constructor satisfied
    fillers = {"delta": 0.0}
    if "v_ab" in rc.ranges:
        fillers["v_ab"] = 0.0
    p = rc.two_group_params(**fillers)
    m0_pair = rc.two_group["m0_pair"]

    def compute(rows):
        k = len(rows)
        delta_block = np.tile(deltas, k)
        if row_key == "v_ab":
            vab_block = np.repeat(row_vals[rows], nd)
            theta_block = np.full(k * nd, p.theta_A)
        else:
            vab_block = np.full(k * nd, p.V_AB)
            theta_block = np.repeat(row_vals[rows], nd)
        return classify_cells(p, delta_block, vab_block, theta_block, rc.run,
                              m0_pair)

    cols = [first_col, "delta", "omega_A", "omega_B", "freq_diff", "verdict",
            "resolution", "error"]
    units = [("rate" if first_col == "v_ab" else "rad"), "rad/time",
             "rad/time", "rad/time", "rad/time", "class", "rad/time", "code"]
    with RowWriter(rc.output.csv, rc.mode, rc.raw, cols, units,
                   lines_per_row=nd) as w:
        def emit(ri, local, result):
            cells, errors = result
            lines = []
            for j in range(nd):
                c = cells[local * nd + j]
                err = errors[local * nd + j]
                if c is None:
                    lines.append((row_vals[ri], deltas[j], NAN, NAN, NAN, "",
                                  NAN, err))
                else:
                    lines.append((row_vals[ri], deltas[j],
                                  NAN if c.omega_A is None else c.omega_A,
                                  NAN if c.omega_B is None else c.omega_B,
                                  NAN if c.delta_omega_AB is None
                                  else c.delta_omega_AB,
                                  c.verdict, c.resolution, err))
            w.write_row(lines)

        chunks = _chunk_rows(len(row_vals), nd, 128)
        _stream_chunks(chunks, w.rows_done, compute, emit,
                       rc.output.parallelism)
    if rc.output.svg:
        columns, rows = read_csv(rc.output.csv)
        z = _col(columns, rows, "freq_diff")
        if len(row_vals) > 1:
            svgplot.heatmap(rc.output.svg, deltas, row_vals,
                            z.reshape(len(row_vals), nd),
                            "frequency difference", "delta", first_col)
        else:
            svgplot.line_plot(rc.output.svg, deltas, [z], ["omega_A-omega_B"],
                              "frequency difference", "delta", "rad/time")


def run_arnold(rc: ResolvedConfig) -> None:
    _run_locking_grid(rc, "v_ab", rc.ranges["v_ab"], "v_ab")


def run_phase_tuning(rc: ResolvedConfig) -> None:
    _run_locking_grid(rc, "theta_a", rc.two_group["theta_a_values"], "theta_a")


def run_oracle(rc: ResolvedConfig) -> None:
    n_values = rc.oracle["n_values"]
    n_max = rc.oracle["n_max"]
    p = rc.ensemble_params()
    m0 = rc.ensemble["m0"]
    run = rc.run
    n_samples = int(math.floor(run.t_end / run.dt_sample + 1e-9)) + 1
    mf = integrate(lambda m: rhs_meanfield(m, p), m0, run.t_end, run.dt_sample,
                   run.integrator)
    mf_sig = mf.sigma_plus()

    def compute(rows):
        out = []
        for ri in rows:
            n = n_values[ri]
            try:
                ex = evolve_exact(product_state(m0, n), p, n, run.t_end,
                                  run.dt_sample, run.integrator, n_max=n_max)
                out.append((ex, ""))
            except (PositivityBreach, RuntimeError) as exc:
                out.append((None, type(exc).__name__))
        return out

    cols = ["n_sites", "t", "re_sigma_plus_exact", "im_sigma_plus_exact",
            "re_sigma_plus_meanfield", "im_sigma_plus_meanfield", "deviation",
            "trace_error", "herm_error", "min_eigenvalue", "error"]
    units = (["count", "time"] + ["dimensionless"] * 5
             + ["dimensionless", "dimensionless", "dimensionless", "code"])
    with RowWriter(rc.output.csv, rc.mode, rc.raw, cols, units,
                   lines_per_row=n_samples) as w:
        def emit(ri, local, result):
            ex, err = result[local]
            n = n_values[ri]
            lines = []
            if ex is None:
                for k in range(n_samples):
                    lines.append((n, k * run.dt_sample, NAN, NAN, NAN, NAN,
                                  NAN, NAN, NAN, NAN, err if k == 0 else ""))
            else:
                avg = ex.mean_sigma_plus
                for k in range(n_samples):
                    dev = abs(avg[k] - mf_sig[k])
                    lines.append((n, float(ex.times[k]), avg[k].real,
                                  avg[k].imag, mf_sig[k].real, mf_sig[k].imag,
                                  dev, ex.trace_error[k], ex.herm_error[k],
                                  ex.min_eigenvalue[k], ""))
            w.write_row(lines)

        chunks = [[i] for i in range(len(n_values))]
        _stream_chunks(chunks, w.rows_done, compute, emit,
                       rc.output.parallelism)
    if rc.output.svg:
        columns, rows = read_csv(rc.output.csv)
        t = _col(columns, rows, "t").reshape(len(n_values), n_samples)
        dev = _col(columns, rows, "deviation").reshape(len(n_values), n_samples)
        svgplot.line_plot(rc.output.svg, t[0], list(dev),
                          [f"N={n}" for n in n_values],
                          "deviation from mean field", "t", "|<s+>_N - <s+>|")


_RUNNERS = {
    "simulate": run_simulate,
    "flowfield": run_flowfield,
    "stability": run_stability,
    "phase_diagram": run_phase_diagram,
    "freq_shift": run_freq_shift,
    "two_group": run_two_group,
    "arnold": run_arnold,
    "phase_tuning": run_phase_tuning,
    "oracle": run_oracle,
}


def run_config(rc: ResolvedConfig) -> None:
    """Execute a validated configuration, writing its output files."""
    _RUNNERS[rc.mode](rc)
