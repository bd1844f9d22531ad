"""Sweep configuration: strict nested key-value (TOML) files.

Unknown keys are hard errors with their full dotted path, so a typo can
never silently fall back to a default.  Any rangeable scalar may be replaced
by a table {min, max, count, scale}; at most two parameters of a sweep may
be ranged.  Angles accept numbers or strings like "pi/2", "-3pi/4", "0.5pi".

All rates are in units of gamma_plus + gamma_minus = 1 unless one of the
alternative spellings (*_over_gamma_plus, v_over_vab) is used; those are
converted at load time and echoed verbatim in output headers.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .integrate import IntegratorControls
from .params import EnsembleParams, TwoGroupParams
from .simulate import DEFAULT_M0, DEFAULT_M0_PAIR, RunControls

MODES = ("simulate", "flowfield", "stability", "phase_diagram", "freq_shift",
         "two_group", "arnold", "phase_tuning", "oracle")

FLOW_COMPONENT_CHOICES = ("rotation", "dissipation", "interaction", "bare",
                          "interaction+dissipation", "meanfield")


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending field path."""


_PI_RE = re.compile(r"^([+-]?)(\d+(?:\.\d+)?)?\*?pi(?:/(\d+(?:\.\d+)?))?$")


def parse_angle(value: Any, path: str) -> float:
    """Accept a number or a 'pi' expression string."""
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected an angle, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value.replace(" ", ""))
        if m:
            sign = -1.0 if m.group(1) == "-" else 1.0
            coef = float(m.group(2)) if m.group(2) else 1.0
            den = float(m.group(3)) if m.group(3) else 1.0
            if den == 0:
                raise ConfigError(f"{path}: division by zero in angle")
            return sign * coef * math.pi / den
        raise ConfigError(f"{path}: cannot parse angle {value!r}")
    raise ConfigError(f"{path}: expected number or pi-string, got {type(value).__name__}")


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {type(value).__name__}")
    return float(value)


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {type(value).__name__}")
    return value


def _as_str(value: Any, path: str, choices=None) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {type(value).__name__}")
    if choices is not None and value not in choices:
        raise ConfigError(f"{path}: {value!r} not one of {list(choices)}")
    return value


def _as_vec3(value: Any, path: str) -> np.ndarray:
    if (not isinstance(value, list) or len(value) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in value)):
        raise ConfigError(f"{path}: expected a list of 3 numbers")
    v = np.array(value, dtype=float)
    if float(v @ v) > 1.0 + 1e-9:
        raise ConfigError(f"{path}: initial state lies outside the unit ball")
    return v


@dataclass(frozen=True)
class Range:
    lo: float
    hi: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.lo), math.log10(self.hi), self.count)
        return np.linspace(self.lo, self.hi, self.count)


def _parse_range(tbl: Mapping, path: str) -> Range:
    unknown = set(tbl) - {"min", "max", "count", "scale"}
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown key")
    for req in ("min", "max", "count"):
        if req not in tbl:
            raise ConfigError(f"{path}: range table needs '{req}'")
    lo = _as_float(tbl["min"], f"{path}.min")
    hi = _as_float(tbl["max"], f"{path}.max")
    count = _as_int(tbl["count"], f"{path}.count")
    scale = _as_str(tbl.get("scale", "linear"), f"{path}.scale",
                    ("linear", "log"))
    if count < 2:
        raise ConfigError(f"{path}.count: need at least 2 points")
    if not lo < hi:
        raise ConfigError(f"{path}: degenerate range (min must be < max)")
    if scale == "log" and lo <= 0:
        raise ConfigError(f"{path}: log scale needs min > 0")
    return Range(lo, hi, count, scale)


def _scalar_or_range(value: Any, path: str, angle: bool = False):
    if isinstance(value, Mapping):
        return _parse_range(value, path)
    return parse_angle(value, path) if angle else _as_float(value, path)


def _check_keys(tbl: Mapping, path: str, allowed) -> None:
    for key in tbl:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")


@dataclass
class OutputSpec:
    csv: str
    svg: Optional[str] = None
    spectra_csv: Optional[str] = None
    trajectory_csv: Optional[str] = None
    parallelism: int = 1


# per-mode run-control defaults, in gamma_plus + gamma_minus = 1 units
_RUN_DEFAULTS = {
    "simulate": dict(t_end=150.0, dt_sample=0.05, method="rk45"),
    "flowfield": dict(t_end=60.0, dt_sample=0.05, method="rk45"),
    "stability": dict(t_end=1.0, dt_sample=0.5, method="rk45"),
    "phase_diagram": dict(t_end=600.0, dt_sample=0.25, method="rk4",
                          dt_step=0.02, transient_fraction=0.5),
    "freq_shift": dict(t_end=360.0, dt_sample=0.08, method="rk4",
                       dt_step=0.005, transient_fraction=0.5),
    "two_group": dict(t_end=400.0, dt_sample=0.1, method="rk45",
                      transient_fraction=0.5),
    "arnold": dict(t_end=1600.0, dt_sample=0.2, method="rk4", dt_step=0.01,
                   transient_fraction=0.6),
    "phase_tuning": dict(t_end=1600.0, dt_sample=0.2, method="rk4",
                         dt_step=0.01, transient_fraction=0.6),
    "oracle": dict(t_end=5.0, dt_sample=0.05, method="rk45"),
}

_ENSEMBLE_MODES = ("simulate", "flowfield", "stability", "phase_diagram",
                   "freq_shift", "oracle")
_TWOGROUP_MODES = ("two_group", "arnold", "phase_tuning")

# which canonical ensemble keys may be ranged, per mode
_RANGEABLE = {
    "simulate": frozenset(),
    "flowfield": frozenset(),
    "oracle": frozenset(),
    "stability": frozenset({"v", "gamma_ratio", "theta", "omega0"}),
    "phase_diagram": frozenset({"v", "gamma_ratio"}),
    "freq_shift": frozenset({"theta", "gamma_ratio"}),
    "two_group": frozenset(),
    "arnold": frozenset({"delta", "v_ab"}),
    "phase_tuning": frozenset({"delta"}),
}
_REQUIRED_RANGES = {
    "phase_diagram": frozenset({"v", "gamma_ratio"}),
    "freq_shift": frozenset({"theta"}),
    "arnold": frozenset({"delta", "v_ab"}),
    "phase_tuning": frozenset({"delta"}),
}


@dataclass
class ResolvedConfig:
    """Validated configuration with canonical units and typed accessors."""

    mode: str
    raw: dict
    run: RunControls
    output: OutputSpec
    ensemble: dict = field(default_factory=dict)    # canonical scalars
    ranges: dict = field(default_factory=dict)      # canonical key -> ndarray
    range_scales: dict = field(default_factory=dict)  # canonical key -> scale
    two_group: dict = field(default_factory=dict)
    flowfield: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)

    def ensemble_params(self, **overrides) -> EnsembleParams:
        vals = dict(self.ensemble)
        vals.update(overrides)
        if "gamma_plus" in vals:
            return EnsembleParams(omega0=vals["omega0"], V=vals["v"],
                                  theta=vals["theta"],
                                  gamma_plus=vals["gamma_plus"],
                                  gamma_minus=vals["gamma_minus"])
        return EnsembleParams.from_ratios(v=vals["v"],
                                          gamma_ratio=vals["gamma_ratio"],
                                          theta=vals["theta"],
                                          omega0=vals["omega0"])

    def two_group_params(self, **overrides) -> TwoGroupParams:
        vals = dict(self.two_group)
        vals.update(overrides)
        return TwoGroupParams.from_ratios(
            delta=vals["delta"], v_a=vals["v_a"], v_b=vals["v_b"],
            v_ab=vals["v_ab"], theta_a=vals["theta_a"], theta_b=vals["theta_b"],
            theta_ab=vals["theta_ab"], gamma_ratio=vals["gamma_ratio"])


def _resolve_run(tbl: Mapping, mode: str, path: str = "run") -> RunControls:
    allowed = {"t_end", "dt_sample", "method", "dt_step", "rtol", "atol",
               "max_step", "transient_fraction", "window"}
    _check_keys(tbl, path, allowed)
    vals = dict(_RUN_DEFAULTS[mode])
    vals.update(tbl)
    method = _as_str(vals.get("method", "rk45"), f"{path}.method",
                     ("rk45", "rk4"))
    ic = IntegratorControls(
        method=method,
        rtol=_as_float(vals.get("rtol", 1e-9), f"{path}.rtol"),
        atol=_as_float(vals.get("atol", 1e-9), f"{path}.atol"),
        dt_step=(_as_float(vals["dt_step"], f"{path}.dt_step")
                 if "dt_step" in vals else None),
        max_step=(_as_float(vals["max_step"], f"{path}.max_step")
                  if "max_step" in vals else None),
    )
    tf = vals.get("transient_fraction")
    if tf is not None:
        tf = _as_float(tf, f"{path}.transient_fraction")
        if not 0.0 <= tf < 1.0:
            raise ConfigError(f"{path}.transient_fraction: must lie in [0, 1)")
    window = _as_str(vals.get("window", "rectangular"), f"{path}.window",
                     ("rectangular", "hann"))
    t_end = _as_float(vals["t_end"], f"{path}.t_end")
    dt_sample = _as_float(vals["dt_sample"], f"{path}.dt_sample")
    if t_end <= 0 or dt_sample <= 0:
        raise ConfigError(f"{path}: t_end and dt_sample must be > 0")
    return RunControls(t_end=t_end, dt_sample=dt_sample, integrator=ic,
                       transient_fraction=tf, window=window)


def _resolve_output(tbl: Mapping, mode: str, path: str = "output") -> OutputSpec:
    allowed = {"csv", "svg", "parallelism"}
    if mode == "two_group":
        allowed.add("spectra_csv")
    if mode == "flowfield":
        allowed.add("trajectory_csv")
    _check_keys(tbl, path, allowed)
    if "csv" not in tbl:
        raise ConfigError(f"{path}.csv: required")
    par = _as_int(tbl.get("parallelism", 1), f"{path}.parallelism")
    if par < 1:
        raise ConfigError(f"{path}.parallelism: must be >= 1")
    return OutputSpec(
        csv=_as_str(tbl["csv"], f"{path}.csv"),
        svg=_as_str(tbl["svg"], f"{path}.svg") if "svg" in tbl else None,
        spectra_csv=(_as_str(tbl["spectra_csv"], f"{path}.spectra_csv")
                     if "spectra_csv" in tbl else None),
        trajectory_csv=(_as_str(tbl["trajectory_csv"], f"{path}.trajectory_csv")
                        if "trajectory_csv" in tbl else None),
        parallelism=par,
    )


def _resolve_ensemble(tbl: Mapping, mode: str,
                      path: str = "ensemble") -> tuple[dict, dict]:
    allowed = {"omega0", "v", "theta", "gamma_ratio", "gamma_plus",
               "gamma_minus", "m0"}
    _check_keys(tbl, path, allowed)
    has_abs = "gamma_plus" in tbl or "gamma_minus" in tbl
    if has_abs:
        if not ("gamma_plus" in tbl and "gamma_minus" in tbl):
            raise ConfigError(f"{path}: gamma_plus and gamma_minus go together")
        if "gamma_ratio" in tbl:
            raise ConfigError(f"{path}.gamma_ratio: conflicts with absolute rates")
    scalars: dict = {"omega0": 1.0, "v": 1.0, "theta": math.pi / 2,
                     "gamma_ratio": 5.0}
    ranges: dict = {}
    rangeable = _RANGEABLE[mode]
    for key in tbl:
        p = f"{path}.{key}"
        if key == "m0":
            scalars["m0"] = _as_vec3(tbl[key], p)
            continue
        val = _scalar_or_range(tbl[key], p, angle=(key == "theta"))
        if isinstance(val, Range):
            if key not in rangeable:
                raise ConfigError(f"{p}: parameter cannot be ranged in mode {mode}")
            ranges[key] = (val.values(), val.scale)
        else:
            scalars[key] = val
    if has_abs:
        scalars.pop("gamma_ratio", None)
        if scalars["gamma_plus"] + scalars["gamma_minus"] <= 0:
            raise ConfigError(f"{path}: gamma_plus + gamma_minus must be > 0")
    scalars.setdefault("m0", DEFAULT_M0.copy())
    return scalars, ranges


def _resolve_two_group(tbl: Mapping, mode: str,
                       path: str = "two_group") -> tuple[dict, dict]:
    allowed = {"gamma_ratio", "v", "v_over_gamma_plus", "v_a", "v_b",
               "v_ab", "v_over_vab", "vab_over_gamma_plus",
               "delta", "delta_over_gamma_plus",
               "theta_a", "theta_b", "theta_ab", "theta_a_values",
               "m0_a", "m0_b"}
    _check_keys(tbl, path, allowed)

    ratio = _as_float(tbl.get("gamma_ratio", 5.0), f"{path}.gamma_ratio")
    if ratio < 0:
        raise ConfigError(f"{path}.gamma_ratio: must be >= 0")
    gp = ratio / (1.0 + ratio)

    def exclusive(keys):
        present = [k for k in keys if k in tbl]
        if len(present) > 1:
            raise ConfigError(f"{path}: give only one of {keys}")
        return present[0] if present else None

    scalars: dict = {"gamma_ratio": ratio}
    ranges: dict = {}

    vkey = exclusive(("v", "v_over_gamma_plus"))
    v = 5.0
    if vkey == "v":
        v = _as_float(tbl["v"], f"{path}.v")
    elif vkey == "v_over_gamma_plus":
        v = _as_float(tbl["v_over_gamma_plus"], f"{path}.v_over_gamma_plus") * gp
    scalars["v_a"] = _as_float(tbl["v_a"], f"{path}.v_a") if "v_a" in tbl else v
    scalars["v_b"] = _as_float(tbl["v_b"], f"{path}.v_b") if "v_b" in tbl else v

    abkey = exclusive(("v_ab", "v_over_vab", "vab_over_gamma_plus"))
    if abkey == "v_ab":
        val = _scalar_or_range(tbl["v_ab"], f"{path}.v_ab")
        if isinstance(val, Range):
            if "v_ab" not in _RANGEABLE[mode]:
                raise ConfigError(f"{path}.v_ab: cannot be ranged in mode {mode}")
            ranges["v_ab"] = (val.values(), val.scale)
        else:
            scalars["v_ab"] = val
    elif abkey == "v_over_vab":
        r = _as_float(tbl["v_over_vab"], f"{path}.v_over_vab")
        if r <= 0:
            raise ConfigError(f"{path}.v_over_vab: must be > 0")
        scalars["v_ab"] = v / r
    elif abkey == "vab_over_gamma_plus":
        val = _scalar_or_range(tbl["vab_over_gamma_plus"],
                               f"{path}.vab_over_gamma_plus")
        if isinstance(val, Range):
            if "v_ab" not in _RANGEABLE[mode]:
                raise ConfigError(f"{path}.vab_over_gamma_plus: cannot be "
                                  f"ranged in mode {mode}")
            ranges["v_ab"] = (val.values() * gp, val.scale)
        else:
            scalars["v_ab"] = val * gp
    else:
        scalars["v_ab"] = v / 6.0

    dkey = exclusive(("delta", "delta_over_gamma_plus"))
    if dkey is None:
        scalars["delta"] = 0.0
    else:
        scale = 1.0 if dkey == "delta" else gp
        val = _scalar_or_range(tbl[dkey], f"{path}.{dkey}")
        if isinstance(val, Range):
            if "delta" not in _RANGEABLE[mode]:
                raise ConfigError(f"{path}.{dkey}: cannot be ranged in mode {mode}")
            ranges["delta"] = (val.values() * scale, val.scale)
        else:
            scalars["delta"] = val * scale

    scalars["theta_a"] = parse_angle(tbl.get("theta_a", math.pi / 2),
                                     f"{path}.theta_a")
    scalars["theta_b"] = parse_angle(tbl.get("theta_b", math.pi / 2),
                                     f"{path}.theta_b")
    scalars["theta_ab"] = parse_angle(tbl.get("theta_ab", math.pi / 2),
                                      f"{path}.theta_ab")
    if "theta_a_values" in tbl:
        if mode != "phase_tuning":
            raise ConfigError(f"{path}.theta_a_values: only valid in phase_tuning")
        vals = tbl["theta_a_values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"{path}.theta_a_values: expected a non-empty list")
        scalars["theta_a_values"] = np.array(
            [parse_angle(v, f"{path}.theta_a_values[{i}]")
             for i, v in enumerate(vals)])
    elif mode == "phase_tuning":
        raise ConfigError(f"{path}.theta_a_values: required in phase_tuning")

    m0a = _as_vec3(tbl["m0_a"], f"{path}.m0_a") if "m0_a" in tbl \
        else DEFAULT_M0_PAIR[0].copy()
    m0b = _as_vec3(tbl["m0_b"], f"{path}.m0_b") if "m0_b" in tbl \
        else DEFAULT_M0_PAIR[1].copy()
    scalars["m0_pair"] = np.stack([m0a, m0b])
    return scalars, ranges


def _resolve_flowfield(tbl: Mapping, path: str = "flowfield") -> dict:
    _check_keys(tbl, path, {"component", "grid_points", "radius"})
    comp = _as_str(tbl.get("component", "meanfield"), f"{path}.component",
                   FLOW_COMPONENT_CHOICES)
    gp = _as_int(tbl.get("grid_points", 12), f"{path}.grid_points")
    if gp < 2:
        raise ConfigError(f"{path}.grid_points: need at least 2")
    radius = _as_float(tbl.get("radius", 1.0), f"{path}.radius")
    if not 0 < radius <= 1.0:
        raise ConfigError(f"{path}.radius: must lie in (0, 1]")
    return {"component": comp, "grid_points": gp, "radius": radius}


def _resolve_oracle(tbl: Mapping, path: str = "oracle") -> dict:
    _check_keys(tbl, path, {"n_values", "n_max"})
    n_max = _as_int(tbl.get("n_max", 8), f"{path}.n_max")
    vals = tbl.get("n_values", [1, 2, 4, 6])
    if not isinstance(vals, list) or not vals:
        raise ConfigError(f"{path}.n_values: expected a non-empty list")
    out = []
    for i, v in enumerate(vals):
        n = _as_int(v, f"{path}.n_values[{i}]")
        if n < 1 or n > n_max:
            raise ConfigError(f"{path}.n_values[{i}]: outside [1, {n_max}]")
        out.append(n)
    return {"n_values": out, "n_max": n_max}


def resolve(raw: Mapping, mode: str | None = None) -> ResolvedConfig:
    """Validate a parsed config dict and return typed, canonical values."""
    if not isinstance(raw, Mapping):
        raise ConfigError("config root must be a table")
    top_allowed = {"mode", "run", "output", "ensemble", "two_group",
                   "flowfield", "oracle"}
    _check_keys(raw, "config", top_allowed)
    cfg_mode = raw.get("mode")
    if cfg_mode is not None:
        cfg_mode = _as_str(cfg_mode, "config.mode", MODES)
    if mode is None:
        mode = cfg_mode
    elif cfg_mode is not None and cfg_mode != mode:
        raise ConfigError(f"config.mode: {cfg_mode!r} does not match the "
                          f"requested mode {mode!r}")
    if mode is None:
        raise ConfigError("config.mode: required (or select a mode subcommand)")

    if mode in _TWOGROUP_MODES and "ensemble" in raw:
        raise ConfigError("config.ensemble: not used by two-group modes")
    if mode in _ENSEMBLE_MODES and "two_group" in raw:
        raise ConfigError("config.two_group: not used by single-ensemble modes")
    if mode != "flowfield" and "flowfield" in raw:
        raise ConfigError("config.flowfield: only valid in flowfield mode")
    if mode != "oracle" and "oracle" in raw:
        raise ConfigError("config.oracle: only valid in oracle mode")

    run = _resolve_run(raw.get("run", {}), mode)
    if "output" not in raw:
        raise ConfigError("config.output: required")
    output = _resolve_output(raw["output"], mode)

    rc = ResolvedConfig(mode=mode, raw=dict(raw), run=run, output=output)
    if mode in _ENSEMBLE_MODES:
        rc.ensemble, pairs = _resolve_ensemble(raw.get("ensemble", {}), mode)
    else:
        rc.two_group, pairs = _resolve_two_group(raw.get("two_group", {}), mode)
    rc.ranges = {k: v for k, (v, _s) in pairs.items()}
    rc.range_scales = {k: s for k, (_v, s) in pairs.items()}
    if mode == "flowfield":
        rc.flowfield = _resolve_flowfield(raw.get("flowfield", {}))
    if mode == "oracle":
        rc.oracle = _resolve_oracle(raw.get("oracle", {}))

    required = _REQUIRED_RANGES.get(mode, frozenset())
    missing = required - set(rc.ranges)
    if missing:
        raise ConfigError(f"mode {mode}: parameter(s) {sorted(missing)} must "
                          f"be given as ranges")
    if len(rc.ranges) > 2:
        raise ConfigError("at most 2 ranged parameters per sweep")
    return rc


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply CLI 'dotted.path=value' assignments onto the raw config dict."""
    out = dict(raw)
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, _, text = item.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"--set {item!r}: empty key")
        try:
            parsed = tomllib.loads(f"x = {text.strip()}")["x"]
        except tomllib.TOMLDecodeError:
            parsed = text.strip()  # bare string value
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
            else:
                child = dict(child)
            node[part] = child
            node = child
        node[parts[-1]] = parsed
    return out


def load_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
