"""Deterministic CSV emission with a self-describing commented header.

Every output starts with a '# key = value' block that echoes the producing
configuration and the program version, so a sweep file is its own experiment
record.  Floats are written with 12 significant digits and '\\n' endings,
giving byte-stable diffs across platforms and reruns.

Rows are flushed as they complete; an interrupted sweep resumes by matching
the header block of the existing file and continuing after the last whole
engine row.
"""
from __future__ import annotations

import math
import os
from typing import Mapping, Sequence

from . import __version__


def format_value(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0.0:
            x = 0.0  # normalize -0.0
        return f"{x:.12g}"
    return str(x)


def flatten_config(cfg: Mapping, prefix: str = "config") -> list[tuple[str, str]]:
    """Flatten a nested mapping into sorted dotted key/value string pairs."""
    items: list[tuple[str, str]] = []
    for key in cfg:
        val = cfg[key]
        path = f"{prefix}.{key}"
        if isinstance(val, Mapping):
            items.extend(flatten_config(val, path))
        elif isinstance(val, (list, tuple)):
            items.append((path, "[" + ", ".join(format_value(v) for v in val) + "]"))
        else:
            items.append((path, format_value(val)))
    return sorted(items)


def header_lines(mode: str, cfg: Mapping, columns: Sequence[str],
                 units: Sequence[str], extra: Mapping | None = None) -> list[str]:
    lines = [f"# tlsync = {__version__}", f"# mode = {mode}"]
    for key, val in flatten_config(cfg):
        lines.append(f"# {key} = {val}")
    if extra:
        for key in sorted(extra):
            lines.append(f"# result.{key} = {format_value(extra[key])}")
    lines.append("# columns = " + ",".join(columns))
    lines.append("# units = " + ",".join(units))
    lines.append(",".join(columns))
    return lines


class RowWriter:
    """Writer with per-row flushing and header-matched resume.

    An 'engine row' is the sweep's unit of recomputation and may span several
    CSV lines.  On open, an existing file with an identical header is resumed
    after its last complete engine row; any other existing content is
    replaced.
    """

    def __init__(self, path: str, mode: str, cfg: Mapping,
                 columns: Sequence[str], units: Sequence[str],
                 lines_per_row: int = 1, extra: Mapping | None = None):
        self.path = path
        self.columns = list(columns)
        self.lines_per_row = lines_per_row
        self._header = header_lines(mode, cfg, columns, units, extra)
        self.rows_done = 0
        self._open()

    def _open(self):
        resume_lines: list[str] = []
        if os.path.exists(self.path):
            with open(self.path, "r", encoding="utf-8", newline="") as fh:
                content = fh.read().split("\n")
            nh = len(self._header)
            if content[:nh] == self._header:
                data = [ln for ln in content[nh:] if ln]
                keep = (len(data) // self.lines_per_row) * self.lines_per_row
                resume_lines = data[:keep]
                self.rows_done = keep // self.lines_per_row
        self._fh = open(self.path, "w", encoding="utf-8", newline="")
        for ln in self._header:
            self._fh.write(ln + "\n")
        for ln in resume_lines:
            self._fh.write(ln + "\n")
        self._fh.flush()

    def write_row(self, cells: Sequence[Sequence]) -> None:
        """Write one engine row (a sequence of CSV lines) and flush."""
        if len(cells) != self.lines_per_row:
            raise ValueError(f"expected {self.lines_per_row} lines per row, "
                             f"got {len(cells)}")
        for line in cells:
            if len(line) != len(self.columns):
                raise ValueError("cell count does not match column count")
            self._fh.write(",".join(format_value(v) for v in line) + "\n")
        self._fh.flush()
        self.rows_done += 1

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False
