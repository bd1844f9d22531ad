"""Synchronization observables extracted from trajectories.

The mean amplitude <sigma+>(t) = (m_x + i m_y)/2 is treated as a complex
signal: its transform carries both rotation senses, so dominant frequencies
are signed.  Magnitudes are normalized so that the sum of their squares
equals the windowed-signal energy (Parseval).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import Trajectory

MIN_ORDER_SAMPLES = 16
MIN_SPECTRUM_SAMPLES = 256
DOMINANCE_FACTOR = 10.0  # peak must exceed this multiple of the median magnitude
# operational order-parameter threshold for grid classification (tunable)
SYNC_ORDER_THRESHOLD = 1e-3


class WindowTooShort(ValueError):
    """Retained post-transient window has too few samples."""


class NoDominantLine(ValueError):
    """Spectrum has no line standing clear of its own background."""


def _retained(traj: Trajectory, transient_fraction: float) -> np.ndarray:
    if traj.n_ensembles != 1:
        raise ValueError("per-ensemble analysis: pass trajectory.ensemble(i)")
    if not 0.0 <= transient_fraction < 1.0:
        raise ValueError("transient_fraction must lie in [0, 1)")
    start = int(math.floor(transient_fraction * len(traj)))
    return traj.sigma_plus()[start:]


def order_parameter(traj: Trajectory, transient_fraction: float = 0.5) -> float:
    """Time average of |<sigma+>| over the post-transient window."""
    sig = _retained(traj, transient_fraction)
    if len(sig) < MIN_ORDER_SAMPLES:
        raise WindowTooShort(
            f"{len(sig)} retained samples; need >= {MIN_ORDER_SAMPLES}")
    return float(np.mean(np.abs(sig)))


@dataclass(frozen=True)
class Spectrum:
    """|FT| of the complex amplitude on a uniform signed-frequency grid."""

    omega_grid: np.ndarray
    magnitudes: np.ndarray
    resolution: float

    def __post_init__(self):
        w = np.asarray(self.omega_grid, dtype=float)
        m = np.asarray(self.magnitudes, dtype=float)
        if w.shape != m.shape or w.ndim != 1 or len(w) < 2:
            raise ValueError("omega_grid and magnitudes must be equal-length 1-D")
        if np.any(m < 0):
            raise ValueError("magnitudes must be non-negative")
        if np.any(np.diff(w) <= 0):
            raise ValueError("omega_grid must be strictly increasing")


def spectrum(traj: Trajectory, transient_fraction: float = 0.5,
             window: str = "rectangular") -> Spectrum:
    """Discrete Fourier magnitude of <sigma+>(t) after transient discard.

    The series is windowed, zero-padded to a power of two, and transformed as
    a complex signal; the grid spans negative and positive frequencies and the
    reported resolution is the grid spacing.
    """
    sig = _retained(traj, transient_fraction)
    n = len(sig)
    if n < MIN_SPECTRUM_SAMPLES:
        raise WindowTooShort(
            f"{n} retained samples; need >= {MIN_SPECTRUM_SAMPLES}")
    if window == "rectangular":
        w = np.ones(n)
    elif window == "hann":
        w = np.hanning(n)
    else:
        raise ValueError("window must be 'rectangular' or 'hann'")
    xw = sig * w
    npad = 1 << int(math.ceil(math.log2(n)))
    X = np.fft.fftshift(np.fft.fft(xw, n=npad))
    omega = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(npad, d=traj.dt_sample))
    mags = np.abs(X) / math.sqrt(npad)
    return Spectrum(omega_grid=omega, magnitudes=mags,
                    resolution=float(omega[1] - omega[0]))


def dominant_frequency(s: Spectrum) -> float:
    """Signed frequency of the strongest non-DC line, refined sub-bin.

    The argmax bin is polished by three-point parabolic interpolation on the
    log magnitude.  Raises NoDominantLine when the peak does not stand at
    least DOMINANCE_FACTOR above the median magnitude.
    """
    mags = s.magnitudes
    search = mags.copy()
    dc = np.argmin(np.abs(s.omega_grid))
    if abs(s.omega_grid[dc]) < 0.5 * s.resolution:
        search[dc] = 0.0
    k = int(np.argmax(search))
    peak = search[k]
    background = float(np.median(mags))
    if not peak > DOMINANCE_FACTOR * background:
        raise NoDominantLine(
            f"peak {peak:.3e} vs median {background:.3e}: no dominant line")
    if k == 0 or k == len(mags) - 1:
        return float(s.omega_grid[k])
    floor = peak * 1e-12 + np.finfo(float).tiny
    la = math.log(max(mags[k - 1], floor))
    lb = math.log(max(mags[k], floor))
    lc = math.log(max(mags[k + 1], floor))
    denom = la - 2.0 * lb + lc
    shift = 0.0 if denom == 0.0 else 0.5 * (la - lc) / denom
    shift = min(0.5, max(-0.5, shift))
    return float(s.omega_grid[k] + shift * s.resolution)
