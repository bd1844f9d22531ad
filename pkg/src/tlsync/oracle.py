"""Exact finite-N Lindblad dynamics used to cross-check the mean-field flow.

The state is the full 2^N-dimensional density matrix, so N is capped at a
desk-scale default of 8.  The all-to-all coupling at phase theta is realized
in a permutation-symmetric, completely positive form: the in-phase component
is a Hermitian excitation-exchange Hamiltonian of strength V cos(theta)/(N-1)
per pair, and the quadrature component is a collective decay channel (for
theta in (0, pi)) or collective gain channel (for theta in (-pi, 0)) at rate
2 V |sin(theta)|/(N-1).  Both pieces drive every site with the ensemble mean
amplitude, and together they reproduce the interaction flow at phase theta
exactly in the large-N limit; at N = 1 there is no interaction at all.

Positivity is monitored at every sample, never enforced, so integrator bugs
surface instead of being hidden.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .integrate import IntegratorControls, StepFailure
from .params import EnsembleParams

N_MAX_DEFAULT = 8

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SM = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


class DimensionTooLarge(ValueError):
    """Requested site count exceeds the configured cap."""


class PositivityBreach(RuntimeError):
    """Density matrix developed a negative eigenvalue beyond tolerance."""


def site_operator(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a single-site operator into the n-site product space."""
    out = np.array([[1.0 + 0.0j]])
    for k in range(n_sites):
        out = np.kron(out, op if k == site else I2)
    return out


def product_state(m: np.ndarray, n_sites: int) -> np.ndarray:
    """Permutation-symmetric product state with every site at Bloch vector m."""
    m = np.asarray(m, dtype=float)
    rho1 = 0.5 * (I2 + m[0] * SX + m[1] * SY + m[2] * SZ)
    rho = np.array([[1.0 + 0.0j]])
    for _ in range(n_sites):
        rho = np.kron(rho, rho1)
    return rho


@dataclass(frozen=True)
class LindbladModel:
    n_sites: int
    hamiltonian: np.ndarray
    channels: tuple  # (rate, L, L^dag, L^dag L) per dissipation channel
    site_sigma_plus: tuple
    site_sigma_z: tuple

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = -1.0j * (self.hamiltonian @ rho - rho @ self.hamiltonian)
        for rate, L, Ld, LdL in self.channels:
            out += rate * (L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL))
        return out


def build_model(p: EnsembleParams, n_sites: int,
                n_max: int = N_MAX_DEFAULT) -> LindbladModel:
    if n_sites < 1 or n_sites > n_max:
        raise DimensionTooLarge(f"n_sites={n_sites} outside [1, {n_max}]")
    dim = 2 ** n_sites
    H = np.zeros((dim, dim), dtype=complex)
    sps = tuple(site_operator(SP, i, n_sites) for i in range(n_sites))
    sms = tuple(site_operator(SM, i, n_sites) for i in range(n_sites))
    szs = tuple(site_operator(SZ, i, n_sites) for i in range(n_sites))
    for i in range(n_sites):
        H += 0.5 * p.omega0 * szs[i]
    channels = []
    if n_sites >= 2 and p.V > 0.0:
        s, c = math.sin(p.theta), math.cos(p.theta)
        J = p.V * c / (n_sites - 1)
        if J != 0.0:
            for i in range(n_sites):
                for j in range(i + 1, n_sites):
                    H += J * (sps[i] @ sms[j] + sms[i] @ sps[j])
        if s != 0.0:
            rate = 2.0 * p.V * abs(s) / (n_sites - 1)
            Jc = sum(sms) if s > 0.0 else sum(sps)
            channels.append((rate, Jc, Jc.conj().T, Jc.conj().T @ Jc))
    for i in range(n_sites):
        if p.gamma_plus > 0.0:
            channels.append((p.gamma_plus, sps[i], sms[i], sms[i] @ sps[i]))
        if p.gamma_minus > 0.0:
            channels.append((p.gamma_minus, sms[i], sps[i], sps[i] @ sms[i]))
    return LindbladModel(n_sites=n_sites, hamiltonian=H, channels=tuple(channels),
                         site_sigma_plus=sps, site_sigma_z=szs)


def liouvillian_apply(rho: np.ndarray, p: EnsembleParams, n_sites: int,
                      n_max: int = N_MAX_DEFAULT) -> np.ndarray:
    """Time derivative of rho under the n-site generator."""
    model = build_model(p, n_sites, n_max)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != model.hamiltonian.shape:
        raise ValueError(f"rho must have shape {model.hamiltonian.shape}")
    return model.apply(rho)


@dataclass(frozen=True)
class ExactRun:
    """Sampled expectations and health diagnostics of an exact evolution."""

    times: np.ndarray
    sigma_plus: np.ndarray       # (n_times, n_sites) complex, per site
    sigma_z: np.ndarray          # (n_times, n_sites) real, per site
    trace_error: np.ndarray      # |Tr rho - 1|
    herm_error: np.ndarray       # max |rho - rho^dag|
    min_eigenvalue: np.ndarray   # smallest eigenvalue of the Hermitian part

    @property
    def mean_sigma_plus(self) -> np.ndarray:
        return self.sigma_plus.mean(axis=1)

    @property
    def mean_sigma_z(self) -> np.ndarray:
        return self.sigma_z.mean(axis=1)


def evolve_exact(rho0: np.ndarray, p: EnsembleParams, n_sites: int,
                 t_end: float, dt_sample: float,
                 controls: IntegratorControls | None = None,
                 n_max: int = N_MAX_DEFAULT,
                 positivity_tol: float = 1e-8) -> ExactRun:
    """Integrate the exact master equation and sample site expectations.

    The density matrix is propagated with the adaptive controller on its
    real/imaginary stacking.  A negative eigenvalue below -positivity_tol at
    any sample aborts with diagnostics.
    """
    controls = controls or IntegratorControls()
    model = build_model(p, n_sites, n_max)
    dim = 2 ** n_sites
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (dim, dim):
        raise ValueError(f"rho0 must have shape {(dim, dim)}")

    def f(_t, y):
        rho = (y[:dim * dim] + 1.0j * y[dim * dim:]).reshape(dim, dim)
        d = model.apply(rho)
        return np.concatenate([d.real.ravel(), d.imag.ravel()])

    n = int(np.floor(t_end / dt_sample + 1e-9)) + 1
    ts = dt_sample * np.arange(n)
    y0 = np.concatenate([rho0.real.ravel(), rho0.imag.ravel()])
    sol = solve_ivp(f, (0.0, float(ts[-1]) if n > 1 else t_end), y0,
                    method="RK45", t_eval=ts, rtol=controls.rtol,
                    atol=controls.atol)
    if sol.status == -1:
        raise StepFailure(sol.message)

    sp = np.empty((n, n_sites), dtype=complex)
    sz = np.empty((n, n_sites))
    tre = np.empty(n)
    her = np.empty(n)
    mev = np.empty(n)
    for k in range(n):
        rho = (sol.y[:dim * dim, k] + 1.0j * sol.y[dim * dim:, k]).reshape(dim, dim)
        tre[k] = abs(np.trace(rho) - 1.0)
        her[k] = float(np.max(np.abs(rho - rho.conj().T)))
        herm = 0.5 * (rho + rho.conj().T)
        mev[k] = float(np.linalg.eigvalsh(herm)[0])
        if mev[k] < -positivity_tol:
            raise PositivityBreach(
                f"min eigenvalue {mev[k]:.3e} at t={ts[k]:.6g} "
                f"(tolerance -{positivity_tol:.1e}, N={n_sites})")
        for i in range(n_sites):
            sp[k, i] = np.trace(rho @ model.site_sigma_plus[i])
            sz[k, i] = np.trace(rho @ model.site_sigma_z[i]).real
    return ExactRun(times=ts, sigma_plus=sp, sigma_z=sz, trace_error=tre,
                    herm_error=her, min_eigenvalue=mev)
