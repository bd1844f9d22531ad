"""Parameter containers for single-ensemble and two-group dynamics.

Rates carry whatever time unit the caller picks; the ``from_ratios``
constructors normalize to gamma_plus + gamma_minus = 1, which is the unit
system used by every sweep in this package.
"""
from __future__ import annotations

from dataclasses import dataclass, replace


class ParameterError(ValueError):
    """Raised for physically inadmissible parameter combinations."""


def _check_rates(gamma_plus: float, gamma_minus: float) -> None:
    if gamma_plus < 0 or gamma_minus < 0:
        raise ParameterError("gain and damping rates must be >= 0")
    if gamma_plus + gamma_minus <= 0:
        raise ParameterError(
            "gamma_plus + gamma_minus must be > 0 (purely closed system has no "
            "dissipative fixed point)"
        )


@dataclass(frozen=True)
class EnsembleParams:
    """One all-to-all coupled ensemble in its natural frame.

    omega0, V in rad/time; theta in rad; gamma_plus/gamma_minus in 1/time.
    """

    omega0: float
    V: float
    theta: float
    gamma_plus: float
    gamma_minus: float

    def __post_init__(self):
        if self.V < 0:
            raise ParameterError("coupling strength V must be >= 0")
        _check_rates(self.gamma_plus, self.gamma_minus)

    @property
    def rate_sum(self) -> float:
        return self.gamma_plus + self.gamma_minus

    @property
    def gamma_ratio(self) -> float:
        if self.gamma_minus == 0:
            return float("inf")
        return self.gamma_plus / self.gamma_minus

    @classmethod
    def from_ratios(cls, v: float, gamma_ratio: float, theta: float,
                    omega0: float = 1.0) -> "EnsembleParams":
        """Build from v = V/(gamma_plus+gamma_minus) and gamma_plus/gamma_minus,
        normalizing gamma_plus + gamma_minus = 1.  omega0 is in the same unit."""
        if gamma_ratio < 0:
            raise ParameterError("gamma_ratio must be >= 0")
        gp = gamma_ratio / (1.0 + gamma_ratio)
        return cls(omega0=omega0, V=v, theta=theta, gamma_plus=gp,
                   gamma_minus=1.0 - gp)

    def with_(self, **kw) -> "EnsembleParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class TwoGroupParams:
    """Two detuned ensembles in the common rotating frame.

    Group A runs at +delta/2 and group B at -delta/2 on the Bloch sphere.
    Both groups share the local gain/damping rates.
    """

    delta: float
    V_A: float
    V_B: float
    V_AB: float
    theta_A: float
    theta_B: float
    theta_AB: float
    gamma_plus: float
    gamma_minus: float

    def __post_init__(self):
        if min(self.V_A, self.V_B, self.V_AB) < 0:
            raise ParameterError("all couplings must be >= 0")
        _check_rates(self.gamma_plus, self.gamma_minus)

    @property
    def rate_sum(self) -> float:
        return self.gamma_plus + self.gamma_minus

    def group(self, which: str) -> EnsembleParams:
        """Single-group parameters with the group's bare frame frequency."""
        if which == "A":
            return EnsembleParams(omega0=+0.5 * self.delta, V=self.V_A,
                                  theta=self.theta_A, gamma_plus=self.gamma_plus,
                                  gamma_minus=self.gamma_minus)
        if which == "B":
            return EnsembleParams(omega0=-0.5 * self.delta, V=self.V_B,
                                  theta=self.theta_B, gamma_plus=self.gamma_plus,
                                  gamma_minus=self.gamma_minus)
        raise ValueError("which must be 'A' or 'B'")

    @classmethod
    def from_ratios(cls, delta: float, v_a: float, v_b: float, v_ab: float,
                    theta_a: float, theta_b: float, theta_ab: float,
                    gamma_ratio: float) -> "TwoGroupParams":
        """All rates in units of gamma_plus + gamma_minus = 1."""
        if gamma_ratio < 0:
            raise ParameterError("gamma_ratio must be >= 0")
        gp = gamma_ratio / (1.0 + gamma_ratio)
        return cls(delta=delta, V_A=v_a, V_B=v_b, V_AB=v_ab, theta_A=theta_a,
                   theta_B=theta_b, theta_AB=theta_ab, gamma_plus=gp,
                   gamma_minus=1.0 - gp)

    def with_(self, **kw) -> "TwoGroupParams":
        return replace(self, **kw)
