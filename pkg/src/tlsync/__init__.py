"""Synchronization dynamics of dissipative two-level-system ensembles."""

__version__ = "0.1.0"

from .params import EnsembleParams, ParameterError, TwoGroupParams
from .flows import (rhs_bare, rhs_dissipative, rhs_driven, rhs_interaction,
                    rhs_meanfield, rhs_rotation, rhs_twogroup, sigma_plus)
from .integrate import IntegratorControls, StepFailure, Trajectory, integrate
from .stability import (DegeneratePhase, LimitCycle, StabilityReport,
                        analytic_limit_cycle, fixed_point,
                        jacobian_at_fixed_point, jacobian_eigenvalues,
                        is_synchronized, stability_report,
                        synchronization_boundary)
from .spectral import (NoDominantLine, Spectrum, WindowTooShort,
                       dominant_frequency, order_parameter, spectrum)
from .simulate import (DEFAULT_M0, DEFAULT_M0_PAIR, RunControls,
                       simulate_ensemble, simulate_two_group)
from .twogroup import (SyncClassification, TongueGrid, PhaseTuningScan,
                       arnold_tongue, classify, phase_tuning_scan)
from .oracle import (DimensionTooLarge, ExactRun, PositivityBreach,
                     build_model, evolve_exact, liouvillian_apply,
                     product_state)

__all__ = [
    "__version__",
    "EnsembleParams", "TwoGroupParams", "ParameterError",
    "rhs_bare", "rhs_dissipative", "rhs_driven", "rhs_interaction",
    "rhs_meanfield", "rhs_rotation", "rhs_twogroup", "sigma_plus",
    "IntegratorControls", "StepFailure", "Trajectory", "integrate",
    "DegeneratePhase", "LimitCycle", "StabilityReport",
    "analytic_limit_cycle", "fixed_point", "jacobian_at_fixed_point",
    "jacobian_eigenvalues", "is_synchronized", "stability_report",
    "synchronization_boundary",
    "NoDominantLine", "Spectrum", "WindowTooShort", "dominant_frequency",
    "order_parameter", "spectrum",
    "DEFAULT_M0", "DEFAULT_M0_PAIR", "RunControls", "simulate_ensemble",
    "simulate_two_group",
    "SyncClassification", "TongueGrid", "PhaseTuningScan", "arnold_tongue",
    "classify", "phase_tuning_scan",
    "DimensionTooLarge", "ExactRun", "PositivityBreach", "build_model",
    "evolve_exact", "liouvillian_apply", "product_state",
]
