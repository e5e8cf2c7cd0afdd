"""Linear-response simulator for PT-symmetric cavity magnomechanics."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    MicroscopicInputs,
    ParameterError,
    SystemParams,
    build_heff,
    composite_coupling,
    eigen_report,
    find_exceptional_point,
    microscopic_couplings,
    thermal_occupation,
    validate_params,
)
from .response import c_minus, chi_b, chi_m, decoupled_response, probe_response  # noqa: E402
from .dispersion import group_delay_analytic, group_delay_fd  # noqa: E402
from .stability import char_poly, drift_matrix, hurwitz_determinants, stability_report  # noqa: E402
from .sweep import Axis, SweepGrid, extract_features, run_sweep  # noqa: E402
