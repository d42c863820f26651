"""First-order relativistic corrections to Gaussian packets in a harmonic trap.

Closed-form engine (``dynamics``), channel coefficients (``coeffs``), Gaussian
moments (``gaussian``), exact truncated-Fock reference (``fock``) and the
command-line report layer (``report``, ``cli``).
"""
from .params import (
    GaussianPacket, OscillatorParams, ScaleRecord, ValidityDiagnostics, eta_e, from_natural,
    ground_packet, to_natural, validity_guard, with_eps,
)
from .coeffs import (
    CHANNELS, CoeffChannel, CoeffDiscrepancy, CoeffSet, Side, coeff_oracle, coeff_printed,
    coeff_set, discrepancy_scan, mixing,
)
from .gaussian import (
    CovarianceTable, MomentKind, WeylOrder, WeylSpec, moment, moment_oracle, static_covariances,
    weyl_expectation,
)
from .dynamics import (
    DiscrepancyReport, MomentSeries, ScalingSample, cov_vps, cov_vqs, discrepancy_report,
    nr_variances, rel_variances, scaling_functions, secular_fit, series, uncertainty_product,
    verbatim,
)
from .fock import (
    BasisTooSmallError, FockConfig, FockState, build_operators, commutator_check,
    convergence_report, evolve, exact_moments, project_packet, richardson, run_exact,
)

__version__ = "0.1.0"
