"""Qubit teleportation under local damping noise.

Building blocks: dense state primitives, amplitude/phase damping in Kraus
and interferometric dilation form, the fully entangled fraction and its
closed forms under damping, a circuit-level teleportation simulator,
simulated photon-counting tomography with maximum-likelihood
reconstruction, and a reproducible sweep harness with a CLI.
"""

from ._version import __version__
from .channels import (
    CalibrationPoint,
    KrausChannel,
    adc,
    alice_mixture,
    apply as apply_channel,
    apply_local,
    dilation_adc,
    dilation_pdc,
    estimate_p,
    pa_from_theta,
    parse_channel_descriptor,
    pb_from_alpha,
    pdc,
)
from .entanglement import (
    FefResult,
    classical_threshold,
    dfdpb,
    f_adc_both,
    f_adc_pdc,
    f_adc_single,
    f_pdc_both,
    fef,
    fef_bruteforce,
    teleport_fidelity,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    NumericalError,
    ThresholdNotFoundError,
)
from .states import (
    DensityMatrix,
    PureState,
    bell_state,
    eig_hermitian,
    load_density_matrix,
    partial_trace,
    save_density_matrix,
    state_fidelity,
    tensor_product,
    werner_state,
)
from .teleport import (
    TeleportOutcome,
    average_fidelity_direct,
    teleport,
    teleport_channel,
)
from .tomography import (
    ChiMatrix,
    MeasurementRecord,
    avg_fidelity_from_chi,
    composite_teleport_fidelity,
    log_likelihood,
    monte_carlo_fidelity_error,
    pauli_settings,
    process_tomo,
    read_records_csv,
    simulate_counts,
    state_tomo_linear,
    state_tomo_mle,
    write_records_csv,
)

__all__ = [
    "__version__",
    "CalibrationPoint",
    "ChiMatrix",
    "ConfigError",
    "ConvergenceError",
    "DensityMatrix",
    "FefResult",
    "KrausChannel",
    "MeasurementRecord",
    "NumericalError",
    "PureState",
    "TeleportOutcome",
    "ThresholdNotFoundError",
    "adc",
    "alice_mixture",
    "apply_channel",
    "apply_local",
    "average_fidelity_direct",
    "avg_fidelity_from_chi",
    "bell_state",
    "classical_threshold",
    "composite_teleport_fidelity",
    "dfdpb",
    "dilation_adc",
    "dilation_pdc",
    "eig_hermitian",
    "estimate_p",
    "f_adc_both",
    "f_adc_pdc",
    "f_adc_single",
    "f_pdc_both",
    "fef",
    "fef_bruteforce",
    "load_density_matrix",
    "log_likelihood",
    "monte_carlo_fidelity_error",
    "pa_from_theta",
    "parse_channel_descriptor",
    "partial_trace",
    "pauli_settings",
    "pb_from_alpha",
    "pdc",
    "process_tomo",
    "read_records_csv",
    "save_density_matrix",
    "simulate_counts",
    "state_fidelity",
    "state_tomo_linear",
    "state_tomo_mle",
    "teleport",
    "teleport_channel",
    "teleport_fidelity",
    "tensor_product",
    "werner_state",
    "write_records_csv",
]
