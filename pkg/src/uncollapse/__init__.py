"""Simulator and analysis toolkit for reversing a tunable-strength partial
measurement on a single qubit.

The package models the full experiment: state preparation, partial
measurements that detect only |1>, the echo-structured reversal sequence,
energy relaxation and dephasing, state tomography, process tomography, and
Monte Carlo sampling with reproducible counter-based randomness.
"""

from .channels import (
    DecoherenceStep,
    KrausSet,
    PartialMeasurement,
    RotationPulse,
    amplitude_damping_kraus,
    apply_decoherence,
    apply_kraus,
    apply_partial_null,
    apply_partial_tunnel,
    apply_rotation,
    dephasing_kraus,
    kraus_completeness_check,
    pure_dephasing_time,
    tomography_rotation,
)
from .errors import (
    DegenerateBackgroundError,
    DomainError,
    SimulationError,
    SingularInversionError,
    StructuralError,
    UndefinedDirectionError,
    UndefinedStateError,
)
from .montecarlo import EstimateSet, ShotRecord, estimate_probabilities, sample_sequence
from .protocol import (
    ExperimentConfig,
    PulseSequence,
    PulseTiming,
    RunOutcome,
    SequenceStep,
    build_partial_collapse,
    build_uncollapse,
    run_exact,
    success_probability,
    theory_polar_angle,
)
from .qpt import (
    PROBE_STATES,
    ChiMatrix,
    CpReport,
    ProbeSet,
    chi_apply,
    cp_diagnostics,
    exact_uncollapse_chi,
    montecarlo_uncollapse_chi,
    process_fidelity,
    qpt_reconstruct,
)
from .qubit import (
    BlochVector,
    DeviceParams,
    PureState,
    QubitState,
    bloch_from_state,
    default_device,
    relaxation_probability,
    state_fidelity,
    state_from_angles,
    state_from_bloch,
)
from .tomography import (
    TOMO_SETTINGS,
    TomographyRecord,
    bloch_reconstruct,
    exact_tomography_record,
    polar_azimuth,
    tomo_probabilities,
    with_tomography,
)

__version__ = "0.1.0"

__all__ = [
    "BlochVector",
    "ChiMatrix",
    "CpReport",
    "DecoherenceStep",
    "DegenerateBackgroundError",
    "DeviceParams",
    "DomainError",
    "EstimateSet",
    "ExperimentConfig",
    "KrausSet",
    "PROBE_STATES",
    "PartialMeasurement",
    "ProbeSet",
    "PulseSequence",
    "PulseTiming",
    "PureState",
    "QubitState",
    "RotationPulse",
    "RunOutcome",
    "SequenceStep",
    "ShotRecord",
    "SimulationError",
    "SingularInversionError",
    "StructuralError",
    "TOMO_SETTINGS",
    "TomographyRecord",
    "UndefinedDirectionError",
    "UndefinedStateError",
    "amplitude_damping_kraus",
    "apply_decoherence",
    "apply_kraus",
    "apply_partial_null",
    "apply_partial_tunnel",
    "apply_rotation",
    "bloch_from_state",
    "bloch_reconstruct",
    "build_partial_collapse",
    "build_uncollapse",
    "chi_apply",
    "cp_diagnostics",
    "default_device",
    "dephasing_kraus",
    "estimate_probabilities",
    "exact_tomography_record",
    "exact_uncollapse_chi",
    "kraus_completeness_check",
    "montecarlo_uncollapse_chi",
    "polar_azimuth",
    "process_fidelity",
    "pure_dephasing_time",
    "qpt_reconstruct",
    "relaxation_probability",
    "run_exact",
    "sample_sequence",
    "state_fidelity",
    "state_from_angles",
    "state_from_bloch",
    "success_probability",
    "theory_polar_angle",
    "tomo_probabilities",
    "tomography_rotation",
    "with_tomography",
]
