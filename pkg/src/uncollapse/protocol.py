"""Pulse sequences and exact conditional evolution.

Two sequences are built here:

* partial collapse: prepare, then a single tunable-strength measurement.
* reversal: prepare, measure with strength p, pi-pulse about X, measure
  again with the same strength and the same measurement phase.
  Conditioned on two null results the second null map exactly undoes the
  first one up to the pi rotation, the measurement phase cancels through
  the echo structure, and the overall success probability is 1 - p for
  every initial state.

Exact execution keeps the unnormalized in-well operator.  Each
measurement moves the detected weight into ``escaped``, so after the last
step the trace is the success probability and ``escaped`` is the
background probability of a pre-analysis detection.  Within a step the
instantaneous operation acts first and decoherence then runs for the
step's duration.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .channels import (
    DecoherenceStep,
    PartialMeasurement,
    RotationPulse,
    apply_decoherence,
    apply_partial_tunnel,
    apply_rotation,
    tomography_rotation,
)
from .errors import DomainError, StructuralError, UndefinedStateError
from .qubit import DeviceParams, PureState, QubitState, default_device, state_from_angles

PREPARE = "prepare"
ROTATE = "rotate"
PARTIAL_MEASURE = "partial_measure"
IDLE = "idle"
TOMOGRAPHY_ROTATE = "tomography_rotate"
FULL_MEASURE = "full_measure"

STEP_KINDS = (PREPARE, ROTATE, PARTIAL_MEASURE, IDLE, TOMOGRAPHY_ROTATE, FULL_MEASURE)

_OVERLAP_TOL = 1e-9


@dataclass(frozen=True)
class SequenceStep:
    """One entry of a pulse sequence.

    ``payload`` depends on the kind: a PureState for prepare, a
    RotationPulse for rotate, a PartialMeasurement for partial_measure, a
    setting name ("x", "y", "z") for tomography_rotate, and None for idle
    and full_measure.
    """

    kind: str
    start_ns: float
    duration_ns: float
    payload: Any = None

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise StructuralError(f"unknown step kind {self.kind!r}")
        if self.duration_ns < 0.0:
            raise StructuralError("step duration must be nonnegative")
        if self.start_ns < -_OVERLAP_TOL:
            raise StructuralError("step cannot start before t = 0")

    @property
    def end_ns(self) -> float:
        return self.start_ns + self.duration_ns


@dataclass(frozen=True)
class PulseSequence:
    """Time-ordered, non-overlapping steps."""

    steps: tuple

    def __post_init__(self):
        steps = tuple(self.steps)
        for before, after in zip(steps, steps[1:]):
            if after.start_ns < before.end_ns - _OVERLAP_TOL:
                raise StructuralError(
                    f"step at {after.start_ns} ns overlaps the one ending at {before.end_ns} ns"
                )
        object.__setattr__(self, "steps", steps)

    @property
    def total_duration_ns(self) -> float:
        return self.steps[-1].end_ns if self.steps else 0.0

    def extended(self, *extra: SequenceStep) -> "PulseSequence":
        return PulseSequence(self.steps + tuple(extra))


@dataclass(frozen=True)
class PulseTiming:
    """Step durations in ns.  The defaults total 44 ns for the reversal
    sequence including the analysis pulse."""

    prepare_ns: float = 10.0
    measure_ns: float = 3.0
    idle_ns: float = 8.0
    pi_pulse_ns: float = 10.0
    tomography_ns: float = 10.0

    def __post_init__(self):
        for name in ("prepare_ns", "measure_ns", "idle_ns", "pi_pulse_ns", "tomography_ns"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be nonnegative")

    @property
    def uncollapse_total_ns(self) -> float:
        return (
            self.prepare_ns
            + 2.0 * self.measure_ns
            + self.idle_ns
            + self.pi_pulse_ns
            + self.tomography_ns
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to build and run one sequence at one strength p.

    ``phi_m_model`` maps strength to accumulated measurement phase; when
    None the linear model phi_m = phi_m_rate * p is used.  Both
    measurements of the reversal sequence share the same strength and the
    same phase.  ``use_echo_t2`` selects the echo dephasing time for
    decoherence steps (the reversal sequence has echo structure); set it
    False to use the Ramsey time instead.

    ``p_error_fraction`` models a systematic calibration bias in the
    measurement strength: the pulses realize p * (1 + f) (clipped to 1)
    while the nominal dial value stays p.  Default 0.0 turns the bias
    off.  The multiplicative form was chosen so that p = 0 stays exact.
    """

    initial: PureState
    p: float
    pi_fraction: float = 1.0
    device: DeviceParams = field(default_factory=default_device)
    decoherence_enabled: bool = False
    phi_m_rate: float = 4.0 * math.pi
    phi_m_model: Callable[[float], float] | None = None
    timing: PulseTiming = field(default_factory=PulseTiming)
    use_echo_t2: bool = True
    p_error_fraction: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"measurement strength must lie in [0, 1], got {self.p}")
        if self.pi_fraction < 0.0:
            raise DomainError("pi_fraction must be nonnegative")
        if not math.isfinite(self.p_error_fraction) or self.p_error_fraction <= -1.0:
            raise DomainError("p_error_fraction must be a finite value above -1")

    def effective_p(self) -> float:
        """Strength the pulses actually realize, after calibration bias."""
        return min(self.p * (1.0 + self.p_error_fraction), 1.0)

    def measurement_phase(self) -> float:
        p_real = self.effective_p()
        if self.phi_m_model is not None:
            return float(self.phi_m_model(p_real))
        return self.phi_m_rate * p_real

    def decoherence_for(self, duration_ns: float) -> DecoherenceStep:
        return DecoherenceStep.for_device(self.device, duration_ns, echo=self.use_echo_t2)

    def at_strength(self, p: float) -> "ExperimentConfig":
        return replace(self, p=p)


@dataclass(frozen=True)
class RunOutcome:
    """Result of exact conditional evolution.

    ``conditional`` is the unnormalized post-selected state; ``p_success``
    is its trace (probability that no detection occurred before analysis)
    and ``p_background`` the complementary detection probability.
    """

    conditional: QubitState
    p_background: float
    p_success: float


def build_partial_collapse(cfg: ExperimentConfig) -> PulseSequence:
    """Prepare, then one partial measurement."""
    t = cfg.timing
    measure = PartialMeasurement(cfg.effective_p(), cfg.measurement_phase())
    return PulseSequence(
        (
            SequenceStep(PREPARE, 0.0, t.prepare_ns, cfg.initial),
            SequenceStep(PARTIAL_MEASURE, t.prepare_ns, t.measure_ns, measure),
        )
    )


def build_uncollapse(cfg: ExperimentConfig) -> PulseSequence:
    """Prepare, measure, pi-pulse about X, measure again.

    ``pi_fraction`` scales the recovery pulse; 1.0 is the proper reversal
    sequence and other values model a deliberately wrong pulse.
    """
    t = cfg.timing
    measure = PartialMeasurement(cfg.effective_p(), cfg.measurement_phase())
    pulse = RotationPulse.about_x(cfg.pi_fraction * np.pi, t.pi_pulse_ns)
    t_m1 = t.prepare_ns
    t_idle = t_m1 + t.measure_ns
    t_pi = t_idle + t.idle_ns
    t_m2 = t_pi + t.pi_pulse_ns
    return PulseSequence(
        (
            SequenceStep(PREPARE, 0.0, t.prepare_ns, cfg.initial),
            SequenceStep(PARTIAL_MEASURE, t_m1, t.measure_ns, measure),
            SequenceStep(IDLE, t_idle, t.idle_ns),
            SequenceStep(ROTATE, t_pi, t.pi_pulse_ns, pulse),
            SequenceStep(PARTIAL_MEASURE, t_m2, t.measure_ns, measure),
        )
    )


def run_exact(seq: PulseSequence, cfg: ExperimentConfig) -> RunOutcome:
    """Evolve the conditional state through a sequence exactly.

    A full_measure step is allowed only as a terminal marker; detection
    statistics for it come from the analysis forward model, not from this
    routine.
    """
    if not seq.steps:
        raise StructuralError("empty pulse sequence")
    state: QubitState | None = None
    for index, step in enumerate(seq.steps):
        if step.kind == PREPARE:
            if state is not None:
                raise StructuralError("sequence contains a second prepare step")
            state = state_from_angles(step.payload)
        elif state is None:
            raise StructuralError("sequence must begin with a prepare step")
        elif step.kind == PARTIAL_MEASURE:
            state, _ = apply_partial_tunnel(state, step.payload)
        elif step.kind == ROTATE:
            state = apply_rotation(state, step.payload)
        elif step.kind == TOMOGRAPHY_ROTATE:
            state = apply_rotation(state, tomography_rotation(step.payload, step.duration_ns))
        elif step.kind == IDLE:
            pass
        elif step.kind == FULL_MEASURE:
            if index != len(seq.steps) - 1:
                raise StructuralError("full_measure must be the final step")
            continue
        if cfg.decoherence_enabled and step.duration_ns > 0.0:
            state = apply_decoherence(state, cfg.decoherence_for(step.duration_ns))
        state.validate(require_total=True)
    return RunOutcome(
        conditional=state,
        p_background=state.escaped,
        p_success=state.trace,
    )


def success_probability(cfg: ExperimentConfig) -> float:
    """Probability that the reversal sequence records two null results."""
    return run_exact(build_uncollapse(cfg), cfg).p_success


def theory_polar_angle(kind: str, theta0: float, p: float) -> float:
    """Closed-form polar angle after the named sequence, decoherence free.

    For a single partial measurement the null result pulls the polar angle
    to 2*atan(sqrt(1-p)*tan(theta0/2)); the reversal sequence lands at
    pi - theta0 independent of p.
    """
    if not 0.0 <= theta0 <= np.pi + 1e-12:
        raise DomainError("theta0 must lie in [0, pi]")
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    if kind == "collapse":
        s = np.sqrt(1.0 - p) * np.sin(theta0 / 2.0)
        c = np.cos(theta0 / 2.0)
        if np.hypot(s, c) < 1e-9:
            raise UndefinedStateError("state fully escapes: p = 1 with theta0 = pi")
        return float(2.0 * np.arctan2(s, c))
    if kind == "uncollapse":
        return float(np.pi - theta0)
    raise DomainError(f"unknown sequence kind {kind!r}")
