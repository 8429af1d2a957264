"""State tomography: forward detection model and linear reconstruction.

Each tomography setting applies one analysis pulse and then a full
measurement (a strength-1 partial measurement scaled by the readout
visibility).  The detection probability for setting s is

    P_s = p_b + (1 - p_b) * v * <1| rho_s |1>

where p_b is the probability that a detection already happened earlier in
the sequence and rho_s is the normalized conditional state after the
setting's rotation.  With v = 1 the forward model is inverted exactly by

    x = 2*(P_x - p_b)/(1 - p_b) - 1
    y = -(2*(P_y - p_b)/(1 - p_b) - 1)
    z = -(2*(P_z - p_b)/(1 - p_b) - 1)

given the rotation conventions of :func:`channels.tomography_rotation`.
"""

from dataclasses import dataclass

import numpy as np

from .channels import apply_decoherence, apply_rotation, tomography_rotation
from .errors import (
    DegenerateBackgroundError,
    DomainError,
    UndefinedDirectionError,
    UndefinedStateError,
)
from .protocol import (
    FULL_MEASURE,
    TOMOGRAPHY_ROTATE,
    ExperimentConfig,
    PulseSequence,
    PulseTiming,
    RunOutcome,
    SequenceStep,
    build_partial_collapse,
    build_uncollapse,
    run_exact,
)
from .qubit import TRACE_FLOOR, BlochVector, DeviceParams, QubitState

TOMO_SETTINGS = ("x", "y", "z")


@dataclass(frozen=True)
class TomographyRecord:
    """Detection probabilities for the three settings plus the background.

    ``stderr`` holds per-setting standard errors and ``stderr_b`` the
    background standard error when the record comes from sampled counts;
    exact records leave them None.
    """

    p_x: float
    p_y: float
    p_z: float
    p_b: float
    shots: int | None = None
    stderr: tuple | None = None
    stderr_b: float | None = None

    def __post_init__(self):
        for name, value in self._items() + (("p_b", self.p_b),):
            if not -1e-12 <= value <= 1.0 + 1e-12:
                raise DomainError(f"probability {name}={value} outside [0, 1]")
        for index, (name, value) in enumerate(self._items()):
            # statistical slack: the pooled background estimate may sit above
            # a single setting's count by a few standard errors
            slack = 1e-9
            if self.stderr is not None and self.stderr_b is not None:
                slack += 6.0 * float(np.hypot(self.stderr[index], self.stderr_b))
            if value < self.p_b - slack:
                raise DomainError(
                    f"{name}={value} falls below the background {self.p_b} by more than {slack}"
                )

    def _items(self) -> tuple:
        return (("p_x", self.p_x), ("p_y", self.p_y), ("p_z", self.p_z))

    def probability(self, setting: str) -> float:
        try:
            return {"x": self.p_x, "y": self.p_y, "z": self.p_z}[setting]
        except KeyError:
            raise DomainError(f"unknown tomography setting {setting!r}") from None


def tomo_probabilities(
    q: QubitState,
    p_b: float,
    d: DeviceParams,
    tomo_decoherence=None,
) -> TomographyRecord:
    """Forward detection model for the three tomography settings.

    ``tomo_decoherence`` optionally decoheres the state during the analysis
    pulse window (rotation first, then decay), mirroring exact execution of
    an appended tomography step.
    """
    if q.trace <= TRACE_FLOOR:
        raise UndefinedStateError("tomography of a vanished conditional state")
    if not 0.0 <= p_b <= 1.0:
        raise DomainError(f"background probability must lie in [0, 1], got {p_b}")
    base = q.normalized()
    probs = {}
    for setting in TOMO_SETTINGS:
        rotated = apply_rotation(base, tomography_rotation(setting))
        if tomo_decoherence is not None:
            rotated = apply_decoherence(rotated, tomo_decoherence)
        population = float(rotated.rho[1, 1].real)
        probs[setting] = p_b + (1.0 - p_b) * d.visibility * population
    return TomographyRecord(p_x=probs["x"], p_y=probs["y"], p_z=probs["z"], p_b=p_b)


def bloch_reconstruct(t: TomographyRecord) -> BlochVector:
    """Invert the forward model; exact inverse at unit visibility.

    Sampled records may land slightly outside the unit ball, which is
    deliberately not repaired here.
    """
    if t.p_b >= 1.0 - 1e-12:
        raise DegenerateBackgroundError("background probability too close to 1")
    scale = 1.0 / (1.0 - t.p_b)

    def component(prob: float) -> float:
        return 2.0 * (prob - t.p_b) * scale - 1.0

    return BlochVector(
        x=component(t.p_x),
        y=-component(t.p_y),
        z=-component(t.p_z),
    )


def polar_azimuth(b: BlochVector) -> tuple[float, float]:
    """Polar angle in [0, pi] and azimuth in [0, 2*pi) of a Bloch vector.

    The azimuth convention matches the pure-state parameterization: a state
    with azimuth phi0 has Bloch components (x, y) = (cos, -sin)*sin(theta),
    so phi = atan2(-y, x).
    """
    r = b.norm
    if r <= 1e-9:
        raise UndefinedDirectionError("Bloch vector too short to define a direction")
    # atan2 of (transverse, axial) stays well conditioned at the poles,
    # where arccos of the normalized z component loses half the digits
    theta = float(np.arctan2(np.hypot(b.x, b.y), b.z))
    phi = float(np.arctan2(-b.y, b.x) % (2.0 * np.pi))
    return theta, phi


def with_tomography(seq: PulseSequence, setting: str, timing: PulseTiming) -> PulseSequence:
    """Append the analysis pulse and the full measurement for one setting.

    The z setting keeps the pulse window (with no rotation) so that all
    three settings share a common readout instant.
    """
    if setting not in TOMO_SETTINGS:
        raise DomainError(f"unknown tomography setting {setting!r}")
    start = seq.total_duration_ns
    return seq.extended(
        SequenceStep(TOMOGRAPHY_ROTATE, start, timing.tomography_ns, setting),
        SequenceStep(FULL_MEASURE, start + timing.tomography_ns, 0.0),
    )


def exact_tomography_record(
    cfg: ExperimentConfig, kind: str = "uncollapse"
) -> tuple[TomographyRecord, RunOutcome]:
    """Run a sequence exactly and evaluate the tomography forward model."""
    if kind == "collapse":
        seq = build_partial_collapse(cfg)
    elif kind == "uncollapse":
        seq = build_uncollapse(cfg)
    else:
        raise DomainError(f"unknown sequence kind {kind!r}")
    outcome = run_exact(seq, cfg)
    tomo_dec = None
    if cfg.decoherence_enabled and cfg.timing.tomography_ns > 0.0:
        tomo_dec = cfg.decoherence_for(cfg.timing.tomography_ns)
    record = tomo_probabilities(
        outcome.conditional, outcome.p_background, cfg.device, tomo_decoherence=tomo_dec
    )
    return record, outcome
