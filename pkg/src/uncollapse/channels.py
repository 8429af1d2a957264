"""Elementary quantum operations on the conditional qubit state.

The tunable-strength measurement detects |1> with probability p and never
detects |0>.  Its null branch applies

    M0 = [[1, 0], [0, sqrt(1-p) * exp(-i*phi_m)]]

to the in-well operator, steering the state toward |0> while adding the
accumulated measurement phase phi_m to the azimuth.  The detected branch
removes weight p*rho_11 from the well; its in-well Kraus representative is
diag(0, sqrt(p)), so M0'M0 + diag(0, p) = 1 and the pair is complete.

Energy relaxation toward |0> and pure dephasing are the standard
amplitude-damping and phase-flip channels.  For a step of given duration
the damping parameter is gamma = 1 - exp(-t/T1) and the dephasing
parameter is lam = 1 - exp(-t/T_phi), applied as a phase flip with
probability lam/2 so that off-diagonal elements shrink by exactly
exp(-t/T_phi).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UndefinedStateError
from .qubit import (
    EXACT_TOL,
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    TRACE_FLOOR,
    DeviceParams,
    QubitState,
)


@dataclass(frozen=True)
class KrausSet:
    """A labeled collection of 2x2 Kraus operators."""

    operators: tuple
    labels: tuple = ()

    def __post_init__(self):
        if len(self.operators) == 0:
            raise DomainError("a Kraus set needs at least one operator")
        ops = []
        for op in self.operators:
            mat = np.array(op, dtype=complex)
            if mat.shape != (2, 2):
                raise DomainError(f"Kraus operators must be 2x2, got {mat.shape}")
            mat.setflags(write=False)
            ops.append(mat)
        object.__setattr__(self, "operators", tuple(ops))
        if self.labels and len(self.labels) != len(ops):
            raise DomainError("labels must match operators one to one")


def kraus_completeness_check(kraus: KrausSet) -> float:
    """Max-norm deviation of sum_k K'K from the identity."""
    total = np.zeros((2, 2), dtype=complex)
    for op in kraus.operators:
        total += op.conj().T @ op
    return float(np.max(np.abs(total - IDENTITY)))


def apply_kraus(q: QubitState, kraus: KrausSet) -> QubitState:
    """Apply sum_k K rho K' to the conditional operator; escaped unchanged."""
    rho = np.zeros((2, 2), dtype=complex)
    for op in kraus.operators:
        rho += op @ q.rho @ op.conj().T
    return QubitState(rho, q.escaped)


@dataclass(frozen=True)
class PartialMeasurement:
    """Tunable-strength measurement: detection probability p for |1>,
    measurement phase phi_m picked up by the null branch."""

    p: float
    phi_m: float = 0.0

    def __post_init__(self):
        if not -EXACT_TOL <= self.p <= 1.0 + EXACT_TOL:
            raise DomainError(f"measurement strength must lie in [0, 1], got {self.p}")
        object.__setattr__(self, "p", float(min(max(self.p, 0.0), 1.0)))
        object.__setattr__(self, "phi_m", float(self.phi_m))

    def null_operator(self) -> np.ndarray:
        return np.array(
            [
                [1.0, 0.0],
                [0.0, np.sqrt(1.0 - self.p) * np.exp(-1.0j * self.phi_m)],
            ],
            dtype=complex,
        )

    def kraus(self) -> KrausSet:
        tunnel = np.array([[0.0, 0.0], [0.0, np.sqrt(self.p)]], dtype=complex)
        return KrausSet((self.null_operator(), tunnel), ("null", "tunnel"))


@dataclass(frozen=True)
class RotationPulse:
    """Rotation by ``angle`` about a unit ``axis`` of the Bloch sphere.

    The unitary is exp(-i*angle*(axis . sigma)/2), which rotates Bloch
    vectors right-handedly about the axis.
    """

    axis: np.ndarray
    angle: float
    duration_ns: float = 0.0

    def __post_init__(self):
        axis = np.array(self.axis, dtype=float)
        if axis.shape != (3,):
            raise DomainError("rotation axis must be a 3-vector")
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise DomainError("rotation axis must have unit length")
        if self.duration_ns < 0.0:
            raise DomainError("pulse duration must be nonnegative")
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", float(self.angle))
        object.__setattr__(self, "duration_ns", float(self.duration_ns))

    @classmethod
    def about_x(cls, angle: float, duration_ns: float = 0.0) -> "RotationPulse":
        return cls(np.array([1.0, 0.0, 0.0]), angle, duration_ns)

    @classmethod
    def about_y(cls, angle: float, duration_ns: float = 0.0) -> "RotationPulse":
        return cls(np.array([0.0, 1.0, 0.0]), angle, duration_ns)

    @classmethod
    def about_z(cls, angle: float, duration_ns: float = 0.0) -> "RotationPulse":
        return cls(np.array([0.0, 0.0, 1.0]), angle, duration_ns)

    def unitary(self) -> np.ndarray:
        half = self.angle / 2.0
        nx, ny, nz = self.axis
        return np.cos(half) * IDENTITY - 1.0j * np.sin(half) * (
            nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z
        )


def tomography_rotation(setting: str, duration_ns: float = 0.0) -> RotationPulse:
    """Analysis pulse that maps the requested Bloch component onto the
    detected (|1>-population) axis.

    The sign conventions are frozen so that the quoted reconstruction
    formulas invert the forward model exactly: a +pi/2 rotation about Y
    carries +x onto -z (the |1> pole) for the x setting, a +pi/2 rotation
    about X carries -y onto -z for the y setting, and the z setting applies
    no rotation.
    """
    if setting == "x":
        return RotationPulse.about_y(np.pi / 2.0, duration_ns)
    if setting == "y":
        return RotationPulse.about_x(np.pi / 2.0, duration_ns)
    if setting == "z":
        return RotationPulse.about_z(0.0, duration_ns)
    raise DomainError(f"unknown tomography setting {setting!r}")


def pure_dephasing_time(t1_ns: float, t2_ns: float) -> float:
    """T_phi from 1/T2 = 1/(2*T1) + 1/T_phi.

    Returns infinity when T2 saturates the relaxation-limited bound 2*T1,
    meaning there is no pure dephasing at all.
    """
    if t1_ns <= 0.0 or t2_ns <= 0.0:
        raise DomainError("decay times must be positive")
    rate = 1.0 / t2_ns - 0.5 / t1_ns
    if rate <= 0.0:
        return float("inf")
    return 1.0 / rate


@dataclass(frozen=True)
class DecoherenceStep:
    """Amplitude damping plus pure dephasing over a fixed duration."""

    duration_ns: float
    t1_ns: float
    t_phi_ns: float

    def __post_init__(self):
        if self.duration_ns < 0.0:
            raise DomainError("duration must be nonnegative")
        if self.t1_ns <= 0.0 or self.t_phi_ns <= 0.0:
            raise DomainError("decay times must be positive")

    @classmethod
    def for_device(cls, device: DeviceParams, duration_ns: float, echo: bool = True) -> "DecoherenceStep":
        """Build a step from device constants, choosing the echo or Ramsey
        dephasing time."""
        t2 = device.t2_echo_ns if echo else device.t2_ramsey_ns
        return cls(duration_ns, device.t1_ns, pure_dephasing_time(device.t1_ns, t2))

    @property
    def gamma(self) -> float:
        """Amplitude-damping parameter 1 - exp(-t/T1)."""
        return float(-np.expm1(-self.duration_ns / self.t1_ns))

    @property
    def lam(self) -> float:
        """Dephasing parameter 1 - exp(-t/T_phi)."""
        if np.isinf(self.t_phi_ns):
            return 0.0
        return float(-np.expm1(-self.duration_ns / self.t_phi_ns))


def amplitude_damping_kraus(gamma: float) -> KrausSet:
    """Relaxation toward |0>: K0 = diag(1, sqrt(1-gamma)), K1 = sqrt(gamma)|0><1|."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError("damping parameter must lie in [0, 1]")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return KrausSet((k0, k1), ("no_jump", "relax"))


def dephasing_kraus(lam: float) -> KrausSet:
    """Phase flip with probability lam/2, shrinking coherences by 1 - lam."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError("dephasing parameter must lie in [0, 1]")
    k0 = np.sqrt(1.0 - lam / 2.0) * IDENTITY
    k1 = np.sqrt(lam / 2.0) * SIGMA_Z
    return KrausSet((k0, k1), ("no_flip", "flip"))


def apply_partial_null(q: QubitState, m: PartialMeasurement) -> tuple[QubitState, float]:
    """Null branch of the partial measurement.

    Returns the post-selected (still unnormalized) state together with the
    conditional probability of the null result.  The trace deficit it
    creates is exactly the discarded detection weight; ``escaped`` is left
    untouched because nothing was recorded.
    """
    tr = q.trace
    if tr <= TRACE_FLOOR:
        raise UndefinedStateError("partial measurement of a vanished state")
    m0 = m.null_operator()
    rho = m0 @ q.rho @ m0.conj().T
    prob_null = float(np.trace(rho).real) / tr
    return QubitState(rho, q.escaped), prob_null


def apply_partial_tunnel(q: QubitState, m: PartialMeasurement) -> tuple[QubitState, float]:
    """Detection branch of the partial measurement.

    The detected weight p*rho_11 moves from the well into ``escaped``; the
    in-well part of the returned state is the null-branch operator, which
    makes this the full ensemble update (trace + escaped is preserved).
    Returns the state and the conditional detection probability.
    """
    tr = q.trace
    if tr <= TRACE_FLOOR:
        raise UndefinedStateError("partial measurement of a vanished state")
    tunneled = m.p * float(q.rho[1, 1].real)
    m0 = m.null_operator()
    rho = m0 @ q.rho @ m0.conj().T
    return QubitState(rho, q.escaped + tunneled), tunneled / tr


def apply_rotation(q: QubitState, r: RotationPulse) -> QubitState:
    """Conjugate the conditional operator by the pulse unitary."""
    u = r.unitary()
    return QubitState(u @ q.rho @ u.conj().T, q.escaped)


def apply_decoherence(q: QubitState, d: DecoherenceStep) -> QubitState:
    """Amplitude damping followed by dephasing for the step duration.

    Both channels are trace preserving on the in-well operator; relaxation
    keeps population inside the well, so ``escaped`` is unchanged.
    """
    state = apply_kraus(q, amplitude_damping_kraus(d.gamma))
    lam = d.lam
    if lam > 0.0:
        state = apply_kraus(state, dephasing_kraus(lam))
    return state
