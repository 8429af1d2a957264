"""Single-qubit state algebra: density operators, Bloch vectors, fidelities.

Conventions, fixed once for the whole package:

* Basis order is (|0>, |1>) and the Bloch sphere is oriented so that |0>
  sits at z = +1.
* A pure state with polar angle theta0 and azimuth phi0 has amplitudes
  (cos(theta0/2), exp(-1j*phi0)*sin(theta0/2)).  With this sign choice
  phi0 = 0 lies on the +x axis and the Bloch vector is
  (sin(theta0)*cos(phi0), -sin(theta0)*sin(phi0), cos(theta0)), so the
  azimuth read back from a Bloch vector is atan2(-y, x).
* States are carried as a 2x2 conditional density operator for the
  population still inside the qubit well, plus a scalar ``escaped``
  holding the probability that a tunneling event has already been
  recorded.  Tunneled population never re-enters coherently, so a scalar
  loses nothing.  The operator may be unnormalized: its trace is the
  joint probability of reaching the current point of a sequence with no
  detection.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UndefinedStateError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

TWO_PI = 2.0 * np.pi

# Tolerance policy: 1e-12 for identities that hold in exact arithmetic,
# 1e-9 for quantities that accumulate roundoff across a sweep.
EXACT_TOL = 1e-12
ROUNDOFF_TOL = 1e-9

# Below this conditional trace a normalized state is considered undefined.
TRACE_FLOOR = 1e-12


@dataclass(frozen=True)
class PureState:
    """Pure qubit state parameterized by polar angle and azimuth, in radians.

    The azimuth is stored reduced to [0, 2*pi).  The polar angle must lie
    in [0, pi].
    """

    theta0: float
    phi0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta0 <= np.pi + EXACT_TOL:
            raise DomainError(f"polar angle must lie in [0, pi], got {self.theta0}")
        object.__setattr__(self, "theta0", float(min(self.theta0, np.pi)))
        object.__setattr__(self, "phi0", float(self.phi0) % TWO_PI)

    def amplitudes(self) -> np.ndarray:
        """Amplitude pair (a0, a1); a1 carries the phase exp(-i*phi0)."""
        return np.array(
            [
                np.cos(self.theta0 / 2.0),
                np.exp(-1.0j * self.phi0) * np.sin(self.theta0 / 2.0),
            ],
            dtype=complex,
        )


@dataclass(frozen=True)
class BlochVector:
    """Cartesian Bloch components.

    Physical states satisfy ``x**2 + y**2 + z**2 <= 1`` with each component
    in [-1, 1]; call :meth:`validate` to enforce that.  Reconstruction from
    noisy counts may land slightly outside the unit ball, which is why the
    constructor itself does not reject such vectors.
    """

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))

    def validate(self, tol: float = ROUNDOFF_TOL) -> "BlochVector":
        for name, value in (("x", self.x), ("y", self.y), ("z", self.z)):
            if not -1.0 - tol <= value <= 1.0 + tol:
                raise DomainError(f"Bloch component {name}={value} outside [-1, 1]")
        if self.x**2 + self.y**2 + self.z**2 > 1.0 + tol:
            raise DomainError(f"Bloch vector of squared length {self.norm**2} leaves the unit ball")
        return self


@dataclass(frozen=True)
class QubitState:
    """Unnormalized conditional density operator plus escaped probability."""

    rho: np.ndarray
    escaped: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (2, 2):
            raise DomainError(f"density operator must be 2x2, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "escaped", float(self.escaped))

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    @property
    def purity(self) -> float:
        """tr(rho^2)/tr(rho)^2 of the normalized conditional state."""
        tr = self.trace
        if tr <= TRACE_FLOOR:
            raise UndefinedStateError("purity undefined: conditional trace is zero")
        return float(np.trace(self.rho @ self.rho).real / tr**2)

    def normalized(self) -> "QubitState":
        """Post-selected conditional state with unit trace and no escape record."""
        tr = self.trace
        if tr <= TRACE_FLOOR:
            raise UndefinedStateError("cannot normalize a vanished conditional state")
        return QubitState(self.rho / tr, 0.0)

    def validate(self, require_total: bool = True, atol: float = EXACT_TOL) -> "QubitState":
        """Check hermiticity, positivity, and probability bookkeeping.

        ``require_total`` additionally demands trace(rho) + escaped == 1,
        which holds whenever detected weight is moved into ``escaped``
        rather than silently discarded.
        """
        if np.max(np.abs(self.rho - self.rho.conj().T)) > atol:
            raise DomainError("density operator is not Hermitian")
        eigs = np.linalg.eigvalsh((self.rho + self.rho.conj().T) / 2.0)
        if eigs[0] < -atol:
            raise DomainError(f"density operator has negative eigenvalue {eigs[0]}")
        tr = self.trace
        if not -atol <= tr <= 1.0 + atol:
            raise DomainError(f"conditional trace {tr} outside [0, 1]")
        if not -atol <= self.escaped <= 1.0 + atol:
            raise DomainError(f"escaped probability {self.escaped} outside [0, 1]")
        total = tr + self.escaped
        if total > 1.0 + atol:
            raise DomainError(f"trace + escaped = {total} exceeds 1")
        if require_total and total < 1.0 - atol:
            raise DomainError(f"trace + escaped = {total} does not close to 1")
        return self


@dataclass(frozen=True)
class DeviceParams:
    """Device constants: relaxation/dephasing times (ns), level splitting,
    and readout visibility."""

    t1_ns: float
    t2_echo_ns: float
    t2_ramsey_ns: float
    e10_ghz: float = 6.75
    visibility: float = 1.0

    def __post_init__(self):
        for name in ("t1_ns", "t2_echo_ns", "t2_ramsey_ns"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"{name} must be positive")
        if self.t2_echo_ns > 2.0 * self.t1_ns * (1.0 + EXACT_TOL):
            raise DomainError("t2_echo_ns cannot exceed 2*t1_ns")
        if self.t2_ramsey_ns > self.t2_echo_ns * (1.0 + EXACT_TOL):
            raise DomainError("t2_ramsey_ns cannot exceed t2_echo_ns")
        if not 0.0 <= self.visibility <= 1.0:
            raise DomainError("visibility must lie in [0, 1]")
        if self.e10_ghz <= 0.0:
            raise DomainError("e10_ghz must be positive")


def default_device(visibility: float = 1.0) -> DeviceParams:
    """Default device constants used throughout: T1 = 450 ns, echo T2 = 350 ns,
    Ramsey T2 = 120 ns, 6.75 GHz splitting.

    Visibility defaults to 1 so analytic identities hold exactly; pass 0.9
    to mimic a realistic readout.
    """
    return DeviceParams(
        t1_ns=450.0,
        t2_echo_ns=350.0,
        t2_ramsey_ns=120.0,
        e10_ghz=6.75,
        visibility=visibility,
    )


def state_from_angles(s: PureState) -> QubitState:
    """Normalized density operator of the pure state (theta0, phi0)."""
    amps = s.amplitudes()
    return QubitState(np.outer(amps, amps.conj()), 0.0)


def bloch_from_state(q: QubitState) -> BlochVector:
    """Bloch vector of the normalized conditional state."""
    tr = q.trace
    if tr <= TRACE_FLOOR:
        raise UndefinedStateError("Bloch vector undefined: conditional trace is zero")
    rho = q.rho / tr
    return BlochVector(
        x=float(np.trace(rho @ SIGMA_X).real),
        y=float(np.trace(rho @ SIGMA_Y).real),
        z=float(np.trace(rho @ SIGMA_Z).real),
    )


def state_from_bloch(b: BlochVector) -> QubitState:
    """Density operator (1/2)(I + x*sx + y*sy + z*sz) for a physical vector."""
    b.validate()
    rho = 0.5 * (IDENTITY + b.x * SIGMA_X + b.y * SIGMA_Y + b.z * SIGMA_Z)
    return QubitState(rho, 0.0)


def state_fidelity(a: QubitState, b: QubitState) -> float:
    """Fidelity of the normalized conditional states.

    Uses the 2x2 closed form F = tr(a b) + 2*sqrt(det(a) det(b)), which for
    a pure target reduces to <psi| b |psi>.
    """
    ra = a.normalized().rho
    rb = b.normalized().rho
    cross = float(np.trace(ra @ rb).real)
    # roundoff can push a tiny determinant just below zero
    da = max(float(np.linalg.det(ra).real), 0.0)
    db = max(float(np.linalg.det(rb).real), 0.0)
    return cross + 2.0 * np.sqrt(da * db)


def relaxation_probability(d: DeviceParams, duration_ns: float) -> float:
    """Probability 1 - exp(-duration/T1) of an energy relaxation event."""
    if duration_ns < 0.0:
        raise DomainError("duration must be nonnegative")
    return float(-np.expm1(-duration_ns / d.t1_ns))
