"""Quantum process tomography in the Pauli basis by linear inversion.

A single-qubit process is expanded as

    rho_out = sum_{m,n} chi[m, n] * sigma_m rho_in sigma_n

over the fixed operator basis (I, X, Y, Z).  Four linearly independent
probe states determine chi uniquely; the probes used by the built-in
pipelines are |1>, (|0>-i|1>)/sqrt(2), (|0>+|1>)/sqrt(2), |0>.  Process
outputs are the normalized post-selected states, so a trace-preserving
reconstruction has tr(chi) = 1, and the fidelity of the reversal sequence
to its ideal pi rotation is Re chi[X, X].

Linear inversion of noisy data may leave the physical set.  That is
reported through :func:`cp_diagnostics`, never repaired.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import SingularInversionError, StructuralError
from .montecarlo import estimate_probabilities
from .qubit import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    BlochVector,
    PureState,
    state_from_angles,
)
from .protocol import ExperimentConfig
from .tomography import bloch_reconstruct, exact_tomography_record

PAULI_BASIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)
PAULI_LABELS = ("I", "X", "Y", "Z")

PROBE_STATES = (
    PureState(np.pi, 0.0),            # |1>
    PureState(np.pi / 2.0, np.pi / 2.0),  # (|0> - i|1>)/sqrt(2)
    PureState(np.pi / 2.0, 0.0),      # (|0> + |1>)/sqrt(2)
    PureState(0.0, 0.0),              # |0>
)

_GRAM_FLOOR = 1e-6


def _raw_density(b: BlochVector) -> np.ndarray:
    # accepts slightly unphysical vectors from noisy reconstruction
    return 0.5 * (IDENTITY + b.x * SIGMA_X + b.y * SIGMA_Y + b.z * SIGMA_Z)


@dataclass(frozen=True)
class ProbeSet:
    """Four probe inputs paired with their reconstructed output vectors."""

    inputs: tuple
    outputs: tuple

    def __post_init__(self):
        if len(self.inputs) != 4 or len(self.outputs) != 4:
            raise StructuralError("process tomography needs exactly four probes")
        rhos = [state_from_angles(s).rho for s in self.inputs]
        gram = np.array(
            [[np.trace(a @ b).real for b in rhos] for a in rhos], dtype=float
        )
        if abs(np.linalg.det(gram)) < _GRAM_FLOOR:
            raise SingularInversionError("probe states are not linearly independent")


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix in the (I, X, Y, Z) basis."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (4, 4):
            raise StructuralError(f"chi must be 4x4, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


@dataclass(frozen=True)
class CpReport:
    """Diagnostics for complete positivity of a reconstructed process."""

    eigenvalues: tuple
    min_eigenvalue: float
    hermiticity_residual: float
    trace_deviation: float
    is_cp: bool


def chi_apply(chi: ChiMatrix, rho: np.ndarray) -> np.ndarray:
    """Act with the process on a density operator."""
    out = np.zeros((2, 2), dtype=complex)
    for m in range(4):
        for n in range(4):
            out += chi.matrix[m, n] * (PAULI_BASIS[m] @ rho @ PAULI_BASIS[n])
    return out


def qpt_reconstruct(probes: ProbeSet) -> ChiMatrix:
    """Solve the 16x16 linear system mapping chi onto the probe outputs."""
    a = np.zeros((16, 16), dtype=complex)
    b = np.zeros(16, dtype=complex)
    for i, (probe, out_vec) in enumerate(zip(probes.inputs, probes.outputs)):
        rho_in = state_from_angles(probe).rho
        b[4 * i : 4 * i + 4] = _raw_density(out_vec).reshape(4)
        for m in range(4):
            for n in range(4):
                column = 4 * m + n
                a[4 * i : 4 * i + 4, column] = (
                    PAULI_BASIS[m] @ rho_in @ PAULI_BASIS[n]
                ).reshape(4)
    if np.linalg.cond(a) > 1e12:
        raise SingularInversionError("probe design matrix is numerically singular")
    try:
        solution = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularInversionError(str(exc)) from exc
    return ChiMatrix(solution.reshape(4, 4))


def process_fidelity(chi: ChiMatrix) -> float:
    """Overlap with the ideal pi rotation about X: Re chi[X, X]."""
    return float(chi.matrix[1, 1].real)


def cp_diagnostics(chi: ChiMatrix, tol: float = 1e-9) -> CpReport:
    """Eigenvalue and hermiticity report; flags (but keeps) non-CP results."""
    herm = chi.hermiticity_residual()
    eigs = np.linalg.eigvalsh((chi.matrix + chi.matrix.conj().T) / 2.0)
    return CpReport(
        eigenvalues=tuple(float(v) for v in eigs),
        min_eigenvalue=float(eigs[0]),
        hermiticity_residual=herm,
        trace_deviation=float(abs(chi.trace - 1.0)),
        is_cp=bool(eigs[0] >= -tol and herm <= tol),
    )


def exact_uncollapse_chi(cfg: ExperimentConfig) -> ChiMatrix:
    """Process matrix of the reversal sequence from exact evolution."""
    outputs = []
    for probe in PROBE_STATES:
        record, _ = exact_tomography_record(replace(cfg, initial=probe), "uncollapse")
        outputs.append(bloch_reconstruct(record))
    return qpt_reconstruct(ProbeSet(PROBE_STATES, tuple(outputs)))


def montecarlo_uncollapse_chi(cfg: ExperimentConfig, n_shots: int, seed: int) -> ChiMatrix:
    """Process matrix of the reversal sequence from sampled counts.

    Each probe uses its own block of per-shot random streams so the result
    is reproducible and independent of how shots are batched.
    """
    outputs = []
    for i, probe in enumerate(PROBE_STATES):
        estimate = estimate_probabilities(
            replace(cfg, initial=probe),
            n_shots,
            seed,
            kind="uncollapse",
            stream_base=3 * i,
        )
        outputs.append(bloch_reconstruct(estimate.record))
    return qpt_reconstruct(ProbeSet(PROBE_STATES, tuple(outputs)))
