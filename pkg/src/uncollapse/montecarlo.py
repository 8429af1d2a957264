"""Monte Carlo sampling of pulse sequences, shot by shot.

Each shot follows one stochastic trajectory through the sequence: partial
measurements either detect (probability p * rho_11) and terminate the
in-well evolution, or apply the null-branch map; decoherence is unraveled
jump/no-jump from the same Kraus decompositions used by exact evolution,
so the two engines agree in expectation by construction.

Randomness is counter based.  Shot ``k`` of stream ``j`` draws its
uniforms from a Philox generator keyed by the master seed with counter
block (j, k), so results are bit-identical no matter how shots are
batched or distributed across workers.  Stream indices 0, 1, 2 belong to
the x, y, z tomography settings; pipelines that need several independent
batches (several probes, several sweep points) offset the stream index.
"""

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .errors import DomainError, StructuralError
from .protocol import (
    FULL_MEASURE,
    IDLE,
    PARTIAL_MEASURE,
    PREPARE,
    ROTATE,
    TOMOGRAPHY_ROTATE,
    ExperimentConfig,
    PulseSequence,
    build_partial_collapse,
    build_uncollapse,
)
from .channels import tomography_rotation
from .qubit import state_from_angles
from .tomography import TOMO_SETTINGS, TomographyRecord, with_tomography

_KET0_DENSITY = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
_FLIP_SIGNS = np.array([[1.0, -1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class ShotRecord:
    """Trajectory summary for one shot.

    ``outcomes`` holds one detection flag per partial measurement in
    sequence order; ``final_detected`` is the full-measurement click.
    ``rng_seed`` is the (master_seed, stream_index, shot_index) triple that
    reproduces the shot.
    """

    rng_seed: tuple
    outcomes: tuple
    final_detected: bool

    @property
    def escaped(self) -> bool:
        return any(self.outcomes)


@dataclass(frozen=True)
class EstimateSet:
    """Sampled tomography probabilities with their standard errors."""

    record: TomographyRecord
    n_total: int


def _draw_count(seq: PulseSequence, cfg: ExperimentConfig) -> int:
    """Uniform draws one shot consumes: one per measurement event, two per
    decohered step."""
    count = 0
    for step in seq.steps:
        if step.kind == PARTIAL_MEASURE or step.kind == FULL_MEASURE:
            count += 1
        if cfg.decoherence_enabled and step.duration_ns > 0.0:
            count += 2
    return count


def _shot_uniforms(
    master_seed: int,
    stream_index: int,
    shot_start: int,
    n_shots: int,
    n_draws: int,
) -> np.ndarray:
    """Per-shot uniform variates from counter-based streams."""
    out = np.empty((n_shots, max(n_draws, 1)))
    for i in range(n_shots):
        bits = Philox(key=master_seed, counter=[0, 0, stream_index, shot_start + i])
        out[i] = Generator(bits).random(max(n_draws, 1))
    return out[:, :n_draws]


def _run_batch(seq: PulseSequence, cfg: ExperimentConfig, uniforms: np.ndarray):
    """Vectorized trajectory evolution for a batch of shots.

    Returns (outcomes, detected) where ``outcomes`` has shape
    (n_shots, n_partial_measurements).
    """
    n = uniforms.shape[0]
    rho = np.zeros((n, 2, 2), dtype=complex)
    alive = np.zeros(n, dtype=bool)
    detected = np.zeros(n, dtype=bool)
    outcomes = []
    col = 0
    visibility = cfg.device.visibility
    for index, step in enumerate(seq.steps):
        if step.kind == PREPARE:
            rho[:] = state_from_angles(step.payload).rho
            alive[:] = True
        elif step.kind == PARTIAL_MEASURE:
            m = step.payload
            u = uniforms[:, col]
            col += 1
            p11 = rho[:, 1, 1].real
            tunneled = alive & (u < m.p * p11)
            outcomes.append(tunneled)
            alive &= ~tunneled
            if alive.any():
                m0 = m.null_operator()
                sub = m0 @ rho[alive] @ m0.conj().T
                norm = np.trace(sub, axis1=1, axis2=2).real
                rho[alive] = sub / norm[:, None, None]
        elif step.kind == ROTATE or step.kind == TOMOGRAPHY_ROTATE:
            pulse = step.payload
            if step.kind == TOMOGRAPHY_ROTATE:
                pulse = tomography_rotation(step.payload, step.duration_ns)
            u_mat = pulse.unitary()
            rho[:] = u_mat @ rho @ u_mat.conj().T
        elif step.kind == FULL_MEASURE:
            if index != len(seq.steps) - 1:
                raise StructuralError("full_measure must be the final step")
            u = uniforms[:, col]
            col += 1
            detected = alive & (u < visibility * rho[:, 1, 1].real)
        elif step.kind == IDLE:
            pass
        else:
            raise StructuralError(f"unknown step kind {step.kind!r}")
        if cfg.decoherence_enabled and step.duration_ns > 0.0:
            dec = cfg.decoherence_for(step.duration_ns)
            u_jump = uniforms[:, col]
            u_flip = uniforms[:, col + 1]
            col += 2
            gamma = dec.gamma
            if gamma > 0.0:
                p_jump = gamma * rho[:, 1, 1].real
                jump = alive & (u_jump < p_jump)
                rho[jump] = _KET0_DENSITY
                no_jump = alive & ~jump
                if no_jump.any():
                    s = np.sqrt(1.0 - gamma)
                    scale = np.array([[1.0, s], [s, s * s]])
                    rho[no_jump] = rho[no_jump] * scale / (1.0 - p_jump[no_jump])[:, None, None]
            flip_prob = dec.lam / 2.0
            if flip_prob > 0.0:
                flip = alive & (u_flip < flip_prob)
                rho[flip] = rho[flip] * _FLIP_SIGNS
    if col != uniforms.shape[1]:
        raise StructuralError("uniform draw layout out of sync with the sequence")
    outcome_matrix = (
        np.stack(outcomes, axis=1) if outcomes else np.zeros((n, 0), dtype=bool)
    )
    return outcome_matrix, detected


def sample_sequence(
    seq: PulseSequence,
    cfg: ExperimentConfig,
    seed: int,
    stream_index: int = 0,
    shot_index: int = 0,
) -> ShotRecord:
    """Sample a single trajectory through ``seq``."""
    n_draws = _draw_count(seq, cfg)
    uniforms = _shot_uniforms(seed, stream_index, shot_index, 1, n_draws)
    outcomes, detected = _run_batch(seq, cfg, uniforms)
    return ShotRecord(
        rng_seed=(seed, stream_index, shot_index),
        outcomes=tuple(bool(v) for v in outcomes[0]),
        final_detected=bool(detected[0]),
    )


def estimate_probabilities(
    cfg: ExperimentConfig,
    n_shots: int,
    seed: int,
    kind: str = "uncollapse",
    stream_base: int = 0,
) -> EstimateSet:
    """Estimate the tomography record from ``n_shots`` per setting.

    A detection at any point of a shot counts toward that setting's
    probability, matching what a threshold detector reports; the background
    is estimated from pre-analysis detections pooled over the three
    settings.  Standard errors are sqrt(P(1-P)/n).
    """
    if n_shots < 1:
        raise DomainError("need at least one shot per setting")
    if kind == "collapse":
        base = build_partial_collapse(cfg)
    elif kind == "uncollapse":
        base = build_uncollapse(cfg)
    else:
        raise DomainError(f"unknown sequence kind {kind!r}")
    probs = {}
    errors = {}
    escape_total = 0
    for j, setting in enumerate(TOMO_SETTINGS):
        seq = with_tomography(base, setting, cfg.timing)
        uniforms = _shot_uniforms(seed, stream_base + j, 0, n_shots, _draw_count(seq, cfg))
        outcomes, detected = _run_batch(seq, cfg, uniforms)
        escaped = outcomes.any(axis=1)
        clicked = escaped | detected
        p_hat = float(np.count_nonzero(clicked)) / n_shots
        probs[setting] = p_hat
        errors[setting] = float(np.sqrt(p_hat * (1.0 - p_hat) / n_shots))
        escape_total += int(np.count_nonzero(escaped))
    pooled = 3 * n_shots
    p_b = escape_total / pooled
    record = TomographyRecord(
        p_x=probs["x"],
        p_y=probs["y"],
        p_z=probs["z"],
        p_b=p_b,
        shots=n_shots,
        stderr=(errors["x"], errors["y"], errors["z"]),
        stderr_b=float(np.sqrt(p_b * (1.0 - p_b) / pooled)),
    )
    return EstimateSet(record=record, n_total=n_shots)
