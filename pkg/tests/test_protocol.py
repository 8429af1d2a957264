"""Sequence construction and exact conditional evolution."""

import numpy as np
import pytest

from uncollapse import (
    DomainError,
    ExperimentConfig,
    PulseSequence,
    PulseTiming,
    PureState,
    RotationPulse,
    SequenceStep,
    StructuralError,
    UndefinedStateError,
    apply_rotation,
    bloch_from_state,
    build_partial_collapse,
    build_uncollapse,
    polar_azimuth,
    run_exact,
    state_fidelity,
    state_from_angles,
    success_probability,
    theory_polar_angle,
)
from uncollapse.protocol import FULL_MEASURE, IDLE, PARTIAL_MEASURE, PREPARE, ROTATE


def _cfg(theta0=np.pi / 2, phi0=0.0, **kw):
    return ExperimentConfig(initial=PureState(theta0, phi0), **kw)


def test_default_timing_totals_44_ns():
    t = PulseTiming()
    assert t.uncollapse_total_ns == 44.0
    assert build_uncollapse(_cfg(p=0.5)).total_duration_ns == 34.0  # analysis pulse excluded


def test_sequence_rejects_overlapping_steps():
    with pytest.raises(StructuralError):
        PulseSequence(
            (
                SequenceStep(PREPARE, 0.0, 10.0, PureState(0.0)),
                SequenceStep(IDLE, 5.0, 10.0),
            )
        )


def test_sequence_step_kind_and_duration_checks():
    with pytest.raises(StructuralError):
        SequenceStep("warmup", 0.0, 1.0)
    with pytest.raises(StructuralError):
        SequenceStep(IDLE, 0.0, -1.0)


def test_run_exact_structural_errors():
    cfg = _cfg(p=0.3)
    with pytest.raises(StructuralError):
        run_exact(PulseSequence(()), cfg)
    no_prepare = PulseSequence((SequenceStep(IDLE, 0.0, 5.0),))
    with pytest.raises(StructuralError):
        run_exact(no_prepare, cfg)
    double_prepare = PulseSequence(
        (
            SequenceStep(PREPARE, 0.0, 10.0, PureState(0.0)),
            SequenceStep(PREPARE, 10.0, 10.0, PureState(0.0)),
        )
    )
    with pytest.raises(StructuralError):
        run_exact(double_prepare, cfg)
    misplaced_full = PulseSequence(
        (
            SequenceStep(PREPARE, 0.0, 10.0, PureState(0.0)),
            SequenceStep(FULL_MEASURE, 10.0, 0.0),
            SequenceStep(IDLE, 10.0, 5.0),
        )
    )
    with pytest.raises(StructuralError):
        run_exact(misplaced_full, cfg)


def test_reversal_restores_the_rotated_initial_state():
    # conditioned on two null results the sequence acts as a pi rotation
    # about X on every input, for every strength and measurement phase
    rng = np.random.default_rng(101)
    worst = 1.0
    for _ in range(200):
        theta0 = rng.uniform(0, np.pi)
        phi0 = rng.uniform(0, 2 * np.pi)
        p = rng.uniform(0, 0.99)
        rate = rng.uniform(0, 8 * np.pi)
        cfg = _cfg(theta0, phi0, p=p, phi_m_rate=rate)
        out = run_exact(build_uncollapse(cfg), cfg)
        target = apply_rotation(
            state_from_angles(PureState(theta0, phi0)), RotationPulse.about_x(np.pi)
        )
        worst = min(worst, state_fidelity(out.conditional, target))
    assert worst >= 1.0 - 1e-10


def test_success_probability_is_one_minus_p():
    rng = np.random.default_rng(59)
    for _ in range(50):
        theta0 = rng.uniform(0, np.pi)
        p = rng.uniform(0, 0.99)
        cfg = _cfg(theta0, rng.uniform(0, 2 * np.pi), p=p)
        assert abs(success_probability(cfg) - (1.0 - p)) < 1e-12


def test_background_probabilities_closed_forms():
    rng = np.random.default_rng(61)
    for _ in range(50):
        theta0 = rng.uniform(0, np.pi)
        phi0 = rng.uniform(0, 2 * np.pi)
        p = rng.uniform(0, 0.99)
        collapse = run_exact(build_partial_collapse(_cfg(theta0, phi0, p=p)), _cfg(theta0, phi0, p=p))
        assert abs(collapse.p_background - p * np.sin(theta0 / 2.0) ** 2) < 1e-12
        reversal = run_exact(build_uncollapse(_cfg(theta0, phi0, p=p)), _cfg(theta0, phi0, p=p))
        assert abs(reversal.p_background - p) < 1e-12   # independent of the state


def test_measurement_phase_cancels_through_the_echo():
    # the reversal output must not depend on the phase model at all
    base = _cfg(1.1, 0.4, p=0.6, phi_m_rate=4 * np.pi)
    ref = run_exact(build_uncollapse(base), base).conditional
    for model in (lambda p: 0.0, lambda p: 2.9, lambda p: 11.0 * p * p):
        cfg = _cfg(1.1, 0.4, p=0.6, phi_m_model=model)
        out = run_exact(build_uncollapse(cfg), cfg).conditional
        assert np.max(np.abs(out.rho - ref.rho)) < 1e-10


def test_wrong_recovery_pulse_exposes_the_measurement_phase():
    outputs = []
    for rate in (0.0, 4 * np.pi):
        cfg = _cfg(1.1, 0.4, p=0.6, pi_fraction=0.9, phi_m_rate=rate)
        outputs.append(run_exact(build_uncollapse(cfg), cfg).conditional)
    assert np.max(np.abs(outputs[0].rho - outputs[1].rho)) > 1e-3


def test_polar_angle_law_collapse_and_reversal():
    rng = np.random.default_rng(71)
    for _ in range(50):
        theta0 = rng.uniform(0.05, np.pi - 0.05)
        p = rng.uniform(0, 0.99)
        cfg = _cfg(theta0, 0.0, p=p)
        col = run_exact(build_partial_collapse(cfg), cfg)
        theta, _ = polar_azimuth(bloch_from_state(col.conditional.normalized()))
        assert abs(theta - theory_polar_angle("collapse", theta0, p)) < 1e-10
        rev = run_exact(build_uncollapse(cfg), cfg)
        theta_r, _ = polar_azimuth(bloch_from_state(rev.conditional.normalized()))
        assert abs(theta_r - theory_polar_angle("uncollapse", theta0, p)) < 1e-10
        assert abs(theory_polar_angle("uncollapse", theta0, p) - (np.pi - theta0)) < 1e-15


def test_theory_polar_angle_domain_errors():
    with pytest.raises(DomainError):
        theory_polar_angle("collapse", -0.1, 0.5)
    with pytest.raises(DomainError):
        theory_polar_angle("collapse", 1.0, 1.5)
    with pytest.raises(DomainError):
        theory_polar_angle("sideways", 1.0, 0.5)
    with pytest.raises(UndefinedStateError):
        theory_polar_angle("collapse", np.pi, 1.0)   # state escapes with certainty
    # the atan2 form stays finite at theta0 = pi for p < 1
    assert abs(theory_polar_angle("collapse", np.pi, 0.9) - np.pi) < 1e-12


def test_relaxation_raises_reversal_success_above_ideal():
    # energy relaxation funnels weight toward |0>, which never tunnels, so
    # with decoherence on the two-null probability exceeds 1 - p.
    # oracle: hand-rolled density-matrix evolution of the same step list
    p, theta0 = 0.47, np.pi / 2
    cfg = _cfg(theta0, 0.0, p=p, decoherence_enabled=True)

    t1 = 450.0
    t2 = 350.0
    t_phi = 1.0 / (1.0 / t2 - 1.0 / (2.0 * t1))
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    escaped = 0.0

    def decohere(rho, dt):
        g = 1.0 - np.exp(-dt / t1)
        out = np.array(
            [
                [rho[0, 0] + g * rho[1, 1], np.sqrt(1 - g) * rho[0, 1]],
                [np.sqrt(1 - g) * rho[1, 0], (1 - g) * rho[1, 1]],
            ]
        )
        decay = np.exp(-dt / t_phi)
        out[0, 1] *= decay
        out[1, 0] *= decay
        return out

    def measure(rho, escaped, phi_m):
        m0 = np.diag([1.0, np.sqrt(1.0 - p) * np.exp(-1.0j * phi_m)])
        return m0 @ rho @ m0.conj().T, escaped + p * rho[1, 1].real

    phi_m = 4 * np.pi * p
    rho = decohere(rho, 10.0)                       # prepare window
    rho, escaped = measure(rho, escaped, phi_m)
    rho = decohere(rho, 3.0)
    rho = decohere(rho, 8.0)                        # idle
    u = np.array([[np.cos(np.pi / 2), -1.0j * np.sin(np.pi / 2)],
                  [-1.0j * np.sin(np.pi / 2), np.cos(np.pi / 2)]])
    rho = decohere(u @ rho @ u.conj().T, 10.0)      # recovery pulse
    rho, escaped = measure(rho, escaped, phi_m)
    rho = decohere(rho, 3.0)
    expected_success = np.trace(rho).real

    got = success_probability(cfg)
    assert abs(got - expected_success) < 1e-12
    assert got > 1.0 - p                            # relaxation protects population
    ideal = success_probability(_cfg(theta0, 0.0, p=p))
    assert abs(ideal - (1.0 - p)) < 1e-12


def test_decoherence_degrades_recovery_monotonically():
    fidelities = []
    for p in np.linspace(0.0, 0.9, 10):
        cfg = _cfg(np.pi / 2, 0.0, p=p, decoherence_enabled=True)
        out = run_exact(build_uncollapse(cfg), cfg)
        target = apply_rotation(
            state_from_angles(PureState(np.pi / 2, 0.0)), RotationPulse.about_x(np.pi)
        )
        fidelities.append(state_fidelity(out.conditional, target))
    assert all(a > b for a, b in zip(fidelities, fidelities[1:]))
    assert fidelities[0] < 1.0


def test_strength_calibration_bias_shifts_the_realized_strength():
    f = 0.05
    cfg = _cfg(np.pi / 2, 0.0, p=0.4, p_error_fraction=f)
    assert abs(cfg.effective_p() - 0.42) < 1e-15
    col = run_exact(build_partial_collapse(cfg), cfg)
    theta, _ = polar_azimuth(bloch_from_state(col.conditional.normalized()))
    assert abs(theta - theory_polar_angle("collapse", np.pi / 2, 0.42)) < 1e-12
    assert abs(success_probability(cfg) - (1.0 - 0.42)) < 1e-12
    # default off reproduces the nominal dial exactly
    assert abs(success_probability(_cfg(np.pi / 2, 0.0, p=0.4)) - 0.6) < 1e-15
    # biased strength clips at 1
    assert ExperimentConfig(PureState(0.3), p=0.99, p_error_fraction=0.05).effective_p() == 1.0


def test_experiment_config_validation():
    with pytest.raises(DomainError):
        _cfg(p=1.2)
    with pytest.raises(DomainError):
        _cfg(p=0.5, pi_fraction=-0.1)
    with pytest.raises(DomainError):
        _cfg(p=0.5, p_error_fraction=-1.0)
    with pytest.raises(DomainError):
        _cfg(p=0.5, p_error_fraction=float("nan"))


def test_at_strength_returns_adjusted_copy():
    cfg = _cfg(p=0.1, phi_m_rate=2.0)
    other = cfg.at_strength(0.8)
    assert other.p == 0.8 and other.phi_m_rate == 2.0 and cfg.p == 0.1


def test_ramsey_dephasing_switch_degrades_faster():
    echo = _cfg(np.pi / 2, 0.0, p=0.3, decoherence_enabled=True, use_echo_t2=True)
    ramsey = _cfg(np.pi / 2, 0.0, p=0.3, decoherence_enabled=True, use_echo_t2=False)
    target = apply_rotation(
        state_from_angles(PureState(np.pi / 2, 0.0)), RotationPulse.about_x(np.pi)
    )
    f_echo = state_fidelity(run_exact(build_uncollapse(echo), echo).conditional, target)
    f_ramsey = state_fidelity(run_exact(build_uncollapse(ramsey), ramsey).conditional, target)
    assert f_ramsey < f_echo
