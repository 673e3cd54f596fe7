#!/usr/bin/env python3
"""
Tests for particle flows, random streams and the Monte Carlo estimators
"""
import numpy as np
import pytest
from scipy.integrate import solve_ivp

from src.models.errors import SimulationError
from src.models.extension import ExtendedElement
from src.models.fields import SpectralScalarField, VelocityField
from src.models.noise import KolmogorovBasis, ParticleEnsemble, TwoConstantFields
from src.models.solver_data import SolverConfig
from src.operations.generator_suite import START, probe, probe_laplacian
from src.services.qgs_solver import QGSSolver, TestDirection, cocycle_params, variational_residual
from src.services.stochastic_flow import (
    BLOCK_SIZE,
    SampledDrift,
    SteadyDrift,
    action_estimate,
    action_integral,
    displacement_moments,
    displacement_variance,
    estimate_drift,
    estimate_generator,
    minimal_image,
    noise_increments,
    occupancy_p_value,
    phase_rate,
    point_ensemble,
    simulate,
    uniform_ensemble,
    zero_drift,
)
from src.utils.central_extension import ext_bracket
from src.utils.spectral_grid import TWO_PI
from src.utils.torus_spectral import l2_inner, l2_norm, random_band_limited, random_velocity


def cellular_drift(n=16, amplitude=0.5):
    psi = SpectralScalarField.from_function(n, lambda t1, t2: amplitude * np.sin(t1) * np.cos(t2))
    return SteadyDrift(VelocityField(psi))


# ==================== RANDOM STREAMS ====================

def test_increments_depend_only_on_key():
    a = noise_increments(7, 3, 1, 100, 2, 0.01)
    b = noise_increments(7, 3, 1, 100, 2, 0.01)
    c = noise_increments(7, 4, 1, 100, 2, 0.01)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.shape == (100, 2)


def test_uniform_ensemble_is_reproducible_and_in_range():
    first = uniform_ensemble(2 * BLOCK_SIZE + 10, seed=3)
    second = uniform_ensemble(2 * BLOCK_SIZE + 10, seed=3)
    assert np.array_equal(first.positions, second.positions)
    assert np.all((first.positions >= 0) & (first.positions < TWO_PI))
    assert first.n_particles == 2 * BLOCK_SIZE + 10
    with pytest.raises(ValueError):
        uniform_ensemble(0)


def test_ensemble_wraps_positions():
    ensemble = ParticleEnsemble(np.array([[7.0, -1.0]]))
    assert ensemble.positions[0] == pytest.approx([7.0 - TWO_PI, TWO_PI - 1.0])
    assert ensemble.central_phase.tolist() == [0.0]
    with pytest.raises(ValueError):
        ParticleEnsemble(np.zeros((3, 3)))


def test_paths_do_not_depend_on_thread_count(monkeypatch):
    ensemble = uniform_ensemble(3 * BLOCK_SIZE, seed=11)
    runs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("QGS_THREADS", threads)
        paths = simulate(KolmogorovBasis(2, 3.0), cellular_drift(), 0.5, ensemble, 0.01, 0.05)
        runs.append(paths)
    assert np.array_equal(runs[0].positions, runs[1].positions)
    assert np.array_equal(runs[0].displacement, runs[1].displacement)
    assert np.array_equal(runs[0].phase, runs[1].phase)


# ==================== SIMULATION ====================

def test_simulate_validates_arguments():
    ensemble = point_ensemble(10, 0.0, 0.0)
    with pytest.raises(ValueError):
        simulate(None, zero_drift(8), 0.0, ensemble, 0.01, 0.1, scheme="milstein")
    with pytest.raises(ValueError):
        simulate(None, zero_drift(8), 0.0, ensemble, 0.0, 0.1)
    with pytest.raises(ValueError):
        simulate(None, zero_drift(8), 0.0, ensemble, 0.03, 0.1)


def test_records_include_both_ends():
    paths = simulate(None, zero_drift(8), 1.0, point_ensemble(5, 1.0, 2.0), 0.01, 0.1, record_every=3)
    assert paths.times == pytest.approx([0.0, 0.03, 0.06, 0.09, 0.1])
    assert paths.positions.shape == (5, 5, 2)
    assert np.all(paths.positions == paths.positions[0])


def test_brownian_variance_is_two_nu_t():
    nu, tau = 0.5, 0.5
    paths = simulate(TwoConstantFields(nu), zero_drift(8), 0.0, point_ensemble(20_000, 1.0, 1.0, seed=5),
                     0.01, tau)
    variance = displacement_variance(paths)
    assert variance == pytest.approx([2 * nu * tau] * 2, rel=0.05)
    mean, cov = displacement_moments(paths)
    assert np.all(np.abs(mean) < 4 * np.sqrt(2 * nu * tau / 20_000))
    assert abs(cov[0, 1]) < 0.05 * 2 * nu * tau


def test_deterministic_flow_follows_drift():
    # constant drift (1, 0) transports every particle by τ in θ₁
    paths = simulate(None, SteadyDrift(VelocityField.constant(8, 1.0, 0.0)), 0.0,
                     point_ensemble(4, 0.5, 0.5), 0.01, 1.0)
    assert paths.displacement[-1] == pytest.approx(np.tile([1.0, 0.0], (4, 1)))
    assert paths.positions[-1] == pytest.approx(np.tile([1.5, 0.5], (4, 1)))


@pytest.mark.parametrize("stream", [
    lambda t1, t2: 0.2 * np.cos(t1 + 2 * t2),
    lambda t1, t2: 0.2 * np.cos(t1 + 2 * t2) + 0.1 * np.sin(2 * t1 - t2),
], ids=["single_mode", "two_modes"])
def test_noise_off_particles_follow_characteristics(stream):
    drift = SteadyDrift(VelocityField(SpectralScalarField.from_function(16, stream)))
    start = uniform_ensemble(16, seed=6)
    tau = 0.5
    paths = simulate(None, drift, 0.0, start, 2.5e-4, tau)

    def rhs(t, y):
        return drift.evaluate(t, y.reshape(-1, 2)).ravel()

    oracle = solve_ivp(rhs, (0.0, tau), start.positions.ravel(), method="DOP853", rtol=1e-12, atol=1e-12)
    expected = oracle.y[:, -1].reshape(-1, 2) - start.positions
    assert np.max(np.abs(paths.displacement[-1] - expected)) < 1e-6


def test_uniform_ensemble_stays_uniform_under_the_flow():
    paths = simulate(KolmogorovBasis(2, 3.0), cellular_drift(), 0.0, uniform_ensemble(50_000, seed=13),
                     0.01, 1.0, record_every=100)
    assert paths.times[-1] == pytest.approx(1.0)
    assert occupancy_p_value(paths.positions[-1], bins=16) > 0.01


def test_sampled_drift_interpolates_and_rejects_out_of_range():
    u0 = VelocityField.constant(8, 1.0, 0.0)
    u1 = VelocityField.constant(8, 3.0, 2.0)
    drift = SampledDrift([0.0, 1.0], [u0, u1])
    assert drift.evaluate(0.5, np.array([[0.1, 0.2]]))[0] == pytest.approx([2.0, 1.0])
    assert drift.velocity(1.0) is u1
    with pytest.raises(SimulationError):
        drift.evaluate(1.5, np.zeros((1, 2)))
    with pytest.raises(SimulationError):
        simulate(None, drift, 0.0, point_ensemble(2, 0.0, 0.0), 0.5, 2.0)
    with pytest.raises(ValueError):
        SampledDrift([0.0], [u0, u1])


# ==================== ESTIMATORS ====================

def test_minimal_image():
    delta = np.array([0.5, np.pi, -np.pi + 0.1, 2 * np.pi - 0.2, -3 * np.pi / 2])
    expected = np.array([0.5, np.pi, -np.pi + 0.1, -0.2, np.pi / 2])
    assert minimal_image(delta) == pytest.approx(expected)


@pytest.mark.parametrize("noise", [TwoConstantFields(0.05), KolmogorovBasis(2, 3.0)], ids=["two_field", "kolmogorov"])
def test_drift_is_recovered_within_three_standard_errors(noise):
    drift = cellular_drift()
    ensemble = uniform_ensemble(200_000, seed=8)
    paths = simulate(noise, drift, 0.0, ensemble, 0.01, 0.01)
    estimate = estimate_drift(paths, 0.0, window=1, bins=8, reference=drift)
    assert estimate.counts.sum() == 200_000
    assert not np.any(estimate.missing)
    assert estimate.fraction_within(3.0) >= 0.95
    with pytest.raises(ValueError):
        estimate_drift(paths, 0.0, window=2)


def test_drift_estimate_without_reference_has_no_z_scores():
    paths = simulate(None, zero_drift(8), 0.0, uniform_ensemble(100), 0.01, 0.02)
    estimate = estimate_drift(paths, 0.0, bins=4)
    with pytest.raises(ValueError):
        estimate.z_scores()


def test_phase_advances_at_rate_a():
    a = 0.75
    drift = cellular_drift()
    paths = simulate(TwoConstantFields(0.1), drift, a, uniform_ensemble(500, seed=2), 0.01, 0.2)
    assert phase_rate(paths, 0.0, window=5) == pytest.approx(a, rel=1e-12)
    assert paths.phase[-1] == pytest.approx(np.full(500, a * 0.2))
    u = drift.velocity(0.0)
    assert action_estimate(paths, drift, a) == pytest.approx(0.5 * 0.2 * (l2_inner(u, u) + a * a), rel=1e-12)
    with pytest.raises(ValueError):
        action_estimate(paths, drift, 2 * a)


@pytest.mark.parametrize("noise", [KolmogorovBasis(1, 3.0), TwoConstantFields(0.5)], ids=["kolmogorov", "two_field"])
def test_monte_carlo_generator_is_nu_laplacian(noise):
    expected = noise.diffusion_coefficient() * float(probe_laplacian(np.array([START]))[0])
    estimates = []
    for scheme in ("heun", "euler_maruyama"):
        paths = simulate(noise, zero_drift(16), 0.0, point_ensemble(100_000, *START, seed=1), 0.001, 0.01,
                         scheme=scheme)
        estimates.append(estimate_generator(paths, probe))
    (heun, heun_se), (em, em_se) = estimates
    assert abs(heun - expected) < 3 * heun_se
    assert abs(heun - em) < 3 * np.hypot(heun_se, em_se)


def test_generator_estimate_needs_elapsed_time():
    paths = simulate(None, zero_drift(8), 0.0, point_ensemble(3, 0.0, 0.0), 0.01, 0.01)
    with pytest.raises(ValueError):
        estimate_generator(paths, probe, t=0.0)


def test_occupancy_p_value():
    assert occupancy_p_value(uniform_ensemble(50_000, seed=4).positions, bins=8) > 1e-3
    clustered = np.tile([[0.1, 0.1]], (5000, 1))
    assert occupancy_p_value(clustered, bins=8) < 1e-10


# ==================== ACTION ====================

def test_action_integral_accepts_time_dependent_phase_rate():
    times = np.linspace(0.0, 2.0, 5)
    fields = [VelocityField.zeros(8)] * 5
    assert action_integral(times, fields, 1.0) == pytest.approx(1.0)
    assert action_integral(times, fields, np.full(5, 1.0)) == pytest.approx(1.0)


def test_action_is_stationary_along_admissible_variations():
    n = 32
    config = SolverConfig(n=n, dt=5e-3, steps=200, beta=1.0, a=1.0)
    rng = np.random.default_rng(61)
    psi0 = random_band_limited(n, 3, rng)
    solver = QGSSolver(config, psi0 * (0.1 / l2_norm(VelocityField(psi0))))
    solver.run()
    history = solver.history
    times = np.array([s.t for s in history])
    trajectory = [ExtendedElement(VelocityField(s.psi), config.a) for s in history]

    v = random_velocity(n, 3, rng)
    v_hat = ExtendedElement(v * (1.0 / l2_norm(v)), 0.0)
    direction = TestDirection(v_hat, t0=0.0, tau=config.tau)
    p = cocycle_params(config)
    phi, phi_rate = direction.phi(times), direction.phi_rate(times)
    # δû = φ'v̂ − φ[v̂, û]
    variations = [v_hat * phi_rate[i] - ext_bracket(v_hat, u_hat, p) * phi[i]
                  for i, u_hat in enumerate(trajectory)]

    def action(eps):
        perturbed = [u_hat + dv * eps for u_hat, dv in zip(trajectory, variations)]
        return action_integral(times, [w.u for w in perturbed], np.array([w.a for w in perturbed]))

    base = action(0.0)
    assert base == pytest.approx(0.5 * config.tau * (0.01 + config.a ** 2), rel=1e-9)
    small, large = action(0.05) - base, action(0.1) - base
    assert small > 0.0
    assert large / small == pytest.approx(4.0, rel=1e-3)
    assert abs(variational_residual(trajectory, times, direction, config)) < 1e-5
