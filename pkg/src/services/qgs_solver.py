"""
QGSSolver - deterministic integration of the viscous quasi-geostrophic equation

    ∂_t Δψ + {ψ, Δψ} + a·β ∂₁ψ − νΔ²ψ + σ_op Δψ = 0

in vorticity form (ETDRK4 on q̂ = −|k|²ψ̂), together with the abstract
extended Euler-Arnold form

    d/dt u = −ad*_u u + a·Tu + K(u) + ½ Σ_i ω(u, H_i)·TH_i,   d/dt a = 0

and the first-variation residual that characterises its solutions.

The physical β enters the extension algebra through α = −β·θ₂, which gives
the Rossby dispersion ω_R = −a·β·k1/|k|².
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from ..models.errors import SolverInstabilityError
from ..models.extension import CocycleParams, ExtendedElement
from ..models.fields import SpectralScalarField, VelocityField
from ..models.noise import NoiseModel
from ..models.solver_data import SigmaMode, SolverConfig, SolverState
from ..utils import spectral_grid
from ..utils.central_extension import (
    coad,
    correction_sum,
    damping_multiplier_grid,
    ext_bracket,
    ext_inner,
    viscous_term,
)
from ..utils.spectral_grid import TORUS_AREA
from ..utils.torus_spectral import (
    laplacian,
    poisson_bracket,
    pressure,
    random_band_limited,
)

logger = logging.getLogger(__name__)

# Points on the contour used for the ETDRK4 φ-function averages
CONTOUR_POINTS = 32


# ==================== LINEAR PART ====================

def cocycle_params(config: SolverConfig) -> CocycleParams:
    """Cocycle realising the solver's β: α = −β·θ₂."""
    return CocycleParams(beta=-config.beta)


def drag_multiplier(config: SolverConfig) -> np.ndarray:
    """σ_op(k) ≥ 0 on the FFT grid."""
    n = config.n
    if config.sigma_mode is SigmaMode.CONSTANT:
        return np.full((n, n), float(config.sigma))
    if config.sigma_mode is SigmaMode.SPECTRAL:
        return -0.5 * damping_multiplier_grid(n, config.m, config.r, cocycle_params(config))
    return np.zeros((n, n))


def linear_symbol(config: SolverConfig) -> np.ndarray:
    """L(k) = i·a·β·k1/|k|² − ν|k|² − σ_op(k), acting on q̂."""
    n = config.n
    k1, _ = spectral_grid.derivative_wavenumbers(n)
    ksq = spectral_grid.wavenumber_squared(n)
    inv_ksq = spectral_grid.inverse_wavenumber_squared(n)
    symbol = 1j * config.a * config.beta * k1 * inv_ksq - config.nu * ksq - drag_multiplier(config)
    symbol = symbol.astype(complex)
    symbol[0, 0] = 0.0
    return symbol


# ==================== VORTICITY FORM ====================

def stream_from_vorticity(q_hat: np.ndarray) -> SpectralScalarField:
    n = q_hat.shape[0]
    return SpectralScalarField(n, -q_hat * spectral_grid.inverse_wavenumber_squared(n))


def advection_term(q_hat: np.ndarray, dealias: bool = True) -> np.ndarray:
    """−{ψ, q} for ψ = Δ⁻¹q."""
    n = q_hat.shape[0]
    psi = stream_from_vorticity(q_hat)
    return -poisson_bracket(psi, SpectralScalarField(n, q_hat), dealiased=dealias).coeffs


def vorticity_rhs(psi: SpectralScalarField, config: SolverConfig) -> SpectralScalarField:
    """
    ∂_t q = −{ψ, q} − a·β·∂₁ψ + νΔq − σ_op q with q = Δψ.

    Args:
        psi: zero-mean stream function at resolution config.n
        config: solver parameters

    Returns:
        Spectral time derivative of the vorticity
    """
    if psi.n != config.n:
        raise ValueError(f"Resolution mismatch: {psi.n} vs {config.n}")
    q_hat = laplacian(psi).coeffs
    rhs = advection_term(q_hat, config.dealias) + linear_symbol(config) * q_hat
    return SpectralScalarField(config.n, rhs)


class ETDRK4Integrator:
    """
    Exponential time differencing RK4 for q̂' = L q̂ + N(q̂) with diagonal L.

    The linear part is integrated exactly; φ-function coefficients are
    contour averages around dt·L, so complex (dispersive) symbols are handled.
    """

    def __init__(self, linear: np.ndarray, nonlinear: Callable[[np.ndarray], np.ndarray],
                 dt: float, contour_points: int = CONTOUR_POINTS):
        self.linear = linear
        self.nonlinear = nonlinear
        self.dt = dt
        self.exp_full = np.exp(dt * linear)
        self.exp_half = np.exp(0.5 * dt * linear)
        roots = np.exp(2j * np.pi * (np.arange(contour_points) + 0.5) / contour_points)
        lr = dt * linear[..., None] + roots
        lr_sq = lr ** 2
        lr_cub = lr ** 3
        exp_lr = np.exp(lr)
        self.coeff_f0 = dt * ((np.exp(lr / 2.0) - 1.0) / lr).mean(axis=-1)
        self.coeff_f1 = dt * ((-4.0 - lr + exp_lr * (4.0 - 3.0 * lr + lr_sq)) / lr_cub).mean(axis=-1)
        self.coeff_f2 = dt * ((2.0 + lr + exp_lr * (lr - 2.0)) / lr_cub).mean(axis=-1)
        self.coeff_f3 = dt * ((-4.0 - 3.0 * lr - lr_sq + exp_lr * (4.0 - lr)) / lr_cub).mean(axis=-1)
        logger.debug("ETDRK4 coefficients ready (shape %s, dt=%g)", linear.shape, dt)

    def step(self, state: np.ndarray) -> np.ndarray:
        n_0 = self.nonlinear(state)
        state_1 = self.exp_half * state + self.coeff_f0 * n_0
        n_1 = self.nonlinear(state_1)
        state_2 = self.exp_half * state + self.coeff_f0 * n_1
        n_2 = self.nonlinear(state_2)
        state_3 = self.exp_half * state_1 + self.coeff_f0 * (2.0 * n_2 - n_0)
        n_3 = self.nonlinear(state_3)
        return (self.exp_full * state + self.coeff_f1 * n_0
                + 2.0 * self.coeff_f2 * (n_1 + n_2) + self.coeff_f3 * n_3)


@lru_cache(maxsize=8)
def _integrator_for(config: SolverConfig) -> ETDRK4Integrator:
    return ETDRK4Integrator(linear_symbol(config),
                            lambda q_hat: advection_term(q_hat, config.dealias),
                            config.dt)


# ==================== DIAGNOSTICS ====================

def energy(psi: SpectralScalarField) -> float:
    """½⟪u, u⟫ = ½·N·Σ |k|²|ψ̂|²"""
    ksq = spectral_grid.wavenumber_squared(psi.n)
    return float(0.5 * TORUS_AREA * np.sum(ksq * np.abs(psi.coeffs) ** 2))


def enstrophy(psi: SpectralScalarField) -> float:
    """½∫(Δψ)² = ½·N·Σ |k|⁴|ψ̂|²"""
    ksq = spectral_grid.wavenumber_squared(psi.n)
    return float(0.5 * TORUS_AREA * np.sum(ksq ** 2 * np.abs(psi.coeffs) ** 2))


def make_state(t: float, psi: SpectralScalarField) -> SolverState:
    q = laplacian(psi).to_grid()
    return SolverState(t=t, psi=psi, energy=energy(psi), enstrophy=enstrophy(psi),
                       max_vorticity=float(np.max(np.abs(q))))


def cfl_number(psi: SpectralScalarField, config: SolverConfig) -> float:
    """dt·max|u|·(n/2)"""
    return config.dt * VelocityField(psi).max_speed() * (config.n / 2)


def step(state: SolverState, config: SolverConfig) -> SolverState:
    """
    Advance one dt with ETDRK4.

    Raises:
        SolverInstabilityError: if the new spectrum is not finite
    """
    integrator = _integrator_for(config)
    q_hat = integrator.step(laplacian(state.psi).coeffs)
    t = state.t + config.dt
    if not np.all(np.isfinite(q_hat)):
        raise SolverInstabilityError(t)
    return make_state(t, stream_from_vorticity(q_hat))


# ==================== EXACT SOLUTIONS AND INITIAL DATA ====================

def rossby_wave(n: int, k1: int, k2: int, amplitude: float, t: float, config: SolverConfig) -> SpectralScalarField:
    """
    ψ = ε·e^{−(ν|k|² + σ_op(k))t}·cos(k·θ − ω_R t), ω_R = −a·β·k1/|k|².

    Single-mode waves have {ψ, Δψ} = 0, so this solves the full equation.
    """
    ksq = k1 * k1 + k2 * k2
    if ksq == 0:
        raise ValueError("Rossby wave needs k != (0, 0)")
    omega = -config.a * config.beta * k1 / ksq
    sigma = drag_multiplier(config)[k1 % n, k2 % n]
    envelope = amplitude * np.exp(-(config.nu * ksq + sigma) * t)
    return SpectralScalarField.from_function(
        n, lambda t1, t2: envelope * np.cos(k1 * t1 + k2 * t2 - omega * t))


def rossby_frequency(k1: int, k2: int, config: SolverConfig) -> float:
    return -config.a * config.beta * k1 / (k1 * k1 + k2 * k2)


def initial_stream(kind: str, n: int, k1: int = 1, k2: int = 2, amplitude: float = 1e-3,
                   kmax: int = 4, seed: int = 0) -> SpectralScalarField:
    """
    Initial stream function.

    Args:
        kind: "rossby" (ε cos(k·θ)), "random" (band-limited, max|k| ≤ kmax) or "zero"
    """
    if kind == "rossby":
        return SpectralScalarField.from_function(n, lambda t1, t2: amplitude * np.cos(k1 * t1 + k2 * t2))
    if kind == "random":
        return random_band_limited(n, kmax, np.random.default_rng(seed), amplitude)
    if kind == "zero":
        return SpectralScalarField.zeros(n)
    raise ValueError(f"Unknown initial condition kind {kind!r}")


class QGSSolver:
    """
    Service owning one solution of the vorticity equation.

    Single writer: run()/advance() mutate the current state; readers get
    completed states only.
    """

    def __init__(self, config: SolverConfig, psi0: SpectralScalarField, t0: float = 0.0):
        """
        Initialize solver

        Args:
            config: solver parameters
            psi0: initial stream function (mean is discarded)
            t0: initial time
        """
        if psi0.n != config.n:
            raise ValueError(f"Resolution mismatch: {psi0.n} vs {config.n}")
        self.config = config
        self._state = make_state(t0, psi0.without_mean())
        self._history: List[SolverState] = [self._state]
        self._cfl_warned = False

    @property
    def state(self) -> SolverState:
        return self._state

    @property
    def history(self) -> List[SolverState]:
        return list(self._history)

    def velocity(self) -> VelocityField:
        return VelocityField(self._state.psi)

    def advance(self) -> SolverState:
        cfl = cfl_number(self._state.psi, self.config)
        if cfl >= 1.0 and not self._cfl_warned:
            logger.warning("CFL number %.3f >= 1 at t=%.6g (dt=%g, n=%d)",
                           cfl, self._state.t, self.config.dt, self.config.n)
            self._cfl_warned = True
        self._state = step(self._state, self.config)
        self._history.append(self._state)
        return self._state

    def run(self, steps: Optional[int] = None,
            on_snapshot: Optional[Callable[[SolverState], None]] = None,
            snapshot_every: int = 0) -> SolverState:
        """
        Advance `steps` steps (config.steps by default).

        Args:
            steps: number of steps
            on_snapshot: called with the state every `snapshot_every` steps
            snapshot_every: cadence for on_snapshot; 0 disables it
        """
        steps = self.config.steps if steps is None else steps
        logger.info("Running %d steps of dt=%g at n=%d", steps, self.config.dt, self.config.n)
        for i in range(1, steps + 1):
            state = self.advance()
            if on_snapshot is not None and snapshot_every > 0 and i % snapshot_every == 0:
                on_snapshot(state)
        return self._state

    def pressure(self) -> SpectralScalarField:
        """Diagnostic pressure of the current state"""
        return pressure(self.velocity())


# ==================== ABSTRACT EULER-ARNOLD FORM ====================

def dissipation(u: VelocityField, noise: Optional[NoiseModel], config: SolverConfig) -> VelocityField:
    """
    Symmetric linear part of the abstract equation.

    Without noise: νΔu − σ_op u from the config. With noise: the correction
    sum Σ K̂(û, H_i) = νΔu + ½S(u) assembled from the noise directions.
    """
    if noise is None:
        drag = drag_multiplier(config)
        damped = VelocityField(SpectralScalarField(u.n, -drag * u.stream.coeffs))
        return viscous_term(u, config.nu) + damped
    return correction_sum(ExtendedElement(u, 0.0), noise.vector_fields(u.n), cocycle_params(config)).u


def euler_arnold_rhs(u_hat: ExtendedElement, noise: Optional[NoiseModel], config: SolverConfig) -> ExtendedElement:
    """
    d/dt û = −ad*_û û + (K(u) + ½ΣS, 0); the central component is always 0.

    −ad*_(u,a)(u,a) = (−ad*_u u + a·Tu, 0).
    """
    p = cocycle_params(config)
    inertial = -coad(u_hat, u_hat, p)
    return ExtendedElement(inertial.u + dissipation(u_hat.u, noise, config), 0.0)


class EulerArnoldIntegrator:
    """Classical RK4 on the abstract form, for trajectory comparison"""

    def __init__(self, config: SolverConfig, noise: Optional[NoiseModel] = None):
        self.config = config
        self.noise = noise

    def rhs(self, u_hat: ExtendedElement) -> ExtendedElement:
        return euler_arnold_rhs(u_hat, self.noise, self.config)

    def step(self, u_hat: ExtendedElement, t: float = 0.0) -> ExtendedElement:
        dt = self.config.dt
        k1 = self.rhs(u_hat)
        k2 = self.rhs(u_hat + k1 * (0.5 * dt))
        k3 = self.rhs(u_hat + k2 * (0.5 * dt))
        k4 = self.rhs(u_hat + k3 * dt)
        result = u_hat + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
        if not np.all(np.isfinite(result.u.stream.coeffs)):
            raise SolverInstabilityError(t + dt)
        return result

    def trajectory(self, u0: ExtendedElement, steps: int) -> List[ExtendedElement]:
        out = [u0]
        for i in range(steps):
            out.append(self.step(out[-1], i * self.config.dt))
        return out


# ==================== VARIATIONAL RESIDUAL ====================

@dataclass(frozen=True, eq=False)
class TestDirection:
    """
    Variation v̂(t) = φ(t)·field with φ vanishing at both ends of [t0, t0 + tau].

    The default profile is φ(t) = sin(π(t − t0)/tau).
    """
    __test__ = False

    field: ExtendedElement
    t0: float = 0.0
    tau: float = 1.0
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    profile_rate: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def phi(self, t: np.ndarray) -> np.ndarray:
        if self.profile is not None:
            return np.asarray(self.profile(t), dtype=float)
        return np.sin(np.pi * (np.asarray(t, dtype=float) - self.t0) / self.tau)

    def phi_rate(self, t: np.ndarray) -> np.ndarray:
        if self.profile_rate is not None:
            return np.asarray(self.profile_rate(t), dtype=float)
        return (np.pi / self.tau) * np.cos(np.pi * (np.asarray(t, dtype=float) - self.t0) / self.tau)

    def validate(self, tol: float = 1e-12):
        ends = self.phi(np.array([self.t0, self.t0 + self.tau]))
        if np.any(np.abs(ends) > tol):
            raise ValueError(f"Test direction does not vanish at the endpoints: phi={ends.tolist()}")


def variational_residual(u_traj: Sequence[ExtendedElement], times: np.ndarray, direction: TestDirection,
                         config: SolverConfig, noise: Optional[NoiseModel] = None) -> float:
    """
    First variation of ½∫⟪û, û⟫dt along δû = v̂' + ad_v̂ û + (Diss v, 0):

        ∫ φ'⟪v̂, û⟫ + φ(⟪−[v̂, û], û⟫ + ⟪(Diss v, 0), û⟫) dt

    Zero for every admissible v̂ iff û solves the abstract equation.

    Raises:
        ValueError: if the direction does not vanish at the trajectory ends
    """
    times = np.asarray(times, dtype=float)
    if len(u_traj) != times.shape[0]:
        raise ValueError(f"Trajectory has {len(u_traj)} states but {times.shape[0]} times")
    direction.validate()
    if abs(times[0] - direction.t0) > 1e-12 or abs(times[-1] - (direction.t0 + direction.tau)) > 1e-9:
        raise ValueError("Test direction support must match the trajectory time span")
    p = cocycle_params(config)
    v_hat = direction.field
    diss_v = ExtendedElement(dissipation(v_hat.u, noise, config), 0.0)
    phi = direction.phi(times)
    phi_rate = direction.phi_rate(times)
    integrand = np.empty(times.shape[0])
    for i, u_hat in enumerate(u_traj):
        transport = ext_inner(-ext_bracket(v_hat, u_hat, p), u_hat) + ext_inner(diss_v, u_hat)
        integrand[i] = phi_rate[i] * ext_inner(v_hat, u_hat) + phi[i] * transport
    return float(trapezoid(integrand, times))
