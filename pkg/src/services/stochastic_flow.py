"""
Particle flows of the ĝ-valued semi-martingales on T².

Each particle solves the Stratonovich SDE

    dθ = Σ_i H_i(θ) ∘ dW^i + u(t, θ) dt,    dc = a dt

with H_i the noise directions of a NoiseModel. Brownian increments come from
a Philox generator keyed by (seed, step, block), so path data depends only
on the seed and the configuration, never on the number of worker threads.
"""
import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from ..models.errors import SimulationError
from ..models.fields import VelocityField
from ..models.noise import DriftEstimate, NoiseModel, ParticleEnsemble, PathData
from ..utils.spectral_grid import TWO_PI, worker_count
from ..utils.torus_spectral import l2_inner

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096

# Stream identifiers inside one master seed
INCREMENT_STREAM = 0
START_STREAM = 1

SCHEMES = ("heun", "euler_maruyama")


# ==================== RANDOM STREAMS ====================

def block_generator(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for one (stream, ...) key under the master seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def noise_increments(seed: int, step: int, block: int, size: int, dimension: int, dt: float) -> np.ndarray:
    """Wiener increments (size, dimension) for one block of particles at one step."""
    rng = block_generator(seed, INCREMENT_STREAM, step, block)
    return np.sqrt(dt) * rng.standard_normal((size, dimension))


def _blocks(n_particles: int) -> List[Tuple[int, int]]:
    return [(start, min(start + BLOCK_SIZE, n_particles)) for start in range(0, n_particles, BLOCK_SIZE)]


def uniform_ensemble(n_particles: int, seed: int = 0) -> ParticleEnsemble:
    """Particles uniform on [0, 2π)², reproducible per block."""
    if n_particles < 1:
        raise ValueError(f"Need at least one particle, got {n_particles}")
    parts = [TWO_PI * block_generator(seed, START_STREAM, b).random((stop - start, 2))
             for b, (start, stop) in enumerate(_blocks(n_particles))]
    return ParticleEnsemble(np.concatenate(parts), master_seed=seed)


def point_ensemble(n_particles: int, theta1: float, theta2: float, seed: int = 0) -> ParticleEnsemble:
    """All particles at one point (for generator estimates)."""
    if n_particles < 1:
        raise ValueError(f"Need at least one particle, got {n_particles}")
    return ParticleEnsemble(np.tile([theta1, theta2], (n_particles, 1)), master_seed=seed)


# ==================== DRIFT FIELDS ====================

class DriftField(ABC):
    """Time-dependent divergence-free drift u(t, θ)"""

    @abstractmethod
    def velocity(self, t: float) -> VelocityField:
        pass

    def evaluate(self, t: float, points: np.ndarray) -> np.ndarray:
        return self.velocity(t).evaluate(points)


class SteadyDrift(DriftField):
    """Time-independent drift"""

    def __init__(self, u: VelocityField):
        self.u = u

    def velocity(self, t: float) -> VelocityField:
        return self.u

    def evaluate(self, t: float, points: np.ndarray) -> np.ndarray:
        return self.u.evaluate(points)


class SampledDrift(DriftField):
    """Drift known at increasing times, linear in time between samples"""

    def __init__(self, times: Sequence[float], fields: Sequence[VelocityField]):
        if len(times) != len(fields) or len(times) == 0:
            raise ValueError("SampledDrift needs one field per time")
        self.times = np.asarray(times, dtype=float)
        self.fields = list(fields)

    def _bracket(self, t: float) -> Tuple[int, int, float]:
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise SimulationError(f"Drift requested at t={t} outside [{self.times[0]}, {self.times[-1]}]")
        j = int(np.searchsorted(self.times, t, side='left'))
        j = min(max(j, 0), len(self.times) - 1)
        if abs(self.times[j] - t) <= 1e-12 or j == 0:
            return j, j, 0.0
        i = j - 1
        w = (t - self.times[i]) / (self.times[j] - self.times[i])
        return i, j, w

    def velocity(self, t: float) -> VelocityField:
        i, j, w = self._bracket(t)
        if i == j:
            return self.fields[i]
        return self.fields[i] * (1.0 - w) + self.fields[j] * w

    def evaluate(self, t: float, points: np.ndarray) -> np.ndarray:
        i, j, w = self._bracket(t)
        if i == j:
            return self.fields[i].evaluate(points)
        return (1.0 - w) * self.fields[i].evaluate(points) + w * self.fields[j].evaluate(points)


def zero_drift(n: int) -> SteadyDrift:
    return SteadyDrift(VelocityField.zeros(n))


# ==================== SIMULATION ====================

def _apply_noise(fields: np.ndarray, dw: np.ndarray) -> np.ndarray:
    """Σ_i H_i dW^i for fields (B, M, 2) and increments (B, M)."""
    return np.einsum('bmi,bm->bi', fields, dw)


def _drift_at(drift: DriftField, t: float, points: np.ndarray) -> np.ndarray:
    try:
        return drift.evaluate(t, points)
    except SimulationError:
        raise
    except Exception as e:
        raise SimulationError(f"Drift evaluation failed at t={t}: {e}") from e


def _simulate_block(block: int, positions: np.ndarray, phase: np.ndarray, noise: Optional[NoiseModel],
                    drift: DriftField, a: float, seed: int, dt: float, steps: int,
                    record_steps: Sequence[int], scheme: str):
    x = positions.copy()
    disp = np.zeros_like(x)
    c = phase.copy()
    dimension = noise.dimension() if noise is not None else 0
    records = []
    record_set = set(record_steps)
    if 0 in record_set:
        records.append((x.copy(), disp.copy(), c.copy()))
    for s in range(steps):
        t = s * dt
        drift0 = _drift_at(drift, t, x)
        if dimension:
            dw = noise_increments(seed, s, block, x.shape[0], dimension, dt)
            h0 = noise.evaluate(x)
            kick0 = _apply_noise(h0, dw)
        else:
            kick0 = 0.0
        if scheme == "heun":
            x_bar = x + drift0 * dt + kick0
            drift1 = _drift_at(drift, t + dt, x_bar)
            kick1 = _apply_noise(noise.evaluate(x_bar), dw) if dimension else 0.0
            dx = 0.5 * (drift0 + drift1) * dt + 0.5 * (kick0 + kick1)
        else:
            dx = drift0 * dt + kick0
        if not np.all(np.isfinite(dx)):
            raise SimulationError(f"Non-finite particle position at step {s + 1} (block {block})")
        disp += dx
        x = np.mod(x + dx, TWO_PI)
        c = c + a * dt
        if s + 1 in record_set:
            records.append((x.copy(), disp.copy(), c.copy()))
    logger.debug("Block %d finished (%d particles, %d steps)", block, x.shape[0], steps)
    xs, ds, cs = zip(*records)
    return np.stack(xs), np.stack(ds), np.stack(cs)


def simulate(noise: Optional[NoiseModel], drift: DriftField, a: float, ensemble: ParticleEnsemble,
             dt: float, tau: float, record_every: int = 1, scheme: str = "heun") -> PathData:
    """
    Advance every particle of the ensemble from t = 0 to t = tau.

    Args:
        noise: noise directions (None for a deterministic flow)
        drift: drift field u(t, θ), evaluable on [0, tau]
        a: central coordinate (phase rate)
        ensemble: starting positions, phase and master seed
        dt: time step
        tau: horizon; steps = round(tau/dt)
        record_every: record every k-th step (the last step is always recorded)
        scheme: "heun" (Stratonovich) or "euler_maruyama" (Itô)

    Returns:
        PathData with wrapped positions, unwrapped displacement and phase

    Raises:
        SimulationError: drift evaluation failure or non-finite positions
    """
    if not dt > 0:
        raise ValueError(f"Time step must be positive, got dt={dt}")
    if scheme not in SCHEMES:
        raise ValueError(f"Unknown scheme {scheme!r}; expected one of {SCHEMES}")
    steps = int(round(tau / dt))
    if abs(steps * dt - tau) > 1e-9 * max(1.0, tau):
        raise ValueError(f"tau={tau} is not a multiple of dt={dt}")
    record_every = max(1, int(record_every))
    record_steps = sorted(set(range(0, steps + 1, record_every)) | {steps})

    blocks = _blocks(ensemble.n_particles)
    threads = min(worker_count(), len(blocks))
    logger.info("Simulating %d particles in %d blocks (%d threads), %d steps of dt=%g, scheme=%s",
                ensemble.n_particles, len(blocks), threads, steps, dt, scheme)

    def run(item):
        b, (start, stop) = item
        return _simulate_block(b, ensemble.positions[start:stop], ensemble.central_phase[start:stop],
                               noise, drift, a, ensemble.master_seed, dt, steps, record_steps, scheme)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, enumerate(blocks)))
    else:
        results = [run(item) for item in enumerate(blocks)]

    return PathData(
        times=np.asarray(record_steps, dtype=float) * dt,
        positions=np.concatenate([r[0] for r in results], axis=1),
        displacement=np.concatenate([r[1] for r in results], axis=1),
        phase=np.concatenate([r[2] for r in results], axis=1),
        dt=dt,
        scheme=scheme,
    )


# ==================== ESTIMATORS ====================

def minimal_image(delta: np.ndarray) -> np.ndarray:
    """Map each component to (−π, π]."""
    return -np.mod(-delta + np.pi, TWO_PI) + np.pi


def estimate_drift(paths: PathData, t: float, window: int = 1, bins: int = 16,
                   reference: Optional[DriftField] = None) -> DriftEstimate:
    """
    E[(θ(t+ε) − θ(t))/ε | θ(t) ∈ bin] on a bins×bins grid.

    Args:
        paths: recorded paths
        t: estimation time (nearest record is used)
        window: ε in records
        bins: bins per axis
        reference: true drift; its bin average is attached for z-scores
    """
    i = paths.index_of(t)
    j = i + window
    if window < 1 or j >= paths.n_records:
        raise ValueError(f"Window of {window} records from t={paths.times[i]} exceeds the recorded paths")
    eps = float(paths.times[j] - paths.times[i])
    start = paths.positions[i]
    velocity = minimal_image(paths.positions[j] - start) / eps

    cell = np.minimum((start / (TWO_PI / bins)).astype(int), bins - 1)
    flat = cell[:, 0] * bins + cell[:, 1]
    counts = np.bincount(flat, minlength=bins * bins).astype(float)
    mean = np.full((bins * bins, 2), np.nan)
    stderr = np.full((bins * bins, 2), np.nan)
    populated = counts > 0
    for comp in range(2):
        sums = np.bincount(flat, weights=velocity[:, comp], minlength=bins * bins)
        squares = np.bincount(flat, weights=velocity[:, comp] ** 2, minlength=bins * bins)
        m = np.where(populated, sums / np.maximum(counts, 1), np.nan)
        var = np.where(counts > 1, (squares - counts * m ** 2) / np.maximum(counts - 1, 1), np.nan)
        mean[:, comp] = m
        stderr[:, comp] = np.sqrt(np.maximum(var, 0.0) / np.maximum(counts, 1))
    empty = int(np.sum(~populated))
    if empty:
        logger.warning("%d of %d drift bins are empty at t=%.6g", empty, bins * bins, paths.times[i])

    ref = None
    if reference is not None:
        u = reference.evaluate(float(paths.times[i]), start)
        ref = np.full((bins * bins, 2), np.nan)
        for comp in range(2):
            sums = np.bincount(flat, weights=u[:, comp], minlength=bins * bins)
            ref[:, comp] = np.where(populated, sums / np.maximum(counts, 1), np.nan)
        ref = ref.reshape(bins, bins, 2)

    edges = (np.arange(bins) + 0.5) * TWO_PI / bins
    c1, c2 = np.meshgrid(edges, edges, indexing='ij')
    return DriftEstimate(
        t=float(paths.times[i]),
        epsilon=eps,
        centers=np.stack([c1, c2], axis=-1),
        counts=counts.reshape(bins, bins).astype(int),
        mean=mean.reshape(bins, bins, 2),
        stderr=stderr.reshape(bins, bins, 2),
        reference=ref,
    )


def phase_rate(paths: PathData, t: float = 0.0, window: int = 1) -> float:
    """Ensemble mean of (c(t+ε) − c(t))/ε."""
    i = paths.index_of(t)
    j = min(i + window, paths.n_records - 1)
    if j == i:
        raise ValueError("Need at least two records to estimate the phase rate")
    return float(np.mean(paths.phase[j] - paths.phase[i]) / (paths.times[j] - paths.times[i]))


def estimate_generator(paths: PathData, f: Callable[[np.ndarray], np.ndarray],
                       t: Optional[float] = None) -> Tuple[float, float]:
    """
    Empirical generator (E[f(θ_t)] − E[f(θ_0)])/t with its standard error.

    Args:
        paths: paths started at a common point (or any ensemble)
        f: test function of points (P, 2)
        t: evaluation time (last record by default)
    """
    i = paths.n_records - 1 if t is None else paths.index_of(t)
    elapsed = float(paths.times[i] - paths.times[0])
    if elapsed <= 0:
        raise ValueError("Generator estimate needs t > 0")
    increments = f(paths.positions[i]) - f(paths.positions[0])
    estimate = float(np.mean(increments)) / elapsed
    stderr = float(np.std(increments, ddof=1) / np.sqrt(increments.size)) / elapsed
    return estimate, stderr


def displacement_variance(paths: PathData, t: Optional[float] = None) -> np.ndarray:
    """Per-component variance of the unwrapped displacement at time t."""
    i = paths.n_records - 1 if t is None else paths.index_of(t)
    return np.var(paths.displacement[i], axis=0, ddof=1)


def displacement_moments(paths: PathData, t: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the unwrapped displacement at time t."""
    i = paths.n_records - 1 if t is None else paths.index_of(t)
    d = paths.displacement[i]
    return d.mean(axis=0), np.cov(d, rowvar=False)


def occupancy_p_value(positions: np.ndarray, bins: int = 16) -> float:
    """Chi-square p-value for uniform occupancy of a bins×bins grid."""
    cell = np.minimum((np.mod(positions, TWO_PI) / (TWO_PI / bins)).astype(int), bins - 1)
    counts = np.bincount(cell[:, 0] * bins + cell[:, 1], minlength=bins * bins)
    return float(stats.chisquare(counts).pvalue)


# ==================== ACTION ====================

def action_integral(times: np.ndarray, fields: Sequence[VelocityField], a: Union[float, np.ndarray]) -> float:
    """½∫(⟪u, u⟫ + a²) dt by the trapezoid rule; `a` is a constant or one value per time."""
    times = np.asarray(times, dtype=float)
    a = np.broadcast_to(np.asarray(a, dtype=float), times.shape)
    integrand = np.array([l2_inner(u, u) for u in fields]) + a * a
    return float(0.5 * trapezoid(integrand, times))


def action_estimate(paths: PathData, drift: DriftField, a: float, tol: float = 1e-9) -> float:
    """
    Stochastic energy ½E∫⟪D_tγ, D_tγ⟫dt reduced to ½∫(⟪u, u⟫ + a²)dt.

    Raises:
        ValueError: if the recorded central phase does not advance at rate a
    """
    rate = phase_rate(paths, 0.0, paths.n_records - 1) if paths.n_records > 1 else a
    if abs(rate - a) > tol * max(1.0, abs(a)):
        raise ValueError(f"Recorded phase rate {rate} does not match a={a}")
    return action_integral(paths.times, [drift.velocity(float(t)) for t in paths.times], a)
