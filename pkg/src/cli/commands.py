"""
Command implementations and the argparse entry point.

Exit codes: 0 ok, 1 a verification check failed, 2 usage or configuration error, 3 numerical failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..models.errors import ConfigError, SimulationError, SolverInstabilityError
from ..models.fields import VelocityField
from ..operations import SUITES, format_table
from ..services.qgs_solver import QGSSolver, initial_stream
from ..services.stochastic_flow import (
    SampledDrift,
    SteadyDrift,
    estimate_drift,
    phase_rate,
    point_ensemble,
    simulate,
    uniform_ensemble,
    zero_drift,
)
from ..storage.settings import ExperimentConfig, load_config, write_resolved_config
from ..storage.snapshot_io import (
    write_diagnostics,
    write_drift_report,
    write_paths,
    write_phase_report,
    write_pressure,
    write_snapshot,
    write_variance_report,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

DIAGNOSTICS_NAME = "diagnostics.csv"


def setup_logging(quiet: bool = False):
    """Single stream handler on stderr; --quiet shows warnings and errors only"""
    logging.basicConfig(
        level=logging.WARNING if quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _load(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("--config is required for this command")
    return load_config(args.config).with_overrides(seed=args.seed, out_dir=args.out)


def _initial_stream(config: ExperimentConfig):
    init = config.initial
    return initial_stream(init.kind, config.grid.n, init.k1, init.k2, init.amplitude, init.kmax, init.seed)


# ==================== RUN ====================

def cmd_run(config: ExperimentConfig) -> int:
    """Integrate the vorticity equation; write diagnostics, snapshots and pressure."""
    solver_config = config.solver_config()
    out_dir = Path(config.output.dir)
    write_resolved_config(config, out_dir)
    solver = QGSSolver(solver_config, _initial_stream(config))

    def on_snapshot(state):
        index = int(round(state.t / solver_config.dt))
        write_snapshot(out_dir / f"snapshot_{index:06d}.txt", VelocityField(state.psi), state.t)
        write_pressure(out_dir / f"pressure_{index:06d}.txt", solver.pressure())

    every = config.output.snapshot_every
    if every > 0:
        on_snapshot(solver.state)
    try:
        solver.run(on_snapshot=on_snapshot, snapshot_every=every)
    finally:
        write_diagnostics(out_dir / DIAGNOSTICS_NAME, solver.history)
    first, last = solver.history[0], solver.state
    logger.info("Finished at t=%.6g: energy %.12g -> %.12g, enstrophy %.12g -> %.12g",
                last.t, first.energy, last.energy, first.enstrophy, last.enstrophy)
    return EXIT_OK


# ==================== VERIFY ====================

def cmd_verify(suite: str, seed: int = 0, out_dir: Optional[str] = None) -> int:
    """Run one named suite and print its pass/fail table; 0 iff all checks pass."""
    if suite not in SUITES:
        logger.error("Unknown suite %r (expected one of: %s)", suite, ", ".join(SUITES))
        return EXIT_USAGE
    runner = SUITES[suite](seed=seed)
    results = runner.execute()
    print(format_table(runner, results))
    if out_dir is not None:
        runner.write_records(results, Path(out_dir) / f"verify_{suite}.jsonl")
    return EXIT_OK if all(r.passed for r in results) else 1


# ==================== SIMULATE ====================

def _drift(config: ExperimentConfig):
    kind = config.simulation.drift
    n = config.grid.n
    if kind == 'zero':
        return zero_drift(n)
    if kind == 'initial':
        return SteadyDrift(VelocityField(_initial_stream(config)))
    solver = QGSSolver(config.solver_config(), _initial_stream(config))
    solver.run()
    history = solver.history
    return SampledDrift([s.t for s in history], [VelocityField(s.psi) for s in history])


def cmd_simulate(config: ExperimentConfig) -> int:
    """Particle ensemble under noise + drift; write paths and estimator reports."""
    config.require_time()
    if config.ensemble.particles < 1:
        raise ConfigError("ensemble/particles must be >= 1 for simulate", key="ensemble/particles")
    out_dir = Path(config.output.dir)
    write_resolved_config(config, out_dir)

    sim = config.simulation
    seed = config.ensemble.seed
    if sim.start == 'point':
        ensemble = point_ensemble(config.ensemble.particles, sim.theta1, sim.theta2, seed)
    else:
        ensemble = uniform_ensemble(config.ensemble.particles, seed)
    noise = config.noise_model()
    drift = _drift(config)
    a = config.physics.a
    paths = simulate(noise, drift, a, ensemble, config.time.dt, config.time.tau,
                     record_every=sim.record_every, scheme=sim.scheme)

    suffix = 'npz' if config.output.format == 'npz' else 'csv'
    write_paths(out_dir / f"paths.{suffix}", paths, config.output.format)
    if paths.n_records > sim.window:
        estimate = estimate_drift(paths, 0.0, window=sim.window, bins=sim.bins, reference=drift)
        write_drift_report(out_dir / "drift_report.csv", estimate)
        logger.info("Drift estimate: %.1f%% of populated bins within 3 standard errors",
                    100.0 * estimate.fraction_within(3.0))
        logger.info("Central phase rate %.12g (a=%g)", phase_rate(paths, 0.0, sim.window), a)
    else:
        logger.warning("Only %d records; drift report skipped (window=%d)", paths.n_records, sim.window)
    diffusion = noise.diffusion_coefficient() if noise is not None else 0.0
    write_variance_report(out_dir / "variance_report.csv", paths, diffusion)
    write_phase_report(out_dir / "phase_report.csv", paths, a)
    return EXIT_OK


# ==================== ENTRY POINT ====================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="INI config file")
    common.add_argument('--seed', type=int, help="override ensemble/seed and initial/seed (u64)")
    common.add_argument('--out', help="override output/dir")
    common.add_argument('--quiet', action='store_true', help="only warnings and errors")

    parser = argparse.ArgumentParser(prog="qgs-lab", description="QGS central-extension laboratory")
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('run', parents=[common], help="integrate the QGS vorticity equation")
    verify = sub.add_parser('verify', parents=[common], help="run a named verification suite")
    verify.add_argument('suite', help=f"one of: {', '.join(SUITES)}")
    sub.add_parser('simulate', parents=[common], help="stochastic particle simulation")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    setup_logging(args.quiet)

    try:
        if args.command == 'verify':
            if args.seed is not None and args.seed < 0:
                raise ConfigError(f"Seed must be an unsigned 64-bit integer, got {args.seed}")
            return cmd_verify(args.suite, seed=args.seed or 0, out_dir=args.out)
        config = _load(args)
        if args.command == 'run':
            return cmd_run(config)
        return cmd_simulate(config)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_USAGE
    except (SolverInstabilityError, SimulationError) as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except ValueError as e:
        logger.error("Invalid input: %s", e)
        return EXIT_USAGE
