#!/usr/bin/env python3
"""
Tests for experiment configs, output files and the run / verify / simulate commands
"""
import json
from textwrap import dedent

import numpy as np
import pytest

from src.cli import main
from src.models.errors import ConfigError
from src.models.noise import KolmogorovBasis, TwoConstantFields
from src.models.solver_data import SigmaMode
from src.operations.verification_suite import CheckResult, VerificationSuite
from src.storage.settings import RESOLVED_CONFIG_NAME, load_config, write_resolved_config
from src.storage.snapshot_io import read_diagnostics, read_pressure, read_snapshot, write_snapshot
from src.utils.torus_spectral import pressure, random_velocity

ROSSBY_RUN = """
    [grid]
    n = 16

    [time]
    dt = 0.01
    steps = 20

    [physics]
    beta = 1.0
    a = 1.0

    [initial]
    kind = rossby
    k1 = 1
    k2 = 2
    amplitude = 0.001

    [output]
    snapshot_every = 10
"""

SIMULATION = """
    [grid]
    n = 16

    [time]
    dt = 0.01
    tau = 0.05

    [physics]
    beta = 1.0
    a = 0.5

    [noise]
    model = two_field
    nu = 0.1

    [ensemble]
    particles = 400
    seed = 3

    [initial]
    kind = rossby
    amplitude = 0.1

    [simulation]
    drift = initial
    bins = 4
"""


@pytest.fixture
def write_config(tmp_path):
    def write(text, name="experiment.ini"):
        path = tmp_path / name
        path.write_text(dedent(text).lstrip())
        return path
    return write


# ==================== CONFIG ====================

def test_load_config_resolves_sections(write_config):
    config = load_config(write_config(ROSSBY_RUN))
    assert config.grid.n == 16
    assert config.time.steps == 20
    assert config.time.tau == pytest.approx(0.2)
    assert config.initial.amplitude == pytest.approx(1e-3)
    solver = config.solver_config()
    assert solver.beta == 1.0
    assert solver.sigma_mode is SigmaMode.NONE


def test_tau_is_converted_to_steps(write_config):
    config = load_config(write_config(SIMULATION))
    assert config.time.steps == 5
    assert config.time.tau == pytest.approx(0.05)
    assert config.noise_model() == TwoConstantFields(0.1)


def test_kolmogorov_noise_selects_spectral_drag(write_config):
    config = load_config(write_config("""
        [grid]
        n = 16
        [time]
        dt = 0.01
        steps = 1
        [noise]
        model = kolmogorov
        m = 2
        r = 3.0
    """))
    assert config.noise_model() == KolmogorovBasis(2, 3.0)
    solver = config.solver_config()
    assert solver.sigma_mode is SigmaMode.SPECTRAL
    assert solver.m == 2


@pytest.mark.parametrize("text, key", [
    ("[grid]\nn = 16\nwidth = 3\n", "grid/width"),
    ("[grid]\nn = 16\n[colour]\nname = red\n", "colour/name"),
    ("[time]\ndt = 0.1\n", "grid/n"),
    ("[grid]\nn = 15\n", "grid/n"),
    ("[grid]\nn = sixteen\n", "grid/n"),
    ("[grid]\nn = 16\n[noise]\nmodel = pink\n", "noise/model"),
    ("[grid]\nn = 16\n[time]\ndt = -1\n", "time/dt"),
])
def test_invalid_configs_are_rejected(write_config, text, key):
    with pytest.raises(ConfigError) as info:
        load_config(write_config(text))
    assert info.value.key == key


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_solver_config_needs_time(write_config):
    config = load_config(write_config("[grid]\nn = 16\n"))
    with pytest.raises(ConfigError):
        config.solver_config()


def test_seed_override(write_config):
    config = load_config(write_config(SIMULATION)).with_overrides(seed=2 ** 64 - 1, out_dir="elsewhere")
    assert config.ensemble.seed == 2 ** 64 - 1
    assert config.initial.seed == 2 ** 64 - 1
    assert config.output.dir == "elsewhere"
    with pytest.raises(ConfigError):
        config.with_overrides(seed=-1)


def test_resolved_config_reloads_identically(write_config, tmp_path):
    config = load_config(write_config(SIMULATION))
    path = write_resolved_config(config, tmp_path / "resolved")
    assert path.name == RESOLVED_CONFIG_NAME
    assert load_config(path).to_sections() == config.to_sections()


# ==================== FILE FORMATS ====================

def test_snapshot_round_trip_is_exact(tmp_path):
    u = random_velocity(16, 5, np.random.default_rng(0), harmonic=(0.25, -1.0 / 3.0))
    path = write_snapshot(tmp_path / "snap.txt", u, 0.1 + 0.2)
    header = path.read_text().splitlines()[0]
    assert header.startswith("QGS-SPEC v1 n=16 t=")
    back, t = read_snapshot(path)
    assert t == 0.1 + 0.2
    assert np.array_equal(back.stream.coeffs, u.stream.coeffs)
    assert back.harmonic == u.harmonic


def test_malformed_snapshot_is_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("QGS-SPEC v1 n=8 t=0\n1,2,3\n")
    with pytest.raises(ValueError):
        read_snapshot(path)
    path.write_text("not a snapshot\n")
    with pytest.raises(ValueError):
        read_snapshot(path)


# ==================== COMMANDS ====================

def test_run_writes_diagnostics_and_snapshots(write_config, tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--config", str(write_config(ROSSBY_RUN)), "--out", str(out), "--quiet"]) == 0
    diagnostics = read_diagnostics(out / "diagnostics.csv")
    assert len(diagnostics) == 21
    energy = diagnostics['energy']
    assert np.max(np.abs(energy - energy[0])) < 1e-8 * energy[0]
    assert diagnostics['t'][-1] == pytest.approx(0.2)
    for step in (0, 10, 20):
        assert (out / f"snapshot_{step:06d}.txt").exists()
    _, t = read_snapshot(out / "snapshot_000020.txt")
    assert t == pytest.approx(0.2)
    assert (out / RESOLVED_CONFIG_NAME).exists()


def test_run_without_config_or_grid_is_a_usage_error(write_config):
    assert main(["run", "--quiet"]) == 2
    assert main(["run", "--config", str(write_config("[time]\ndt = 0.1\nsteps = 1\n")), "--quiet"]) == 2


def test_unknown_command_or_suite_is_a_usage_error():
    assert main(["explode"]) == 2
    assert main(["verify", "nonsense", "--quiet"]) == 2
    assert main(["verify", "integrability", "--seed", "-4", "--quiet"]) == 2


def test_verify_integrability_passes_and_writes_report(tmp_path, capsys):
    assert main(["verify", "integrability", "--seed", "7", "--out", str(tmp_path), "--quiet"]) == 0
    printed = capsys.readouterr().out
    assert "theta1_equals_2pi" in printed
    records = [json.loads(line) for line in (tmp_path / "verify_integrability.jsonl").read_text().splitlines()]
    assert len(records) == 7
    for record in records:
        assert {'gamma_id', 'closed_residual', 'line_integral', 'wedge_integral', 'abs_diff', 'pass'} <= set(record)
    closed, non_closed = records[:-1], records[-1]
    assert all(r['pass'] for r in closed)
    assert closed[0]['gamma_id'] == 'theta1'
    assert closed[0]['wedge_integral'] == pytest.approx(2 * np.pi)
    assert non_closed['rejected'] is True
    assert non_closed['pass'] is False
    assert non_closed['line_integral'] is None


def test_suite_records_default_to_check_results(tmp_path):
    class ConstantSuite(VerificationSuite):
        def get_name(self):
            return "constant"

        def run_checks(self):
            return [CheckResult.at_most("zero", 0.0, 1e-12), CheckResult.at_least("one", 0.5, 1.0)]

    suite = ConstantSuite()
    path = suite.write_records(suite.execute(), tmp_path / "nested" / "records.jsonl")
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r['name'] for r in records] == ["zero", "one"]
    assert [r['passed'] for r in records] == [True, False]
    assert records[1]['comparison'] == ">="


def test_simulate_without_particles_is_a_usage_error(write_config, tmp_path):
    text = SIMULATION.replace("particles = 400", "particles = 0")
    assert main(["simulate", "--config", str(write_config(text)), "--out", str(tmp_path), "--quiet"]) == 2


def test_simulate_outputs_are_reproducible(write_config, tmp_path):
    config = write_config(SIMULATION)
    names = ["paths.csv", "drift_report.csv", "variance_report.csv", "phase_report.csv"]
    contents = []
    for run in ("first", "second"):
        out = tmp_path / run
        assert main(["simulate", "--config", str(config), "--out", str(out), "--quiet"]) == 0
        contents.append([(out / name).read_bytes() for name in names])
    assert contents[0] == contents[1]
    phase = np.genfromtxt(tmp_path / "first" / "phase_report.csv", delimiter=',', names=True)
    assert phase['mean_phase'] == pytest.approx(phase['expected_phase'])
    paths_rows = (tmp_path / "first" / "paths.csv").read_text().splitlines()
    assert paths_rows[0] == "particle_id,t,theta1,theta2,phase"
    assert len(paths_rows) == 1 + 400 * 6


def test_simulate_with_solver_drift_and_npz_paths(write_config, tmp_path):
    text = (SIMULATION.replace("drift = initial", "drift = solver")
            + "\n    [output]\n    format = npz\n")
    out = tmp_path / "npz"
    assert main(["simulate", "--config", str(write_config(text)), "--out", str(out), "--quiet"]) == 0
    with np.load(out / "paths.npz") as data:
        assert data['positions'].shape == (6, 400, 2)
        assert data['phase'][-1] == pytest.approx(np.full(400, 0.5 * 0.05))


def test_run_with_noise_drag_dissipates_energy(write_config, tmp_path):
    config = write_config("""
        [grid]
        n = 16
        [time]
        dt = 0.01
        steps = 10
        [physics]
        beta = 1.0
        nu = 0.01
        [noise]
        model = kolmogorov
        m = 2
        [initial]
        kind = random
        kmax = 4
        amplitude = 0.05
        seed = 9
        [output]
        snapshot_every = 5
    """)
    out = tmp_path / "damped"
    assert main(["run", "--config", str(config), "--out", str(out), "--quiet"]) == 0
    energy = read_diagnostics(out / "diagnostics.csv")['energy']
    assert np.all(np.diff(energy) < 0)
    assert load_config(out / RESOLVED_CONFIG_NAME).resolved_sigma_mode() == 'spectral'
    for step in (0, 5, 10):
        u, _ = read_snapshot(out / f"snapshot_{step:06d}.txt")
        p = read_pressure(out / f"pressure_{step:06d}.txt")
        assert p.shape == (16, 16)
        expected = pressure(u).to_grid()
        assert np.max(np.abs(expected)) > 0.0
        assert np.max(np.abs(p - expected)) < 1e-12 * np.max(np.abs(expected))


def test_simulate_brownian_variance_report(write_config, tmp_path):
    config = write_config("""
        [grid]
        n = 8
        [time]
        dt = 0.01
        tau = 0.5
        [noise]
        model = two_field
        nu = 0.5
        [ensemble]
        particles = 20000
        seed = 12
        [output]
        format = npz
        [simulation]
        record_every = 25
        start = point
        theta1 = 1.0
        theta2 = 2.0
    """)
    out = tmp_path / "brownian"
    assert main(["simulate", "--config", str(config), "--out", str(out), "--quiet"]) == 0
    report = np.genfromtxt(out / "variance_report.csv", delimiter=',', names=True)
    assert report['expected_var'][-1] == pytest.approx(0.5)
    assert np.all(report['rel_err'] < 0.05)
