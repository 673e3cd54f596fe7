"""
Output file formats.

- spectral snapshot:  header `QGS-SPEC v1 n=<n> t=<t>`, then `k1,k2,re,im` for
  the half-lattice (k1 > 0, or k1 = 0 and k2 ≥ 0) and one `H,c1,c2` line
- diagnostics CSV:    t,energy,enstrophy,max_vorticity
- pressure:           grid values of the diagnostic pressure, one row per θ₁ index
- paths:              particle_id,t,theta1,theta2,phase (CSV) or npz arrays
- reports:            drift / variance / phase CSVs with standard errors

Floats are written with 17 significant digits so files round-trip exactly.
"""
import csv
import logging
import re
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np

from ..models.fields import SpectralScalarField, VelocityField
from ..models.noise import DriftEstimate, PathData
from ..models.solver_data import SolverState

logger = logging.getLogger(__name__)

SNAPSHOT_MAGIC = "QGS-SPEC v1"
DIAGNOSTICS_COLUMNS = ['t', 'energy', 'enstrophy', 'max_vorticity']
_HEADER = re.compile(r"^QGS-SPEC v1 n=(\d+) t=(\S+)$")


def fmt(value: float) -> str:
    return format(float(value), '.17g')


# ==================== SPECTRAL SNAPSHOTS ====================

def _half_lattice_indices(n: int) -> List[Tuple[int, int]]:
    half = n // 2
    out = []
    for k1 in range(0, half + 1):
        for k2 in range(-half + 1, half + 1):
            if k1 > 0 or k2 >= 0:
                out.append((k1, k2))
    return out


def write_snapshot(path: Union[str, Path], u: VelocityField, t: float) -> Path:
    """Write stream coefficients of the half-lattice plus the harmonic part."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    psi = u.stream
    n = psi.n
    lines = [f"{SNAPSHOT_MAGIC} n={n} t={fmt(t)}"]
    for k1, k2 in _half_lattice_indices(n):
        c = psi.coeff(k1, k2)
        if c == 0:
            continue
        lines.append(f"{k1},{k2},{fmt(c.real)},{fmt(c.imag)}")
    lines.append(f"H,{fmt(u.harmonic[0])},{fmt(u.harmonic[1])}")
    path.write_text("\n".join(lines) + "\n")
    logger.debug("Wrote snapshot %s (t=%g, %d modes)", path, t, len(lines) - 2)
    return path


def read_snapshot(path: Union[str, Path]) -> Tuple[VelocityField, float]:
    """
    Inverse of write_snapshot; the negative half is filled by Hermitian symmetry.

    Raises:
        ValueError: on a malformed header or line
    """
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"Empty snapshot file: {path}")
    match = _HEADER.match(lines[0].strip())
    if match is None:
        raise ValueError(f"Not a spectral snapshot: {path}")
    n, t = int(match.group(1)), float(match.group(2))
    coeffs = np.zeros((n, n), dtype=complex)
    harmonic = (0.0, 0.0)
    for number, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(',')
        if parts[0] == 'H':
            harmonic = (float(parts[1]), float(parts[2]))
            continue
        if len(parts) != 4:
            raise ValueError(f"Malformed snapshot line {number}: {line!r}")
        k1, k2 = int(parts[0]), int(parts[1])
        c = complex(float(parts[2]), float(parts[3]))
        coeffs[k1 % n, k2 % n] = c
        coeffs[-k1 % n, -k2 % n] = np.conj(c)
    return VelocityField(SpectralScalarField(n, coeffs), harmonic), t


# ==================== CSV OUTPUT ====================

def write_csv(path: Union[str, Path], header: List[str], rows: Iterable[Iterable]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_diagnostics(path: Union[str, Path], states: Iterable[SolverState]) -> Path:
    rows = ([s.diagnostics_row()[c] for c in DIAGNOSTICS_COLUMNS] for s in states)
    return write_csv(path, DIAGNOSTICS_COLUMNS, rows)


def read_diagnostics(path: Union[str, Path]) -> np.ndarray:
    """Diagnostics CSV as a structured array"""
    return np.genfromtxt(path, delimiter=',', names=True)


# ==================== PRESSURE ====================

def write_pressure(path: Union[str, Path], p: SpectralScalarField) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, p.to_grid(), fmt='%.17g', delimiter=',')
    return path


def read_pressure(path: Union[str, Path]) -> np.ndarray:
    return np.loadtxt(path, delimiter=',', ndmin=2)


def write_paths(path: Union[str, Path], paths: PathData, fmt_name: str = "csv") -> Path:
    """Particle paths as CSV rows or an npz archive"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt_name == "npz":
        np.savez(path, times=paths.times, positions=paths.positions,
                 displacement=paths.displacement, phase=paths.phase)
        return path

    def rows():
        for r, t in enumerate(paths.times):
            for p in range(paths.n_particles):
                yield [p, float(t), float(paths.positions[r, p, 0]), float(paths.positions[r, p, 1]),
                       float(paths.phase[r, p])]

    return write_csv(path, ['particle_id', 't', 'theta1', 'theta2', 'phase'], rows())


def write_drift_report(path: Union[str, Path], estimate: DriftEstimate) -> Path:
    """One row per bin: centre, count, estimate ± standard error, reference and z-scores."""
    bins = estimate.counts.shape[0]
    z = estimate.z_scores() if estimate.reference is not None else np.full_like(estimate.mean, np.nan)
    ref = estimate.reference if estimate.reference is not None else np.full_like(estimate.mean, np.nan)

    def rows():
        for i in range(bins):
            for j in range(bins):
                yield [i, j, float(estimate.centers[i, j, 0]), float(estimate.centers[i, j, 1]),
                       int(estimate.counts[i, j]),
                       float(estimate.mean[i, j, 0]), float(estimate.stderr[i, j, 0]),
                       float(estimate.mean[i, j, 1]), float(estimate.stderr[i, j, 1]),
                       float(ref[i, j, 0]), float(ref[i, j, 1]),
                       float(z[i, j, 0]), float(z[i, j, 1])]

    header = ['bin1', 'bin2', 'theta1', 'theta2', 'count', 'u1', 'u1_se', 'u2', 'u2_se',
              'ref_u1', 'ref_u2', 'z1', 'z2']
    return write_csv(path, header, rows())


def write_variance_report(path: Union[str, Path], paths: PathData, diffusion: float,
                          mean_drift: Tuple[float, float] = (0.0, 0.0)) -> Path:
    """
    Displacement statistics per record against the Brownian reference 2·diffusion·t.

    Columns: t, mean_d1, mean_d2, var_d1, var_d2, var_se, expected_var, rel_err
    """
    def rows():
        for r, t in enumerate(paths.times):
            if r == 0:
                continue
            d = paths.displacement[r]
            var = np.var(d, axis=0, ddof=1)
            expected = 2.0 * diffusion * float(t)
            # standard error of a Gaussian sample variance
            se = float(np.sqrt(2.0 / max(d.shape[0] - 1, 1)) * np.mean(var))
            rel = float(np.max(np.abs(var - expected)) / expected) if expected > 0 else float('nan')
            mean = d.mean(axis=0) - np.asarray(mean_drift) * float(t)
            yield [float(t), float(mean[0]), float(mean[1]), float(var[0]), float(var[1]),
                   se, expected, rel]

    header = ['t', 'mean_d1', 'mean_d2', 'var_d1', 'var_d2', 'var_se', 'expected_var', 'rel_err']
    return write_csv(path, header, rows())


def write_phase_report(path: Union[str, Path], paths: PathData, a: float) -> Path:
    """Ensemble mean central phase per record against a·t."""
    def rows():
        for r, t in enumerate(paths.times):
            c = paths.phase[r]
            se = float(np.std(c, ddof=1) / np.sqrt(c.size)) if c.size > 1 else 0.0
            yield [float(t), float(np.mean(c)), se, a * float(t)]

    return write_csv(path, ['t', 'mean_phase', 'phase_se', 'expected_phase'], rows())
