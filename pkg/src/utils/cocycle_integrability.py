"""
Integral criterion for ω_α ~ ω_N on T².

The curve N = {(t, s₀) : t ∈ [0, 2π)} carries the singular cocycle; ω_α and
ω_N are cohomologous iff ∫_N γ = ∫ α∧γ for every closed 1-form γ.

α is read as α = −alpha_coeff·θ₂, so alpha_coeff = 1/2π gives ∫ α∧θ₁ = 2π.
"""
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..models.fields import SpectralScalarField
from ..models.one_form import CohomologyCheck, OneForm
from . import spectral_grid
from .spectral_grid import TORUS_AREA, TWO_PI
from .torus_spectral import partial_derivative, random_band_limited, scalar_norm

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 1.0 / TWO_PI
CLOSED_TOL = 1e-12
MATCH_TOL = 1e-10
S_SAMPLES = 8


def closedness_residual(gamma: OneForm) -> float:
    """‖∂₂f − ∂₁g‖ in L²(T²)."""
    return scalar_norm(partial_derivative(gamma.f, 1) - partial_derivative(gamma.g, 0))


def h_profile(f: SpectralScalarField, s: Union[float, np.ndarray]) -> np.ndarray:
    """h(s) = ∫₀^{2π} f(t, s) dt = 2π Σ_k2 f̂(0, k2) e^{i k2 s}."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    k = spectral_grid.wavenumbers(f.n)[1][0, :]
    row = f.coeffs[0, :]
    return TWO_PI * np.real(np.exp(1j * np.outer(s, k)) @ row)


def integrate_over_N(gamma: OneForm, s0: float = 0.0) -> float:
    """
    ∫_N γ with N = {(t, s0)}.

    θ₂ pulls back to zero on N, so only f + c1 contributes.
    """
    return float(h_profile(gamma.f, s0)[0] + TWO_PI * gamma.c1)


def wedge_integral(alpha_coeff: float, gamma: OneForm) -> float:
    """
    ∫ α∧γ for α = −alpha_coeff·θ₂.

    α∧γ = −alpha_coeff (f + c1) θ₂∧θ₁ = alpha_coeff (f + c1) θ₁∧θ₂, so the
    integral is alpha_coeff·N·(mean f + c1).
    """
    return float(alpha_coeff * TORUS_AREA * (gamma.f.mean + gamma.c1))


def s_independence(gamma: OneForm, samples: int = S_SAMPLES) -> float:
    """max_s |h(s) − h(0)| over equally spaced s."""
    s = TWO_PI * np.arange(samples) / samples
    h = h_profile(gamma.f, s)
    return float(np.max(np.abs(h - h[0])))


def check_cohomologous(family: Sequence[Tuple[str, OneForm]], s0: float = 0.0,
                       alpha_coeff: float = DEFAULT_ALPHA,
                       closed_tol: float = CLOSED_TOL, tol: float = MATCH_TOL) -> List[CohomologyCheck]:
    """
    Apply the integral criterion to every (gamma_id, γ) pair.

    Non-closed forms are rejected with their closedness residual; closed ones
    are checked at s0 and for s-independence of h(s).
    """
    report = []
    for gamma_id, gamma in family:
        residual = closedness_residual(gamma)
        scale = max(1.0, scalar_norm(gamma.f), scalar_norm(gamma.g))
        if residual > closed_tol * scale:
            logger.warning("Rejecting %s: not closed (residual %.3e)", gamma_id, residual)
            report.append(CohomologyCheck(gamma_id, residual, rejected=True))
            continue
        line = integrate_over_N(gamma, s0)
        wedge = wedge_integral(alpha_coeff, gamma)
        diff = abs(line - wedge)
        deviation = s_independence(gamma)
        report.append(CohomologyCheck(
            gamma_id=gamma_id,
            closed_residual=residual,
            line_integral=line,
            wedge_integral=wedge,
            abs_diff=diff,
            s_deviation=deviation,
            passed=bool(diff < tol and deviation < tol),
        ))
    return report


def closed_form_family(n: int = 32, rng: Optional[np.random.Generator] = None) -> List[Tuple[str, OneForm]]:
    """
    Forms exercising each step of the integrability argument:
    constant forms, a θ₁-only profile k(t), a closed non-constant form,
    and an exact perturbation dφ of θ₁.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    family = [
        ("theta1", OneForm.constant(1.0, 0.0, n)),
        ("theta2", OneForm.constant(0.0, 1.0, n)),
        ("3theta1+5theta2", OneForm.constant(3.0, 5.0, n)),
        ("k(t)theta1", OneForm.from_functions(n, lambda t1, t2: 2.0 + np.sin(t1))),
        ("cos(t1+t2)(theta1+theta2)",
         OneForm.from_functions(n, lambda t1, t2: np.cos(t1 + t2), lambda t1, t2: np.cos(t1 + t2))),
        ("theta1+dphi", OneForm.constant(1.0, 0.0, n) + OneForm.exact(random_band_limited(n, 4, rng))),
    ]
    return family


def write_report(report: Iterable[CohomologyCheck], path: Path) -> Path:
    """One JSON object per line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        for item in report:
            f.write(json.dumps(item.to_dict(), sort_keys=True) + "\n")
    return path
