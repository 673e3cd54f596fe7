"""Data models for the QGS laboratory"""

from .errors import QGSLabError, ConfigError, SolverInstabilityError, SimulationError
from .fields import WaveIndex, SpectralScalarField, VelocityField
from .extension import BasisKind, BasisFieldSpec, CocycleParams, ExtendedElement
from .noise import (NoiseModel, KolmogorovBasis, TwoConstantFields, ParticleEnsemble,
                    PathData, DriftEstimate)
from .solver_data import SigmaMode, SolverConfig, SolverState
from .one_form import OneForm, CohomologyCheck

__all__ = [
    'QGSLabError',
    'ConfigError',
    'SolverInstabilityError',
    'SimulationError',
    'WaveIndex',
    'SpectralScalarField',
    'VelocityField',
    'BasisKind',
    'BasisFieldSpec',
    'CocycleParams',
    'ExtendedElement',
    'NoiseModel',
    'KolmogorovBasis',
    'TwoConstantFields',
    'ParticleEnsemble',
    'PathData',
    'DriftEstimate',
    'SigmaMode',
    'SolverConfig',
    'SolverState',
    'OneForm',
    'CohomologyCheck',
]
