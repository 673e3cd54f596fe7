"""Services for the QGS laboratory"""

from .qgs_solver import QGSSolver, EulerArnoldIntegrator
from .stochastic_flow import SteadyDrift, SampledDrift, simulate

__all__ = [
    'QGSSolver',
    'EulerArnoldIntegrator',
    'SteadyDrift',
    'SampledDrift',
    'simulate',
]
