"""Verification suites driven by the `verify` command"""

from .verification_suite import CheckResult, VerificationSuite, format_table
from .cocycle_suite import CocycleSuite
from .lemma_suite import LemmaSuite
from .generator_suite import GeneratorSuite
from .formulation_suite import FormulationSuite
from .integrability_suite import IntegrabilitySuite

SUITES = {
    'cocycle': CocycleSuite,
    'lemma': LemmaSuite,
    'generator': GeneratorSuite,
    'formulation': FormulationSuite,
    'integrability': IntegrabilitySuite,
}

__all__ = [
    'CheckResult',
    'VerificationSuite',
    'format_table',
    'SUITES',
    'CocycleSuite',
    'LemmaSuite',
    'GeneratorSuite',
    'FormulationSuite',
    'IntegrabilitySuite',
]
