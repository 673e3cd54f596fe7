"""
IntegrabilitySuite - ∫_N γ = ∫ α∧γ over closed forms, rejection of non-closed ones
"""
from pathlib import Path
from typing import List, Union

import numpy as np

from .verification_suite import CheckResult, VerificationSuite
from ..models.one_form import OneForm
from ..utils.cocycle_integrability import (
    DEFAULT_ALPHA,
    MATCH_TOL,
    closed_form_family,
    check_cohomologous,
    integrate_over_N,
    wedge_integral,
    write_report,
)
from ..utils.spectral_grid import TWO_PI


class IntegrabilitySuite(VerificationSuite):
    """Integral criterion on constant, profile, closed and exact forms"""

    def __init__(self, seed: int = 0, n: int = 32, s0: float = 0.7):
        super().__init__(seed)
        self.n = n
        self.s0 = s0
        self.report = []

    def get_name(self) -> str:
        return "integrability"

    def get_description(self) -> str:
        return "integral criterion int_N gamma = int alpha^gamma for closed 1-forms"

    def run_checks(self) -> List[CheckResult]:
        family = closed_form_family(self.n, self.rng())
        report = check_cohomologous(family, s0=self.s0)
        results = []
        for item in report:
            if item.rejected:
                results.append(CheckResult.at_most(f"closed_{item.gamma_id}", item.closed_residual, 0.0))
                continue
            results.append(CheckResult.at_most(f"criterion_{item.gamma_id}",
                                               max(item.abs_diff, item.s_deviation), MATCH_TOL))

        theta1 = OneForm.constant(1.0, 0.0, self.n)
        theta2 = OneForm.constant(0.0, 1.0, self.n)
        results.append(CheckResult.at_most("theta1_equals_2pi",
                                           abs(wedge_integral(DEFAULT_ALPHA, theta1) - TWO_PI), MATCH_TOL))
        results.append(CheckResult.at_most("theta2_equals_0",
                                           abs(integrate_over_N(theta2, self.s0)), MATCH_TOL))

        not_closed = OneForm.from_functions(self.n, lambda t1, t2: np.sin(t2))
        rejected = check_cohomologous([("sin(t2)theta1", not_closed)], s0=self.s0)[0]
        self.report = report + [rejected]
        results.append(CheckResult.at_least("non_closed_rejected", 1.0 if rejected.rejected else 0.0, 1.0))

        # opposite orientation of α breaks the criterion on θ₁
        flipped = abs(integrate_over_N(theta1, self.s0) - wedge_integral(-DEFAULT_ALPHA, theta1))
        results.append(CheckResult.at_least("opposite_orientation_differs", flipped, 1.0))
        return results

    def write_records(self, results: List[CheckResult], path: Union[str, Path]) -> Path:
        """Cohomology report of the last run, one form per line"""
        return write_report(self.report, path)
