"""
VerificationSuite - Base interface for the named `verify` suites

Uses Command Pattern to enable:
- Consistent suite interface for the CLI
- Easy to add new suites
- Uniform pass/fail reporting
"""
import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    """One named check with its measured value and bound"""
    name: str
    value: float
    bound: float
    passed: bool
    comparison: str = "<="    # "<=" (upper bound) or ">=" (lower bound)

    @classmethod
    def at_most(cls, name: str, value: float, bound: float) -> 'CheckResult':
        value = float(value)
        return cls(name, value, bound, bool(np.isfinite(value) and value <= bound), "<=")

    @classmethod
    def at_least(cls, name: str, value: float, bound: float) -> 'CheckResult':
        value = float(value)
        return cls(name, value, bound, bool(np.isfinite(value) and value >= bound), ">=")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class VerificationSuite(ABC):
    """
    Base interface for verification suites.

    Every suite driven by `verify <name>` implements this interface.

    Example:
        class MySuite(VerificationSuite):
            def run_checks(self):
                return [CheckResult.at_most("identity", residual, 1e-10)]
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    @abstractmethod
    def get_name(self) -> str:
        """Suite name as typed on the command line"""
        pass

    @abstractmethod
    def run_checks(self) -> List[CheckResult]:
        """Evaluate every check of the suite"""
        pass

    def get_description(self) -> str:
        """
        Get suite description for the result table.

        Override to provide helpful text.
        """
        return f"Verify {self.get_name()}"

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def execute(self) -> List[CheckResult]:
        """Run the suite and log a summary"""
        logger.info("Running suite '%s' (seed=%d)", self.get_name(), self.seed)
        results = self.run_checks()
        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.warning("Suite '%s': %d of %d checks failed: %s",
                           self.get_name(), len(failed), len(results), ", ".join(failed))
        else:
            logger.info("Suite '%s': all %d checks passed", self.get_name(), len(results))
        return results

    def write_records(self, results: List[CheckResult], path: Union[str, Path]) -> Path:
        """
        Write the suite output as JSON lines.

        Override when the suite has a richer native report.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            for result in results:
                f.write(json.dumps(result.to_dict(), sort_keys=True) + "\n")
        return path


def format_table(suite: VerificationSuite, results: List[CheckResult]) -> str:
    """Per-check pass/fail table"""
    width = max([len(r.name) for r in results] + [5])
    lines = [f"{suite.get_name()}: {suite.get_description()}",
             f"{'check':<{width}}  {'value':>12}  {'bound':>12}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.value:>12.4e}  {r.comparison} {r.bound:<9.3g}  "
                     f"{'PASS' if r.passed else 'FAIL'}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)


def relative(residual: float, scale: float) -> float:
    """residual / max(1, scale)"""
    return float(residual) / max(1.0, float(scale))
