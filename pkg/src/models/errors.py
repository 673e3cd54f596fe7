"""Exception types shared across the package"""


class QGSLabError(Exception):
    """Base class for errors raised by the laboratory"""
    pass


class ConfigError(QGSLabError):
    """Configuration file missing, malformed, or containing unknown/invalid keys"""

    def __init__(self, message: str, key: str = None):
        super().__init__(message)
        self.key = key


class SolverInstabilityError(QGSLabError):
    """Non-finite spectrum after a time step"""

    def __init__(self, t: float):
        super().__init__(f"blow-up or instability at t={t!r}")
        self.t = t


class SimulationError(QGSLabError):
    """Particle simulation failed (drift evaluation or non-finite positions)"""
    pass
