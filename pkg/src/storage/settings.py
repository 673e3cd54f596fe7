"""QSettings wrapper for experiment configuration files (INI format)"""
import logging
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from PySide6.QtCore import QSettings

from ..models.errors import ConfigError
from ..models.noise import KolmogorovBasis, NoiseModel, TwoConstantFields
from ..models.solver_data import SigmaMode, SolverConfig

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.ini"


class ExperimentSettings:
    """Read-only view of one INI config file through QSettings - NO data caching"""

    def __init__(self, path: Union[str, Path]):
        """
        Open a config file

        Args:
            path: INI file with [grid], [time], [physics], ... sections

        Raises:
            ConfigError: if the file is missing or cannot be parsed
        """
        self.path = Path(path)
        if not self.path.is_file():
            raise ConfigError(f"Config file not found: {self.path}")
        self._settings = QSettings(str(self.path), QSettings.Format.IniFormat)
        if self._settings.status() != QSettings.Status.NoError:
            raise ConfigError(f"Malformed config file: {self.path}")

    def keys(self) -> List[str]:
        """All keys as 'section/key'"""
        return list(self._settings.allKeys())

    def contains(self, key: str) -> bool:
        return self._settings.contains(key)

    def raw(self, key: str) -> Optional[str]:
        """Value as text (None when absent)"""
        if not self._settings.contains(key):
            return None
        value = self._settings.value(key)
        if isinstance(value, (list, tuple)):
            # QSettings splits comma-separated INI values
            value = ",".join(str(v) for v in value)
        return str(value).strip()


# ==================== CONFIG SECTIONS ====================

@dataclass
class GridSection:
    n: int = 0


@dataclass
class TimeSection:
    dt: Optional[float] = None
    steps: Optional[int] = None
    tau: Optional[float] = None


@dataclass
class PhysicsSection:
    beta: float = 0.0
    a: float = 1.0
    nu: float = 0.0
    sigma_mode: str = "auto"   # auto | none | constant | spectral
    sigma: float = 0.0
    m: int = 1
    r: float = 3.0


@dataclass
class NoiseSection:
    model: str = "none"        # none | kolmogorov | two_field
    m: int = 1
    r: float = 3.0
    nu: float = 0.0


@dataclass
class EnsembleSection:
    particles: int = 0
    seed: int = 0


@dataclass
class OutputSection:
    dir: str = "out"
    snapshot_every: int = 0
    format: str = "csv"        # csv | npz


@dataclass
class InitialSection:
    kind: str = "rossby"       # rossby | random | zero
    k1: int = 1
    k2: int = 2
    amplitude: float = 1e-3
    kmax: int = 4
    seed: int = 0


@dataclass
class SimulationSection:
    drift: str = "zero"        # zero | initial | solver
    record_every: int = 1
    window: int = 1
    bins: int = 16
    start: str = "uniform"     # uniform | point
    theta1: float = 0.0
    theta2: float = 0.0
    scheme: str = "heun"       # heun | euler_maruyama


_SECTIONS = {
    'grid': GridSection,
    'time': TimeSection,
    'physics': PhysicsSection,
    'noise': NoiseSection,
    'ensemble': EnsembleSection,
    'output': OutputSection,
    'initial': InitialSection,
    'simulation': SimulationSection,
}

_CHOICES = {
    'physics/sigma_mode': ('auto', 'none', 'constant', 'spectral'),
    'noise/model': ('none', 'kolmogorov', 'two_field'),
    'output/format': ('csv', 'npz'),
    'initial/kind': ('rossby', 'random', 'zero'),
    'simulation/drift': ('zero', 'initial', 'solver'),
    'simulation/start': ('uniform', 'point'),
    'simulation/scheme': ('heun', 'euler_maruyama'),
}

_U64_MAX = 2 ** 64 - 1


@dataclass
class ExperimentConfig:
    """Fully resolved experiment configuration"""
    grid: GridSection = field(default_factory=GridSection)
    time: TimeSection = field(default_factory=TimeSection)
    physics: PhysicsSection = field(default_factory=PhysicsSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    ensemble: EnsembleSection = field(default_factory=EnsembleSection)
    output: OutputSection = field(default_factory=OutputSection)
    initial: InitialSection = field(default_factory=InitialSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)

    # ==================== DERIVED OBJECTS ====================

    def require_time(self):
        """dt, steps and tau all set (raises ConfigError otherwise)"""
        if self.time.dt is None:
            raise ConfigError("Missing required key time/dt", key="time/dt")
        if self.time.steps is None and self.time.tau is None:
            raise ConfigError("One of time/steps or time/tau is required", key="time/steps")

    def noise_model(self) -> Optional[NoiseModel]:
        if self.noise.model == 'kolmogorov':
            return KolmogorovBasis(self.noise.m, self.noise.r)
        if self.noise.model == 'two_field':
            return TwoConstantFields(self.noise.nu)
        return None

    def resolved_sigma_mode(self) -> str:
        if self.physics.sigma_mode != 'auto':
            return self.physics.sigma_mode
        return 'spectral' if self.noise.model == 'kolmogorov' else 'none'

    def solver_config(self) -> SolverConfig:
        self.require_time()
        mode = SigmaMode(self.resolved_sigma_mode())
        if mode is SigmaMode.SPECTRAL and self.physics.sigma_mode == 'auto':
            m, r = self.noise.m, self.noise.r
        else:
            m, r = self.physics.m, self.physics.r
        try:
            return SolverConfig(
                n=self.grid.n,
                dt=self.time.dt,
                steps=self.time.steps,
                beta=self.physics.beta,
                a=self.physics.a,
                nu=self.physics.nu,
                sigma_mode=mode,
                sigma=self.physics.sigma,
                m=m,
                r=r,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def with_overrides(self, seed: Optional[int] = None, out_dir: Optional[str] = None) -> 'ExperimentConfig':
        """Copy with --seed / --out applied (seed sets both ensemble and initial seeds)"""
        config = self
        if seed is not None:
            if not 0 <= seed <= _U64_MAX:
                raise ConfigError(f"Seed must be an unsigned 64-bit integer, got {seed}", key="ensemble/seed")
            config = replace(config,
                             ensemble=replace(config.ensemble, seed=seed),
                             initial=replace(config.initial, seed=seed))
        if out_dir is not None:
            config = replace(config, output=replace(config.output, dir=str(out_dir)))
        return config

    def to_sections(self) -> Dict[str, Dict[str, Any]]:
        """Section → key → value, None values dropped"""
        out = {}
        for name in _SECTIONS:
            values = asdict(getattr(self, name))
            out[name] = {k: v for k, v in values.items() if v is not None}
        return out


# ==================== PARSING ====================

def _convert(raw: str, target: Any, key: str):
    try:
        if target is int or target == Optional[int]:
            number = float(raw)
            if not number.is_integer():
                raise ValueError(raw)
            return int(raw) if raw.lstrip('+-').isdigit() else int(number)
        if target is float or target == Optional[float]:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"Invalid value for {key}: {raw!r}", key=key) from None


def _validate(config: ExperimentConfig):
    if config.grid.n == 0:
        raise ConfigError("Missing required key grid/n", key="grid/n")
    if config.grid.n < 8 or config.grid.n % 2:
        raise ConfigError(f"grid/n must be even and >= 8, got {config.grid.n}", key="grid/n")
    t = config.time
    if t.dt is not None and not t.dt > 0:
        raise ConfigError(f"time/dt must be positive, got {t.dt}", key="time/dt")
    if t.steps is not None and t.steps < 0:
        raise ConfigError(f"time/steps must be >= 0, got {t.steps}", key="time/steps")
    if t.tau is not None and not t.tau > 0:
        raise ConfigError(f"time/tau must be positive, got {t.tau}", key="time/tau")
    if t.dt is not None:
        if t.steps is not None:
            t.tau = t.steps * t.dt
        elif t.tau is not None:
            t.steps = int(round(t.tau / t.dt))
            t.tau = t.steps * t.dt
    if config.physics.nu < 0 or config.noise.nu < 0:
        raise ConfigError("Viscosities must be >= 0", key="physics/nu" if config.physics.nu < 0 else "noise/nu")
    if not 0 <= config.ensemble.seed <= _U64_MAX:
        raise ConfigError("ensemble/seed must be an unsigned 64-bit integer", key="ensemble/seed")
    if config.ensemble.particles < 0:
        raise ConfigError("ensemble/particles must be >= 0", key="ensemble/particles")
    for key, minimum in (('simulation/record_every', 1), ('simulation/window', 1),
                         ('simulation/bins', 1), ('output/snapshot_every', 0)):
        section, name = key.split('/')
        if getattr(getattr(config, section), name) < minimum:
            raise ConfigError(f"{key} must be >= {minimum}", key=key)
    if 3 * config.initial.kmax > config.grid.n and config.initial.kind == 'random':
        raise ConfigError(f"initial/kmax={config.initial.kmax} exceeds the dealiased band of n={config.grid.n}",
                          key="initial/kmax")


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Parse and validate a config file.

    Raises:
        ConfigError: missing file, unknown key, invalid value or missing required key
    """
    settings = ExperimentSettings(path)
    sections = {name: cls() for name, cls in _SECTIONS.items()}
    for key in settings.keys():
        if '/' not in key:
            raise ConfigError(f"Unknown config key: {key} (keys must live in a section)", key=key)
        section, name = key.split('/', 1)
        if section not in sections or name not in sections[section].__dataclass_fields__:
            raise ConfigError(f"Unknown config key: {key}", key=key)
        target = sections[section].__dataclass_fields__[name].type
        raw = settings.raw(key)
        value = _convert(raw, target, key)
        if key in _CHOICES and value not in _CHOICES[key]:
            raise ConfigError(f"Invalid value for {key}: {raw!r} (expected one of {', '.join(_CHOICES[key])})",
                              key=key)
        setattr(sections[section], name, value)
    config = ExperimentConfig(**sections)
    _validate(config)
    logger.info("Loaded config %s", settings.path)
    return config


def write_resolved_config(config: ExperimentConfig, out_dir: Union[str, Path]) -> Path:
    """Write the resolved config next to the outputs; the file is itself a valid config."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / RESOLVED_CONFIG_NAME
    if path.exists():
        path.unlink()
    settings = QSettings(str(path), QSettings.Format.IniFormat)
    for section, values in config.to_sections().items():
        for key, value in values.items():
            settings.setValue(f"{section}/{key}", repr(value) if isinstance(value, float) else str(value))
    settings.sync()
    return path
