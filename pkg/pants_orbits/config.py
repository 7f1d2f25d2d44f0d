"""
Run configuration.

Defaults come from Django settings (environment / .env), a key-value config
file overrides them and command-line flags override both.
"""

from dataclasses import dataclass, asdict, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional
import logging

from django.conf import settings
from dotenv import dotenv_values

from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    tol: float
    bisection_tol: float
    collision_guard: float
    metric_guard: float
    chart_guard: float
    chart_exit: float
    sample_step: float
    d0: float
    horizon: float
    horizon_depth: float
    tail_depth: float
    grid: int
    bisection_steps: int
    eps: float
    eps_max: float
    winding_horizon: float
    workers: int
    seed: int
    output_dir: Path

    def __post_init__(self):
        positive = ['tol', 'bisection_tol', 'collision_guard', 'metric_guard', 'chart_guard',
                    'chart_exit', 'sample_step', 'horizon', 'horizon_depth', 'tail_depth',
                    'eps_max', 'winding_horizon']
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.metric_guard < self.chart_guard < self.chart_exit:
            raise ConfigurationError(
                f"guards must satisfy metric_guard < chart_guard < chart_exit "
                f"({self.metric_guard}, {self.chart_guard}, {self.chart_exit})"
            )
        if self.grid < 8:
            raise ConfigurationError(f"grid must be at least 8, got {self.grid}")
        if self.d0 < 2:
            raise ConfigurationError(f"d0 must be at least 2, got {self.d0}")
        if self.bisection_steps < 1 or self.workers < 1:
            raise ConfigurationError("bisection_steps and workers must be at least 1")
        if self.eps < 0 or self.eps > self.eps_max:
            raise ConfigurationError(f"eps must lie in [0, {self.eps_max}], got {self.eps}")

    @classmethod
    def from_settings(cls) -> 'RunConfig':
        return cls(
            tol=settings.PANTS_TOL,
            bisection_tol=settings.PANTS_BISECTION_TOL,
            collision_guard=settings.PANTS_COLLISION_GUARD,
            metric_guard=settings.PANTS_METRIC_GUARD,
            chart_guard=settings.PANTS_CHART_GUARD,
            chart_exit=settings.PANTS_CHART_EXIT,
            sample_step=settings.PANTS_SAMPLE_STEP,
            d0=settings.PANTS_D0,
            horizon=settings.PANTS_HORIZON,
            horizon_depth=settings.PANTS_HORIZON_DEPTH,
            tail_depth=settings.PANTS_TAIL_DEPTH,
            grid=settings.PANTS_GRID,
            bisection_steps=settings.PANTS_BISECTION_STEPS,
            eps=settings.PANTS_EPS,
            eps_max=settings.PANTS_EPS_MAX,
            winding_horizon=settings.PANTS_WINDING_HORIZON,
            workers=settings.PANTS_WORKERS,
            seed=settings.PANTS_SEED,
            output_dir=Path(settings.PANTS_OUTPUT_DIR),
        )

    def with_overrides(self, overrides: Dict[str, Any]) -> 'RunConfig':
        """Return a copy with the given fields replaced; None values are ignored."""
        types = {f.name: f.type for f in fields(self)}
        clean = {}
        for key, value in overrides.items():
            if value is None:
                continue
            key = key.lower()
            if key.startswith('pants_'):
                key = key[len('pants_'):]
            if key not in types:
                raise ConfigurationError(f"Unknown configuration key: {key}")
            clean[key] = _coerce(key, types[key], value)
        return replace(self, **clean)

    def as_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['output_dir'] = str(self.output_dir)
        return data


def _coerce(key: str, type_name: Any, value: Any) -> Any:
    type_name = getattr(type_name, '__name__', type_name)
    try:
        if type_name == 'int':
            return int(value)
        if type_name == 'float':
            return float(value)
        if type_name == 'Path':
            return Path(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Bad value for {key}: {value!r} ({e})")
    return value


def load_run_config(config_file: Optional[str] = None, **flags: Any) -> RunConfig:
    """
    Build the RunConfig for a command run

    Args:
        config_file: Optional key-value file (dotenv syntax)
        **flags: Command-line overrides; None means "not given"

    Returns:
        Validated RunConfig
    """
    config = RunConfig.from_settings()
    if config_file:
        path = Path(config_file)
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")
        file_values = {k: v for k, v in dotenv_values(path).items() if v is not None}
        logger.info(f"Loaded {len(file_values)} settings from {path}")
        config = config.with_overrides(file_values)
    return config.with_overrides(flags)
