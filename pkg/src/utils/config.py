"""Configuration management for the kernel calculus verification harness."""

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import load_dotenv

from src.utils.errors import ConfigError

# Load environment variables
load_dotenv()

SUITE_CHOICES = (
    'fubini', 'epsilon_adjoint', 'epsilon_homomorphism', 'meyer_mobius', 'intertwining',
    'norms', 'lemma2', 'strong_ito', 'weak_ito', 'q_adapted_ito', 'wiener',
)
Q_KINDS = ('identity', 'zero', 'projector', 'scalar', 'random')
HARNESS_KEYS = (
    'n_points', 'horizon', 'times', 'weights', 'multiplicities', 'initial_dim', 'seeds',
    'suites', 'q_field', 'tolerances', 'output', 'density', 'magnitude', 'degree',
)


class Config:
    """Environment-level settings for the harness."""

    def __init__(self):
        self.base_dir = Path(__file__).parent.parent.parent

        # Database
        self.database_url: str = os.getenv('DATABASE_URL', 'sqlite:///fockcalc_runs.db')

        # Parallelism
        self.max_workers: int = max(1, int(os.getenv('FOCKCALC_MAX_WORKERS', '4')))

        # Numerics
        self.default_tolerance: float = float(os.getenv('FOCKCALC_DEFAULT_TOLERANCE', '1e-9'))

        # Paths
        self.output_path: Path = Path(os.getenv('FOCKCALC_OUTPUT_PATH', self.base_dir / 'reports'))
        self.log_path: Path = self.base_dir / 'logs'

        # Logging
        self.log_level: str = os.getenv('LOG_LEVEL', 'INFO')
        self.log_file: str = os.getenv('LOG_FILE', 'fockcalc.log')

        # Ensure directories exist
        self._create_directories()

    def _create_directories(self):
        """Create necessary directories if they don't exist."""
        for path in [self.output_path, self.log_path]:
            path.mkdir(parents=True, exist_ok=True)

    def get_log_file_path(self) -> Path:
        """Get the full path to the log file."""
        return self.log_path / self.log_file

    def to_dict(self) -> Dict[str, Any]:
        return {
            'database_url': self.database_url,
            'max_workers': self.max_workers,
            'default_tolerance': self.default_tolerance,
            'output_path': str(self.output_path),
            'log_path': str(self.get_log_file_path()),
            'log_level': self.log_level,
        }


@dataclass
class HarnessConfig:
    """One verification run: the point space, the seeds and the suites."""
    n_points: int = 4
    horizon: float = 1.0
    times: Optional[List[float]] = None
    weights: Union[float, List[float], None] = None
    multiplicities: Union[int, List[int]] = 1
    initial_dim: int = 2
    seed_count: int = 100
    seed_base: int = 0
    suites: List[str] = field(default_factory=lambda: list(SUITE_CHOICES))
    q_kind: str = 'projector'
    q_rank: int = 1
    q_value: complex = 2.0
    tolerances: Dict[str, float] = field(default_factory=dict)
    output: Optional[str] = None
    density: float = 0.5
    magnitude: float = 1.0
    degree: int = 2

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'HarnessConfig':
        """Parse the JSON form; every problem is reported with its field name."""
        if not isinstance(data, dict):
            raise ConfigError('config', 'must be a JSON object')
        unknown = sorted(set(data) - set(HARNESS_KEYS))
        if unknown:
            raise ConfigError(unknown[0], 'unknown key')

        kwargs: Dict[str, Any] = {}
        for key in ('n_points', 'initial_dim', 'degree'):
            if key in data:
                kwargs[key] = _as_int(key, data[key])
        for key in ('horizon', 'density', 'magnitude'):
            if key in data:
                kwargs[key] = _as_float(key, data[key])
        if 'times' in data and data['times'] is not None:
            kwargs['times'] = [_as_float('times', v) for v in _as_list('times', data['times'])]
        if 'weights' in data and data['weights'] is not None:
            value = data['weights']
            kwargs['weights'] = ([_as_float('weights', v) for v in value] if isinstance(value, list)
                                 else _as_float('weights', value))
        if 'multiplicities' in data:
            value = data['multiplicities']
            kwargs['multiplicities'] = ([_as_int('multiplicities', v) for v in value] if isinstance(value, list)
                                        else _as_int('multiplicities', value))

        seeds = data.get('seeds', {})
        if not isinstance(seeds, dict):
            raise ConfigError('seeds', 'must be an object with count and base')
        if 'count' in seeds:
            kwargs['seed_count'] = _as_int('seeds.count', seeds['count'])
        if 'base' in seeds:
            kwargs['seed_base'] = _as_int('seeds.base', seeds['base'])

        if 'suites' in data:
            suites = _as_list('suites', data['suites'])
            if not all(isinstance(s, str) for s in suites):
                raise ConfigError('suites', 'must be a list of suite names')
            kwargs['suites'] = list(suites)

        q_field = data.get('q_field', {})
        if isinstance(q_field, str):
            q_field = {'kind': q_field}
        if not isinstance(q_field, dict):
            raise ConfigError('q_field', 'must be a kind name or an object with kind, rank, value')
        if 'kind' in q_field:
            kwargs['q_kind'] = q_field['kind']
        if 'rank' in q_field:
            kwargs['q_rank'] = _as_int('q_field.rank', q_field['rank'])
        if 'value' in q_field:
            kwargs['q_value'] = _as_complex('q_field.value', q_field['value'])

        if 'tolerances' in data:
            tolerances = data['tolerances']
            if not isinstance(tolerances, dict):
                raise ConfigError('tolerances', 'must map suite names to numbers')
            kwargs['tolerances'] = {k: _as_float(f"tolerances.{k}", v) for k, v in tolerances.items()}
        if 'output' in data:
            kwargs['output'] = data['output']
        return cls(**kwargs)

    def validate(self):
        if self.n_points < 0:
            raise ConfigError('n_points', 'must be >= 0')
        if self.horizon <= 0:
            raise ConfigError('horizon', 'must be positive')
        if self.initial_dim < 1:
            raise ConfigError('initial_dim', 'must be >= 1')
        if self.seed_count < 1:
            raise ConfigError('seeds.count', 'must be >= 1')
        for name in self.suites:
            if name not in SUITE_CHOICES:
                raise ConfigError('suites', f"unknown suite {name!r}")
        for name in self.tolerances:
            if name not in SUITE_CHOICES:
                raise ConfigError('tolerances', f"unknown suite {name!r}")
            if self.tolerances[name] <= 0:
                raise ConfigError(f"tolerances.{name}", 'must be positive')
        if self.q_kind not in Q_KINDS:
            raise ConfigError('q_field.kind', f"must be one of {', '.join(Q_KINDS)}")
        if self.q_rank < 0:
            raise ConfigError('q_field.rank', 'must be >= 0')
        if not 0.0 < self.density <= 1.0:
            raise ConfigError('density', 'must lie in (0, 1]')
        if self.magnitude < 0:
            raise ConfigError('magnitude', 'must be >= 0')
        if self.degree < 0:
            raise ConfigError('degree', 'must be >= 0')
        self._check_lists()

    def _check_lists(self):
        if self.times is not None:
            if len(self.times) != self.n_points:
                raise ConfigError('times', f"needs {self.n_points} entries")
            if any(t < 0 for t in self.times):
                raise ConfigError('times', 'must be >= 0')
            if any(b <= a for a, b in zip(self.times, self.times[1:])):
                raise ConfigError('times', 'must be strictly increasing')
        if isinstance(self.weights, list):
            if len(self.weights) != self.n_points:
                raise ConfigError('weights', f"needs {self.n_points} entries")
            if any(w <= 0 for w in self.weights):
                raise ConfigError('weights', 'must be positive')
        elif self.weights is not None and self.weights <= 0:
            raise ConfigError('weights', 'must be positive')
        if isinstance(self.multiplicities, list):
            if len(self.multiplicities) != self.n_points:
                raise ConfigError('multiplicities', f"needs {self.n_points} entries")
            if any(d < 1 for d in self.multiplicities):
                raise ConfigError('multiplicities', 'must be >= 1')
        elif self.multiplicities < 1:
            raise ConfigError('multiplicities', 'must be >= 1')

    def build_space(self):
        """The PointSpace this config describes."""
        from src.core.chainspace import PointSpace

        weights = self.weights
        if weights is not None and not isinstance(weights, list):
            weights = [weights] * self.n_points
        return PointSpace.uniform(self.n_points, self.horizon, self.multiplicities,
                                  self.initial_dim, weights, self.times)

    def q_spec(self):
        from src.core.ensembles import QFieldSpec
        return QFieldSpec(self.q_kind, self.q_rank, self.q_value)

    def with_overrides(self, suites: Optional[List[str]] = None, seed_count: Optional[int] = None,
                       output: Optional[str] = None) -> 'HarnessConfig':
        data = asdict(self)
        if suites:
            data['suites'] = list(suites)
        if seed_count is not None:
            data['seed_count'] = seed_count
        if output is not None:
            data['output'] = output
        return HarnessConfig(**data)

    def to_dict(self) -> Dict[str, Any]:
        """JSON echo of the config, in the file layout."""
        value = self.q_value
        return {
            'n_points': self.n_points,
            'horizon': self.horizon,
            'times': self.times,
            'weights': self.weights,
            'multiplicities': self.multiplicities,
            'initial_dim': self.initial_dim,
            'seeds': {'count': self.seed_count, 'base': self.seed_base},
            'suites': list(self.suites),
            'q_field': {'kind': self.q_kind, 'rank': self.q_rank,
                        'value': [value.real, value.imag] if isinstance(value, complex) else value},
            'tolerances': dict(sorted(self.tolerances.items())),
            'output': self.output,
            'density': self.density,
            'magnitude': self.magnitude,
            'degree': self.degree,
        }


def _as_int(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"must be an integer, got {value!r}")
    return value


def _as_float(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"must be a number, got {value!r}")
    return float(value)


def _as_complex(name: str, value: Any) -> complex:
    if isinstance(value, list) and len(value) == 2:
        return complex(_as_float(name, value[0]), _as_float(name, value[1]))
    return _as_float(name, value)


def _as_list(name: str, value: Any) -> list:
    if not isinstance(value, list):
        raise ConfigError(name, 'must be a list')
    return value


def load_harness_config(path: Union[str, Path, None] = None) -> HarnessConfig:
    """Read a harness config file; no file means the defaults."""
    if path is None:
        return HarnessConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError('config', f"file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError('config', f"invalid JSON: {e}")
    return HarnessConfig.from_dict(data)


# Global config instance
config = Config()
