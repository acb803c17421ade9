"""Report records produced by the verification suites."""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

RUNTIME_FIELDS = ('runtime_seconds', 'total_runtime_seconds')


@dataclass
class ItoReport:
    """Outcome of one suite on one seed."""
    suite: str
    seed: int
    residual: float
    tolerance: float
    passed: bool
    residuals: Dict[str, float] = field(default_factory=dict)
    parameters: Dict[str, Any] = field(default_factory=dict)
    skipped: bool = False
    error: Optional[str] = None
    runtime_seconds: float = 0.0

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError(f"residual must be nonnegative, got {self.residual}")

    @classmethod
    def from_residuals(cls, suite: str, seed: int, residuals: Dict[str, float], tolerance: float,
                       scale: float = 1.0, parameters: Optional[Dict[str, Any]] = None) -> 'ItoReport':
        """Pass when every residual is within tolerance, relative once the scale exceeds one."""
        residual = max(residuals.values(), default=0.0)
        passed = within_tolerance(residual, tolerance, scale)
        return cls(suite, seed, float(residual), tolerance, passed,
                   {k: float(v) for k, v in residuals.items()}, dict(parameters or {}))

    @classmethod
    def skip(cls, suite: str, seed: int, tolerance: float, reason: str,
             parameters: Optional[Dict[str, Any]] = None) -> 'ItoReport':
        params = dict(parameters or {})
        params['skip_reason'] = reason
        return cls(suite, seed, 0.0, tolerance, True, {}, params, skipped=True)

    @classmethod
    def failure(cls, suite: str, seed: int, tolerance: float, error: str,
                parameters: Optional[Dict[str, Any]] = None) -> 'ItoReport':
        return cls(suite, seed, 0.0, tolerance, False, {}, dict(parameters or {}), error=error)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def within_tolerance(residual: float, tolerance: float, scale: float = 1.0) -> bool:
    """Absolute tolerance at unit scale, relative to the scale above it."""
    return residual <= tolerance * max(1.0, scale)


@dataclass
class RunReport:
    """All records of one harness run."""
    config: Dict[str, Any]
    records: List[ItoReport] = field(default_factory=list)
    total_runtime_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failed_records(self) -> List[ItoReport]:
        return [r for r in self.records if not r.passed]

    def by_suite(self) -> Dict[str, List[ItoReport]]:
        grouped: Dict[str, List[ItoReport]] = {}
        for record in self.records:
            grouped.setdefault(record.suite, []).append(record)
        return grouped

    def to_dict(self, include_runtime: bool = True) -> Dict[str, Any]:
        data = {
            'config': self.config,
            'passed': self.passed,
            'total_records': len(self.records),
            'failed_records': len(self.failed_records),
            'records': [r.to_dict() for r in self.records],
            'total_runtime_seconds': self.total_runtime_seconds,
        }
        if not include_runtime:
            data.pop('total_runtime_seconds')
            for record in data['records']:
                record.pop('runtime_seconds', None)
        return data
