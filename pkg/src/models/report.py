"""
Modèle des rapports de vérification
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from src.services.numerics import encode_complex

PASS = 'pass'
FAIL = 'fail'
INFO = 'info'
SKIP = 'skip'


def _encode_value(value):
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, (complex, np.complexfloating)):
        return encode_complex(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _encode_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode_value(v) for v in value]
    return str(value)


@dataclass
class ReportEntry:
    """Entrée de rapport {check, location, lhs, rhs, residual, verdict}"""

    check: str
    location: str
    lhs: Any = None
    rhs: Any = None
    residual: Optional[float] = None
    verdict: str = INFO
    parameter: Any = None
    detail: Optional[str] = None

    @classmethod
    def compare(cls, check: str, location: str, lhs, rhs, tolerance: float,
                parameter=None, detail: Optional[str] = None) -> "ReportEntry":
        """Entrée pass/fail selon |lhs − rhs| ≤ tolerance"""
        residual = float(abs(complex(lhs) - complex(rhs)))
        verdict = PASS if residual <= tolerance else FAIL
        return cls(check, location, lhs, rhs, residual, verdict, parameter, detail)

    @classmethod
    def bound(cls, check: str, location: str, residual: float, tolerance: float,
              parameter=None, detail: Optional[str] = None) -> "ReportEntry":
        verdict = PASS if residual <= tolerance else FAIL
        return cls(check, location, None, None, float(residual), verdict, parameter, detail)

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL

    def sort_key(self) -> tuple:
        parameter = self.parameter
        if isinstance(parameter, complex):
            parameter = (parameter.real, parameter.imag)
        return (self.check, self.location, str(parameter), self.detail or '')

    def to_dict(self) -> dict:
        """Convertit en dictionnaire"""
        return {
            'check': self.check,
            'location': self.location,
            'lhs': _encode_value(self.lhs),
            'rhs': _encode_value(self.rhs),
            'residual': _encode_value(self.residual),
            'verdict': self.verdict,
            'parameter': _encode_value(self.parameter),
            'detail': self.detail,
        }

    def __repr__(self):
        return f'<ReportEntry {self.check} {self.location} {self.verdict}>'


@dataclass
class Report:
    """Rapport complet: écho du scénario, entrées, verdict global"""

    scenario: Dict[str, Any] = field(default_factory=dict)
    entries: List[ReportEntry] = field(default_factory=list)
    versions: Dict[str, str] = field(default_factory=dict)
    conventions: Dict[str, Any] = field(default_factory=dict)
    sections: Dict[str, Any] = field(default_factory=dict)

    def add(self, entry: ReportEntry):
        self.entries.append(entry)

    def extend(self, entries: Iterable[ReportEntry]):
        self.entries.extend(entries)

    @property
    def verdict(self) -> str:
        return FAIL if any(e.failed for e in self.entries) else PASS

    def failures(self) -> List[ReportEntry]:
        return [e for e in self.entries if e.failed]

    def checks(self) -> List[str]:
        return sorted({e.check for e in self.entries})

    def max_residual(self, check: str) -> Optional[float]:
        residuals = [e.residual for e in self.entries if e.check == check and e.residual is not None]
        return max(residuals) if residuals else None

    def counts(self) -> Dict[str, int]:
        counts = {PASS: 0, FAIL: 0, INFO: 0, SKIP: 0}
        for entry in self.entries:
            counts[entry.verdict] = counts.get(entry.verdict, 0) + 1
        return counts

    def to_dict(self) -> dict:
        """Convertit en dictionnaire"""
        return {
            'scenario': _encode_value(self.scenario),
            'versions': dict(self.versions),
            'conventions': _encode_value(self.conventions),
            'sections': _encode_value(self.sections),
            'entries': [e.to_dict() for e in self.entries],
            'summary': {'verdict': self.verdict, 'counts': self.counts()},
        }

    def __repr__(self):
        return f'<Report {len(self.entries)} entrées, verdict={self.verdict}>'
