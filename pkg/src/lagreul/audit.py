"""Uniform record for measured-versus-bound comparisons."""
import json
import math
from dataclasses import dataclass, field

import numpy as np

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


@dataclass
class BoundAudit:
    """One comparison of a measured quantity against its bound.

    The verdict is PASS when ``measured / bound <= 1 + slack``.  An audit built
    from a quadrature or solve that did not converge is INCONCLUSIVE, never PASS.
    """

    audit_id: str
    measured: float
    bound: float
    slack: float = 0.0
    sweep: dict = field(default_factory=dict)
    exponent_fit: float | None = None
    converged: bool = True
    details: dict = field(default_factory=dict)
    verdict: str | None = None

    def __post_init__(self):
        self.measured = float(self.measured)
        self.bound = float(self.bound)
        if self.measured < 0 or self.bound < 0:
            raise ValueError(f"{self.audit_id}: measured and bound must be nonnegative")
        if self.verdict is None:
            if not self.converged:
                self.verdict = INCONCLUSIVE
            else:
                self.verdict = PASS if self.ratio <= 1.0 + self.slack else FAIL

    @property
    def ratio(self):
        if self.bound == 0.0:
            return 0.0 if self.measured == 0.0 else math.inf
        return self.measured / self.bound

    @property
    def passed(self):
        return self.verdict == PASS

    def to_dict(self):
        return {
            "audit_id": self.audit_id,
            "measured": self.measured,
            "bound": self.bound,
            "ratio": self.ratio,
            "slack": self.slack,
            "sweep": _plain(self.sweep),
            "exponent_fit": self.exponent_fit,
            "verdict": self.verdict,
            "details": _plain(self.details),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def fit_exponent(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("exponent fit needs at least two positive samples")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def all_passed(audits):
    return all(a.passed for a in audits)
