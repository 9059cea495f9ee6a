"""
Empirical distribution utilities: CCDF construction and stochastic-dominance
comparison.  CCDF uses strict exceedance, Pr(X > threshold).
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .constants import DEFAULT_THRESHOLD_POINTS
from .errors import ComparisonError, StatsError


@dataclass(frozen=True)
class CcdfCurve:
    thresholds: Tuple[float, ...]
    prob: Tuple[float, ...]
    n_samples: int


def default_thresholds(samples: Sequence[float], points: int = DEFAULT_THRESHOLD_POINTS) -> np.ndarray:
    """Evenly spaced thresholds over [min - 1, max + 1] dB"""
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise StatsError("cannot build thresholds from an empty sample")
    if not np.all(np.isfinite(values)):
        raise StatsError("cannot build thresholds from non-finite samples")
    return np.linspace(values.min() - 1.0, values.max() + 1.0, points)


def ccdf(samples: Sequence[float], thresholds: Optional[Sequence[float]] = None) -> CcdfCurve:
    """prob[j] = fraction of samples strictly greater than thresholds[j]"""
    values = np.sort(np.asarray(samples, dtype=float))
    if values.size == 0:
        raise StatsError("ccdf needs at least one sample")
    if not np.all(np.isfinite(values)):
        raise StatsError(f"ccdf samples must be finite, got {int(np.sum(~np.isfinite(values)))} non-finite")
    th = default_thresholds(values) if thresholds is None else np.asarray(thresholds, dtype=float)
    if th.ndim != 1 or th.size == 0:
        raise StatsError("thresholds must be a non-empty list")
    if not np.all(np.isfinite(th)):
        raise StatsError("thresholds must be finite")
    if np.any(np.diff(th) <= 0):
        raise StatsError("thresholds must be strictly increasing")
    exceed = values.size - np.searchsorted(values, th, side='right')
    prob = exceed / values.size
    return CcdfCurve(thresholds=tuple(float(t) for t in th),
                     prob=tuple(float(p) for p in prob),
                     n_samples=int(values.size))


def dominates(a: CcdfCurve, b: CcdfCurve, slack: float = 0.0) -> bool:
    """True iff a.prob[j] >= b.prob[j] - slack at every threshold"""
    if a.thresholds != b.thresholds:
        raise ComparisonError("curves are defined over different thresholds")
    return all(pa >= pb - slack for pa, pb in zip(a.prob, b.prob))
