"""Distribution-shape diversity: moment and spread statistics per attribute.

All moments are population moments (denominator n).  Skewness is
m3 / m2^1.5 and kurtosis is excess kurtosis m4 / m2^2 - 3.  Attributes with
fewer than three observed values or zero variance contribute 0 to both shape
terms and are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset
from ..errors import ApplicabilityError


@dataclass(frozen=True)
class AttributeStats:
    name: str
    count: int
    range: float
    variance: float
    stddev: float
    skewness: float
    kurtosis: float
    shape_flagged: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "count": self.count,
            "range": self.range,
            "variance": self.variance,
            "stddev": self.stddev,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "shape_flagged": self.shape_flagged,
        }


@dataclass(frozen=True)
class DistributionSummary:
    attributes: tuple[AttributeStats, ...]
    shape_total: float    # sum over attributes of skewness + kurtosis
    spread_total: float   # sum over attributes of range + variance + stddev

    def to_dict(self) -> dict:
        return {
            "attributes": [a.to_dict() for a in self.attributes],
            "shape_total": self.shape_total,
            "spread_total": self.spread_total,
        }


def _column_stats(name: str, values: np.ndarray) -> AttributeStats:
    n = values.size
    if n == 0:
        return AttributeStats(name, 0, 0.0, 0.0, 0.0, 0.0, 0.0, True)
    mean = float(np.mean(values))
    centered = values - mean
    m2 = float(np.mean(centered**2))
    spread_range = float(np.max(values) - np.min(values))
    stddev = float(np.sqrt(m2))
    if n < 3 or m2 == 0.0:
        return AttributeStats(name, n, spread_range, m2, stddev, 0.0, 0.0, True)
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    skewness = m3 / m2**1.5
    kurtosis = m4 / m2**2 - 3.0
    return AttributeStats(name, n, spread_range, m2, stddev, skewness, kurtosis, False)


def dist_summary(dataset: Dataset) -> DistributionSummary:
    """Per-attribute statistics over the observed (non-missing) numeric cells."""
    indices = dataset.numeric_indices()
    if not indices:
        raise ApplicabilityError(
            f"dataset {dataset.name!r}: distribution metric needs numeric attributes"
        )
    stats = []
    for i in indices:
        observed = np.array(
            [v for v in dataset.column(i) if v is not None], dtype=float
        )
        stats.append(_column_stats(dataset.attributes[i].name, observed))
    shape_total = float(sum(s.skewness + s.kurtosis for s in stats))
    spread_total = float(sum(s.range + s.variance + s.stddev for s in stats))
    return DistributionSummary(tuple(stats), shape_total, spread_total)


def distribution_diversity(source: Dataset, followup: Dataset) -> tuple[float, dict]:
    """Absolute difference of (shape_total + spread_total) between the sides."""
    summary_s = dist_summary(source)
    summary_f = dist_summary(followup)
    total_s = summary_s.shape_total + summary_s.spread_total
    total_f = summary_f.shape_total + summary_f.spread_total
    raw = abs(total_s - total_f)
    diagnostics = {
        "source": summary_s.to_dict(),
        "followup": summary_f.to_dict(),
        "source_total": total_s,
        "followup_total": total_f,
    }
    return raw, diagnostics
