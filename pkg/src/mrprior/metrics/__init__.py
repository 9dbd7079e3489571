"""Data-diversity metrics over source/follow-up dataset pairs.

Four metrics, each reducing a pair to a non-negative raw score:

* ``rule``          absolute difference of CN2 rule counts (shared rules dropped)
* ``anomaly``       absolute difference of kth-NN outlier counts (identical
                    outlier vectors discarded pairwise)
* ``clustering``    absolute difference of k-means shape totals
* ``distribution``  absolute difference of moment/spread totals
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..catalog import MrPair
from ..errors import ApplicabilityError
from .anomaly import OutlierReport, anomaly_diversity, knn_outliers
from .clustering import ClusterSummary, clustering_diversity, kmeans_summary
from .distribution import (
    AttributeStats,
    DistributionSummary,
    dist_summary,
    distribution_diversity,
)
from .rules import Cn2Params, Condition, Rule, RuleSet, cn2_induce, rule_diversity

METRICS = ("rule", "anomaly", "clustering", "distribution")


@dataclass(frozen=True)
class MetricParams:
    """Knobs for all four metrics; defaults follow the shipped configuration."""

    beam_width: int = 5
    min_covered: int = 2
    max_conditions: int = 3
    bins: int = 4
    knn_k: int = 5
    contamination: float = 0.05
    kmeans_k: int = 3
    kmeans_max_iters: int = 100
    seed: int = 0
    standardize: bool = True

    def cn2(self) -> Cn2Params:
        return Cn2Params(
            beam_width=self.beam_width,
            min_covered=self.min_covered,
            max_conditions=self.max_conditions,
            bins=self.bins,
        )


@dataclass(frozen=True)
class DiversityScore:
    mr_id: str
    metric: str
    raw: float
    normalized: float | None = None
    catalog_index: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "mr_id": self.mr_id,
            "metric": self.metric,
            "raw": self.raw,
            "normalized": self.normalized,
        }


def score_pair(pair: MrPair, metric: str, params: MetricParams | None = None) -> DiversityScore:
    params = params or MetricParams()
    if metric == "rule":
        raw, diagnostics = rule_diversity(pair.source, pair.followup, params.cn2())
    elif metric == "anomaly":
        raw, diagnostics = anomaly_diversity(
            pair.source,
            pair.followup,
            k=params.knn_k,
            contamination=params.contamination,
            standardize=params.standardize,
        )
    elif metric == "clustering":
        raw, diagnostics = clustering_diversity(
            pair.source,
            pair.followup,
            k=params.kmeans_k,
            seed=params.seed,
            max_iters=params.kmeans_max_iters,
            standardize=params.standardize,
        )
    elif metric == "distribution":
        raw, diagnostics = distribution_diversity(pair.source, pair.followup)
    else:
        raise ApplicabilityError(f"unknown metric {metric!r}; choose one of {METRICS}")
    return DiversityScore(pair.mr.id, metric, raw, diagnostics=diagnostics)


def score_catalog(
    pairs: list[MrPair], metric: str, params: MetricParams | None = None
) -> list[DiversityScore]:
    """Score every pair, in catalog order; all-or-nothing on failures."""
    if not pairs:
        raise ApplicabilityError("no MR pairs to score")
    scores: list[DiversityScore] = []
    failures: list[str] = []
    for index, pair in enumerate(pairs):
        try:
            score = score_pair(pair, metric, params)
        except ApplicabilityError as exc:
            failures.append(f"{pair.mr.id}: {exc}")
            continue
        scores.append(replace(score, catalog_index=index))
    if failures:
        raise ApplicabilityError(
            f"metric {metric!r} not applicable to every MR:\n  " + "\n  ".join(failures)
        )
    return scores


__all__ = [
    "METRICS",
    "MetricParams",
    "DiversityScore",
    "score_pair",
    "score_catalog",
    "Cn2Params",
    "Condition",
    "Rule",
    "RuleSet",
    "cn2_induce",
    "rule_diversity",
    "OutlierReport",
    "knn_outliers",
    "anomaly_diversity",
    "ClusterSummary",
    "kmeans_summary",
    "clustering_diversity",
    "AttributeStats",
    "DistributionSummary",
    "dist_summary",
    "distribution_diversity",
]
