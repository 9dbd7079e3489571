"""Outlier-count diversity via kth-nearest-neighbour distance scoring.

Each instance is scored by its Euclidean distance to its kth nearest
neighbour (itself excluded); the round-half-up(contamination * rows)
highest-scoring instances are flagged, ties resolved toward lower row
indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..catalog import round_half_up
from ..dataset import Dataset, NumericView, numeric_view
from ..errors import ApplicabilityError, InvariantError


@dataclass(frozen=True)
class OutlierReport:
    indices: tuple[int, ...]   # flagged rows, ascending
    scores: np.ndarray         # kth-NN distance per row
    k: int
    contamination: float

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "scores": [float(s) for s in self.scores],
            "k": self.k,
            "contamination": self.contamination,
        }


def knn_outliers(view: NumericView, k: int = 5, contamination: float = 0.05) -> OutlierReport:
    if k < 1:
        raise ApplicabilityError(f"k must be >= 1, got {k}")
    if not 0 < contamination < 1:
        raise ApplicabilityError(f"contamination must be in (0, 1), got {contamination}")
    n = view.n_rows
    if n <= k:
        raise ApplicabilityError(f"need more than k={k} rows, got {n}")

    x = view.matrix
    deltas = x[:, None, :] - x[None, :, :]
    distances = np.sqrt((deltas**2).sum(axis=-1))
    np.fill_diagonal(distances, np.inf)
    scores = np.sort(distances, axis=1)[:, k - 1]

    n_flag = min(round_half_up(contamination * n), n - 1)
    order = sorted(range(n), key=lambda i: (-scores[i], i))
    flagged = tuple(sorted(order[:n_flag]))

    if n_flag:
        floor = min(scores[i] for i in flagged)
        if any(scores[i] > floor for i in range(n) if i not in set(flagged)):
            raise InvariantError("an unflagged row outscores a flagged one")

    return OutlierReport(flagged, scores, k, contamination)


def _matched_pairs(
    raw_s: np.ndarray, flagged_s: tuple[int, ...],
    raw_f: np.ndarray, flagged_f: tuple[int, ...],
) -> list[tuple[int, int]]:
    """Greedy one-to-one matching of identical raw feature vectors by index."""
    matches: list[tuple[int, int]] = []
    free = list(flagged_f)
    for i in flagged_s:
        for pos, j in enumerate(free):
            if raw_s[i].shape == raw_f[j].shape and np.array_equal(raw_s[i], raw_f[j]):
                matches.append((i, j))
                del free[pos]
                break
    return matches


def anomaly_diversity(
    source: Dataset,
    followup: Dataset,
    k: int = 5,
    contamination: float = 0.05,
    standardize: bool = True,
) -> tuple[float, dict]:
    """Absolute difference of surviving outlier counts between the sides.

    Outliers whose raw (unstandardized, imputed) feature vectors are exactly
    identical across the two sides are discarded pairwise before counting;
    vectors are aligned by attribute name and never matched when the two
    sides expose different numeric attributes.
    """
    view_s = numeric_view(source, standardize=standardize)
    view_f = numeric_view(followup, standardize=standardize)
    report_s = knn_outliers(view_s, k=k, contamination=contamination)
    report_f = knn_outliers(view_f, k=k, contamination=contamination)

    raw_s = numeric_view(source, standardize=False).matrix
    raw_f = numeric_view(followup, standardize=False).matrix
    if sorted(view_s.feature_names) == sorted(view_f.feature_names):
        order_s = np.argsort(np.array(view_s.feature_names))
        order_f = np.argsort(np.array(view_f.feature_names))
        matches = _matched_pairs(
            raw_s[:, order_s], report_s.indices, raw_f[:, order_f], report_f.indices
        )
    else:
        matches = []

    surviving_s = len(report_s.indices) - len(matches)
    surviving_f = len(report_f.indices) - len(matches)
    raw = float(abs(surviving_s - surviving_f))
    diagnostics = {
        "source": report_s.to_dict(),
        "followup": report_f.to_dict(),
        "identical_pairs": [[int(a), int(b)] for a, b in matches],
        "surviving_source": surviving_s,
        "surviving_followup": surviving_f,
    }
    return raw, diagnostics
