"""mrprior: prioritize metamorphic relations by source/follow-up data diversity."""

__version__ = "0.1.0"

from .catalog import MrPair, MrSpec, apply_mr, build_pairs, load_catalog, pair_from_files
from .dataset import (
    Attribute,
    Dataset,
    NumericView,
    load_arff,
    load_csv,
    numeric_view,
    save_arff,
    save_csv,
)
from .errors import ApplicabilityError, InputError, InvariantError, MrPriorError
from .evaluation import (
    CoverageMatrix,
    EvalReport,
    FaultDetectionCurve,
    KillMatrix,
    apfd,
    avg_time_to_fault,
    coverage_greedy,
    detection_curve,
    effective_set_size,
    evaluate_ordering,
    first_kill_positions,
    load_coverage_matrix,
    load_kill_matrix,
    permutation_test,
    random_baseline,
    relative_improvement,
    save_kill_matrix,
    synth_kill_matrix,
)
from .metrics import (
    METRICS,
    DiversityScore,
    MetricParams,
    anomaly_diversity,
    clustering_diversity,
    cn2_induce,
    dist_summary,
    distribution_diversity,
    kmeans_summary,
    knn_outliers,
    rule_diversity,
    score_catalog,
    score_pair,
)
from .prioritizer import RankEntry, Ranking, normalize, rank, top_n

__all__ = [
    "__version__",
    "Attribute",
    "Dataset",
    "NumericView",
    "load_csv",
    "save_csv",
    "load_arff",
    "save_arff",
    "numeric_view",
    "MrSpec",
    "MrPair",
    "load_catalog",
    "apply_mr",
    "build_pairs",
    "pair_from_files",
    "METRICS",
    "MetricParams",
    "DiversityScore",
    "score_pair",
    "score_catalog",
    "cn2_induce",
    "rule_diversity",
    "knn_outliers",
    "anomaly_diversity",
    "kmeans_summary",
    "clustering_diversity",
    "dist_summary",
    "distribution_diversity",
    "normalize",
    "rank",
    "top_n",
    "Ranking",
    "RankEntry",
    "KillMatrix",
    "CoverageMatrix",
    "FaultDetectionCurve",
    "EvalReport",
    "load_kill_matrix",
    "load_coverage_matrix",
    "save_kill_matrix",
    "synth_kill_matrix",
    "detection_curve",
    "first_kill_positions",
    "apfd",
    "avg_time_to_fault",
    "effective_set_size",
    "evaluate_ordering",
    "random_baseline",
    "coverage_greedy",
    "permutation_test",
    "relative_improvement",
    "MrPriorError",
    "InputError",
    "ApplicabilityError",
    "InvariantError",
]
