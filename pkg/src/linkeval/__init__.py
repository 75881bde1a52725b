"""linkeval: evaluate entity-resolution systems from cluster samples.

The toolkit compares a predicted clustering against a probability sample of
fully resolved ground-truth clusters: it computes cluster-wise error
metrics, estimates global performance metrics (pairwise, cluster, b-cubed,
homogeneity) with uncertainty via bias-adjusted ratio estimators, monitors
summary statistics, validates the estimators in Monte-Carlo studies, and
drives a human labeling/audit workflow through a CLI, HTTP service, and
companion UI.
"""

__version__ = "0.1.0"

from .error_metrics import (
    ClusterErrors,
    ErrorTable,
    RecordErrors,
    cluster_errors,
    error_table,
    record_errors,
)
from .estimators import (
    Estimate,
    EstimationError,
    OracleMetrics,
    RatioTarget,
    bcubed_precision,
    bcubed_recall,
    census_ratio,
    cluster_f,
    cluster_precision,
    cluster_recall,
    homogeneity,
    oracle_metrics,
    pairwise_f,
    pairwise_precision,
    pairwise_recall,
    ratio_estimate,
    subgroup_estimate,
)
from .labeling import (
    AuditTag,
    BenchmarkSet,
    Journal,
    LabelingSession,
    audit_frequencies,
    create_session,
    export_benchmark,
    load_session,
    qc_check,
    record_audit_tag,
)
from .model import AttributeTable, Clustering, name_index
from .sampling import (
    ClusterDraw,
    ClusterSample,
    census_sample,
    expected_error_weights,
    sample_pps,
    sample_uniform,
)
from .search import TokenIndex, search_records
from .simulate import (
    SimReport,
    all_but_one_match,
    generate_rldata_like,
    perturb_clustering,
    run_simulation,
)
from .summary import (
    SummaryReport,
    avg_cluster_size,
    compute_summary,
    estimate_summary,
    hill_number,
    homonymy_rate,
    matching_rate,
    name_variation_rate,
)

__all__ = [
    "AttributeTable",
    "AuditTag",
    "BenchmarkSet",
    "ClusterDraw",
    "ClusterErrors",
    "ClusterSample",
    "Clustering",
    "Estimate",
    "EstimationError",
    "ErrorTable",
    "Journal",
    "LabelingSession",
    "OracleMetrics",
    "RatioTarget",
    "RecordErrors",
    "SimReport",
    "SummaryReport",
    "all_but_one_match",
    "audit_frequencies",
    "avg_cluster_size",
    "bcubed_precision",
    "bcubed_recall",
    "census_ratio",
    "census_sample",
    "cluster_errors",
    "cluster_f",
    "cluster_precision",
    "cluster_recall",
    "compute_summary",
    "create_session",
    "error_table",
    "estimate_summary",
    "expected_error_weights",
    "export_benchmark",
    "generate_rldata_like",
    "hill_number",
    "homogeneity",
    "homonymy_rate",
    "load_session",
    "matching_rate",
    "name_index",
    "name_variation_rate",
    "oracle_metrics",
    "pairwise_f",
    "pairwise_precision",
    "pairwise_recall",
    "perturb_clustering",
    "qc_check",
    "ratio_estimate",
    "record_audit_tag",
    "record_errors",
    "run_simulation",
    "sample_pps",
    "sample_uniform",
    "search_records",
    "subgroup_estimate",
    "TokenIndex",
]
