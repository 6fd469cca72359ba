"""Ward's agglomerative method for weighted k-means, with exact small-instance
oracles, instance generators and clusterability certificates."""

from .core import (
    ClusterSummary,
    Dataset,
    EmptyClusterError,
    WeightedPoint,
    centroid,
    cost_to_center,
    merge_costs,
    merge_delta,
    merge_summaries,
    one_means_cost,
)
from .ward import (
    ENGINES,
    Clustering,
    Dendrogram,
    MergeRecord,
    build_dendrogram,
    extract_clustering,
    is_monotone,
    telescoping_error,
    verify_1d_convexity,
    ward_nn_chain,
    ward_reference,
)
from .oracles import OracleResult, brute_force_opt, cost_of_centers, kmeanspp_seed, opt_1d_dp
from .instances import (
    FiniteMetricInstance,
    LowerBoundParams,
    closed_form_opt,
    closed_form_ratio,
    closed_form_ward,
    gen_lowerbound,
    gen_random,
    gen_separated,
    star_graph_instance,
    star_graph_points,
    triangle_instance,
)
from .certify import SeparationCertificate, certify, certify_eps_separation, predict_ward_quality
from .kmedian import (
    GeometricMedianError,
    MedianMergeTrace,
    geometric_median,
    kmedian_greedy_discrete,
    kmedian_greedy_euclidean,
)

__version__ = "0.1.0"
