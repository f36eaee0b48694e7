"""balancekit: structural balance and coalition analysis for signed networks.

Core surface: signed graphs with exact frustration-index computation
(branch-and-bound closed by LP/packing lower bounds and local-search upper
bounds), triangle-based partial-balance measures, bipartite backbone
inference under a degree-conditioned null model, and the coalition /
effectiveness statistics built on top of the optimal bipartitions.
"""

__version__ = "0.1.0"

from .backbone import (
    BipartiteGraph,
    NullModel,
    ProjectionDistribution,
    extract_signed_backbone,
    fit_cell_probabilities,
    sample_null_projection,
)
from .graph import (
    GraphFormatError,
    NodeAttributes,
    Partition,
    SignedGraph,
    TriangleSet,
    enumerate_triangles,
    from_edge_list,
    frustration_count,
    frustration_state,
    is_balanced,
    switch,
)
from .metrics import (
    BalanceReport,
    TriangleFreeError,
    balance_report,
    normalized_frustration,
    triangle_index,
)
from .solver import (
    BoundConfig,
    BoundState,
    SolveConfig,
    SolveResult,
    brute_force_oracle,
    compute_bounds,
    local_search_improve,
    lp_lower_bound,
    solve_exact,
    triangle_packing_bound,
    warm_start_partition,
)
from .stats import (
    PathModel,
    SessionRecord,
    coalition_partisanship,
    mediation_model,
    ols_standardized,
    party_control,
    pearson_r,
)

__all__ = [
    "__version__",
    "BipartiteGraph",
    "NullModel",
    "ProjectionDistribution",
    "extract_signed_backbone",
    "fit_cell_probabilities",
    "sample_null_projection",
    "GraphFormatError",
    "NodeAttributes",
    "Partition",
    "SignedGraph",
    "TriangleSet",
    "enumerate_triangles",
    "from_edge_list",
    "frustration_count",
    "frustration_state",
    "is_balanced",
    "switch",
    "BalanceReport",
    "TriangleFreeError",
    "balance_report",
    "normalized_frustration",
    "triangle_index",
    "BoundConfig",
    "BoundState",
    "SolveConfig",
    "SolveResult",
    "brute_force_oracle",
    "compute_bounds",
    "local_search_improve",
    "lp_lower_bound",
    "solve_exact",
    "triangle_packing_bound",
    "warm_start_partition",
    "PathModel",
    "SessionRecord",
    "coalition_partisanship",
    "mediation_model",
    "ols_standardized",
    "party_control",
    "pearson_r",
]
