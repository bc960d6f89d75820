"""Multi-way spectral graph partitioning.

Bottom eigenvectors of the normalized Laplacian are turned into k disjoint
low-expansion vertex sets via radial-projection metrics, random geometric
partitions, smooth localization and Cheeger sweeps.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ComputationError,
    PipelineFailure,
    SpectralKwayError,
    ValidationError,
)
from .graph import (  # noqa: E402
    WeightedGraph,
    build_graph,
    cut_weight,
    expansion,
    graph_from_arrays,
    k_way_expansion_exact,
)
from .pipeline import (  # noqa: E402
    PipelineConfig,
    PipelineReport,
    disjoint_support_functions,
    disjoint_support_functions_reduced,
    k_sparse_cuts,
    k_way_partition,
)
from .spectral import SpectralEmbedding, eigenbasis  # noqa: E402

__all__ = [
    "ComputationError",
    "PipelineConfig",
    "PipelineFailure",
    "PipelineReport",
    "SpectralEmbedding",
    "SpectralKwayError",
    "ValidationError",
    "WeightedGraph",
    "build_graph",
    "cut_weight",
    "disjoint_support_functions",
    "disjoint_support_functions_reduced",
    "eigenbasis",
    "expansion",
    "graph_from_arrays",
    "k_sparse_cuts",
    "k_way_expansion_exact",
    "k_way_partition",
]
