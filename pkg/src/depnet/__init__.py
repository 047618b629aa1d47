"""Robustness analysis of package dependency networks."""
from .centrality import PageRankConfig, RankedList, Strategy, pagerank, rank_nodes
from .community import (
    CommunityPartition,
    IntersectionReport,
    UndirectedGraph,
    intersection_report,
    k_step_neighborhood,
    louvain,
    modularity,
    to_undirected,
    top_package_study,
)
from .errors import DepnetError, EmptyInputError, GraphBuildError, NodeRangeError, ParameterError
from .evolution import (
    EvolutionRow,
    avg_dependence_on_top_k,
    avg_out_degree,
    avg_out_degree_top_k,
    evolution_report,
)
from .generators import GeneratorConfig, gnm_random, preferential_attachment
from .graph import (
    ComponentLabeling,
    DependencyGraph,
    build_graph,
    dependents,
    largest_weakly_connected_subgraph,
    read_edge_list,
    remove_nodes,
    reverse_reachable_set,
    weakly_connected_components,
    write_edge_list,
)
from .registry import (
    PackageRecord,
    SnapshotSpec,
    VersionEntry,
    latest_edges,
    parse_registry_dump,
    read_cache,
    snapshot_edges,
    write_cache,
)
from .robustness import (
    ConnectivityTrace,
    RemovalTrace,
    cascade_attack,
    compare_to_random_baseline,
    connectivity_attack,
)

__version__ = "0.1.0"
