"""Near neighbor indexes over distance oracles: ring trees and composed pipelines."""
from .oracle import (
    DistanceOracle,
    IndexReport,
    exact_scan,
    linf_distance,
    max_product_distance,
    norm_distance,
    sum_product_distance,
)
from .pipelines import (
    MaxProductIndex,
    OrliczPipeline,
    SumProductIndex,
    SymNormIndex,
    TreeOptions,
    build_general_pipeline,
    build_max_product_index,
    build_orlicz_pipeline,
    build_sum_product_index,
    build_symnorm_index,
    build_topk_pipeline,
    embedded_distance,
    max_row_dual,
)
from .ringtree import (
    ClusterLeaf,
    Leaf,
    Ring,
    RingTree,
    TreeDepthExceeded,
    build_ring_tree,
    node_ids,
    query_ring_tree,
    route_child,
)
