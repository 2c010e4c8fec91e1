//! Follow-graph community mapping: graph construction, k-core pruning,
//! shared-following clustering, cluster metrics, layout and rendering.

mod cluster;
mod graph;
mod kcore;
mod layout;
mod metrics;
mod snapshot;
mod svg;

pub use cluster::{
    agglomerative_cluster, follow_similarity, ClusterAssignment, ClusterLabel, ClusterTarget, Merge,
};
pub use graph::{build_follow_graph, follows_csv, read_follows, FollowGraph};
pub use kcore::{kcore_numbers, prune_kcore, CoreNumbers};
pub use layout::{fr_layout, ForceLayout, Point};
pub use metrics::{cluster_share, density_ratio, ei_index, format_share};
pub use snapshot::{
    build_snapshot, clusters_json, read_labels, LabelMap, MapParams, MapSnapshot, Month,
};
pub use svg::render_map_svg;
