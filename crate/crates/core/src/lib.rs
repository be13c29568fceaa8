//! Parallel Euclidean minimum spanning trees and HDBSCAN* hierarchies built
//! on well-separated pair decompositions.
//!
//! The algorithms are generic over the coordinate type ([`Scalar`], i.e. `f32`
//! or `f64`); the `*64` aliases below fix it to `f64`.

pub mod dendrogram;
pub mod error;
pub mod geom;
pub mod hdbscan;
pub mod io;
pub mod mst;
pub mod scalar;
pub mod wspd;

pub use dendrogram::{
    cut, cut_with, dendrogram_parallel, dendrogram_sequential, reachability_plot,
    single_linkage_cut, vertex_distances, Clustering, Dendrogram, OrderedDendrogram,
    ReachabilityPlot, NOISE,
};
pub use error::{Error, Result};
pub use geom::{knn, node_distance, KdNode, KdTree, KnnResult, NodeId, Points};
pub use hdbscan::{core_distances, hdbscan_mst, hdbscan_mst_gantao, CoreDistances};
pub use io::Dataset;
pub use mst::{
    bccp, bccp_star, emst_naive, gfk, kruskal_batch, memogfk, mst_naive, BetaSchedule, Edge,
    Metric, MstOptions, MstRun, MstStats, SpanningForest, UnionFind,
};
pub use scalar::Scalar;
pub use wspd::{wspd, wspd_count, SeparationMode, SeparationPredicate, Wspd, WspdPair};

pub type Points64 = Points<f64>;
pub type KdTree64 = KdTree<f64>;
pub type Edge64 = Edge<f64>;
pub type SpanningForest64 = SpanningForest<f64>;
pub type CoreDistances64 = CoreDistances<f64>;
