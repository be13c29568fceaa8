//! Minimum spanning trees over well-separated pairs.
//!
//! Three drivers produce the same tree:
//!
//! * [`emst_naive`] materializes the decomposition, computes every closest
//!   pair and runs Kruskal once;
//! * [`gfk`] processes materialized pairs in rounds of growing cardinality
//!   bound `beta`, deferring expensive closest-pair computations and dropping
//!   pairs whose sides are already connected;
//! * [`memogfk`] runs the same rounds but re-traverses the tree each round and
//!   only materializes the pairs whose closest pair falls in the round's
//!   weight window.
//!
//! All edge comparisons use the total order `(weight, min id, max id)`.

mod bccp;
mod gfk;
mod memo;
mod union_find;

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use bccp::{bccp, bccp_star, closest_pair, Metric};
pub use gfk::{fill_bccp, gfk, gfk_with};
pub use memo::{get_pairs, get_rho, memogfk, memogfk_with};
pub use union_find::UnionFind;

use crate::error::Result;
use crate::geom::{KdTree, NodeId};
use crate::scalar::Scalar;
use crate::wspd::{require_mutual_reachability, wspd, SeparationPredicate};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<T> {
    /// Smaller endpoint id.
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

impl<T: Scalar> Edge<T> {
    pub fn new(a: usize, b: usize, weight: T) -> Self {
        Self {
            u: a.min(b),
            v: a.max(b),
            weight,
        }
    }

    /// Compares by `(weight, u, v)`.
    pub fn key_cmp(&self, other: &Self) -> Ordering {
        self.weight
            .cmp_total(&other.weight)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }

    pub fn key_lt(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Less
    }
}

/// Accepted edges in acceptance order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanningForest<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    total_weight: T,
}

impl<T: Scalar> SpanningForest<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: Vec::with_capacity(n.saturating_sub(1)),
            total_weight: T::zero(),
        }
    }

    /// Wraps an externally produced edge list (e.g. read back from disk).
    pub fn from_edges(n: usize, edges: Vec<Edge<T>>) -> Self {
        let total_weight = edges.iter().fold(T::zero(), |acc, e| acc + e.weight);
        Self {
            n,
            edges,
            total_weight,
        }
    }

    pub fn push(&mut self, edge: Edge<T>) {
        self.total_weight = self.total_weight + edge.weight;
        self.edges.push(edge);
    }

    pub fn num_points(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() + 1 >= self.n
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn total_weight(&self) -> T {
        self.total_weight
    }

    /// Edges sorted by `(weight, u, v)`.
    pub fn sorted_edges(&self) -> Vec<Edge<T>> {
        let mut e = self.edges.clone();
        e.sort_unstable_by(Edge::key_cmp);
        e
    }
}

/// Sorts a batch by `(weight, u, v)` and accepts every edge that joins two
/// components. Returns the number of accepted edges.
pub fn kruskal_batch<T: Scalar>(
    edges: &mut [Edge<T>],
    uf: &mut UnionFind,
    out: &mut SpanningForest<T>,
) -> usize {
    edges.par_sort_unstable_by(Edge::key_cmp);
    let mut accepted = 0;
    for e in edges.iter() {
        if uf.union(e.u, e.v) {
            out.push(*e);
            accepted += 1;
        }
    }
    accepted
}

/// How the cardinality bound grows between rounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BetaSchedule {
    #[default]
    Doubling,
    /// One at a time; only useful for cross-checking.
    Increment,
}

impl BetaSchedule {
    fn next(self, beta: usize) -> usize {
        match self {
            BetaSchedule::Doubling => beta * 2,
            BetaSchedule::Increment => beta + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MstOptions {
    pub beta_schedule: BetaSchedule,
}

/// Counters and phase timings collected by the drivers.
#[derive(Clone, Debug, Default)]
pub struct MstStats {
    pub rounds: usize,
    /// Size of the full decomposition, when it was materialized.
    pub wspd_pairs: usize,
    /// Largest number of pairs held at once.
    pub peak_materialized: usize,
    pub bccp_evaluations: usize,
    /// Pairs dropped because both sides were already connected.
    pub filtered_pairs: usize,
    /// Subset of `filtered_pairs` whose closest pair was never computed.
    pub filtered_without_bccp: usize,
    pub traversal_time: Duration,
    pub bccp_time: Duration,
    pub kruskal_time: Duration,
}

#[derive(Clone, Debug)]
pub struct MstRun<T> {
    pub forest: SpanningForest<T>,
    pub stats: MstStats,
}

/// EMST by materializing the whole decomposition and every closest pair.
pub fn emst_naive<T: Scalar>(tree: &KdTree<T>) -> Result<MstRun<T>> {
    mst_naive(tree, &SeparationPredicate::standard(), &Metric::Euclidean)
}

/// MST under `metric` from the full decomposition under `pred`, with the
/// closest pair of every pair computed up front.
pub fn mst_naive<T: Scalar>(
    tree: &KdTree<T>,
    pred: &SeparationPredicate<'_, T>,
    metric: &Metric<'_, T>,
) -> Result<MstRun<T>> {
    require_mutual_reachability(pred, metric.is_mutual_reachability())?;
    if let Metric::MutualReachability(core) = metric {
        core.check(tree)?;
    }
    let mut stats = MstStats::default();
    let t = Instant::now();
    let mut pairs = wspd(tree, pred)?.pairs;
    stats.traversal_time = t.elapsed();
    stats.wspd_pairs = pairs.len();
    stats.peak_materialized = pairs.len();

    let t = Instant::now();
    stats.bccp_evaluations = fill_bccp(tree, &mut pairs, metric);
    stats.bccp_time = t.elapsed();

    let t = Instant::now();
    let mut edges: Vec<Edge<T>> = pairs.iter().map(|p| p.cached_edge.unwrap()).collect();
    drop(pairs);
    let mut uf = UnionFind::new(tree.len());
    let mut forest = SpanningForest::new(tree.len());
    kruskal_batch(&mut edges, &mut uf, &mut forest);
    stats.kruskal_time = t.elapsed();
    stats.rounds = 1;
    Ok(MstRun { forest, stats })
}

const MIXED: usize = usize::MAX;

/// Per-node component id: the union-find root shared by every point in the
/// node, or none if the node spans several components.
#[derive(Clone, Debug)]
pub struct Connectivity {
    node_comp: Vec<usize>,
}

impl Connectivity {
    pub fn new<T: Scalar>(tree: &KdTree<T>, uf: &UnionFind) -> Self {
        let node_comp = tree.fold_up(
            |node| {
                let first = uf.find_readonly(tree.id_at(node.start));
                let same =
                    (node.start + 1..node.end).all(|p| uf.find_readonly(tree.id_at(p)) == first);
                if same {
                    first
                } else {
                    MIXED
                }
            },
            |a, b| if a == b { a } else { MIXED },
        );
        Self { node_comp }
    }

    pub fn component(&self, node: NodeId) -> Option<usize> {
        let c = self.node_comp[node];
        (c != MIXED).then_some(c)
    }

    /// True when every point of `a` and `b` lies in one component.
    pub fn connected(&self, a: NodeId, b: NodeId) -> bool {
        let c = self.node_comp[a];
        c != MIXED && c == self.node_comp[b]
    }
}

/// Concurrent minimum over non-negative values.
pub(crate) struct AtomicMin(AtomicU64);

impl AtomicMin {
    pub(crate) fn new<T: Scalar>(init: T) -> Self {
        Self(AtomicU64::new(init.as_f64().max(0.0).to_bits()))
    }

    pub(crate) fn get<T: Scalar>(&self) -> T {
        T::from_f64_lossy(f64::from_bits(self.0.load(AtomicOrdering::Relaxed)))
    }

    /// Non-negative IEEE doubles order like their bit patterns.
    pub(crate) fn write_min<T: Scalar>(&self, value: T) {
        self.0
            .fetch_min(value.as_f64().max(0.0).to_bits(), AtomicOrdering::Relaxed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Points;

    #[test]
    fn edge_normalizes_and_orders() {
        let e = Edge::new(5, 2, 1.0);
        assert_eq!((e.u, e.v), (2, 5));
        assert!(Edge::new(0, 9, 1.0).key_lt(&Edge::new(1, 2, 1.0)));
        assert!(Edge::new(3, 4, 0.5).key_lt(&Edge::new(0, 1, 1.0)));
    }

    #[test]
    fn kruskal_batch_examples() {
        let mut uf = UnionFind::new(3);
        let mut out = SpanningForest::new(3);
        let mut batch = vec![Edge::new(0, 1, 2.0), Edge::new(1, 0, 1.0)];
        assert_eq!(kruskal_batch(&mut batch, &mut uf, &mut out), 1);
        assert_eq!(out.edges(), &[Edge::new(0, 1, 1.0)]);
        let mut batch = vec![Edge::new(1, 2, 4.0)];
        assert_eq!(kruskal_batch(&mut batch, &mut uf, &mut out), 1);
        assert!(out.is_complete());
        assert_eq!(out.total_weight(), 5.0);
    }

    #[test]
    fn naive_small_cases() {
        let two = KdTree::build(&Points::new(2, vec![0.0, 0.0, 3.0, 4.0]).unwrap(), 1).unwrap();
        let run = emst_naive(&two).unwrap();
        assert_eq!(run.forest.edges(), &[Edge::new(0, 1, 5.0)]);

        let tri = KdTree::build(
            &Points::new(2, vec![0.0, 0.0, 3.0, 0.0, 3.0, 4.0]).unwrap(),
            1,
        )
        .unwrap();
        let run = emst_naive(&tri).unwrap();
        assert_eq!(run.forest.total_weight(), 7.0);
        assert_eq!(run.forest.len(), 2);

        let one = KdTree::build(&Points::new(2, vec![1.0, 1.0]).unwrap(), 1).unwrap();
        assert!(emst_naive(&one).unwrap().forest.is_empty());
    }

    #[test]
    fn atomic_min() {
        let m = AtomicMin::new(f64::INFINITY);
        m.write_min(3.5);
        m.write_min(7.0);
        m.write_min(0.25f64);
        assert_eq!(m.get::<f64>(), 0.25);
        let z = AtomicMin::new(f32::INFINITY);
        z.write_min(0.0f32);
        assert_eq!(z.get::<f32>(), 0.0);
    }
}
