use std::time::Instant;

use rayon::prelude::*;

use super::{
    kruskal_batch, Connectivity, Edge, Metric, MstOptions, MstRun, MstStats, SpanningForest,
    UnionFind,
};
use crate::error::{Error, Result};
use crate::geom::KdTree;
use crate::scalar::Scalar;
use crate::wspd::{SeparationMode, Wspd, WspdPair};

/// Computes the closest pair of every pair that has none cached yet.
/// Returns the number of closest pairs computed.
pub fn fill_bccp<T: Scalar>(
    tree: &KdTree<T>,
    pairs: &mut [WspdPair<T>],
    metric: &Metric<'_, T>,
) -> usize {
    pairs
        .par_iter_mut()
        .filter(|p| p.cached_edge.is_none())
        .map(|p| {
            p.cached_edge = Some(super::closest_pair(tree, p.a, p.b, metric));
            1
        })
        .sum()
}

/// GeoFilterKruskal over a materialized decomposition of `tree`.
pub fn gfk<T: Scalar>(
    tree: &KdTree<T>,
    wspd: Wspd<T>,
    metric: &Metric<'_, T>,
) -> Result<MstRun<T>> {
    gfk_with(tree, wspd, metric, MstOptions::default())
}

pub fn gfk_with<T: Scalar>(
    tree: &KdTree<T>,
    wspd: Wspd<T>,
    metric: &Metric<'_, T>,
    opts: MstOptions,
) -> Result<MstRun<T>> {
    match metric {
        Metric::Euclidean if wspd.mode == SeparationMode::Hdbscan => {
            return Err(Error::MetricMismatch)
        }
        Metric::MutualReachability(core) => core.check(tree)?,
        Metric::Euclidean => {}
    }
    let n = tree.len();
    let mut stats = MstStats {
        wspd_pairs: wspd.len(),
        peak_materialized: wspd.len(),
        ..MstStats::default()
    };
    let mut pairs = wspd.pairs;
    let mut uf = UnionFind::new(n);
    let mut forest = SpanningForest::new(n);
    let mut beta = 2;

    while !forest.is_complete() {
        if pairs.is_empty() {
            return Err(Error::Disconnected);
        }
        stats.rounds += 1;

        let t = Instant::now();
        let (mut small, large): (Vec<_>, Vec<_>) = pairs
            .into_par_iter()
            .partition(|p| p.cardinality(tree) <= beta);
        let rho_hi = large
            .par_iter()
            .map(|p| metric.lower_bound(tree, p.a, p.b))
            .reduce(T::infinity, T::min);
        stats.traversal_time += t.elapsed();

        let t = Instant::now();
        stats.bccp_evaluations += fill_bccp(tree, &mut small, metric);
        stats.bccp_time += t.elapsed();

        let t = Instant::now();
        let (below, above): (Vec<_>, Vec<_>) = small
            .into_par_iter()
            .partition(|p| p.cached_edge.unwrap().weight < rho_hi);
        let mut edges: Vec<Edge<T>> = below.iter().map(|p| p.cached_edge.unwrap()).collect();
        kruskal_batch(&mut edges, &mut uf, &mut forest);
        uf.flatten();
        let conn = Connectivity::new(tree, &uf);
        stats.kruskal_time += t.elapsed();

        let before = above.len() + large.len();
        let unevaluated = large.len();
        let above: Vec<_> = above
            .into_par_iter()
            .filter(|p| !conn.connected(p.a, p.b))
            .collect();
        let large: Vec<_> = large
            .into_par_iter()
            .filter(|p| !conn.connected(p.a, p.b))
            .collect();
        stats.filtered_without_bccp += unevaluated - large.len();
        stats.filtered_pairs += before - above.len() - large.len();
        pairs = above;
        pairs.extend(large);
        beta = opts.beta_schedule.next(beta);
    }
    Ok(MstRun { forest, stats })
}
