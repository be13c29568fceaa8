use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use super::{
    closest_pair, kruskal_batch, AtomicMin, Connectivity, Edge, Metric, MstOptions, MstRun,
    MstStats,
};
use super::{SpanningForest, UnionFind};
use crate::error::{Error, Result};
use crate::geom::{KdTree, NodeId};
use crate::scalar::Scalar;
use crate::wspd::{
    require_mutual_reachability, traverse, Nothing, PairVisitor, SeparationPredicate, WspdPair,
};

/// MemoGFK: GeoFilterKruskal that re-traverses the tree every round instead
/// of keeping the decomposition in memory.
pub fn memogfk<T: Scalar>(
    tree: &KdTree<T>,
    pred: &SeparationPredicate<'_, T>,
    metric: &Metric<'_, T>,
) -> Result<MstRun<T>> {
    memogfk_with(tree, pred, metric, MstOptions::default())
}

pub fn memogfk_with<T: Scalar>(
    tree: &KdTree<T>,
    pred: &SeparationPredicate<'_, T>,
    metric: &Metric<'_, T>,
    opts: MstOptions,
) -> Result<MstRun<T>> {
    validate(tree, pred, metric)?;
    let n = tree.len();
    let mut stats = MstStats::default();
    let mut uf = UnionFind::new(n);
    let mut forest = SpanningForest::new(n);
    let mut beta = 2;
    let mut rho_lo = T::zero();
    let bccp_calls = AtomicUsize::new(0);

    while !forest.is_complete() {
        stats.rounds += 1;
        let t = Instant::now();
        uf.flatten();
        let conn = Connectivity::new(tree, &uf);
        let rho_hi = rho(tree, pred, metric, beta, &conn).max(rho_lo);
        let pairs = pairs(tree, pred, metric, beta, rho_lo, rho_hi, &conn, &bccp_calls);
        stats.traversal_time += t.elapsed();
        stats.peak_materialized = stats.peak_materialized.max(pairs.len());

        let t = Instant::now();
        let mut edges: Vec<Edge<T>> = pairs.iter().map(|p| p.cached_edge.unwrap()).collect();
        drop(pairs);
        kruskal_batch(&mut edges, &mut uf, &mut forest);
        stats.kruskal_time += t.elapsed();

        if rho_hi == T::infinity() && !forest.is_complete() {
            return Err(Error::Disconnected);
        }
        rho_lo = rho_hi;
        beta = opts.beta_schedule.next(beta);
    }
    stats.bccp_evaluations = bccp_calls.into_inner();
    Ok(MstRun { forest, stats })
}

/// Lower bound on the weight of every not-yet-connected pair of cardinality
/// greater than `beta`; `+inf` if there is none.
pub fn get_rho<T: Scalar>(
    tree: &KdTree<T>,
    pred: &SeparationPredicate<'_, T>,
    metric: &Metric<'_, T>,
    beta: usize,
    uf: &UnionFind,
) -> Result<T> {
    validate(tree, pred, metric)?;
    Ok(rho(tree, pred, metric, beta, &Connectivity::new(tree, uf)))
}

/// Decomposition pairs that are not yet connected, have cardinality at most
/// `beta` and closest-pair weight in `[rho_lo, rho_hi)`, with that closest
/// pair cached. Sorted by `(a, b)`.
pub fn get_pairs<T: Scalar>(
    tree: &KdTree<T>,
    pred: &SeparationPredicate<'_, T>,
    metric: &Metric<'_, T>,
    beta: usize,
    rho_lo: T,
    rho_hi: T,
    uf: &UnionFind,
) -> Result<Vec<WspdPair<T>>> {
    validate(tree, pred, metric)?;
    if rho_lo.is_nan() || rho_hi.is_nan() || rho_lo > rho_hi {
        return Err(Error::InvalidWindow {
            lo: rho_lo.as_f64(),
            hi: rho_hi.as_f64(),
        });
    }
    let calls = AtomicUsize::new(0);
    Ok(pairs(
        tree,
        pred,
        metric,
        beta,
        rho_lo,
        rho_hi,
        &Connectivity::new(tree, uf),
        &calls,
    ))
}

fn validate<T: Scalar>(
    tree: &KdTree<T>,
    pred: &SeparationPredicate<'_, T>,
    metric: &Metric<'_, T>,
) -> Result<()> {
    pred.check(tree)?;
    require_mutual_reachability(pred, metric.is_mutual_reachability())?;
    if let Metric::MutualReachability(core) = metric {
        core.check(tree)?;
    }
    Ok(())
}

fn rho<T: Scalar>(
    tree: &KdTree<T>,
    pred: &SeparationPredicate<'_, T>,
    metric: &Metric<'_, T>,
    beta: usize,
    conn: &Connectivity,
) -> T {
    let best = AtomicMin::new(T::infinity());
    traverse(
        tree,
        &Rho {
            pred,
            metric,
            beta,
            conn,
            best: &best,
        },
    );
    best.get()
}

#[allow(clippy::too_many_arguments)]
fn pairs<T: Scalar>(
    tree: &KdTree<T>,
    pred: &SeparationPredicate<'_, T>,
    metric: &Metric<'_, T>,
    beta: usize,
    lo: T,
    hi: T,
    conn: &Connectivity,
    calls: &AtomicUsize,
) -> Vec<WspdPair<T>> {
    let mut out = traverse(
        tree,
        &Pairs {
            pred,
            metric,
            beta,
            lo,
            hi,
            conn,
            calls,
        },
    );
    out.sort_unstable_by_key(|p| (p.a, p.b));
    out
}

struct Rho<'v, 'a, T> {
    pred: &'v SeparationPredicate<'a, T>,
    metric: &'v Metric<'a, T>,
    beta: usize,
    conn: &'v Connectivity,
    best: &'v AtomicMin,
}

impl<T: Scalar> PairVisitor<T> for Rho<'_, '_, T> {
    type Out = Nothing;

    fn enter(&self, tree: &KdTree<T>, node: NodeId) -> bool {
        tree.node(node).len() > self.beta && self.conn.component(node).is_none()
    }

    fn visit(&self, tree: &KdTree<T>, a: NodeId, b: NodeId, _out: &mut Nothing) -> bool {
        if tree.node(a).len() + tree.node(b).len() <= self.beta || self.conn.connected(a, b) {
            return false;
        }
        let lb = self.metric.lower_bound(tree, a, b);
        if lb >= self.best.get() {
            return false;
        }
        if self.pred.accepts(tree, a, b) {
            self.best.write_min(lb);
            return false;
        }
        true
    }
}

struct Pairs<'v, 'a, T> {
    pred: &'v SeparationPredicate<'a, T>,
    metric: &'v Metric<'a, T>,
    beta: usize,
    lo: T,
    hi: T,
    conn: &'v Connectivity,
    calls: &'v AtomicUsize,
}

impl<T: Scalar> PairVisitor<T> for Pairs<'_, '_, T> {
    type Out = Vec<WspdPair<T>>;

    fn enter(&self, _tree: &KdTree<T>, node: NodeId) -> bool {
        self.conn.component(node).is_none()
    }

    fn visit(&self, tree: &KdTree<T>, a: NodeId, b: NodeId, out: &mut Self::Out) -> bool {
        if self.conn.connected(a, b)
            || self.metric.lower_bound(tree, a, b) >= self.hi
            || self.metric.upper_bound(tree, a, b) < self.lo
        {
            return false;
        }
        if !self.pred.accepts(tree, a, b) {
            return true;
        }
        if tree.node(a).len() + tree.node(b).len() <= self.beta {
            self.calls.fetch_add(1, Ordering::Relaxed);
            let e = closest_pair(tree, a, b, self.metric);
            if self.lo <= e.weight && e.weight < self.hi {
                let mut pair = WspdPair::new(a, b);
                pair.cached_edge = Some(e);
                out.push(pair);
            }
        }
        false
    }
}
