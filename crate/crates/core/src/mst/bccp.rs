use super::Edge;
use crate::geom::{sq_dist, KdTree, NodeId};
use crate::hdbscan::CoreDistances;
use crate::scalar::Scalar;

/// Edge weight used to build the spanning tree.
#[derive(Clone, Copy, Debug)]
pub enum Metric<'a, T> {
    Euclidean,
    /// `max{cd(p), cd(q), d(p, q)}`.
    MutualReachability(&'a CoreDistances<T>),
}

impl<T: Scalar> Metric<'_, T> {
    pub fn is_mutual_reachability(&self) -> bool {
        matches!(self, Metric::MutualReachability(_))
    }

    /// Weight between the points stored at positions `pa` and `pb`.
    #[inline]
    pub(crate) fn weight_at(&self, tree: &KdTree<T>, pa: usize, pb: usize) -> T {
        let d = sq_dist(tree.point_at(pa), tree.point_at(pb)).sqrt();
        match self {
            Metric::Euclidean => d,
            Metric::MutualReachability(core) => {
                d.max(core.at_position(pa)).max(core.at_position(pb))
            }
        }
    }

    /// Relative padding that absorbs rounding in the sphere bounds, so a bound
    /// never crosses the exactly computed weight it brackets.
    fn slack(tree: &KdTree<T>) -> T {
        T::epsilon() * T::from_f64_lossy(4.0 * (tree.dim() as f64 + 4.0))
    }

    /// Lower bound on the weight of any edge across `a` and `b`: the sphere gap
    /// (and, for mutual reachability, both `cd_min`).
    pub fn lower_bound(&self, tree: &KdTree<T>, a: NodeId, b: NodeId) -> T {
        let geo = tree.node_distance(a, b) * (T::one() - Self::slack(tree));
        match self {
            Metric::Euclidean => geo,
            Metric::MutualReachability(core) => geo.max(core.node_min(a)).max(core.node_min(b)),
        }
    }

    /// Upper bound on the closest-pair weight of `a` and `b`.
    pub fn upper_bound(&self, tree: &KdTree<T>, a: NodeId, b: NodeId) -> T {
        let geo = tree.node_max_distance(a, b) * (T::one() + Self::slack(tree));
        match self {
            Metric::Euclidean => geo,
            Metric::MutualReachability(core) => geo.max(core.node_max(a)).max(core.node_max(b)),
        }
    }

    fn box_lower_bound(&self, tree: &KdTree<T>, a: NodeId, b: NodeId) -> T {
        let geo = tree.box_sq_distance(a, b).sqrt() * (T::one() - Self::slack(tree));
        match self {
            Metric::Euclidean => geo,
            Metric::MutualReachability(core) => geo.max(core.node_min(a)).max(core.node_min(b)),
        }
    }
}

/// Bichromatic closest pair of two disjoint nodes under Euclidean distance.
pub fn bccp<T: Scalar>(tree: &KdTree<T>, a: NodeId, b: NodeId) -> Edge<T> {
    closest_pair(tree, a, b, &Metric::Euclidean)
}

/// Bichromatic closest pair under mutual reachability distance.
pub fn bccp_star<T: Scalar>(
    tree: &KdTree<T>,
    a: NodeId,
    b: NodeId,
    core: &CoreDistances<T>,
) -> Edge<T> {
    closest_pair(tree, a, b, &Metric::MutualReachability(core))
}

/// Exact minimum of the metric over `a × b`, ties broken by `(min id, max id)`.
pub fn closest_pair<T: Scalar>(
    tree: &KdTree<T>,
    a: NodeId,
    b: NodeId,
    metric: &Metric<'_, T>,
) -> Edge<T> {
    let mut best = None;
    descend(tree, metric, a, b, &mut best);
    best.expect("nodes are never empty")
}

fn descend<T: Scalar>(
    tree: &KdTree<T>,
    metric: &Metric<'_, T>,
    a: NodeId,
    b: NodeId,
    best: &mut Option<Edge<T>>,
) {
    if let Some(e) = best {
        if metric.box_lower_bound(tree, a, b) > e.weight {
            return;
        }
    }
    let (na, nb) = (tree.node(a), tree.node(b));
    match (na.children, nb.children) {
        (None, None) => {
            for pa in na.start..na.end {
                let u = tree.id_at(pa);
                for pb in nb.start..nb.end {
                    let cand = Edge::new(u, tree.id_at(pb), metric.weight_at(tree, pa, pb));
                    if best.as_ref().is_none_or(|e| cand.key_lt(e)) {
                        *best = Some(cand);
                    }
                }
            }
        }
        _ => {
            let split_a = nb.is_leaf() || (!na.is_leaf() && na.len() >= nb.len());
            let ((c1, c2), other) = if split_a {
                (na.children.unwrap(), b)
            } else {
                (nb.children.unwrap(), a)
            };
            let l1 = metric.box_lower_bound(tree, c1, other);
            let l2 = metric.box_lower_bound(tree, c2, other);
            if l2 < l1 {
                descend(tree, metric, c2, other, best);
                descend(tree, metric, c1, other, best);
            } else {
                descend(tree, metric, c1, other, best);
                descend(tree, metric, c2, other, best);
            }
        }
    }
}
