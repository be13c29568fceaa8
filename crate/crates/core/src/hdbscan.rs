//! Core distances and the two HDBSCAN* minimum-spanning-tree pipelines.
//!
//! Both pipelines build the MST of the mutual reachability graph, where
//! `d_m(p, q) = max{cd(p), cd(q), d(p, q)}`, with the round-based MemoGFK
//! driver. They differ only in the separation predicate used to enumerate
//! node pairs:
//!
//! * [`hdbscan_mst_gantao`] uses standard geometric separation and one exact
//!   BCCP* edge per pair;
//! * [`hdbscan_mst`] also accepts pairs that are mutually unreachable, which
//!   stops the pair recursion earlier and yields fewer pairs.

use crate::error::{Error, Result};
use crate::geom::{knn, KdTree, NodeId};
use crate::mst::{memogfk, Metric, MstRun};
use crate::scalar::Scalar;
use crate::wspd::SeparationPredicate;

/// Per-point core distances plus the per-node `(cd_min, cd_max)` annotation
/// of the tree they were computed on.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreDistances<T> {
    min_pts: usize,
    by_id: Vec<T>,
    by_position: Vec<T>,
    node_min: Vec<T>,
    node_max: Vec<T>,
}

impl<T: Scalar> CoreDistances<T> {
    pub fn min_pts(&self) -> usize {
        self.min_pts
    }

    /// Core distance of point `id`.
    pub fn get(&self, id: usize) -> T {
        self.by_id[id]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.by_id
    }

    pub(crate) fn at_position(&self, pos: usize) -> T {
        self.by_position[pos]
    }

    pub fn node_min(&self, node: NodeId) -> T {
        self.node_min[node]
    }

    pub fn node_max(&self, node: NodeId) -> T {
        self.node_max[node]
    }

    /// Whether this annotation belongs to a tree shaped like `tree`.
    pub fn check(&self, tree: &KdTree<T>) -> Result<()> {
        if self.node_min.len() != tree.nodes().len() || self.by_id.len() != tree.len() {
            return Err(Error::CoreDistancesMissing);
        }
        Ok(())
    }

    /// Mutual reachability distance between points `a` and `b`.
    pub fn mutual_reachability(&self, tree: &KdTree<T>, a: usize, b: usize) -> T {
        let d = crate::geom::sq_dist(tree.point(a), tree.point(b)).sqrt();
        d.max(self.by_id[a]).max(self.by_id[b])
    }
}

/// Distance from every point to its `min_pts`-th nearest neighbor (itself
/// included), with `cd_min`/`cd_max` annotated on every node of `tree`.
pub fn core_distances<T: Scalar>(tree: &KdTree<T>, min_pts: usize) -> Result<CoreDistances<T>> {
    if min_pts == 0 {
        return Err(Error::ZeroK);
    }
    let by_id: Vec<T> = if min_pts == 1 {
        vec![T::zero(); tree.len()]
    } else {
        let neighbors = knn(tree, min_pts)?;
        (0..tree.len())
            .map(|id| neighbors.kth_distance(id))
            .collect()
    };
    CoreDistances::from_values(tree, min_pts, by_id)
}

impl<T: Scalar> CoreDistances<T> {
    /// Wraps externally supplied per-point core distances (indexed by point id)
    /// and annotates the nodes of `tree` with them.
    pub fn from_values(tree: &KdTree<T>, min_pts: usize, by_id: Vec<T>) -> Result<Self> {
        if by_id.len() != tree.len() {
            return Err(Error::CoreDistancesMissing);
        }
        let by_position: Vec<T> = tree.ids().iter().map(|&id| by_id[id]).collect();
        let bounds = tree.fold_up(
            |node| {
                let slice = &by_position[node.start..node.end];
                let lo = slice.iter().copied().fold(T::infinity(), T::min);
                let hi = slice.iter().copied().fold(T::neg_infinity(), T::max);
                (lo, hi)
            },
            |a, b| (a.0.min(b.0), a.1.max(b.1)),
        );
        let (node_min, node_max) = bounds.into_iter().unzip();
        Ok(CoreDistances {
            min_pts,
            by_id,
            by_position,
            node_min,
            node_max,
        })
    }
}

/// Baseline pipeline: standard well-separation, exact BCCP* per pair.
pub fn hdbscan_mst_gantao<T: Scalar>(
    tree: &KdTree<T>,
    core: &CoreDistances<T>,
) -> Result<MstRun<T>> {
    core.check(tree)?;
    memogfk(
        tree,
        &SeparationPredicate::standard(),
        &Metric::MutualReachability(core),
    )
}

/// Improved pipeline: pairs may also terminate as mutually unreachable.
pub fn hdbscan_mst<T: Scalar>(tree: &KdTree<T>, core: &CoreDistances<T>) -> Result<MstRun<T>> {
    core.check(tree)?;
    memogfk(
        tree,
        &SeparationPredicate::Hdbscan { core },
        &Metric::MutualReachability(core),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Points;

    #[test]
    fn min_pts_one_is_zero() {
        let pts = Points::new(2, vec![0.0, 0.0, 1.0, 1.0, 5.0, 2.0]).unwrap();
        let tree = KdTree::build(&pts, 1).unwrap();
        let core = core_distances(&tree, 1).unwrap();
        assert!(core.as_slice().iter().all(|&c| c == 0.0));
        assert!(tree
            .nodes()
            .iter()
            .enumerate()
            .all(|(i, _)| core.node_max(i) == 0.0));
    }

    #[test]
    fn third_neighbor_including_self() {
        // a at the origin; d at distance sqrt(2), b at distance 4.
        let pts = Points::new(2, vec![0.0, 0.0, 4.0, 0.0, 1.0, 1.0, -10.0, -10.0]).unwrap();
        let tree = KdTree::build(&pts, 1).unwrap();
        let core = core_distances(&tree, 3).unwrap();
        assert_eq!(core.get(0), 4.0);
    }

    #[test]
    fn min_pts_larger_than_n() {
        let pts = Points::new(1, vec![0.0, 1.0]).unwrap();
        let tree = KdTree::build(&pts, 1).unwrap();
        assert!(matches!(
            core_distances(&tree, 3),
            Err(Error::KTooLarge { .. })
        ));
        assert!(core_distances(&tree, 0).is_err());
    }

    #[test]
    fn node_bounds_bracket_subtree() {
        let coords: Vec<f64> = (0..120).map(|i| ((i * 7919) % 113) as f64 * 0.37).collect();
        let pts = Points::new(2, coords).unwrap();
        let tree = KdTree::build(&pts, 1).unwrap();
        let core = core_distances(&tree, 4).unwrap();
        for (i, node) in tree.nodes().iter().enumerate() {
            let vals: Vec<f64> = (node.start..node.end)
                .map(|p| core.get(tree.id_at(p)))
                .collect();
            assert_eq!(
                core.node_min(i),
                vals.iter().copied().fold(f64::INFINITY, f64::min)
            );
            assert_eq!(
                core.node_max(i),
                vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            );
        }
    }

    #[test]
    fn foreign_annotation_rejected() {
        let a = KdTree::build(&Points::new(1, vec![0.0, 1.0, 2.0]).unwrap(), 1).unwrap();
        let b = KdTree::build(&Points::new(1, vec![0.0, 1.0]).unwrap(), 1).unwrap();
        let core = core_distances(&b, 1).unwrap();
        assert!(matches!(
            hdbscan_mst(&a, &core),
            Err(Error::CoreDistancesMissing)
        ));
    }
}
