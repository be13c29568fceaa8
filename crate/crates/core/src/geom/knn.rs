use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{sq_dist, KdTree, NodeId};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// All-points k-nearest-neighbor lists, indexed by original point id.
///
/// Each list starts with the query point itself, followed by the remaining
/// neighbors in ascending `(distance, id)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnResult<T> {
    k: usize,
    ids: Vec<usize>,
    dists: Vec<T>,
}

impl<T: Scalar> KnnResult<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.ids.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn neighbors(&self, id: usize) -> &[usize] {
        &self.ids[id * self.k..(id + 1) * self.k]
    }

    pub fn distances(&self, id: usize) -> &[T] {
        &self.dists[id * self.k..(id + 1) * self.k]
    }

    /// Distance to the k-th neighbor of `id` (self included).
    pub fn kth_distance(&self, id: usize) -> T {
        self.dists[(id + 1) * self.k - 1]
    }
}

struct Candidate<T> {
    sq: T,
    not_self: bool,
    id: usize,
}

impl<T: Scalar> Candidate<T> {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.sq
            .cmp_total(&other.sq)
            .then(self.not_self.cmp(&other.not_self))
            .then(self.id.cmp(&other.id))
    }
}

impl<T: Scalar> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Candidate<T> {}

impl<T: Scalar> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

struct Search<'a, T> {
    tree: &'a KdTree<T>,
    query: &'a [T],
    query_id: usize,
    k: usize,
    heap: BinaryHeap<Candidate<T>>,
}

impl<T: Scalar> Search<'_, T> {
    fn bound(&self) -> Option<T> {
        (self.heap.len() == self.k).then(|| self.heap.peek().unwrap().sq)
    }

    fn visit(&mut self, node: NodeId) {
        if let Some(worst) = self.bound() {
            // Equal distances may still win on id, so only strictly farther boxes prune.
            if self.tree.point_box_sq_distance(self.query, node) > worst {
                return;
            }
        }
        let n = self.tree.node(node);
        match n.children {
            None => {
                for pos in n.start..n.end {
                    let id = self.tree.id_at(pos);
                    let cand = Candidate {
                        sq: sq_dist(self.query, self.tree.point_at(pos)),
                        not_self: id != self.query_id,
                        id,
                    };
                    if self.heap.len() < self.k {
                        self.heap.push(cand);
                    } else if cand < *self.heap.peek().unwrap() {
                        self.heap.pop();
                        self.heap.push(cand);
                    }
                }
            }
            Some((l, r)) => {
                let dl = self.tree.point_box_sq_distance(self.query, l);
                let dr = self.tree.point_box_sq_distance(self.query, r);
                if dr < dl {
                    self.visit(r);
                    self.visit(l);
                } else {
                    self.visit(l);
                    self.visit(r);
                }
            }
        }
    }
}

/// Exact k nearest neighbors of every point, the point itself included.
pub fn knn<T: Scalar>(tree: &KdTree<T>, k: usize) -> Result<KnnResult<T>> {
    let n = tree.len();
    if k == 0 {
        return Err(Error::ZeroK);
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut ids = vec![0usize; n * k];
    let mut dists = vec![T::zero(); n * k];
    ids.par_chunks_mut(k)
        .zip(dists.par_chunks_mut(k))
        .enumerate()
        .for_each(|(id, (out_ids, out_dists))| {
            let mut search = Search {
                tree,
                query: tree.point(id),
                query_id: id,
                k,
                heap: BinaryHeap::with_capacity(k + 1),
            };
            search.visit(tree.root());
            for (slot, cand) in search.heap.into_sorted_vec().into_iter().enumerate() {
                out_ids[slot] = cand.id;
                out_dists[slot] = cand.sq.sqrt();
            }
        });
    Ok(KnnResult { k, ids, dists })
}
