use rayon::join;

use super::{sq_dist, Points};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index of a node in [`KdTree::nodes`]. The root is node 0 and nodes are laid
/// out in pre-order.
pub type NodeId = usize;

/// Subproblems smaller than this many points are handled sequentially by the
/// fork-join recursions over the tree.
pub const PARALLEL_CUTOFF: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
pub struct KdNode<T> {
    /// Half-open range into the permuted point array.
    pub start: usize,
    pub end: usize,
    pub split_dim: usize,
    pub split_value: T,
    pub children: Option<(NodeId, NodeId)>,
    /// Radius of the bounding sphere centered on the bounding-box center.
    pub radius: T,
}

impl<T: Scalar> KdNode<T> {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn diameter(&self) -> T {
        self.radius + self.radius
    }
}

/// Spatial-median kd-tree. Owns a permuted copy of the input so that every
/// node's points are contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct KdTree<T> {
    dim: usize,
    points: Vec<T>,
    ids: Vec<usize>,
    positions: Vec<usize>,
    nodes: Vec<KdNode<T>>,
    centers: Vec<T>,
    lo: Vec<T>,
    hi: Vec<T>,
}

struct Subtree<T> {
    nodes: Vec<KdNode<T>>,
    lo: Vec<T>,
    hi: Vec<T>,
    centers: Vec<T>,
}

impl<T> Subtree<T> {
    fn append(&mut self, mut other: Subtree<T>, offset: usize) {
        for node in &mut other.nodes {
            if let Some((l, r)) = node.children.as_mut() {
                *l += offset;
                *r += offset;
            }
        }
        self.nodes.append(&mut other.nodes);
        self.lo.append(&mut other.lo);
        self.hi.append(&mut other.hi);
        self.centers.append(&mut other.centers);
    }
}

impl<T: Scalar> KdTree<T> {
    pub fn build(points: &Points<T>, leaf_capacity: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let leaf_capacity = leaf_capacity.max(1);
        let n = points.len();
        let dim = points.dim();
        let mut ids: Vec<usize> = (0..n).collect();
        let tree = build_range(points, &mut ids, 0, leaf_capacity);

        let mut permuted = Vec::with_capacity(n * dim);
        for &id in &ids {
            permuted.extend_from_slice(points.point(id));
        }
        let mut positions = vec![0; n];
        for (pos, &id) in ids.iter().enumerate() {
            positions[id] = pos;
        }
        Ok(Self {
            dim,
            points: permuted,
            ids,
            positions,
            nodes: tree.nodes,
            centers: tree.centers,
            lo: tree.lo,
            hi: tree.hi,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[KdNode<T>] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &KdNode<T> {
        &self.nodes[id]
    }

    /// Coordinates of the point stored at permuted position `pos`.
    pub fn point_at(&self, pos: usize) -> &[T] {
        &self.points[pos * self.dim..(pos + 1) * self.dim]
    }

    /// Original id of the point stored at permuted position `pos`.
    pub fn id_at(&self, pos: usize) -> usize {
        self.ids[pos]
    }

    pub fn position_of(&self, id: usize) -> usize {
        self.positions[id]
    }

    pub fn point(&self, id: usize) -> &[T] {
        self.point_at(self.positions[id])
    }

    /// Permutation from positions to original ids.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn center(&self, id: NodeId) -> &[T] {
        &self.centers[id * self.dim..(id + 1) * self.dim]
    }

    pub fn bbox(&self, id: NodeId) -> (&[T], &[T]) {
        let r = id * self.dim..(id + 1) * self.dim;
        (&self.lo[r.clone()], &self.hi[r])
    }

    /// Gap between the bounding spheres of `a` and `b`, clamped at zero.
    pub fn node_distance(&self, a: NodeId, b: NodeId) -> T {
        let gap = sq_dist(self.center(a), self.center(b)).sqrt()
            - self.nodes[a].radius
            - self.nodes[b].radius;
        gap.max(T::zero())
    }

    /// Upper bound on any point-to-point distance across `a` and `b`.
    pub fn node_max_distance(&self, a: NodeId, b: NodeId) -> T {
        sq_dist(self.center(a), self.center(b)).sqrt() + self.nodes[a].radius + self.nodes[b].radius
    }

    /// Squared minimum distance between the bounding boxes of `a` and `b`.
    /// Never smaller than the squared sphere gap.
    pub fn box_sq_distance(&self, a: NodeId, b: NodeId) -> T {
        let (alo, ahi) = self.bbox(a);
        let (blo, bhi) = self.bbox(b);
        let mut acc = T::zero();
        for k in 0..self.dim {
            let gap = (blo[k] - ahi[k]).max(alo[k] - bhi[k]);
            if gap > T::zero() {
                acc = acc + gap * gap;
            }
        }
        acc
    }

    /// Squared minimum distance from a query point to the bounding box of `node`.
    pub fn point_box_sq_distance(&self, q: &[T], node: NodeId) -> T {
        let (lo, hi) = self.bbox(node);
        let mut acc = T::zero();
        for k in 0..self.dim {
            let gap = (lo[k] - q[k]).max(q[k] - hi[k]);
            if gap > T::zero() {
                acc = acc + gap * gap;
            }
        }
        acc
    }
}

impl<T: Scalar> KdTree<T> {
    /// Bottom-up pass computing one value per node. `out` is indexed by node
    /// id; subtrees occupy contiguous id ranges, so disjoint halves are filled
    /// in parallel.
    pub(crate) fn fold_up<V, L, C>(&self, leaf: L, combine: C) -> Vec<V>
    where
        V: Copy + Default + Send + Sync,
        L: Fn(&KdNode<T>) -> V + Sync,
        C: Fn(V, V) -> V + Sync,
    {
        let mut out = vec![V::default(); self.nodes.len()];
        self.fold_into(self.root(), &mut out, &leaf, &combine);
        out
    }

    fn fold_into<V, L, C>(&self, id: NodeId, out: &mut [V], leaf: &L, combine: &C) -> V
    where
        V: Copy + Send + Sync,
        L: Fn(&KdNode<T>) -> V + Sync,
        C: Fn(V, V) -> V + Sync,
    {
        let node = &self.nodes[id];
        let value = match node.children {
            None => leaf(node),
            Some((l, r)) => {
                let (head, rest) = out.split_at_mut(1);
                let (left_out, right_out) = rest.split_at_mut(r - l);
                let (a, b) = if node.len() >= PARALLEL_CUTOFF {
                    join(
                        || self.fold_into(l, left_out, leaf, combine),
                        || self.fold_into(r, right_out, leaf, combine),
                    )
                } else {
                    (
                        self.fold_into(l, left_out, leaf, combine),
                        self.fold_into(r, right_out, leaf, combine),
                    )
                };
                head[0] = combine(a, b);
                return head[0];
            }
        };
        out[0] = value;
        value
    }
}

/// [`KdTree::node_distance`] across two trees, which must share a dimension.
pub fn node_distance<T: Scalar>(ta: &KdTree<T>, a: NodeId, tb: &KdTree<T>, b: NodeId) -> Result<T> {
    if ta.dim != tb.dim {
        return Err(Error::DimensionMismatch {
            expected: ta.dim,
            found: tb.dim,
        });
    }
    let gap = sq_dist(ta.center(a), tb.center(b)).sqrt() - ta.nodes[a].radius - tb.nodes[b].radius;
    Ok(gap.max(T::zero()))
}

fn bounding_box<T: Scalar>(points: &Points<T>, ids: &[usize]) -> (Vec<T>, Vec<T>) {
    let mut lo = points.point(ids[0]).to_vec();
    let mut hi = lo.clone();
    for &id in &ids[1..] {
        for (k, &c) in points.point(id).iter().enumerate() {
            if c < lo[k] {
                lo[k] = c;
            }
            if c > hi[k] {
                hi[k] = c;
            }
        }
    }
    (lo, hi)
}

fn partition<T: Scalar>(points: &Points<T>, ids: &mut [usize], dim: usize, split: T) -> usize {
    let mut i = 0;
    let mut j = ids.len();
    while i < j {
        if points.point(ids[i])[dim] <= split {
            i += 1;
        } else {
            j -= 1;
            ids.swap(i, j);
        }
    }
    i
}

fn build_range<T: Scalar>(
    points: &Points<T>,
    ids: &mut [usize],
    start: usize,
    cap: usize,
) -> Subtree<T> {
    let (lo, hi) = bounding_box(points, ids);
    let half = T::one() / (T::one() + T::one());
    let center: Vec<T> = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| l + (h - l) * half)
        .collect();
    let reach = lo
        .iter()
        .zip(&hi)
        .zip(&center)
        .map(|((&l, &h), &c)| {
            let w = (c - l).max(h - c);
            w * w
        })
        .sum::<T>()
        .sqrt();
    // Pad by a few ulps so rounding never leaves a box corner outside.
    let radius = reach * (T::one() + T::epsilon() * T::from_f64_lossy(4.0));
    let mut node = KdNode {
        start,
        end: start + ids.len(),
        split_dim: 0,
        split_value: T::zero(),
        children: None,
        radius,
    };
    if ids.len() <= cap {
        return Subtree {
            nodes: vec![node],
            lo,
            hi,
            centers: center,
        };
    }

    let mut split_dim = 0;
    for k in 1..lo.len() {
        if hi[k] - lo[k] > hi[split_dim] - lo[split_dim] {
            split_dim = k;
        }
    }
    let mut split_value = lo[split_dim] + (hi[split_dim] - lo[split_dim]) * half;
    let mut mid = partition(points, ids, split_dim, split_value);
    if mid == 0 || mid == ids.len() {
        // Coincident (or float-adjacent) coordinates along the widest axis:
        // split the range in half by (coordinate, id).
        ids.sort_unstable_by(|&a, &b| {
            points.point(a)[split_dim]
                .cmp_total(&points.point(b)[split_dim])
                .then(a.cmp(&b))
        });
        mid = ids.len() / 2;
        split_value = points.point(ids[mid - 1])[split_dim];
    }
    node.split_dim = split_dim;
    node.split_value = split_value;

    let (left_ids, right_ids) = ids.split_at_mut(mid);
    let (left, right) = if left_ids.len() + right_ids.len() >= PARALLEL_CUTOFF {
        join(
            || build_range(points, left_ids, start, cap),
            || build_range(points, right_ids, start + mid, cap),
        )
    } else {
        (
            build_range(points, left_ids, start, cap),
            build_range(points, right_ids, start + mid, cap),
        )
    };
    let left_root = 1;
    let right_root = 1 + left.nodes.len();
    node.children = Some((left_root, right_root));
    let mut out = Subtree {
        nodes: Vec::with_capacity(1 + left.nodes.len() + right.nodes.len()),
        lo: Vec::with_capacity(lo.len() * (1 + left.nodes.len() + right.nodes.len())),
        hi: Vec::new(),
        centers: Vec::new(),
    };
    out.nodes.push(node);
    out.lo.extend_from_slice(&lo);
    out.hi.extend_from_slice(&hi);
    out.centers.extend_from_slice(&center);
    out.append(left, left_root);
    out.append(right, right_root);
    out
}
