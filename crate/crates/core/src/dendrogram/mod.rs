//! Dendrograms of a spanning tree, reachability plots and horizontal cuts.
//!
//! Internal node `n + k` of every dendrogram corresponds to the `k`-th MST
//! edge in `(weight, min id, max id)` order, so the sequential and parallel
//! builders agree on node ids and differ at most in child order.

mod ordered;

use std::collections::VecDeque;

pub use ordered::{
    dendrogram_parallel, dendrogram_parallel_with, heavy_light_split, DendrogramOptions,
    HeavyLightSplit,
};

use crate::error::{Error, Result};
use crate::hdbscan::CoreDistances;
use crate::mst::{Edge, SpanningForest, UnionFind};
use crate::scalar::Scalar;

/// Label of points that belong to no cluster.
pub const NOISE: i64 = -1;

#[derive(Clone, Debug, PartialEq)]
pub struct DendroNode<T> {
    /// `None` for leaves.
    pub children: Option<(usize, usize)>,
    /// Zero for leaves.
    pub height: T,
    pub size: usize,
    /// The MST edge whose removal splits this node.
    pub edge: Option<Edge<T>>,
}

/// Nodes `0..n` are the leaves (node `i` is point `i`); the root is the last node.
#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram<T> {
    n: usize,
    nodes: Vec<DendroNode<T>>,
}

impl<T: Scalar> Dendrogram<T> {
    /// `children[k]` holds the children of internal node `n + k`, whose edge
    /// is `sorted[k]`.
    fn assemble(n: usize, sorted: &[Edge<T>], children: &[(usize, usize)]) -> Self {
        let mut nodes: Vec<DendroNode<T>> = (0..n)
            .map(|_| DendroNode {
                children: None,
                height: T::zero(),
                size: 1,
                edge: None,
            })
            .collect();
        nodes.reserve(sorted.len());
        // Children always carry lighter edges, so sizes are ready in rank order.
        for (e, &(l, r)) in sorted.iter().zip(children) {
            let size = nodes[l].size + nodes[r].size;
            nodes.push(DendroNode {
                children: Some((l, r)),
                height: e.weight,
                size,
                edge: Some(*e),
            });
        }
        Dendrogram { n, nodes }
    }

    /// Rebuilds a dendrogram from explicit node records, checking every
    /// structural invariant.
    pub fn from_nodes(n: usize, nodes: Vec<DendroNode<T>>) -> Result<Self> {
        let d = Dendrogram { n, nodes };
        d.validate()?;
        Ok(d)
    }

    pub fn num_points(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[DendroNode<T>] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &DendroNode<T> {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    /// MST edges in `(weight, min id, max id)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge<T>> + '_ {
        self.nodes[self.n..].iter().filter_map(|d| d.edge)
    }

    /// Leaves in in-order.
    pub fn leaves_in_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        self.in_order(|leaf, _| out.push(leaf));
        out
    }

    /// Calls `f(leaf, internal node visited just before it)` in in-order.
    fn in_order(&self, mut f: impl FnMut(usize, Option<usize>)) {
        let mut stack = Vec::new();
        let mut node = self.root();
        let mut last = None;
        loop {
            while let Some((l, _)) = self.nodes[node].children {
                stack.push(node);
                node = l;
            }
            f(node, last);
            let Some(parent) = stack.pop() else {
                break;
            };
            last = Some(parent);
            node = self.nodes[parent].children.unwrap().1;
        }
    }

    /// Checks sizes, heights and that every node below the root has exactly
    /// one parent.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || self.nodes.len() != 2 * n - 1 {
            return Err(Error::NotSpanning {
                expected: 2 * n.max(1) - 1,
                found: self.nodes.len(),
            });
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            match node.children {
                None => {
                    if id >= n || node.size != 1 || node.height != T::zero() {
                        return Err(Error::Disconnected);
                    }
                }
                Some((l, r)) => {
                    let (nl, nr) = (self.nodes.get(l), self.nodes.get(r));
                    let ok = id >= n
                        && l != r
                        && l < id
                        && r < id
                        && nl.zip(nr).is_some_and(|(a, b)| {
                            node.size == a.size + b.size
                                && a.height <= node.height
                                && b.height <= node.height
                        });
                    if !ok {
                        return Err(Error::Disconnected);
                    }
                    parents[l] += 1;
                    parents[r] += 1;
                }
            }
        }
        let root = self.root();
        if self.nodes[root].size != n || parents[..root].iter().any(|&p| p != 1) {
            return Err(Error::Disconnected);
        }
        Ok(())
    }
}

/// A dendrogram whose in-order leaf walk is the Prim order from `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedDendrogram<T> {
    pub dendrogram: Dendrogram<T>,
    pub start: usize,
}

/// Points in Prim order with the weight that attached each of them.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachabilityPlot<T> {
    pub order: Vec<usize>,
    /// `values[0]` is `+inf`.
    pub values: Vec<T>,
}

impl<T: Scalar> ReachabilityPlot<T> {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.order.iter().copied().zip(self.values.iter().copied())
    }
}

/// Per-point cluster labels of one horizontal cut.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering<T> {
    /// Cluster id per point, `NOISE` for noise. Ids are numbered by first
    /// appearance in point-id order.
    pub labels: Vec<i64>,
    pub epsilon: T,
    pub min_pts: usize,
}

impl<T> Clustering<T> {
    pub fn num_clusters(&self) -> usize {
        self.labels
            .iter()
            .max()
            .map_or(0, |&m| (m + 1).max(0) as usize)
    }

    pub fn num_noise(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

/// Checks that `forest` is a spanning tree and returns its edges sorted by
/// `(weight, min id, max id)`.
pub(crate) fn sorted_tree_edges<T: Scalar>(forest: &SpanningForest<T>) -> Result<Vec<Edge<T>>> {
    let n = forest.num_points();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if forest.len() != n - 1 {
        return Err(Error::NotSpanning {
            expected: n - 1,
            found: forest.len(),
        });
    }
    for e in forest.edges() {
        if e.v >= n {
            return Err(Error::PointOutOfRange { id: e.v, n });
        }
        if e.u == e.v || e.weight.is_nan() || e.weight < T::zero() {
            return Err(Error::Disconnected);
        }
    }
    Ok(forest.sorted_edges())
}

/// Bottom-up dendrogram by Kruskal merging. Child order is unspecified.
pub fn dendrogram_sequential<T: Scalar>(forest: &SpanningForest<T>) -> Result<Dendrogram<T>> {
    let n = forest.num_points();
    let sorted = sorted_tree_edges(forest)?;
    let mut uf = UnionFind::new(n);
    let mut top: Vec<usize> = (0..n).collect();
    let mut children = Vec::with_capacity(sorted.len());
    for (k, e) in sorted.iter().enumerate() {
        let (ru, rv) = (uf.find(e.u), uf.find(e.v));
        if ru == rv {
            return Err(Error::Disconnected);
        }
        children.push((top[ru], top[rv]));
        uf.union(ru, rv);
        top[uf.find(ru)] = n + k;
    }
    Ok(Dendrogram::assemble(n, &sorted, &children))
}

/// Unweighted hop count from `start` to every point of the tree.
pub fn vertex_distances<T: Scalar>(forest: &SpanningForest<T>, start: usize) -> Result<Vec<usize>> {
    let n = forest.num_points();
    if start >= n {
        return Err(Error::PointOutOfRange { id: start, n });
    }
    let mut adj = vec![Vec::new(); n];
    for e in forest.edges() {
        if e.v >= n {
            return Err(Error::PointOutOfRange { id: e.v, n });
        }
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let mut dist = vec![usize::MAX; n];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    if dist.contains(&usize::MAX) {
        return Err(Error::Disconnected);
    }
    Ok(dist)
}

/// Leaves in in-order; each value is the height of the internal node visited
/// just before the leaf, i.e. the weight at which it joins the prefix.
pub fn reachability_plot<T: Scalar>(dendro: &OrderedDendrogram<T>) -> ReachabilityPlot<T> {
    let d = &dendro.dendrogram;
    let mut order = Vec::with_capacity(d.n);
    let mut values = Vec::with_capacity(d.n);
    d.in_order(|leaf, before| {
        order.push(leaf);
        values.push(before.map_or(T::infinity(), |x| d.nodes[x].height));
    });
    ReachabilityPlot { order, values }
}

/// DBSCAN* clustering at `epsilon`: components of MST edges with weight at
/// most `epsilon`; points whose core distance exceeds `epsilon` are noise.
pub fn cut<T: Scalar>(
    dendro: &Dendrogram<T>,
    core: &CoreDistances<T>,
    epsilon: T,
) -> Result<Clustering<T>> {
    cut_with(dendro, core.as_slice(), core.min_pts(), epsilon)
}

/// [`cut`] with core distances given per point id.
pub fn cut_with<T: Scalar>(
    dendro: &Dendrogram<T>,
    core: &[T],
    min_pts: usize,
    epsilon: T,
) -> Result<Clustering<T>> {
    let n = dendro.n;
    if epsilon.is_nan() || epsilon < T::zero() {
        return Err(Error::NegativeEpsilon);
    }
    if core.len() != n {
        return Err(Error::CoreDistancesMissing);
    }
    let mut uf = UnionFind::new(n);
    for e in dendro.edges().take_while(|e| e.weight <= epsilon) {
        uf.union(e.u, e.v);
    }
    let mut ids = vec![NOISE; n];
    let mut next = 0;
    let labels = (0..n)
        .map(|i| {
            if core[i] > epsilon {
                return NOISE;
            }
            let root = uf.find(i);
            if ids[root] == NOISE {
                ids[root] = next;
                next += 1;
            }
            ids[root]
        })
        .collect();
    Ok(Clustering {
        labels,
        epsilon,
        min_pts,
    })
}

/// Single-linkage clustering: every point is a core point.
pub fn single_linkage_cut<T: Scalar>(dendro: &Dendrogram<T>, epsilon: T) -> Result<Clustering<T>> {
    cut_with(dendro, &vec![T::zero(); dendro.n], 1, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forest(n: usize, edges: &[(usize, usize, f64)]) -> SpanningForest<f64> {
        SpanningForest::from_edges(
            n,
            edges.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect(),
        )
    }

    #[test]
    fn two_points() {
        let f = forest(2, &[(0, 1, 2.5)]);
        let d = dendrogram_sequential(&f).unwrap();
        assert_eq!(d.root(), 2);
        assert_eq!(d.node(2).children, Some((0, 1)));
        assert_eq!(d.node(2).height, 2.5);
        d.validate().unwrap();
    }

    #[test]
    fn path_merges_left_deep() {
        let f = forest(4, &[(2, 3, 3.0), (0, 1, 1.0), (1, 2, 2.0)]);
        let d = dendrogram_sequential(&f).unwrap();
        let heights: Vec<f64> = d.nodes()[4..].iter().map(|x| x.height).collect();
        assert_eq!(heights, [1.0, 2.0, 3.0]);
        assert_eq!(d.node(5).children, Some((4, 2)));
        assert_eq!(d.node(6).children, Some((5, 3)));
        assert_eq!(d.node(6).size, 4);
    }

    #[test]
    fn rejects_non_trees() {
        assert!(matches!(
            dendrogram_sequential(&forest(3, &[(0, 1, 1.0)])),
            Err(Error::NotSpanning { .. })
        ));
        assert!(matches!(
            dendrogram_sequential(&forest(4, &[(0, 1, 1.0), (1, 0, 2.0), (2, 3, 1.0)])),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn distances_on_a_path() {
        let f = forest(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(vertex_distances(&f, 0).unwrap(), [0, 1, 2]);
        assert_eq!(vertex_distances(&f, 1).unwrap(), [1, 0, 1]);
        assert!(vertex_distances(&f, 3).is_err());
    }

    #[test]
    fn cut_extremes() {
        let f = forest(3, &[(0, 1, 1.0), (1, 2, 2.0)]);
        let d = dendrogram_sequential(&f).unwrap();
        let all = cut_with(&d, &[0.5, 0.5, 0.5], 2, f64::INFINITY).unwrap();
        assert_eq!(all.labels, [0, 0, 0]);
        let none = cut_with(&d, &[0.5, 0.5, 0.5], 2, 0.1).unwrap();
        assert_eq!(none.labels, [NOISE; 3]);
        let split = cut_with(&d, &[0.5, 0.5, 0.5], 2, 1.5).unwrap();
        assert_eq!(split.labels, [0, 0, 1]);
        assert_eq!(split.num_clusters(), 2);
        assert!(cut_with(&d, &[0.0; 3], 1, -1.0).is_err());
    }
}
