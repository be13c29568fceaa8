//! Well-separated pair decomposition over a kd-tree.
//!
//! [`wspd`] enumerates node pairs `(A, B)` such that every unordered pair of
//! distinct points is covered by exactly one `A × B`. The recursion is the
//! classic one: every internal node pairs its two children, and a pair that is
//! not yet separated is refined by splitting the side with the larger
//! bounding sphere.
//!
//! The same recursion skeleton drives the pruned traversals of MemoGFK, so it
//! is exposed crate-wide through [`PairVisitor`].

use rayon::join;

use crate::error::{Error, Result};
use crate::geom::{KdTree, NodeId, PARALLEL_CUTOFF};
use crate::hdbscan::CoreDistances;
use crate::mst::Edge;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub enum SeparationPredicate<'a, T> {
    /// `d(A, B) >= s * max(r_A, r_B)`; `s = 2` gives `d(A, B) >= max(diam_A, diam_B)`.
    Standard { s: T },
    /// Geometrically separated or mutually unreachable (or both).
    Hdbscan { core: &'a CoreDistances<T> },
}

/// Which predicate produced a decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationMode {
    Standard,
    Hdbscan,
}

impl<'a, T: Scalar> SeparationPredicate<'a, T> {
    pub fn standard() -> Self {
        SeparationPredicate::Standard {
            s: T::from_f64_lossy(2.0),
        }
    }

    pub fn mode(&self) -> SeparationMode {
        match self {
            SeparationPredicate::Standard { .. } => SeparationMode::Standard,
            SeparationPredicate::Hdbscan { .. } => SeparationMode::Hdbscan,
        }
    }

    pub fn check(&self, tree: &KdTree<T>) -> Result<()> {
        match self {
            SeparationPredicate::Standard { .. } => Ok(()),
            SeparationPredicate::Hdbscan { core } => core.check(tree),
        }
    }

    pub(crate) fn accepts(&self, tree: &KdTree<T>, a: NodeId, b: NodeId) -> bool {
        match *self {
            SeparationPredicate::Standard { s } => {
                let r = tree.node(a).radius.max(tree.node(b).radius);
                tree.node_distance(a, b) >= s * r
            }
            SeparationPredicate::Hdbscan { core } => {
                is_geometrically_separated(tree, a, b) || mutually_unreachable(tree, core, a, b)
            }
        }
    }
}

/// `d(A, B) >= max(diam_A, diam_B)`.
pub fn is_geometrically_separated<T: Scalar>(tree: &KdTree<T>, a: NodeId, b: NodeId) -> bool {
    tree.node_distance(a, b) >= tree.node(a).diameter().max(tree.node(b).diameter())
}

/// `max{d(A,B), cd_min(A), cd_min(B)} >= max{diam_A, diam_B, cd_max(A), cd_max(B)}`.
pub fn is_mutually_unreachable<T: Scalar>(
    tree: &KdTree<T>,
    core: &CoreDistances<T>,
    a: NodeId,
    b: NodeId,
) -> Result<bool> {
    core.check(tree)?;
    Ok(mutually_unreachable(tree, core, a, b))
}

fn mutually_unreachable<T: Scalar>(
    tree: &KdTree<T>,
    core: &CoreDistances<T>,
    a: NodeId,
    b: NodeId,
) -> bool {
    let lhs = tree
        .node_distance(a, b)
        .max(core.node_min(a))
        .max(core.node_min(b));
    let rhs = tree
        .node(a)
        .diameter()
        .max(tree.node(b).diameter())
        .max(core.node_max(a))
        .max(core.node_max(b));
    lhs >= rhs
}

#[derive(Clone, Debug, PartialEq)]
pub struct WspdPair<T> {
    /// The smaller node id of the pair.
    pub a: NodeId,
    pub b: NodeId,
    /// Closest pair under the active metric, once computed.
    pub cached_edge: Option<Edge<T>>,
}

impl<T: Scalar> WspdPair<T> {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        Self {
            a: a.min(b),
            b: a.max(b),
            cached_edge: None,
        }
    }

    pub fn cardinality(&self, tree: &KdTree<T>) -> usize {
        tree.node(self.a).len() + tree.node(self.b).len()
    }
}

#[derive(Clone, Debug)]
pub struct Wspd<T> {
    pub pairs: Vec<WspdPair<T>>,
    pub mode: SeparationMode,
}

impl<T> Wspd<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Full decomposition of `tree` under `pred`, sorted by `(a, b)`.
pub fn wspd<T: Scalar>(tree: &KdTree<T>, pred: &SeparationPredicate<'_, T>) -> Result<Wspd<T>> {
    pred.check(tree)?;
    let mut pairs = traverse(tree, &Collect { pred });
    pairs.sort_unstable_by_key(|p| (p.a, p.b));
    Ok(Wspd {
        pairs,
        mode: pred.mode(),
    })
}

/// Number of pairs in the decomposition of `tree` under `pred`, without
/// materializing them.
pub fn wspd_count<T: Scalar>(tree: &KdTree<T>, pred: &SeparationPredicate<'_, T>) -> Result<usize> {
    pred.check(tree)?;
    Ok(traverse(tree, &Count { pred }).0)
}

struct Count<'p, 'a, T> {
    pred: &'p SeparationPredicate<'a, T>,
}

impl<T: Scalar> PairVisitor<T> for Count<'_, '_, T> {
    type Out = Tally;

    fn visit(&self, tree: &KdTree<T>, a: NodeId, b: NodeId, out: &mut Tally) -> bool {
        if self.pred.accepts(tree, a, b) {
            out.0 += 1;
            false
        } else {
            true
        }
    }
}

#[derive(Default)]
pub(crate) struct Tally(usize);

impl Extend<usize> for Tally {
    fn extend<I: IntoIterator<Item = usize>>(&mut self, iter: I) {
        self.0 += iter.into_iter().sum::<usize>();
    }
}

impl IntoIterator for Tally {
    type Item = usize;
    type IntoIter = std::iter::Once<usize>;

    fn into_iter(self) -> Self::IntoIter {
        std::iter::once(self.0)
    }
}

struct Collect<'p, 'a, T> {
    pred: &'p SeparationPredicate<'a, T>,
}

impl<T: Scalar> PairVisitor<T> for Collect<'_, '_, T> {
    type Out = Vec<WspdPair<T>>;

    fn visit(&self, tree: &KdTree<T>, a: NodeId, b: NodeId, out: &mut Self::Out) -> bool {
        if self.pred.accepts(tree, a, b) {
            out.push(WspdPair::new(a, b));
            false
        } else {
            true
        }
    }
}

/// Callbacks for the decomposition recursion.
pub(crate) trait PairVisitor<T: Scalar>: Sync {
    type Out: Default + Send + Extend<<Self::Out as IntoIterator>::Item> + IntoIterator;

    /// Whether pairs formed strictly inside `node` are worth exploring.
    fn enter(&self, _tree: &KdTree<T>, _node: NodeId) -> bool {
        true
    }

    /// Handles the candidate pair; `a` has the larger bounding sphere.
    /// Returns `true` to refine the pair further.
    fn visit(&self, tree: &KdTree<T>, a: NodeId, b: NodeId, out: &mut Self::Out) -> bool;
}

pub(crate) fn traverse<T: Scalar, V: PairVisitor<T>>(tree: &KdTree<T>, visitor: &V) -> V::Out {
    let mut out = V::Out::default();
    within(tree, visitor, tree.root(), &mut out);
    out
}

fn within<T: Scalar, V: PairVisitor<T>>(tree: &KdTree<T>, v: &V, node: NodeId, out: &mut V::Out) {
    let n = tree.node(node);
    let Some((l, r)) = n.children else {
        return;
    };
    if !v.enter(tree, node) {
        return;
    }
    if n.len() >= PARALLEL_CUTOFF {
        let (a, b) = join(
            || {
                let mut o = V::Out::default();
                within(tree, v, l, &mut o);
                o
            },
            || {
                let mut o = V::Out::default();
                within(tree, v, r, &mut o);
                o
            },
        );
        out.extend(a);
        out.extend(b);
    } else {
        within(tree, v, l, out);
        within(tree, v, r, out);
    }
    find_pair(tree, v, l, r, out);
}

fn find_pair<T: Scalar, V: PairVisitor<T>>(
    tree: &KdTree<T>,
    v: &V,
    p: NodeId,
    q: NodeId,
    out: &mut V::Out,
) {
    // Split the side with the larger sphere; equal diameters split the lower id.
    let (dp, dq) = (tree.node(p).diameter(), tree.node(q).diameter());
    let (mut p, mut q) = if dp < dq || (dp == dq && q < p) {
        (q, p)
    } else {
        (p, q)
    };
    if !v.visit(tree, p, q, out) {
        return;
    }
    if tree.node(p).is_leaf() {
        std::mem::swap(&mut p, &mut q);
    }
    let Some((pl, pr)) = tree.node(p).children else {
        debug_assert!(false, "refining a pair of leaves");
        return;
    };
    if tree.node(p).len() + tree.node(q).len() >= PARALLEL_CUTOFF {
        let (a, b) = join(
            || {
                let mut o = V::Out::default();
                find_pair(tree, v, pl, q, &mut o);
                o
            },
            || {
                let mut o = V::Out::default();
                find_pair(tree, v, pr, q, &mut o);
                o
            },
        );
        out.extend(a);
        out.extend(b);
    } else {
        find_pair(tree, v, pl, q, out);
        find_pair(tree, v, pr, q, out);
    }
}

#[derive(Default)]
pub(crate) struct Nothing;

impl Extend<()> for Nothing {
    fn extend<I: IntoIterator<Item = ()>>(&mut self, _iter: I) {}
}

impl IntoIterator for Nothing {
    type Item = ();
    type IntoIter = std::iter::Empty<()>;

    fn into_iter(self) -> Self::IntoIter {
        std::iter::empty()
    }
}

pub(crate) fn require_mutual_reachability<T: Scalar>(
    pred: &SeparationPredicate<'_, T>,
    mr: bool,
) -> Result<()> {
    if pred.mode() == SeparationMode::Hdbscan && !mr {
        return Err(Error::MetricMismatch);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Points;
    use crate::hdbscan::core_distances;

    #[test]
    fn two_points_one_pair() {
        let tree = KdTree::build(&Points::new(2, vec![0.0, 0.0, 1.0, 1.0]).unwrap(), 1).unwrap();
        let w = wspd(&tree, &SeparationPredicate::standard()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!((w.pairs[0].a, w.pairs[0].b), (1, 2));
    }

    #[test]
    fn coincident_leaves_are_separated() {
        let tree = KdTree::build(&Points::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap(), 1).unwrap();
        assert!(is_geometrically_separated(&tree, 1, 2));
        assert_eq!(
            wspd(&tree, &SeparationPredicate::standard()).unwrap().len(),
            1
        );
    }

    #[test]
    fn mutually_unreachable_singletons() {
        let near = KdTree::build(&Points::new(1, vec![0.0, 1.0]).unwrap(), 1).unwrap();
        let core = CoreDistances::from_values(&near, 2, vec![3.0, 5.0]).unwrap();
        // max{1, 3, 5} = 5 >= max{0, 0, 3, 5} = 5
        assert!(is_mutually_unreachable(&near, &core, 1, 2).unwrap());

        let far = KdTree::build(&Points::new(1, vec![0.0, 10.0]).unwrap(), 1).unwrap();
        let core = CoreDistances::from_values(&far, 2, vec![3.0, 5.0]).unwrap();
        assert!(is_mutually_unreachable(&far, &core, 1, 2).unwrap());

        // Root against a leaf: diam 2 and cd_max 5 beat distance 0.
        let three = KdTree::build(&Points::new(1, vec![0.0, 1.0, 2.0]).unwrap(), 1).unwrap();
        let core = CoreDistances::from_values(&three, 2, vec![1.0, 1.0, 5.0]).unwrap();
        assert!(!is_mutually_unreachable(&three, &core, 0, 1).unwrap());
    }

    #[test]
    fn hdbscan_predicate_needs_matching_annotation() {
        let tree = KdTree::build(&Points::new(1, vec![0.0, 1.0, 2.0]).unwrap(), 1).unwrap();
        let other = KdTree::build(&Points::new(1, vec![0.0, 1.0]).unwrap(), 1).unwrap();
        let core = core_distances(&other, 1).unwrap();
        let err = wspd(&tree, &SeparationPredicate::Hdbscan { core: &core }).unwrap_err();
        assert_eq!(err.to_string(), "core distances missing");
        assert!(is_mutually_unreachable(&tree, &core, 0, 1).is_err());
    }
}
