use parclust_core::wspd::{is_geometrically_separated, is_mutually_unreachable};
use parclust_core::*;
use parclust_oracle as oracle;
use proptest::prelude::*;

fn tree_of(coords: &[f64], dim: usize) -> KdTree64 {
    KdTree::build(&Points::new(dim, coords.to_vec()).unwrap(), 1).unwrap()
}

fn ids_of(tree: &KdTree64, node: NodeId) -> Vec<usize> {
    let n = tree.node(node);
    (n.start..n.end).map(|p| tree.id_at(p)).collect()
}

/// Every unordered pair of distinct points is covered by exactly one pair.
fn assert_exact_cover(tree: &KdTree64, w: &Wspd<f64>) {
    let n = tree.len();
    let mut count = vec![0u32; n * n];
    for p in &w.pairs {
        assert!(p.a < p.b);
        for u in ids_of(tree, p.a) {
            for v in ids_of(tree, p.b) {
                let (x, y) = (u.min(v), u.max(v));
                count[x * n + y] += 1;
            }
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            assert_eq!(count[u * n + v], 1, "pair ({u}, {v})");
        }
    }
}

fn standard_ok(tree: &KdTree64, a: NodeId, b: NodeId) -> bool {
    let r = tree.node(a).radius.max(tree.node(b).radius);
    tree.node_distance(a, b) >= 2.0 * r
}

/// Recomputes mutual unreachability from per-point core distances.
fn unreachable_ok(tree: &KdTree64, cd: &[f64], a: NodeId, b: NodeId) -> bool {
    let span = |x: NodeId| {
        ids_of(tree, x)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                (lo.min(cd[i]), hi.max(cd[i]))
            })
    };
    let ((amin, amax), (bmin, bmax)) = (span(a), span(b));
    let d = tree.node_distance(a, b);
    let diam = tree.node(a).diameter().max(tree.node(b).diameter());
    d.max(amin).max(bmin) >= diam.max(amax).max(bmax)
}

fn check(coords: &[f64], dim: usize, min_pts: usize) {
    let tree = tree_of(coords, dim);
    let std = wspd(&tree, &SeparationPredicate::standard()).unwrap();
    assert_eq!(std.mode, SeparationMode::Standard);
    assert_exact_cover(&tree, &std);
    for p in &std.pairs {
        assert!(standard_ok(&tree, p.a, p.b));
        assert!(is_geometrically_separated(&tree, p.a, p.b));
    }

    let core = core_distances(&tree, min_pts.min(tree.len())).unwrap();
    let cd = oracle::core_distances(coords, dim, min_pts.min(tree.len()));
    let hdb = wspd(&tree, &SeparationPredicate::Hdbscan { core: &core }).unwrap();
    assert_eq!(hdb.mode, SeparationMode::Hdbscan);
    assert_exact_cover(&tree, &hdb);
    for p in &hdb.pairs {
        let mu = is_mutually_unreachable(&tree, &core, p.a, p.b).unwrap();
        assert_eq!(mu, unreachable_ok(&tree, &cd, p.a, p.b));
        assert!(is_geometrically_separated(&tree, p.a, p.b) || mu);
    }
    assert!(hdb.len() <= std.len());
    assert_eq!(
        wspd_count(&tree, &SeparationPredicate::standard()).unwrap(),
        std.len()
    );
    assert_eq!(
        wspd_count(&tree, &SeparationPredicate::Hdbscan { core: &core }).unwrap(),
        hdb.len()
    );
    for w in [&std, &hdb] {
        assert!(w
            .pairs
            .windows(2)
            .all(|x| (x[0].a, x[0].b) < (x[1].a, x[1].b)));
    }
}

#[test]
fn exact_cover_on_random_instances() {
    let mut rng = oracle::SplitMix(61);
    for dim in [1, 2, 3, 5] {
        for n in [2, 3, 50, 300] {
            let coords = rng.points(n, dim, 10.0);
            for min_pts in [1, 3, 10] {
                check(&coords, dim, min_pts);
            }
        }
    }
}

#[test]
fn exact_cover_with_duplicates() {
    let mut rng = oracle::SplitMix(62);
    let coords: Vec<f64> = (0..400).map(|_| rng.below(5) as f64).collect();
    check(&coords, 2, 4);
    check(&vec![1.5; 60], 3, 5);
}

#[test]
fn single_point_has_no_pairs() {
    let tree = tree_of(&[1.0, 2.0], 2);
    assert!(wspd(&tree, &SeparationPredicate::standard())
        .unwrap()
        .is_empty());
}

#[test]
fn predicate_annotation_must_match_tree() {
    let small = tree_of(&[0.0, 1.0, 2.0], 1);
    let big = tree_of(&[0.0, 1.0, 2.0, 3.0], 1);
    let core = core_distances(&small, 2).unwrap();
    assert!(matches!(
        wspd(&big, &SeparationPredicate::Hdbscan { core: &core }),
        Err(Error::CoreDistancesMissing)
    ));
}

#[test]
fn linear_size_on_uniform_points() {
    let coords = oracle::SplitMix(63).points(4000, 2, 1.0);
    let tree = tree_of(&coords, 2);
    let pairs = wspd(&tree, &SeparationPredicate::standard()).unwrap().len();
    assert_eq!(
        wspd_count(&tree, &SeparationPredicate::standard()).unwrap(),
        pairs
    );
    // O(n) pairs with a modest constant in 2D.
    assert!(pairs < 40 * 4000, "{pairs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn covers_every_pair_once(seed in any::<u64>(), n in 1usize..120, dim in 1usize..5, min_pts in 1usize..12) {
        let coords = oracle::SplitMix(seed).points(n, dim, 3.0);
        check(&coords, dim, min_pts);
    }
}
