use parclust_core::*;
use parclust_oracle as oracle;
use proptest::prelude::*;

fn tree_of(coords: &[f64], dim: usize) -> KdTree64 {
    KdTree::build(&Points::new(dim, coords.to_vec()).unwrap(), 1).unwrap()
}

fn check_knn(coords: &[f64], dim: usize, k: usize) {
    let tree = tree_of(coords, dim);
    let got = knn(&tree, k).unwrap();
    let want = oracle::knn(coords, dim, k);
    for (id, row) in want.iter().enumerate() {
        let ids: Vec<usize> = row.iter().map(|x| x.0).collect();
        assert_eq!(got.neighbors(id), &ids[..], "point {id}");
        for (a, b) in got.distances(id).iter().zip(row) {
            assert!((a - b.1).abs() <= 1e-12 * b.1.max(1.0));
        }
    }
}

#[test]
fn knn_matches_brute_force() {
    let mut rng = oracle::SplitMix(51);
    for dim in [1, 2, 3, 5, 7] {
        let coords = rng.points(400, dim, 10.0);
        for k in [1, 2, 10, 33] {
            check_knn(&coords, dim, k);
        }
    }
}

#[test]
fn knn_with_duplicates_and_ties() {
    // Small integer grid: many duplicates and equal distances.
    let mut rng = oracle::SplitMix(52);
    let coords: Vec<f64> = (0..600).map(|_| rng.below(6) as f64).collect();
    check_knn(&coords, 2, 12);
    check_knn(&coords, 3, 7);
}

#[test]
fn knn_rejects_bad_k() {
    let tree = tree_of(&[0.0, 1.0, 2.0], 1);
    assert!(matches!(knn(&tree, 0), Err(Error::ZeroK)));
    assert!(matches!(
        knn(&tree, 4),
        Err(Error::KTooLarge { k: 4, n: 3 })
    ));
    assert_eq!(knn(&tree, 3).unwrap().neighbors(0), &[0, 1, 2]);
}

#[test]
fn core_distances_match_brute_force() {
    let coords = oracle::SplitMix(53).points(500, 3, 1.0);
    let tree = tree_of(&coords, 3);
    for min_pts in [1, 2, 10, 50] {
        let core = core_distances(&tree, min_pts).unwrap();
        let want = oracle::core_distances(&coords, 3, min_pts);
        for (a, b) in core.as_slice().iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
        for (id, node) in tree.nodes().iter().enumerate() {
            let cds: Vec<f64> = (node.start..node.end)
                .map(|p| core.get(tree.id_at(p)))
                .collect();
            assert_eq!(
                core.node_min(id),
                cds.iter().copied().fold(f64::INFINITY, f64::min)
            );
            assert_eq!(
                core.node_max(id),
                cds.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            );
        }
    }
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(
        Points::<f64>::new(2, vec![]),
        Err(Error::EmptyDataset)
    ));
    assert!(Points::new(2, vec![1.0, 2.0, 3.0]).is_err());
    assert!(matches!(
        Points::new(2, vec![1.0, f64::NAN]),
        Err(Error::InvalidCoordinate { point: 0, dim: 1 })
    ));
}

#[test]
fn node_distance_between_trees() {
    let a = tree_of(&[0.0, 0.0, 1.0, 0.0], 2);
    let b = tree_of(&[4.0, 0.0, 5.0, 0.0], 2);
    // Box gap of 3 minus the sphere slack.
    let d = node_distance(&a, a.root(), &b, b.root()).unwrap();
    assert!(d <= 3.0 && d > 2.9);
    let c = tree_of(&[0.0, 0.0, 0.0], 3);
    assert!(matches!(
        node_distance(&a, 0, &c, 0),
        Err(Error::DimensionMismatch {
            expected: 2,
            found: 3
        })
    ));
}

#[test]
fn f32_tree_finds_neighbors() {
    let coords: Vec<f32> = oracle::SplitMix(54)
        .points(200, 2, 5.0)
        .iter()
        .map(|&x| x as f32)
        .collect();
    let tree = KdTree::build(&Points::new(2, coords.clone()).unwrap(), 1).unwrap();
    let got = knn(&tree, 5).unwrap();
    let wide: Vec<f64> = coords.iter().map(|&x| x as f64).collect();
    let want = oracle::knn(&wide, 2, 5);
    for (id, row) in want.iter().enumerate() {
        assert!((got.kth_distance(id) as f64 - row[4].1).abs() < 1e-4);
    }
}

fn check_tree(coords: &[f64], dim: usize) -> Result<(), TestCaseError> {
    let tree = tree_of(coords, dim);
    let n = coords.len() / dim;
    let nodes = tree.nodes();
    prop_assert_eq!(nodes.len(), 2 * n - 1);
    let mut seen = tree.ids().to_vec();
    seen.sort_unstable();
    prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
    for (id, node) in nodes.iter().enumerate() {
        let center = tree.center(id);
        for p in node.start..node.end {
            let pt = tree.point_at(p);
            let r = pt
                .iter()
                .zip(center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            prop_assert!(r <= node.radius);
            let (lo, hi) = tree.bbox(id);
            for d in 0..dim {
                prop_assert!(lo[d] <= pt[d] && pt[d] <= hi[d]);
            }
        }
        match node.children {
            None => prop_assert_eq!(node.len(), 1),
            Some((l, r)) => {
                prop_assert_eq!(l, id + 1);
                prop_assert_eq!(nodes[l].start, node.start);
                prop_assert_eq!(nodes[l].end, nodes[r].start);
                prop_assert_eq!(nodes[r].end, node.end);
            }
        }
    }
    for i in 0..n {
        prop_assert_eq!(tree.point(i), &coords[i * dim..(i + 1) * dim]);
        prop_assert_eq!(tree.id_at(tree.position_of(i)), i);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kd_tree_invariants(seed in any::<u64>(), n in 1usize..200, dim in 1usize..6, grid in any::<bool>()) {
        let mut rng = oracle::SplitMix(seed);
        let coords: Vec<f64> = if grid {
            (0..n * dim).map(|_| rng.below(4) as f64).collect()
        } else {
            rng.points(n, dim, 100.0)
        };
        check_tree(&coords, dim)?;
    }

    #[test]
    fn kth_distance_is_kth_smallest(seed in any::<u64>(), n in 2usize..120, k in 1usize..10) {
        let k = k.min(n);
        let coords = oracle::SplitMix(seed).points(n, 2, 1.0);
        let got = knn(&tree_of(&coords, 2), k).unwrap();
        for i in 0..n {
            let mut all: Vec<f64> = (0..n).map(|j| oracle::dist(&coords, 2, i, j)).collect();
            all.sort_by(f64::total_cmp);
            prop_assert!((got.kth_distance(i) - all[k - 1]).abs() <= 1e-12);
        }
    }
}
