use std::fs;

use parclust_core::io::*;
use parclust_core::*;
use parclust_oracle as oracle;
use proptest::prelude::*;

fn tree_of(points: &Points64) -> KdTree64 {
    KdTree::build(points, 1).unwrap()
}

#[test]
fn points_round_trip_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.csv");
    let ds = gen_uniform(1000, 5, 9).unwrap();
    write_points(&path, &ds.points).unwrap();
    let back: Dataset<f64> = read_points(&path).unwrap();
    assert_eq!(back.points, ds.points);
    assert_eq!(back.source.as_deref(), Some(path.as_path()));
}

#[test]
fn reads_header_whitespace_and_blank_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.txt");
    fs::write(&path, "x,y,z\n1,2,3\n\n4 5\t6\n 7 , 8 , 9e0 \n").unwrap();
    let ds: Dataset<f64> = read_points(&path).unwrap();
    assert_eq!(ds.dim(), 3);
    assert_eq!(
        ds.points.coords(),
        &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]
    );
    let f: Dataset<f32> = read_points(&path).unwrap();
    assert_eq!(f.points.point(2), &[7.0f32, 8.0, 9.0]);
}

#[test]
fn reports_bad_rows_by_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "1,2\n3,4\n5\n").unwrap();
    match read_points::<f64>(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    fs::write(&path, "1,2\nfoo,4\n").unwrap();
    assert!(matches!(
        read_points::<f64>(&path),
        Err(Error::Parse { line: 2, .. })
    ));
    fs::write(&path, "1,nan\n").unwrap();
    assert!(matches!(
        read_points::<f64>(&path),
        Err(Error::Parse { line: 1, .. })
    ));
    fs::write(&path, "a,b\n\n").unwrap();
    assert!(matches!(
        read_points::<f64>(&path),
        Err(Error::EmptyDataset)
    ));
    assert!(matches!(
        read_points::<f64>(dir.path().join("missing")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = gen_varden(800, 2, 3, 4).unwrap();
    let tree = tree_of(&ds.points);
    let core = core_distances(&tree, 10).unwrap();
    let forest = hdbscan_mst(&tree, &core).unwrap().forest;

    let p = dir.path().join("x.mst");
    write_mst(&p, &forest).unwrap();
    let back = read_mst(&p).unwrap();
    assert_eq!(back.sorted_edges(), forest.sorted_edges());
    assert_eq!(back.num_points(), 800);

    let od = dendrogram_parallel(&forest, 0).unwrap();
    let p = dir.path().join("x.dendro");
    write_dendrogram(&p, &od.dendrogram).unwrap();
    let back = read_dendrogram(&p).unwrap();
    for (a, b) in back.nodes().iter().zip(od.dendrogram.nodes()) {
        assert_eq!(
            (a.children, a.height, a.size),
            (b.children, b.height, b.size)
        );
    }

    let plot = reachability_plot(&od);
    let p = dir.path().join("x.reach");
    write_reachability(&p, &plot).unwrap();
    assert_eq!(read_reachability(&p).unwrap(), plot);
    assert!(fs::read_to_string(&p)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .ends_with(" inf"));

    let clusters = cut(&od.dendrogram, &core, core.as_slice()[7]).unwrap();
    let p = dir.path().join("x.clusters");
    write_clustering(&p, &clusters).unwrap();
    assert_eq!(read_clustering(&p).unwrap(), clusters.labels);
}

#[test]
fn corrupt_dendrogram_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d");
    fs::write(&p, "2\n0 -1 -1 0 1\n1 -1 -1 0 1\n2 0 0 1 2\n").unwrap();
    assert!(read_dendrogram(&p).is_err());
    fs::write(&p, "2\n0 -1 -1 0 1\n1 -1 -1 0 1\n2 0 1 1 2\n").unwrap();
    assert_eq!(read_dendrogram(&p).unwrap().node(2).size, 2);
}

#[test]
fn uniform_fills_its_cube() {
    // Chi-square over a 10x10 grid; 99 degrees of freedom, 0.1% critical value 148.2.
    let n = 20_000;
    let ds = gen_uniform(n, 2, 4).unwrap();
    let side = (n as f64).sqrt();
    let mut counts = [0f64; 100];
    for i in 0..n {
        let p = ds.points.point(i);
        assert!(p.iter().all(|&x| (0.0..side).contains(&x)));
        let cell = |x: f64| ((x / side * 10.0) as usize).min(9);
        counts[cell(p[0]) * 10 + cell(p[1])] += 1.0;
    }
    let expect = n as f64 / 100.0;
    let chi2: f64 = counts.iter().map(|c| (c - expect).powi(2) / expect).sum();
    assert!(chi2 < 148.2, "{chi2}");
}

#[test]
fn varden_clusters_differ_in_density() {
    let ds = gen_varden(5000, 3, 8, 5).unwrap();
    let tree = tree_of(&ds.points);
    let core = core_distances(&tree, 10).unwrap();
    let mut medians: Vec<f64> = (0..5)
        .map(|c| {
            let mut v: Vec<f64> = (c..5000).step_by(5).map(|i| core.get(i)).collect();
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        })
        .collect();
    medians.sort_by(f64::total_cmp);
    assert!(medians[4] > 2.0 * medians[0], "{medians:?}");
}

#[test]
fn generators_ignore_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            (
                gen_uniform(5000, 3, 1).unwrap(),
                gen_varden(5000, 3, 1, 7).unwrap(),
            )
        })
    };
    let base = run(1);
    for t in [2, 4, 8] {
        assert_eq!(run(t), base);
    }
    assert_ne!(
        gen_uniform(100, 2, 1).unwrap(),
        gen_uniform(100, 2, 2).unwrap()
    );
    assert!(matches!(gen_uniform(0, 2, 1), Err(Error::EmptyDataset)));
    assert!(matches!(gen_varden(10, 2, 1, 0), Err(Error::EmptyDataset)));
}

proptest! {
    #[test]
    fn fmt_real_round_trips(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        let s = fmt_real(x);
        let y: f64 = s.parse().unwrap();
        if x.is_nan() {
            prop_assert!(y.is_nan());
        } else {
            prop_assert_eq!(y.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn tree_files_round_trip(seed in any::<u64>(), n in 1usize..60) {
        let dir = tempfile::tempdir().unwrap();
        let edges: Vec<Edge64> = oracle::SplitMix(seed)
            .tree(n)
            .into_iter()
            .map(|(u, v, w)| Edge::new(u, v, w))
            .collect();
        let f = SpanningForest::from_edges(n, edges);
        let p = dir.path().join("t.mst");
        write_mst(&p, &f).unwrap();
        let back = read_mst(&p).unwrap();
        prop_assert_eq!(back.sorted_edges(), f.sorted_edges());
    }
}
