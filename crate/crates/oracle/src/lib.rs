//! Quadratic reference implementations.
//!
//! Nothing in here shares code with `parclust-core`: every routine works on a
//! plain row-major `&[f64]` buffer and recomputes what it needs from scratch.

use std::cmp::Ordering;
use std::collections::VecDeque;

pub fn dist(points: &[f64], dim: usize, i: usize, j: usize) -> f64 {
    let a = &points[i * dim..(i + 1) * dim];
    let b = &points[j * dim..(j + 1) * dim];
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn key_cmp(a: (f64, usize, usize), b: (f64, usize, usize)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap()
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
}

/// Dense Prim on the complete graph with an arbitrary symmetric weight.
pub fn prim_complete(n: usize, weight: impl Fn(usize, usize) -> f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    in_tree[0] = true;
    for (j, b) in best.iter_mut().enumerate().skip(1) {
        *b = weight(0, j);
    }
    let mut total = 0.0;
    for _ in 1..n {
        let mut pick = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (pick == usize::MAX || best[j] < best[pick]) {
                pick = j;
            }
        }
        in_tree[pick] = true;
        total += best[pick];
        for j in 0..n {
            if !in_tree[j] {
                let w = weight(pick, j);
                if w < best[j] {
                    best[j] = w;
                }
            }
        }
    }
    total
}

pub fn emst_weight(points: &[f64], dim: usize) -> f64 {
    let n = points.len() / dim;
    prim_complete(n, |i, j| dist(points, dim, i, j))
}

/// Distance to the `min_pts`-th nearest neighbor, counting the point itself.
pub fn core_distances(points: &[f64], dim: usize, min_pts: usize) -> Vec<f64> {
    let n = points.len() / dim;
    (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| dist(points, dim, i, j)).collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d[min_pts - 1]
        })
        .collect()
}

pub fn mutual_reachability(points: &[f64], dim: usize, cd: &[f64], i: usize, j: usize) -> f64 {
    dist(points, dim, i, j).max(cd[i]).max(cd[j])
}

pub fn hdbscan_mst_weight(points: &[f64], dim: usize, min_pts: usize) -> f64 {
    let n = points.len() / dim;
    let cd = core_distances(points, dim, min_pts);
    prim_complete(n, |i, j| mutual_reachability(points, dim, &cd, i, j))
}

/// All-points kNN by full sort: self first, then ascending (distance, id).
pub fn knn(points: &[f64], dim: usize, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = points.len() / dim;
    (0..n)
        .map(|i| {
            let mut all: Vec<(usize, f64)> = (0..n).map(|j| (j, dist(points, dim, i, j))).collect();
            all.sort_by(|a, b| {
                (a.0 != i)
                    .cmp(&(b.0 != i))
                    .then(a.1.partial_cmp(&b.1).unwrap())
                    .then(a.0.cmp(&b.0))
            });
            all.truncate(k);
            all
        })
        .collect()
}

/// Minimum cross distance by exhaustive scan, tie-broken on (min id, max id).
pub fn closest_pair(
    a: &[usize],
    b: &[usize],
    weight: impl Fn(usize, usize) -> f64,
) -> (usize, usize, f64) {
    let mut best: Option<(f64, usize, usize)> = None;
    for &p in a {
        for &q in b {
            let key = (weight(p, q), p.min(q), p.max(q));
            if best.is_none_or(|b| key_cmp(key, b) == Ordering::Less) {
                best = Some(key);
            }
        }
    }
    let (w, u, v) = best.expect("empty side");
    (u, v, w)
}

/// Prim restricted to the edges of a spanning tree, with the (w, min, max)
/// tie-break. Returns visit order and the weight that attached each vertex
/// (`INFINITY` for the start).
pub fn prim_tree_order(
    n: usize,
    edges: &[(usize, usize, f64)],
    start: usize,
) -> (Vec<usize>, Vec<f64>) {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    let mut visited = vec![false; n];
    let mut order = vec![start];
    let mut attach = vec![f64::INFINITY];
    visited[start] = true;
    let mut frontier: Vec<(f64, usize, usize, usize)> = adj[start]
        .iter()
        .map(|&(v, w)| (w, start.min(v), start.max(v), v))
        .collect();
    while !frontier.is_empty() {
        let mut bi = 0;
        for i in 1..frontier.len() {
            let a = frontier[i];
            let b = frontier[bi];
            if key_cmp((a.0, a.1, a.2), (b.0, b.1, b.2)) == Ordering::Less {
                bi = i;
            }
        }
        let (w, _, _, v) = frontier.swap_remove(bi);
        if visited[v] {
            continue;
        }
        visited[v] = true;
        order.push(v);
        attach.push(w);
        for &(x, wx) in &adj[v] {
            if !visited[x] {
                frontier.push((wx, v.min(x), v.max(x), x));
            }
        }
    }
    (order, attach)
}

pub fn bfs_hops(n: usize, edges: &[(usize, usize)], start: usize) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut hops = vec![usize::MAX; n];
    hops[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if hops[v] == usize::MAX {
                hops[v] = hops[u] + 1;
                queue.push_back(v);
            }
        }
    }
    hops
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Plain sequential Kruskal over (u, v, w) with the (w, min, max) order.
/// Returns accepted edges in acceptance order.
pub fn kruskal(n: usize, edges: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64)> {
    let mut sorted: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|&(u, v, w)| (u.min(v), u.max(v), w))
        .collect();
    sorted.sort_by(|a, b| key_cmp((a.2, a.0, a.1), (b.2, b.0, b.1)));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for (u, v, w) in sorted {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
            out.push((u, v, w));
        }
    }
    out
}

/// Relabels so that cluster ids appear in order of first occurrence; -1 stays.
pub fn canonical_labels(labels: &[i64]) -> Vec<i64> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            if l < 0 {
                -1
            } else {
                let next = map.len() as i64;
                *map.entry(l).or_insert(next)
            }
        })
        .collect()
}

/// DBSCAN*: core points are those with core distance <= eps; two core points
/// are linked when within eps. Non-core points are noise (-1).
pub fn dbscan_star(points: &[f64], dim: usize, min_pts: usize, eps: f64) -> Vec<i64> {
    let n = points.len() / dim;
    let cd = core_distances(points, dim, min_pts);
    let core: Vec<bool> = cd.iter().map(|&c| c <= eps).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        if !core[i] {
            continue;
        }
        for (j, &is_core) in core.iter().enumerate().skip(i + 1) {
            if is_core && dist(points, dim, i, j) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let raw: Vec<i64> = (0..n)
        .map(|i| {
            if core[i] {
                find(&mut parent, i) as i64
            } else {
                -1
            }
        })
        .collect();
    canonical_labels(&raw)
}

/// Connected components of the edges with weight <= eps; every vertex labeled.
pub fn components_at(n: usize, edges: &[(usize, usize, f64)], eps: f64) -> Vec<i64> {
    let mut parent: Vec<usize> = (0..n).collect();
    for &(u, v, w) in edges {
        if w <= eps {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let raw: Vec<i64> = (0..n).map(|i| find(&mut parent, i) as i64).collect();
    canonical_labels(&raw)
}

/// Small deterministic generator (splitmix64) so the oracle crate stays free
/// of dependencies.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn points(&mut self, n: usize, dim: usize, side: f64) -> Vec<f64> {
        (0..n * dim).map(|_| self.unit() * side).collect()
    }

    /// Random spanning tree on n vertices with random weights.
    pub fn tree(&mut self, n: usize) -> Vec<(usize, usize, f64)> {
        (1..n)
            .map(|v| {
                let u = self.below(v);
                (u, v, self.unit())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_mst() {
        let pts = [0.0, 0.0, 3.0, 0.0, 3.0, 4.0];
        assert_eq!(emst_weight(&pts, 2), 7.0);
    }

    #[test]
    fn prim_order_on_path() {
        let edges = [(0, 1, 1.0), (1, 2, 2.0)];
        let (order, attach) = prim_tree_order(3, &edges, 2);
        assert_eq!(order, vec![2, 1, 0]);
        assert_eq!(attach[1..], [2.0, 1.0]);
    }
}
