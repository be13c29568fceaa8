//! Top-down ordered dendrogram construction.
//!
//! The heaviest `ceil(m / heavy_divisor)` edges of a subproblem form the top
//! of its dendrogram. Removing them leaves connected groups of light edges,
//! discovered through predecessor edges (the edge joining a parent endpoint to
//! its own parent). Each light group is contracted to its vertex closest to
//! the start in the heavy subproblem, every subproblem is solved recursively
//! in parallel, and the light roots are hung into the heavy dendrogram at the
//! contracted leaves.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{sorted_tree_edges, vertex_distances, Dendrogram, OrderedDendrogram};
use crate::error::{Error, Result};
use crate::mst::{Edge, SpanningForest, UnionFind};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct DendrogramOptions {
    /// One in `heavy_divisor` edges of a subproblem is heavy.
    pub heavy_divisor: usize,
    /// Subproblems with fewer edges are built bottom-up. `None` means half
    /// the number of points.
    pub sequential_below: Option<usize>,
}

impl Default for DendrogramOptions {
    fn default() -> Self {
        Self {
            heavy_divisor: 10,
            sequential_below: None,
        }
    }
}

/// Edge oriented away from the start: `p` is the endpoint closer to it.
#[derive(Clone, Copy, Debug)]
struct Arc {
    p: usize,
    c: usize,
    rank: usize,
}

/// Children per internal node `(rank, left, right)` plus the subproblem root.
struct Part {
    nodes: Vec<(usize, usize, usize)>,
    root: usize,
}

struct Ctx {
    n: usize,
    divisor: usize,
    cutoff: usize,
}

/// Ordered dendrogram from the default options.
pub fn dendrogram_parallel<T: Scalar>(
    forest: &SpanningForest<T>,
    start: usize,
) -> Result<OrderedDendrogram<T>> {
    dendrogram_parallel_with(forest, start, DendrogramOptions::default())
}

pub fn dendrogram_parallel_with<T: Scalar>(
    forest: &SpanningForest<T>,
    start: usize,
    opts: DendrogramOptions,
) -> Result<OrderedDendrogram<T>> {
    let (sorted, arcs) = orient(forest, start)?;
    let n = forest.num_points();
    let ctx = Ctx {
        n,
        divisor: opts.heavy_divisor.max(2),
        cutoff: opts.sequential_below.unwrap_or(n / 2),
    };
    let mut children = vec![(0, 0); sorted.len()];
    if !arcs.is_empty() {
        for (rank, l, r) in solve(&ctx, arcs).nodes {
            children[rank] = (l, r);
        }
    }
    Ok(OrderedDendrogram {
        dendrogram: Dendrogram::assemble(n, &sorted, &children),
        start,
    })
}

fn orient<T: Scalar>(forest: &SpanningForest<T>, start: usize) -> Result<(Vec<Edge<T>>, Vec<Arc>)> {
    let sorted = sorted_tree_edges(forest)?;
    let dist = vertex_distances(forest, start)?;
    let arcs = sorted
        .iter()
        .enumerate()
        .map(|(rank, e)| {
            let (p, c) = if dist[e.u] < dist[e.v] {
                (e.u, e.v)
            } else {
                (e.v, e.u)
            };
            Arc { p, c, rank }
        })
        .collect();
    Ok((sorted, arcs))
}

fn solve(ctx: &Ctx, mut arcs: Vec<Arc>) -> Part {
    let m = arcs.len();
    if m <= 1 || m < ctx.cutoff {
        return bottom_up(ctx.n, &mut arcs);
    }
    let heavy_count = m.div_ceil(ctx.divisor);
    let (heavy, lights) = split(&mut arcs, heavy_count);
    drop(arcs);
    let (top, parts) = rayon::join(
        || solve(ctx, heavy),
        || {
            lights
                .into_par_iter()
                .map(|(rep, sub)| (rep, solve(ctx, sub)))
                .collect::<Vec<_>>()
        },
    );
    let attach: HashMap<usize, usize> = parts.iter().map(|(rep, part)| (*rep, part.root)).collect();
    let hang = |x: usize| {
        if x < ctx.n {
            attach.get(&x).copied().unwrap_or(x)
        } else {
            x
        }
    };
    let mut nodes = top.nodes;
    for node in nodes.iter_mut() {
        node.1 = hang(node.1);
        node.2 = hang(node.2);
    }
    for (_, part) in parts {
        nodes.extend(part.nodes);
    }
    Part {
        nodes,
        root: top.root,
    }
}

/// Splits off the `heavy_count` heaviest arcs. Returns the heavy arcs with
/// light groups contracted, and each light group with its representative.
fn split(arcs: &mut [Arc], heavy_count: usize) -> (Vec<Arc>, Vec<(usize, Vec<Arc>)>) {
    let m = arcs.len();
    arcs.select_nth_unstable_by_key(m - heavy_count, |a| a.rank);
    let threshold = arcs[m - heavy_count].rank;
    let is_heavy = |a: &Arc| a.rank >= threshold;

    let parent: HashMap<usize, usize> = arcs.iter().enumerate().map(|(i, a)| (a.c, i)).collect();
    const UNSET: usize = usize::MAX;
    let mut group = vec![UNSET; m];
    let mut reps: Vec<usize> = Vec::new();
    let mut by_rep: HashMap<usize, usize> = HashMap::new();
    let mut chain = Vec::new();
    for i in 0..m {
        if is_heavy(&arcs[i]) {
            continue;
        }
        // Follow light predecessors up to a labeled arc or the group's top.
        let mut x = i;
        let label = loop {
            if group[x] != UNSET {
                break group[x];
            }
            chain.push(x);
            match parent.get(&arcs[x].p) {
                Some(&q) if !is_heavy(&arcs[q]) => x = q,
                // Light arcs below one vertex share its group.
                _ => {
                    let top = arcs[x].p;
                    break *by_rep.entry(top).or_insert_with(|| {
                        reps.push(top);
                        reps.len() - 1
                    });
                }
            }
        };
        for y in chain.drain(..) {
            group[y] = label;
        }
    }

    let mut lights: Vec<(usize, Vec<Arc>)> = reps.iter().map(|&r| (r, Vec::new())).collect();
    let mut member: HashMap<usize, usize> = HashMap::new();
    for (i, a) in arcs.iter().enumerate() {
        if group[i] != UNSET {
            lights[group[i]].1.push(*a);
            member.insert(a.p, reps[group[i]]);
            member.insert(a.c, reps[group[i]]);
        }
    }
    let heavy = arcs
        .iter()
        .filter(|a| is_heavy(a))
        .map(|a| Arc {
            p: member.get(&a.p).copied().unwrap_or(a.p),
            c: member.get(&a.c).copied().unwrap_or(a.c),
            rank: a.rank,
        })
        .collect();
    (heavy, lights)
}

/// Kruskal over the subproblem; the side of the endpoint closer to the start
/// goes left.
fn bottom_up(n: usize, arcs: &mut [Arc]) -> Part {
    arcs.sort_unstable_by_key(|a| a.rank);
    let mut local: HashMap<usize, usize> = HashMap::with_capacity(arcs.len() + 1);
    let mut top = Vec::with_capacity(arcs.len() + 1);
    let mut index = |v: usize, top: &mut Vec<usize>| {
        *local.entry(v).or_insert_with(|| {
            top.push(v);
            top.len() - 1
        })
    };
    let ends: Vec<(usize, usize)> = arcs
        .iter()
        .map(|a| (index(a.p, &mut top), index(a.c, &mut top)))
        .collect();
    let mut uf = UnionFind::new(top.len());
    let mut nodes = Vec::with_capacity(arcs.len());
    let mut root = top[0];
    for (a, &(lp, lc)) in arcs.iter().zip(&ends) {
        let (rp, rc) = (uf.find(lp), uf.find(lc));
        nodes.push((a.rank, top[rp], top[rc]));
        uf.union(rp, rc);
        root = n + a.rank;
        top[uf.find(rp)] = root;
    }
    Part { nodes, root }
}

/// One level of the heavy/light decomposition, for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct HeavyLightSplit<T> {
    /// Heavy edges with every light group contracted to its representative.
    pub heavy: Vec<Edge<T>>,
    /// `(representative, edges)` per light group.
    pub light: Vec<(usize, Vec<Edge<T>>)>,
}

/// Splits the tree rooted at `start` into its `heavy_count` heaviest edges
/// and the light groups hanging off them.
pub fn heavy_light_split<T: Scalar>(
    forest: &SpanningForest<T>,
    start: usize,
    heavy_count: usize,
) -> Result<HeavyLightSplit<T>> {
    let (sorted, mut arcs) = orient(forest, start)?;
    if heavy_count == 0 || heavy_count > arcs.len() {
        return Err(Error::NotSpanning {
            expected: arcs.len(),
            found: heavy_count,
        });
    }
    let (heavy, lights) = split(&mut arcs, heavy_count);
    let edge = |a: &Arc| Edge::new(a.p, a.c, sorted[a.rank].weight);
    let mut heavy: Vec<Edge<T>> = heavy.iter().map(edge).collect();
    heavy.sort_by(Edge::key_cmp);
    let light = lights
        .into_iter()
        .map(|(rep, sub)| {
            let mut edges: Vec<Edge<T>> = sub.iter().map(edge).collect();
            edges.sort_by(Edge::key_cmp);
            (rep, edges)
        })
        .collect();
    Ok(HeavyLightSplit { heavy, light })
}
