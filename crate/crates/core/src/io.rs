//! Text input/output and synthetic data generators.
//!
//! Real numbers are written with 17 significant digits, which is enough for
//! every `f64` to read back bit-identically. The start of a reachability plot
//! is written as `inf`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;

use crate::dendrogram::{Clustering, DendroNode, Dendrogram, ReachabilityPlot};
use crate::error::{Error, Result};
use crate::geom::Points;
use crate::mst::{Edge, SpanningForest};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pub points: Points<T>,
    pub source: Option<PathBuf>,
}

impl<T: Scalar> Dataset<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

/// Reads one point per line, comma- or whitespace-separated. A first line
/// with a non-numeric token is treated as a header; blank lines are skipped.
pub fn read_points<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut dim = 0;
    let mut coords = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let lineno = i + 1;
        let fields: Vec<&str> = tokens(&line).collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|t| t.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(parse_err(path, lineno, "non-numeric value")),
        };
        if dim == 0 {
            dim = row.len();
        } else if row.len() != dim {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {dim} columns, found {}", row.len()),
            ));
        }
        if let Some(d) = row.iter().position(|x| !x.is_finite()) {
            return Err(parse_err(
                path,
                lineno,
                format!("non-finite value in column {}", d + 1),
            ));
        }
        coords.extend(row.into_iter().map(T::from_f64_lossy));
    }
    if coords.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset {
        points: Points::new(dim, coords)?,
        source: Some(path.to_path_buf()),
    })
}

/// Comma-separated, one point per line, no header.
pub fn write_points<T: Scalar>(path: impl AsRef<Path>, points: &Points<T>) -> Result<()> {
    write_lines(
        path.as_ref(),
        (0..points.len()).map(|i| {
            let row: Vec<String> = points
                .point(i)
                .iter()
                .map(|x| fmt_real(x.as_f64()))
                .collect();
            row.join(",")
        }),
    )
}

fn side_length(n: usize) -> f64 {
    (n as f64).sqrt()
}

/// Fills `coords` row by row; row `i` draws from its own stream, so the
/// output does not depend on how rows are scheduled.
fn per_point(
    n: usize,
    dim: usize,
    seed: u64,
    f: impl Fn(usize, &mut ChaCha8Rng, &mut [f64]) + Sync,
) -> Vec<f64> {
    let mut coords = vec![0.0; n * dim];
    coords.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        f(i, &mut rng, row);
    });
    coords
}

/// `n` points uniform in `[0, sqrt(n))^dim`.
pub fn gen_uniform(n: usize, dim: usize, seed: u64) -> Result<Dataset<f64>> {
    if n == 0 || dim == 0 {
        return Err(Error::EmptyDataset);
    }
    let side = side_length(n);
    let unit = Uniform::new(0.0, side);
    let coords = per_point(n, dim, seed, |_, rng, row| {
        for x in row {
            *x = unit.sample(rng);
        }
    });
    Ok(Dataset {
        points: Points::new(dim, coords)?,
        source: None,
    })
}

/// Gaussian clusters of varying spread inside `[0, sqrt(n))^dim`.
///
/// This only approximates the seed-spreader "varden" data sets: each cluster
/// has its own density, which is what the HDBSCAN* separation test needs.
pub fn gen_varden(n: usize, dim: usize, seed: u64, clusters: usize) -> Result<Dataset<f64>> {
    if n == 0 || dim == 0 || clusters == 0 {
        return Err(Error::EmptyDataset);
    }
    let side = side_length(n);
    let mut setup = ChaCha8Rng::seed_from_u64(seed);
    setup.set_stream(u64::MAX);
    let unit = Uniform::new(0.0, 1.0);
    let spacing = side / (clusters as f64).powf(1.0 / dim as f64);
    let shapes: Vec<(Vec<f64>, Normal<f64>)> = (0..clusters)
        .map(|_| {
            let center: Vec<f64> = (0..dim)
                .map(|_| side * (0.1 + 0.8 * unit.sample(&mut setup)))
                .collect();
            // Spreads vary over a factor of 16 between clusters.
            let sigma = spacing * 0.02 * 16f64.powf(unit.sample(&mut setup));
            (center, Normal::new(0.0, sigma).expect("positive sigma"))
        })
        .collect();
    let coords = per_point(n, dim, seed, |i, rng, row| {
        let (center, normal) = &shapes[i % clusters];
        for (x, c) in row.iter_mut().zip(center) {
            *x = c + normal.sample(rng);
        }
    });
    Ok(Dataset {
        points: Points::new(dim, coords)?,
        source: None,
    })
}

/// `printf("%.17g")`: 17 significant digits, trailing zeros removed.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_real(path: &Path, line: usize, token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("invalid number {token:?}")))
}

fn parse_int<I: std::str::FromStr>(path: &Path, line: usize, token: &str) -> Result<I> {
    token
        .parse::<I>()
        .map_err(|_| parse_err(path, line, format!("invalid integer {token:?}")))
}

fn write_lines(path: &Path, lines: impl Iterator<Item = String>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for line in lines {
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// Non-empty lines as `(line number, fields)`, each with exactly `width` fields.
fn read_rows(path: &Path, width: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let fields: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != width {
            return Err(parse_err(
                path,
                i + 1,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

/// `u v weight` per line, sorted by `(weight, u, v)`.
pub fn write_mst<T: Scalar>(path: impl AsRef<Path>, forest: &SpanningForest<T>) -> Result<()> {
    let edges = forest.sorted_edges();
    write_lines(
        path.as_ref(),
        edges
            .iter()
            .map(|e| format!("{} {} {}", e.u, e.v, fmt_real(e.weight.as_f64()))),
    )
}

/// Reads a spanning tree written by [`write_mst`]; the point count is one
/// more than the edge count.
pub fn read_mst(path: impl AsRef<Path>) -> Result<SpanningForest<f64>> {
    let path = path.as_ref();
    let mut edges = Vec::new();
    for (line, f) in read_rows(path, 3)? {
        let u = parse_int(path, line, &f[0])?;
        let v = parse_int(path, line, &f[1])?;
        edges.push(Edge::new(u, v, parse_real(path, line, &f[2])?));
    }
    Ok(SpanningForest::from_edges(edges.len() + 1, edges))
}

/// Header `n`, then `id left right height size` for all `2n - 1` nodes;
/// leaves are `i -1 -1 0 1`.
pub fn write_dendrogram<T: Scalar>(path: impl AsRef<Path>, dendro: &Dendrogram<T>) -> Result<()> {
    let header = std::iter::once(dendro.num_points().to_string());
    let body = dendro
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, node)| match node.children {
            None => format!("{id} -1 -1 0 1"),
            Some((l, r)) => format!(
                "{id} {l} {r} {} {}",
                fmt_real(node.height.as_f64()),
                node.size
            ),
        });
    write_lines(path.as_ref(), header.chain(body))
}

/// Reads a dendrogram written by [`write_dendrogram`] and validates it.
/// Split edges are not stored in the file and come back as `None`.
pub fn read_dendrogram(path: impl AsRef<Path>) -> Result<Dendrogram<f64>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut lines = reader.lines();
    let first = lines
        .next()
        .ok_or(Error::EmptyDataset)?
        .map_err(io_err(path))?;
    let n: usize = parse_int(path, 1, first.trim())?;
    let mut nodes = Vec::with_capacity(2 * n);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(io_err(path))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != 5 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 5 fields, found {}", f.len()),
            ));
        }
        let id: usize = parse_int(path, lineno, f[0])?;
        if id != nodes.len() {
            return Err(parse_err(
                path,
                lineno,
                format!("expected node {}, found {id}", nodes.len()),
            ));
        }
        let (l, r): (i64, i64) = (
            parse_int(path, lineno, f[1])?,
            parse_int(path, lineno, f[2])?,
        );
        let children = match (l, r) {
            (-1, -1) => None,
            (l, r) if l >= 0 && r >= 0 => Some((l as usize, r as usize)),
            _ => return Err(parse_err(path, lineno, "invalid child ids")),
        };
        nodes.push(DendroNode {
            children,
            height: parse_real(path, lineno, f[3])?,
            size: parse_int(path, lineno, f[4])?,
            edge: None,
        });
    }
    Dendrogram::from_nodes(n, nodes)
}

/// `point_id value` in plot order; the first value is `inf`.
pub fn write_reachability<T: Scalar>(
    path: impl AsRef<Path>,
    plot: &ReachabilityPlot<T>,
) -> Result<()> {
    write_lines(
        path.as_ref(),
        plot.iter()
            .map(|(p, v)| format!("{p} {}", fmt_real(v.as_f64()))),
    )
}

pub fn read_reachability(path: impl AsRef<Path>) -> Result<ReachabilityPlot<f64>> {
    let path = path.as_ref();
    let mut order = Vec::new();
    let mut values = Vec::new();
    for (line, f) in read_rows(path, 2)? {
        order.push(parse_int(path, line, &f[0])?);
        values.push(parse_real(path, line, &f[1])?);
    }
    Ok(ReachabilityPlot { order, values })
}

/// `point_id label` per point; noise is `-1`.
pub fn write_clustering<T: Scalar>(
    path: impl AsRef<Path>,
    clustering: &Clustering<T>,
) -> Result<()> {
    write_lines(
        path.as_ref(),
        clustering
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{i} {l}")),
    )
}

/// Labels indexed by point id.
pub fn read_clustering(path: impl AsRef<Path>) -> Result<Vec<i64>> {
    let path = path.as_ref();
    let rows = read_rows(path, 2)?;
    let mut labels = vec![0; rows.len()];
    for (line, f) in rows {
        let id: usize = parse_int(path, line, &f[0])?;
        if id >= labels.len() {
            return Err(parse_err(path, line, format!("point id {id} out of range")));
        }
        labels[id] = parse_int(path, line, &f[1])?;
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_real(5.0), "5");
        assert_eq!(fmt_real(0.1), "0.10000000000000001");
        assert_eq!(fmt_real(-2.5), "-2.5");
        assert_eq!(fmt_real(1e20), "1e+20");
        assert_eq!(fmt_real(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(fmt_real(123456789.0), "123456789");
        assert_eq!(fmt_real(f64::INFINITY), "inf");
        assert_eq!(fmt_real(0.0), "0");
    }

    #[test]
    fn g17_round_trips() {
        for x in [
            std::f64::consts::PI,
            1.0 / 3.0,
            2f64.sqrt() * 1e-300,
            6.02214076e23,
            f64::MAX,
            1e-5,
        ] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }
}
