//! Command-line front end: argument parsing, pipelines and the benchmark.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use parclust_core::io::{
    gen_uniform, gen_varden, read_points, write_clustering, write_dendrogram, write_mst,
    write_reachability,
};
use parclust_core::{
    core_distances, cut, dendrogram_parallel, memogfk, mst_naive, reachability_plot,
    single_linkage_cut, CoreDistances64, Dataset, KdTree, KdTree64, Metric, MstRun, MstStats,
    SeparationPredicate,
};

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "PARCLUST_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "parclust",
    version,
    about = "Parallel EMST, HDBSCAN* and single-linkage clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Euclidean minimum spanning tree.
    Emst(RunArgs),
    /// HDBSCAN* MST, dendrogram and reachability plot; clusters with --epsilon.
    Hdbscan(RunArgs),
    /// EMST dendrogram and reachability plot; clusters with --epsilon.
    SingleLinkage(RunArgs),
    /// Phase timings as TSV on standard output.
    Bench(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Emst(a)
            | Command::Hdbscan(a)
            | Command::SingleLinkage(a)
            | Command::Bench(a) => a,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Emst(_) => "emst",
            Command::Hdbscan(_) => "hdbscan",
            Command::SingleLinkage(_) => "single-linkage",
            Command::Bench(_) => "bench",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Point file, one point per line, comma- or whitespace-separated.
    #[arg(long, required_unless_present = "gen", conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    /// Generator: `uniform:N:D[:seed=S]` or `varden:N:D[:seed=S][:clusters=K]`.
    #[arg(long)]
    pub gen: Option<GenSpec>,
    /// Density parameter; neighbors counted including the point itself.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub minpts: u64,
    /// Cut height for a flat clustering.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_epsilon)]
    pub epsilon: Option<f64>,
    /// MST driver; gantao runs HDBSCAN* with standard separation.
    #[arg(long, value_enum, default_value_t = Algo::Memogfk)]
    pub algo: Algo,
    /// Start point of the reachability plot.
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Worker threads; a comma-separated list runs the benchmark once per entry.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Vec<u64>,
    /// Generator seed, used when the generator spec has none.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path prefix.
    #[arg(long, short, default_value = "parclust")]
    pub output: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Naive,
    Gfk,
    Memogfk,
    Gantao,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Uniform,
    Varden { clusters: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub kind: Generator,
    pub n: usize,
    pub dim: usize,
    pub seed: Option<u64>,
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let mut number = |what: &str| -> Result<usize, String> {
            let tok = parts.next().ok_or_else(|| format!("missing {what}"))?;
            tok.parse().map_err(|_| format!("invalid {what} {tok:?}"))
        };
        let n = number("point count")?;
        let dim = number("dimension")?;
        let mut seed = None;
        let mut clusters = None;
        for opt in parts {
            match opt.split_once('=') {
                Some(("seed", v)) => {
                    seed = Some(v.parse().map_err(|_| format!("invalid seed {v:?}"))?)
                }
                Some(("clusters", v)) => {
                    clusters = Some(
                        v.parse()
                            .map_err(|_| format!("invalid cluster count {v:?}"))?,
                    )
                }
                _ => return Err(format!("unknown generator option {opt:?}")),
            }
        }
        if n == 0 || dim == 0 {
            return Err("point count and dimension must be positive".into());
        }
        let kind = match kind {
            "uniform" if clusters.is_none() => Generator::Uniform,
            "uniform" => return Err("clusters= applies to varden only".into()),
            "varden" => Generator::Varden {
                clusters: clusters.unwrap_or(10).max(1),
            },
            other => return Err(format!("unknown generator {other:?}")),
        };
        Ok(GenSpec { kind, n, dim, seed })
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Generator::Uniform => write!(f, "uniform:{}:{}", self.n, self.dim)?,
            Generator::Varden { clusters } => {
                write!(f, "varden:{}:{}:clusters={clusters}", self.n, self.dim)?
            }
        }
        if let Some(s) = self.seed {
            write!(f, ":seed={s}")?;
        }
        Ok(())
    }
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    let eps: f64 = s.parse().map_err(|_| format!("invalid number {s:?}"))?;
    if eps >= 0.0 {
        Ok(eps)
    } else {
        Err("epsilon must be non-negative".into())
    }
}

/// Flag combinations clap cannot express. The message is meant to be shown
/// with the usage text.
pub fn validate(cmd: &Command) -> Result<(), String> {
    let args = cmd.args();
    let name = cmd.name();
    match cmd {
        Command::Emst(_) | Command::SingleLinkage(_) if args.algo == Algo::Gantao => Err(format!(
            "--algo gantao needs core distances; use it with hdbscan or bench, not {name}"
        )),
        Command::Emst(_) if args.epsilon.is_some() => Err("--epsilon has no effect on emst".into()),
        Command::Bench(_) if args.epsilon.is_some() => {
            Err("--epsilon has no effect on bench".into())
        }
        Command::Bench(_) => Ok(()),
        _ if args.threads.len() > 1 => Err(format!(
            "only bench accepts a list of thread counts, not {name}"
        )),
        _ => Ok(()),
    }
}

/// Thread counts from the flag, else the environment, else all cores.
pub fn thread_counts(args: &RunArgs) -> anyhow::Result<Vec<usize>> {
    if !args.threads.is_empty() {
        return Ok(args.threads.iter().map(|&t| t as usize).collect());
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let t: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV}={v:?}"))?;
            if t == 0 {
                bail!("{THREADS_ENV} must be positive");
            }
            Ok(vec![t])
        }
        Err(_) => Ok(vec![
            std::thread::available_parallelism().map_or(1, |n| n.get())
        ]),
    }
}

pub fn load(args: &RunArgs) -> anyhow::Result<Dataset<f64>> {
    match (&args.input, &args.gen) {
        (Some(path), _) => Ok(read_points(path)?),
        (None, Some(spec)) => {
            let seed = spec.seed.or(args.seed).unwrap_or(0);
            Ok(match spec.kind {
                Generator::Uniform => gen_uniform(spec.n, spec.dim, seed)?,
                Generator::Varden { clusters } => gen_varden(spec.n, spec.dim, seed, clusters)?,
            })
        }
        (None, None) => bail!("one of --input or --gen is required"),
    }
}

/// Wall time per phase plus the largest number of pairs held at once.
#[derive(Clone, Debug, Default)]
pub struct Timings {
    pub tree_build: Duration,
    pub core_dist: Duration,
    pub wspd: Duration,
    pub bccp: Duration,
    pub kruskal: Duration,
    pub dendrogram: Duration,
    pub pairs: usize,
}

impl Timings {
    fn absorb(&mut self, stats: &MstStats) {
        self.wspd += stats.traversal_time;
        self.bccp += stats.bccp_time;
        self.kruskal += stats.kruskal_time;
        self.pairs = stats.peak_materialized;
    }

    pub fn rows(&self) -> [(&'static str, Duration); 6] {
        [
            ("tree-build", self.tree_build),
            ("core-dist", self.core_dist),
            ("wspd", self.wspd),
            ("bccp", self.bccp),
            ("kruskal", self.kruskal),
            ("dendrogram", self.dendrogram),
        ]
    }
}

/// Files written by [`run`].
#[derive(Clone, Debug, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
    pub timings: Timings,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn mst(tree: &KdTree64, core: Option<&CoreDistances64>, algo: Algo) -> anyhow::Result<MstRun<f64>> {
    let standard = SeparationPredicate::standard();
    let (pred, metric) = match (core, algo) {
        (None, _) => (standard, Metric::Euclidean),
        (Some(core), Algo::Gantao) => (standard, Metric::MutualReachability(core)),
        (Some(core), _) => (
            SeparationPredicate::Hdbscan { core },
            Metric::MutualReachability(core),
        ),
    };
    Ok(match algo {
        Algo::Naive => mst_naive(tree, &pred, &metric)?,
        Algo::Gfk => parclust_core::gfk(tree, parclust_core::wspd(tree, &pred)?, &metric)?,
        Algo::Memogfk | Algo::Gantao => memogfk(tree, &pred, &metric)?,
    })
}

/// Everything a command computes, before anything is written.
struct Outcome {
    run: MstRun<f64>,
    core: Option<CoreDistances64>,
    dendro: Option<parclust_core::OrderedDendrogram<f64>>,
    timings: Timings,
}

fn compute(
    data: &Dataset<f64>,
    args: &RunArgs,
    hdbscan: bool,
    dendrogram: bool,
) -> anyhow::Result<Outcome> {
    let mut timings = Timings::default();
    let t = Instant::now();
    let tree = KdTree::build(&data.points, 1)?;
    timings.tree_build = t.elapsed();

    let core = if hdbscan {
        let t = Instant::now();
        let core = core_distances(&tree, args.minpts as usize)
            .with_context(|| format!("--minpts {} with {} points", args.minpts, tree.len()))?;
        timings.core_dist = t.elapsed();
        Some(core)
    } else {
        None
    };
    let run = mst(&tree, core.as_ref(), args.algo)?;
    timings.absorb(&run.stats);

    let dendro = if dendrogram {
        let t = Instant::now();
        let d = dendrogram_parallel(&run.forest, args.start)
            .with_context(|| format!("--start {}", args.start))?;
        timings.dendrogram = t.elapsed();
        Some(d)
    } else {
        None
    };
    Ok(Outcome {
        run,
        core,
        dendro,
        timings,
    })
}

fn pool(threads: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?)
}

/// Runs `emst`, `hdbscan` or `single-linkage` and writes its output files.
pub fn run(cmd: &Command) -> anyhow::Result<Written> {
    validate(cmd).map_err(anyhow::Error::msg)?;
    let args = cmd.args();
    let threads = thread_counts(args)?;
    pool(threads[0])?.install(|| run_inner(cmd))
}

fn run_inner(cmd: &Command) -> anyhow::Result<Written> {
    let args = cmd.args();
    let data = load(args)?;
    let (hdbscan, dendro) = match cmd {
        Command::Emst(_) => (false, false),
        Command::Hdbscan(_) => (true, true),
        Command::SingleLinkage(_) => (false, true),
        Command::Bench(_) => bail!("bench writes no files"),
    };
    let out = compute(&data, args, hdbscan, dendro)?;
    let mut files = Vec::new();
    let mut emit =
        |suffix: &str, f: &dyn Fn(&Path) -> parclust_core::Result<()>| -> anyhow::Result<()> {
            let path = with_suffix(&args.output, suffix);
            f(&path)?;
            files.push(path);
            Ok(())
        };
    emit(".mst", &|p| write_mst(p, &out.run.forest))?;
    if let Some(od) = &out.dendro {
        emit(".dendro", &|p| write_dendrogram(p, &od.dendrogram))?;
        emit(".reach", &|p| write_reachability(p, &reachability_plot(od)))?;
        if let Some(eps) = args.epsilon {
            let clusters = match &out.core {
                Some(core) => cut(&od.dendrogram, core, eps)?,
                None => single_linkage_cut(&od.dendrogram, eps)?,
            };
            emit(".clusters", &|p| write_clustering(p, &clusters))?;
        }
    }
    Ok(Written {
        files,
        timings: out.timings,
    })
}

pub const BENCH_HEADER: &str = "phase\tseconds\tthreads\tpairs";

/// One TSV block per thread count: every phase of the HDBSCAN* pipeline
/// (the EMST pipeline when `--minpts 1`), including the dendrogram.
pub fn bench(args: &RunArgs, out: &mut impl Write) -> anyhow::Result<()> {
    validate(&Command::Bench(args.clone())).map_err(anyhow::Error::msg)?;
    let data = load(args)?;
    let hdbscan = args.minpts > 1 || args.algo == Algo::Gantao;
    writeln!(out, "{BENCH_HEADER}")?;
    for threads in thread_counts(args)? {
        let outcome = pool(threads)?.install(|| compute(&data, args, hdbscan, true))?;
        let t = &outcome.timings;
        for (phase, d) in t.rows() {
            writeln!(
                out,
                "{phase}\t{:.6}\t{threads}\t{}",
                d.as_secs_f64(),
                t.pairs
            )?;
        }
    }
    Ok(())
}
