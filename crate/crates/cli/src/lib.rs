//! The `lts` command line: simplify, diagram, curve, synth, verify, bench and serve.
//!
//! Exit codes are 0 on success, 1 when `verify` finds a violation and 2 for
//! usage errors and every other failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lts_core::criticality::extrema;
use lts_core::engine::{simplify_field, ConstraintSet, PhaseTimings, SimplifyOptions, SimplifyReport};
use lts_core::io::{
    read_field, read_preserve_list, synth_field, write_curve_json, write_diagram_json, write_sfg, write_sfgb,
    GridField, SynthSpec,
};
use lts_core::oracle::oracle_pairs_sweep;
use lts_core::order::compute_order_field;
use lts_core::persistence::{
    compute_extremum_saddle_pairs, full_diagram, persistence_curve, persistence_simplify, PersistencePair, Polarity,
};
use serde::Serialize;

/// A threshold in field units, or in percent of the value range with a `%` suffix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Absolute(f64),
    Percent(f64),
}

impl FromStr for Epsilon {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (num, pct) = match s.trim().strip_suffix('%') {
            Some(n) => (n, true),
            None => (s.trim(), false),
        };
        let v: f64 = num.parse().map_err(|_| format!("`{s}` is not a number"))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(format!("epsilon must be finite and non-negative, got `{s}`"));
        }
        Ok(if pct { Self::Percent(v) } else { Self::Absolute(v) })
    }
}

impl Epsilon {
    pub fn resolve(self, range: f64) -> f64 {
        match self {
            Self::Absolute(v) => v,
            Self::Percent(p) => p / 100.0 * range,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lts", version, about = "Localized topological simplification of scalar fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolarityArg {
    Max,
    Min,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Remove extrema below a persistence threshold or outside a preserve list.
    Simplify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, conflicts_with = "preserve", required_unless_present = "preserve")]
        epsilon: Option<Epsilon>,
        /// File with one vertex id per line; listed minima and maxima are kept.
        #[arg(long)]
        preserve: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Leave extrema strictly inside flattened regions flattened.
        #[arg(long)]
        no_restore: bool,
    },
    /// Extremum-saddle pairs, all of them or those below a threshold.
    Diagram {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: Option<Epsilon>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        polarity: PolarityArg,
    },
    /// Number of pairs at least as persistent as each threshold.
    Curve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate a field from a JSON synthesis spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Check a simplified field against its original with the reference sweep.
    Verify {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        simplified: PathBuf,
        #[arg(long)]
        epsilon: Epsilon,
    },
    /// Per-phase timings of a threshold simplification at several thread counts.
    Bench {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        threads: Vec<usize>,
        #[arg(long)]
        epsilon: Epsilon,
        /// Runs per thread count; the fastest is kept.
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Start the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        max_vertices: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Simplify { input, epsilon, preserve, output, report, threads, no_restore } => {
            let opts = SimplifyOptions { restore_interior_extrema: !no_restore, thread_count: threads, ..Default::default() };
            simplify(&input, epsilon, preserve.as_deref(), &output, report.as_deref(), &opts)?;
            Ok(0)
        }
        Command::Diagram { input, epsilon, output, polarity } => {
            let grid = load(&input)?;
            let pairs = diagram(&grid, epsilon, polarity)?;
            write(&output, write_diagram_json(&pairs))?;
            Ok(0)
        }
        Command::Curve { input, output } => {
            let grid = load(&input)?;
            let pairs = full_diagram(&grid.mesh(), &grid.field)?;
            write(&output, write_curve_json(&persistence_curve(&pairs)))?;
            Ok(0)
        }
        Command::Synth { spec, output } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: SynthSpec = serde_json::from_str(&text).context("parsing synthesis spec")?;
            let grid = synth_field(&spec)?;
            write_field(&output, &grid)?;
            Ok(0)
        }
        Command::Verify { original, simplified, epsilon } => {
            let (f, g) = (load(&original)?, load(&simplified)?);
            let eps = epsilon.resolve(f.field.range());
            let violations = verify(&f, &g, eps)?;
            if violations.is_empty() {
                println!("ok: deviation {} within {eps}", f.field.max_abs_diff(&g.field));
                Ok(0)
            } else {
                for v in &violations {
                    eprintln!("violation: {v}");
                }
                Ok(1)
            }
        }
        Command::Bench { input, threads, epsilon, repeat, output } => {
            let grid = load(&input)?;
            let json = serde_json::to_string_pretty(&bench(&grid, &threads, epsilon, repeat.max(1))?)?;
            match output {
                Some(p) => write(&p, json)?,
                None => println!("{json}"),
            }
            Ok(0)
        }
        Command::Serve { port, host, data_dir, max_vertices, workers } => {
            let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
            let mut config = lts_server::Config { data_dir, ..Default::default() };
            if let Some(n) = max_vertices {
                config.max_vertices = n;
            }
            if let Some(w) = workers {
                config.workers = w;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(lts_server::serve((host, port).into(), config))?;
            Ok(0)
        }
    }
}

fn load(path: &Path) -> Result<GridField> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_field(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("sfgb"))
}

fn write_field(path: &Path, grid: &GridField) -> Result<()> {
    if is_binary(path) {
        write(path, write_sfgb(&grid.dims, grid.field.values()))
    } else {
        write(path, write_sfg(&grid.dims, grid.field.values()))
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportFile<'a> {
    epsilon: Option<f64>,
    removed_pairs: Option<usize>,
    #[serde(flatten)]
    report: &'a SimplifyReport,
}

fn simplify(
    input: &Path,
    epsilon: Option<Epsilon>,
    preserve: Option<&Path>,
    output: &Path,
    report: Option<&Path>,
    opts: &SimplifyOptions,
) -> Result<()> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let grid = read_field(&bytes).with_context(|| format!("parsing {}", input.display()))?;
    let mesh = grid.mesh();
    let (out, eps, removed) = match (epsilon, preserve) {
        (Some(e), _) => {
            let eps = e.resolve(grid.field.range());
            let r = persistence_simplify(&mesh, &grid.field, eps, opts)?;
            let n = r.pairs.len();
            (r.simplified, Some(eps), Some(n))
        }
        (None, Some(list)) => {
            let text = fs::read_to_string(list).with_context(|| format!("reading {}", list.display()))?;
            let keep = read_preserve_list(&text, grid.field.len())?;
            let order = compute_order_field(&grid.field);
            let (minima, maxima) = extrema(&mesh, &order);
            if let Some(v) = keep.iter().find(|v| minima.binary_search(v).is_err() && maxima.binary_search(v).is_err()) {
                bail!("preserved vertex {v} is not an extremum");
            }
            let c = ConstraintSet::new(
                keep.iter().copied().filter(|v| minima.binary_search(v).is_ok()),
                keep.iter().copied().filter(|v| maxima.binary_search(v).is_ok()),
            );
            (simplify_field(&mesh, &grid.field, &c, opts)?, None, None)
        }
        (None, None) => bail!("one of --epsilon or --preserve is required"),
    };
    let unchanged = out.field.values().iter().zip(grid.field.values()).all(|(a, b)| a.to_bits() == b.to_bits());
    if unchanged && is_binary(output) == bytes.starts_with(b"SFGB") {
        // keep the input's exact formatting
        write(output, &bytes)?;
    } else {
        write_field(output, &GridField { dims: grid.dims.clone(), field: out.field.clone() })?;
    }
    if let Some(path) = report {
        let file = ReportFile { epsilon: eps, removed_pairs: removed, report: &out.report };
        write(path, serde_json::to_string_pretty(&file)?)?;
    }
    Ok(())
}

fn diagram(grid: &GridField, epsilon: Option<Epsilon>, polarity: PolarityArg) -> Result<Vec<PersistencePair>> {
    let mesh = grid.mesh();
    let wanted = |p: Polarity| match polarity {
        PolarityArg::Max => p == Polarity::MaxSaddle,
        PolarityArg::Min => p == Polarity::MinSaddle,
        PolarityArg::Both => true,
    };
    let Some(e) = epsilon else {
        let mut pairs = full_diagram(&mesh, &grid.field)?;
        pairs.retain(|p| wanted(p.polarity));
        return Ok(pairs);
    };
    let eps = e.resolve(grid.field.range());
    let order = compute_order_field(&grid.field);
    let mut pairs = Vec::new();
    for p in [Polarity::MaxSaddle, Polarity::MinSaddle].into_iter().filter(|&p| wanted(p)) {
        pairs.extend(compute_extremum_saddle_pairs(&mesh, &grid.field, &order, p, eps)?.pairs);
    }
    Ok(pairs)
}

/// Violations of the threshold contract, checked with the reference sweep:
/// `g` stays within `eps` of `f` and keeps no pair less persistent than `eps`.
pub fn verify(f: &GridField, g: &GridField, eps: f64) -> Result<Vec<String>> {
    if f.dims != g.dims {
        bail!("dimensions differ: {:?} vs {:?}", f.dims, g.dims);
    }
    let mut out = Vec::new();
    let dev = f.field.max_abs_diff(&g.field);
    if dev > eps {
        out.push(format!("deviation {dev} exceeds {eps}"));
    }
    let mesh = g.mesh();
    let order = compute_order_field(&g.field);
    for polarity in [Polarity::MaxSaddle, Polarity::MinSaddle] {
        for p in oracle_pairs_sweep(&mesh, &g.field, &order, polarity) {
            if p.saddle_vertex.is_some() && p.persistence < eps {
                out.push(format!(
                    "pair ({}, {}) of persistence {} survives",
                    p.extremum_vertex,
                    p.saddle_vertex.unwrap_or_default(),
                    p.persistence
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRun {
    pub threads: usize,
    pub timings: PhaseTimings,
    pub region_count: usize,
    pub max_iteration_count: usize,
    /// Engine-phase time of the first entry divided by this one's.
    pub engine_speedup: f64,
    pub total_speedup: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub dims: Vec<usize>,
    pub epsilon: f64,
    pub runs: Vec<BenchRun>,
}

fn bench(grid: &GridField, threads: &[usize], epsilon: Epsilon, repeat: usize) -> Result<BenchReport> {
    if threads.is_empty() || threads.contains(&0) {
        bail!("--threads needs positive counts");
    }
    let mesh = grid.mesh();
    let eps = epsilon.resolve(grid.field.range());
    let mut runs: Vec<BenchRun> = Vec::new();
    for &t in threads {
        let opts = SimplifyOptions { thread_count: Some(t), ..Default::default() };
        let mut best: Option<SimplifyReport> = None;
        for _ in 0..repeat {
            let r = persistence_simplify(&mesh, &grid.field, eps, &opts)?.simplified.report;
            if best.as_ref().is_none_or(|b| r.timings.total < b.timings.total) {
                best = Some(r);
            }
        }
        let r = best.expect("repeat is positive");
        let (engine, total) = runs
            .first()
            .map_or((r.timings.engine(), r.timings.total), |b| (b.timings.engine(), b.timings.total));
        runs.push(BenchRun {
            threads: t,
            engine_speedup: engine / r.timings.engine(),
            total_speedup: total / r.timings.total,
            region_count: r.region_count,
            max_iteration_count: r.max_iteration_count,
            timings: r.timings,
        });
    }
    Ok(BenchReport { dims: grid.dims.clone(), epsilon: eps, runs })
}
