//! The `xychain` command-line tool.
//!
//! Every command expands its configuration into independent `(N, λ)` work
//! items, evaluates them on a rayon pool of the requested size (results are
//! collected in grid order, so the output does not depend on the worker
//! count), and writes a CSV table plus a JSON sidecar.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::cache::{cached, version_tag, Cache, CacheKey, CACHE_DIR_ENV};
use crate::config::{parse_list, FileConfig, LambdaGrid, Observable, SweepConfig};
use crate::ed;
use crate::entanglement::{entropy_spaced_with, gamma_transform, PurityTable};
use crate::error::{Error, Result};
use crate::export::{sidecar_path, write_atomic, Block, Cell, Table};
use crate::model::{majorana_covariance, MajoranaCovariance, ModelParams, Sector};
use crate::noise::{quasimomentum_from, separability_threshold, zero_mode_noise_with};
use crate::scaling::{collapse_quality, find_peak, fit_model, fit_model_small, rescale_curves, Curve, FitModel};

/// Shift applied to λ when the requested point puts an exact zero mode on
/// the momentum grid.
pub const LAMBDA_PERTURBATION: f64 = 1e-9;

/// Tolerance of the `oracle-check` comparisons.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "xychain",
    version,
    about = "Entanglement and noise correlations of the periodic XY chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generalized tangles T_1..T_4 against λ.
    Tangle(SweepArgs),
    /// Entropy S_4(L) of four spins spaced L apart.
    Entropy {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Comma-separated spacings L.
        #[arg(long)]
        spacings: Option<String>,
    },
    /// n(0), Δ(0,0) and the separability threshold (1+N)/8.
    Noise(SweepArgs),
    /// T_4 peaks, Γ = 1/(T_4 - π/2) and the finite-size collapse.
    Collapse {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Comma-separated correlation-length exponents to score.
        #[arg(long)]
        nu: Option<String>,
    },
    /// Order parameter √⟨σˣ_0 σˣ_{N/2}⟩ and its power-law fit.
    Mx {
        #[command(flatten)]
        sweep: SweepArgs,
        /// λ window `lo:hi` of the fit of m_x against 1 - λ.
        #[arg(long)]
        fit_window: Option<String>,
    },
    /// Compare the free-fermion pipeline against exact diagonalization.
    OracleCheck {
        /// Comma-separated sizes (each ≤ 12).
        #[arg(long = "N", alias = "sizes")]
        sizes: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug, Args, Clone, Default)]
pub struct SweepArgs {
    /// TOML file with defaults for any of the options below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Anisotropy γ ∈ [0, 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// System size(s), comma-separated.
    #[arg(long = "N", alias = "sizes")]
    pub sizes: Option<String>,
    /// `start:stop:step` (inclusive) or a comma-separated list.
    #[arg(long)]
    pub lambda: Option<String>,
    /// CSV output path; a `.json` sidecar is written next to it. Without
    /// it the table goes to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Result cache directory (overridden by $XYCHAIN_CACHE_DIR).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Skip subset classes wider than this (exploratory runs only).
    #[arg(long)]
    pub max_extent: Option<usize>,
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_command(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_command(command: Command) -> Result<()> {
    // Dense eigensolvers run sequentially so oracle numbers do not depend on
    // the thread count.
    faer::set_global_parallelism(faer::Par::Seq);
    match command {
        Command::Tangle(s) => {
            let cfg = resolve(Observable::Tangle, &s, None, None, None)?;
            execute(&cfg, tangle_table)
        }
        Command::Entropy { sweep, spacings } => {
            let cfg = resolve(Observable::Entropy, &sweep, spacings.as_deref(), None, None)?;
            execute(&cfg, entropy_table)
        }
        Command::Noise(s) => {
            let cfg = resolve(Observable::Noise, &s, None, None, None)?;
            execute(&cfg, noise_table)
        }
        Command::Collapse { sweep, nu } => {
            let cfg = resolve(Observable::Collapse, &sweep, None, nu.as_deref(), None)?;
            execute(&cfg, collapse_table)
        }
        Command::Mx { sweep, fit_window } => {
            let cfg = resolve(Observable::Mx, &sweep, None, None, fit_window.as_deref())?;
            execute(&cfg, mx_table)
        }
        Command::OracleCheck { sizes, output, workers } => {
            let sizes = match sizes {
                Some(s) => parse_list(&s)?,
                None => vec![6, 8, 10, 12],
            };
            let workers = workers.unwrap_or_else(default_workers);
            with_pool(workers, || oracle_check(&sizes, output))
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Merges flags over the optional config file.
pub fn resolve(
    observable: Observable,
    args: &SweepArgs,
    spacings: Option<&str>,
    nu: Option<&str>,
    fit_window: Option<&str>,
) -> Result<SweepConfig> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let sizes = match &args.sizes {
        Some(s) => parse_list(s)?,
        None => file
            .sizes
            .clone()
            .ok_or_else(|| Error::Config("no system size given (--N)".into()))?,
    };
    let grid: LambdaGrid = match &args.lambda {
        Some(s) => s.parse()?,
        None => file
            .lambda
            .as_ref()
            .ok_or_else(|| Error::Config("no λ grid given (--lambda)".into()))?
            .grid()?,
    };
    let spacings = match spacings {
        Some(s) => parse_list(s)?,
        None => file.spacings.clone().unwrap_or_default(),
    };
    let nu = match nu {
        Some(s) => parse_list(s)?,
        None => file.nu.clone().unwrap_or_else(|| vec![1.0, 2.0]),
    };
    let fit_window = match fit_window {
        Some(s) => {
            let v: Vec<f64> = s
                .split(':')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad fit window {s:?}")))
                })
                .collect::<Result<_>>()?;
            if v.len() != 2 {
                return Err(Error::Config(format!("fit window {s:?} is not lo:hi")));
            }
            [v[0], v[1]]
        }
        None => file.fit_window.unwrap_or([0.5, 0.95]),
    };
    let cache_dir = std::env::var_os(CACHE_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| args.cache_dir.clone())
        .or_else(|| file.cache_dir.clone());
    let cfg = SweepConfig {
        observable,
        gamma: args.gamma.or(file.gamma).unwrap_or(1.0),
        sizes,
        lambdas: grid.points()?,
        spacings,
        nu,
        fit_window,
        max_extent: args.max_extent.or(file.max_extent),
        output: args.output.clone().or_else(|| file.output.clone()),
        cache_dir,
        workers: args.workers.or(file.workers).unwrap_or_else(default_workers),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(f)
}

/// A finished command: the table plus extra sidecar content.
pub struct Output {
    pub table: Table,
    pub summary: serde_json::Value,
}

fn execute(cfg: &SweepConfig, build: fn(&SweepConfig, Option<&Cache>) -> Result<Output>) -> Result<()> {
    let cache = cfg.cache_dir.as_ref().map(Cache::open).transpose()?;
    let out = with_pool(cfg.workers, || build(cfg, cache.as_ref()))?;
    if let Some(c) = &cache {
        use std::sync::atomic::Ordering::Relaxed;
        log::info!(
            "cache {}: {} hits, {} misses",
            c.root().display(),
            c.stats.hits.load(Relaxed),
            c.stats.misses.load(Relaxed)
        );
    }
    let mut table = out.table;
    let mut meta = vec![
        ("tool".to_string(), format!("xychain {}", version_tag())),
        ("command".to_string(), cfg.observable.to_string()),
        ("config_digest".to_string(), cfg.digest()),
        ("gamma".to_string(), format!("{}", cfg.gamma)),
        (
            "sizes".to_string(),
            cfg.sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        ),
        ("lambda_points".to_string(), cfg.lambdas.len().to_string()),
        (
            "units".to_string(),
            "lambda = h/J; entropies in bits; momenta q in units of 2π/N".to_string(),
        ),
    ];
    if let Some(m) = cfg.max_extent {
        meta.push(("max_extent".to_string(), format!("{m} (truncated, exploratory)")));
    }
    meta.append(&mut table.metadata);
    table.metadata = meta;
    let text = table.render()?;
    match &cfg.output {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            let sidecar = json!({
                "tool": "xychain",
                "version": version_tag(),
                "config": cfg,
                "config_digest": cfg.digest(),
                "columns": table.columns,
                "summary": out.summary,
            });
            let pretty = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
            write_atomic(&sidecar_path(path), pretty.as_bytes())?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

/// The ground state at `λ`, nudged by [`LAMBDA_PERTURBATION`] if `λ` hits an
/// exact zero mode.
pub struct Point {
    pub params: ModelParams,
    pub requested: f64,
    pub cov: MajoranaCovariance,
}

impl Point {
    pub fn new(n: usize, gamma: f64, lambda: f64) -> Result<Self> {
        let (params, cov) = with_perturbation(lambda, |l| {
            let params = ModelParams::new(n, gamma, l)?;
            Ok((params, majorana_covariance(&params)?))
        })?;
        Ok(Self {
            params,
            requested: lambda,
            cov,
        })
    }

    fn sector_code(&self) -> f64 {
        match self.cov.sector() {
            Sector::Antiperiodic => 0.0,
            Sector::Periodic => 1.0,
        }
    }
}

/// Runs `f(λ)`, retrying once at `λ + LAMBDA_PERTURBATION` if `λ` puts a
/// zero mode in the ground-state sector.
pub fn with_perturbation<T>(lambda: f64, f: impl Fn(f64) -> Result<T>) -> Result<T> {
    match f(lambda) {
        Err(Error::DegenerateMode { momentum }) => {
            log::warn!("zero mode at k = {momentum} for λ = {lambda}; using λ + {LAMBDA_PERTURBATION}");
            f(lambda + LAMBDA_PERTURBATION)
        }
        other => other,
    }
}

/// Cached per-point values; the last two entries are always the λ actually
/// used and the sector code.
fn point_values(
    cache: Option<&Cache>,
    kind: &str,
    pattern: &str,
    n: usize,
    gamma: f64,
    lambda: f64,
    f: impl FnOnce(&Point) -> Result<Vec<f64>>,
) -> Result<PointResult> {
    let raw = cached(
        cache,
        || CacheKey::new(kind, pattern, n, gamma, lambda),
        || {
            let p = Point::new(n, gamma, lambda)?;
            let mut v = f(&p)?;
            v.push(p.params.lambda());
            v.push(p.sector_code());
            Ok(v)
        },
    )?;
    let (values, tail) = raw.split_at(raw.len() - 2);
    Ok(PointResult {
        lambda,
        used_lambda: tail[0],
        periodic: tail[1] != 0.0,
        values: values.to_vec(),
    })
}

#[derive(Debug, Clone)]
struct PointResult {
    lambda: f64,
    used_lambda: f64,
    periodic: bool,
    values: Vec<f64>,
}

/// Records sector choices and perturbations of one block.
fn describe_points(table: &mut Table, n: usize, points: &[PointResult]) {
    let periodic: Vec<String> = points
        .iter()
        .filter(|p| p.periodic)
        .map(|p| format!("{}", p.lambda))
        .collect();
    let ap = points.len() - periodic.len();
    let sectors = if periodic.is_empty() {
        format!("antiperiodic for all {ap} points")
    } else {
        format!("antiperiodic {ap}, periodic at lambda = {}", periodic.join(" "))
    };
    table.meta(&format!("sectors N={n}"), sectors);
    for p in points.iter().filter(|p| p.used_lambda != p.lambda) {
        table.meta(
            &format!("perturbed N={n}"),
            format!("lambda {} evaluated at {:.15e}", p.lambda, p.used_lambda),
        );
    }
}

fn extent_tag(cfg: &SweepConfig) -> String {
    match cfg.max_extent {
        Some(m) => format!("classes<=4;extent<={m}"),
        None => "classes<=4".to_string(),
    }
}

fn sweep_points(
    cfg: &SweepConfig,
    n: usize,
    cache: Option<&Cache>,
    kind: &str,
    pattern: &str,
    f: impl Fn(&Point) -> Result<Vec<f64>> + Sync,
) -> Result<Vec<PointResult>> {
    cfg.lambdas
        .par_iter()
        .map(|&l| point_values(cache, kind, pattern, n, cfg.gamma, l, &f))
        .collect()
}

fn tangle_points(cfg: &SweepConfig, n: usize, cache: Option<&Cache>) -> Result<Vec<PointResult>> {
    let max_extent = cfg.max_extent;
    sweep_points(cfg, n, cache, "tangle", &extent_tag(cfg), |p| {
        let table = PurityTable::from_covariance(&p.params, &p.cov, 4, max_extent)?;
        Ok((1..=4).map(|k| table.tangle(k).value).collect())
    })
}

fn curve_of(n: usize, cfg: &SweepConfig, name: &str, pts: &[PointResult], idx: usize) -> Result<Curve> {
    Curve::new(
        n,
        cfg.gamma,
        name,
        pts.iter().map(|p| (p.lambda, p.values[idx])).collect(),
    )
}

fn peak_json(c: &Curve) -> serde_json::Value {
    match find_peak(c) {
        Ok(p) => json!({"lambda_m": p.lambda, "height": p.height, "interior": p.interior}),
        Err(_) => serde_json::Value::Null,
    }
}

fn tangle_table(cfg: &SweepConfig, cache: Option<&Cache>) -> Result<Output> {
    let mut table = Table::new(&["lambda", "t1", "t2", "t3", "t4"]);
    let mut peaks = Vec::new();
    for &n in &cfg.sizes {
        let pts = tangle_points(cfg, n, cache)?;
        describe_points(&mut table, n, &pts);
        let mut per_k = serde_json::Map::new();
        for k in 0..4 {
            per_k.insert(format!("t{}", k + 1), peak_json(&curve_of(n, cfg, "t", &pts, k)?));
        }
        peaks.push(json!({"N": n, "peaks": per_k}));
        table.blocks.push(Block {
            label: format!("N={n}"),
            rows: pts
                .iter()
                .map(|p| {
                    let mut row = vec![Cell::Num(p.lambda)];
                    row.extend(p.values.iter().map(|&v| Cell::Num(v)));
                    row
                })
                .collect(),
        });
    }
    Ok(Output {
        table,
        summary: json!({ "sizes": peaks }),
    })
}

fn entropy_table(cfg: &SweepConfig, cache: Option<&Cache>) -> Result<Output> {
    let mut table = Table::new(&["lambda", "L", "s4"]);
    for &n in &cfg.sizes {
        let mut rows = Vec::new();
        let mut all = Vec::new();
        for &l in &cfg.spacings {
            let pts = sweep_points(cfg, n, cache, "entropy", &format!("spacing={l}"), |p| {
                Ok(vec![entropy_spaced_with(l, &p.params, &p.cov)?.value])
            })?;
            for p in &pts {
                rows.push((p.lambda, l, p.values[0]));
            }
            all.extend(pts);
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        all.dedup_by(|a, b| a.lambda == b.lambda);
        describe_points(&mut table, n, &all);
        table.blocks.push(Block {
            label: format!("N={n}"),
            rows: rows
                .into_iter()
                .map(|(l, sp, s)| vec![Cell::Num(l), Cell::Int(sp as i64), Cell::Num(s)])
                .collect(),
        });
    }
    Ok(Output {
        table,
        summary: json!({}),
    })
}

fn noise_table(cfg: &SweepConfig, cache: Option<&Cache>) -> Result<Output> {
    let mut table = Table::new(&["lambda", "n0", "delta00", "threshold", "entangled_flag"]);
    let mut per_size = Vec::new();
    let mut heights = Vec::new();
    for &n in &cfg.sizes {
        let pts = sweep_points(cfg, n, cache, "noise", "zero-mode", |p| {
            let z = zero_mode_noise_with(&p.cov)?;
            Ok(vec![z.n0, z.delta00])
        })?;
        describe_points(&mut table, n, &pts);
        let threshold = separability_threshold(n);
        let delta = curve_of(n, cfg, "delta00", &pts, 1)?;
        if let Ok(p) = find_peak(&delta) {
            heights.push((n as f64, p.height));
        }
        per_size.push(json!({
            "N": n,
            "threshold": threshold,
            "delta00_peak": peak_json(&delta),
            "n0_peak": peak_json(&curve_of(n, cfg, "n0", &pts, 0)?),
        }));
        table.blocks.push(Block {
            label: format!("N={n}"),
            rows: pts
                .iter()
                .map(|p| {
                    vec![
                        Cell::Num(p.lambda),
                        Cell::Num(p.values[0]),
                        Cell::Num(p.values[1]),
                        Cell::Num(threshold),
                        Cell::Bool(p.values[1] > threshold),
                    ]
                })
                .collect(),
        });
    }
    let fit = if heights.len() >= 5 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = heights.iter().copied().unzip();
        fit_model(&xs, &ys, FitModel::Power).ok()
    } else {
        None
    };
    Ok(Output {
        table,
        summary: json!({ "sizes": per_size, "peak_height_power_fit": fit }),
    })
}

fn collapse_table(cfg: &SweepConfig, cache: Option<&Cache>) -> Result<Output> {
    let mut t4_curves = Vec::new();
    let mut gamma_curves = Vec::new();
    let mut sector_notes = Table::new(&[]);
    for &n in &cfg.sizes {
        let pts = tangle_points(cfg, n, cache)?;
        describe_points(&mut sector_notes, n, &pts);
        let t4 = curve_of(n, cfg, "t4", &pts, 3)?;
        let (g, dropped) = gamma_transform(&t4)?;
        for l in dropped {
            sector_notes.meta(
                &format!("dropped N={n}"),
                format!("lambda {l}: T_4 within 1e-12 of π/2"),
            );
        }
        t4_curves.push(t4);
        gamma_curves.push(g);
    }
    let mut table = Table::new(&["lambda", "t4", "gamma", "x", "y"]);
    table.metadata = sector_notes.metadata;
    let rescaled = rescale_curves(&gamma_curves, 1.0, true)?;
    let mut peaks = Vec::new();
    for ((t4, g), r) in t4_curves.iter().zip(&gamma_curves).zip(&rescaled) {
        let peak = find_peak(t4)?;
        table.meta(
            &format!("lambda_m N={}", t4.n),
            crate::export::format_number(r.lambda_m),
        );
        peaks.push(json!({"N": t4.n, "t4_peak": peak, "gamma_lambda_m": r.lambda_m}));
        let rows = g
            .points()
            .iter()
            .zip(&r.points)
            .map(|(&(l, gv), &(x, y, _))| {
                let t = t4.points().iter().find(|p| p.0 == l).map(|p| p.1).unwrap_or(f64::NAN);
                vec![Cell::Num(l), Cell::Num(t), Cell::Num(gv), Cell::Num(x), Cell::Num(y)]
            })
            .collect();
        table.blocks.push(Block {
            label: format!("N={}", t4.n),
            rows,
        });
    }
    let mut spreads = Vec::new();
    for &nu in &cfg.nu {
        let s = collapse_quality(&gamma_curves, nu)?;
        table.meta(&format!("spread nu={nu}"), crate::export::format_number(s));
        spreads.push(json!({"nu": nu, "spread": s}));
    }
    let heights: Vec<(f64, f64)> = t4_curves
        .iter()
        .filter_map(|c| find_peak(c).ok().map(|p| (c.n as f64, p.height)))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = heights.into_iter().unzip();
    let log_fit = fit_model_small(&xs, &ys, FitModel::Log).ok();
    Ok(Output {
        table,
        summary: json!({"peaks": peaks, "spreads": spreads, "peak_height_log_fit": log_fit}),
    })
}

fn mx_table(cfg: &SweepConfig, cache: Option<&Cache>) -> Result<Output> {
    let mut table = Table::new(&["lambda", "mx"]);
    let mut fits = Vec::new();
    for &n in &cfg.sizes {
        let pts = sweep_points(cfg, n, cache, "mx", "half-chain-xx", |p| {
            let c = crate::engine::xx_correlator(0, n / 2, &p.cov)?;
            Ok(vec![c.max(0.0).sqrt()])
        })?;
        describe_points(&mut table, n, &pts);
        let [lo, hi] = cfg.fit_window;
        let window: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.lambda >= lo && p.lambda <= hi && p.lambda < 1.0 && p.values[0] > 0.0)
            .map(|p| (1.0 - p.lambda, p.values[0]))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = window.into_iter().unzip();
        fits.push(json!({"N": n, "power_fit_vs_one_minus_lambda": fit_model(&xs, &ys, FitModel::Power).ok()}));
        table.blocks.push(Block {
            label: format!("N={n}"),
            rows: pts
                .iter()
                .map(|p| vec![Cell::Num(p.lambda), Cell::Num(p.values[0])])
                .collect(),
        });
    }
    Ok(Output {
        table,
        summary: json!({ "fits": fits }),
    })
}

/// One compared quantity of the oracle suite.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub n: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub quantity: String,
    pub pipeline: f64,
    pub oracle: f64,
}

impl OracleRow {
    pub fn deviation(&self) -> f64 {
        (self.pipeline - self.oracle).abs()
    }
}

pub const ORACLE_GAMMAS: [f64; 2] = [0.5, 1.0];
pub const ORACLE_LAMBDAS: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];

/// Every quantity of the equivalence suite at one parameter point.
pub fn oracle_point(n: usize, gamma: f64, lambda: f64) -> Result<Vec<OracleRow>> {
    let point = Point::new(n, gamma, lambda)?;
    let params = point.params;
    let gs = ed::solve(&params)?;
    let mut rows = Vec::new();
    let mut push = |quantity: String, pipeline: f64, oracle: f64| {
        rows.push(OracleRow {
            n,
            gamma,
            lambda,
            quantity,
            pipeline,
            oracle,
        })
    };
    push("energy".into(), point.cov.ground_energy(), gs.energy);
    let purities = PurityTable::from_covariance(&params, &point.cov, 4, None)?;
    for k in 1..=4 {
        push(format!("T{k}"), purities.tangle(k).value, ed::tangle_ed(&gs.state, k)?);
    }
    for l in 1..=n / 4 {
        push(
            format!("S4(L={l})"),
            entropy_spaced_with(l, &params, &point.cov)?.value,
            ed::entropy_spaced_ed(&gs.state, l)?,
        );
    }
    let nq = quasimomentum_from(&point.cov)?;
    for (q, (ours, theirs)) in nq.iter().zip(ed::quasimomentum_ed(&gs.state)).enumerate() {
        push(format!("n(q={q})"), *ours, theirs);
    }
    push(
        "delta(0,0)".into(),
        zero_mode_noise_with(&point.cov)?.delta00,
        ed::noise_correlation_ed(&gs.state, 0, 0),
    );
    Ok(rows)
}

/// The full grid of the equivalence suite.
pub fn oracle_suite(sizes: &[usize]) -> Result<Vec<OracleRow>> {
    if let Some(&n) = sizes.iter().find(|&&n| !(4..=ed::MAX_ED_SITES).contains(&n)) {
        return Err(Error::Config(format!("oracle sizes must lie in 4..=12, got {n}")));
    }
    let jobs: Vec<(usize, f64, f64)> = sizes
        .iter()
        .flat_map(|&n| {
            ORACLE_GAMMAS
                .iter()
                .flat_map(move |&g| ORACLE_LAMBDAS.iter().map(move |&l| (n, g, l)))
        })
        .collect();
    let per_point: Vec<Vec<OracleRow>> = jobs
        .par_iter()
        .map(|&(n, g, l)| oracle_point(n, g, l))
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

fn oracle_check(sizes: &[usize], output: Option<PathBuf>) -> Result<()> {
    let rows = oracle_suite(sizes)?;
    let mut table = Table::new(&["gamma", "lambda", "quantity", "pipeline", "oracle", "abs_diff"]);
    table.meta("tool", format!("xychain {}", version_tag()));
    table.meta("command", "oracle-check");
    table.meta("tolerance", crate::export::format_number(ORACLE_TOL));
    let worst = rows.iter().map(OracleRow::deviation).fold(0.0, f64::max);
    let failures: Vec<&OracleRow> = rows.iter().filter(|r| !(r.deviation() <= ORACLE_TOL)).collect();
    table.meta("max_abs_diff", crate::export::format_number(worst));
    table.meta("failures", failures.len());
    for &n in sizes {
        table.blocks.push(Block {
            label: format!("N={n}"),
            rows: rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| {
                    vec![
                        Cell::Num(r.gamma),
                        Cell::Num(r.lambda),
                        Cell::Text(r.quantity.clone()),
                        Cell::Num(r.pipeline),
                        Cell::Num(r.oracle),
                        Cell::Num(r.deviation()),
                    ]
                })
                .collect(),
        });
    }
    let text = table.render()?;
    match output {
        Some(p) => write_atomic(&p, text.as_bytes())?,
        None => {
            eprintln!(
                "oracle-check: {} comparisons, max deviation {worst:.3e}, {} failures",
                rows.len(),
                failures.len()
            );
        }
    }
    if let Some(r) = failures.first() {
        return Err(Error::OracleMismatch(format!(
            "{} at N={}, γ={}, λ={}: pipeline {} vs oracle {}",
            r.quantity, r.n, r.gamma, r.lambda, r.pipeline, r.oracle
        )));
    }
    Ok(())
}
