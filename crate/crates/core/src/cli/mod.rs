//! Command-line front end: each command writes JSON reports and CSV plot
//! data into the output directory. Exit status 0 on success, 1 for invalid
//! input, 2 for numerical failure and 64 for usage errors.

mod config;

pub use config::{FitConfig, GofConfig, IngestConfig, RunConfig, ScalingConfig, ScalingRun, TailConfig};

use crate::distributions::{Family, GaussianParams, GhParams, Model, NigParams, Params, SkewTParams, StableParams};
use crate::error::{Error, Result};
use crate::estimation::{fit, gh_init_from, lr_test, FitOptions, FitResult};
use crate::gof::{bootstrap_pvalue, gof_report, GofReport, GofTest};
use crate::ingest::{
    deseasonalize, log_returns, parse_ticks, read_series, resample, sample_stats, standardize, synthetic_ticks, write_series,
    ReturnSeries, SyntheticTickSpec,
};
use crate::scaling::{default_scales, dfa, rescaled_histograms, scaling_experiment, ScalingReport};
use crate::tailfit::{ccdf, tail_fit, tail_values, Side, TailFitReport, TailOptions};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub const EXIT_INVALID: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "heavytail", version, about = "Heavy-tailed fits, goodness-of-fit and scaling analysis of return series")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: current directory).
    #[arg(long = "out", global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resample ticks to log-returns and write returns.csv with its sidecar.
    Ingest {
        ticks: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        #[arg(long)]
        deseasonalize: bool,
        /// Keep raw returns instead of standardizing them.
        #[arg(long)]
        raw: bool,
    },
    /// Maximum-likelihood fits.
    Fit {
        returns: PathBuf,
        #[arg(long = "family")]
        families: Vec<Family>,
    },
    /// Fit, then goodness-of-fit statistics and decisions.
    Gof {
        returns: PathBuf,
        #[arg(long = "family")]
        families: Vec<Family>,
        #[arg(long)]
        chi2_bins: Option<usize>,
        /// Parametric-bootstrap replicates (needs --seed).
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Likelihood-ratio tests of NIG and skew-t against GH.
    Lrt { returns: PathBuf },
    /// Power-law tail exponents and cutoffs.
    Tails {
        returns: PathBuf,
        #[arg(long = "side")]
        sides: Vec<Side>,
        #[arg(long)]
        n_tail_min: Option<usize>,
    },
    /// Aggregation, DFA and reshuffling experiments (needs --seed).
    Scaling {
        returns: PathBuf,
        /// Comma-separated aggregation factors.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<usize>>,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long = "mode")]
        modes: Vec<ScalingRun>,
        #[arg(long)]
        reference: Option<crate::scaling::Reference>,
    },
    /// Draw a sample (one value per line) or, with --ticks, a synthetic tick file (needs --seed).
    Simulate(SimulateArgs),
    /// Ingest ticks and run every stage.
    Pipeline {
        ticks: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        #[arg(long = "family")]
        families: Vec<Family>,
    },
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    /// Session open, HH:MM:SS.
    #[arg(long)]
    pub open: Option<chrono::NaiveTime>,
    #[arg(long)]
    pub close: Option<chrono::NaiveTime>,
    /// Sampling interval in seconds.
    #[arg(long)]
    pub interval: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Sample size (sample mode).
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Write a tick file whose grid returns follow the law instead.
    #[arg(long)]
    pub ticks: bool,
    #[arg(long, default_value_t = 20)]
    pub days: usize,
    /// Multiplier turning draws into log-returns (tick mode).
    #[arg(long, default_value_t = 1e-4)]
    pub return_scale: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Failure of a command, mapped to an exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Stage { stage: String, source: Error },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Stage { stage, source } => write!(f, "{stage} failed: {source}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Stage { source, .. } if source.is_numerical() => EXIT_NUMERICAL,
            CliError::Stage { .. } => EXIT_INVALID,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

trait StageExt<T> {
    fn stage(self, name: &str) -> CliResult<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, name: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Stage { stage: name.to_string(), source })
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn effective_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).stage("config")?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    Ok(cfg)
}

fn require_seed(cfg: &RunConfig, command: &str) -> CliResult<u64> {
    cfg.seed.ok_or_else(|| CliError::Usage(format!("{command} is randomized and needs an explicit --seed")))
}

fn apply_session(cfg: &mut RunConfig, s: &SessionArgs) -> CliResult<()> {
    if let Some(t) = s.open {
        cfg.session.open_time = t;
    }
    if let Some(t) = s.close {
        cfg.session.close_time = t;
    }
    if let Some(i) = s.interval {
        cfg.session.interval_seconds = i;
    }
    cfg.session.validate().stage("session")
}

/// Runs a parsed command; returns the files written.
pub fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let mut cfg = effective_config(&cli)?;
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a second call in the same process keeps the first pool, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    std::fs::create_dir_all(&cfg.output_dir).map_err(Error::from).stage("output directory")?;
    let mut out = Output { dir: cfg.output_dir.clone(), files: Vec::new() };
    match cli.command {
        Command::Ingest { ticks, session, deseasonalize, raw } => {
            apply_session(&mut cfg, &session)?;
            cfg.ingest.deseasonalize |= deseasonalize;
            cfg.ingest.standardize &= !raw;
            ingest_stage(&ticks, &cfg, &mut out)?;
        }
        Command::Fit { returns, families } => {
            override_families(&mut cfg, families);
            let s = load_returns(&returns).stage("read returns")?;
            fit_stage(&s, &cfg, &mut out)?;
        }
        Command::Gof { returns, families, chi2_bins, bootstrap } => {
            override_families(&mut cfg, families);
            if let Some(b) = chi2_bins {
                cfg.gof.chi2_bins = b;
            }
            if let Some(b) = bootstrap {
                cfg.gof.bootstrap = b;
            }
            if cfg.gof.bootstrap > 0 {
                require_seed(&cfg, "gof --bootstrap")?;
            }
            let s = load_returns(&returns).stage("read returns")?;
            let fits = fit_stage(&s, &cfg, &mut out)?;
            gof_stage(&s, &fits, &cfg, &mut out)?;
        }
        Command::Lrt { returns } => {
            let s = load_returns(&returns).stage("read returns")?;
            cfg.fit.families = vec![Family::Nig, Family::SkewT];
            let fits = fit_stage(&s, &cfg, &mut out)?;
            lrt_stage(&s, &fits, &mut out)?;
        }
        Command::Tails { returns, sides, n_tail_min } => {
            if !sides.is_empty() {
                cfg.tails.sides = sides;
            }
            if let Some(m) = n_tail_min {
                cfg.tails.n_tail_min = m;
            }
            let s = load_returns(&returns).stage("read returns")?;
            tails_stage(&s, &cfg, &mut out)?;
        }
        Command::Scaling { returns, scales, hurst, modes, reference } => {
            if scales.is_some() {
                cfg.scaling.scales = scales;
            }
            if hurst.is_some() {
                cfg.scaling.hurst = hurst;
            }
            if !modes.is_empty() {
                cfg.scaling.modes = modes;
            }
            if let Some(r) = reference {
                cfg.scaling.reference = r;
            }
            let seed = require_seed(&cfg, "scaling")?;
            let s = load_returns(&returns).stage("read returns")?;
            scaling_stage(&s, &cfg, seed, &mut out)?;
        }
        Command::Simulate(args) => {
            let seed = require_seed(&cfg, "simulate")?;
            simulate(&args, &cfg, seed, &mut out)?;
        }
        Command::Pipeline { ticks, session, families } => {
            apply_session(&mut cfg, &session)?;
            override_families(&mut cfg, families);
            let seed = require_seed(&cfg, "pipeline")?;
            pipeline(&ticks, &cfg, seed, &mut out)?;
        }
    }
    Ok(out.files)
}

fn override_families(cfg: &mut RunConfig, families: Vec<Family>) {
    if !families.is_empty() {
        cfg.fit.families = families;
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(Error::from).stage(name)?;
        text.push('\n');
        self.text(name, &text)
    }

    fn text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let p = self.path(name);
        std::fs::write(&p, text).map_err(Error::from).stage(name)?;
        self.files.push(p);
        Ok(())
    }
}

/// A ReturnSeries CSV (with or without sidecar), or a plain file with one value per line.
pub fn load_returns(path: &Path) -> Result<ReturnSeries> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("").trim();
    if first.starts_with("day_index") {
        return read_series(path);
    }
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || (i == 0 && t.parse::<f64>().is_err() && t.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| Error::Parse { line: i + 1, message: format!("not a number: '{t}'") })?;
        values.push(v);
    }
    ReturnSeries::single_day(values, 15)
}

struct Ingested {
    raw: ReturnSeries,
    series: ReturnSeries,
    summary: Value,
}

fn ingest_ticks(ticks: &Path, cfg: &RunConfig) -> Result<Ingested> {
    let file = std::fs::File::open(ticks)?;
    let parsed = parse_ticks(BufReader::new(file))?;
    let grids = resample(&parsed.records, &cfg.session)?;
    let raw = log_returns(&grids)?;
    let mut series = raw.clone();
    let mut zero_slots = Vec::new();
    if cfg.ingest.deseasonalize {
        let d = deseasonalize(&series)?;
        zero_slots = d.zero_slots;
        series = d.series;
    }
    if cfg.ingest.standardize {
        series = standardize(&series)?;
    }
    let stats = sample_stats(raw.values())?;
    let summary = json!({
        "ticks": parsed.records.len(),
        "out_of_order": parsed.out_of_order,
        "duplicates": parsed.duplicates,
        "days": series.n_days(),
        "dropped_days": grids.dropped_days.len(),
        "short_days": series.short_days().len(),
        "n": series.len(),
        "slots_per_day": series.slots_per_day(),
        "scale_seconds": series.scale_seconds(),
        "deseasonalized": series.is_deseasonalized(),
        "zero_slots": zero_slots,
        "standardization": series.standardization(),
        "raw_stats": stats,
    });
    Ok(Ingested { raw, series, summary })
}

fn ingest_stage(ticks: &Path, cfg: &RunConfig, out: &mut Output) -> CliResult<Ingested> {
    let ing = ingest_ticks(ticks, cfg).stage("ingest")?;
    let csv = out.path("returns.csv");
    write_series(&ing.series, &csv).stage("ingest")?;
    out.files.push(csv.clone());
    out.files.push(crate::ingest::sidecar_path(&csv));
    out.json("ingest.json", &ing.summary)?;
    Ok(ing)
}

fn fit_stage(s: &ReturnSeries, cfg: &RunConfig, out: &mut Output) -> CliResult<BTreeMap<Family, FitResult>> {
    let opts = FitOptions::default();
    let mut fits = BTreeMap::new();
    for &family in &cfg.fit.families {
        if family == Family::Gh {
            continue;
        }
        let r = fit(family, s.values(), None, &opts).stage(&format!("fit {family}"))?;
        fits.insert(family, r);
    }
    if cfg.fit.families.contains(&Family::Gh) {
        fits.insert(Family::Gh, fit_gh(s.values(), &fits, &opts).stage("fit gh")?);
    }
    for (family, r) in &fits {
        out.json(&format!("fit_{family}.json"), r)?;
    }
    Ok(fits)
}

/// GH from its default start and from every nested fit available; the best
/// likelihood wins, so GH never falls below a sub-model by optimizer luck.
fn fit_gh(data: &[f64], nested: &BTreeMap<Family, FitResult>, opts: &FitOptions) -> Result<FitResult> {
    let mut best = fit(Family::Gh, data, None, opts);
    for family in [Family::Nig, Family::SkewT] {
        let Some(init) = nested.get(&family).and_then(|r| gh_init_from(&r.params)) else { continue };
        if let Ok(r) = fit(Family::Gh, data, Some(&init), opts) {
            if best.as_ref().map_or(true, |b| r.log_likelihood > b.log_likelihood) {
                best = Ok(r);
            }
        }
    }
    best
}

#[derive(Serialize)]
struct GofOutput<'a> {
    #[serde(flatten)]
    report: &'a GofReport,
    params: Params,
    /// Parametric-bootstrap p-values per test, when requested.
    bootstrap: Option<BTreeMap<&'static str, f64>>,
}

fn gof_stage(s: &ReturnSeries, fits: &BTreeMap<Family, FitResult>, cfg: &RunConfig, out: &mut Output) -> CliResult<BTreeMap<Family, GofReport>> {
    let mut reports = BTreeMap::new();
    for (&family, f) in fits {
        let stage = format!("gof {family}");
        let model = Model::new(&f.params).stage(&stage)?;
        let report = gof_report(s.values(), &model, &cfg.gof.levels, cfg.gof.chi2_bins).stage(&stage)?;
        let bootstrap = if cfg.gof.bootstrap > 0 {
            let seed = require_seed(cfg, "gof --bootstrap")?;
            let mut m = BTreeMap::new();
            for t in GofTest::ALL {
                m.insert(t.as_str(), bootstrap_pvalue(s.values(), family, &f.params, cfg.gof.bootstrap, t, seed).stage(&stage)?);
            }
            Some(m)
        } else {
            None
        };
        out.json(&format!("gof_{family}.json"), &GofOutput { report: &report, params: f.params, bootstrap })?;
        reports.insert(family, report);
    }
    Ok(reports)
}

fn lrt_stage(s: &ReturnSeries, fits: &BTreeMap<Family, FitResult>, out: &mut Output) -> CliResult<Value> {
    let gh = match fits.get(&Family::Gh) {
        Some(g) => g.clone(),
        None => fit_gh(s.values(), fits, &FitOptions::default()).stage("fit gh")?,
    };
    let mut tests = serde_json::Map::new();
    for nested in [Family::Nig, Family::SkewT] {
        let Some(n) = fits.get(&nested) else { continue };
        let v = match lr_test(&gh, n) {
            Ok(r) => serde_json::to_value(r).map_err(Error::from).stage("lrt")?,
            Err(e) => json!({ "error": e.to_string() }),
        };
        tests.insert(format!("gh_vs_{nested}"), v);
    }
    let v = Value::Object(tests);
    out.json("lrt.json", &v)?;
    Ok(v)
}

fn tails_stage(s: &ReturnSeries, cfg: &RunConfig, out: &mut Output) -> CliResult<Vec<TailFitReport>> {
    let opts = TailOptions {
        min_tail: cfg.tails.n_tail_min,
        start_quantile: cfg.tails.start_quantile,
        max_candidates: cfg.tails.max_candidates,
    };
    let mut reports = Vec::new();
    for &side in &cfg.tails.sides {
        let name = side.as_str();
        let r = tail_fit(s, side, &opts).stage(&format!("tails {name}"))?;
        out.json(&format!("tails_{name}.json"), &r)?;
        let mut csv = String::from("x,ccdf\n");
        for (x, p) in ccdf(&tail_values(s.values(), side)) {
            let _ = writeln!(csv, "{x},{p}");
        }
        out.text(&format!("ccdf_{name}.csv"), &csv)?;
        reports.push(r);
    }
    Ok(reports)
}

fn scaling_stage(s: &ReturnSeries, cfg: &RunConfig, seed: u64, out: &mut Output) -> CliResult<Vec<(ScalingRun, ScalingReport)>> {
    let sc = &cfg.scaling;
    let scales = sc.scales.clone().unwrap_or_else(|| default_scales(s));
    let mut reports = Vec::new();
    for &mode in &sc.modes {
        let name = mode.as_str();
        let stage = format!("scaling {name}");
        let r = scaling_experiment(s, mode.shuffle(), &scales, sc.hurst, sc.reference, seed).stage(&stage)?;
        out.json(&format!("scaling_{name}.json"), &r)?;
        let mut csv = String::from("scale,n,distance,critical_5,critical_1,convergence_distance\n");
        let conv = r.convergence.as_deref().unwrap_or(&[]);
        for (i, p) in r.collapse.iter().enumerate() {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let c = conv.get(i).map(|q| q.distance.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{},{},{},{},{},{c}", p.scale, p.n, p.distance, opt(p.critical_5), opt(p.critical_1));
        }
        out.text(&format!("collapse_{name}.csv"), &csv)?;
        reports.push((mode, r));
    }
    let hurst = match sc.hurst {
        Some(h) => h,
        None => dfa(s.values()).stage("scaling histogram")?.hurst,
    };
    let rows = rescaled_histograms(s, &scales, hurst, sc.histogram_bins, sc.histogram_range).stage("scaling histogram")?;
    let mut csv = String::from("bin_center,density,scale\n");
    for r in rows {
        let _ = writeln!(csv, "{},{},{}", r.bin_center, r.density, r.scale);
    }
    out.text("histogram.csv", &csv)?;
    Ok(reports)
}

fn need(v: Option<f64>, name: &str, family: Family) -> CliResult<f64> {
    v.ok_or_else(|| CliError::Usage(format!("--{name} is required for family {family}")))
}

/// Parameters named on the command line; unnamed optional ones default to
/// β = 0, δ = 1, μ = 0.
pub fn params_from_args(a: &SimulateArgs) -> CliResult<Params> {
    let f = a.family;
    let (beta, delta, mu) = (a.beta.unwrap_or(0.0), a.delta.unwrap_or(1.0), a.mu.unwrap_or(0.0));
    let p = match f {
        Family::Stable => StableParams::new(need(a.alpha, "alpha", f)?, beta, delta, mu).map(Params::Stable),
        Family::Gh => GhParams::new(need(a.lambda, "lambda", f)?, need(a.alpha, "alpha", f)?, beta, delta, mu).map(Params::Gh),
        Family::Nig => NigParams::new(need(a.alpha, "alpha", f)?, beta, delta, mu).map(Params::Nig),
        Family::SkewT => SkewTParams::new(need(a.nu, "nu", f)?, beta, delta, mu).map(Params::SkewT),
        Family::Gaussian => GaussianParams::new(mu, a.sigma.unwrap_or(1.0)).map(Params::Gaussian),
    };
    p.stage("simulate parameters")
}

fn simulate(a: &SimulateArgs, cfg: &RunConfig, seed: u64, out: &mut Output) -> CliResult<()> {
    let params = params_from_args(a)?;
    let model = Model::new(&params).stage("simulate")?;
    let mut text = String::new();
    let default_name = if a.ticks {
        let spec = SyntheticTickSpec {
            params,
            return_scale: a.return_scale,
            start_price: 100.0,
            first_date: chrono::NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date"),
            days: a.days,
            session: cfg.session.clone(),
            noise_ticks: 2,
        };
        text.push_str("timestamp,price\n");
        for t in synthetic_ticks(&spec, seed).stage("simulate")? {
            let _ = writeln!(text, "{},{}", t.timestamp.format("%Y-%m-%d %H:%M:%S"), t.price);
        }
        "ticks.csv".to_string()
    } else {
        if a.n == 0 {
            return Err(CliError::Usage("--n must be positive".into()));
        }
        for v in model.sample(a.n, seed) {
            let _ = writeln!(text, "{v}");
        }
        format!("sample_{}.csv", params.family())
    };
    match &a.output {
        Some(p) => {
            std::fs::write(p, text).map_err(Error::from).stage("simulate")?;
            out.files.push(p.clone());
            Ok(())
        }
        None => out.text(&default_name, &text),
    }
}

fn pipeline(ticks: &Path, cfg: &RunConfig, seed: u64, out: &mut Output) -> CliResult<()> {
    let ing = ingest_stage(ticks, cfg, out)?;
    let s = &ing.series;
    let fits = fit_stage(s, cfg, out)?;
    let gof = gof_stage(s, &fits, cfg, out)?;
    let lrt = if fits.contains_key(&Family::Gh) { Some(lrt_stage(s, &fits, out)?) } else { None };
    let tails = tails_stage(s, cfg, out)?;
    let scaling = scaling_stage(s, cfg, seed, out)?;

    let fit_table: BTreeMap<String, Value> = fits
        .iter()
        .map(|(f, r)| (f.to_string(), json!({ "params": r.params, "loglik": r.log_likelihood, "converged": r.converged })))
        .collect();
    let gof_table: BTreeMap<String, Value> = gof
        .iter()
        .map(|(f, r)| {
            let stats: BTreeMap<&str, f64> = GofTest::ALL.iter().map(|t| (t.as_str(), r.statistic(*t))).collect();
            (f.to_string(), json!({ "statistics": stats, "reject": r.reject }))
        })
        .collect();
    let tail_table: BTreeMap<&str, Value> = tails
        .iter()
        .map(|t| (t.side.as_str(), json!({ "alpha": t.alpha, "alpha_se": t.alpha_se, "x_min": t.x_min, "n_tail": t.n_tail })))
        .collect();
    let scaling_table: BTreeMap<&str, Value> = scaling
        .iter()
        .map(|(m, r)| {
            let d: Vec<f64> = r.collapse.iter().map(|p| p.distance).collect();
            (m.as_str(), json!({ "hurst": r.hurst, "scales": r.scales, "collapse": d }))
        })
        .collect();
    let summary = json!({
        "seed": seed,
        "ingest": ing.summary,
        "raw_sample_size": ing.raw.len(),
        "fits": fit_table,
        "gof": gof_table,
        "lrt": lrt,
        "tails": tail_table,
        "scaling": scaling_table,
    });
    out.json("pipeline.json", &summary)
}
