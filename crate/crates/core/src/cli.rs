//! The `plato-cone` command line.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 I/O or parse
//! failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::DiscreteMeasure;
use crate::function::{cubic_hat, Domain, TestFunction};
use crate::io::{self, FormatError, Kind, Record};
use crate::plato::{to_plato, PlatoConfiguration};
use crate::sampling::{self, LevySpec, MarkDensity, SampleReport};
use crate::stats::{self, EmpiricalSample};
use crate::topology::{self, BumpGrid, TestFamily};
use crate::window::Window;
use crate::Error;

/// Environment variable overriding `--seed`.
pub const SEED_ENV: &str = "PLATO_CONE_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Below this many input files `stats` reports without a verdict.
pub const MIN_STATS_SAMPLES: usize = 100;
/// KS distance threshold used by `stats`.
pub const KS_THRESHOLD: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(name = "plato-cone", version, about = "Sample, reflect and probe discrete random measures")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw samples and write one JSONL file plus one report per seed.
    Sample(SampleArgs),
    /// Apply the reflection map (configuration -> measure) or its inverse.
    Reflect(ReflectArgs),
    /// Restrict a file to a window.
    Restrict(RestrictArgs),
    /// Pair a file with a built-in test function on the marked space.
    Pair(PairArgs),
    /// Check a batch of Gamma samples against their marginal laws.
    Stats(StatsArgs),
    /// Run the merging-points sequence against its non-pinpointing limit.
    Converge(ConvergeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sampler {
    Poisson,
    Gamma,
    GammaOrdered,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(value_enum)]
    sampler: Sampler,
    /// Spatial dimension; inferred from --window when omitted.
    #[arg(long)]
    dim: Option<usize>,
    /// Window bounds lo1,hi1[,lo2,hi2,…].
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = 1e-8, allow_hyphen_values = true)]
    epsilon: f64,
    #[arg(long = "n-jumps", default_value_t = 200)]
    n_jumps: usize,
    /// Spatial rate of the Poisson sampler (marks have density e^-s).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReflectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RestrictArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PairFunction {
    /// f ≡ 1: counts atoms.
    One,
    /// f(s, x) = s: local mass.
    Mark,
    /// f(s, x) = s·Π h((xᵢ − cᵢ)/rᵢ), a cubic hat filling the window.
    Bump,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = PairFunction::One)]
    function: PairFunction,
    /// Support of the test function; everywhere when omitted (not for bump).
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Sample files or directories of `*.jsonl` files.
    #[arg(long = "in", required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = 1e-8, allow_hyphen_values = true)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    /// Limit position x0, comma separated.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    x0: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    s1: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    s2: f64,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long = "n-max", default_value_t = 1000)]
    n_max: usize,
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    tol: f64,
    /// Bump cells per axis of the default family.
    #[arg(long = "grid-cells", default_value_t = 4)]
    grid_cells: usize,
    /// Half width of the cube around x0 covered by the family.
    #[arg(long = "grid-half-width", default_value_t = 1.0)]
    grid_half_width: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Invalid(err @ Error::NotPinpointing { .. }) => Failure::Usage(err.to_string()),
            other => Failure::Io(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn flag_error(flag: &str, e: impl std::fmt::Display) -> Failure {
    usage(format!("invalid {flag}: {e}"))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Reflect(a) => cmd_reflect(a),
        Command::Restrict(a) => cmd_restrict(a),
        Command::Pair(a) => cmd_pair(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Converge(a) => cmd_converge(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| flag_error(flag, e))
}

fn parse_window(text: &str, dim: Option<usize>) -> Result<Window, Failure> {
    let bounds = parse_list("--window", text)?;
    let window = Window::from_bounds(&bounds).map_err(|e| flag_error("--window", e))?;
    if let Some(d) = dim {
        if d != window.dim() {
            return Err(usage(format!(
                "--dim {d} does not match the {}-dimensional --window",
                window.dim()
            )));
        }
    }
    Ok(window)
}

fn positive(flag: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(flag_error(flag, format!("must be positive, got {v}")))
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn effective_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| usage(format!("invalid {SEED_ENV}={v:?}: {e}"))),
        Err(_) => Ok(flag),
    }
}

fn cmd_sample(a: SampleArgs) -> Result<(), Failure> {
    let window = parse_window(&a.window, a.dim)?;
    if !window.is_bounded() {
        return Err(flag_error("--window", "must be bounded"));
    }
    positive("--theta", a.theta)?;
    positive("--rate", a.rate)?;
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(flag_error("--epsilon", format!("must lie in (0, 1), got {}", a.epsilon)));
    }
    if a.n_jumps == 0 {
        return Err(flag_error("--n-jumps", "must be >= 1"));
    }
    if a.count == 0 {
        return Err(flag_error("--count", "must be >= 1"));
    }
    let base = effective_seed(a.seed)?;
    let last = base
        .checked_add(a.count - 1)
        .ok_or_else(|| flag_error("--count", "seed range overflows u64"))?;
    fs::create_dir_all(&a.out)?;
    let poisson = match a.sampler {
        Sampler::Poisson => Some(
            LevySpec::finite_product(MarkDensity::exponential(), a.rate)
                .map_err(|e| flag_error("--rate", e))?,
        ),
        _ => None,
    };

    let draw = |seed: u64| -> Result<(Record, SampleReport), Error> {
        Ok(match a.sampler {
            Sampler::Poisson => {
                let s = sampling::sample_poisson(poisson.as_ref().expect("built above"), &window, seed)?;
                (Record::Configuration(s.configuration), s.report)
            }
            Sampler::Gamma => {
                let s = sampling::sample_gamma(a.theta, &window, a.epsilon, seed)?;
                (Record::Measure(s.measure), s.report)
            }
            Sampler::GammaOrdered => {
                let s = sampling::sample_gamma_ordered(a.theta, &window, a.n_jumps, seed)?;
                (Record::Measure(s.measure), s.report)
            }
        })
    };

    (base..=last).into_par_iter().try_for_each(|seed| {
        let (record, report) = draw(seed).map_err(|e| usage(e.to_string()))?;
        io::write_path(&a.out.join(format!("sample-{seed}.jsonl")), &record)?;
        emit_json(&report, Some(&a.out.join(format!("sample-{seed}.report.json"))))
    })
}

fn cmd_reflect(a: ReflectArgs) -> Result<(), Failure> {
    let output = match io::read_path(&a.input)? {
        Record::Configuration(c) => {
            Record::Measure(to_plato(c).map_err(|e| usage(e.to_string()))?.reflect())
        }
        Record::Plato(p) => Record::Measure(p.reflect()),
        Record::Measure(m) => Record::Plato(PlatoConfiguration::reflect_inverse(&m)),
    };
    io::write_path(&a.out, &output)?;
    Ok(())
}

fn cmd_restrict(a: RestrictArgs) -> Result<(), Failure> {
    let record = io::read_path(&a.input)?;
    let window = parse_window(&a.window, Some(record.dim()))?;
    let restricted = match record {
        Record::Configuration(c) => Record::Configuration(c.restrict(&window).map_err(|e| usage(e.to_string()))?),
        Record::Plato(p) => Record::Plato(
            to_plato(p.configuration().restrict(&window).map_err(|e| usage(e.to_string()))?)
                .map_err(|e| usage(e.to_string()))?,
        ),
        Record::Measure(m) => Record::Measure(m.restrict(&window).map_err(|e| usage(e.to_string()))?),
    };
    io::write_path(&a.out, &restricted)?;
    Ok(())
}

#[derive(Serialize)]
struct PairReport {
    kind: Kind,
    function: PairFunction,
    value: f64,
}

fn pair_function(which: PairFunction, support: Window) -> Result<TestFunction, Error> {
    match which {
        PairFunction::One => TestFunction::constant(Domain::Marked, support, 1.0),
        PairFunction::Mark => TestFunction::on_marked(support, None, |s, _| s),
        PairFunction::Bump => {
            if !support.is_bounded() {
                return Err(Error::UnboundedWindow);
            }
            let centre: Vec<f64> = support
                .lower()
                .iter()
                .zip(support.upper())
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect();
            let radius: Vec<f64> = support
                .lower()
                .iter()
                .zip(support.upper())
                .map(|(lo, hi)| 0.5 * (hi - lo))
                .collect();
            TestFunction::on_marked(support, None, move |s, x| {
                s * x
                    .iter()
                    .zip(centre.iter().zip(&radius))
                    .map(|(v, (c, r))| cubic_hat((v - c) / r))
                    .product::<f64>()
            })
        }
    }
}

fn cmd_pair(a: PairArgs) -> Result<(), Failure> {
    let record = io::read_path(&a.input)?;
    let support = match &a.window {
        Some(w) => parse_window(w, Some(record.dim()))?,
        None => Window::everywhere(record.dim()),
    };
    let f = pair_function(a.function, support).map_err(|e| flag_error("--window", e))?;
    let value = match &record {
        Record::Configuration(c) => c.pair(&f),
        Record::Plato(p) => p.configuration().pair(&f),
        Record::Measure(m) => m.double_pair(&f),
    }
    .map_err(|e| usage(e.to_string()))?;
    emit_json(
        &PairReport {
            kind: record.kind(),
            function: a.function,
            value,
        },
        a.out.as_deref(),
    )
}

#[derive(Debug, Serialize)]
struct StatsReport {
    n: usize,
    kind: Kind,
    theta: f64,
    volume: f64,
    epsilon: f64,
    mass_mean: f64,
    ks_mass: f64,
    ks_threshold: f64,
    ks_pass: Option<bool>,
    count_mean: f64,
    count_expected: f64,
    count_sigma: f64,
    count_pass: Option<bool>,
    note: Option<String>,
}

fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|f| f.extension().is_some_and(|e| e == "jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(usage("no input files"));
    }
    Ok(files)
}

fn cmd_stats(a: StatsArgs) -> Result<(), Failure> {
    let theta = positive("--theta", a.theta)?;
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(flag_error("--epsilon", format!("must lie in (0, 1), got {}", a.epsilon)));
    }
    let window = parse_window(&a.window, None)?;
    if !window.is_bounded() {
        return Err(flag_error("--window", "must be bounded"));
    }
    let files = collect_inputs(&a.input)?;
    let records = files
        .par_iter()
        .map(|f| io::read_path(f).map_err(Failure::from))
        .collect::<Result<Vec<_>, _>>()?;
    let kind = records[0].kind();
    if let Some(other) = records.iter().find(|r| r.kind() != kind) {
        return Err(usage(format!("mixed input kinds: {kind} and {}", other.kind())));
    }
    let measures = records
        .into_iter()
        .map(|r| match r {
            Record::Measure(m) => Ok(m),
            Record::Plato(p) => Ok(p.reflect()),
            Record::Configuration(c) => to_plato(c).map(|p| p.reflect()).map_err(|e| usage(e.to_string())),
        })
        .collect::<Result<Vec<DiscreteMeasure>, _>>()?;
    if let Some(m) = measures.iter().find(|m| m.dim() != window.dim()) {
        return Err(usage(format!(
            "input of dimension {} does not match the {}-dimensional --window",
            m.dim(),
            window.dim()
        )));
    }

    let volume = window.volume();
    let masses: Vec<f64> = measures
        .iter()
        .map(|m| m.mass_in_window(&window))
        .collect::<Result<_, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let counts: Vec<f64> = measures
        .iter()
        .map(|m| m.count_above(&window, a.epsilon).map(|c| c as f64))
        .collect::<Result<_, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let n = measures.len();
    let shape = theta * volume;
    let mass_sample = EmpiricalSample::new(masses, format!("{n} files")).map_err(|e| usage(e.to_string()))?;
    let ks_mass = stats::ks_statistic(&mass_sample, |x| {
        stats::gamma_cdf(shape, 1.0, x.max(0.0)).unwrap_or(f64::NAN)
    });
    let count_sample = EmpiricalSample::new(counts, format!("{n} files")).map_err(|e| usage(e.to_string()))?;
    let count_expected = shape * stats::exp_integral_e1(a.epsilon).map_err(|e| usage(e.to_string()))?;
    let count_sigma = (count_expected / n as f64).sqrt();
    let enough = n >= MIN_STATS_SAMPLES;
    let report = StatsReport {
        n,
        kind,
        theta,
        volume,
        epsilon: a.epsilon,
        mass_mean: mass_sample.mean(),
        ks_mass,
        ks_threshold: KS_THRESHOLD,
        ks_pass: enough.then_some(ks_mass < KS_THRESHOLD),
        count_mean: count_sample.mean(),
        count_expected,
        count_sigma,
        count_pass: enough.then(|| (count_sample.mean() - count_expected).abs() <= 3.0 * count_sigma),
        note: (!enough).then(|| format!("insufficient n: {n} < {MIN_STATS_SAMPLES}")),
    };
    emit_json(&report, a.out.as_deref())
}

#[derive(Debug, Serialize)]
struct ConvergeReport {
    converged: bool,
    discrepancies: Vec<f64>,
    verdict: &'static str,
    terms_pinpointing: bool,
    limit_pinpointing: bool,
    max_lipschitz: Option<f64>,
}

fn cmd_converge(a: ConvergeArgs) -> Result<(), Failure> {
    let x0 = parse_list("--x0", &a.x0)?;
    if let Some(d) = a.dim {
        if d != x0.len() {
            return Err(usage(format!("--dim {d} does not match the {}-dimensional --x0", x0.len())));
        }
    }
    if a.s1 == a.s2 {
        return Err(usage(format!("--s1 and --s2 must differ, both are {}", a.s1)));
    }
    positive("--s1", a.s1)?;
    positive("--s2", a.s2)?;
    positive("--tol", a.tol)?;
    positive("--grid-half-width", a.grid_half_width)?;
    if a.n_max == 0 {
        return Err(flag_error("--n-max", "must be >= 1"));
    }
    if a.grid_cells == 0 {
        return Err(flag_error("--grid-cells", "must be >= 1"));
    }
    let mut grid = BumpGrid::around(&x0, a.grid_half_width, 1.5 * a.s1.max(a.s2));
    grid.cells = a.grid_cells;
    let family = TestFamily::bump_grid(&grid).map_err(|e| usage(e.to_string()))?;
    let limit = topology::merging_limit(&x0, a.s1, a.s2).map_err(|e| usage(e.to_string()))?;
    let sequence = |n| topology::merging_sequence(&x0, a.s1, a.s2, n);
    let terms_pinpointing = (1..=a.n_max).all(|n| sequence(n).is_ok_and(|g| g.is_pinpointing()));
    let report = topology::check_convergence(sequence, &limit, &family, a.tol, a.n_max)
        .map_err(|e| usage(e.to_string()))?;
    emit_json(
        &ConvergeReport {
            verdict: if report.converged {
                "consistent with convergence"
            } else {
                "not consistent with convergence"
            },
            converged: report.converged,
            discrepancies: report.discrepancies,
            terms_pinpointing,
            limit_pinpointing: limit.is_pinpointing(),
            max_lipschitz: family.max_lipschitz(),
        },
        a.out.as_deref(),
    )
}
