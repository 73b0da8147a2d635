//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence,
//! 3 coefficient unknown under `--strict`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::ThreadPool;
use serde::Serialize;
use taildep_core::depcalc::{
    coefficients_constrained, coefficients_unconstrained, summarize, Coefficient, DependenceSummary, RadialTail,
};
use taildep_core::distmodel::ConstructionSpec;
use taildep_core::quadeval::{eta_diagnostic, log_tail_grid, quantile_grid, ChiCurve, EtaDiagnostic};
use taildep_core::simest::{self, default_k, empirical_chi, hill_eta, Budget, Estimate, SampleBatch};
use taildep_core::tailclass::{classify_parametric, TailClass};

use crate::error::CliError;
use crate::output::{read_pairs, write_batch, write_chi_curve, write_json};
use crate::parallel::{self, THREADS_ENV};
use crate::schema::{self, Model};

#[derive(Parser, Debug)]
#[command(name = "taildep", version, about = "Tail dependence of random scale constructions X = R (W1, W2)")]
pub struct Cli {
    /// Worker threads; 0 or unset uses all cores.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tail classes of a parametric family.
    Classify(ClassifyArgs),
    /// Symbolic (chi, eta) with the rule that produced them.
    Coeffs(CoeffsArgs),
    /// chi(q) by quadrature on a grid of q.
    Curve(CurveArgs),
    /// Draw pairs of X.
    Simulate(SimulateArgs),
    /// Empirical chi(q) and Hill estimate of eta.
    Estimate(EstimateArgs),
    /// Check symbolic coefficients against simulation and quadrature.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub family: String,
    /// Shape parameter.
    #[arg(long)]
    pub shp: Option<f64>,
    /// Scale parameter.
    #[arg(long)]
    pub scl: Option<f64>,
    /// Location parameter.
    #[arg(long)]
    pub loc: Option<f64>,
    /// Further parameters as `name=value`.
    #[arg(long = "param", value_parser = parse_key_val)]
    pub params: Vec<(String, f64)>,
}

#[derive(Args, Debug, Clone)]
pub struct SpecArgs {
    /// Model document (JSON); `-` reads stdin.
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Named construction: model1, model2 or gaussian_factor.
    #[arg(long)]
    pub preset: Option<String>,
    /// Preset parameter as `name=value`.
    #[arg(long = "param", value_parser = parse_key_val, requires = "preset")]
    pub params: Vec<(String, f64)>,
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Exit with code 3 when a coefficient is unknown.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Explicit comma-separated q grid; overrides the log-spaced default.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    /// Number of log-spaced points in 1 - q.
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tail_min: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub tail_max: f64,
    /// Add the eta diagnostic at the marginal quantiles.
    #[arg(long)]
    pub eta: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Two-column CSV (`x1,x2`) to estimate from instead of simulating.
    #[arg(long, conflicts_with_all = ["spec", "preset"])]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated levels for chi(q).
    #[arg(long, value_delimiter = ',', default_value = "0.99")]
    pub q: Vec<f64>,
    /// Upper order statistics for the Hill estimate; default floor(n^0.6).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.999)]
    pub q: f64,
    #[arg(long)]
    pub k: Option<usize>,
    /// Allowed distance in standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub z: f64,
    /// Absolute tolerance floor for eta.
    #[arg(long, default_value_t = 0.05)]
    pub eta_tol: f64,
    /// Replace the symbolic chi by this value.
    #[arg(long)]
    pub chi: Option<f64>,
    /// Replace the symbolic eta by this value.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_key_val(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn sink<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn load(args: &SpecArgs) -> Result<Model, CliError> {
    let doc = match (&args.spec, &args.preset) {
        (Some(p), None) => {
            let mut text = String::new();
            if p.as_os_str() == "-" {
                io::stdin().read_to_string(&mut text)?;
            } else {
                text = std::fs::read_to_string(p)?;
            }
            schema::parse(&text)?
        }
        (None, Some(name)) => schema::preset_document(name, &args.params),
        _ => return Err(CliError::Invalid("give --spec or --preset".into())),
    };
    doc.model()
}

fn load_construction(args: &SpecArgs) -> Result<ConstructionSpec, CliError> {
    match load(args)? {
        Model::Construction(s) => Ok(s),
        _ => Err(CliError::Invalid("this command needs a full construction, not tail classes".into())),
    }
}

pub fn summary_of(model: &Model) -> Result<DependenceSummary, CliError> {
    Ok(match model {
        Model::Construction(spec) => summarize(spec)?,
        Model::Unconstrained(input) => coefficients_unconstrained(input)?,
        Model::Constrained { radial, angular } => {
            let profile = angular.norm_profile().expect("sphere angular model");
            coefficients_constrained(
                &RadialTail::from_class(radial),
                profile,
                angular.prob_at_upper(),
                Some(angular),
            )?
        }
    })
}

fn classify(a: &ClassifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut params: Vec<(String, f64)> = a.params.clone();
    for (k, v) in [("shp", a.shp), ("scl", a.scl), ("loc", a.loc)] {
        if let Some(v) = v {
            params.push((k.into(), v));
        }
    }
    let refs: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let classes: Vec<TailClass> = classify_parametric(&a.family, &refs)?;
    write_json(out, &classes)
}

fn coeffs(a: &CoeffsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let s = summary_of(&load(&a.spec)?)?;
    write_json(sink(&a.out, stdout)?, &s)?;
    if a.strict {
        for (name, c) in [("chi", &s.chi), ("eta", &s.eta)] {
            if let Coefficient::Unknown { reason } = c {
                return Err(CliError::Unknown(format!("{name}: {reason} [{}]", s.rule)));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CurveJson<'a> {
    curve: &'a ChiCurve,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<&'a EtaDiagnostic>,
}

fn curve(a: &CurveArgs, pool: &ThreadPool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = load_construction(&a.spec)?;
    let tails: Vec<f64> = if a.q.is_empty() {
        if a.points == 0 || !(a.tail_min > 0.0 && a.tail_min <= a.tail_max && a.tail_max < 1.0) {
            return Err(CliError::Invalid("need points >= 1 and 0 < tail-min <= tail-max < 1".into()));
        }
        log_tail_grid(a.tail_max, a.tail_min, a.points)
    } else {
        a.q.iter().map(|q| 1.0 - q).collect()
    };
    let curve = parallel::chi_curve_tails(pool, &spec, &tails)?;
    let eta = if a.eta {
        let x = quantile_grid(&spec, &tails)?;
        Some(eta_diagnostic(&spec, &x)?)
    } else {
        None
    };
    let out = sink(&a.out, stdout)?;
    match a.format {
        Format::Csv => write_chi_curve(out, &curve, eta.as_ref()),
        Format::Json => write_json(
            out,
            &CurveJson {
                curve: &curve,
                eta: eta.as_ref(),
            },
        ),
    }
}

fn simulate(a: &SimulateArgs, pool: &ThreadPool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = load_construction(&a.spec)?;
    let batch = parallel::sample(pool, &spec, a.n, a.seed)?;
    write_batch(sink(&a.out, stdout)?, &batch)
}

#[derive(Serialize)]
struct ChiAt {
    q: f64,
    #[serde(flatten)]
    estimate: Estimate,
}

#[derive(Serialize)]
struct EstimateReport {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fingerprint: Option<u64>,
    chi: Vec<ChiAt>,
    k: usize,
    eta: Estimate,
}

fn estimate(a: &EstimateArgs, pool: &ThreadPool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (batch, seed, fp) = match &a.data {
        Some(path) => {
            let pairs = read_pairs(File::open(path)?)?;
            if pairs.is_empty() {
                return Err(CliError::Invalid("data file has no rows".into()));
            }
            let n = pairs.len();
            let batch = SampleBatch {
                n,
                seed: 0,
                pairs,
                fingerprint: 0,
            };
            (batch, None, None)
        }
        None => {
            let spec = load_construction(&a.spec)?;
            let n = a.n.ok_or_else(|| CliError::Invalid("--n is required when simulating".into()))?;
            let seed = a
                .seed
                .ok_or_else(|| CliError::Invalid("--seed is required when simulating".into()))?;
            let batch = parallel::sample(pool, &spec, n, seed)?;
            let fp = batch.fingerprint;
            (batch, Some(seed), Some(fp))
        }
    };
    let chi = a
        .q
        .iter()
        .map(|&q| Ok(ChiAt { q, estimate: empirical_chi(&batch, q)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let k = a.k.unwrap_or_else(|| default_k(batch.n));
    let eta = hill_eta(&batch, k)?;
    let report = EstimateReport {
        n: batch.n,
        seed,
        fingerprint: fp,
        chi,
        k,
        eta,
    };
    write_json(sink(&a.out, stdout)?, &report)
}

fn verify(a: &VerifyArgs, pool: &ThreadPool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = load_construction(&a.spec)?;
    let mut symbolic = summarize(&spec)?;
    if let Some(c) = a.chi {
        symbolic.chi = Coefficient::defined(c);
    }
    if let Some(e) = a.eta {
        symbolic.eta = Coefficient::defined(e);
    }
    let budget = Budget {
        n: a.n,
        q: a.q,
        k: a.k,
        z: a.z,
        eta_tol: a.eta_tol,
    };
    let batch = parallel::sample(pool, &spec, a.n, a.seed)?;
    let report = simest::verify_batch(&spec, &batch, &symbolic, budget)?;
    #[derive(Serialize)]
    struct Out<'a> {
        passed: bool,
        symbolic: &'a DependenceSummary,
        #[serde(flatten)]
        report: &'a simest::VerifyReport,
    }
    write_json(
        sink(&a.out, stdout)?,
        &Out {
            passed: report.passed(),
            symbolic: &symbolic,
            report: &report,
        },
    )
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let pool = parallel::pool(cli.threads)?;
    match &cli.command {
        Command::Classify(a) => classify(a, stdout),
        Command::Coeffs(a) => coeffs(a, stdout),
        Command::Curve(a) => curve(a, &pool, stdout),
        Command::Simulate(a) => simulate(a, &pool, stdout),
        Command::Estimate(a) => estimate(a, &pool, stdout),
        Command::Verify(a) => verify(a, &pool, stdout),
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "taildep: {e}");
            e.exit_code()
        }
    }
}
