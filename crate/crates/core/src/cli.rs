//! The `rsg` command line: argument parsing, file input, JSON/CSV output
//! and exit codes (0 ok, 1 failed invariant, 2 bad input, 3 domain error).

use std::f64::consts::LN_2;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    capacity_decay_curve, curve_csv, discrete_t1_bound, empirical_t1, empirical_t2, k_constant, succ_prob_bound,
    t1_bound_from_beta, t2_bound_from_beta2, BoundReport,
};
use crate::constants::{alpha_estimate, beta2_depolarizing_closed_form, beta_discrete, beta_estimate, spectral_gap};
use crate::divergence::{information_radius, sandwiched_divergence, MinimaxOptions};
use crate::dynamics::{Channel, Semigroup};
use crate::error::{invalid, Error, Result};
use crate::estimate::ConstantEstimate;
use crate::functionals::variance;
use crate::io::{matrix_to_json, parse_density, parse_dynamics, Dynamics};
use crate::opalg::matrix::DensityMatrix;
use crate::optim::OptimOptions;
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rsg", version, about = "Rényi divergence decay, convergence constants and mixing bounds for quantum semigroups")]
pub struct Cli {
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for multistart searches (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Multistart restarts per estimate.
    #[arg(long, global = true, default_value_t = 64)]
    pub restarts: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MixingKind {
    T1,
    T2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    Divergence,
    Variance,
    Capacity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sandwiched Rényi divergence of two density matrix files.
    Divergence {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Order p ≥ 1, or `inf`.
        #[arg(long, default_value = "2")]
        p: String,
        /// Exit with code 3 on a support violation instead of reporting it.
        #[arg(long)]
        strict: bool,
    },
    /// Fixed point, primitivity, reversibility and constants of a generator.
    Analyze { file: PathBuf },
    /// Spectral gap.
    Gap { file: PathBuf },
    /// Estimate of β_p.
    Beta {
        file: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Estimate of the log-Sobolev constant α_p.
    Alpha {
        file: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Estimate of β_D for a channel.
    BetaD { file: PathBuf },
    /// Empirical mixing time next to the closed-form bounds.
    MixingTime {
        file: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = MixingKind::T1)]
        kind: MixingKind,
    },
    /// Decay curves: D_p(t), Var(t) or the success probability bound over (t, R).
    Curve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CurveKind::Capacity)]
        kind: CurveKind,
        /// `start:stop:step`, inclusive of `stop` up to rounding.
        #[arg(long = "t-grid", default_value = "0:5:0.5")]
        t_grid: String,
        #[arg(long = "r-grid", default_value = "0.5:1:0.25")]
        r_grid: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Channel uses for the capacity curve.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Input state for the divergence and variance curves (default: the
        /// projector onto the smallest eigenvector of σ).
        #[arg(long)]
        rho: Option<PathBuf>,
        /// Certified β_p lower bound for the capacity curve (default: gap route).
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = UnitsArg::Bits)]
        units: UnitsArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Success probability bound for n uses of e^{tL} at rate R.
    StrongConverse {
        file: PathBuf,
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = UnitsArg::Bits)]
        units: UnitsArg,
        /// Also estimate the information radius of e^{tL}.
        #[arg(long)]
        radius: bool,
    },
    /// Run property suites; prints one JSON line per check.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotSquare { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotHermitian(_)
            | Error::NotPositive(_)
            | Error::InvalidTrace(_)
            | Error::InvalidParameter(_)
            | Error::InvalidGenerator(_)
            | Error::InvalidChannel(_)
            | Error::Parse(_) => EXIT_INPUT,
            _ => EXIT_DOMAIN,
        };
        CliError { code, message: e.to_string() }
    }
}

fn input_error(msg: impl Into<String>) -> CliError {
    CliError { code: EXIT_INPUT, message: msg.into() }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn parse_order(s: &str) -> CliResult<f64> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| input_error(format!("invalid order '{s}'"))),
    }
}

/// Parses `start:stop:step` into the points `start + k·step ≤ stop`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|_| invalid(format!("invalid grid '{s}'"))))
        .collect::<Result<_>>()?;
    let [a, b, h] = parts[..] else {
        return Err(invalid(format!("grid must be start:stop:step, got '{s}'")));
    };
    if !(h > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(invalid(format!("grid needs finite bounds and a positive step, got '{s}'")));
    }
    if b < a {
        return Ok(Vec::new());
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(Error::ResourceGuard(format!("grid '{s}' has more than 10^6 points")));
    }
    Ok((0..=n).map(|k| a + k as f64 * h).collect())
}

fn load_semigroup(path: &Path) -> CliResult<(Semigroup, Option<DensityMatrix>)> {
    match parse_dynamics(&read(path)?)? {
        Dynamics::Continuous { generator, depolarizing_sigma } => Ok((Semigroup::new(generator)?, depolarizing_sigma)),
        Dynamics::Discrete(_) => Err(input_error("expected a continuous-time generator, found a channel")),
    }
}

fn load_channel(path: &Path) -> CliResult<Channel> {
    match parse_dynamics(&read(path)?)? {
        Dynamics::Discrete(c) => Ok(c),
        Dynamics::Continuous { .. } => Err(input_error("expected a channel, found a continuous-time generator")),
    }
}

fn estimate_json(e: &ConstantEstimate, unit: &str) -> Value {
    json!({
        format!("value_{unit}"): finite(e.value),
        "method": e.method,
        "restarts": e.restarts,
        "converged": e.converged,
        "witness": e.witness.as_ref().map(|w| serde_json::from_str::<Value>(&matrix_to_json(w)).unwrap_or(Value::Null)),
        "detail": e.detail,
    })
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn bound_json(b: &BoundReport) -> Value {
    serde_json::to_value(b).unwrap_or(Value::Null)
}

fn matrix_value(m: &crate::opalg::matrix::CMat) -> Value {
    serde_json::from_str(&matrix_to_json(m)).unwrap_or(Value::Null)
}

fn emit(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).unwrap_or_default()).map_err(|e| input_error(e.to_string()))
}

/// Runs a parsed command, writing to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    let opts = OptimOptions { restarts: cli.restarts, seed: cli.seed, max_evals: None, threads: cli.threads };
    match &cli.command {
        Command::Divergence { rho, sigma, p, strict } => {
            let p = parse_order(p)?;
            let rho = parse_density(&read(rho)?)?;
            let sigma = parse_density(&read(sigma)?)?;
            let v = sandwiched_divergence(&rho, &sigma, p)?;
            let support_ok = v.is_finite();
            if !support_ok && *strict {
                return Err(Error::SupportViolation.into());
            }
            emit(out, &json!({ "p": finite(p), "value_nats": finite(v), "support_ok": support_ok }))?;
        }
        Command::Analyze { file } => analyze(file, &opts, out)?,
        Command::Gap { file } => {
            let (sg, _) = load_semigroup(file)?;
            emit(out, &estimate_json(&spectral_gap(&sg)?, "per_time"))?;
        }
        Command::Beta { file, p } => {
            let (sg, _) = load_semigroup(file)?;
            emit(out, &estimate_json(&beta_estimate(&sg, *p, &opts)?, "per_time"))?;
        }
        Command::Alpha { file, p } => {
            let (sg, _) = load_semigroup(file)?;
            emit(out, &estimate_json(&alpha_estimate(&sg, *p, &opts)?, "per_time"))?;
        }
        Command::BetaD { file } => {
            let t = load_channel(file)?;
            emit(out, &estimate_json(&beta_discrete(&t, &opts)?, "per_step"))?;
        }
        Command::MixingTime { file, eps, kind } => mixing(file, *eps, *kind, &opts, out)?,
        Command::Curve { file, kind, t_grid, r_grid, p, n, rho, c, units, format } => {
            let args = CurveArgs { kind: *kind, p: *p, n: *n, c: *c, units: *units, format: *format };
            curve(file, t_grid, r_grid, rho.as_deref(), &args, out)?
        }
        Command::StrongConverse { file, rate, n, p, t, c, units, radius } => {
            let (sg, _) = load_semigroup(file)?;
            let rate_bits = if *units == UnitsArg::Nats { rate / LN_2 } else { *rate };
            let (c, source) = match c {
                Some(c) => (*c, "given"),
                None if *p == 2.0 => (k_constant(spectral_gap(&sg)?.value, sg.sigma(), sg.dim())?, "gap"),
                None => return Err(input_error("--c is required unless p = 2")),
            };
            let b = succ_prob_bound(rate_bits, *n, *p, c, *t, sg.sigma())?;
            let mut v = json!({
                "succ_prob_bound_probability": b.value,
                "clamped": b.clamped,
                "exponent_bits": b.inputs["exponent_bits"],
                "rate_bits": rate_bits,
                "c_per_time": c,
                "c_source": source,
                "t_time": t,
                "n": n,
                "p": p,
            });
            if *radius {
                let channel = Channel::from_superop(sg.propagator(*t))?;
                let mopts = MinimaxOptions { seed: opts.seed, threads: opts.threads, ..MinimaxOptions::default() };
                let r = information_radius(&channel, *p, &mopts)?;
                v["information_radius_bits"] = finite(r.estimate.value);
            }
            emit(out, &v)?;
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let results = run_suite(suite, opts.seed, &opts)?;
            let mut ok = true;
            for r in &results {
                ok &= r.passed;
                writeln!(out, "{}", serde_json::to_string(r).unwrap_or_default()).map_err(|e| input_error(e.to_string()))?;
            }
            if !ok {
                let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| format!("{}/{}", r.suite, r.check)).collect();
                return Err(CliError { code: EXIT_INVARIANT, message: format!("failed: {}", failed.join(", ")) });
            }
        }
    }
    Ok(EXIT_OK)
}

fn analyze(file: &Path, opts: &OptimOptions, out: &mut dyn Write) -> CliResult<()> {
    match parse_dynamics(&read(file)?)? {
        Dynamics::Discrete(t) => {
            let report = t.fixed_point()?;
            let mut v = json!({ "kind": "channel", "dim": t.dim(), "report": report });
            if let Some(s) = &report.sigma {
                v["fixed_point"] = matrix_value(s);
            }
            if report.primitive {
                let b = beta_discrete(&t, opts)?;
                v["beta_d_per_step"] = finite(b.value);
                v["beta_d_method"] = json!(b.method);
            }
            emit(out, &v)
        }
        Dynamics::Continuous { generator, depolarizing_sigma } => {
            let report = generator.fixed_point()?;
            let mut v = json!({
                "kind": "generator",
                "dim": generator.dim(),
                "primitive": report.primitive,
                "kernel_dim": report.kernel_dim,
                "peripheral_count": report.peripheral_count,
                "min_eig_sigma": report.min_eig_sigma,
            });
            if let Some(s) = &report.sigma {
                v["fixed_point"] = matrix_value(s);
            }
            if !report.primitive {
                return emit(out, &v);
            }
            let sg = Semigroup::new(generator)?;
            v["reversible"] = json!(sg.is_reversible());
            v["spectral_gap_per_time"] = finite(spectral_gap(&sg)?.value);
            let beta = match &depolarizing_sigma {
                Some(s) => beta2_depolarizing_closed_form(s)?,
                None => beta_estimate(&sg, 2.0, opts)?,
            };
            v["beta2_per_time"] = finite(beta.value);
            v["beta2_method"] = json!(beta.method);
            let alpha = alpha_estimate(&sg, 2.0, opts)?;
            v["alpha2_estimate_per_time"] = finite(alpha.value);
            v["alpha2_method"] = json!(alpha.method);
            v["t2_empirical_time"] = finite(empirical_t2(&sg, (-1f64).exp(), opts)?.value);
            emit(out, &v)
        }
    }
}

fn mixing(file: &Path, eps: f64, kind: MixingKind, opts: &OptimOptions, out: &mut dyn Write) -> CliResult<()> {
    match parse_dynamics(&read(file)?)? {
        Dynamics::Discrete(t) => {
            if kind == MixingKind::T2 {
                return Err(input_error("channels support --kind t1 only"));
            }
            let b = beta_discrete(&t, opts)?;
            let sigma = t.fixed_point()?.sigma.ok_or_else(|| input_error("channel has no fixed state"))?;
            let bound = discrete_t1_bound(b.value, &sigma, eps)?;
            emit(out, &json!({ "eps": eps, "beta_d_per_step": b.value, "bound_certified": false, "t1_bound": bound_json(&bound) }))
        }
        Dynamics::Continuous { generator, depolarizing_sigma } => {
            let sg = Semigroup::new(generator)?;
            let (beta, certified) = match &depolarizing_sigma {
                Some(s) => (beta2_depolarizing_closed_form(s)?.value, true),
                None => (beta_estimate(&sg, 2.0, opts)?.value, false),
            };
            let (empirical, bound) = match kind {
                MixingKind::T1 => (empirical_t1(&sg, eps, opts)?, t1_bound_from_beta(beta, sg.sigma(), eps)?),
                MixingKind::T2 => (empirical_t2(&sg, eps, opts)?, t2_bound_from_beta2(beta, sg.sigma(), eps)?),
            };
            emit(
                out,
                &json!({
                    "eps": eps,
                    "empirical_time": finite(empirical.value),
                    "empirical": bound_json(&empirical),
                    "beta2_per_time": beta,
                    "bound_certified": certified,
                    "bound_time": bound.value,
                    "bound": bound_json(&bound),
                }),
            )
        }
    }
}

struct CurveArgs {
    kind: CurveKind,
    p: f64,
    n: usize,
    c: Option<f64>,
    units: UnitsArg,
    format: FormatArg,
}

#[derive(Serialize)]
struct Point {
    t: f64,
    value: f64,
}

fn curve(file: &Path, t_grid: &str, r_grid: &str, rho: Option<&Path>, args: &CurveArgs, out: &mut dyn Write) -> CliResult<()> {
    let (sg, _) = load_semigroup(file)?;
    let ts = parse_grid(t_grid)?;
    let write = |out: &mut dyn Write, s: &str| out.write_all(s.as_bytes()).map_err(|e| input_error(e.to_string()));
    let scale = if args.units == UnitsArg::Bits { 1.0 / LN_2 } else { 1.0 };
    let unit = if args.units == UnitsArg::Bits { "bits" } else { "nats" };
    match args.kind {
        CurveKind::Capacity => {
            let rs: Vec<f64> = parse_grid(r_grid)?;
            let rs_bits: Vec<f64> = rs.iter().map(|r| if args.units == UnitsArg::Nats { r / LN_2 } else { *r }).collect();
            let mut rows = capacity_decay_curve(&sg, args.p, &ts, &rs_bits, args.n, args.c)?;
            for (row, r) in rows.iter_mut().zip(rs.iter().cycle()) {
                row.r = *r;
            }
            match args.format {
                FormatArg::Csv => write(out, &curve_csv(&rows)),
                FormatArg::Json => emit(out, &json!({ "rate_units": unit, "rows": rows })),
            }
        }
        CurveKind::Divergence | CurveKind::Variance => {
            let rho = match rho {
                Some(path) => parse_density(&read(path)?)?,
                None => DensityMatrix::new(sg.space().min_eigenprojector())?,
            };
            let x = sg.space().relative_density(&rho)?;
            let mut points = Vec::with_capacity(ts.len());
            for &t in &ts {
                let value = if args.kind == CurveKind::Divergence {
                    sandwiched_divergence(&sg.evolve(&rho, t)?, sg.sigma(), args.p)? * scale
                } else {
                    variance(sg.space(), &sg.evolve_relative(&x, t))?.value
                };
                points.push(Point { t, value });
            }
            let column = if args.kind == CurveKind::Divergence { format!("divergence_{unit}") } else { "variance".to_string() };
            match args.format {
                FormatArg::Csv => {
                    let mut s = format!("t,{column}\n");
                    for pt in &points {
                        s.push_str(&format!("{},{}\n", pt.t, pt.value));
                    }
                    write(out, &s)
                }
                FormatArg::Json => emit(out, &json!({ "column": column, "rows": points })),
            }
        }
    }
}

/// Entry point for the binary: parses `std::env::args`, runs, and maps the
/// outcome to an exit code with errors on stderr.
pub fn main_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

