//! Command-line front end.
//!
//! Exit codes: 0 when the design passes the equivalence check, 2 when it
//! fails, 1 for usage and input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{ExactDesign, MarginalDesign};
use crate::discretize::{discretize_design, DiscretizeOptions, OrbitPlan, Polytope, Strategy, Weighting};
use crate::equivariance::{canonicalize, push_forward};
use crate::error::{DesignError, Result};
use crate::information::marginal_log_det;
use crate::models::{IntensityModel, ShiftedIntensity};
use crate::solver::{self, solve_canonical, CaseLabel, SolveOptions, SolveReport, SupportForm};
use crate::verify::{kw_check_with_tol, oracle_three_point, oracle_two_point};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_KW_FAIL: i32 = 2;

/// Precision of sweep endpoints in β₀.
pub const ENDPOINT_TOL: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(name = "ball-design", version, about = "Locally D-optimal designs on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and certify the result.
    Solve(SolveArgs),
    /// Solve over a range of intercepts and report the interior-support interval.
    Sweep(SweepArgs),
    /// Turn the optimal design into an exact design on polytope vertices.
    Discretize(DiscretizeArgs),
    /// Equivalence-theorem check plus a brute-force oracle comparison.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    /// logit, probit or exponential.
    #[arg(long)]
    model: Option<String>,
    /// Dimension of the ball.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated parameter vector of length k + 1.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', conflicts_with_all = ["beta0", "beta1"])]
    beta: Option<Vec<f64>>,
    /// Intercept of a canonical problem.
    #[arg(long, allow_hyphen_values = true)]
    beta0: Option<f64>,
    /// Slope of a canonical problem.
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<f64>,
    /// JSON file {model, k, beta, options}; flags override its fields.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    k: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    beta1: f64,
    /// start:stop:step
    #[arg(long = "beta0-range", allow_hyphen_values = true)]
    beta0_range: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Auto,
    Simplex,
    Cross,
    Cube,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum WeightingArg {
    Equal,
    Exact,
}

#[derive(Args, Debug)]
struct DiscretizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    /// Vertex count per support level, in decreasing x₁ order (overrides --strategy).
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "equal")]
    weighting: WeightingArg,
    /// Seed for a reproducible rotation of every polytope about the x₁-axis.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of x₁ grid points for the equivalence check.
    #[arg(long, default_value_t = solver::KW_GRID)]
    grid: usize,
    /// Grid resolution of the brute-force oracle; 0 skips it.
    #[arg(long = "oracle-resolution", default_value_t = 2001)]
    oracle_resolution: usize,
    /// Check this design instead of the solver's: a solve report or {points, weights}.
    #[arg(long = "force-design")]
    force_design: Option<PathBuf>,
}

/// Contents of a `--problem` file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub model: Option<String>,
    pub k: Option<usize>,
    pub beta: Option<Vec<f64>>,
    #[serde(default)]
    pub options: ProblemOptions,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    pub kw_grid: Option<usize>,
    pub kw_tol: Option<f64>,
}

struct Problem {
    model: IntensityModel,
    beta: Vec<f64>,
    opts: SolveOptions,
}

impl Problem {
    fn k(&self) -> usize {
        self.beta.len() - 1
    }

    fn shifted(&self) -> Result<ShiftedIntensity> {
        let p = canonicalize(&self.beta)?;
        ShiftedIntensity::new(self.model.clone(), p.beta0(), p.beta1_tilde())
    }
}

fn usage(msg: impl Into<String>) -> DesignError {
    DesignError::Contract(msg.into())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn resolve_problem(args: &ProblemArgs) -> Result<Problem> {
    let file: ProblemFile = match &args.problem {
        Some(p) => read_json(p)?,
        None => ProblemFile::default(),
    };
    let name = args
        .model
        .clone()
        .or(file.model)
        .ok_or_else(|| usage("--model is required"))?;
    let model = IntensityModel::from_name(&name)?;
    let k = args.k.or(file.k);
    let beta = if let Some(b) = &args.beta {
        b.clone()
    } else if args.beta0.is_some() || args.beta1.is_some() {
        let k = k.ok_or_else(|| usage("--k is required with --beta0/--beta1"))?;
        if k == 0 {
            return Err(DesignError::Dimension("k must be at least 1".into()));
        }
        let mut b = vec![0.0; k + 1];
        b[0] = args.beta0.ok_or_else(|| usage("--beta0 is required with --beta1"))?;
        b[1] = args.beta1.ok_or_else(|| usage("--beta1 is required with --beta0"))?;
        b
    } else {
        file.beta.ok_or_else(|| usage("--beta or --beta0/--beta1 is required"))?
    };
    if let Some(k) = k {
        if beta.len() != k + 1 {
            return Err(DesignError::Dimension(format!(
                "--k {k} needs {} parameters, got {}",
                k + 1,
                beta.len()
            )));
        }
    }
    if beta.len() < 2 {
        return Err(DesignError::Dimension("parameter vector needs length >= 2".into()));
    }
    let mut opts = SolveOptions::default();
    if let Some(g) = file.options.kw_grid {
        opts.kw_grid = g;
    }
    if let Some(t) = file.options.kw_tol {
        opts.kw_tol = t;
    }
    Ok(Problem { model, beta, opts })
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Output of `solve`: the report plus where the x₁-axis points in the
/// original coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOutput {
    #[serde(flatten)]
    pub report: SolveReport,
    /// Unit vector of the canonical x₁-axis in original coordinates.
    pub axis: Vec<f64>,
    /// The optimal design itself when it is finitely supported (β₁ = 0).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub design: Option<ExactDesign>,
}

fn solve_problem(p: &Problem) -> Result<SolveOutput> {
    let problem = canonicalize(&p.beta)?;
    let s = p.shifted()?;
    let mut report = solve_canonical(&s, p.k(), p.opts)?;
    report.beta = p.beta.clone();
    let design = if report.case == CaseLabel::Degenerate {
        Some(push_forward(&solver::solve_degenerate(p.k())?, &problem)?)
    } else {
        None
    };
    Ok(SolveOutput {
        axis: problem.rotation().column(0).iter().copied().collect(),
        report,
        design,
    })
}

fn json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| usage(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| usage(e.to_string()))
}

fn write_line(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| usage(e.to_string()))
}

fn pair(m: &MarginalDesign) -> (f64, f64, f64, f64) {
    let x = m.points();
    let w = m.weights();
    (
        x[0],
        x.get(1).copied().unwrap_or(f64::NAN),
        w[0],
        w.get(1).copied().unwrap_or(f64::NAN),
    )
}

fn kw_exit(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_KW_FAIL
    }
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let p = resolve_problem(&args.problem)?;
    let result = solve_problem(&p)?;
    let r = &result.report;
    match args.problem.format {
        Format::Json => json_line(out, &result)?,
        Format::Csv => {
            let (x1, x2, w1, w2) = pair(&r.marginal);
            write_line(out, "model,k,beta0,beta1,case,form,x11,x12,w1,w2,log_det,kw_max,kw_pass")?;
            let form = serde_json::to_value(r.form).map_err(|e| usage(e.to_string()))?;
            write_line(
                out,
                &[
                    r.model.clone(),
                    r.k.to_string(),
                    sig12(r.beta0),
                    sig12(r.beta1),
                    r.case.to_string(),
                    form.as_str().unwrap_or_default().to_string(),
                    sig12(x1),
                    sig12(x2),
                    sig12(w1),
                    sig12(w2),
                    sig12(r.log_det),
                    sig12(r.kw_max),
                    r.kw_pass.to_string(),
                ]
                .join(","),
            )?;
        }
    }
    Ok(kw_exit(r.kw_pass))
}

/// One row of a β₀ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta0: f64,
    pub x11: f64,
    pub x12: f64,
    pub w1: f64,
    pub w2: f64,
    pub case: CaseLabel,
    pub form: SupportForm,
    pub kw_pass: bool,
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("range `{spec}` is not start:stop:step")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| usage(format!("range `{spec}`: {e}"))))
        .collect::<Result<_>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(usage(format!("empty range `{spec}`")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

fn sweep_point(model: &IntensityModel, k: usize, beta0: f64, beta1: f64) -> Result<SweepRow> {
    let s = ShiftedIntensity::new(model.clone(), beta0, beta1)?;
    let r = solve_canonical(&s, k, SolveOptions::default())?;
    let (x11, x12, w1, w2) = pair(&r.marginal);
    Ok(SweepRow {
        beta0,
        x11,
        x12,
        w1,
        w2,
        case: r.case,
        form: r.form,
        kw_pass: r.kw_pass,
    })
}

/// Solves every β₀ in parallel; rows come back in input order.
pub fn sweep(model: &IntensityModel, k: usize, beta1: f64, beta0s: &[f64]) -> Result<Vec<SweepRow>> {
    beta0s
        .par_iter()
        .map(|&b0| sweep_point(model, k, b0, beta1))
        .collect()
}

fn interior(model: &IntensityModel, k: usize, beta0: f64, beta1: f64) -> Result<bool> {
    Ok(sweep_point(model, k, beta0, beta1)?.form == SupportForm::Interior)
}

/// Maximal runs of interior support along a sweep, with both ends refined by
/// bisection in β₀ to [`ENDPOINT_TOL`]. Runs touching the range ends are left
/// at the range end.
pub fn interior_intervals(
    model: &IntensityModel,
    k: usize,
    beta1: f64,
    rows: &[SweepRow],
) -> Result<Vec<(f64, f64)>> {
    let refine = |mut out_b0: f64, mut in_b0: f64| -> Result<f64> {
        while (in_b0 - out_b0).abs() > ENDPOINT_TOL {
            let mid = 0.5 * (in_b0 + out_b0);
            if interior(model, k, mid, beta1)? {
                in_b0 = mid;
            } else {
                out_b0 = mid;
            }
        }
        Ok(0.5 * (in_b0 + out_b0))
    };
    let flags: Vec<bool> = rows.iter().map(|r| r.form == SupportForm::Interior).collect();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < rows.len() && flags[i] {
            i += 1;
        }
        let end = i - 1;
        let lo = if start == 0 {
            rows[0].beta0
        } else {
            refine(rows[start - 1].beta0, rows[start].beta0)?
        };
        let hi = if end + 1 == rows.len() {
            rows[end].beta0
        } else {
            refine(rows[end + 1].beta0, rows[end].beta0)?
        };
        runs.push((lo, hi));
    }
    Ok(runs)
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let model = IntensityModel::from_name(&args.model)?;
    if args.k == 0 {
        return Err(DesignError::Dimension("k must be at least 1".into()));
    }
    let beta0s = parse_range(&args.beta0_range)?;
    let rows = sweep(&model, args.k, args.beta1, &beta0s)?;
    write_line(out, "beta0,x11,x12,w1,w2,case")?;
    for r in &rows {
        write_line(
            out,
            &format!(
                "{},{},{},{},{},{}",
                sig12(r.beta0),
                sig12(r.x11),
                sig12(r.x12),
                sig12(r.w1),
                sig12(r.w2),
                r.case
            ),
        )?;
    }
    let intervals = interior_intervals(&model, args.k, args.beta1, &rows)?;
    if intervals.is_empty() {
        write_line(err, "interior support: none in range")?;
    }
    for (lo, hi) in &intervals {
        write_line(err, &format!("interior support for beta0 in ({}, {})", sig12(*lo), sig12(*hi)))?;
    }
    let all_pass = rows.iter().all(|r| r.kw_pass);
    if !all_pass {
        for r in rows.iter().filter(|r| !r.kw_pass) {
            write_line(err, &format!("equivalence check failed at beta0 = {}", sig12(r.beta0)))?;
        }
    }
    Ok(kw_exit(all_pass))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizeOutput {
    pub case: CaseLabel,
    pub marginal: MarginalDesign,
    /// Exact design in the original coordinates.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub orbits: Vec<OrbitPlan>,
    pub d_efficiency: f64,
}

fn cmd_discretize(args: &DiscretizeArgs, out: &mut dyn Write) -> Result<i32> {
    let p = resolve_problem(&args.problem)?;
    let solved = solve_problem(&p)?;
    let problem = canonicalize(&p.beta)?;
    let s = p.shifted()?;
    let strategy = match (&args.counts, args.strategy) {
        (Some(c), _) => Strategy::Counts(c.clone()),
        (None, StrategyArg::Auto) => Strategy::Auto,
        (None, StrategyArg::Simplex) => Strategy::Uniform(Polytope::Simplex),
        (None, StrategyArg::Cross) => Strategy::Uniform(Polytope::CrossPolytope),
        (None, StrategyArg::Cube) => Strategy::Uniform(Polytope::Cube),
    };
    let opts = DiscretizeOptions {
        strategy,
        weighting: match args.weighting {
            WeightingArg::Equal => Weighting::Equal,
            WeightingArg::Exact => Weighting::Exact,
        },
        seed: args.seed,
    };
    let marginal = &solved.report.marginal;
    let d = discretize_design(&s, marginal, p.k(), &opts)?;
    let design = push_forward(&d.design, &problem)?;
    let output = DiscretizeOutput {
        case: solved.report.case,
        marginal: marginal.clone(),
        points: design.points().to_vec(),
        weights: design.weights().to_vec(),
        orbits: d.orbits,
        d_efficiency: d.efficiency,
    };
    match args.problem.format {
        Format::Json => json_line(out, &output)?,
        Format::Csv => {
            let header: Vec<String> = (1..=p.k()).map(|i| format!("x{i}")).chain(["weight".into()]).collect();
            write_line(out, &header.join(","))?;
            for (pt, w) in output.points.iter().zip(&output.weights) {
                let row: Vec<String> = pt.iter().chain([w]).map(|v| sig12(*v)).collect();
                write_line(out, &row.join(","))?;
            }
        }
    }
    Ok(kw_exit(solved.report.kw_pass))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub model: String,
    pub k: usize,
    pub beta0: f64,
    pub beta1: f64,
    pub marginal: MarginalDesign,
    pub log_det: f64,
    pub kw_max: f64,
    pub kw_argmax: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<MarginalDesign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_log_det: Option<f64>,
    /// Oracle log-det minus design log-det; positive when the oracle wins.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
}

fn forced_design(path: &PathBuf) -> Result<(MarginalDesign, Option<ProblemFile>)> {
    let value: serde_json::Value = read_json(path)?;
    let bad = |e: serde_json::Error| usage(format!("{}: {e}", path.display()));
    if let Some(m) = value.get("marginal") {
        let marginal = serde_json::from_value(m.clone()).map_err(bad)?;
        let problem = ProblemFile {
            model: value.get("model").and_then(|v| v.as_str()).map(String::from),
            k: value.get("k").and_then(|v| v.as_u64()).map(|v| v as usize),
            beta: value
                .get("beta")
                .and_then(|v| serde_json::from_value(v.clone()).ok()),
            options: ProblemOptions::default(),
        };
        Ok((marginal, Some(problem)))
    } else {
        Ok((serde_json::from_value(value).map_err(bad)?, None))
    }
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (forced, from_report) = match &args.force_design {
        Some(path) => {
            let (m, f) = forced_design(path)?;
            (Some(m), f)
        }
        None => (None, None),
    };
    let p = match (&from_report, &args.problem) {
        // a solve report carries its own problem unless flags say otherwise
        (Some(f), a) if a.model.is_none() && a.problem.is_none() && a.beta.is_none() && a.beta0.is_none() => {
            let model = IntensityModel::from_name(f.model.as_deref().ok_or_else(|| usage("report has no model"))?)?;
            let beta = f.beta.clone().ok_or_else(|| usage("report has no beta"))?;
            Problem {
                model,
                beta,
                opts: SolveOptions::default(),
            }
        }
        _ => resolve_problem(&args.problem)?,
    };
    let k = p.k();
    let s = p.shifted()?;
    let marginal = match forced {
        Some(m) => m,
        None => solve_canonical(&s, k, p.opts)?.marginal,
    };
    let kw = kw_check_with_tol(&s, &marginal, k, args.grid, p.opts.kw_tol)?;
    let log_det = marginal_log_det(&s, &marginal, k)?;
    let (oracle, oracle_log_det) = if args.oracle_resolution == 0 || s.beta1() == 0.0 {
        (None, None)
    } else {
        let mut best = oracle_two_point(&s, k, args.oracle_resolution)?;
        let mut best_ld = marginal_log_det(&s, &best, k)?;
        if !s.model().properties().a5 {
            if let Ok(three) = oracle_three_point(&s, k, args.oracle_resolution) {
                let ld = marginal_log_det(&s, &three, k)?;
                if ld > best_ld {
                    best = three;
                    best_ld = ld;
                }
            }
        }
        (Some(best), Some(best_ld))
    };
    let output = VerifyOutput {
        model: s.model().name().to_string(),
        k,
        beta0: s.beta0(),
        beta1: s.beta1(),
        marginal,
        log_det,
        kw_max: kw.max_psi,
        kw_argmax: kw.argmax_x1,
        pass: kw.pass,
        oracle,
        oracle_log_det,
        oracle_gap: oracle_log_det.map(|o| o - log_det),
    };
    if !kw.pass {
        write_line(
            err,
            &format!(
                "equivalence check failed: max psi = {} > {} at x1 = {}",
                sig12(kw.max_psi),
                k + 1,
                sig12(kw.argmax_x1)
            ),
        )?;
    }
    match args.problem.format {
        Format::Json => json_line(out, &output)?,
        Format::Csv => {
            write_line(out, "kw_max,kw_argmax,pass,log_det,oracle_log_det,oracle_gap")?;
            let opt = |v: Option<f64>| v.map(sig12).unwrap_or_default();
            write_line(
                out,
                &format!(
                    "{},{},{},{},{},{}",
                    sig12(output.kw_max),
                    sig12(output.kw_argmax),
                    output.pass,
                    sig12(output.log_det),
                    opt(output.oracle_log_det),
                    opt(output.oracle_gap)
                ),
            )?;
        }
    }
    Ok(kw_exit(kw.pass))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Discretize(a) => cmd_discretize(a, out),
        Command::Verify(a) => cmd_verify(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
