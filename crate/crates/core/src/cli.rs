//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 infeasible request, 3 failed
//! internal check.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::json;

use crate::error::{invalid, Error, Result};
use crate::figures::{self, header_line, Table};
use crate::montecarlo::{self, DEFAULT_SAMPLES};
use crate::operators::{self, HermitianOperator};
use crate::oracle::{self, OracleConfig};
use crate::separation::{self, AdversarySet, StrategyId};
use crate::spectra::{fidelity_limited, SchmidtSpectrum};
use crate::twoqubit::{self, SweepRow, ThetaFunctions};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

pub const DEFAULT_SEED: u64 = 20_240_229;

#[derive(Debug, Parser)]
#[command(name = "hdecert", version, about = "Plan and validate certification of high-dimensional entanglement")]
pub struct Cli {
    /// Random seed for every stochastic step.
    #[arg(long, global = true, env = "HDECERT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format for single-result commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the result to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct TargetArgs {
    /// Maximally entangled target of local dimension D.
    #[arg(long, value_name = "D", conflicts_with = "spectrum")]
    mes: Option<usize>,

    /// Schmidt coefficients, comma separated decimals or fractions ("2/5").
    #[arg(long, value_name = "LIST")]
    spectrum: Option<String>,
}

impl TargetArgs {
    fn spectrum(&self) -> Result<SchmidtSpectrum> {
        match (&self.mes, &self.spectrum) {
            (Some(d), None) => SchmidtSpectrum::uniform(*d),
            (None, Some(list)) => parse_spectrum(list),
            _ => Err(invalid("give exactly one of --mes or --spectrum")),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Separation probability and number of tests for one target.
    Plan {
        #[command(flatten)]
        target: TargetArgs,
        /// Schmidt number bound of the adversary set.
        #[arg(long)]
        r: usize,
        /// Bound on E_r for the adversary set (0 means Schmidt number at most r).
        #[arg(long = "e", default_value_t = 0.0)]
        e: f64,
        /// Significance level.
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        /// opt, mub, seph or lch.
        #[arg(long, default_value = "mub")]
        strategy: String,
    },
    /// Bounds on separation probabilities for a generic target.
    Bounds {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long)]
        r: usize,
        #[arg(long = "e", default_value_t = 0.0)]
        e: f64,
    },
    /// Two-qubit analysis at one angle or on a sweep.
    Twoqubit {
        /// Angle θ of cos θ|00⟩ + sin θ|11⟩.
        #[arg(long, conflicts_with = "sweep")]
        theta: Option<f64>,
        /// Emit a sweep over this many angles in (0, π/4].
        #[arg(long)]
        sweep: Option<usize>,
        /// Evaluate the separation probability of Ω(θ, p) at this p.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Emit plot data for one figure.
    Fig {
        #[arg(value_enum)]
        name: FigName,
        /// Directory for the CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Haar samples per dimension (fig3, fig4).
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Local dimensions (fig3 default 10,20,…,100; fig4 default 100).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// Schmidt number bounds.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5")]
        rs: Vec<usize>,
        /// Grid points (fig1, fig5).
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Significance level (fig2).
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
    /// Haar ensembles and protocol simulation.
    Montecarlo {
        #[command(subcommand)]
        action: McAction,
    },
    /// Brute-force maximization of tr(Ωσ) over a state set.
    Oracle {
        #[command(flatten)]
        target: TargetArgs,
        /// opt, mub, sep, seph, lch or family.
        #[arg(long, default_value = "opt")]
        operator: String,
        /// Angle for --operator family.
        #[arg(long)]
        theta: Option<f64>,
        /// Mixing parameter for --operator family.
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, value_enum, default_value_t = OracleSet::Rank)]
        set: OracleSet,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long = "e", default_value_t = 0.0)]
        e: f64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Run the self-test battery.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Level::Fast)]
        level: verify::Level,
        /// Corrupt an operator to exercise the failure path.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

impl ValueEnum for verify::Level {
    fn value_variants<'a>() -> &'a [Self] {
        &[verify::Level::Fast, verify::Level::Full]
    }
    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            verify::Level::Fast => "fast",
            verify::Level::Full => "full",
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigName {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleSet {
    Product,
    Rank,
    Limited,
}

#[derive(Debug, Subcommand)]
enum McAction {
    /// Means, histograms and tail fractions of the bounds.
    Ensemble {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        r: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Empirical tail fractions against the concentration bound.
    Tail {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.2,0.3")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Simulate the test protocol against the closest adversarial state.
    Simulate {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long)]
        r: usize,
        #[arg(long = "e", default_value_t = 0.0)]
        e: f64,
        /// Number of rounds.
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        /// Feed the target itself instead of the adversarial state.
        #[arg(long)]
        honest: bool,
    },
}

/// Parses comma-separated decimals or fractions into a spectrum, warning
/// on stderr when a small normalization error is corrected.
pub fn parse_spectrum(list: &str) -> Result<SchmidtSpectrum> {
    let values = list
        .split(',')
        .map(|item| {
            let item = item.trim();
            if item.contains('/') {
                let r: Ratio<i64> = item
                    .parse()
                    .map_err(|_| invalid(format!("cannot parse fraction '{item}'")))?;
                Ok(*r.numer() as f64 / *r.denom() as f64)
            } else {
                item.parse::<f64>()
                    .map_err(|_| invalid(format!("cannot parse number '{item}'")))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let sum: f64 = values.iter().sum();
    let spectrum = SchmidtSpectrum::new(values)?;
    if (sum - 1.0).abs() > 1e-15 {
        eprintln!("warning: spectrum sums to {sum}; renormalized");
    }
    Ok(spectrum)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::InvalidArgument(_)
        | Error::RankOutOfRange { .. }
        | Error::DimensionMismatch(_)
        | Error::NotNormalized(_) => EXIT_USAGE,
        Error::TargetNotFixed(_) | Error::Numerical(_) | Error::BranchMismatch { .. } => EXIT_CHECK,
    }
}

struct Ctx {
    seed: u64,
    format: Format,
    output: Option<PathBuf>,
    command_line: String,
}

impl Ctx {
    fn header(&self) -> String {
        header_line(&self.command_line, self.seed)
    }

    fn emit_text(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
        self.emit_text(&(text + "\n"))
    }

    fn emit_table(&self, table: &Table) -> Result<()> {
        self.emit_text(&table.to_csv(&self.header()))
    }

    /// JSON by default, a one-row CSV of the given columns with `--format csv`.
    fn emit_record<T: Serialize>(&self, value: &T, columns: &[(&str, String)]) -> Result<()> {
        match self.format {
            Format::Json => self.emit_json(value),
            Format::Csv => {
                let mut t = Table::new(columns.iter().map(|(k, _)| *k));
                t.push(columns.iter().map(|(_, v)| v.clone()).collect());
                self.emit_table(&t)
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let command_line = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let ctx = Ctx {
        seed: cli.seed,
        format: cli.format,
        output: cli.output.clone(),
        command_line,
    };
    match dispatch(&ctx, cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn adversary(r: usize, e: f64) -> AdversarySet {
    if e == 0.0 {
        AdversarySet::SchmidtRank { r }
    } else {
        AdversarySet::LimitedEr { r, e }
    }
}

fn dispatch(ctx: &Ctx, command: Command) -> Result<i32> {
    match command {
        Command::Plan { target, r, e, delta, strategy } => {
            let spectrum = target.spectrum()?;
            let id: StrategyId = strategy.parse()?;
            let plan = separation::plan(&spectrum, adversary(r, e), delta, id)?;
            let out = json!({
                "plan": plan,
                "strategy": id.describe(),
                "beta": id.beta(&spectrum)?,
                "fidelity": fidelity_limited(&spectrum, r, e)?,
            });
            ctx.emit_record(
                &out,
                &[
                    ("r", r.to_string()),
                    ("E", e.to_string()),
                    ("delta", delta.to_string()),
                    ("strategy", strategy.to_ascii_lowercase()),
                    ("P", plan.separation_probability.to_string()),
                    ("N", plan.tests_required.to_string()),
                ],
            )?;
        }
        Command::Bounds { target, r, e } => {
            let spectrum = target.spectrum()?;
            let b = if e == 0.0 {
                separation::bounds_rank(&spectrum, r)?
            } else {
                separation::bounds_limited(&spectrum, r, e)?
            };
            let mub = separation::sep_prob_mub(&spectrum, r, e)?;
            let out = json!({
                "spectrum": spectrum,
                "r": r,
                "e": e,
                "bounds": b,
                "mub": mub,
            });
            ctx.emit_record(
                &out,
                &[
                    ("r", r.to_string()),
                    ("E", e.to_string()),
                    ("psep_lb", b.psep_lb.to_string()),
                    ("psep_h", b.psep_h.to_string()),
                    ("plc_ub", b.plc_ub.to_string()),
                    ("mub", mub.to_string()),
                ],
            )?;
        }
        Command::Twoqubit { theta, sweep, p } => match (theta, sweep) {
            (Some(theta), None) => {
                let f = ThetaFunctions::at(theta)?;
                let row = SweepRow::at(theta)?;
                let mut out = json!({
                    "functions": f,
                    "theta_star": twoqubit::theta_star(),
                    "theta2_star": twoqubit::theta2_star(),
                    "theta3_star": twoqubit::theta3_star()?,
                    "concurrence": (2.0 * f.theta).sin(),
                    "p_sep": row.p_sep,
                    "curves": {
                        "p2star": row.p_p2,
                        "p3star": row.p_p3,
                        "omega1": row.p_omega1,
                        "omega0": row.p_omega0,
                    },
                });
                if let Some(p) = p {
                    out["p"] = json!(p);
                    out["p_closed"] = json!(twoqubit::p_closed(theta, p)?);
                    out["a_star"] = json!(twoqubit::a_star(theta, p)?);
                }
                let columns: Vec<(&str, String)> = twoqubit::SWEEP_HEADER
                    .iter()
                    .zip(row.values())
                    .map(|(k, v)| (*k, v.to_string()))
                    .collect();
                ctx.emit_record(&out, &columns)?;
            }
            (None, Some(points)) => {
                if points == 0 {
                    return Err(invalid("--sweep needs at least one point"));
                }
                ctx.emit_table(&figures::fig5(points)?)?;
            }
            _ => return Err(invalid("give exactly one of --theta or --sweep")),
        },
        Command::Fig { name, out, samples, dims, rs, points, delta } => {
            std::fs::create_dir_all(&out)
                .map_err(|e| invalid(format!("cannot create {}: {e}", out.display())))?;
            let write = |file: &str, table: &Table| -> Result<PathBuf> {
                let path = out.join(file);
                write_file(&path, &table.to_csv(&ctx.header()))?;
                Ok(path)
            };
            let written = match name {
                FigName::Fig1 => vec![write("fig1.csv", &figures::fig1(4, points)?)?],
                FigName::Fig2 => vec![write("fig2.csv", &figures::fig2(delta, 100, &rs)?)?],
                FigName::Fig3 | FigName::Fig4 => {
                    let dims = if !dims.is_empty() {
                        dims
                    } else if name == FigName::Fig3 {
                        (1..=10).map(|k| 10 * k).collect()
                    } else {
                        vec![100]
                    };
                    let stats = figures::ensembles(&dims, &rs, samples, ctx.seed)?;
                    if name == FigName::Fig3 {
                        vec![write("fig3.csv", &figures::fig3(&stats))?]
                    } else {
                        vec![write("fig4.csv", &figures::fig4(&stats))?]
                    }
                }
                FigName::Fig5 => vec![write("fig5.csv", &figures::fig5(points)?)?],
            };
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Montecarlo { action } => montecarlo_cmd(ctx, action)?,
        Command::Oracle { target, operator, theta, p, set, r, e, restarts } => {
            let (op, dims, closed) = oracle_operator(&target, &operator, theta, p, set, r, e)?;
            let cfg = OracleConfig { restarts, seed: ctx.seed, ..OracleConfig::default() };
            let rep = match set {
                OracleSet::Product => oracle::max_product(&op, dims, &cfg)?,
                OracleSet::Rank => oracle::max_rank_r(&op, dims, r, &cfg)?,
                OracleSet::Limited => oracle::max_limited(&op, dims, r, e, &cfg)?,
            };
            let out = json!({
                "value": rep.value,
                "converged": rep.converged,
                "iterations": rep.iterations,
                "witness_spectrum": rep.witness_spectrum,
                "closed_form": closed,
            });
            ctx.emit_record(
                &out,
                &[
                    ("value", rep.value.to_string()),
                    ("converged", rep.converged.to_string()),
                    ("iterations", rep.iterations.to_string()),
                    ("closed_form", closed.map(|c| c.to_string()).unwrap_or_default()),
                ],
            )?;
        }
        Command::Verify { level, inject_fault } => {
            let report = verify::run(level, ctx.seed, inject_fault);
            let mut text = String::new();
            for c in &report.checks {
                let status = if c.passed { "ok  " } else { "FAIL" };
                text.push_str(&format!("{status} {}: {}\n", c.name, c.detail));
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            text.push_str(&format!("{} checks, {failed} failed\n", report.checks.len()));
            match ctx.format {
                Format::Json => ctx.emit_json(&report)?,
                Format::Csv => ctx.emit_text(&text)?,
            }
            if ctx.format == Format::Json {
                eprint!("{text}");
            }
            return Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK });
        }
    }
    let _ = std::io::stdout().flush();
    Ok(EXIT_OK)
}

/// Operator, local dimensions and the closed-form value it should reach.
fn oracle_operator(
    target: &TargetArgs,
    name: &str,
    theta: Option<f64>,
    p: f64,
    set: OracleSet,
    r: usize,
    e: f64,
) -> Result<(HermitianOperator, (usize, usize), Option<f64>)> {
    if name == "family" {
        let theta = theta.ok_or_else(|| invalid("--operator family needs --theta"))?;
        let op = twoqubit::omega_family(theta, p)?;
        let closed = match set {
            OracleSet::Product => Some(twoqubit::p_closed(theta, p)?),
            OracleSet::Rank if r == 1 => Some(twoqubit::p_closed(theta, p)?),
            _ => None,
        };
        return Ok((op, (2, 2), closed));
    }
    let spectrum = target.spectrum()?;
    let d = spectrum.dim();
    let r_eff = if set == OracleSet::Product { 1 } else { r };
    let e_eff = if set == OracleSet::Limited { e } else { 0.0 };
    let homogeneous = |beta: f64| -> Result<Option<f64>> {
        if r_eff >= d {
            return Ok(Some(1.0));
        }
        Ok(Some((1.0 - beta) * fidelity_limited(&spectrum, r_eff, e_eff)? + beta))
    };
    let (op, closed) = match name {
        "opt" => (operators::omega_opt(d)?, homogeneous(StrategyId::Opt.beta(&spectrum)?)?),
        "seph" => (operators::omega_sep_h(&spectrum), homogeneous(StrategyId::SepH.beta(&spectrum)?)?),
        "lch" => (operators::omega_lc_h(&spectrum), homogeneous(StrategyId::LcH.beta(&spectrum)?)?),
        "mub" => (operators::omega_mub(&spectrum)?.operator().clone(), homogeneous(0.5)?),
        "sep" => (operators::omega_sep(&spectrum)?, None),
        other => return Err(invalid(format!("unknown operator '{other}'"))),
    };
    Ok((op, (d, d), closed))
}

fn montecarlo_cmd(ctx: &Ctx, action: McAction) -> Result<()> {
    match action {
        McAction::Ensemble { d, r, samples } => {
            let stats = montecarlo::ensemble_stats_multi(d, &r, samples, ctx.seed)?;
            match ctx.format {
                Format::Json => ctx.emit_json(&stats),
                Format::Csv => ctx.emit_table(&figures::fig3(&stats)),
            }
        }
        McAction::Tail { d, r, eps, samples } => {
            let checks = montecarlo::tail_check(d, r, &eps, samples, ctx.seed)?;
            match ctx.format {
                Format::Json => ctx.emit_json(&checks),
                Format::Csv => {
                    let mut t = Table::new(["epsilon", "empirical", "bound"]);
                    for c in &checks {
                        t.push(vec![c.epsilon.to_string(), c.empirical.to_string(), c.bound.to_string()]);
                    }
                    ctx.emit_table(&t)
                }
            }
        }
        McAction::Simulate { target, r, e, rounds, honest } => {
            let spectrum = target.spectrum()?;
            let strategy = operators::omega_mub(&spectrum)?;
            let (label, state) = if honest {
                ("target", operators::target_state(&spectrum, spectrum.dim())?)
            } else {
                ("adversarial", separation::adversarial_state(&spectrum, r, e)?)
            };
            let sigma = HermitianOperator::projector(&state.vector());
            let trace = montecarlo::simulate_protocol(&strategy, &sigma, rounds, ctx.seed, ("mub", label))?;
            let p = separation::sep_prob_mub(&spectrum, r, e)?;
            match ctx.format {
                Format::Csv => ctx.emit_table(&figures::sim(&trace)),
                Format::Json => ctx.emit_json(&json!({
                    "rounds": rounds,
                    "passes": trace.passes(),
                    "pass_rate": trace.pass_rate(),
                    "expected_pass_rate": if honest { 1.0 } else { p },
                    "strategy": "mub",
                    "true_state": label,
                    "seed": ctx.seed,
                })),
            }
        }
    }
}
