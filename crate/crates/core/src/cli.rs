//! Command-line front end: parses model and policy documents, dispatches to
//! the evaluators, solvers, oracle, and invariant checks, and renders
//! human-readable or JSON reports.
//!
//! Exit codes are uniform across subcommands: 0 on success, 1 for usage or
//! parse problems, 2 for domain errors (invalid models, non-contractive
//! discounts, exceeded caps, failed checks). Errors go to standard error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bellman::{apply_l, policy_value_exact, SolveMethod};
use crate::check::run_checks;
use crate::document::{policy_from_document, policy_to_document, MdpDocument, PolicyDocument};
use crate::error::Error;
use crate::linalg::StateVector;
use crate::mdp::{enumerate_policies, policy_count, Mdp, Policy, DEFAULT_POLICY_CAP};
use crate::oracle::oracle_solve;
use crate::slice;
use crate::solver::{
    default_pi_cap, policy_iteration, value_iteration, Algorithm, SolveReport, Termination,
    DEFAULT_VI_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fmdp",
    version,
    about = "Finite discounted MDP toolkit: validate models, evaluate policies, solve, and certify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a model document and report every violation.
    Validate {
        /// Model JSON file.
        mdp: PathBuf,
    },
    /// Evaluate a fixed policy's value vector.
    Eval(EvalArgs),
    /// Solve by value iteration.
    Vi(ViArgs),
    /// Solve by policy iteration.
    Pi(PiArgs),
    /// Exhaustively evaluate every policy and report the optimality sets.
    Oracle(OracleArgs),
    /// Run the cross-module invariant checks against one model.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model JSON file.
    pub mdp: PathBuf,
    /// Policy JSON file ({"state": "action"}).
    pub policy: PathBuf,
    /// Tolerance for the slice-based value route.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// How to compute the value vector.
    #[arg(long, value_enum, default_value_t = EvalMethod::Direct)]
    pub method: EvalMethod,
    /// Cross-check the matrix and slice routes and report the gap.
    #[arg(long)]
    pub check: bool,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMethod {
    /// Linear solve by elimination.
    Direct,
    /// Linear solve by the power-series inverse.
    Neumann,
    /// Truncated slice summation (also valid at gamma = 1 when termination
    /// is inevitable).
    Slice,
}

#[derive(Debug, Args)]
pub struct ViArgs {
    /// Model JSON file.
    pub mdp: PathBuf,
    /// Optimality gap the returned policy is certified against.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Starting vector as comma-separated reals (defaults to all zeros).
    #[arg(long)]
    pub v0: Option<String>,
    /// Iteration cap.
    #[arg(long, default_value_t = DEFAULT_VI_CAP)]
    pub cap: usize,
    /// Emit the full report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PiArgs {
    /// Model JSON file.
    pub mdp: PathBuf,
    /// Starting policy JSON file (defaults to the lexicographically first
    /// policy).
    #[arg(long)]
    pub p0: Option<PathBuf>,
    /// Iteration cap (defaults to the policy count, clamped to 10000).
    #[arg(long)]
    pub cap: Option<usize>,
    /// Emit the full report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Model JSON file.
    pub mdp: PathBuf,
    /// Cap on the policy-space size.
    #[arg(long, default_value_t = DEFAULT_POLICY_CAP)]
    pub cap: u64,
    /// Evaluate policies on a thread pool.
    #[arg(long)]
    pub parallel: bool,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Model JSON file.
    pub mdp: PathBuf,
    /// Largest slice horizon exercised.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Seed for the randomized probes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on the policy-space size for enumeration-backed checks.
    #[arg(long, default_value_t = DEFAULT_POLICY_CAP)]
    pub cap: u64,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::domain(err.to_string())
    }
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Validate { mdp } => cmd_validate(&mdp),
        Command::Eval(args) => cmd_eval(args),
        Command::Vi(args) => cmd_vi(args),
        Command::Pi(args) => cmd_pi(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn load_document(path: &Path) -> Result<MdpDocument, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("cannot parse {}: {e}", path.display())))
}

fn load_mdp(path: &Path) -> Result<Mdp, Failure> {
    let doc = load_document(path)?;
    doc.to_mdp().map_err(|violations| {
        let lines: Vec<String> = violations.iter().map(|v| format!("  - {v}")).collect();
        Failure::domain(format!(
            "{} is not a valid model:\n{}",
            path.display(),
            lines.join("\n")
        ))
    })
}

fn load_policy(path: &Path, mdp: &Mdp) -> Result<Policy, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let doc: PolicyDocument = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("cannot parse {}: {e}", path.display())))?;
    policy_from_document(mdp, &doc).map_err(Failure::from)
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let mdp = load_mdp(path)?;
    println!(
        "valid: {} states, {} actions, γ={}",
        mdp.n_states(),
        mdp.total_actions(),
        mdp.gamma()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvalJson {
    values: IndexMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_check_values: Option<IndexMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_check_gap: Option<f64>,
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    if args.tol <= 0.0 {
        return Err(Failure::usage("--tol must be > 0"));
    }
    let mdp = load_mdp(&args.mdp)?;
    let policy = load_policy(&args.policy, &mdp)?;

    let matrix_values = |method: SolveMethod| policy_value_exact(&mdp, &policy, method);
    let slice_values = || -> Result<StateVector, Error> {
        let entries = mdp
            .states()
            .map(|s| slice::v_expected(&mdp, &policy, s, args.tol).map(|e| e.value))
            .collect::<Result<Vec<f64>, Error>>()?;
        Ok(StateVector::from_vec(entries))
    };

    let values = match args.method {
        EvalMethod::Direct => matrix_values(SolveMethod::Direct)?,
        EvalMethod::Neumann => matrix_values(SolveMethod::Neumann)?,
        EvalMethod::Slice => slice_values()?,
    };

    // Residual of the one-step equation, measurable whenever gamma < 1.
    let residual = if mdp.gamma() < 1.0 {
        Some(apply_l(&mdp, &policy, &values)?.sup_dist(&values)?)
    } else {
        None
    };

    // With --check, recompute the values along the other route (slice sums
    // against the matrix solve) and report the disagreement.
    let cross = if args.check {
        if mdp.gamma() < 1.0 {
            let (label, other) = match args.method {
                EvalMethod::Slice => ("matrix", matrix_values(SolveMethod::Direct)?),
                _ => ("slice", slice_values()?),
            };
            let gap = values.sup_dist(&other)?;
            Some((label, other, gap))
        } else {
            eprintln!("warning: cross-check skipped, matrix route needs γ < 1");
            None
        }
    } else {
        None
    };

    if args.json {
        let out = EvalJson {
            values: named_values(&mdp, &values),
            residual,
            cross_check_values: cross.as_ref().map(|(_, v, _)| named_values(&mdp, v)),
            cross_check_gap: cross.as_ref().map(|&(_, _, gap)| gap),
        };
        println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    } else {
        for s in mdp.states() {
            println!("value {}: {}", mdp.state_name(s), values.get(s));
        }
        if let Some(r) = residual {
            println!("bellman residual: {r:.3e}");
        }
        if let Some((label, other, gap)) = cross {
            for s in mdp.states() {
                println!("{label} value {}: {}", mdp.state_name(s), other.get(s));
            }
            println!("cross-check gap: {gap:.3e}");
        }
    }
    Ok(())
}

fn parse_v0(text: &str, n: usize) -> Result<StateVector, Failure> {
    let entries: Vec<f64> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("--v0: `{part}` is not a number")))
        })
        .collect::<Result<_, _>>()?;
    if entries.len() != n {
        return Err(Failure::usage(format!(
            "--v0 has {} entries, model has {n} states",
            entries.len()
        )));
    }
    Ok(StateVector::from_vec(entries))
}

fn cmd_vi(args: ViArgs) -> Result<(), Failure> {
    if args.epsilon <= 0.0 {
        return Err(Failure::usage("--epsilon must be > 0"));
    }
    let mdp = load_mdp(&args.mdp)?;
    let v0 = match &args.v0 {
        Some(text) => parse_v0(text, mdp.n_states())?,
        None => StateVector::zeros(mdp.n_states()),
    };
    let report = value_iteration(&mdp, &v0, args.epsilon, args.cap)?;
    render_report(&mdp, &report, args.json);
    finish_report(&report)
}

fn cmd_pi(args: PiArgs) -> Result<(), Failure> {
    let mdp = load_mdp(&args.mdp)?;
    let p0 = match &args.p0 {
        Some(path) => load_policy(path, &mdp)?,
        None => enumerate_policies(&mdp, DEFAULT_POLICY_CAP)?
            .next()
            .expect("policy space is never empty"),
    };
    let cap = args.cap.unwrap_or_else(|| default_pi_cap(&mdp));
    let report = policy_iteration(&mdp, &p0, cap)?;
    render_report(&mdp, &report, args.json);
    finish_report(&report)
}

fn finish_report(report: &SolveReport) -> Result<(), Failure> {
    match report.termination {
        Termination::Converged => Ok(()),
        Termination::IterationCapExceeded => Err(Failure::domain("IterationCapExceeded")),
    }
}

#[derive(Serialize)]
struct TraceJson {
    iteration: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    value: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    policy: Option<PolicyDocument>,
}

#[derive(Serialize)]
struct ReportJson {
    algorithm: &'static str,
    iterations: usize,
    trace: Vec<TraceJson>,
    policy: PolicyDocument,
    values: IndexMap<String, f64>,
    certificate: f64,
    termination: &'static str,
}

fn named_values(mdp: &Mdp, v: &StateVector) -> IndexMap<String, f64> {
    mdp.states()
        .map(|s| (mdp.state_name(s).to_string(), v.get(s)))
        .collect()
}

fn render_report(mdp: &Mdp, report: &SolveReport, json: bool) {
    if json {
        let out = ReportJson {
            algorithm: match report.algorithm {
                Algorithm::ValueIteration => "vi",
                Algorithm::PolicyIteration => "pi",
            },
            iterations: report.iterations,
            trace: report
                .trace
                .iter()
                .map(|t| TraceJson {
                    iteration: t.iteration,
                    delta: t.delta,
                    value: t.value.as_slice().to_vec(),
                    policy: t.policy.as_ref().map(|p| policy_to_document(mdp, p)),
                })
                .collect(),
            policy: policy_to_document(mdp, &report.final_policy),
            values: named_values(mdp, &report.final_value),
            certificate: report.certificate,
            termination: match report.termination {
                Termination::Converged => "converged",
                Termination::IterationCapExceeded => "iteration-cap-exceeded",
            },
        };
        println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
        return;
    }

    let (name, certificate) = match report.algorithm {
        Algorithm::ValueIteration => ("value iteration", format!("{}", report.certificate)),
        Algorithm::PolicyIteration => ("policy iteration", "exact".to_string()),
    };
    println!("{name}: {} iterations", report.iterations);

    // Long traces are elided in text mode; --json always carries them whole.
    let elide = report.trace.len() > 20;
    for entry in report.trace.iter().take(if elide { 10 } else { usize::MAX }) {
        print_trace_entry(mdp, entry);
    }
    if elide {
        println!("  ... {} more iterations ...", report.trace.len() - 12);
        for entry in &report.trace[report.trace.len() - 2..] {
            print_trace_entry(mdp, entry);
        }
    }

    println!("policy:");
    for s in mdp.states() {
        println!(
            "  {}: {}",
            mdp.state_name(s),
            report.final_policy.action_id(mdp, s)
        );
    }
    println!("values:");
    for s in mdp.states() {
        println!("  {}: {}", mdp.state_name(s), report.final_value.get(s));
    }
    println!("certificate: {certificate}");
    println!(
        "termination: {}",
        match report.termination {
            Termination::Converged => "converged",
            Termination::IterationCapExceeded => "iteration cap exceeded",
        }
    );
}

fn print_trace_entry(mdp: &Mdp, entry: &crate::solver::TraceEntry) {
    let delta = entry
        .delta
        .map(|d| format!(" delta {d:.3e}"))
        .unwrap_or_default();
    let policy = entry
        .policy
        .as_ref()
        .map(|p| {
            let choices: Vec<String> = mdp
                .states()
                .map(|s| format!("{}:{}", mdp.state_name(s), p.action_id(mdp, s)))
                .collect();
            format!(" policy {{{}}}", choices.join(", "))
        })
        .unwrap_or_default();
    println!("  iter {:>3}:{delta}{policy}", entry.iteration);
}

#[derive(Serialize)]
struct OracleJson {
    policy_count: usize,
    vmax: IndexMap<String, f64>,
    universal_optimal: Vec<usize>,
    universal_policies: Vec<PolicyDocument>,
    per_state_optimal: IndexMap<String, Vec<usize>>,
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Failure> {
    let mdp = load_mdp(&args.mdp)?;
    let oracle = oracle_solve(&mdp, args.cap, args.parallel)?;
    if args.json {
        let out = OracleJson {
            policy_count: oracle.policies.len(),
            vmax: named_values(&mdp, &oracle.vmax),
            universal_optimal: oracle.universal_optimal.iter().copied().collect(),
            universal_policies: oracle
                .universal_optimal
                .iter()
                .map(|&i| policy_to_document(&mdp, &oracle.policies[i]))
                .collect(),
            per_state_optimal: mdp
                .states()
                .map(|s| {
                    (
                        mdp.state_name(s).to_string(),
                        oracle.per_state_optimal[s.index()].iter().copied().collect(),
                    )
                })
                .collect(),
        };
        println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
        return Ok(());
    }

    println!("policies evaluated: {}", oracle.policies.len());
    println!("optimal values:");
    for s in mdp.states() {
        println!("  {}: {}", mdp.state_name(s), oracle.vmax.get(s));
    }
    println!(
        "universally optimal policies ({}):",
        oracle.universal_optimal.len()
    );
    for &i in &oracle.universal_optimal {
        let choices: Vec<String> = mdp
            .states()
            .map(|s| format!("{}:{}", mdp.state_name(s), oracle.policies[i].action_id(&mdp, s)))
            .collect();
        println!("  #{i} {{{}}}", choices.join(", "));
    }
    for s in mdp.states() {
        println!(
            "optimal at {}: {} policies",
            mdp.state_name(s),
            oracle.per_state_optimal[s.index()].len()
        );
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<(), Failure> {
    let mdp = load_mdp(&args.mdp)?;
    println!(
        "model: {} states, {} actions, γ={}, {} policies",
        mdp.n_states(),
        mdp.total_actions(),
        mdp.gamma(),
        policy_count(&mdp)
    );
    let report = run_checks(&mdp, args.depth, args.seed, args.cap)?;
    for warning in &report.warnings {
        println!("warning: {warning}");
    }
    for check in &report.checks {
        println!(
            "check {}: {} ({})",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.detail
        );
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::domain("invariant checks failed"))
    }
}
