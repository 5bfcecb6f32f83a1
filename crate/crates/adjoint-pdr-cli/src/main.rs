//! Command-line front end: solve a model with a chosen heuristic, query
//! the exact reference oracle, or benchmark heuristics over a directory
//! of models.
//!
//! Exit codes: 0 the property holds, 1 it is refuted, 2 the run was
//! inconclusive, 3 usage or parse errors (including heuristic/model
//! mismatches).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use adjoint_pdr::engine::{solve, SolveOptions};
use adjoint_pdr::instance::{Heuristic, ProblemInstance};
use adjoint_pdr::invariants::{check_invariants, detect_repeat};
use adjoint_pdr::mdp::{mdp_heuristic, mdp_instance, MdpHeuristicKind};
use adjoint_pdr::model_io::{parse_model, Model};
use adjoint_pdr::oracle::{mdp_max_reach_exact, ts_oracle};
use adjoint_pdr::rational::format_rational;
use adjoint_pdr::ts::{heuristic_simple, ts_instance, ConflictMode};
use adjoint_pdr::{Trace, Verdict};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "adjoint-pdr", version, about = "Property-directed reachability solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver on a model file.
    Solve {
        /// Model file (`.ts` or `.mdp` format).
        #[arg(long)]
        model: PathBuf,
        /// Heuristic; must fit the model kind.
        #[arg(long, value_enum)]
        heuristic: HeuristicName,
        /// Rule-application budget.
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        /// Re-validate every heuristic choice and report the per-state
        /// invariants after the run.
        #[arg(long)]
        check_invariants: bool,
        /// Write the rule-by-rule trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Emit the result as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Print the exact reference answer for a model.
    Oracle {
        /// Model file (`.ts` or `.mdp` format).
        #[arg(long)]
        model: PathBuf,
    },
    /// Solve every model in a directory under several heuristics and
    /// write a CSV of the results.
    Bench {
        /// Directory of model files.
        #[arg(long)]
        models: PathBuf,
        /// Comma-separated heuristic names; each must fit every model.
        #[arg(long)]
        heuristics: String,
        /// Rule-application budget per run.
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HeuristicName {
    SimpleInit,
    SimpleFinal,
    Hcob,
    Hco01,
    MdpSimpleInit,
}

impl HeuristicName {
    fn is_ts(self) -> bool {
        matches!(self, HeuristicName::SimpleInit | HeuristicName::SimpleFinal)
    }

    fn label(self) -> &'static str {
        match self {
            HeuristicName::SimpleInit => "simple-init",
            HeuristicName::SimpleFinal => "simple-final",
            HeuristicName::Hcob => "hcob",
            HeuristicName::Hco01 => "hco01",
            HeuristicName::MdpSimpleInit => "mdp-simple-init",
        }
    }
}

/// Anything that should abort with exit code 3.
struct UsageError(String);

macro_rules! usage_error_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for UsageError {
            fn from(e: $ty) -> Self {
                UsageError(e.to_string())
            }
        }
    )*};
}

usage_error_from!(
    adjoint_pdr::engine::EngineError,
    adjoint_pdr::oracle::OracleError,
    csv::Error,
    std::io::Error
);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not usage errors.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(3),
            };
        }
    };
    let result = match cli.command {
        Command::Solve {
            model,
            heuristic,
            max_steps,
            check_invariants,
            trace,
            json,
        } => run_solve(&model, heuristic, max_steps, check_invariants, trace, json),
        Command::Oracle { model } => run_oracle(&model),
        Command::Bench {
            models,
            heuristics,
            max_steps,
            out,
        } => run_bench(&models, &heuristics, max_steps, &out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(UsageError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

fn load_model(path: &Path) -> Result<Model, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct RuleCounts {
    unfold: usize,
    candidate: usize,
    decide: usize,
    conflict: usize,
}

#[derive(Serialize)]
struct JsonReport {
    verdict: &'static str,
    steps: usize,
    rule_counts: RuleCounts,
    witness: Option<String>,
}

/// Everything a finished run needs to report, already serialized.
struct RunOutput {
    verdict: &'static str,
    exit: u8,
    steps: usize,
    counts: [usize; 4],
    witness: Option<String>,
    rendered_trace: String,
    invariant_report: Option<String>,
}

fn render_trace<P, N>(trace: &Trace<P, N>) -> String {
    let mut out = String::new();
    for event in &trace.events {
        out.push_str(&event.trace_line());
        out.push('\n');
    }
    out
}

fn run_generic<I: ProblemInstance, H: Heuristic<I>>(
    inst: &I,
    heuristic: &H,
    max_steps: usize,
    check: bool,
) -> Result<RunOutput, UsageError> {
    let options = SolveOptions {
        checked: check,
        retain_states: check,
    };
    let (verdict, trace) = solve(inst, heuristic, max_steps, options)?;
    let (exit, witness) = match &verdict {
        Verdict::Holds { witness, position } => (
            0,
            Some(format!(
                "{} (inductive invariant at position {position})",
                inst.pos_to_string(witness)
            )),
        ),
        Verdict::Refuted { negative } => (1, Some(inst.neg_to_string(&negative[0]))),
        Verdict::Unknown(_) => (2, None),
    };
    let invariant_report = if check {
        let report = check_invariants(inst, &trace).expect("states retained in checked runs");
        let mut text = report.summary();
        match report.first_violation() {
            Some((state, id)) => {
                text.push_str(&format!("invariants: {} violated at state {state}\n", id.name()));
            }
            None => text.push_str("invariants: no violations\n"),
        }
        match detect_repeat(inst, &trace) {
            Some((i, j)) => {
                text.push_str(&format!("repeat check: states {i} and {j} coincide\n"));
            }
            None => text.push_str("repeat check: no repeated state\n"),
        }
        Some(text)
    } else {
        None
    };
    Ok(RunOutput {
        verdict: verdict.tag(),
        exit,
        steps: trace.events.len(),
        counts: trace.rule_counts(),
        witness,
        rendered_trace: render_trace(&trace),
        invariant_report,
    })
}

fn dispatch(
    model: &Model,
    heuristic: HeuristicName,
    max_steps: usize,
    check: bool,
) -> Result<RunOutput, UsageError> {
    match (model, heuristic) {
        (Model::Ts(ts), name) if name.is_ts() => {
            let mode = match name {
                HeuristicName::SimpleInit => ConflictMode::Initial,
                _ => ConflictMode::Final,
            };
            run_generic(&ts_instance(ts), &heuristic_simple(ts, mode), max_steps, check)
        }
        (Model::Mdp(mdp), name) if !name.is_ts() => {
            let kind = match name {
                HeuristicName::Hcob => MdpHeuristicKind::CoB,
                HeuristicName::Hco01 => MdpHeuristicKind::Co01,
                _ => MdpHeuristicKind::SimpleInit,
            };
            run_generic(&mdp_instance(mdp), &mdp_heuristic(mdp, kind), max_steps, check)
        }
        (Model::Ts(_), name) => Err(UsageError(format!(
            "heuristic '{}' needs an mdp model, but the file is a transition system",
            name.label()
        ))),
        (Model::Mdp(_), name) => Err(UsageError(format!(
            "heuristic '{}' needs a ts model, but the file is an MDP",
            name.label()
        ))),
    }
}

fn run_solve(
    model_path: &Path,
    heuristic: HeuristicName,
    max_steps: usize,
    check_invariants: bool,
    trace_path: Option<PathBuf>,
    json: bool,
) -> Result<u8, UsageError> {
    let model = load_model(model_path)?;
    let output = dispatch(&model, heuristic, max_steps, check_invariants)?;
    if let Some(path) = trace_path {
        std::fs::write(&path, &output.rendered_trace)
            .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    }
    let [unfold, candidate, decide, conflict] = output.counts;
    if json {
        let report = JsonReport {
            verdict: output.verdict,
            steps: output.steps,
            rule_counts: RuleCounts {
                unfold,
                candidate,
                decide,
                conflict,
            },
            witness: output.witness,
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        );
    } else {
        println!("verdict = {}", output.verdict);
        if let Some(witness) = &output.witness {
            println!("witness = {witness}");
        }
        println!(
            "steps = {} (unfold {unfold}, candidate {candidate}, decide {decide}, \
             conflict {conflict})",
            output.steps
        );
        if let Some(report) = &output.invariant_report {
            print!("{report}");
        }
    }
    Ok(output.exit)
}

fn run_oracle(model_path: &Path) -> Result<u8, UsageError> {
    match load_model(model_path)? {
        Model::Ts(ts) => {
            let result = ts_oracle(&ts);
            let verdict = if result.safe { "holds" } else { "refuted" };
            println!("reachable = {}, verdict = {verdict}", result.reachable);
            Ok(if result.safe { 0 } else { 1 })
        }
        Model::Mdp(mdp) => {
            let result = mdp_max_reach_exact(&mdp)?;
            let verdict = if result.verdict { "holds" } else { "refuted" };
            println!(
                "max_prob = {}, verdict = {verdict}",
                format_rational(&result.max_prob)
            );
            Ok(if result.verdict { 0 } else { 1 })
        }
    }
}

fn parse_heuristic_list(csv: &str) -> Result<Vec<HeuristicName>, UsageError> {
    csv.split(',')
        .map(|name| {
            let trimmed = name.trim();
            HeuristicName::from_str(trimmed, false)
                .map_err(|_| UsageError(format!("unknown heuristic '{trimmed}'")))
        })
        .collect()
}

fn run_bench(
    models_dir: &Path,
    heuristics_csv: &str,
    max_steps: usize,
    out: &Path,
) -> Result<u8, UsageError> {
    let heuristics = parse_heuristic_list(heuristics_csv)?;
    if heuristics.is_empty() {
        return Err(UsageError("no heuristics given".into()));
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(models_dir)
        .map_err(|e| UsageError(format!("{}: {e}", models_dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| {
            matches!(
                path.extension().and_then(|e| e.to_str()),
                Some("ts") | Some("mdp")
            )
        })
        .collect();
    entries.sort();
    if entries.is_empty() {
        return Err(UsageError(format!(
            "no .ts or .mdp files in {}",
            models_dir.display()
        )));
    }
    // Every heuristic must fit every model, or the matrix is ill-posed.
    let models: Vec<(PathBuf, Model)> = entries
        .into_iter()
        .map(|path| load_model(&path).map(|m| (path, m)))
        .collect::<Result<_, _>>()?;
    for (path, model) in &models {
        for heuristic in &heuristics {
            let fits = matches!(model, Model::Ts(_)) == heuristic.is_ts();
            if !fits {
                return Err(UsageError(format!(
                    "heuristic '{}' does not apply to {}",
                    heuristic.label(),
                    path.display()
                )));
            }
        }
    }
    let mut writer = csv::Writer::from_path(out)
        .map_err(|e| UsageError(format!("{}: {e}", out.display())))?;
    writer.write_record([
        "model",
        "heuristic",
        "verdict",
        "steps",
        "unfold",
        "candidate",
        "decide",
        "conflict",
        "wall_ms",
    ])?;
    for (path, model) in &models {
        for heuristic in &heuristics {
            let start = Instant::now();
            let output = dispatch(model, *heuristic, max_steps, false)?;
            let wall_ms = start.elapsed().as_millis();
            let [unfold, candidate, decide, conflict] = output.counts;
            writer.write_record([
                path.display().to_string(),
                heuristic.label().to_string(),
                output.verdict.to_string(),
                output.steps.to_string(),
                unfold.to_string(),
                candidate.to_string(),
                decide.to_string(),
                conflict.to_string(),
                wall_ms.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(0)
}
