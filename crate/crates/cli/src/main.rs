//! `crr`: solve, audit, generate and sweep allocation instances.
//!
//! Exit codes: 0 success, 1 other failure (I/O, internal), 2 parse,
//! validation or configuration error, 3 search budget exhausted. Errors go
//! to stderr as `error[category]: message`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crr_core::crr::{w_crr_traced, CrrRun};
use crr_core::fairness::{pairwise_report, FairnessReport, NefSign, REPORT_CSV_HEADER};
use crr_core::io::{
    format_allocation, parse_allocation, parse_instance, parse_preflib, run_experiment,
    seeded_mallows_instance, serialize_instance, ExperimentConfig,
};
use crr_core::model::{build_instance, Allocation, Capacity, Instance};
use crr_core::par::{with_threads, Execution};
use crr_core::welfare::{
    exact_baseline, max_rank, max_utilitarian, BaselineObjective, GoalKind, WelfareGoal,
};
use crr_core::{CrrError, FairnessError, IoError, ModelError, WelfareError};

#[derive(Parser)]
#[command(
    name = "crr",
    version,
    about = "Constrained round robin allocation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an allocation for an instance file.
    Solve(SolveArgs),
    /// Audit an allocation file against an instance.
    Evaluate(EvaluateArgs),
    /// Write an instance file from a Mallows model or a PrefLib profile.
    Generate(GenerateArgs),
    /// Run a Mallows sweep described by a TOML config.
    Experiment(ExperimentArgs),
    /// Print the event log of a constrained round robin run.
    Trace(TraceArgs),
}

#[derive(Args)]
struct FairnessFlags {
    /// Sign mode for the necessary envy checks.
    #[arg(long, default_value = "auto", value_parser = parse_sign)]
    nef_sign: NefSign,
}

#[derive(Args)]
struct GoalFlags {
    /// null, um, um-crr, rm, rm-crr, um-threshold:T, nash, egal, lsowa,
    /// nash-crr, egal-crr, lsowa-crr.
    #[arg(long, value_parser = parse_goal)]
    goal: Goal,
    /// Node budget for the Nash, egalitarian and LSOWA searches.
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_BNB_BUDGET)]
    bnb_budget: u64,
    /// Comma-separated positive entitlements, one per agent (CRR goals only).
    #[arg(long, value_delimiter = ',')]
    share_weights: Option<Vec<f64>>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    goal: GoalFlags,
    #[command(flatten)]
    fairness: FairnessFlags,
    /// Write the allocation here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    instance: PathBuf,
    allocation: PathBuf,
    #[command(flatten)]
    fairness: FairnessFlags,
    /// Label for the objective column.
    #[arg(long, default_value = "given")]
    objective: String,
    /// Also write the report CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct GenerateSource {
    /// Mallows parameters as `key=value`: phi, n, m, seed, and optionally
    /// agentcap=LO:HI, itemcap=LO:HI.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    mallows: Option<Vec<String>>,
    /// PrefLib-style profile to convert.
    #[arg(long, value_name = "PATH")]
    preflib: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: GenerateSource,
    /// Number of alternatives when converting PrefLib input without a header.
    #[arg(long)]
    alternatives: Option<usize>,
    /// Agent capacity `LO:HI` for PrefLib conversion (default 0:m).
    #[arg(long, value_parser = parse_cap)]
    agentcap: Option<Capacity>,
    /// Item capacity `LO:HI` for PrefLib conversion (default 1:1).
    #[arg(long, value_parser = parse_cap)]
    itemcap: Option<Capacity>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    /// Results CSV path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary CSV path; defaults to `<out stem>.summary.csv` beside `--out`.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    jobs: Option<usize>,
    /// Record per-run wall-clock times (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct TraceArgs {
    instance: PathBuf,
    #[command(flatten)]
    goal: GoalFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
enum Goal {
    Crr(GoalKind),
    Direct(Direct),
}

#[derive(Clone, Copy, Debug)]
enum Direct {
    Utilitarian,
    Rank,
    Baseline(BaselineObjective),
}

fn parse_goal(s: &str) -> Result<Goal, String> {
    if let Some(t) = s.strip_prefix("um-threshold:") {
        let t: f64 = t.parse().map_err(|_| format!("bad threshold `{t}`"))?;
        return Ok(Goal::Crr(GoalKind::UtilitarianThreshold(t)));
    }
    Ok(match s {
        "null" => Goal::Crr(GoalKind::Null),
        "um" => Goal::Direct(Direct::Utilitarian),
        "um-crr" => Goal::Crr(GoalKind::UtilitarianMax),
        "rm" => Goal::Direct(Direct::Rank),
        "rm-crr" => Goal::Crr(GoalKind::RankMax),
        "nash" => Goal::Direct(Direct::Baseline(BaselineObjective::Nash)),
        "egal" => Goal::Direct(Direct::Baseline(BaselineObjective::Egalitarian)),
        "lsowa" => Goal::Direct(Direct::Baseline(BaselineObjective::Lsowa)),
        "nash-crr" => Goal::Crr(GoalKind::NashMax),
        "egal-crr" => Goal::Crr(GoalKind::EgalMax),
        "lsowa-crr" => Goal::Crr(GoalKind::LsowaMax),
        other => return Err(format!("unknown goal `{other}`")),
    })
}

fn parse_sign(s: &str) -> Result<NefSign, String> {
    s.parse()
}

fn parse_cap(s: &str) -> Result<Capacity, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let num = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad bound `{v}`"))
    };
    Ok(Capacity::new(num(lo)?, num(hi)?))
}

/// A failure with its exit code and stderr category.
struct Failure {
    code: u8,
    category: &'static str,
    message: String,
}

impl Failure {
    fn new(code: u8, category: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            category,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(2, "usage", message)
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let category = match &e {
            IoError::Parse { .. } | IoError::UnknownAlternative { .. } => "parse",
            IoError::Config(_) => "config",
            IoError::Model(_) => "validation",
            IoError::Io(_) => return Failure::new(1, "io", e.to_string()),
        };
        Failure::new(2, category, e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::new(2, "validation", e.to_string())
    }
}

impl From<WelfareError> for Failure {
    fn from(e: WelfareError) -> Self {
        match e {
            WelfareError::BudgetExceeded { .. } => Failure::new(3, "budget", e.to_string()),
            WelfareError::UnsatisfiableThreshold { .. } | WelfareError::Model(_) => {
                Failure::new(2, "validation", e.to_string())
            }
            WelfareError::NoFeasibleCompletion => Failure::new(1, "infeasible", e.to_string()),
        }
    }
}

impl From<CrrError> for Failure {
    fn from(e: CrrError) -> Self {
        match e {
            CrrError::GoalOracleBudgetExceeded { .. } => Failure::new(3, "budget", e.to_string()),
            CrrError::BadShareWeights => Failure::new(2, "validation", e.to_string()),
            CrrError::Welfare(w) => w.into(),
        }
    }
}

impl From<FairnessError> for Failure {
    fn from(e: FairnessError) -> Self {
        Failure::new(2, "validation", e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(1, "io", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(1, "io", format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    Ok(parse_instance(&read(path)?)?)
}

fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn run_crr(instance: &Instance, kind: GoalKind, flags: &GoalFlags) -> Result<CrrRun, Failure> {
    let goal = WelfareGoal::new(instance, kind, flags.bnb_budget)?;
    Ok(w_crr_traced(
        instance,
        &goal,
        flags.share_weights.as_deref(),
    )?)
}

fn solve(instance: &Instance, flags: &GoalFlags) -> Result<Allocation, Failure> {
    let empty = Allocation::empty(instance.n());
    match flags.goal {
        Goal::Crr(kind) => Ok(run_crr(instance, kind, flags)?.allocation),
        Goal::Direct(_) if flags.share_weights.is_some() => {
            Err(Failure::usage("--share-weights only applies to CRR goals"))
        }
        Goal::Direct(Direct::Utilitarian) => Ok(max_utilitarian(instance, &empty)?.0),
        Goal::Direct(Direct::Rank) => Ok(max_rank(instance, &empty)?.0),
        Goal::Direct(Direct::Baseline(objective)) => {
            Ok(exact_baseline(instance, objective, flags.bnb_budget)?.allocation)
        }
    }
}

fn check_sign(instance: &Instance, sign: NefSign) -> Result<(), Failure> {
    crr_core::fairness::sign_mode_for(instance, sign)?;
    Ok(())
}

fn report(
    instance: &Instance,
    allocation: &Allocation,
    sign: NefSign,
) -> Result<FairnessReport, Failure> {
    if sign != NefSign::Auto {
        check_sign(instance, sign)?;
    }
    Ok(pairwise_report(
        instance,
        allocation,
        sign,
        Execution::Sequential,
    )?)
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let allocation = solve(&instance, &args.goal)?;
    let fairness = report(&instance, &allocation, args.fairness.nef_sign)?;
    let welfare: f64 = (0..instance.n())
        .map(|i| instance.bundle_utility(i, allocation.bundle(i).iter().copied()))
        .sum();
    emit(args.out.as_deref(), &format_allocation(&allocation))?;
    // `#` lines keep stdout a valid allocation file
    println!("# welfare {welfare}");
    for notion in crr_core::fairness::Notion::ALL {
        let value = fairness
            .fraction(notion)
            .map_or_else(|| "NA".into(), |f| f.to_string());
        println!("# {notion} {value}");
    }
    if let Some(reason) = &fairness.nef_skipped {
        println!("# necessary checks skipped: {reason}");
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let allocation = parse_allocation(&read(&args.allocation)?, &instance)?;
    let fairness = report(&instance, &allocation, args.fairness.nef_sign)?;
    let csv = format!(
        "{REPORT_CSV_HEADER}\n{}",
        fairness.csv_rows(&instance_id(&args.instance), &args.objective)
    );
    print!("{csv}");
    if let Some(path) = &args.out {
        write(path, &csv)?;
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let instance = if let Some(pairs) = &args.source.mallows {
        let mut phi = None;
        let (mut n, mut m, mut seed) = (None, None, 0u64);
        let (mut agentcap, mut itemcap) = (args.agentcap, args.itemcap);
        for pair in pairs {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("expected key=value, got `{pair}`")))?;
            let bad = || Failure::usage(format!("bad value for `{key}`: `{value}`"));
            match key {
                "phi" => phi = Some(value.parse::<f64>().map_err(|_| bad())?),
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
                "m" => m = Some(value.parse::<usize>().map_err(|_| bad())?),
                "seed" => seed = value.parse().map_err(|_| bad())?,
                "agentcap" => agentcap = Some(parse_cap(value).map_err(Failure::usage)?),
                "itemcap" => itemcap = Some(parse_cap(value).map_err(Failure::usage)?),
                _ => return Err(Failure::usage(format!("unknown Mallows key `{key}`"))),
            }
        }
        let missing = |k: &str| Failure::usage(format!("--mallows needs `{k}=`"));
        let (n, m, phi) = (
            n.ok_or_else(|| missing("n"))?,
            m.ok_or_else(|| missing("m"))?,
            phi.ok_or_else(|| missing("phi"))?,
        );
        seeded_mallows_instance(
            n,
            m,
            phi,
            agentcap.unwrap_or(Capacity::new(0, m)),
            itemcap.unwrap_or(Capacity::exactly(1)),
            seed,
        )?
    } else {
        let path = args
            .source
            .preflib
            .as_ref()
            .expect("clap enforces one source");
        let profile = parse_preflib(&read(path)?, args.alternatives)?;
        let n = profile.orders.len();
        let m = profile.m;
        build_instance(
            profile.orders,
            None,
            vec![args.agentcap.unwrap_or(Capacity::new(0, m)); n],
            vec![args.itemcap.unwrap_or(Capacity::exactly(1)); m],
        )?
    };
    emit(args.out.as_deref(), &serialize_instance(&instance))
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let config = ExperimentConfig::from_toml(&read(&args.config)?)?;
    let exec = match args.jobs {
        Some(0) => return Err(Failure::usage("--jobs must be at least 1")),
        Some(1) => Execution::Sequential,
        _ => Execution::default(),
    };
    let result = with_threads(exec, args.jobs, || {
        run_experiment(&config, exec, args.timing)
    })?;
    emit(args.out.as_deref(), &result.to_csv())?;
    let summary = args.summary.clone().or_else(|| {
        args.out.as_ref().map(|out| {
            let stem = out
                .file_stem()
                .map_or_else(|| "results".into(), |s| s.to_string_lossy().into_owned());
            out.with_file_name(format!("{stem}.summary.csv"))
        })
    });
    if let Some(path) = summary {
        write(&path, &result.summary_csv())?;
    }
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let Goal::Crr(kind) = args.goal.goal else {
        return Err(Failure::usage(
            "trace needs a CRR goal (null, um-crr, rm-crr, um-threshold:T, *-crr)",
        ));
    };
    let run = run_crr(&instance, kind, &args.goal)?;
    emit(args.out.as_deref(), &run.trace_text())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Trace(a) => cmd_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.category, f.message);
            ExitCode::from(f.code)
        }
    }
}
