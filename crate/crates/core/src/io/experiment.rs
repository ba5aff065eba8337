//! Mallows experiment sweeps: sample instances per correlation level, run
//! each objective, record fairness fractions.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::crr::w_crr;
use crate::error::{IoError, WelfareError};
use crate::fairness::{pairwise_report, NefSign, Notion};
use crate::io::mallows::mallows_instance;
use crate::model::{Allocation, Capacity, Instance};
use crate::par::{map_indexed, Execution};
use crate::welfare::{
    exact_baseline, max_rank, max_utilitarian, BaselineObjective, GoalKind, WelfareGoal,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentObjective {
    Um,
    UmCrr,
    Rm,
    RmCrr,
    Nash,
    Lsowa,
    Egal,
}

impl ExperimentObjective {
    pub const ALL: [ExperimentObjective; 7] = [
        ExperimentObjective::Um,
        ExperimentObjective::UmCrr,
        ExperimentObjective::Rm,
        ExperimentObjective::RmCrr,
        ExperimentObjective::Nash,
        ExperimentObjective::Lsowa,
        ExperimentObjective::Egal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentObjective::Um => "UM",
            ExperimentObjective::UmCrr => "UM-CRR",
            ExperimentObjective::Rm => "RM",
            ExperimentObjective::RmCrr => "RM-CRR",
            ExperimentObjective::Nash => "Nash",
            ExperimentObjective::Lsowa => "LSOWA",
            ExperimentObjective::Egal => "Egal",
        }
    }
}

impl fmt::Display for ExperimentObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentObjective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentObjective::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown objective `{s}`"))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    m: usize,
    agent_caps: [usize; 2],
    item_caps: [usize; 2],
    phis: Vec<f64>,
    trials: usize,
    objectives: Vec<String>,
    #[serde(default)]
    notions: Option<Vec<String>>,
    seed: u64,
    #[serde(default)]
    bnb_budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub agent_caps: Capacity,
    pub item_caps: Capacity,
    pub phis: Vec<f64>,
    pub trials: usize,
    pub objectives: Vec<ExperimentObjective>,
    /// Notions reported per run; one CSV row each.
    pub notions: Vec<Notion>,
    pub seed: u64,
    /// Node budget for each Nash/egalitarian/LSOWA search.
    pub bnb_budget: u64,
}

impl ExperimentConfig {
    pub const DEFAULT_BNB_BUDGET: u64 = 200_000;

    pub fn from_toml(text: &str) -> Result<Self, IoError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| IoError::Config(e.message().to_string()))?;
        let objectives = raw
            .objectives
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<_>, _>>()
            .map_err(IoError::Config)?;
        let notions = match raw.notions {
            Some(list) => list
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<_>, _>>()
                .map_err(IoError::Config)?,
            None => vec![Notion::Nef1],
        };
        let config = ExperimentConfig {
            n: raw.n,
            m: raw.m,
            agent_caps: Capacity::new(raw.agent_caps[0], raw.agent_caps[1]),
            item_caps: Capacity::new(raw.item_caps[0], raw.item_caps[1]),
            phis: raw.phis,
            trials: raw.trials,
            objectives,
            notions,
            seed: raw.seed,
            bnb_budget: raw.bnb_budget.unwrap_or(Self::DEFAULT_BNB_BUDGET),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let fail = |msg: String| Err(IoError::Config(msg));
        if self.n == 0 || self.m == 0 {
            return fail("n and m must be positive".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.objectives.is_empty() || self.notions.is_empty() || self.phis.is_empty() {
            return fail("objectives, notions and phis must be non-empty".into());
        }
        if let Some(phi) = self.phis.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return fail(format!("phi {phi} outside [0, 1]"));
        }
        for (what, cap) in [("agent", self.agent_caps), ("item", self.item_caps)] {
            if cap.lo > cap.hi {
                return fail(format!("{what} caps have lower bound above upper bound"));
            }
        }
        Ok(())
    }
}

/// One results line. `fraction` is `None` when the notion could not be
/// evaluated (no allocation, or unsupported sign).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub phi: f64,
    pub trial: usize,
    pub objective: ExperimentObjective,
    pub notion: Notion,
    pub fraction: Option<f64>,
    /// Utilitarian welfare of the allocation.
    pub welfare: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub phi: f64,
    pub objective: ExperimentObjective,
    pub notion: Notion,
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two runs.
    pub std: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

pub const RESULTS_HEADER: [&str; 8] = [
    "phi",
    "trial",
    "objective",
    "notion",
    "fraction",
    "welfare",
    "runtime_ms",
    "status",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl ExperimentResult {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RESULTS_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.phi.to_string(),
                r.trial.to_string(),
                r.objective.to_string(),
                r.notion.to_string(),
                r.fraction
                    .map_or_else(|| "NA".to_string(), |f| f.to_string()),
                opt(r.welfare),
                r.runtime_ms.map_or_else(String::new, |t| format!("{t:.3}")),
                r.status.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["phi", "objective", "notion", "mean", "std", "runs"])
            .expect("in-memory write");
        for s in summarize(&self.rows) {
            w.write_record([
                s.phi.to_string(),
                s.objective.to_string(),
                s.notion.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
                s.runs.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Mean fraction for one `(phi, objective, notion)` cell over ok runs.
    pub fn mean(&self, phi: f64, objective: ExperimentObjective, notion: Notion) -> Option<f64> {
        summarize(&self.rows)
            .into_iter()
            .find(|s| s.phi == phi && s.objective == objective && s.notion == notion)
            .map(|s| s.mean)
    }
}

/// Per `(phi, objective, notion)` mean and standard deviation over rows with
/// status `ok`, in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(f64, ExperimentObjective, Notion)> = Vec::new();
    for r in rows {
        let key = (r.phi, r.objective, r.notion);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .filter_map(|(phi, objective, notion)| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| {
                    r.phi == phi
                        && r.objective == objective
                        && r.notion == notion
                        && r.status == "ok"
                })
                .filter_map(|r| r.fraction)
                .collect();
            if values.is_empty() {
                return None;
            }
            let k = values.len() as f64;
            let mean = values.iter().sum::<f64>() / k;
            let std = if values.len() < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            };
            Some(SummaryRow {
                phi,
                objective,
                notion,
                mean,
                std,
                runs: values.len(),
            })
        })
        .collect()
}

/// The instance of trial `trial` at phi index `phi_idx`; each pair gets its
/// own ChaCha8 stream of the master seed.
pub fn trial_instance(
    config: &ExperimentConfig,
    phi_idx: usize,
    trial: usize,
) -> Result<Instance, IoError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(((phi_idx as u64) << 32) | trial as u64);
    mallows_instance(
        config.n,
        config.m,
        config.phis[phi_idx],
        config.agent_caps,
        config.item_caps,
        &mut rng,
    )
}

fn solve(
    instance: &Instance,
    objective: ExperimentObjective,
    budget: u64,
) -> Result<(Allocation, &'static str), String> {
    let empty = Allocation::empty(instance.n());
    let crr = |kind| {
        WelfareGoal::new(instance, kind, budget)
            .map_err(|e| e.to_string())
            .and_then(|goal| w_crr(instance, &goal, None).map_err(|e| e.to_string()))
    };
    let baseline = |objective| match exact_baseline(instance, objective, budget) {
        Ok(sol) => Ok((sol.allocation, "ok")),
        Err(WelfareError::BudgetExceeded {
            incumbent: Some(incumbent),
            ..
        }) => Ok((*incumbent, "budget_exceeded")),
        Err(e) => Err(e.to_string()),
    };
    match objective {
        ExperimentObjective::Um => max_utilitarian(instance, &empty)
            .map(|(p, _)| (p, "ok"))
            .map_err(|e| e.to_string()),
        ExperimentObjective::Rm => max_rank(instance, &empty)
            .map(|(p, _)| (p, "ok"))
            .map_err(|e| e.to_string()),
        ExperimentObjective::UmCrr => crr(GoalKind::UtilitarianMax).map(|p| (p, "ok")),
        ExperimentObjective::RmCrr => crr(GoalKind::RankMax).map(|p| (p, "ok")),
        ExperimentObjective::Nash => baseline(BaselineObjective::Nash),
        ExperimentObjective::Egal => baseline(BaselineObjective::Egalitarian),
        ExperimentObjective::Lsowa => baseline(BaselineObjective::Lsowa),
    }
}

fn run_trial(
    config: &ExperimentConfig,
    phi_idx: usize,
    trial: usize,
    timing: bool,
) -> Vec<ResultRow> {
    let phi = config.phis[phi_idx];
    let instance = trial_instance(config, phi_idx, trial);
    let mut rows = Vec::new();
    for &objective in &config.objectives {
        let start = Instant::now();
        let outcome = match &instance {
            Ok(instance) => solve(instance, objective, config.bnb_budget),
            Err(e) => Err(format!("instance: {e}")),
        };
        let runtime_ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        let (fractions, welfare, status) = match (&instance, outcome) {
            (Ok(instance), Ok((allocation, status))) => {
                let report =
                    pairwise_report(instance, &allocation, NefSign::Auto, Execution::Sequential)
                        .expect("solvers return complete allocations");
                let welfare = (0..instance.n())
                    .map(|i| instance.bundle_utility(i, allocation.bundle(i).iter().copied()))
                    .sum::<f64>();
                let fractions = config.notions.iter().map(|&n| report.fraction(n)).collect();
                (fractions, Some(welfare), status.to_string())
            }
            (_, Err(msg)) => (
                vec![None; config.notions.len()],
                None,
                format!("failed: {msg}"),
            ),
            (Err(_), Ok(_)) => unreachable!("no solver runs without an instance"),
        };
        for (&notion, fraction) in config.notions.iter().zip(fractions) {
            rows.push(ResultRow {
                phi,
                trial,
                objective,
                notion,
                fraction,
                welfare,
                runtime_ms,
                status: status.clone(),
            });
        }
    }
    rows
}

/// Runs every trial; output order is phi, trial, objective, notion
/// regardless of `exec`. Runtimes are only recorded with `timing`, keeping
/// the default output byte-identical across runs.
pub fn run_experiment(
    config: &ExperimentConfig,
    exec: Execution,
    timing: bool,
) -> Result<ExperimentResult, IoError> {
    config.validate()?;
    let tasks: Vec<(usize, usize)> = (0..config.phis.len())
        .flat_map(|p| (0..config.trials).map(move |t| (p, t)))
        .collect();
    let rows = map_indexed(exec, tasks.len(), |k| {
        run_trial(config, tasks[k].0, tasks[k].1, timing)
    })
    .into_iter()
    .flatten()
    .collect();
    Ok(ExperimentResult { rows })
}
