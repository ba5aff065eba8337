//! Envy-based fairness audits: EF, EF1, necessary EF (NEF), necessary EF1
//! (NEF1) and PROP1.
//!
//! Cardinal checks (EF, EF1, PROP1) use the instance's own utilities in scaled
//! integer form, so comparisons are exact. Necessary checks quantify over
//! every utility function consistent with the agent's weak order and a fixed
//! sign, and reduce to responsive-set dominance between bundles.

use std::fmt;
use std::str::FromStr;

use crate::error::{FairnessError, ModelError};
use crate::model::{Allocation, Instance, WeakOrder};
use crate::par::{map_indexed, Execution};

/// Sign class of the consistent utilities quantified over by NEF and NEF1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignMode {
    Positive,
    Negative,
}

/// NEF sign selection for reports: inferred from the instance, forced, or
/// skipped entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NefSign {
    #[default]
    Auto,
    Positive,
    Negative,
    Off,
}

impl FromStr for NefSign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(NefSign::Auto),
            "positive" => Ok(NefSign::Positive),
            "negative" => Ok(NefSign::Negative),
            "off" => Ok(NefSign::Off),
            other => Err(format!("unknown sign mode `{other}`")),
        }
    }
}

/// Resolves the sign mode for an instance. Zero utilities fit both modes,
/// so an all-zero instance accepts either request; `Auto` prefers positive.
pub fn sign_mode_for(
    instance: &Instance,
    requested: NefSign,
) -> Result<Option<SignMode>, FairnessError> {
    let all =
        |f: fn(f64) -> bool| (0..instance.n()).all(|i| instance.utilities(i).iter().all(|&u| f(u)));
    let positive = all(|u| u >= 0.0);
    let negative = all(|u| u <= 0.0);
    match requested {
        NefSign::Off => Ok(None),
        NefSign::Positive if positive => Ok(Some(SignMode::Positive)),
        NefSign::Negative if negative => Ok(Some(SignMode::Negative)),
        NefSign::Auto if positive => Ok(Some(SignMode::Positive)),
        NefSign::Auto if negative => Ok(Some(SignMode::Negative)),
        _ if !positive && !negative => Err(FairnessError::UnsupportedSignMode(
            "instance mixes positive and negative utilities".into(),
        )),
        req => Err(FairnessError::UnsupportedSignMode(format!(
            "requested {req:?} mode but some utilities have the opposite sign"
        ))),
    }
}

fn sorted_ranks(order: &WeakOrder, items: &[usize]) -> Vec<usize> {
    let mut ranks: Vec<usize> = items.iter().map(|&o| order.rank(o)).collect();
    ranks.sort_unstable();
    ranks
}

/// Responsive-set dominance for positive utilities: true iff `b` injects into
/// `a` with every item mapped to one the agent likes at least as much.
pub fn rs_dominates(order: &WeakOrder, a: &[usize], b: &[usize]) -> bool {
    if a.len() < b.len() {
        return false;
    }
    let ra = sorted_ranks(order, a);
    let rb = sorted_ranks(order, b);
    ra.iter().zip(&rb).all(|(x, y)| x <= y)
}

/// Dominance for negative utilities: `a` injects into `b` with every item
/// mapped to one the agent likes at most as much.
pub fn rs_dominates_negative(order: &WeakOrder, a: &[usize], b: &[usize]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut ra = sorted_ranks(order, a);
    let mut rb = sorted_ranks(order, b);
    ra.reverse();
    rb.reverse();
    ra.iter().zip(&rb).all(|(x, y)| x <= y)
}

fn dominates(mode: SignMode, order: &WeakOrder, a: &[usize], b: &[usize]) -> bool {
    match mode {
        SignMode::Positive => rs_dominates(order, a, b),
        SignMode::Negative => rs_dominates_negative(order, a, b),
    }
}

fn bundle(allocation: &Allocation, agent: usize) -> Vec<usize> {
    allocation.bundle(agent).iter().copied().collect()
}

fn without(items: &[usize], k: usize) -> Vec<usize> {
    items
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &o)| o)
        .collect()
}

fn value(instance: &Instance, agent: usize, items: &[usize]) -> i64 {
    instance.bundle_scaled(agent, items.iter().copied())
}

pub fn check_ef(instance: &Instance, allocation: &Allocation, i: usize, j: usize) -> bool {
    value(instance, i, &bundle(allocation, i)) >= value(instance, i, &bundle(allocation, j))
}

/// EF1 with both removal directions, so it is meaningful for goods, chores
/// and mixed utilities alike.
pub fn check_ef1(instance: &Instance, allocation: &Allocation, i: usize, j: usize) -> bool {
    let own = bundle(allocation, i);
    let other = bundle(allocation, j);
    let mine = value(instance, i, &own);
    let theirs = value(instance, i, &other);
    mine >= theirs
        || other
            .iter()
            .any(|&o| mine >= theirs - instance.scaled_utility(i, o))
        || own
            .iter()
            .any(|&o| mine - instance.scaled_utility(i, o) >= theirs)
}

pub fn check_nef(
    instance: &Instance,
    allocation: &Allocation,
    i: usize,
    j: usize,
    mode: SignMode,
) -> Result<bool, FairnessError> {
    require_sign(instance, mode)?;
    Ok(dominates(
        mode,
        instance.prefs(i),
        &bundle(allocation, i),
        &bundle(allocation, j),
    ))
}

/// NEF1 with a single removal fixed independently of the utility function.
pub fn check_nef1(
    instance: &Instance,
    allocation: &Allocation,
    i: usize,
    j: usize,
    mode: SignMode,
) -> Result<bool, FairnessError> {
    require_sign(instance, mode)?;
    Ok(nef1_unchecked(instance, allocation, i, j, mode))
}

fn nef1_unchecked(
    instance: &Instance,
    allocation: &Allocation,
    i: usize,
    j: usize,
    mode: SignMode,
) -> bool {
    let order = instance.prefs(i);
    let own = bundle(allocation, i);
    let other = bundle(allocation, j);
    dominates(mode, order, &own, &other)
        || (0..other.len()).any(|k| dominates(mode, order, &own, &without(&other, k)))
        || (0..own.len()).any(|k| dominates(mode, order, &without(&own, k), &other))
}

fn require_sign(instance: &Instance, mode: SignMode) -> Result<(), FairnessError> {
    let requested = match mode {
        SignMode::Positive => NefSign::Positive,
        SignMode::Negative => NefSign::Negative,
    };
    sign_mode_for(instance, requested).map(|_| ())
}

/// Proportionality up to one item against the share `u_i(O) / n`.
pub fn check_prop1(instance: &Instance, allocation: &Allocation, i: usize) -> bool {
    let n = instance.n() as i64;
    let total: i64 = (0..instance.m())
        .map(|o| instance.scaled_utility(i, o))
        .sum();
    let mine = value(instance, i, &bundle(allocation, i));
    // compare n * value against u_i(O) to stay in integers
    let reaches = |v: i64| n * v >= total;
    reaches(mine)
        || (0..instance.m())
            .filter(|&o| !allocation.holds(i, o))
            .any(|o| reaches(mine + instance.scaled_utility(i, o)))
        || allocation
            .bundle(i)
            .iter()
            .any(|&o| reaches(mine - instance.scaled_utility(i, o)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Notion {
    Ef,
    Ef1,
    Nef,
    Nef1,
    Prop1,
}

impl Notion {
    pub const ALL: [Notion; 5] = [
        Notion::Ef,
        Notion::Ef1,
        Notion::Nef,
        Notion::Nef1,
        Notion::Prop1,
    ];
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notion::Ef => "EF",
            Notion::Ef1 => "EF1",
            Notion::Nef => "NEF",
            Notion::Nef1 => "NEF1",
            Notion::Prop1 => "PROP1",
        })
    }
}

impl FromStr for Notion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Notion::ALL
            .into_iter()
            .find(|n| n.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown fairness notion `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairFlags {
    pub ef: bool,
    pub ef1: bool,
    /// `None` when necessary checks were not evaluated.
    pub nef: Option<bool>,
    pub nef1: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairnessReport {
    /// Ordered pairs `(i, j)`, `i != j`, in row-major order.
    pub per_pair: Vec<((usize, usize), PairFlags)>,
    pub prop1: Vec<bool>,
    pub sign: Option<SignMode>,
    /// Why necessary checks were skipped, if they were.
    pub nef_skipped: Option<String>,
}

impl FairnessReport {
    /// Fraction of ordered pairs (or agents, for PROP1) satisfying `notion`;
    /// `None` if the notion was not evaluated. An empty relation set counts
    /// as fully satisfied.
    pub fn fraction(&self, notion: Notion) -> Option<f64> {
        let share = |hits: usize, total: usize| {
            if total == 0 {
                1.0
            } else {
                hits as f64 / total as f64
            }
        };
        let pairs = self.per_pair.len();
        let count = |f: fn(&PairFlags) -> bool| self.per_pair.iter().filter(|(_, p)| f(p)).count();
        match notion {
            Notion::Ef => Some(share(count(|p| p.ef), pairs)),
            Notion::Ef1 => Some(share(count(|p| p.ef1), pairs)),
            Notion::Nef => self
                .sign
                .map(|_| share(count(|p| p.nef == Some(true)), pairs)),
            Notion::Nef1 => self
                .sign
                .map(|_| share(count(|p| p.nef1 == Some(true)), pairs)),
            Notion::Prop1 => Some(share(
                self.prop1.iter().filter(|&&b| b).count(),
                self.prop1.len(),
            )),
        }
    }

    /// One CSV row per notion: `instance,objective,notion,fraction`;
    /// unevaluated notions print `NA`.
    pub fn csv_rows(&self, instance_id: &str, objective: &str) -> String {
        let mut out = String::new();
        for notion in Notion::ALL {
            let fraction = self
                .fraction(notion)
                .map_or_else(|| "NA".to_string(), |f| format!("{f}"));
            out.push_str(&format!("{instance_id},{objective},{notion},{fraction}\n"));
        }
        out
    }
}

pub const REPORT_CSV_HEADER: &str = "instance,objective,notion,fraction";

/// Runs every pairwise check on a complete allocation.
pub fn pairwise_report(
    instance: &Instance,
    allocation: &Allocation,
    nef_sign: NefSign,
    exec: Execution,
) -> Result<FairnessReport, ModelError> {
    allocation.validate_complete(instance)?;
    let (sign, nef_skipped) = match sign_mode_for(instance, nef_sign) {
        Ok(sign) => (sign, None),
        Err(e) => (None, Some(e.to_string())),
    };
    let n = instance.n();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let per_pair = map_indexed(exec, pairs.len(), |k| {
        let (i, j) = pairs[k];
        let flags = PairFlags {
            ef: check_ef(instance, allocation, i, j),
            ef1: check_ef1(instance, allocation, i, j),
            nef: sign.map(|mode| {
                dominates(
                    mode,
                    instance.prefs(i),
                    &bundle(allocation, i),
                    &bundle(allocation, j),
                )
            }),
            nef1: sign.map(|mode| nef1_unchecked(instance, allocation, i, j, mode)),
        };
        ((i, j), flags)
    });
    let prop1 = map_indexed(exec, n, |i| check_prop1(instance, allocation, i));
    Ok(FairnessReport {
        per_pair,
        prop1,
        sign,
        nef_skipped,
    })
}
