use std::cmp::Ordering;

use crate::error::WelfareError;
use crate::model::{rank_vector, Allocation, Instance, RankVector};
use crate::welfare::baseline::{score_allocation, Score};
use crate::welfare::flow::{FlowCost, LexCost};
use crate::welfare::reopt::force_pair;
use crate::welfare::{
    exact_baseline, exact_baseline_extending, feasible_completion, max_rank,
    max_utilitarian_scaled, BaselineObjective,
};

/// The welfare target handed to constrained round robin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GoalKind {
    Null,
    UtilitarianMax,
    UtilitarianThreshold(f64),
    RankMax,
    NashMax,
    EgalMax,
    LsowaMax,
}

#[derive(Debug, Clone, PartialEq)]
enum Optimum {
    None,
    Utilitarian(i64),
    Rank(RankVector),
    Baseline(BaselineObjective, Score),
}

/// A welfare target together with its optimum, computed once at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareGoal {
    kind: GoalKind,
    optimum: Optimum,
    /// An optimal allocation found while computing `optimum` (utilitarian
    /// optimal for the threshold goal, any feasible one for the null goal).
    optimal: Allocation,
    budget: u64,
}

/// Answer of a completion query: a witness on yes, nothing on no.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionAnswer {
    pub witness: Option<Allocation>,
}

impl CompletionAnswer {
    pub fn satisfiable(&self) -> bool {
        self.witness.is_some()
    }

    fn no() -> Self {
        CompletionAnswer { witness: None }
    }

    fn yes(witness: Allocation) -> Self {
        CompletionAnswer {
            witness: Some(witness),
        }
    }
}

/// `a >= b` on scaled welfare with a threshold given in utility units.
fn meets_threshold(scaled: i64, scale: i64, threshold: f64) -> bool {
    scaled as f64 >= threshold * scale as f64 - 1e-6
}

impl WelfareGoal {
    /// Builds the goal for `instance`. `budget` bounds every branch-and-bound
    /// run for the Nash, egalitarian and LSOWA goals.
    pub fn new(instance: &Instance, kind: GoalKind, budget: u64) -> Result<Self, WelfareError> {
        let empty = Allocation::empty(instance.n());
        let (optimum, optimal) = match kind {
            GoalKind::Null => (
                Optimum::None,
                feasible_completion(instance, &empty).ok_or(WelfareError::NoFeasibleCompletion)?,
            ),
            GoalKind::UtilitarianMax => {
                let (p, best) = max_utilitarian_scaled(instance, &empty)?;
                (Optimum::Utilitarian(best), p)
            }
            GoalKind::UtilitarianThreshold(threshold) => {
                let (p, best) = max_utilitarian_scaled(instance, &empty)?;
                let scale = instance.utility_scale();
                if !threshold.is_finite() || !meets_threshold(best, scale, threshold) {
                    return Err(WelfareError::UnsatisfiableThreshold {
                        threshold,
                        optimum: best as f64 / scale as f64,
                    });
                }
                (Optimum::Utilitarian(best), p)
            }
            GoalKind::RankMax => {
                let (p, rank) = max_rank(instance, &empty)?;
                (Optimum::Rank(rank), p)
            }
            GoalKind::NashMax | GoalKind::EgalMax | GoalKind::LsowaMax => {
                let objective = baseline_objective(kind).expect("baseline goal");
                let solution = exact_baseline(instance, objective, budget)?;
                (
                    Optimum::Baseline(objective, solution.score),
                    solution.allocation,
                )
            }
        };
        Ok(WelfareGoal {
            kind,
            optimum,
            optimal,
            budget,
        })
    }

    pub fn kind(&self) -> GoalKind {
        self.kind
    }

    /// An allocation meeting the goal, optimal for its objective.
    pub fn optimal_allocation(&self) -> &Allocation {
        &self.optimal
    }

    /// Maximum utilitarian welfare, for the utilitarian goals.
    pub fn utilitarian_optimum(&self, instance: &Instance) -> Option<f64> {
        match self.optimum {
            Optimum::Utilitarian(w) => Some(w as f64 / instance.utility_scale() as f64),
            _ => None,
        }
    }

    pub fn rank_optimum(&self) -> Option<&RankVector> {
        match &self.optimum {
            Optimum::Rank(r) => Some(r),
            _ => None,
        }
    }

    /// Whether a complete allocation meets the target.
    pub fn is_satisfied_by(&self, instance: &Instance, allocation: &Allocation) -> bool {
        if !allocation.is_complete(instance) {
            return false;
        }
        let scaled = || {
            (0..instance.n())
                .map(|i| instance.bundle_scaled(i, allocation.bundle(i).iter().copied()))
                .sum::<i64>()
        };
        match (&self.kind, &self.optimum) {
            (GoalKind::Null, _) => true,
            (GoalKind::UtilitarianThreshold(t), _) => {
                meets_threshold(scaled(), instance.utility_scale(), *t)
            }
            (_, Optimum::Utilitarian(best)) => scaled() >= *best,
            (_, Optimum::Rank(best)) => rank_vector(instance, allocation) >= *best,
            (_, Optimum::Baseline(objective, best)) => {
                score_allocation(instance, *objective, allocation).compare(best) != Ordering::Less
            }
            (_, Optimum::None) => true,
        }
    }
}

fn baseline_objective(kind: GoalKind) -> Option<BaselineObjective> {
    match kind {
        GoalKind::NashMax => Some(BaselineObjective::Nash),
        GoalKind::EgalMax => Some(BaselineObjective::Egalitarian),
        GoalKind::LsowaMax => Some(BaselineObjective::Lsowa),
        _ => None,
    }
}

/// Is there a complete feasible allocation extending `partial` that meets
/// `goal`? On yes the answer carries such an allocation.
pub fn completion(
    goal: &WelfareGoal,
    instance: &Instance,
    partial: &Allocation,
) -> Result<CompletionAnswer, WelfareError> {
    if partial.check_upper(instance).is_err() {
        return Ok(CompletionAnswer::no());
    }
    let answer = match (&goal.kind, &goal.optimum) {
        (GoalKind::Null, _) => match feasible_completion(instance, partial) {
            Some(p) => CompletionAnswer::yes(p),
            None => CompletionAnswer::no(),
        },
        (kind, Optimum::Utilitarian(best)) => match max_utilitarian_scaled(instance, partial) {
            Ok((p, w)) => {
                let ok = match kind {
                    GoalKind::UtilitarianThreshold(t) => {
                        meets_threshold(w, instance.utility_scale(), *t)
                    }
                    _ => w >= *best,
                };
                if ok {
                    CompletionAnswer::yes(p)
                } else {
                    CompletionAnswer::no()
                }
            }
            Err(WelfareError::NoFeasibleCompletion) => CompletionAnswer::no(),
            Err(e) => return Err(e),
        },
        (_, Optimum::Rank(best)) => match max_rank(instance, partial) {
            Ok((p, r)) if r >= *best => CompletionAnswer::yes(p),
            Ok(_) | Err(WelfareError::NoFeasibleCompletion) => CompletionAnswer::no(),
            Err(e) => return Err(e),
        },
        (_, Optimum::Baseline(objective, best)) => {
            match exact_baseline_extending(instance, *objective, goal.budget, partial) {
                Ok(sol) if sol.score.compare(best) != Ordering::Less => {
                    CompletionAnswer::yes(sol.allocation)
                }
                Ok(_) | Err(WelfareError::NoFeasibleCompletion) => CompletionAnswer::no(),
                Err(e) => return Err(e),
            }
        }
        (_, Optimum::None) => unreachable!("only the null goal has no optimum"),
    };
    Ok(answer)
}

/// Completion query for `partial + (agent, item)`, answered from `witness`,
/// a completion of `partial` that is optimal for the goal's objective (as
/// returned by [`completion`] or [`WelfareGoal::optimal_allocation`]). Gives
/// the same yes/no answer as [`completion`]; flow-based goals avoid a full
/// re-solve.
pub fn completion_step(
    goal: &WelfareGoal,
    instance: &Instance,
    partial: &Allocation,
    witness: &Allocation,
    agent: usize,
    item: usize,
) -> Result<CompletionAnswer, WelfareError> {
    if witness.holds(agent, item) {
        return Ok(CompletionAnswer::yes(witness.clone()));
    }
    let utility = |i: usize, o: usize| -instance.scaled_utility(i, o);
    let answer = match (&goal.kind, &goal.optimum) {
        (GoalKind::Null, _) => {
            force_pair(instance, partial, witness, agent, item, |_, _| 0i64).map(|(p, _)| p)
        }
        (GoalKind::UtilitarianThreshold(t), _) => {
            let current: i64 = (0..instance.n())
                .map(|i| instance.bundle_scaled(i, witness.bundle(i).iter().copied()))
                .sum();
            force_pair(instance, partial, witness, agent, item, utility)
                .filter(|(_, delta)| meets_threshold(current - delta, instance.utility_scale(), *t))
                .map(|(p, _)| p)
        }
        (_, Optimum::Utilitarian(_)) => {
            force_pair(instance, partial, witness, agent, item, utility)
                .filter(|(_, delta)| *delta == 0)
                .map(|(p, _)| p)
        }
        (_, Optimum::Rank(_)) => force_pair(instance, partial, witness, agent, item, |i, o| {
            LexCost::unit(instance.rank(i, o), -1)
        })
        .filter(|(_, delta)| *delta == LexCost::zero())
        .map(|(p, _)| p),
        _ => return completion(goal, instance, &partial.with(agent, item)),
    };
    Ok(CompletionAnswer { witness: answer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::welfare::tests::four_agent_example;

    fn after_two_rounds() -> Allocation {
        Allocation::from_bundles([vec![0, 2], vec![0, 2], vec![1, 3], vec![1, 3]])
    }

    #[test]
    fn empty_partial_is_completable() {
        let inst = four_agent_example();
        for kind in [
            GoalKind::Null,
            GoalKind::UtilitarianMax,
            GoalKind::RankMax,
            GoalKind::UtilitarianThreshold(40.0),
        ] {
            let goal = WelfareGoal::new(&inst, kind, 10_000).unwrap();
            let answer = completion(&goal, &inst, &Allocation::empty(4)).unwrap();
            let witness = answer.witness.expect("yes");
            assert!(goal.is_satisfied_by(&inst, &witness));
        }
    }

    #[test]
    fn four_agent_example_third_round_queries() {
        let inst = four_agent_example();
        let goal = WelfareGoal::new(&inst, GoalKind::UtilitarianMax, 0).unwrap();
        let p = after_two_rounds();
        assert!(completion(&goal, &inst, &p.with(0, 4))
            .unwrap()
            .satisfiable());
        let p = p.with(0, 4);
        assert!(!completion(&goal, &inst, &p.with(1, 4))
            .unwrap()
            .satisfiable());
        assert!(!completion(&goal, &inst, &p.with(2, 4))
            .unwrap()
            .satisfiable());
        assert!(completion(&goal, &inst, &p.with(3, 4))
            .unwrap()
            .satisfiable());
    }

    #[test]
    fn threshold_above_optimum_is_rejected() {
        let inst = four_agent_example();
        let err = WelfareGoal::new(&inst, GoalKind::UtilitarianThreshold(46.0), 0).unwrap_err();
        assert!(matches!(err, WelfareError::UnsatisfiableThreshold { .. }));
    }

    #[test]
    fn over_capacity_partial_is_no() {
        let inst = four_agent_example();
        let goal = WelfareGoal::new(&inst, GoalKind::Null, 0).unwrap();
        let p = Allocation::from_bundles([vec![0], vec![0], vec![0], vec![]]);
        assert!(!completion(&goal, &inst, &p).unwrap().satisfiable());
    }
}
