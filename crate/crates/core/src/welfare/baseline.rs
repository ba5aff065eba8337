//! Exact branch and bound for Nash, egalitarian and linear-OWA optima.
//!
//! Decisions are made pair by pair, items outermost. A node is pruned when a
//! capacity lower bound can no longer be met, or when the per-agent optimistic
//! bound (each agent independently taking its best undecided items within its
//! own capacity) cannot beat the incumbent. The incumbent starts from the
//! utilitarian optimum, so a feasible answer is always at hand.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::WelfareError;
use crate::model::{welfare, Allocation, Instance, Objective};
use crate::welfare::max_utilitarian_scaled;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineObjective {
    Nash,
    Egalitarian,
    Lsowa,
}

impl BaselineObjective {
    pub fn objective(self) -> Objective {
        match self {
            BaselineObjective::Nash => Objective::Nash,
            BaselineObjective::Egalitarian => Objective::Egalitarian,
            BaselineObjective::Lsowa => Objective::Lsowa,
        }
    }
}

/// Comparable objective value. Nash maximizes the number of agents with
/// positive utility first, then the product over those agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Score {
    Nash { positive: usize, product: f64 },
    Exact(i128),
}

const REL_TOL: f64 = 1e-12;

impl Score {
    /// Three-way comparison; Nash products within a relative `1e-12` are equal.
    pub(crate) fn compare(&self, other: &Score) -> Ordering {
        match (self, other) {
            (Score::Exact(a), Score::Exact(b)) => a.cmp(b),
            (
                Score::Nash {
                    positive: pa,
                    product: a,
                },
                Score::Nash {
                    positive: pb,
                    product: b,
                },
            ) => pa.cmp(pb).then_with(|| {
                let tol = REL_TOL * a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() <= tol {
                    Ordering::Equal
                } else {
                    a.total_cmp(b)
                }
            }),
            _ => panic!("scores of different objectives are not comparable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSolution {
    pub allocation: Allocation,
    /// Welfare of `allocation` as reported by [`crate::model::welfare`].
    pub value: f64,
    pub nodes: u64,
    pub(crate) score: Score,
}

pub fn exact_baseline(
    instance: &Instance,
    objective: BaselineObjective,
    budget: u64,
) -> Result<BaselineSolution, WelfareError> {
    exact_baseline_extending(
        instance,
        objective,
        budget,
        &Allocation::empty(instance.n()),
    )
}

/// Optimum among complete allocations extending `fixed`. Fails with
/// `BudgetExceeded` (carrying the incumbent) when more than `budget` nodes
/// would be expanded.
pub fn exact_baseline_extending(
    instance: &Instance,
    objective: BaselineObjective,
    budget: u64,
    fixed: &Allocation,
) -> Result<BaselineSolution, WelfareError> {
    let (start, _) = max_utilitarian_scaled(instance, fixed)?;
    let mut search = Search::new(instance, objective, fixed, budget);
    let start_score = search.score_of(&start);
    search.best = Some((start, start_score));
    let finished = search.descend(0);
    let nodes = search.nodes;
    let (allocation, score) = search.best.take().expect("incumbent is seeded");
    if !finished {
        return Err(WelfareError::BudgetExceeded {
            budget,
            incumbent: Some(Box::new(allocation)),
        });
    }
    let value = welfare(instance, &allocation, objective.objective())?
        .scalar()
        .expect("scalar objective");
    Ok(BaselineSolution {
        allocation,
        value,
        nodes,
        score,
    })
}

pub(crate) fn score_allocation(
    instance: &Instance,
    objective: BaselineObjective,
    allocation: &Allocation,
) -> Score {
    let search = Search::new(instance, objective, &Allocation::empty(instance.n()), 0);
    search.score_of(allocation)
}

struct Search<'a> {
    instance: &'a Instance,
    objective: BaselineObjective,
    budget: u64,
    nodes: u64,
    /// Undecided pairs `(item, agent)` in search order.
    pairs: Vec<(usize, usize)>,
    /// Position of `(agent, item)` in `pairs`; `usize::MAX` for fixed pairs.
    position: Vec<Vec<usize>>,
    /// Items per agent sorted by decreasing utility.
    by_value: Vec<Vec<usize>>,
    /// Integer LSOWA weights `K, K-1, ..., 1`.
    owa: Vec<i128>,
    current: Allocation,
    agent_count: Vec<usize>,
    item_count: Vec<usize>,
    agent_left: Vec<usize>,
    item_left: Vec<usize>,
    best: Option<(Allocation, Score)>,
}

impl<'a> Search<'a> {
    fn new(
        instance: &'a Instance,
        objective: BaselineObjective,
        fixed: &Allocation,
        budget: u64,
    ) -> Self {
        let (n, m) = (instance.n(), instance.m());
        let mut pairs = Vec::new();
        let mut position = vec![vec![usize::MAX; m]; n];
        let mut agent_left = vec![0; n];
        let mut item_left = vec![0; m];
        for o in 0..m {
            for i in 0..n {
                if !fixed.holds(i, o) {
                    position[i][o] = pairs.len();
                    pairs.push((o, i));
                    agent_left[i] += 1;
                    item_left[o] += 1;
                }
            }
        }
        let by_value = (0..n)
            .map(|i| {
                let mut items: Vec<usize> = (0..m).collect();
                items.sort_by(|&a, &b| {
                    instance
                        .scaled_utility(i, b)
                        .cmp(&instance.scaled_utility(i, a))
                        .then(a.cmp(&b))
                });
                items
            })
            .collect();
        let k = instance
            .agent_caps()
            .iter()
            .map(|c| c.hi)
            .max()
            .unwrap_or(0);
        let owa = (0..k).map(|j| (k - j) as i128).collect();
        let agent_count = (0..n).map(|i| fixed.bundle(i).len()).collect();
        let item_count = fixed.item_counts(m);
        Search {
            instance,
            objective,
            budget,
            nodes: 0,
            pairs,
            position,
            by_value,
            owa,
            current: fixed.clone(),
            agent_count,
            item_count,
            agent_left,
            item_left,
            best: None,
        }
    }

    fn agent_score_parts(&self, values: &mut [i64]) -> i128 {
        match self.objective {
            BaselineObjective::Lsowa => {
                values.sort_unstable_by(|a, b| b.cmp(a));
                values
                    .iter()
                    .zip(&self.owa)
                    .map(|(&v, &w)| v as i128 * w)
                    .sum()
            }
            _ => values.iter().map(|&v| v as i128).sum(),
        }
    }

    fn combine(&self, per_agent: &[i128]) -> Score {
        match self.objective {
            BaselineObjective::Nash => {
                let scale = self.instance.utility_scale() as f64;
                let positive: Vec<f64> = per_agent
                    .iter()
                    .filter(|&&v| v > 0)
                    .map(|&v| v as f64 / scale)
                    .collect();
                Score::Nash {
                    positive: positive.len(),
                    product: positive.iter().product(),
                }
            }
            BaselineObjective::Egalitarian => {
                Score::Exact(per_agent.iter().copied().min().unwrap_or(0))
            }
            BaselineObjective::Lsowa => Score::Exact(per_agent.iter().sum()),
        }
    }

    fn score_of(&self, allocation: &Allocation) -> Score {
        let per_agent: Vec<i128> = (0..self.instance.n())
            .map(|i| {
                let mut values: Vec<i64> = allocation
                    .bundle(i)
                    .iter()
                    .map(|&o| self.instance.scaled_utility(i, o))
                    .collect();
                self.agent_score_parts(&mut values)
            })
            .collect();
        self.combine(&per_agent)
    }

    /// Best value agent `i` could reach alone from position `at`.
    fn agent_optimistic(&self, i: usize, at: usize) -> i128 {
        let cap = self.instance.agent_cap(i);
        let held = self.agent_count[i];
        let need = cap.lo.saturating_sub(held);
        let room = cap.hi.saturating_sub(held);
        let candidates: Vec<i64> = self.by_value[i]
            .iter()
            .filter(|&&o| {
                let p = self.position[i][o];
                p != usize::MAX && p >= at && self.item_count[o] < self.instance.item_cap(o).hi
            })
            .map(|&o| self.instance.scaled_utility(i, o))
            .take(room)
            .collect();
        let mut base: Vec<i64> = self
            .current
            .bundle(i)
            .iter()
            .map(|&o| self.instance.scaled_utility(i, o))
            .collect();
        match self.objective {
            BaselineObjective::Lsowa => {
                let mut best = i128::MIN;
                for take in need.min(candidates.len())..=candidates.len() {
                    let mut values = base.clone();
                    values.extend_from_slice(&candidates[..take]);
                    best = best.max(self.agent_score_parts(&mut values));
                }
                best
            }
            _ => {
                let positive = candidates.iter().take_while(|&&v| v > 0).count();
                let take = positive.max(need).min(candidates.len());
                base.extend_from_slice(&candidates[..take]);
                self.agent_score_parts(&mut base)
            }
        }
    }

    fn bound(&self, at: usize) -> Score {
        let per_agent: Vec<i128> = (0..self.instance.n())
            .map(|i| self.agent_optimistic(i, at))
            .collect();
        self.combine(&per_agent)
    }

    fn lower_bounds_reachable(&self, i: usize, o: usize) -> bool {
        self.agent_count[i] + self.agent_left[i] >= self.instance.agent_cap(i).lo
            && self.item_count[o] + self.item_left[o] >= self.instance.item_cap(o).lo
    }

    /// Returns false if the node budget ran out.
    fn descend(&mut self, at: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        if at == self.pairs.len() {
            if self.current.status(self.instance) == crate::model::AllocationStatus::Complete {
                let score = self.score_of(&self.current);
                let better = match &self.best {
                    None => true,
                    Some((_, best)) => score.compare(best) == Ordering::Greater,
                };
                if better {
                    self.best = Some((self.current.clone(), score));
                }
            }
            return true;
        }
        if let Some((_, best)) = &self.best {
            if self.bound(at).compare(best) != Ordering::Greater {
                return true;
            }
        }
        let (o, i) = self.pairs[at];
        self.agent_left[i] -= 1;
        self.item_left[o] -= 1;
        let can_take = self.agent_count[i] < self.instance.agent_cap(i).hi
            && self.item_count[o] < self.instance.item_cap(o).hi;
        let take_first = self.instance.scaled_utility(i, o) > 0;
        let mut ok = true;
        for take in [take_first, !take_first] {
            if take {
                if !can_take {
                    continue;
                }
                self.current.assign(i, o);
                self.agent_count[i] += 1;
                self.item_count[o] += 1;
                ok = self.descend(at + 1);
                self.item_count[o] -= 1;
                self.agent_count[i] -= 1;
                self.current.unassign(i, o);
            } else if self.lower_bounds_reachable(i, o) {
                ok = self.descend(at + 1);
            }
            if !ok {
                break;
            }
        }
        self.agent_left[i] += 1;
        self.item_left[o] += 1;
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Capacity};

    fn two_agent_pairs(agent_cap: Capacity) -> Instance {
        build_instance(
            vec![vec![vec![0, 1], vec![2, 3]]; 2],
            Some(vec![vec![5.0, 5.0, 2.0, 2.0], vec![7.0, 7.0, 0.0, 0.0]]),
            vec![agent_cap; 2],
            vec![Capacity::exactly(1); 4],
        )
        .unwrap()
    }

    #[test]
    fn balanced_nash_optimum() {
        let inst = two_agent_pairs(Capacity::exactly(2));
        let sol = exact_baseline(&inst, BaselineObjective::Nash, 10_000).unwrap();
        assert_eq!(sol.value, 56.0);
        assert_eq!(
            sol.allocation,
            Allocation::from_bundles([vec![2, 3], vec![0, 1]])
        );
    }

    #[test]
    fn unconstrained_nash_optimum() {
        let inst = two_agent_pairs(Capacity::new(0, 4));
        let sol = exact_baseline(&inst, BaselineObjective::Nash, 10_000).unwrap();
        assert_eq!(sol.value, 63.0);
    }

    #[test]
    fn single_agent_takes_everything() {
        let inst = build_instance(
            vec![vec![vec![0], vec![1], vec![2]]],
            None,
            vec![Capacity::new(0, 3)],
            vec![Capacity::exactly(1); 3],
        )
        .unwrap();
        for obj in [
            BaselineObjective::Nash,
            BaselineObjective::Egalitarian,
            BaselineObjective::Lsowa,
        ] {
            let sol = exact_baseline(&inst, obj, 1000).unwrap();
            assert_eq!(sol.allocation, Allocation::from_bundles([vec![0, 1, 2]]));
        }
    }

    #[test]
    fn tiny_budget_reports_incumbent() {
        let inst = two_agent_pairs(Capacity::new(0, 4));
        match exact_baseline(&inst, BaselineObjective::Egalitarian, 1) {
            Err(WelfareError::BudgetExceeded {
                budget: 1,
                incumbent: Some(p),
            }) => {
                assert!(p.is_complete(&inst));
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
