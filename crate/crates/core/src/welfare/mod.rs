//! Welfare optimizers and the completion oracles used by constrained round
//! robin.
//!
//! Utilitarian and rank-maximal allocations come from a min-cost circulation
//! on the bipartite agent/item network; Nash, egalitarian and linear-OWA
//! optima come from a budgeted branch and bound.

mod baseline;
pub mod flow;
mod goal;
mod reopt;

pub use baseline::{exact_baseline, exact_baseline_extending, BaselineObjective, BaselineSolution};
pub use flow::{solve_flow, Circulation, FlowCost, FlowNetwork, LexCost};
pub use goal::{completion, completion_step, CompletionAnswer, GoalKind, WelfareGoal};

use crate::error::WelfareError;
use crate::model::{Allocation, Instance, RankVector};

/// Node layout: source, agents, items, sink.
struct AllocationNetwork<C> {
    network: FlowNetwork<C>,
    /// `(arc, agent, item)` for every agent-item arc.
    pair_arcs: Vec<(usize, usize, usize)>,
}

fn allocation_network<C: FlowCost>(
    instance: &Instance,
    fixed: &Allocation,
    cost: impl Fn(usize, usize) -> C,
) -> AllocationNetwork<C> {
    let (n, m) = (instance.n(), instance.m());
    let source = 0;
    let agent = |i: usize| 1 + i;
    let item = |o: usize| 1 + n + o;
    let sink = 1 + n + m;
    let mut network = FlowNetwork::new(n + m + 2);
    for i in 0..n {
        let cap = instance.agent_cap(i);
        network.add_arc(source, agent(i), cap.lo as i64, cap.hi as i64, C::zero());
    }
    let mut pair_arcs = Vec::with_capacity(n * m);
    for i in 0..n {
        for o in 0..m {
            let lo = i64::from(fixed.holds(i, o));
            let arc = network.add_arc(agent(i), item(o), lo, 1, cost(i, o));
            pair_arcs.push((arc, i, o));
        }
    }
    for o in 0..m {
        let cap = instance.item_cap(o);
        network.add_arc(item(o), sink, cap.lo as i64, cap.hi as i64, C::zero());
    }
    let total: usize = instance.agent_caps().iter().map(|c| c.hi).sum();
    network.add_arc(sink, source, 0, total as i64, C::zero());
    AllocationNetwork { network, pair_arcs }
}

fn solve_allocation<C: FlowCost>(
    instance: &Instance,
    fixed: &Allocation,
    cost: impl Fn(usize, usize) -> C,
) -> Result<(Allocation, C), WelfareError> {
    if fixed.check_upper(instance).is_err() {
        return Err(WelfareError::NoFeasibleCompletion);
    }
    let net = allocation_network(instance, fixed, cost);
    let solution = solve_flow(&net.network).map_err(|_| WelfareError::NoFeasibleCompletion)?;
    let mut allocation = Allocation::empty(instance.n());
    for &(arc, i, o) in &net.pair_arcs {
        if solution.flow[arc] > 0 {
            allocation.assign(i, o);
        }
    }
    Ok((allocation, solution.cost))
}

/// Some complete allocation extending `partial`, if one exists.
pub fn feasible_completion(instance: &Instance, partial: &Allocation) -> Option<Allocation> {
    solve_allocation(instance, partial, |_, _| 0i64)
        .ok()
        .map(|(p, _)| p)
}

pub fn has_feasible_completion(instance: &Instance, partial: &Allocation) -> bool {
    feasible_completion(instance, partial).is_some()
}

/// Utilitarian-maximal completion with its welfare in scaled integer units
/// (see [`Instance::utility_scale`]).
pub fn max_utilitarian_scaled(
    instance: &Instance,
    fixed: &Allocation,
) -> Result<(Allocation, i64), WelfareError> {
    let (allocation, cost) =
        solve_allocation(instance, fixed, |i, o| -instance.scaled_utility(i, o))?;
    Ok((allocation, -cost))
}

/// Complete allocation extending `fixed` with the largest utilitarian welfare.
pub fn max_utilitarian(
    instance: &Instance,
    fixed: &Allocation,
) -> Result<(Allocation, f64), WelfareError> {
    let (allocation, scaled) = max_utilitarian_scaled(instance, fixed)?;
    Ok((allocation, scaled as f64 / instance.utility_scale() as f64))
}

/// Complete allocation extending `fixed` with the lexicographically largest
/// rank vector. Costs are negated rank-count vectors, so no scalar weights
/// are needed.
pub fn max_rank(
    instance: &Instance,
    fixed: &Allocation,
) -> Result<(Allocation, RankVector), WelfareError> {
    let (allocation, _) = solve_allocation(instance, fixed, |i, o| {
        LexCost::unit(instance.rank(i, o), -1)
    })?;
    let rank = crate::model::rank_vector(instance, &allocation);
    Ok((allocation, rank))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{build_instance, rank_vector, Capacity};

    pub(crate) fn four_agent_example() -> Instance {
        let mut profile = vec![(0..6).map(|o| vec![o]).collect::<Vec<_>>(); 3];
        profile.push(vec![vec![1], vec![2], vec![3], vec![4], vec![0], vec![5]]);
        let mut utils = vec![vec![6.0, 5.0, 4.0, 3.0, 2.0, 1.0]; 3];
        utils.push(vec![2.0, 6.0, 5.0, 4.0, 3.0, 1.0]);
        build_instance(
            profile,
            Some(utils),
            vec![Capacity::exactly(3); 4],
            vec![Capacity::exactly(2); 6],
        )
        .unwrap()
    }

    #[test]
    fn four_agent_example_optimum() {
        let inst = four_agent_example();
        let (p, w) = max_utilitarian(&inst, &Allocation::empty(4)).unwrap();
        assert_eq!(w, 45.0);
        assert!(p.is_complete(&inst));
    }

    #[test]
    fn complete_fixed_is_returned_unchanged() {
        let inst = four_agent_example();
        let fixed =
            Allocation::from_bundles([vec![0, 2, 4], vec![0, 2, 5], vec![1, 3, 5], vec![1, 3, 4]]);
        let (p, w) = max_utilitarian(&inst, &fixed).unwrap();
        assert_eq!(p, fixed);
        assert_eq!(w, 45.0);
        let (q, r) = max_rank(&inst, &fixed).unwrap();
        assert_eq!(q, fixed);
        assert_eq!(r, rank_vector(&inst, &fixed));
    }

    #[test]
    fn over_capacity_fixed_has_no_completion() {
        let inst = four_agent_example();
        let fixed = Allocation::from_bundles([vec![0], vec![0], vec![0], vec![]]);
        assert_eq!(
            max_utilitarian(&inst, &fixed).unwrap_err(),
            WelfareError::NoFeasibleCompletion
        );
        assert!(!has_feasible_completion(&inst, &fixed));
    }
}
