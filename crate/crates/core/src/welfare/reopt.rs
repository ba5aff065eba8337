//! Re-optimizing a min-cost completion after one more pair is forced.
//!
//! If `witness` is a cheapest completion of `partial`, then a cheapest
//! completion that also contains `(agent, item)` is `witness` plus a cheapest
//! cycle through the arc `agent -> item` in the residual graph of `witness`.
//! Finding that cycle is one shortest-path search from `item` back to
//! `agent`, far cheaper than solving the flow again.

use crate::model::{Allocation, Instance};
use crate::welfare::flow::FlowCost;

enum Action {
    None,
    Add(usize, usize),
    Remove(usize, usize),
}

struct Arc<C> {
    from: usize,
    to: usize,
    cost: C,
    action: Action,
}

/// Returns the cheapest completion of `partial + (agent, item)` and how much
/// more it costs than `witness`, or `None` if no completion exists.
/// `witness` must be a cheapest completion of `partial` under `cost` and
/// must not hold `(agent, item)`.
pub(crate) fn force_pair<C: FlowCost>(
    instance: &Instance,
    partial: &Allocation,
    witness: &Allocation,
    agent: usize,
    item: usize,
    cost: impl Fn(usize, usize) -> C,
) -> Option<(Allocation, C)> {
    debug_assert!(!witness.holds(agent, item));
    let (n, m) = (instance.n(), instance.m());
    let source = 0;
    let agent_node = |i: usize| 1 + i;
    let item_node = |o: usize| 1 + n + o;
    let sink = 1 + n + m;
    let plain = |from, to| Arc {
        from,
        to,
        cost: C::zero(),
        action: Action::None,
    };

    let mut arcs = Vec::with_capacity(n * m + 2 * (n + m) + 2);
    let counts = witness.item_counts(m);
    for i in 0..n {
        let size = witness.bundle(i).len();
        let cap = instance.agent_cap(i);
        if size < cap.hi {
            arcs.push(plain(source, agent_node(i)));
        }
        if size > cap.lo {
            arcs.push(plain(agent_node(i), source));
        }
        for o in 0..m {
            if !witness.holds(i, o) {
                if (i, o) != (agent, item) {
                    arcs.push(Arc {
                        from: agent_node(i),
                        to: item_node(o),
                        cost: cost(i, o),
                        action: Action::Add(i, o),
                    });
                }
            } else if !partial.holds(i, o) {
                arcs.push(Arc {
                    from: item_node(o),
                    to: agent_node(i),
                    cost: cost(i, o).neg(),
                    action: Action::Remove(i, o),
                });
            }
        }
    }
    for (o, &count) in counts.iter().enumerate() {
        let cap = instance.item_cap(o);
        if count < cap.hi {
            arcs.push(plain(item_node(o), sink));
        }
        if count > cap.lo {
            arcs.push(plain(sink, item_node(o)));
        }
    }
    let total = witness.assignments();
    let capacity: usize = instance.agent_caps().iter().map(|c| c.hi).sum();
    if total < capacity {
        arcs.push(plain(sink, source));
    }
    if total > 0 {
        arcs.push(plain(source, sink));
    }

    // Bellman-Ford: the residual graph of an optimal flow has no negative
    // cycle, so this settles within `nodes` rounds.
    let nodes = n + m + 2;
    let start = item_node(item);
    let mut dist: Vec<Option<C>> = vec![None; nodes];
    let mut parent = vec![usize::MAX; nodes];
    dist[start] = Some(C::zero());
    for _ in 0..nodes {
        let mut changed = false;
        for (k, arc) in arcs.iter().enumerate() {
            let Some(d) = &dist[arc.from] else { continue };
            let candidate = d.add(&arc.cost);
            if dist[arc.to].as_ref().is_none_or(|old| candidate < *old) {
                dist[arc.to] = Some(candidate);
                parent[arc.to] = k;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let target = agent_node(agent);
    let path_cost = dist[target].clone()?;
    let mut result = witness.clone();
    result.assign(agent, item);
    let mut v = target;
    let mut steps = 0;
    while v != start {
        let arc = &arcs[parent[v]];
        match arc.action {
            Action::Add(i, o) => {
                result.assign(i, o);
            }
            Action::Remove(i, o) => {
                result.unassign(i, o);
            }
            Action::None => {}
        }
        v = arc.from;
        steps += 1;
        assert!(steps <= nodes, "shortest-path tree has a cycle");
    }
    Some((result, cost(agent, item).add(&path_cost)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::welfare::max_utilitarian_scaled;
    use crate::welfare::tests::four_agent_example;

    #[test]
    fn matches_full_solve_on_four_agent_example() {
        let inst = four_agent_example();
        let p = Allocation::from_bundles([vec![0, 2], vec![0, 2], vec![1, 3], vec![1, 3]]);
        let (w, best) = max_utilitarian_scaled(&inst, &p).unwrap();
        for i in 0..4 {
            for o in 0..6 {
                if w.holds(i, o) {
                    continue;
                }
                let fast = force_pair(&inst, &p, &w, i, o, |a, b| -inst.scaled_utility(a, b));
                let full = max_utilitarian_scaled(&inst, &p.with(i, o))
                    .ok()
                    .map(|(_, v)| v);
                match (fast, full) {
                    (Some((q, delta)), Some(value)) => {
                        assert_eq!(best - delta, value, "pair ({i},{o})");
                        assert!(q.extends(&p.with(i, o)) && q.is_complete(&inst));
                    }
                    (None, None) => {}
                    (fast, full) => panic!("pair ({i},{o}): {fast:?} vs {full:?}"),
                }
            }
        }
    }
}
