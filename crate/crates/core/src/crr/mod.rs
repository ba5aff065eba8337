//! Constrained round robin (W-CRR) and plain picking-sequence allocation.
//!
//! W-CRR behaves like round robin, except that an agent may only take an item
//! if the enlarged partial allocation can still be completed into one that
//! meets the welfare goal. Every such check is one completion query.

mod sequential;

use std::collections::VecDeque;
use std::fmt;

use crate::error::CrrError;
use crate::model::{Allocation, Instance};
use crate::welfare::{completion_step, WelfareGoal};

pub use sequential::{make_sequence, sequential_allocation, PickingSequence, SequenceKind};

/// One line of a W-CRR trace. Indices are 0-based; `round` is the agent's
/// bundle size after the pick and `class_rank` the 1-based rank of the
/// dropped class in the agent's original order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrrEvent {
    Pick {
        agent: usize,
        item: usize,
        round: usize,
    },
    DropClass {
        agent: usize,
        class_rank: usize,
    },
}

impl fmt::Display for CrrEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrrEvent::Pick { agent, item, round } => write!(f, "PICK {agent} {item} {round}"),
            CrrEvent::DropClass { agent, class_rank } => {
                write!(f, "DROPCLASS {agent} {class_rank}")
            }
        }
    }
}

/// A completion query issued for the pair `(agent, item)` when `picks_before`
/// picks had been made.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRecord {
    pub agent: usize,
    pub item: usize,
    pub picks_before: usize,
    pub answer: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrrRun {
    pub allocation: Allocation,
    pub events: Vec<CrrEvent>,
    pub queries: Vec<QueryRecord>,
    /// True when the output came from a completion witness rather than the
    /// partial allocation built by the picks.
    pub from_witness: bool,
}

impl CrrRun {
    pub fn picks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.events.iter().filter_map(|e| match *e {
            CrrEvent::Pick { agent, item, .. } => Some((agent, item)),
            CrrEvent::DropClass { .. } => None,
        })
    }

    /// The partial allocation after the first `k` picks.
    pub fn partial_after(&self, k: usize) -> Allocation {
        let mut p = Allocation::empty(self.allocation.n());
        for (agent, item) in self.picks().take(k) {
            p.assign(agent, item);
        }
        p
    }

    pub fn trace_text(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }
}

struct Class {
    rank: usize,
    items: Vec<usize>,
}

struct State<'a> {
    instance: &'a Instance,
    p: Allocation,
    counts: Vec<usize>,
    lists: Vec<VecDeque<Class>>,
    rejected: Vec<Vec<bool>>,
}

impl<'a> State<'a> {
    fn new(instance: &'a Instance) -> Self {
        let lists = (0..instance.n())
            .map(|i| {
                instance
                    .prefs(i)
                    .classes()
                    .iter()
                    .enumerate()
                    .map(|(r, items)| Class {
                        rank: r + 1,
                        items: items.clone(),
                    })
                    .collect()
            })
            .collect();
        State {
            instance,
            p: Allocation::empty(instance.n()),
            counts: vec![0; instance.m()],
            lists,
            rejected: vec![vec![false; instance.m()]; instance.n()],
        }
    }

    fn can_take(&self, i: usize, o: usize) -> bool {
        !self.p.holds(i, o)
            && self.p.bundle(i).len() < self.instance.agent_cap(i).hi
            && self.counts[o] < self.instance.item_cap(o).hi
    }

    fn any_extension(&self) -> bool {
        (0..self.instance.n()).any(|i| (0..self.instance.m()).any(|o| self.can_take(i, o)))
    }

    fn active(&self) -> Vec<usize> {
        (0..self.instance.n())
            .filter(|&i| !self.lists[i].is_empty())
            .collect()
    }

    fn remove_from_list(&mut self, agent: usize, item: usize) {
        let list = &mut self.lists[agent];
        for class in list.iter_mut() {
            class.items.retain(|&o| o != item);
        }
        list.retain(|c| !c.items.is_empty());
    }

    fn pick(&mut self, agent: usize, item: usize) {
        self.p.assign(agent, item);
        self.counts[item] += 1;
        self.remove_from_list(agent, item);
        if self.counts[item] >= self.instance.item_cap(item).hi {
            for i in 0..self.instance.n() {
                self.remove_from_list(i, item);
            }
        }
    }
}

fn minimal_agents(state: &State, active: &[usize], weights: Option<&[f64]>) -> Vec<usize> {
    let size = |i: usize| state.p.bundle(i).len();
    match weights {
        None => {
            let fewest = active.iter().map(|&i| size(i)).min().unwrap_or(0);
            active
                .iter()
                .copied()
                .filter(|&i| size(i) == fewest)
                .collect()
        }
        Some(s) => {
            let total_weight: f64 = s.iter().sum();
            let assigned = state.p.assignments() as f64;
            let below: Vec<usize> = active
                .iter()
                .copied()
                .filter(|&i| (size(i) as f64) * total_weight < s[i] * assigned)
                .collect();
            if !below.is_empty() {
                return below;
            }
            // nobody is strictly behind their share: fall back to the agents
            // furthest behind relative to their weight
            let ratio = |i: usize| size(i) as f64 / s[i];
            let best = active
                .iter()
                .map(|&i| ratio(i))
                .fold(f64::INFINITY, f64::min);
            active
                .iter()
                .copied()
                .filter(|&i| ratio(i) <= best)
                .collect()
        }
    }
}

/// Runs W-CRR and returns the allocation.
pub fn w_crr(
    instance: &Instance,
    goal: &WelfareGoal,
    share_weights: Option<&[f64]>,
) -> Result<Allocation, CrrError> {
    w_crr_traced(instance, goal, share_weights).map(|run| run.allocation)
}

/// Runs W-CRR, keeping the event trace and every completion query issued.
pub fn w_crr_traced(
    instance: &Instance,
    goal: &WelfareGoal,
    share_weights: Option<&[f64]>,
) -> Result<CrrRun, CrrError> {
    if let Some(s) = share_weights {
        if s.len() != instance.n() || s.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(CrrError::BadShareWeights);
        }
    }
    let mut state = State::new(instance);
    let mut events = Vec::new();
    let mut queries = Vec::new();
    let mut picks = 0;
    // optimal completion of the current partial allocation
    let mut witness = goal.optimal_allocation().clone();

    loop {
        let active = state.active();
        if active.is_empty() || !state.any_extension() {
            break;
        }
        let candidates = minimal_agents(&state, &active, share_weights);
        let mut chosen = None;
        'agents: for &i in &candidates {
            let head = state.lists[i]
                .front()
                .map(|c| c.items.clone())
                .unwrap_or_default();
            for o in head {
                if state.rejected[i][o] || !state.can_take(i, o) {
                    continue;
                }
                let answer = completion_step(goal, instance, &state.p, &witness, i, o)?;
                queries.push(QueryRecord {
                    agent: i,
                    item: o,
                    picks_before: picks,
                    answer: answer.satisfiable(),
                });
                match answer.witness {
                    Some(w) => {
                        witness = w;
                        chosen = Some((i, o));
                        break 'agents;
                    }
                    None => state.rejected[i][o] = true,
                }
            }
        }
        match chosen {
            Some((agent, item)) => {
                state.pick(agent, item);
                picks += 1;
                events.push(CrrEvent::Pick {
                    agent,
                    item,
                    round: state.p.bundle(agent).len(),
                });
            }
            None => {
                for &i in &candidates {
                    if let Some(class) = state.lists[i].pop_front() {
                        events.push(CrrEvent::DropClass {
                            agent: i,
                            class_rank: class.rank,
                        });
                    }
                }
            }
        }
    }

    let p = state.p;
    let (allocation, from_witness) = if goal.is_satisfied_by(instance, &p) {
        (p, false)
    } else {
        (witness, true)
    };
    Ok(CrrRun {
        allocation,
        events,
        queries,
        from_witness,
    })
}
