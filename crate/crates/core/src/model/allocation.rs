use std::collections::BTreeSet;

use crate::error::ModelError;
use crate::model::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationStatus {
    Partial,
    Complete,
}

/// Agent-to-bundle map. Bundles are sets, so an agent never holds two copies
/// of one item.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    bundles: Vec<BTreeSet<usize>>,
}

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation {
            bundles: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_bundles<I, B>(bundles: I) -> Self
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = usize>,
    {
        Allocation {
            bundles: bundles
                .into_iter()
                .map(|b| b.into_iter().collect())
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, agent: usize) -> &BTreeSet<usize> {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[BTreeSet<usize>] {
        &self.bundles
    }

    pub fn holds(&self, agent: usize, item: usize) -> bool {
        self.bundles[agent].contains(&item)
    }

    /// Adds `item` to `agent`'s bundle; false if it was already there.
    pub fn assign(&mut self, agent: usize, item: usize) -> bool {
        self.bundles[agent].insert(item)
    }

    pub fn unassign(&mut self, agent: usize, item: usize) -> bool {
        self.bundles[agent].remove(&item)
    }

    pub fn with(&self, agent: usize, item: usize) -> Allocation {
        let mut next = self.clone();
        next.assign(agent, item);
        next
    }

    /// Total number of (agent, item) assignments.
    pub fn assignments(&self) -> usize {
        self.bundles.iter().map(BTreeSet::len).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bundles
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |&o| (i, o)))
    }

    pub fn item_counts(&self, m: usize) -> Vec<usize> {
        let mut counts = vec![0; m];
        for (_, o) in self.pairs() {
            if o < m {
                counts[o] += 1;
            }
        }
        counts
    }

    /// True if every assignment of `other` is also in `self`.
    pub fn extends(&self, other: &Allocation) -> bool {
        self.n() == other.n()
            && self
                .bundles
                .iter()
                .zip(&other.bundles)
                .all(|(mine, theirs)| theirs.is_subset(mine))
    }

    /// Checks shape and upper capacities against `instance`.
    pub fn check_upper(&self, instance: &Instance) -> Result<(), ModelError> {
        if self.n() != instance.n() {
            return Err(ModelError::AllocationMismatch(format!(
                "{} bundles for {} agents",
                self.n(),
                instance.n()
            )));
        }
        for (i, bundle) in self.bundles.iter().enumerate() {
            if let Some(&o) = bundle.iter().find(|&&o| o >= instance.m()) {
                return Err(ModelError::AllocationMismatch(format!(
                    "agent {i} holds unknown item {o}"
                )));
            }
            if bundle.len() > instance.agent_cap(i).hi {
                return Err(ModelError::AllocationMismatch(format!(
                    "agent {i} holds {} items, above its capacity {}",
                    bundle.len(),
                    instance.agent_cap(i).hi
                )));
            }
        }
        for (o, count) in self.item_counts(instance.m()).into_iter().enumerate() {
            if count > instance.item_cap(o).hi {
                return Err(ModelError::AllocationMismatch(format!(
                    "item {o} assigned {count} times, above its capacity {}",
                    instance.item_cap(o).hi
                )));
            }
        }
        Ok(())
    }

    /// Status relative to `instance`; assumes [`Allocation::check_upper`] holds.
    pub fn status(&self, instance: &Instance) -> AllocationStatus {
        let agents_ok = self
            .bundles
            .iter()
            .enumerate()
            .all(|(i, b)| b.len() >= instance.agent_cap(i).lo);
        let items_ok = self
            .item_counts(instance.m())
            .into_iter()
            .enumerate()
            .all(|(o, c)| c >= instance.item_cap(o).lo);
        if agents_ok && items_ok {
            AllocationStatus::Complete
        } else {
            AllocationStatus::Partial
        }
    }

    /// Upper capacities respected and every lower bound met.
    pub fn is_complete(&self, instance: &Instance) -> bool {
        self.check_upper(instance).is_ok() && self.status(instance) == AllocationStatus::Complete
    }

    pub fn validate_complete(&self, instance: &Instance) -> Result<(), ModelError> {
        self.check_upper(instance)?;
        match self.status(instance) {
            AllocationStatus::Complete => Ok(()),
            AllocationStatus::Partial => Err(ModelError::IncompleteAllocation),
        }
    }
}

/// Any two bundle sizes differ by at most one.
pub fn is_balanced(allocation: &Allocation) -> bool {
    let sizes = allocation.bundles().iter().map(BTreeSet::len);
    match (sizes.clone().min(), sizes.max()) {
        (Some(lo), Some(hi)) => hi - lo <= 1,
        _ => true,
    }
}
