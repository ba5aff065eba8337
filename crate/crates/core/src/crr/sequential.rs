use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Allocation, Instance};

/// An ordered list of turns, one agent index per turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PickingSequence {
    turns: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    /// Independent random permutation of the agents in every round.
    RbRandom,
    /// One random permutation, repeated.
    Rr,
}

impl PickingSequence {
    pub fn new(turns: Vec<usize>) -> Self {
        PickingSequence { turns }
    }

    /// `0, 1, ..., n-1, 0, 1, ...` truncated to `length`.
    pub fn round_robin(n: usize, length: usize) -> Self {
        PickingSequence::new((0..length).map(|k| k % n.max(1)).collect())
    }

    pub fn turns(&self) -> &[usize] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Every prefix keeps all `n` agents within one turn of each other.
    pub fn is_recursively_balanced(&self, n: usize) -> bool {
        let mut counts = vec![0usize; n];
        for &a in &self.turns {
            if a >= n {
                return false;
            }
            counts[a] += 1;
            let max = counts.iter().max().copied().unwrap_or(0);
            let min = counts.iter().min().copied().unwrap_or(0);
            if max - min > 1 {
                return false;
            }
        }
        true
    }

    /// The turns are a single permutation of the `n` agents, repeated.
    pub fn is_round_robin(&self, n: usize) -> bool {
        if n == 0 {
            return self.turns.is_empty();
        }
        let head = &self.turns[..n.min(self.turns.len())];
        let mut seen = vec![false; n];
        for &a in head {
            if a >= n || seen[a] {
                return false;
            }
            seen[a] = true;
        }
        self.turns
            .iter()
            .enumerate()
            .all(|(k, &a)| a == self.turns[k % n])
    }
}

pub fn make_sequence(kind: SequenceKind, n: usize, length: usize, seed: u64) -> PickingSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut turns = Vec::with_capacity(length);
    if n == 0 {
        return PickingSequence::new(turns);
    }
    perm.shuffle(&mut rng);
    while turns.len() < length {
        if kind == SequenceKind::RbRandom && !turns.is_empty() {
            perm.shuffle(&mut rng);
        }
        turns.extend(perm.iter().copied().take(length - turns.len()));
    }
    PickingSequence::new(turns)
}

/// Each turn the agent takes her most preferred item that still has copies
/// left and that she does not hold; ties go to the lowest item index. A turn
/// is skipped when the agent is full or nothing is left for her.
pub fn sequential_allocation(instance: &Instance, sequence: &PickingSequence) -> Allocation {
    let mut p = Allocation::empty(instance.n());
    let mut counts = vec![0usize; instance.m()];
    for &agent in sequence.turns() {
        if p.bundle(agent).len() >= instance.agent_cap(agent).hi {
            continue;
        }
        let choice = instance
            .prefs(agent)
            .classes()
            .iter()
            .flat_map(|class| class.iter().copied())
            .find(|&o| !p.holds(agent, o) && counts[o] < instance.item_cap(o).hi);
        if let Some(o) = choice {
            p.assign(agent, o);
            counts[o] += 1;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::check_ef1;
    use crate::model::{build_instance, Capacity};

    #[test]
    fn two_agent_example() {
        let inst = build_instance(
            vec![
                vec![vec![0], vec![1], vec![2], vec![3]],
                vec![vec![1], vec![2], vec![3], vec![0]],
            ],
            None,
            vec![Capacity::new(0, 4); 2],
            vec![Capacity::new(0, 1); 4],
        )
        .unwrap();
        let p = sequential_allocation(&inst, &PickingSequence::new(vec![0, 1, 0, 1]));
        assert_eq!(p, Allocation::from_bundles([vec![0, 2], vec![1, 3]]));
        let empty = sequential_allocation(&inst, &PickingSequence::new(vec![]));
        assert_eq!(empty, Allocation::empty(2));
    }

    #[test]
    fn unbalanced_sequence_with_chores_breaks_ef1() {
        // chores: whoever picks takes the least bad item, so A,B,B leaves
        // B with two chores while A holds the mildest one
        let inst = build_instance(
            vec![vec![vec![0], vec![1], vec![2]]; 2],
            Some(vec![vec![-1.0, -2.0, -3.0]; 2]),
            vec![Capacity::new(0, 3); 2],
            vec![Capacity::exactly(1); 3],
        )
        .unwrap();
        let p = sequential_allocation(&inst, &PickingSequence::new(vec![0, 1, 1]));
        assert!(!check_ef1(&inst, &p, 1, 0));
    }

    #[test]
    fn sequence_kinds() {
        assert_eq!(PickingSequence::round_robin(2, 4).turns(), &[0, 1, 0, 1]);
        assert!(make_sequence(SequenceKind::Rr, 3, 0, 1).is_empty());
        for seed in 0..1000 {
            let rb = make_sequence(SequenceKind::RbRandom, 4, 11, seed);
            assert_eq!(rb.len(), 11);
            assert!(rb.is_recursively_balanced(4));
            let rr = make_sequence(SequenceKind::Rr, 4, 11, seed);
            assert!(rr.is_round_robin(4));
        }
        assert!(!PickingSequence::new(vec![0, 0, 1]).is_recursively_balanced(2));
        assert!(!PickingSequence::new(vec![0, 1, 1, 0]).is_round_robin(2));
        assert!(PickingSequence::new(vec![0, 1, 1, 0]).is_recursively_balanced(2));
    }
}
