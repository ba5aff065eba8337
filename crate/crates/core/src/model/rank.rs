use std::cmp::Ordering;

use crate::model::{Allocation, Instance};

/// `counts[j]` is the number of assignments of an item from the receiving
/// agent's `(j+1)`-th equivalence class. Larger is better, compared
/// lexicographically; missing trailing entries count as zero.
#[derive(Debug, Clone, Default)]
pub struct RankVector {
    counts: Vec<u64>,
}

impl RankVector {
    pub fn new(counts: Vec<u64>) -> Self {
        RankVector { counts }
    }

    pub fn zeros(len: usize) -> Self {
        RankVector {
            counts: vec![0; len],
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn add(&self, other: &RankVector) -> RankVector {
        let len = self.counts.len().max(other.counts.len());
        let at = |v: &[u64], j: usize| v.get(j).copied().unwrap_or(0);
        RankVector {
            counts: (0..len)
                .map(|j| at(&self.counts, j) + at(&other.counts, j))
                .collect(),
        }
    }
}

impl PartialEq for RankVector {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RankVector {}

impl PartialOrd for RankVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RankVector {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.counts.len().max(other.counts.len());
        for j in 0..len {
            let a = self.counts.get(j).copied().unwrap_or(0);
            let b = other.counts.get(j).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                unequal => return unequal,
            }
        }
        Ordering::Equal
    }
}

pub fn rank_vector(instance: &Instance, allocation: &Allocation) -> RankVector {
    let mut counts = vec![0u64; instance.max_classes()];
    for (i, o) in allocation.pairs() {
        counts[instance.rank(i, o)] += 1;
    }
    RankVector { counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_difference_decides() {
        let a = RankVector::new(vec![2, 0, 5]);
        let b = RankVector::new(vec![1, 9, 9]);
        assert!(a > b);
        assert_eq!(RankVector::new(vec![1, 2]), RankVector::new(vec![1, 2, 0]));
        assert!(RankVector::new(vec![1, 2, 1]) > RankVector::new(vec![1, 2]));
    }

    proptest! {
        #[test]
        fn total_order_on_triples(
            a in proptest::collection::vec(0u64..4, 0..5),
            b in proptest::collection::vec(0u64..4, 0..5),
            c in proptest::collection::vec(0u64..4, 0..5),
        ) {
            let (a, b, c) = (RankVector::new(a), RankVector::new(b), RankVector::new(c));
            // antisymmetry
            if a <= b && b <= a {
                prop_assert_eq!(&a, &b);
            }
            // transitivity
            if a <= b && b <= c {
                prop_assert!(a <= c);
            }
            // totality
            prop_assert!(a <= b || b <= a);
        }
    }
}
