//! Mallows sampling by repeated insertion.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{IoError, ModelError};
use crate::model::{build_instance, Capacity, Instance};

/// Dispersion `phi` around a reference ranking: 0 always returns the
/// reference, 1 is uniform over permutations.
#[derive(Debug, Clone, PartialEq)]
pub struct Mallows {
    phi: f64,
    reference: Vec<usize>,
}

impl Mallows {
    pub fn new(phi: f64, reference: Vec<usize>) -> Result<Self, IoError> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(IoError::Config(format!("phi {phi} outside [0, 1]")));
        }
        let mut seen = vec![false; reference.len()];
        for &o in &reference {
            if o >= seen.len() || std::mem::replace(&mut seen[o], true) {
                return Err(IoError::Config("reference is not a permutation".into()));
            }
        }
        Ok(Mallows { phi, reference })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn reference(&self) -> &[usize] {
        &self.reference
    }

    /// The `i`-th reference item (1-based) goes to position `j <= i` with
    /// weight `phi^(i-j)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut ranking = Vec::with_capacity(self.reference.len());
        for (k, &item) in self.reference.iter().enumerate() {
            let i = k + 1;
            // powi(0.0, 0) is 1, so phi = 0 always appends
            let weights = (1..=i).map(|j| self.phi.powi((i - j) as i32));
            let j = WeightedIndex::new(weights)
                .expect("last weight is 1")
                .sample(rng);
            ranking.insert(j, item);
        }
        ranking
    }
}

/// A self-contained sampling request, reproducible from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MallowsConfig {
    pub phi: f64,
    pub reference: Vec<usize>,
    pub seed: u64,
}

impl MallowsConfig {
    pub fn sample(&self) -> Result<Vec<usize>, IoError> {
        let model = Mallows::new(self.phi, self.reference.clone())?;
        Ok(model.sample(&mut ChaCha8Rng::seed_from_u64(self.seed)))
    }
}

/// `n` agents with strict Mallows rankings around a random reference and
/// Borda utilities.
pub fn mallows_instance<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    phi: f64,
    agent_cap: Capacity,
    item_cap: Capacity,
    rng: &mut R,
) -> Result<Instance, IoError> {
    let mut reference: Vec<usize> = (0..m).collect();
    reference.shuffle(rng);
    let model = Mallows::new(phi, reference)?;
    let profile = (0..n)
        .map(|_| model.sample(rng).into_iter().map(|o| vec![o]).collect())
        .collect();
    build_instance(profile, None, vec![agent_cap; n], vec![item_cap; m])
        .map_err(|e: ModelError| e.into())
}

/// [`mallows_instance`] driven by a ChaCha8 generator seeded with `seed`.
pub fn seeded_mallows_instance(
    n: usize,
    m: usize,
    phi: f64,
    agent_cap: Capacity,
    item_cap: Capacity,
    seed: u64,
) -> Result<Instance, IoError> {
    mallows_instance(
        n,
        m,
        phi,
        agent_cap,
        item_cap,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}
