use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{rank_vector, Allocation, Instance, RankVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Utilitarian,
    Nash,
    Egalitarian,
    Lsowa,
    Rank,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Utilitarian => "utilitarian",
            Objective::Nash => "nash",
            Objective::Egalitarian => "egalitarian",
            Objective::Lsowa => "lsowa",
            Objective::Rank => "rank",
        })
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "utilitarian" | "um" => Ok(Objective::Utilitarian),
            "nash" => Ok(Objective::Nash),
            "egalitarian" | "egal" => Ok(Objective::Egalitarian),
            "lsowa" => Ok(Objective::Lsowa),
            "rank" | "rm" => Ok(Objective::Rank),
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WelfareValue {
    Scalar(f64),
    Rank(RankVector),
}

impl WelfareValue {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            WelfareValue::Scalar(v) => Some(*v),
            WelfareValue::Rank(_) => None,
        }
    }
}

/// Linear OWA weights `w_k = (K - k + 1) / K` for `k = 1..=K`, where `K` is
/// the largest agent upper capacity.
pub fn lsowa_weights(instance: &Instance) -> Vec<f64> {
    let k = instance
        .agent_caps()
        .iter()
        .map(|c| c.hi)
        .max()
        .unwrap_or(0);
    (1..=k).map(|j| (k - j + 1) as f64 / k as f64).collect()
}

fn lsowa_agent(instance: &Instance, agent: usize, allocation: &Allocation, weights: &[f64]) -> f64 {
    let mut values: Vec<f64> = allocation
        .bundle(agent)
        .iter()
        .map(|&o| instance.utility(agent, o))
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.iter().zip(weights).map(|(v, w)| v * w).sum()
}

/// Welfare of a complete allocation under `objective`.
pub fn welfare(
    instance: &Instance,
    allocation: &Allocation,
    objective: Objective,
) -> Result<WelfareValue, ModelError> {
    allocation.validate_complete(instance)?;
    let per_agent = || {
        (0..instance.n()).map(|i| instance.bundle_utility(i, allocation.bundle(i).iter().copied()))
    };
    Ok(match objective {
        Objective::Utilitarian => WelfareValue::Scalar(per_agent().sum()),
        Objective::Nash => WelfareValue::Scalar(per_agent().product()),
        Objective::Egalitarian => WelfareValue::Scalar(per_agent().fold(f64::INFINITY, f64::min)),
        Objective::Lsowa => {
            let weights = lsowa_weights(instance);
            WelfareValue::Scalar(
                (0..instance.n())
                    .map(|i| lsowa_agent(instance, i, allocation, &weights))
                    .sum(),
            )
        }
        Objective::Rank => WelfareValue::Rank(rank_vector(instance, allocation)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Capacity};

    fn two_agent_pairs() -> Instance {
        build_instance(
            vec![vec![vec![0, 1], vec![2, 3]]; 2],
            Some(vec![vec![5.0, 5.0, 2.0, 2.0], vec![7.0, 7.0, 0.0, 0.0]]),
            vec![Capacity::exactly(2); 2],
            vec![Capacity::exactly(1); 4],
        )
        .unwrap()
    }

    #[test]
    fn nash_of_two_agent_pairsllocations() {
        let inst = two_agent_pairs();
        let good = Allocation::from_bundles([vec![2, 3], vec![0, 1]]);
        let bad = Allocation::from_bundles([vec![0, 1], vec![2, 3]]);
        assert_eq!(
            welfare(&inst, &good, Objective::Nash).unwrap(),
            WelfareValue::Scalar(56.0)
        );
        assert_eq!(
            welfare(&inst, &bad, Objective::Nash).unwrap(),
            WelfareValue::Scalar(0.0)
        );
    }

    #[test]
    fn incomplete_is_rejected() {
        let inst = two_agent_pairs();
        let partial = Allocation::from_bundles([vec![2], vec![0, 1]]);
        assert_eq!(
            welfare(&inst, &partial, Objective::Utilitarian),
            Err(ModelError::IncompleteAllocation)
        );
    }

    #[test]
    fn lsowa_weights_are_linear() {
        let inst = two_agent_pairs();
        assert_eq!(lsowa_weights(&inst), vec![1.0, 0.5]);
        let p = Allocation::from_bundles([vec![0, 2], vec![1, 3]]);
        // Alice: 5*1 + 2*0.5, Bob: 7*1 + 0*0.5
        assert_eq!(
            welfare(&inst, &p, Objective::Lsowa).unwrap(),
            WelfareValue::Scalar(13.0)
        );
        assert_eq!(
            welfare(&inst, &p, Objective::Egalitarian).unwrap(),
            WelfareValue::Scalar(7.0)
        );
    }
}
