use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::Allocation;

/// Inclusive interval `[lo, hi]` on how many items an agent receives, or how
/// many agents an item is given to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Capacity {
    pub lo: usize,
    pub hi: usize,
}

impl Capacity {
    pub const fn new(lo: usize, hi: usize) -> Self {
        Capacity { lo, hi }
    }

    pub const fn exactly(k: usize) -> Self {
        Capacity { lo: k, hi: k }
    }

    pub fn contains(&self, k: usize) -> bool {
        self.lo <= k && k <= self.hi
    }
}

/// A complete weak order over items `0..m`, stored as equivalence classes in
/// decreasing preference together with an item-to-class lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakOrder {
    classes: Vec<Vec<usize>>,
    rank: Vec<usize>,
}

impl WeakOrder {
    /// Validates that `classes` partitions `0..m` into non-empty classes.
    /// Items inside a class are kept sorted by index.
    pub fn new(mut classes: Vec<Vec<usize>>, m: usize) -> Result<Self, ModelError> {
        let mut rank = vec![usize::MAX; m];
        for (r, class) in classes.iter_mut().enumerate() {
            if class.is_empty() {
                return Err(ModelError::MalformedProfile(format!(
                    "class {} is empty",
                    r + 1
                )));
            }
            class.sort_unstable();
            for &o in class.iter() {
                if o >= m {
                    return Err(ModelError::MalformedProfile(format!(
                        "item {o} out of range for {m} items"
                    )));
                }
                if rank[o] != usize::MAX {
                    return Err(ModelError::MalformedProfile(format!(
                        "item {o} listed twice"
                    )));
                }
                rank[o] = r;
            }
        }
        if let Some(missing) = rank.iter().position(|&r| r == usize::MAX) {
            return Err(ModelError::MalformedProfile(format!(
                "item {missing} is not ranked"
            )));
        }
        Ok(WeakOrder { classes, rank })
    }

    /// Strict order from a ranking, best first.
    pub fn strict(ranking: &[usize]) -> Result<Self, ModelError> {
        let m = ranking.len();
        Self::new(ranking.iter().map(|&o| vec![o]).collect(), m)
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Zero-based class index of `item` (0 = most preferred).
    pub fn rank(&self, item: usize) -> usize {
        self.rank[item]
    }

    pub fn num_items(&self) -> usize {
        self.rank.len()
    }

    pub fn is_strict(&self) -> bool {
        self.classes.iter().all(|c| c.len() == 1)
    }
}

/// Sign class of an instance's utilities. Zero is allowed on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilitySign {
    Positive,
    Negative,
    Mixed,
}

/// A validated allocation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    prefs: Vec<WeakOrder>,
    utilities: Vec<Vec<f64>>,
    agent_caps: Vec<Capacity>,
    item_caps: Vec<Capacity>,
    item_names: Vec<String>,
    scale: i64,
    scaled: Vec<Vec<i64>>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.prefs.len()
    }

    pub fn m(&self) -> usize {
        self.item_caps.len()
    }

    pub fn prefs(&self, agent: usize) -> &WeakOrder {
        &self.prefs[agent]
    }

    pub fn profile(&self) -> &[WeakOrder] {
        &self.prefs
    }

    pub fn utility(&self, agent: usize, item: usize) -> f64 {
        self.utilities[agent][item]
    }

    pub fn utilities(&self, agent: usize) -> &[f64] {
        &self.utilities[agent]
    }

    /// Utility multiplied by [`Instance::utility_scale`] and rounded; exact
    /// whenever utilities have at most six decimal digits.
    pub fn scaled_utility(&self, agent: usize, item: usize) -> i64 {
        self.scaled[agent][item]
    }

    pub fn utility_scale(&self) -> i64 {
        self.scale
    }

    pub fn agent_cap(&self, agent: usize) -> Capacity {
        self.agent_caps[agent]
    }

    pub fn item_cap(&self, item: usize) -> Capacity {
        self.item_caps[item]
    }

    pub fn agent_caps(&self) -> &[Capacity] {
        &self.agent_caps
    }

    pub fn item_caps(&self) -> &[Capacity] {
        &self.item_caps
    }

    pub fn rank(&self, agent: usize, item: usize) -> usize {
        self.prefs[agent].rank(item)
    }

    /// Length of rank vectors: the largest number of classes of any agent.
    pub fn max_classes(&self) -> usize {
        self.prefs
            .iter()
            .map(WeakOrder::num_classes)
            .max()
            .unwrap_or(0)
    }

    pub fn item_name(&self, item: usize) -> Option<&str> {
        self.item_names.get(item).map(String::as_str)
    }

    pub fn item_names(&self) -> &[String] {
        &self.item_names
    }

    /// Attaches display names for items. Names are only used by I/O.
    pub fn with_item_names(mut self, names: Vec<String>) -> Result<Self, ModelError> {
        if !names.is_empty() && names.len() != self.m() {
            return Err(ModelError::MalformedProfile(format!(
                "{} item names for {} items",
                names.len(),
                self.m()
            )));
        }
        self.item_names = names;
        Ok(self)
    }

    pub fn utility_sign(&self) -> UtilitySign {
        let all = || self.utilities.iter().flatten();
        if all().all(|&u| u >= 0.0) {
            UtilitySign::Positive
        } else if all().all(|&u| u <= 0.0) {
            UtilitySign::Negative
        } else {
            UtilitySign::Mixed
        }
    }

    pub fn bundle_utility(&self, agent: usize, items: impl IntoIterator<Item = usize>) -> f64 {
        items.into_iter().map(|o| self.utilities[agent][o]).sum()
    }

    pub fn bundle_scaled(&self, agent: usize, items: impl IntoIterator<Item = usize>) -> i64 {
        items.into_iter().map(|o| self.scaled[agent][o]).sum()
    }
}

/// Utilities from the Borda scoring rule. A strict ranking gives the `i`-th
/// item `m - i + 1`; a tied class spanning positions `a..=b` gives each member
/// the mean of the scores of those positions.
pub fn borda_utilities(profile: &[WeakOrder], m: usize) -> Vec<Vec<f64>> {
    profile
        .iter()
        .map(|order| {
            let mut utils = vec![0.0; m];
            let mut first = 1usize;
            for class in order.classes() {
                let c = class.len();
                // mean of m-a+1 .. m-b+1 with b = a + c - 1
                let score = (m + 1 - first) as f64 - (c as f64 - 1.0) / 2.0;
                for &o in class {
                    utils[o] = score;
                }
                first += c;
            }
            utils
        })
        .collect()
}

/// Builds and validates an instance. When `utilities` is `None`, Borda
/// utilities are synthesized from the profile.
pub fn build_instance(
    profile: Vec<Vec<Vec<usize>>>,
    utilities: Option<Vec<Vec<f64>>>,
    agent_caps: Vec<Capacity>,
    item_caps: Vec<Capacity>,
) -> Result<Instance, ModelError> {
    let n = profile.len();
    if n == 0 {
        return Err(ModelError::MalformedProfile("no agents".into()));
    }
    let m = item_caps.len();
    if m == 0 {
        return Err(ModelError::MalformedProfile("no items".into()));
    }
    let prefs = profile
        .into_iter()
        .enumerate()
        .map(|(i, classes)| {
            WeakOrder::new(classes, m).map_err(|e| match e {
                ModelError::MalformedProfile(msg) => {
                    ModelError::MalformedProfile(format!("agent {i}: {msg}"))
                }
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    if agent_caps.len() != n {
        return Err(ModelError::InvalidCapacity(format!(
            "{} agent capacities for {n} agents",
            agent_caps.len()
        )));
    }
    for (i, cap) in agent_caps.iter().enumerate() {
        if cap.lo > cap.hi {
            return Err(ModelError::InvalidCapacity(format!(
                "agent {i}: lower bound {} above upper bound {}",
                cap.lo, cap.hi
            )));
        }
    }
    for (o, cap) in item_caps.iter().enumerate() {
        if cap.lo > cap.hi {
            return Err(ModelError::InvalidCapacity(format!(
                "item {o}: lower bound {} above upper bound {}",
                cap.lo, cap.hi
            )));
        }
    }
    // One copy per agent: an item can never be held by more than n agents.
    if item_caps.iter().any(|cap| cap.lo > n) {
        return Err(ModelError::InfeasibleCapacities);
    }
    if let Some((o, cap)) = item_caps.iter().enumerate().find(|(_, cap)| cap.hi > n) {
        return Err(ModelError::InvalidCapacity(format!(
            "item {o}: upper bound {} exceeds the {n} agents",
            cap.hi
        )));
    }

    let utilities = match utilities {
        Some(u) => u,
        None => borda_utilities(&prefs, m),
    };
    check_utilities(&prefs, &utilities, m)?;
    let scale = utility_scale(&utilities);
    let scaled = utilities
        .iter()
        .map(|row| {
            row.iter()
                .map(|&u| (u * scale as f64).round() as i64)
                .collect()
        })
        .collect();

    let instance = Instance {
        prefs,
        utilities,
        agent_caps,
        item_caps,
        item_names: Vec::new(),
        scale,
        scaled,
    };
    if !crate::welfare::has_feasible_completion(&instance, &Allocation::empty(n)) {
        return Err(ModelError::InfeasibleCapacities);
    }
    Ok(instance)
}

fn check_utilities(
    prefs: &[WeakOrder],
    utilities: &[Vec<f64>],
    m: usize,
) -> Result<(), ModelError> {
    if utilities.len() != prefs.len() {
        return Err(ModelError::InconsistentUtilities {
            agent: utilities.len().min(prefs.len()),
            detail: format!(
                "{} utility rows for {} agents",
                utilities.len(),
                prefs.len()
            ),
        });
    }
    for (agent, (order, row)) in prefs.iter().zip(utilities).enumerate() {
        let fail = |detail: String| ModelError::InconsistentUtilities { agent, detail };
        if row.len() != m {
            return Err(fail(format!("{} values for {m} items", row.len())));
        }
        if let Some(o) = row.iter().position(|u| !u.is_finite()) {
            return Err(fail(format!("utility of item {o} is not finite")));
        }
        let mut previous: Option<f64> = None;
        for class in order.classes() {
            let value = row[class[0]];
            if let Some(&o) = class.iter().find(|&&o| row[o] != value) {
                return Err(fail(format!(
                    "items {} and {o} share a class but have utilities {value} and {}",
                    class[0], row[o]
                )));
            }
            if let Some(prev) = previous {
                if value >= prev {
                    return Err(fail(format!(
                        "class containing item {} has utility {value}, not below {prev}",
                        class[0]
                    )));
                }
            }
            previous = Some(value);
        }
    }
    Ok(())
}

/// Smallest power of ten (up to 10^6) that turns every utility into an
/// integer; 10^6 with rounding otherwise.
fn utility_scale(utilities: &[Vec<f64>]) -> i64 {
    const MAX_DIGITS: u32 = 6;
    for digits in 0..=MAX_DIGITS {
        let s = 10f64.powi(digits as i32);
        let exact = utilities.iter().flatten().all(|&u| {
            let x = u * s;
            (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0)
        });
        if exact {
            return 10i64.pow(digits);
        }
    }
    10i64.pow(MAX_DIGITS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(groups: &[&[usize]]) -> Vec<Vec<usize>> {
        groups.iter().map(|c| c.to_vec()).collect()
    }

    #[test]
    fn borda_weak_order_averages_positions() {
        let order = WeakOrder::new(classes(&[&[0], &[1, 2], &[3]]), 4).unwrap();
        let u = borda_utilities(&[order], 4);
        assert_eq!(u[0], vec![4.0, 2.5, 2.5, 1.0]);
        assert_eq!(u[0].iter().sum::<f64>(), 10.0);
    }

    #[test]
    fn borda_strict_nine_items() {
        let order = WeakOrder::strict(&(0..9).collect::<Vec<_>>()).unwrap();
        let u = borda_utilities(&[order], 9);
        assert_eq!(u[0], vec![9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn borda_single_item() {
        let order = WeakOrder::new(vec![vec![0]], 1).unwrap();
        assert_eq!(borda_utilities(&[order], 1), vec![vec![1.0]]);
    }

    #[test]
    fn minimal_instance() {
        let inst = build_instance(
            vec![vec![vec![0]]],
            Some(vec![vec![5.0]]),
            vec![Capacity::exactly(1)],
            vec![Capacity::exactly(1)],
        )
        .unwrap();
        assert_eq!((inst.n(), inst.m()), (1, 1));
        assert_eq!(inst.utility(0, 0), 5.0);
    }

    #[test]
    fn item_lower_bound_above_agent_count_is_infeasible() {
        let err = build_instance(
            vec![vec![vec![0]], vec![vec![0]]],
            None,
            vec![Capacity::new(0, 1); 2],
            vec![Capacity::exactly(3)],
        )
        .unwrap_err();
        assert_eq!(err, ModelError::InfeasibleCapacities);
    }

    #[test]
    fn capacity_totals_that_cannot_meet_are_infeasible() {
        // agents demand at least 2 items each, but only 3 assignments exist
        let err = build_instance(
            vec![classes(&[&[0], &[1], &[2]]); 2],
            None,
            vec![Capacity::new(2, 3); 2],
            vec![Capacity::new(0, 1); 3],
        )
        .unwrap_err();
        assert_eq!(err, ModelError::InfeasibleCapacities);
    }

    #[test]
    fn rejects_utilities_against_order() {
        let err = build_instance(
            vec![classes(&[&[0], &[1]])],
            Some(vec![vec![1.0, 2.0]]),
            vec![Capacity::new(0, 2)],
            vec![Capacity::new(0, 1); 2],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ModelError::InconsistentUtilities { agent: 0, .. }
        ));

        let err = build_instance(
            vec![classes(&[&[0, 1]])],
            Some(vec![vec![2.0, 1.0]]),
            vec![Capacity::new(0, 2)],
            vec![Capacity::new(0, 1); 2],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InconsistentUtilities { .. }));
    }

    #[test]
    fn rejects_non_partition() {
        for bad in [
            classes(&[&[0]]),
            classes(&[&[0, 1], &[1]]),
            classes(&[&[0], &[], &[1]]),
        ] {
            let err = build_instance(
                vec![bad],
                None,
                vec![Capacity::new(0, 2)],
                vec![Capacity::new(0, 1); 2],
            )
            .unwrap_err();
            assert!(matches!(err, ModelError::MalformedProfile(_)), "{err:?}");
        }
    }

    #[test]
    fn scale_is_exact_for_short_decimals() {
        assert_eq!(utility_scale(&[vec![3.0, -2.0]]), 1);
        assert_eq!(utility_scale(&[vec![2.5, 0.25]]), 100);
        assert_eq!(utility_scale(&[vec![1.0 / 3.0]]), 1_000_000);
    }
}
