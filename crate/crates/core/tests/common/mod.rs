//! Random instance generators and exhaustive oracles shared by the
//! integration tests.

#![allow(dead_code)]

use crr_core::model::{build_instance, rank_vector, Allocation, Capacity, Instance, RankVector};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random weak order over `0..m` as classes; ties appear with probability
/// `tie` between neighbours.
pub fn weak_order<R: Rng>(rng: &mut R, m: usize, tie: f64) -> Vec<Vec<usize>> {
    let mut items: Vec<usize> = (0..m).collect();
    items.shuffle(rng);
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for o in items {
        match classes.last_mut() {
            Some(last) if rng.gen_bool(tie) => last.push(o),
            _ => classes.push(vec![o]),
        }
    }
    classes
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sign {
    Positive,
    Negative,
}

/// Integer utilities consistent with `classes`: equal within a class,
/// strictly decreasing across classes, all `>= 0` or all `<= 0`.
pub fn consistent_utilities<R: Rng>(
    rng: &mut R,
    classes: &[Vec<usize>],
    m: usize,
    sign: Sign,
) -> Vec<f64> {
    let mut values = vec![0.0; classes.len()];
    match sign {
        Sign::Positive => {
            let mut v = rng.gen_range(0..3) as f64;
            for k in (0..classes.len()).rev() {
                values[k] = v;
                v += rng.gen_range(1..5) as f64;
            }
        }
        Sign::Negative => {
            let mut v = -(rng.gen_range(0..3) as f64);
            for value in values.iter_mut() {
                *value = v;
                v -= rng.gen_range(1..5) as f64;
            }
        }
    }
    let mut utils = vec![0.0; m];
    for (k, class) in classes.iter().enumerate() {
        for &o in class {
            utils[o] = values[k];
        }
    }
    utils
}

/// Keeps drawing until `build_instance` accepts the caps.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_m: usize,
    tie: f64,
    sign: Sign,
) -> Instance {
    loop {
        let n = rng.gen_range(1..=max_n);
        let m = rng.gen_range(1..=max_m);
        let profile: Vec<Vec<Vec<usize>>> = (0..n).map(|_| weak_order(rng, m, tie)).collect();
        let utils = profile
            .iter()
            .map(|classes| consistent_utilities(rng, classes, m, sign))
            .collect();
        let agent_caps = (0..n)
            .map(|_| {
                let lo = rng.gen_range(0..=2.min(m));
                Capacity::new(lo, rng.gen_range(lo..=m))
            })
            .collect();
        let item_caps = (0..m)
            .map(|_| {
                let lo = rng.gen_range(0..=1);
                Capacity::new(lo, rng.gen_range(lo.max(1)..=n.min(2)))
            })
            .collect();
        if let Ok(inst) = build_instance(profile, Some(utils), agent_caps, item_caps) {
            return inst;
        }
    }
}

/// Single-copy items that must all be allocated, and agent caps admitting
/// every balanced allocation.
pub fn balanced_instance(
    n: usize,
    m: usize,
    copies: usize,
    profile: Vec<Vec<Vec<usize>>>,
    utilities: Option<Vec<Vec<f64>>>,
) -> Instance {
    let total = copies * m;
    let cap = Capacity::new(total / n, total.div_ceil(n));
    build_instance(
        profile,
        utilities,
        vec![cap; n],
        vec![Capacity::exactly(copies); m],
    )
    .expect("balanced caps are feasible")
}

/// Calls `visit` on every complete feasible allocation.
pub fn for_each_allocation(instance: &Instance, mut visit: impl FnMut(&Allocation)) {
    let mut p = Allocation::empty(instance.n());
    let mut sizes = vec![0usize; instance.n()];
    descend(instance, 0, &mut p, &mut sizes, &mut visit);
}

fn descend(
    instance: &Instance,
    item: usize,
    p: &mut Allocation,
    sizes: &mut Vec<usize>,
    visit: &mut impl FnMut(&Allocation),
) {
    let n = instance.n();
    if item == instance.m() {
        if (0..n).all(|i| instance.agent_cap(i).contains(sizes[i])) {
            visit(p);
        }
        return;
    }
    let cap = instance.item_cap(item);
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if !cap.contains(k) {
            continue;
        }
        let agents: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if agents.iter().any(|&i| sizes[i] >= instance.agent_cap(i).hi) {
            continue;
        }
        for &i in &agents {
            p.assign(i, item);
            sizes[i] += 1;
        }
        descend(instance, item + 1, p, sizes, visit);
        for &i in &agents {
            p.unassign(i, item);
            sizes[i] -= 1;
        }
    }
}

pub fn scaled_welfare(instance: &Instance, p: &Allocation) -> i64 {
    (0..instance.n())
        .map(|i| instance.bundle_scaled(i, p.bundle(i).iter().copied()))
        .sum()
}

pub fn welfare(instance: &Instance, p: &Allocation) -> f64 {
    (0..instance.n())
        .map(|i| instance.bundle_utility(i, p.bundle(i).iter().copied()))
        .sum()
}

pub fn brute_max_scaled(instance: &Instance) -> Option<i64> {
    let mut best = None;
    for_each_allocation(instance, |p| {
        let w = scaled_welfare(instance, p);
        best = Some(best.map_or(w, |b: i64| b.max(w)));
    });
    best
}

pub fn brute_max_rank(instance: &Instance) -> Option<RankVector> {
    let mut best: Option<RankVector> = None;
    for_each_allocation(instance, |p| {
        let r = rank_vector(instance, p);
        if best.as_ref().is_none_or(|b| r > *b) {
            best = Some(r);
        }
    });
    best
}

/// Does some injection of `b` into `a` map every item to one ranked at
/// least as high (`better_or_equal(x, y)`)? Exhaustive search.
pub fn injection_exists(
    a: &[usize],
    b: &[usize],
    better_or_equal: &dyn Fn(usize, usize) -> bool,
) -> bool {
    fn go(
        a: &[usize],
        b: &[usize],
        used: &mut [bool],
        k: usize,
        ge: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if k == b.len() {
            return true;
        }
        for idx in 0..a.len() {
            if !used[idx] && ge(a[idx], b[k]) {
                used[idx] = true;
                let ok = go(a, b, used, k + 1, ge);
                used[idx] = false;
                if ok {
                    return true;
                }
            }
        }
        false
    }
    a.len() >= b.len() && go(a, b, &mut vec![false; a.len()], 0, better_or_equal)
}
