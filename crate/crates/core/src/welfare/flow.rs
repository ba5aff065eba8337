//! Min-cost circulation with arc lower bounds.
//!
//! Lower bounds are removed by pre-routing `lo` units on each arc, and arcs
//! with negative cost are saturated up front. Both steps leave node
//! imbalances and a residual graph with no negative arc, which successive
//! shortest paths (Dijkstra with node potentials) then routes from a super
//! source to a super sink. Costs live in any totally ordered abelian group,
//! so the same code serves scalar welfare and lexicographic rank vectors.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Debug;

use crate::error::FlowError;

/// Arc cost: an element of a totally ordered abelian group.
pub trait FlowCost: Clone + Ord + Debug {
    fn zero() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn times(&self, k: i64) -> Self;

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }
}

impl FlowCost for i64 {
    fn zero() -> Self {
        0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn times(&self, k: i64) -> Self {
        self * k
    }
}

/// Integer vector compared lexicographically, with implicit trailing zeros.
#[derive(Debug, Clone, Default)]
pub struct LexCost(Vec<i64>);

impl LexCost {
    pub fn new(mut entries: Vec<i64>) -> Self {
        while entries.last() == Some(&0) {
            entries.pop();
        }
        LexCost(entries)
    }

    /// `value` at position `index`, zero elsewhere.
    pub fn unit(index: usize, value: i64) -> Self {
        let mut entries = vec![0; index + 1];
        entries[index] = value;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        let len = self.0.len().max(rhs.0.len());
        let at = |v: &[i64], j: usize| v.get(j).copied().unwrap_or(0);
        Self::new((0..len).map(|j| f(at(&self.0, j), at(&rhs.0, j))).collect())
    }
}

impl PartialEq for LexCost {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl Eq for LexCost {}

impl PartialOrd for LexCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LexCost {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.0.len().max(other.0.len());
        for j in 0..len {
            let a = self.0.get(j).copied().unwrap_or(0);
            let b = other.0.get(j).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => {}
                unequal => return unequal,
            }
        }
        Ordering::Equal
    }
}

impl FlowCost for LexCost {
    fn zero() -> Self {
        LexCost(Vec::new())
    }
    fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }
    fn neg(&self) -> Self {
        LexCost(self.0.iter().map(|v| -v).collect())
    }
    fn times(&self, k: i64) -> Self {
        Self::new(self.0.iter().map(|v| v * k).collect())
    }
}

#[derive(Debug, Clone)]
pub struct FlowArc<C> {
    pub from: usize,
    pub to: usize,
    pub lo: i64,
    pub hi: i64,
    pub cost: C,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork<C> {
    nodes: usize,
    arcs: Vec<FlowArc<C>>,
}

impl<C: FlowCost> FlowNetwork<C> {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            nodes,
            arcs: Vec::new(),
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, lo: i64, hi: i64, cost: C) -> usize {
        assert!(
            from < self.nodes && to < self.nodes,
            "arc endpoint out of range"
        );
        self.arcs.push(FlowArc {
            from,
            to,
            lo,
            hi,
            cost,
        });
        self.arcs.len() - 1
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> &[FlowArc<C>] {
        &self.arcs
    }
}

#[derive(Debug, Clone)]
pub struct Circulation<C> {
    /// Flow on each arc, in insertion order.
    pub flow: Vec<i64>,
    pub cost: C,
}

struct Edge<C> {
    to: usize,
    cap: i64,
    cost: C,
}

struct Residual<C> {
    edges: Vec<Edge<C>>,
    adj: Vec<Vec<usize>>,
}

impl<C: FlowCost> Residual<C> {
    fn new(nodes: usize) -> Self {
        Residual {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn link(&mut self, from: usize, to: usize, cap: i64, cost: C) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge {
            to,
            cap,
            cost: cost.clone(),
        });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: cost.neg(),
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn push(&mut self, edge: usize, amount: i64) {
        self.edges[edge].cap -= amount;
        self.edges[edge ^ 1].cap += amount;
    }
}

/// Minimum-cost feasible circulation respecting every arc's `[lo, hi]`.
/// Flows are integral.
pub fn solve_flow<C: FlowCost>(network: &FlowNetwork<C>) -> Result<Circulation<C>, FlowError> {
    let nodes = network.nodes;
    let source = nodes;
    let sink = nodes + 1;
    let mut residual = Residual::new(nodes + 2);
    let mut excess = vec![0i64; nodes];
    let mut forward = Vec::with_capacity(network.arcs.len());

    for (id, arc) in network.arcs.iter().enumerate() {
        if arc.lo > arc.hi || arc.lo < 0 {
            return Err(FlowError::BadArc { arc: id });
        }
        let e = residual.link(arc.from, arc.to, arc.hi - arc.lo, arc.cost.clone());
        forward.push(e);
        excess[arc.to] += arc.lo;
        excess[arc.from] -= arc.lo;
        if arc.cost < C::zero() && arc.hi > arc.lo {
            let rest = arc.hi - arc.lo;
            residual.push(e, rest);
            excess[arc.to] += rest;
            excess[arc.from] -= rest;
        }
    }

    let mut required = 0i64;
    for (v, &x) in excess.iter().enumerate() {
        match x.cmp(&0) {
            Ordering::Greater => {
                residual.link(source, v, x, C::zero());
                required += x;
            }
            Ordering::Less => {
                residual.link(v, sink, -x, C::zero());
            }
            Ordering::Equal => {}
        }
    }

    let routed = successive_shortest_paths(&mut residual, source, sink);
    if routed < required {
        return Err(FlowError::Infeasible);
    }

    let flow: Vec<i64> = network
        .arcs
        .iter()
        .zip(&forward)
        .map(|(arc, &e)| arc.lo + residual.edges[e ^ 1].cap)
        .collect();
    let cost = network
        .arcs
        .iter()
        .zip(&flow)
        .fold(C::zero(), |acc, (arc, &f)| acc.add(&arc.cost.times(f)));
    Ok(Circulation { flow, cost })
}

/// Routes as much flow as possible from `source` to `sink` along cheapest
/// paths. Requires every residual edge with capacity to have non-negative
/// cost on entry. Returns the amount routed.
fn successive_shortest_paths<C: FlowCost>(g: &mut Residual<C>, source: usize, sink: usize) -> i64 {
    let nodes = g.adj.len();
    let mut potential = vec![C::zero(); nodes];
    let mut routed = 0i64;
    loop {
        let mut dist: Vec<Option<C>> = vec![None; nodes];
        let mut parent = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(C::zero());
        heap.push(Reverse((C::zero(), source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &e in &g.adj[u] {
                let edge = &g.edges[e];
                if edge.cap <= 0 || done[edge.to] {
                    continue;
                }
                let reduced = edge.cost.add(&potential[u]).sub(&potential[edge.to]);
                let candidate = d.add(&reduced);
                let better = match &dist[edge.to] {
                    None => true,
                    Some(old) => candidate < *old,
                };
                if better {
                    dist[edge.to] = Some(candidate.clone());
                    parent[edge.to] = e;
                    heap.push(Reverse((candidate, edge.to)));
                }
            }
        }
        if dist[sink].is_none() {
            return routed;
        }
        for (v, d) in dist.iter().enumerate() {
            if let Some(d) = d {
                potential[v] = potential[v].add(d);
            }
        }
        let mut bottleneck = i64::MAX;
        let mut v = sink;
        while v != source {
            let e = parent[v];
            bottleneck = bottleneck.min(g.edges[e].cap);
            v = g.edges[e ^ 1].to;
        }
        let mut v = sink;
        while v != source {
            let e = parent[v];
            g.push(e, bottleneck);
            v = g.edges[e ^ 1].to;
        }
        routed += bottleneck;
    }
}
