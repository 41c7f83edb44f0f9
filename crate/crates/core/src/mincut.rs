//! Minimum s-t cuts by highest-label push-relabel, and the contraction
//! engine used to shrink support graphs before SEC/CC separation.
//!
//! Shrinking rules, with `ȳ(v) = x(δ(v)) / 2` for (super)nodes:
//!
//! * C1: contract `{u, v}` when `x_uv = ȳ_u = ȳ_v`.
//! * C2: contract `{u, v, w}` when `x_uv + x_vw = 2ȳ_v` and `ȳ_u = ȳ_v = ȳ_w`.
//! * S1: contract `{u, v}` when `x_uv = ȳ_u = ȳ_v = 1`.
//! * S3: contract the sink of each solved cut into the depot supernode.

use std::collections::{BTreeMap, VecDeque};

use crate::instance::VertexSet;
use crate::num::Scalar;
use crate::point::FracPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct MinCut<T> {
    pub value: T,
    /// Membership of the source side (contains `s`, excludes `t`).
    pub source_side: Vec<bool>,
}

struct Arc<T> {
    to: usize,
    cap: T,
    rev: usize,
}

/// Maximum flow / minimum cut between `s` and `t` in an undirected graph.
///
/// The returned source side is the largest minimum cut side: every vertex
/// that cannot reach `t` in the final residual graph.
pub fn min_cut_st<T: Scalar>(n: usize, edges: &[(usize, usize, T)], s: usize, t: usize) -> MinCut<T> {
    assert!(s != t && s < n && t < n, "need distinct terminals in range");
    let tol = T::tolerance();
    let mut g: Vec<Vec<Arc<T>>> = (0..n).map(|_| Vec::new()).collect();
    for &(u, v, c) in edges {
        if u == v || c <= tol {
            continue;
        }
        let ru = g[v].len();
        let rv = g[u].len();
        g[u].push(Arc { to: v, cap: c, rev: ru });
        g[v].push(Arc { to: u, cap: c, rev: rv });
    }

    // exact distance labels towards t
    let mut height = vec![n; n];
    height[t] = 0;
    let mut queue = VecDeque::from([t]);
    while let Some(w) = queue.pop_front() {
        for a in &g[w] {
            if height[a.to] == n && a.to != t && a.to != s {
                height[a.to] = height[w] + 1;
                queue.push_back(a.to);
            }
        }
    }
    height[s] = n;

    let mut excess = vec![T::zero(); n];
    let mut count = vec![0usize; n + 1];
    for v in 0..n {
        if height[v] < n {
            count[height[v]] += 1;
        }
    }
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_bucket = vec![false; n];
    let mut top = 0usize;

    for i in 0..g[s].len() {
        let (to, cap, rev) = (g[s][i].to, g[s][i].cap, g[s][i].rev);
        if cap > tol {
            g[s][i].cap = T::zero();
            g[to][rev].cap += cap;
            excess[to] += cap;
            if to != t && height[to] < n && !in_bucket[to] {
                in_bucket[to] = true;
                buckets[height[to]].push(to);
                top = top.max(height[to]);
            }
        }
    }

    let mut current = vec![0usize; n];
    loop {
        while top > 0 && buckets[top].is_empty() {
            top -= 1;
        }
        let Some(v) = buckets[top].pop() else { break };
        in_bucket[v] = false;
        if height[v] >= n || excess[v] <= tol {
            continue;
        }
        // discharge
        while excess[v] > tol && height[v] < n {
            if current[v] == g[v].len() {
                // relabel
                let old = height[v];
                let mut new_h = 2 * n;
                for a in &g[v] {
                    if a.cap > tol {
                        new_h = new_h.min(height[a.to] + 1);
                    }
                }
                count[old] -= 1;
                if count[old] == 0 {
                    // gap: everything above `old` is cut off from t
                    for u in 0..n {
                        if height[u] > old && height[u] < n {
                            count[height[u]] -= 1;
                            height[u] = n;
                        }
                    }
                    height[v] = n;
                    break;
                }
                height[v] = new_h.min(n);
                if height[v] < n {
                    count[height[v]] += 1;
                }
                current[v] = 0;
                continue;
            }
            let i = current[v];
            let (to, cap, rev) = (g[v][i].to, g[v][i].cap, g[v][i].rev);
            if cap > tol && height[v] == height[to] + 1 {
                let delta = if excess[v] < cap { excess[v] } else { cap };
                g[v][i].cap -= delta;
                g[to][rev].cap += delta;
                excess[v] -= delta;
                excess[to] += delta;
                if to != s && to != t && !in_bucket[to] && height[to] < n {
                    in_bucket[to] = true;
                    buckets[height[to]].push(to);
                }
            } else {
                current[v] += 1;
            }
        }
        if excess[v] > tol && height[v] < n && !in_bucket[v] {
            in_bucket[v] = true;
            buckets[height[v]].push(v);
            top = top.max(height[v]);
        }
        top = top.max(height[v].min(n - 1));
    }

    // vertices that still reach t in the residual graph form the sink side
    let mut reach_t = vec![false; n];
    reach_t[t] = true;
    let mut queue = VecDeque::from([t]);
    while let Some(w) = queue.pop_front() {
        for a in &g[w] {
            let u = a.to;
            if !reach_t[u] && g[u][a.rev].cap > tol {
                reach_t[u] = true;
                queue.push_back(u);
            }
        }
    }
    let source_side: Vec<bool> = reach_t.iter().map(|r| !r).collect();
    let value = edges
        .iter()
        .filter(|&&(u, v, _)| u != v && source_side[u] != source_side[v])
        .fold(T::zero(), |acc, &(_, _, c)| acc + c);
    MinCut { value, source_side }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ShrinkStrategy {
    None,
    C1C2,
    S1,
    C1C2S3,
    S1S3,
}

impl ShrinkStrategy {
    pub fn c1c2(self) -> bool {
        matches!(self, ShrinkStrategy::C1C2 | ShrinkStrategy::C1C2S3)
    }

    pub fn s1(self) -> bool {
        matches!(self, ShrinkStrategy::S1 | ShrinkStrategy::S1S3)
    }

    pub fn s3(self) -> bool {
        matches!(self, ShrinkStrategy::C1C2S3 | ShrinkStrategy::S1S3)
    }
}

/// Contracted support graph with the map back to original vertices.
#[derive(Debug, Clone)]
pub struct ShrunkGraph<T> {
    members: Vec<Vec<usize>>,
    alive: Vec<bool>,
    adj: Vec<BTreeMap<usize, T>>,
    /// Largest original `y` inside each supernode, with its vertex.
    ymax: Vec<(T, usize)>,
    score: Vec<i64>,
    /// Original vertex -> supernode.
    owner: Vec<usize>,
    depot_node: usize,
}

impl<T: Scalar> ShrunkGraph<T> {
    /// Support graph of `p`: vertices with `y > 0` (and the depot), edges with `x > 0`.
    pub fn from_point(p: &FracPoint<T>, scores: &[i64], depot: usize) -> Self {
        let n = p.n;
        let keep: Vec<bool> = (0..n).map(|v| v == depot || p.y[v] > T::tolerance() || !p.neighbors(v).is_empty()).collect();
        let mut adj = vec![BTreeMap::new(); n];
        for &(e, x) in p.support() {
            if keep[e.u] && keep[e.v] {
                *adj[e.u].entry(e.v).or_insert(T::zero()) += x;
                *adj[e.v].entry(e.u).or_insert(T::zero()) += x;
            }
        }
        ShrunkGraph {
            members: (0..n).map(|v| if keep[v] { vec![v] } else { Vec::new() }).collect(),
            alive: keep,
            adj,
            ymax: (0..n).map(|v| (p.y[v], v)).collect(),
            score: scores.to_vec(),
            owner: (0..n).collect(),
            depot_node: depot,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alive.len()).filter(|&v| self.alive[v])
    }

    pub fn num_nodes(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn capacity(&self) -> usize {
        self.alive.len()
    }

    pub fn is_alive(&self, v: usize) -> bool {
        self.alive[v]
    }

    pub fn depot_node(&self) -> usize {
        self.depot_node
    }

    pub fn owner(&self, v: usize) -> usize {
        self.owner[v]
    }

    pub fn members(&self, v: usize) -> &[usize] {
        &self.members[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.adj[v].iter().map(|(&w, &c)| (w, c))
    }

    /// `x̄(δ(v̄))`.
    pub fn star(&self, v: usize) -> T {
        self.adj[v].values().fold(T::zero(), |a, &c| a + c)
    }

    pub fn ybar(&self, v: usize) -> T {
        self.star(v) / T::two()
    }

    pub fn ymax(&self, v: usize) -> (T, usize) {
        self.ymax[v]
    }

    pub fn score(&self, v: usize) -> i64 {
        self.score[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for u in self.nodes() {
            for (&v, &c) in &self.adj[u] {
                if u < v {
                    out.push((u, v, c));
                }
            }
        }
        out
    }

    /// `x̄(δ(S̄))` for a mask over supernode ids.
    pub fn cut_value(&self, mask: &[bool]) -> T {
        let mut s = T::zero();
        for u in self.nodes() {
            if mask[u] {
                for (&v, &c) in &self.adj[u] {
                    if !mask[v] {
                        s += c;
                    }
                }
            }
        }
        s
    }

    /// Original vertices behind a set of supernodes.
    pub fn unshrink(&self, nodes: impl IntoIterator<Item = usize>) -> VertexSet {
        nodes.into_iter().flat_map(|v| self.members[v].iter().copied()).collect()
    }

    /// Merge `b` into `a`; parallel capacities are summed and the internal
    /// edge disappears. Returns the surviving id.
    pub fn contract_pair(&mut self, a: usize, b: usize) -> usize {
        assert!(a != b && self.alive[a] && self.alive[b], "contract needs two live nodes");
        // keep the depot id stable
        let (a, b) = if b == self.depot_node { (b, a) } else { (a, b) };
        let b_adj = std::mem::take(&mut self.adj[b]);
        for (w, c) in b_adj {
            self.adj[w].remove(&b);
            if w == a {
                continue;
            }
            *self.adj[a].entry(w).or_insert(T::zero()) += c;
            *self.adj[w].entry(a).or_insert(T::zero()) += c;
        }
        self.adj[a].remove(&b);
        let moved = std::mem::take(&mut self.members[b]);
        for &v in &moved {
            self.owner[v] = a;
        }
        self.members[a].extend(moved);
        self.members[a].sort_unstable();
        if self.ymax[b].0 > self.ymax[a].0 {
            self.ymax[a] = self.ymax[b];
        }
        self.score[a] += self.score[b];
        self.alive[b] = false;
        a
    }

    /// Apply the C1/C2/S1 rules of `strategy` until none fires.
    pub fn shrink(&mut self, strategy: ShrinkStrategy, eps: T) {
        if !(strategy.c1c2() || strategy.s1()) {
            return;
        }
        let eq = |a: T, b: T| (a - b).abs() <= eps;
        loop {
            let mut changed = false;
            let nodes: Vec<usize> = self.nodes().collect();
            for u in nodes {
                if !self.alive[u] {
                    continue;
                }
                let yu = self.ybar(u);
                let mut target = None;
                for (&v, &x) in &self.adj[u] {
                    let yv = self.ybar(v);
                    if strategy.s1() && eq(x, T::one()) && eq(yu, T::one()) && eq(yv, T::one()) {
                        target = Some(vec![v]);
                        break;
                    }
                    if strategy.c1c2() && eq(x, yu) && eq(yu, yv) {
                        target = Some(vec![v]);
                        break;
                    }
                }
                if target.is_none() && strategy.c1c2() && self.adj[u].len() == 2 {
                    // u is the middle vertex of C2
                    let nb: Vec<usize> = self.adj[u].keys().copied().collect();
                    if eq(self.ybar(nb[0]), yu) && eq(self.ybar(nb[1]), yu) {
                        target = Some(nb);
                    }
                }
                if let Some(others) = target {
                    let mut keep = u;
                    for v in others {
                        if self.alive[v] && v != keep {
                            keep = self.contract_pair(keep, v);
                        }
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
}
