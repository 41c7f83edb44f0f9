//! Separation heuristics and exact routines for every cut family.
//!
//! Each separator is a pure function of a [`SeparationContext`] and returns
//! cuts that pass their structural checks and are violated by more than
//! `add_min_viol`.

use std::collections::HashSet;

use crate::config::Config;
use crate::cutpool::{path_w, Cut};
use crate::instance::{Edge, Instance, VertexSet};
use crate::mincut::{min_cut_st, ShrunkGraph};
use crate::point::FracPoint;

/// Tolerance used when comparing LP values for equality.
const EQ_TOL: f64 = 1e-6;

pub struct SeparationContext<'a> {
    pub inst: &'a Instance,
    pub point: &'a FracPoint<f64>,
    pub lb: i64,
    pub ub: i64,
    pub cfg: &'a Config,
    support: VertexSet,
}

impl<'a> SeparationContext<'a> {
    pub fn new(inst: &'a Instance, point: &'a FracPoint<f64>, lb: i64, ub: i64, cfg: &'a Config) -> Self {
        let support = (0..inst.n())
            .filter(|&v| v == inst.depot() || point.y[v] > cfg.zero || !point.neighbors(v).is_empty())
            .collect();
        SeparationContext { inst, point, lb, ub, cfg, support }
    }

    /// Vertices of the support graph.
    pub fn support(&self) -> &VertexSet {
        &self.support
    }

    /// Keep a cut only if it is well formed and violated.
    pub fn accept(&self, cut: Cut) -> Option<Cut> {
        if cut.check(self.inst).is_err() || cut.check_bounds(self.inst, self.lb, self.ub).is_err() {
            return None;
        }
        (cut.violation(self.point) > self.cfg.add_min_viol).then_some(cut)
    }

    fn argmax_y(&self, it: impl Iterator<Item = usize>) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in it {
            match best {
                Some(b) if self.point.y[v] <= self.point.y[b] => {}
                _ => best = Some(v),
            }
        }
        best
    }

    /// SEC on `h` with `l`, `r` the largest `y` inside and outside.
    pub fn best_sec(&self, h: &VertexSet) -> Option<Cut> {
        let l = self.argmax_y(h.iter())?;
        let r = self.argmax_y((0..self.inst.n()).filter(|&v| !h.contains(v)))?;
        self.accept(Cut::Sec { h: h.clone(), l, r })
    }

    /// Up to `add_sec_per_set` violated SECs on `h`, best pairs first.
    pub fn secs_for_set(&self, h: &VertexSet) -> Vec<Cut> {
        let y = &self.point.y;
        let mut inside: Vec<usize> = h.iter().filter(|&v| y[v] > self.cfg.zero).collect();
        let mut outside: Vec<usize> =
            self.support.iter().filter(|&v| !h.contains(v) && y[v] > self.cfg.zero).collect();
        inside.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
        outside.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
        let cut_value = self.point.cut_value(h);
        let mut pairs = Vec::new();
        for &l in &inside {
            for &r in &outside {
                let viol = 2.0 * y[l] + 2.0 * y[r] - 2.0 - cut_value;
                if viol <= self.cfg.add_min_viol {
                    break;
                }
                pairs.push((viol, l, r));
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        pairs
            .into_iter()
            .take(self.cfg.add_sec_per_set)
            .filter_map(|(_, l, r)| self.accept(Cut::Sec { h: h.clone(), l, r }))
            .collect()
    }

    /// Depot side of `h` within the support graph.
    fn depot_side(&self, h: &VertexSet) -> VertexSet {
        if h.contains(self.inst.depot()) {
            h.clone()
        } else {
            self.support.difference(h)
        }
    }

    /// CC on the depot side of `h` if its score allows, otherwise the best SEC.
    fn cc_then_sec(&self, h: &VertexSet) -> Option<Cut> {
        let t = self.depot_side(h);
        if self.inst.set_score(t.iter()) <= self.lb {
            if let Some(c) = self.accept(Cut::Cc { t }) {
                return Some(c);
            }
        }
        self.best_sec(h)
    }
}

fn push_unique(out: &mut Vec<Cut>, seen: &mut HashSet<Cut>, n: usize, cut: Cut) {
    let key = cut.clone().canonical(n);
    if seen.insert(key) {
        out.push(cut);
    }
}

/// Components of the support graph: CC on the depot component when its
/// score is at most LB, SECs on the others.
pub fn sep_connected_components(ctx: &SeparationContext) -> Vec<Cut> {
    let comps = ctx.point.components();
    let comps: Vec<VertexSet> = comps.into_iter().filter(|c| c.iter().any(|v| ctx.support.contains(v))).collect();
    let depot = ctx.inst.depot();
    let mut out = Vec::new();
    if comps.len() < 2 {
        return out;
    }
    for c in &comps {
        if c.contains(depot) {
            if ctx.inst.set_score(c.iter()) <= ctx.lb {
                if let Some(cut) = ctx.accept(Cut::Cc { t: c.clone() }) {
                    out.push(cut);
                    continue;
                }
            }
            out.extend(ctx.secs_for_set(c));
        } else {
            out.extend(ctx.secs_for_set(c));
        }
    }
    out
}

/// Logical constraints `y_v >= x_e` over the support edges.
pub fn sep_logical(ctx: &SeparationContext) -> Vec<Cut> {
    let mut out = Vec::new();
    for &(e, x) in ctx.point.support() {
        for v in [e.u, e.v] {
            if x - ctx.point.y[v] > ctx.cfg.add_min_viol {
                out.extend(ctx.accept(Cut::Logical { v, e }));
            }
        }
    }
    out
}

/// Extended Hong approach: `(1, v)` and `(v, 1)` minimum cuts on the
/// shrunk support graph, with S3 contraction and the extra CC strategies.
pub fn sep_sec_cc_hong(ctx: &SeparationContext) -> Vec<Cut> {
    let strategy = ctx.cfg.shrink;
    let mut g = ShrunkGraph::from_point(ctx.point, ctx.inst.scores(), ctx.inst.depot());
    g.shrink(strategy, EQ_TOL);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let n = ctx.inst.n();
    let cap = g.capacity();
    let limit = 2.0 - ctx.cfg.add_min_viol;

    if ctx.cfg.cc_strats {
        depot_node_cc(ctx, &g, &mut out, &mut seen);
    }
    let order: Vec<usize> = g.nodes().filter(|&v| v != g.depot_node()).collect();
    for v in order {
        if !g.is_alive(v) || v == g.depot_node() {
            continue;
        }
        let d = g.depot_node();
        let edges = g.edges();
        for (s, t) in [(d, v), (v, d)] {
            let cut = min_cut_st(cap, &edges, s, t);
            if cut.value >= limit {
                continue;
            }
            // depot side and other side, over live supernodes
            let depot_mask: Vec<bool> =
                (0..cap).map(|u| g.is_alive(u) && (cut.source_side[u] == (s == d))).collect();
            let other: Vec<usize> = g.nodes().filter(|&u| !depot_mask[u]).collect();
            let depot_nodes: Vec<usize> = g.nodes().filter(|&u| depot_mask[u]).collect();
            let h = g.unshrink(other.iter().copied());
            if let Some(c) = ctx.best_sec(&h) {
                push_unique(&mut out, &mut seen, n, c);
            }
            let t_set = g.unshrink(depot_nodes.iter().copied());
            if ctx.inst.set_score(t_set.iter()) <= ctx.lb {
                if let Some(c) = ctx.accept(Cut::Cc { t: t_set }) {
                    push_unique(&mut out, &mut seen, n, c);
                }
            } else if ctx.cfg.cc_strats {
                for c in cc_extra_strategies(ctx, &g, &depot_nodes, cut.value) {
                    push_unique(&mut out, &mut seen, n, c);
                }
            }
        }
        if strategy.s3() && g.is_alive(v) {
            g.contract_pair(d, v);
            g.shrink(strategy, EQ_TOL);
            if ctx.cfg.cc_strats {
                depot_node_cc(ctx, &g, &mut out, &mut seen);
            }
        }
    }
    out
}

/// Strategy i: the depot supernode itself as a CC.
fn depot_node_cc(ctx: &SeparationContext, g: &ShrunkGraph<f64>, out: &mut Vec<Cut>, seen: &mut HashSet<Cut>) {
    let d = g.depot_node();
    let members = g.members(d);
    if members.len() > 2 && g.star(d) < 2.0 && g.score(d) <= ctx.lb {
        if let Some(c) = ctx.accept(Cut::Cc { t: members.iter().copied().collect() }) {
            push_unique(out, seen, ctx.inst.n(), c);
        }
    }
}

/// Strategies ii and iii: drop supernodes from a depot side `s_bar` whose
/// cut value is below two while `x(δ(S)) + x(δ(Q))` stays below two.
/// The star value `x̄(δ(v̄))` bounds the cut increase of removing `v̄`.
pub fn cc_extra_strategies(ctx: &SeparationContext, g: &ShrunkGraph<f64>, s_bar: &[usize], cut_value: f64) -> Vec<Cut> {
    let d = g.depot_node();
    let total: i64 = s_bar.iter().map(|&v| g.score(v)).sum();
    let mut out = Vec::new();
    let rest: Vec<usize> = s_bar.iter().copied().filter(|&v| v != d).collect();
    // ii
    for &v in &rest {
        if cut_value + g.star(v) < 2.0 && total - g.score(v) <= ctx.lb {
            let t = g.unshrink(s_bar.iter().copied().filter(|&u| u != v));
            out.extend(ctx.accept(Cut::Cc { t }));
        }
    }
    // iii
    let mut sorted = rest.clone();
    sorted.sort_by(|&a, &b| g.ybar(a).total_cmp(&g.ybar(b)).then(a.cmp(&b)));
    let mut acc = cut_value;
    let mut k = 0;
    while k < sorted.len() && acc + g.star(sorted[k]) < 2.0 {
        acc += g.star(sorted[k]);
        k += 1;
    }
    if k >= 2 {
        let removed: i64 = sorted[..k].iter().map(|&v| g.score(v)).sum();
        if total - removed <= ctx.lb {
            let drop: HashSet<usize> = sorted[..k].iter().copied().collect();
            let t = g.unshrink(s_bar.iter().copied().filter(|u| !drop.contains(u)));
            out.extend(ctx.accept(Cut::Cc { t }));
        }
    }
    out
}

/// Distinct positive `y` values, largest first.
pub fn levels(p: &FracPoint<f64>, zero: f64) -> Vec<f64> {
    let mut ys: Vec<f64> = p.y.iter().copied().filter(|&y| y > zero).collect();
    ys.sort_by(|a, b| b.total_cmp(a));
    let mut out: Vec<f64> = Vec::new();
    for y in ys {
        if out.last().is_none_or(|&l| l - y > EQ_TOL) {
            out.push(y);
        }
    }
    out
}

/// Components of the graph formed by `edges`, as sorted sets.
fn edge_components(n: usize, edges: impl Iterator<Item = Edge>) -> Vec<VertexSet> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut touched = vec![false; n];
    for e in edges {
        touched[e.u] = true;
        touched[e.v] = true;
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in 0..n {
        if touched[v] {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
    }
    groups.into_values().map(|g| g.into_iter().collect()).collect()
}

/// Handle candidates of the level heuristic at `lambda`.
pub fn eph_handles(p: &FracPoint<f64>, lambda: f64) -> Vec<VertexSet> {
    let comps = edge_components(p.n, p.support().iter().filter(|&&(_, x)| x < lambda - EQ_TOL).map(|&(e, _)| e));
    comps.into_iter().filter(|c| c.iter().any(|v| (p.y[v] - lambda).abs() <= EQ_TOL)).collect()
}

/// Handle candidates of the banded variant at `lambda`.
pub fn egh_handles(p: &FracPoint<f64>, lambda: f64, eps: f64) -> Vec<VertexSet> {
    let band = |x: f64| x < lambda - EQ_TOL && x >= eps - EQ_TOL && x <= (1.0 - eps) * lambda + EQ_TOL;
    let comps = edge_components(p.n, p.support().iter().filter(|&&(_, x)| band(x)).map(|&(e, _)| e));
    comps.into_iter().filter(|c| c.iter().any(|v| (p.y[v] - lambda).abs() <= EQ_TOL)).collect()
}

/// Resolve overlapping teeth: two teeth sharing `v ∉ H` are dropped and `v`
/// joins the handle; teeth sharing a handle vertex keep the larger one.
pub fn repair_teeth(p: &FracPoint<f64>, mut h: VertexSet, mut teeth: Vec<Edge>) -> (VertexSet, Vec<Edge>) {
    loop {
        teeth.retain(|&t| h.crosses(t));
        let mut outside_hit: Option<(usize, usize, usize)> = None;
        'scan: for i in 0..teeth.len() {
            for j in (i + 1)..teeth.len() {
                let (a, b) = (teeth[i], teeth[j]);
                for v in [a.u, a.v] {
                    if b.touches(v) && !h.contains(v) {
                        outside_hit = Some((i, j, v));
                        break 'scan;
                    }
                }
            }
        }
        match outside_hit {
            Some((i, j, v)) => {
                teeth.remove(j);
                teeth.remove(i);
                h.insert(v);
            }
            None => break,
        }
    }
    // inside overlaps: keep the heavier tooth
    teeth.sort_by(|a, b| p.x(*b).total_cmp(&p.x(*a)).then(a.cmp(b)));
    let mut used = VertexSet::new();
    let mut kept = Vec::new();
    for t in teeth {
        if !used.contains(t.u) && !used.contains(t.v) {
            used.insert(t.u);
            used.insert(t.v);
            kept.push(t);
        }
    }
    kept.sort();
    (h, kept)
}

fn crossing(p: &FracPoint<f64>, h: &VertexSet) -> Vec<(Edge, f64)> {
    p.support().iter().copied().filter(|&(e, _)| h.crosses(e)).collect()
}

/// Emit the blossom, or the CC/SEC of a single-tooth handle.
fn handle_to_cuts(ctx: &SeparationContext, h: VertexSet, teeth: Vec<Edge>) -> Option<Cut> {
    let (h, teeth) = repair_teeth(ctx.point, h, teeth);
    match teeth.len() {
        1 => ctx.cc_then_sec(&h),
        t if t >= 3 && t % 2 == 1 => ctx.accept(Cut::Blossom { h, teeth }),
        _ => None,
    }
}

/// Level-wise odd-component blossom heuristic.
pub fn sep_blossom_eph(ctx: &SeparationContext) -> Vec<Cut> {
    let p = ctx.point;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for lambda in levels(p, ctx.cfg.zero) {
        for h in eph_handles(p, lambda) {
            let teeth: Vec<Edge> =
                crossing(p, &h).into_iter().filter(|&(_, x)| x >= lambda - EQ_TOL).map(|(e, _)| e).collect();
            if let Some(c) = handle_to_cuts(ctx, h, teeth) {
                push_unique(&mut out, &mut seen, ctx.inst.n(), c);
            }
        }
    }
    out
}

/// Level-wise banded blossom heuristic with parameter `eps`.
pub fn sep_blossom_egh(ctx: &SeparationContext, eps: f64) -> Vec<Cut> {
    assert!(eps > 0.0 && eps < 1.0, "band parameter must lie in (0, 1)");
    let p = ctx.point;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for lambda in levels(p, ctx.cfg.zero) {
        for h in egh_handles(p, lambda, eps) {
            let cross = crossing(p, &h);
            let mut teeth: Vec<(Edge, f64)> =
                cross.iter().copied().filter(|&(_, x)| x > (1.0 - eps) * lambda + EQ_TOL).collect();
            teeth.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            if teeth.len() % 2 == 0 {
                let extra = cross
                    .iter()
                    .copied()
                    .filter(|&(_, x)| x < eps - EQ_TOL)
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
                if let Some(e) = extra {
                    teeth.push(e);
                }
            }
            let teeth = teeth.into_iter().map(|(e, _)| e).collect();
            if let Some(c) = handle_to_cuts(ctx, h, teeth) {
                push_unique(&mut out, &mut seen, ctx.inst.n(), c);
            }
        }
    }
    out
}

/// Kruskal-guided handle candidates: every component formed while adding
/// support edges by decreasing value, with teeth of value at least one half.
pub fn sep_blossom_fst(ctx: &SeparationContext) -> Vec<Cut> {
    let p = ctx.point;
    let n = p.n;
    let mut edges: Vec<(Edge, f64)> = p.support().to_vec();
    edges.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut comp: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (e, _) in edges {
        let (a, b) = (comp[e.u], comp[e.v]);
        if a == b {
            continue;
        }
        let moved = std::mem::take(&mut members[b]);
        for &v in &moved {
            comp[v] = a;
        }
        members[a].extend(moved);
        if members[a].len() < 3 || members[a].len() + 2 > n {
            continue;
        }
        let h: VertexSet = members[a].iter().copied().collect();
        let teeth: Vec<Edge> = crossing(p, &h).into_iter().filter(|&(_, x)| x >= 0.5 - EQ_TOL).map(|(e, _)| e).collect();
        if let Some(c) = handle_to_cuts(ctx, h, teeth) {
            push_unique(&mut out, &mut seen, n, c);
        }
    }
    out
}

/// Greedy cover of support edges by decreasing value until the budget is
/// exceeded, then made minimal.
pub fn sep_edge_cover(ctx: &SeparationContext) -> Vec<Cut> {
    let inst = ctx.inst;
    let mut edges: Vec<(Edge, f64)> = ctx.point.support().to_vec();
    edges.sort_by(|a, b| {
        b.1.total_cmp(&a.1).then(inst.edge_length(b.0).cmp(&inst.edge_length(a.0))).then(a.0.cmp(&b.0))
    });
    let mut f = Vec::new();
    let mut len = 0i64;
    for (e, _) in &edges {
        f.push(*e);
        len += inst.edge_length(*e);
        if len > inst.budget() {
            break;
        }
    }
    if len <= inst.budget() {
        return Vec::new();
    }
    // drop low-value edges while the rest still exceeds the budget
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| ctx.point.x(f[a]).total_cmp(&ctx.point.x(f[b])).then(b.cmp(&a)));
    let mut keep = vec![true; f.len()];
    for i in order {
        let d = inst.edge_length(f[i]);
        if len - d > inst.budget() {
            keep[i] = false;
            len -= d;
        }
    }
    let f: Vec<Edge> = f.into_iter().zip(keep).filter(|&(_, k)| k).map(|(e, _)| e).collect();
    debug_assert!(f.len() <= inst.n() || ctx.point.degree_residual() > 1e-6, "violated cover longer than |V|");
    ctx.accept(Cut::EdgeCover { f }).into_iter().collect()
}

/// Support components that are simple cycles longer than the budget.
pub fn sep_cycle_cover(ctx: &SeparationContext) -> Vec<Cut> {
    let p = ctx.point;
    let mut out = Vec::new();
    for comp in p.components() {
        if comp.len() < 3 || comp.iter().any(|v| p.neighbors(v).len() != 2) {
            continue;
        }
        let f: Vec<Edge> = p.support().iter().filter(|(e, _)| comp.contains(e.u)).map(|&(e, _)| e).collect();
        let len: i64 = f.iter().map(|&e| ctx.inst.edge_length(e)).sum();
        if len > ctx.inst.budget() {
            out.extend(ctx.accept(Cut::CycleCover { f }));
        }
    }
    out
}

/// Greedy vertex cover by decreasing `y` (ties by larger score) until the
/// score exceeds UB, then made minimal.
pub fn sep_vertex_cover(ctx: &SeparationContext) -> Vec<Cut> {
    let inst = ctx.inst;
    let y = &ctx.point.y;
    let mut order: Vec<usize> = (0..inst.n()).filter(|&v| inst.score(v) > 0).collect();
    order.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(inst.score(b).cmp(&inst.score(a))).then(a.cmp(&b)));
    let mut q = Vec::new();
    let mut score = 0i64;
    for v in order {
        q.push(v);
        score += inst.score(v);
        if score > ctx.ub {
            break;
        }
    }
    if score <= ctx.ub {
        return Vec::new();
    }
    let mut by_y = q.clone();
    by_y.sort_by(|&a, &b| y[a].total_cmp(&y[b]).then(b.cmp(&a)));
    let mut drop = HashSet::new();
    for v in by_y {
        if score - inst.score(v) > ctx.ub {
            score -= inst.score(v);
            drop.insert(v);
        }
    }
    let q: VertexSet = q.into_iter().filter(|v| !drop.contains(v)).collect();
    ctx.accept(Cut::VertexCover { q }).into_iter().collect()
}

/// Maximal paths of heavy edges avoiding the depot, in both orientations.
pub fn sep_path(ctx: &SeparationContext) -> Vec<Cut> {
    let p = ctx.point;
    let n = p.n;
    let depot = ctx.inst.depot();
    let xmin = ctx.cfg.path_xmin;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(e, x) in p.support() {
        if x >= xmin && !e.touches(depot) {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
    }
    let mut visited = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if visited[start] || adj[start].len() != 1 {
            continue;
        }
        // walk from an endpoint
        let mut seq = vec![start];
        visited[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = adj[cur].iter().copied().find(|&w| w != prev && !visited[w]);
            match next {
                Some(w) if adj[w].len() <= 2 => {
                    visited[w] = true;
                    seq.push(w);
                    prev = cur;
                    cur = w;
                }
                _ => break,
            }
        }
        if seq.len() < 2 {
            continue;
        }
        for s in [seq.clone(), seq.iter().rev().copied().collect::<Vec<_>>()] {
            let w = path_w(ctx.inst, &s);
            if let Some(c) = ctx.accept(Cut::Path { p: s, w }) {
                out.push(c);
            }
            if out.len() >= ctx.cfg.add_path_max {
                return out;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Metric;

    /// Degree-feasible point on 16 vertices with levels 1, 1/2 and 1/4
    /// (labels 1-based in comments, 0-based in code).
    pub(crate) fn level_point() -> FracPoint<f64> {
        let e = |a: usize, b: usize, x: f64| (Edge::new(a - 1, b - 1), x);
        let edges = vec![
            e(1, 2, 0.5),
            e(1, 3, 0.5),
            e(2, 3, 0.5),
            e(1, 4, 1.0),
            e(4, 5, 1.0),
            e(5, 6, 0.5),
            e(5, 7, 0.5),
            e(6, 7, 0.5),
            e(6, 8, 1.0),
            e(7, 9, 1.0),
            e(8, 10, 1.0),
            e(9, 11, 1.0),
            e(10, 11, 0.75),
            e(10, 12, 0.25),
            e(11, 12, 0.25),
            e(12, 13, 0.5),
            e(13, 14, 0.5),
            e(14, 15, 0.25),
            e(14, 16, 0.25),
            e(15, 16, 0.25),
        ];
        let mut y = vec![1.0; 16];
        for v in [2, 3, 12, 13, 14] {
            y[v - 1] = 0.5;
        }
        for v in [15, 16] {
            y[v - 1] = 0.25;
        }
        FracPoint::new(16, y, edges, 1e-9)
    }

    fn grid_instance(n: usize, budget: i64) -> Instance {
        let coords = (0..n).map(|i| ((i % 4) as f64 * 10.0, (i / 4) as f64 * 10.0)).collect();
        let mut scores = vec![1; n];
        scores[0] = 0;
        Instance::from_coords("grid", Metric::Euc2d, coords, scores, budget).unwrap()
    }

    fn set(v: &[usize]) -> VertexSet {
        v.iter().map(|x| x - 1).collect()
    }

    #[test]
    fn level_point_is_degree_feasible() {
        assert!(level_point().degree_residual() < 1e-12);
        assert_eq!(levels(&level_point(), 1e-7), vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn eph_handle_candidates_match_levels() {
        let p = level_point();
        assert_eq!(eph_handles(&p, 1.0), vec![set(&[1, 2, 3]), set(&[5, 6, 7]), set(&[10, 11, 12, 13, 14, 15, 16])]);
        assert_eq!(eph_handles(&p, 0.5), vec![set(&[10, 11, 12]), set(&[14, 15, 16])]);
        assert!(eph_handles(&p, 0.25).is_empty());
    }

    #[test]
    fn eph_finds_documented_cuts() {
        let p = level_point();
        let inst = grid_instance(16, 1000);
        let cfg = Config::default();
        let ctx = SeparationContext::new(&inst, &p, 1, 100, &cfg);
        let cuts = sep_blossom_eph(&ctx);
        let blossom = Cut::Blossom {
            h: set(&[10, 11, 12]),
            teeth: vec![Edge::new(7, 9), Edge::new(8, 10), Edge::new(11, 12)],
        };
        assert!(cuts.contains(&blossom), "{cuts:?}");
        assert!(cuts.iter().any(|c| matches!(c, Cut::Blossom { h, .. } if *h == set(&[5, 6, 7]))));
        assert!(cuts.contains(&Cut::Sec { h: set(&[1, 2, 3]), l: 0, r: 3 }));
        assert!(cuts.contains(&Cut::Sec { h: set(&[14, 15, 16]), l: 13, r: 0 }));
        // the level-1 handle with two teeth yields nothing
        assert!(!cuts.iter().any(|c| matches!(c, Cut::Blossom { h, .. } if h.len() == 7)));
    }

    #[test]
    fn single_tooth_handle_with_depot_prefers_cc() {
        let p = level_point();
        let inst = grid_instance(16, 1000);
        let cfg = Config::default();
        // scores of {1,2,3} sum to 2
        let ctx = SeparationContext::new(&inst, &p, 2, 100, &cfg);
        let cuts = sep_blossom_eph(&ctx);
        assert!(cuts.contains(&Cut::Cc { t: set(&[1, 2, 3]) }));
    }

    #[test]
    fn integral_tour_has_no_cuts() {
        let inst = grid_instance(8, 1000);
        let tour = [0, 1, 2, 3, 7, 6, 5, 4];
        let edges: Vec<(Edge, f64)> = (0..8).map(|i| (Edge::new(tour[i], tour[(i + 1) % 8]), 1.0)).collect();
        let p = FracPoint::new(8, vec![1.0; 8], edges, 1e-9);
        let cfg = Config::default();
        let ctx = SeparationContext::new(&inst, &p, 7, 7, &cfg);
        assert!(sep_connected_components(&ctx).is_empty());
        assert!(sep_sec_cc_hong(&ctx).is_empty());
        assert!(sep_blossom_eph(&ctx).is_empty());
        assert!(sep_blossom_egh(&ctx, 0.3).is_empty());
        assert!(sep_edge_cover(&ctx).is_empty());
        assert!(sep_cycle_cover(&ctx).is_empty());
        assert!(sep_path(&ctx).is_empty());
        assert!(sep_logical(&ctx).is_empty());
    }

    fn two_triangles() -> FracPoint<f64> {
        let e = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)];
        FracPoint::new(8, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0], e.iter().map(|&(a, b)| (Edge::new(a, b), 1.0)), 1e-9)
    }

    #[test]
    fn components_emit_cc_when_depot_side_is_cheap() {
        let inst = grid_instance(8, 1000);
        let p = two_triangles();
        let cfg = Config::default();
        let ctx = SeparationContext::new(&inst, &p, 2, 100, &cfg);
        let cuts = sep_connected_components(&ctx);
        assert!(cuts.contains(&Cut::Cc { t: set(&[1, 2, 3]) }));
        // SECs on the other triangle are still produced
        assert!(cuts.iter().any(|c| matches!(c, Cut::Sec { h, .. } if *h == set(&[4, 5, 6]))));
    }

    #[test]
    fn components_emit_secs_when_depot_side_is_rich() {
        let inst = grid_instance(8, 1000);
        let p = two_triangles();
        let cfg = Config::default();
        let ctx = SeparationContext::new(&inst, &p, 1, 100, &cfg);
        let cuts = sep_connected_components(&ctx);
        assert!(!cuts.iter().any(|c| matches!(c, Cut::Cc { .. })));
        assert!(!cuts.is_empty());
        for c in &cuts {
            assert!(c.violation(&p) > 1e-6);
        }
    }

    #[test]
    fn hong_finds_sec_and_cc_on_triangles() {
        let inst = grid_instance(8, 1000);
        let p = two_triangles();
        let cfg = Config::default();
        let ctx = SeparationContext::new(&inst, &p, 2, 100, &cfg);
        let cuts = sep_sec_cc_hong(&ctx);
        assert!(cuts.iter().any(|c| matches!(c, Cut::Sec { .. })));
        assert!(cuts.contains(&Cut::Cc { t: set(&[1, 2, 3]) }));
    }

    #[test]
    fn logical_cut_amount() {
        let inst = grid_instance(4, 1000);
        let p = FracPoint::new(4, vec![1.0, 0.5, 0.0, 0.0], [(Edge::new(0, 1), 0.8)], 1e-9);
        let cfg = Config::default();
        let ctx = SeparationContext::new(&inst, &p, 0, 100, &cfg);
        let cuts = sep_logical(&ctx);
        assert_eq!(cuts, vec![Cut::Logical { v: 1, e: Edge::new(0, 1) }]);
        assert!((cuts[0].violation(&p) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn edge_cover_on_long_half_cycle() {
        // half-integral 8-cycle of length 80 with budget 50: x(F) can exceed |F|-1 only with heavy edges
        let inst = grid_instance(8, 35);
        let tour = [0, 1, 2, 3, 7, 6, 5, 4];
        let edges: Vec<(Edge, f64)> = (0..8).map(|i| (Edge::new(tour[i], tour[(i + 1) % 8]), 1.0)).collect();
        let p = FracPoint::new(8, vec![1.0; 8], edges, 1e-9);
        let cfg = Config::default();
        let ctx = SeparationContext::new(&inst, &p, 0, 100, &cfg);
        let cuts = sep_edge_cover(&ctx);
        assert_eq!(cuts.len(), 1);
        let Cut::EdgeCover { f } = &cuts[0] else { panic!() };
        let total: i64 = f.iter().map(|&e| inst.edge_length(e)).sum();
        assert!(total > 35);
        for &e in f {
            assert!(total - inst.edge_length(e) <= 35);
        }
        let cc = sep_cycle_cover(&ctx);
        assert_eq!(cc.len(), 1);
    }

    #[test]
    fn vertex_cover_respects_ub() {
        let inst = grid_instance(8, 1000);
        let p = FracPoint::new(8, vec![1.0; 8], std::iter::empty(), 1e-9);
        let cfg = Config::default();
        let ctx = SeparationContext::new(&inst, &p, 0, 3, &cfg);
        let cuts = sep_vertex_cover(&ctx);
        assert_eq!(cuts.len(), 1);
        let Cut::VertexCover { q } = &cuts[0] else { panic!() };
        assert_eq!(q.len(), 4);
    }

    #[test]
    fn path_w_matches_definition() {
        let inst = grid_instance(12, 60);
        let p = vec![5, 6, 7];
        let w = path_w(&inst, &p);
        for v in 0..12 {
            let inside = !p.contains(&v)
                && inst.distance(0, 5) + inst.distance(5, 6) + inst.distance(6, 7) + inst.distance(7, v) + inst.distance(v, 0)
                    <= 60;
            assert_eq!(w.contains(v), inside, "vertex {v}");
        }
    }
}
