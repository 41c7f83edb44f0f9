//! Reduced costs of edge variables outside the working LP, column
//! generation and Lagrangian upper bounds.

use std::collections::HashMap;

use crate::cutpool::{Cut, CutPool, Sense};
use crate::instance::{edge_count, Edge, Instance, VertexSet};
use crate::lp::{LpBackend, LpError, LpModel};

/// Domain of the edge variables used in a Lagrangian bound.
#[derive(Debug, Clone, Default)]
pub struct EdgeDomains {
    /// Edges fixed to zero.
    pub zero: Vec<Edge>,
    /// Edges fixed to one.
    pub one: Vec<Edge>,
}

/// Work counters of the pricing routine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct PricingStats {
    pub rounds: u64,
    /// Edges whose quick bound was evaluated.
    pub scanned: u64,
    /// Edges that needed the exact reduced cost.
    pub exact: u64,
    pub added: u64,
}

/// Row duals of one solve, projected onto their sign constraints and
/// arranged for reduced-cost evaluation.
///
/// The reduced cost of an edge `e = {u, w}` is
/// `-d_e π_0 - π_u - π_w + Σ_S π_S [e ∈ δ(S)] + ρ_e`, where `π_S >= 0`
/// accumulates the duals of star-family cuts over their subsets and `ρ_e`
/// collects the other families.
#[derive(Debug, Clone)]
pub struct DualSnapshot {
    budget: f64,
    degree: Vec<f64>,
    subsets: Vec<(VertexSet, f64)>,
    by_vertex: Vec<Vec<usize>>,
    star_sum: Vec<f64>,
    explicit: HashMap<Edge, f64>,
    /// `Σ_i dual_i b_i` over all rows.
    rhs_term: f64,
    /// Reduced costs of the vertex columns.
    y_rc: Vec<f64>,
}

fn project(sense: Sense, d: f64) -> f64 {
    match sense {
        Sense::Le => d.max(0.0),
        Sense::Ge => d.min(0.0),
    }
}

/// Edges with a nonzero coefficient in a cut outside the star families.
fn explicit_edges(cut: &Cut) -> Vec<Edge> {
    match cut {
        Cut::EdgeCover { f } | Cut::CycleCover { f } => f.clone(),
        Cut::Path { p, w } => {
            let last = *p.last().unwrap();
            let mut out: Vec<Edge> = p.windows(2).map(|s| Edge::new(s[0], s[1])).collect();
            out.extend(w.iter().map(|v| Edge::new(last, v)));
            out
        }
        Cut::Logical { e, .. } => vec![*e],
        _ => Vec::new(),
    }
}

impl DualSnapshot {
    /// Build from the row duals of `model` (row order of the model).
    pub fn new<B: LpBackend>(inst: &Instance, model: &LpModel<B>, pool: &CutPool, row_duals: &[f64]) -> Self {
        let n = inst.n();
        let budget = project(Sense::Le, row_duals[0]);
        let degree = row_duals[1..=n].to_vec();
        let mut y_rc: Vec<f64> = (0..n).map(|v| inst.score(v) as f64 + 2.0 * degree[v]).collect();
        let mut rhs_term = budget * inst.budget() as f64;
        let mut subset_pi: HashMap<VertexSet, f64> = HashMap::new();
        let mut explicit: HashMap<Edge, f64> = HashMap::new();
        for (i, &cid) in model.active_cuts().iter().enumerate() {
            let cut = pool.cut(cid);
            let d = project(cut.sense(), row_duals[1 + n + i]);
            if d == 0.0 {
                continue;
            }
            rhs_term += d * cut.rhs() as f64;
            for (v, a) in cut.vertex_terms() {
                y_rc[v] -= a as f64 * d;
            }
            if cut.is_star_family() {
                for s in cut.subsets() {
                    *subset_pi.entry(s).or_insert(0.0) -= d;
                }
            } else {
                for e in explicit_edges(cut) {
                    *explicit.entry(e).or_insert(0.0) -= cut.edge_coef(e) as f64 * d;
                }
            }
        }
        let mut subsets: Vec<(VertexSet, f64)> = subset_pi.into_iter().filter(|&(_, pi)| pi > 0.0).collect();
        subsets.sort_by(|a, b| a.0.cmp(&b.0));
        let mut by_vertex = vec![Vec::new(); n];
        let mut star_sum = vec![0.0; n];
        for (i, (s, pi)) in subsets.iter().enumerate() {
            for v in s.iter() {
                by_vertex[v].push(i);
                star_sum[v] += pi;
            }
        }
        DualSnapshot { budget, degree, subsets, by_vertex, star_sum, explicit, rhs_term, y_rc }
    }

    fn base(&self, inst: &Instance, e: Edge) -> f64 {
        -(inst.edge_length(e) as f64) * self.budget - self.degree[e.u] - self.degree[e.v]
            + self.explicit.get(&e).copied().unwrap_or(0.0)
    }

    /// Upper bound on the reduced cost that treats every subset containing
    /// an endpoint as crossed.
    pub fn rc_upper_bound(&self, inst: &Instance, e: Edge) -> f64 {
        self.base(inst, e) + self.star_sum[e.u] + self.star_sum[e.v]
    }

    /// Exact reduced cost.
    pub fn rc_exact(&self, inst: &Instance, e: Edge) -> f64 {
        let (a, b) = if self.by_vertex[e.u].len() <= self.by_vertex[e.v].len() { (e.u, e.v) } else { (e.v, e.u) };
        let both: f64 = self.by_vertex[a]
            .iter()
            .filter(|&&i| self.subsets[i].0.contains(b))
            .map(|&i| self.subsets[i].1)
            .sum();
        self.rc_upper_bound(inst, e) - 2.0 * both
    }

    /// Reduced cost from the full dense row, without the subset shortcut.
    pub fn rc_dense<B: LpBackend>(inst: &Instance, model: &LpModel<B>, pool: &CutPool, row_duals: &[f64], e: Edge) -> f64 {
        let n = inst.n();
        let mut rc = -(inst.edge_length(e) as f64) * project(Sense::Le, row_duals[0]) - row_duals[1 + e.u] - row_duals[1 + e.v];
        for (i, &cid) in model.active_cuts().iter().enumerate() {
            let cut = pool.cut(cid);
            rc -= cut.edge_coef(e) as f64 * project(cut.sense(), row_duals[1 + n + i]);
        }
        rc
    }

    /// Lagrangian bound `Σ dual·b + Σ max(rc·lb, rc·ub)` over every vertex
    /// and every edge of the complete graph, using the given fixings.
    pub fn lagrangian_bound(&self, inst: &Instance, domains: &EdgeDomains) -> f64 {
        let n = inst.n();
        let mut total = self.rhs_term;
        for v in 0..n {
            let lb = if v == inst.depot() { 1.0 } else { 0.0 };
            total += if self.y_rc[v] > 0.0 { self.y_rc[v] } else { self.y_rc[v] * lb };
        }
        for v in 1..n {
            for u in 0..v {
                let rc = self.rc_exact(inst, Edge { u, v });
                if rc > 0.0 {
                    total += rc;
                }
            }
        }
        for &e in &domains.zero {
            let rc = self.rc_exact(inst, e);
            if rc > 0.0 {
                total -= rc;
            }
        }
        for &e in &domains.one {
            let rc = self.rc_exact(inst, e);
            if rc < 0.0 {
                total += rc;
            }
        }
        total
    }

}

/// Outcome of a pricing loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceOutcome {
    /// A full round over the excluded edges found no positive reduced cost
    /// (or, when recovering, the model became feasible).
    Certified,
    /// Phase one proved that no edge can restore feasibility.
    Infeasible,
}

/// Batched column generation over the edges of the complete graph.
///
/// Edges are scanned cyclically by id; a batch ends once `max_add` edges
/// with positive reduced cost are collected or every edge has been seen.
#[derive(Debug, Clone)]
pub struct Pricer {
    cursor: usize,
    pub max_add: usize,
    pub thresh: f64,
    pub stats: PricingStats,
}

impl Pricer {
    pub fn new(max_add: usize, thresh: f64) -> Self {
        Pricer { cursor: 0, max_add: max_add.max(1), thresh, stats: PricingStats::default() }
    }

    /// Next batch of improving edges; empty iff a whole round found none.
    pub fn next_batch<B: LpBackend>(
        &mut self,
        inst: &Instance,
        model: &LpModel<B>,
        snap: &DualSnapshot,
        excluded: &dyn Fn(Edge) -> bool,
    ) -> Vec<(Edge, f64)> {
        let m = edge_count(inst.n());
        let mut out = Vec::new();
        for _ in 0..m {
            let e = Edge::from_id(self.cursor);
            self.cursor = (self.cursor + 1) % m;
            if model.has_edge(e) || excluded(e) {
                continue;
            }
            self.stats.scanned += 1;
            if snap.rc_upper_bound(inst, e) <= self.thresh {
                continue;
            }
            self.stats.exact += 1;
            let rc = snap.rc_exact(inst, e);
            if rc > self.thresh {
                out.push((e, rc));
                if out.len() >= self.max_add {
                    break;
                }
            }
        }
        out
    }

    /// Add priced edges until a full round adds nothing. `solve`
    /// re-optimizes the model and returns its row duals.
    pub fn certify<B: LpBackend>(
        &mut self,
        inst: &Instance,
        model: &mut LpModel<B>,
        pool: &CutPool,
        excluded: &dyn Fn(Edge) -> bool,
        mut row_duals: Vec<f64>,
        solve: &mut dyn FnMut(&mut LpModel<B>) -> Result<Option<Vec<f64>>, LpError>,
    ) -> Result<PriceOutcome, LpError> {
        loop {
            self.stats.rounds += 1;
            let snap = DualSnapshot::new(inst, model, pool, &row_duals);
            let batch = self.next_batch(inst, model, &snap, excluded);
            if batch.is_empty() {
                return Ok(PriceOutcome::Certified);
            }
            let edges: Vec<Edge> = batch.iter().map(|&(e, _)| e).collect();
            self.stats.added += model.add_edges(inst, &edges, pool)? as u64;
            match solve(model)? {
                Some(d) => row_duals = d,
                None => return Ok(PriceOutcome::Infeasible),
            }
        }
    }

    /// Restore feasibility of an infeasible model with phase-one duals.
    pub fn recover<B: LpBackend>(
        &mut self,
        inst: &Instance,
        model: &mut LpModel<B>,
        pool: &CutPool,
        excluded: &dyn Fn(Edge) -> bool,
    ) -> Result<PriceOutcome, LpError> {
        loop {
            self.stats.rounds += 1;
            let (obj, duals) = model.phase_one(pool)?;
            if obj >= -1e-9 {
                return Ok(PriceOutcome::Certified);
            }
            // phase one has zero vertex costs; only the edge terms matter
            let snap = DualSnapshot::new(inst, model, pool, &duals);
            let batch = self.next_batch(inst, model, &snap, excluded);
            if batch.is_empty() {
                return Ok(PriceOutcome::Infeasible);
            }
            let edges: Vec<Edge> = batch.iter().map(|&(e, _)| e).collect();
            self.stats.added += model.add_edges(inst, &edges, pool)? as u64;
        }
    }
}
