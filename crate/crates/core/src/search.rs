//! The branch-and-cut driver: separation subloops, bounds, branching.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::{BranchHeuristic, Config};
use crate::cutpool::{Cut, CutPool, Registered};
use crate::heuristics::{ea4op, path_building, validate_seq, vertex_picking, Tour};
use crate::instance::{Edge, Instance};
use crate::lp::{LpError, LpModel, LpSolution};
use crate::point::FracPoint;
use crate::pricing::{DualSnapshot, EdgeDomains, PriceOutcome, Pricer, PricingStats};
use crate::separation::{
    sep_blossom_egh, sep_blossom_eph, sep_blossom_fst, sep_connected_components, sep_cycle_cover, sep_edge_cover,
    sep_logical, sep_path, sep_sec_cc_hong, sep_vertex_cover, SeparationContext,
};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Optimal,
    TimeLimit,
    Infeasible,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "OPTIMAL",
            Status::TimeLimit => "TIME_LIMIT",
            Status::Infeasible => "INFEASIBLE",
        }
    }
}

/// One point of the bound history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEvent {
    pub time_s: f64,
    pub lb: i64,
    pub ub: f64,
}

/// Consistency checks of pricing snapshots, collected on demand.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PricingAudit {
    pub snapshots: u64,
    /// Largest `rc_e - r̂c_e` over inactive edges (should be `<= 0`).
    pub max_bound_excess: f64,
    /// Largest gap between manual and backend reduced costs of active columns.
    pub max_backend_mismatch: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Stats {
    pub nodes: u64,
    pub max_depth: usize,
    pub lp_solves: u64,
    pub cuts_by_family: BTreeMap<String, u64>,
    pub rows_removed: u64,
    pub cols_removed: u64,
    pub pricing: PricingStats,
    /// Generated cuts violated by the reference solution, if one was given.
    pub sentinel_violations: u64,
    pub sentinel_checked: u64,
    pub pricing_audit: Option<PricingAudit>,
    pub bound_trace: Vec<BoundEvent>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub instance: String,
    pub n: usize,
    pub lb: i64,
    pub ub: i64,
    /// Fractional global bound before rounding.
    pub ub_value: f64,
    pub gap: f64,
    pub status: Status,
    /// 1-based vertex labels in visit order.
    pub tour: Vec<usize>,
    pub tour_length: i64,
    pub time_s: f64,
    pub stats: Stats,
}

impl Report {
    pub fn best_tour(&self, inst: &Instance) -> Option<Tour> {
        (!self.tour.is_empty()).then(|| Tour::new(inst, self.tour.iter().map(|v| v - 1).collect()))
    }
}

/// `(UB - LB) / LB` rounded to four decimals.
pub fn gap(lb: i64, ub: i64) -> f64 {
    if lb <= 0 {
        return if ub <= lb.max(0) { 0.0 } else { f64::INFINITY };
    }
    (((ub - lb) as f64 / lb as f64) * 1e4).round() / 1e4
}

fn floor_bound(v: f64) -> i64 {
    (v + 1e-6 * (1.0 + v.abs())).floor() as i64
}

#[derive(Debug, Clone, Default)]
struct Node {
    b0: Vec<Edge>,
    b1: Vec<Edge>,
    depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Prune,
    Infeasible,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sep {
    Components,
    Logical,
    Eph,
    Egh,
    Hong,
    Fst,
    CycleCover,
    EdgeCover,
    VertexCover,
    Path,
}

impl Sep {
    fn name(self) -> &'static str {
        match self {
            Sep::Components => "components",
            Sep::Logical => "logical",
            Sep::Eph => "eph",
            Sep::Egh => "egh",
            Sep::Hong => "sec_cc",
            Sep::Fst => "fst",
            Sep::CycleCover => "cycle_cover",
            Sep::EdgeCover => "edge_cover",
            Sep::VertexCover => "vertex_cover",
            Sep::Path => "path",
        }
    }
}

/// Branch-and-cut solver state.
pub struct Solver<'a> {
    inst: &'a Instance,
    cfg: Config,
    model: LpModel,
    pool: CutPool,
    pricer: Pricer,
    rng: ChaCha8Rng,
    sol: Option<LpSolution>,
    lb: i64,
    best: Option<Tour>,
    ubg: f64,
    node: Node,
    stats: Stats,
    start: Instant,
    trace: Option<Box<dyn Write + 'a>>,
    sentinel: Option<(Tour, FracPoint<f64>)>,
    audit: bool,
    lp_dump: Option<String>,
    middle: Vec<Sep>,
    outer: Vec<Sep>,
    middle_cursor: usize,
    outer_cursor: usize,
    inner_cursor: usize,
}

/// Solve `inst` with `cfg`.
pub fn solve(inst: &Instance, cfg: &Config) -> Result<Report, SolveError> {
    Solver::new(inst, cfg.clone())?.run()
}

impl<'a> Solver<'a> {
    pub fn new(inst: &'a Instance, cfg: Config) -> Result<Self, SolveError> {
        let model = LpModel::build_initial(inst, cfg.knn)?;
        let mut middle = Vec::new();
        if cfg.eph {
            middle.push(Sep::Eph);
        }
        if cfg.egh {
            middle.push(Sep::Egh);
        }
        if cfg.fst_blossom {
            middle.push(Sep::Fst);
        }
        middle.push(Sep::Hong);
        if cfg.cycle_cover {
            middle.push(Sep::CycleCover);
        }
        let mut outer = Vec::new();
        if cfg.edge_cover {
            outer.push(Sep::EdgeCover);
        }
        if cfg.vertex_cover {
            outer.push(Sep::VertexCover);
        }
        if cfg.path {
            outer.push(Sep::Path);
        }
        if cfg.sep_subloops <= 2 {
            middle.append(&mut outer);
        }
        Ok(Solver {
            inst,
            pool: CutPool::with_sec_cap(inst.n(), cfg.add_sec_per_set),
            pricer: Pricer::new(cfg.price_max_add, cfg.price_rc_thresh),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            model,
            sol: None,
            lb: -1,
            best: None,
            ubg: f64::INFINITY,
            node: Node::default(),
            stats: Stats::default(),
            start: Instant::now(),
            trace: None,
            sentinel: None,
            audit: false,
            lp_dump: None,
            middle,
            outer,
            middle_cursor: 0,
            outer_cursor: 0,
            inner_cursor: 0,
            cfg,
        })
    }

    /// Write JSON-lines events to `w`.
    pub fn with_trace(mut self, w: impl Write + 'a) -> Self {
        self.trace = Some(Box::new(w));
        self
    }

    /// Check every generated cut against a known optimal tour.
    pub fn with_sentinel(mut self, tour: Tour) -> Self {
        let p = FracPoint::new(
            self.inst.n(),
            (0..self.inst.n()).map(|v| if tour.seq().contains(&v) { 1.0 } else { 0.0 }).collect(),
            tour.edges().into_iter().map(|e| (e, 1.0)),
            0.0,
        );
        self.sentinel = Some((tour, p));
        self
    }

    /// Check reduced costs of every pricing snapshot.
    pub fn with_pricing_audit(mut self) -> Self {
        self.audit = true;
        self.stats.pricing_audit = Some(PricingAudit::default());
        self
    }

    /// Write the root LP in LP-file format to `path` once the root is done.
    pub fn with_lp_dump(mut self, path: impl Into<String>) -> Self {
        self.lp_dump = Some(path.into());
        self
    }

    /// Start from a known feasible tour.
    pub fn with_incumbent(mut self, tour: Tour) -> Self {
        self.offer(tour);
        self
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn timed_out(&self) -> bool {
        self.elapsed() >= self.cfg.time_limit_s
    }

    fn emit(&mut self, ev: serde_json::Value) {
        let t = self.elapsed();
        if let Some(w) = &mut self.trace {
            let mut ev = ev;
            ev["t"] = serde_json::json!(t);
            let _ = writeln!(w, "{ev}");
        }
    }

    fn ub_int(&self) -> i64 {
        if self.ubg.is_finite() {
            floor_bound(self.ubg).max(self.lb)
        } else {
            self.inst.total_score()
        }
    }

    fn record_bounds(&mut self) {
        let ev = BoundEvent { time_s: self.elapsed(), lb: self.lb, ub: self.ubg.min(self.inst.total_score() as f64) };
        if self.stats.bound_trace.last().is_none_or(|l| l.lb != ev.lb || l.ub != ev.ub) {
            self.stats.bound_trace.push(ev);
            self.emit(serde_json::json!({"event": "bounds", "lb": ev.lb, "ub": ev.ub}));
        }
    }

    /// Take `t` as incumbent if it is feasible and better.
    fn offer(&mut self, t: Tour) -> bool {
        if t.score() <= self.lb || !t.is_feasible(self.inst) {
            return false;
        }
        self.lb = t.score();
        self.best = Some(t);
        self.record_bounds();
        true
    }

    fn domains(&self) -> EdgeDomains {
        EdgeDomains { zero: self.node.b0.clone(), one: self.node.b1.clone() }
    }

    /// Solve, restoring feasibility by pricing if needed. `false` means the
    /// node LP is infeasible over all edges.
    fn resolve(&mut self) -> Result<bool, SolveError> {
        self.stats.lp_solves += 1;
        if let Some(s) = self.model.solve()? {
            self.sol = Some(s);
            return Ok(true);
        }
        let b0 = self.node.b0.clone();
        let out = self.pricer.recover(self.inst, &mut self.model, &self.pool, &|e| b0.contains(&e))?;
        self.stats.pricing = self.pricer.stats;
        if out == PriceOutcome::Infeasible {
            self.sol = None;
            return Ok(false);
        }
        self.stats.lp_solves += 1;
        match self.model.solve()? {
            Some(s) => {
                self.sol = Some(s);
                Ok(true)
            }
            None => Err(SolveError::Internal("phase one feasible but LP infeasible".into())),
        }
    }

    fn snapshot(&self) -> DualSnapshot {
        let sol = self.sol.as_ref().expect("solved");
        DualSnapshot::new(self.inst, &self.model, &self.pool, &sol.row_duals)
    }

    fn audit_snapshot(&mut self, snap: &DualSnapshot) {
        let Some(mut audit) = self.stats.pricing_audit else { return };
        let sol = self.sol.as_ref().expect("solved");
        let n = self.inst.n();
        audit.snapshots += 1;
        for v in 1..n {
            for u in 0..v {
                let e = Edge { u, v };
                if !self.model.has_edge(e) {
                    let excess = snap.rc_exact(self.inst, e) - snap.rc_upper_bound(self.inst, e);
                    audit.max_bound_excess = audit.max_bound_excess.max(excess);
                }
            }
        }
        for (i, &e) in sol.edges.iter().enumerate() {
            let manual = DualSnapshot::rc_dense(self.inst, &self.model, &self.pool, &sol.row_duals, e);
            let diff = (manual - sol.col_duals[n + i]).abs();
            audit.max_backend_mismatch = audit.max_backend_mismatch.max(diff);
        }
        self.stats.pricing_audit = Some(audit);
    }

    /// BoundCertify pricing. Returns whether edges were added.
    fn price(&mut self) -> Result<Flow, SolveError> {
        if self.audit {
            let snap = self.snapshot();
            self.audit_snapshot(&snap);
        }
        let before = self.pricer.stats.added;
        let b0 = self.node.b0.clone();
        let duals = self.sol.as_ref().expect("solved").row_duals.clone();
        let mut solves = 0u64;
        let mut last = None;
        let out = self.pricer.certify(self.inst, &mut self.model, &self.pool, &|e| b0.contains(&e), duals, &mut |m| {
            solves += 1;
            let s = m.solve()?;
            let d = s.as_ref().map(|s| s.row_duals.clone());
            last = s;
            Ok(d)
        })?;
        self.stats.lp_solves += solves;
        if let Some(s) = last {
            self.sol = Some(s);
        }
        self.stats.pricing = self.pricer.stats;
        if out == PriceOutcome::Infeasible {
            return Err(SolveError::Internal("adding columns made the LP infeasible".into()));
        }
        if self.pricer.stats.added > before {
            self.emit(serde_json::json!({"event": "price", "added": self.pricer.stats.added - before}));
        }
        Ok(Flow::Continue)
    }

    /// Add `cuts` (most violated first) as rows. Returns how many were added.
    fn add_cuts(&mut self, mut cuts: Vec<Cut>) -> Result<usize, SolveError> {
        let p = self.sol.as_ref().expect("solved").point();
        cuts.sort_by(|a, b| b.violation(&p).total_cmp(&a.violation(&p)));
        let mut ids = Vec::new();
        for cut in cuts {
            if ids.len() >= self.cfg.add_cut_batch {
                break;
            }
            let id = match self.pool.register(cut, self.lb) {
                Registered::New(id) => {
                    self.check_sentinel(id);
                    id
                }
                Registered::Existing(id) if !self.pool.entry(id).active => id,
                _ => continue,
            };
            if ids.contains(&id) {
                continue;
            }
            self.pool.activate(id);
            ids.push(id);
            let fam = self.pool.cut(id).family().name().to_string();
            *self.stats.cuts_by_family.entry(fam).or_insert(0) += 1;
        }
        self.model.add_cut_rows(&ids, &self.pool)?;
        Ok(ids.len())
    }

    fn check_sentinel(&mut self, id: usize) {
        let Some((tour, p)) = &self.sentinel else { return };
        let entry = self.pool.entry(id);
        if matches!(entry.cut, Cut::Cc { .. }) && tour.score() <= entry.lb_at_creation {
            return;
        }
        self.stats.sentinel_checked += 1;
        if entry.cut.violation(p) > 1e-9 {
            self.stats.sentinel_violations += 1;
            let fam = entry.cut.family().name();
            self.emit(serde_json::json!({"event": "sentinel", "family": fam}));
        }
    }

    /// Drop slack rows and long-zero columns after a solve.
    fn age(&mut self) -> Result<bool, SolveError> {
        let p = self.sol.as_ref().expect("solved").point();
        let active = self.model.active_cuts().to_vec();
        let expired = self.pool.age_rows(&active, &p, self.cfg.del_dust_cut, self.cfg.del_max_age_cut);
        let mut changed = false;
        if !expired.is_empty() {
            self.model.remove_cut_rows(&expired)?;
            for &id in &expired {
                self.pool.deactivate(id);
            }
            self.stats.rows_removed += expired.len() as u64;
            changed = true;
        }
        let mut aged = self.model.aged_edges(self.cfg.del_dust_var, self.cfg.del_max_age_var);
        aged.retain(|e| !self.node.b1.contains(e));
        if !aged.is_empty() {
            self.model.remove_edges(&aged)?;
            self.stats.cols_removed += aged.len() as u64;
            changed = true;
        }
        Ok(changed)
    }

    /// Prune test with the node Lagrangian bound.
    fn bound_prunes(&mut self) -> bool {
        if self.lb < 0 {
            return false;
        }
        let obj = self.sol.as_ref().expect("solved").objective;
        if floor_bound(obj) > self.lb {
            return false;
        }
        let snap = self.snapshot();
        floor_bound(snap.lagrangian_bound(self.inst, &self.domains())) <= self.lb
    }

    /// Incumbent tour from an integral LP point, if it is one.
    fn integral_tour(&self) -> Option<Tour> {
        let sol = self.sol.as_ref()?;
        if !sol.is_integral() {
            return None;
        }
        let n = self.inst.n();
        let mut adj = vec![Vec::new(); n];
        for (e, &x) in sol.edges.iter().zip(&sol.x) {
            if x > 0.5 {
                adj[e.u].push(e.v);
                adj[e.v].push(e.u);
            }
        }
        let depot = self.inst.depot();
        let mut seq = vec![depot];
        let mut prev = usize::MAX;
        let mut cur = depot;
        loop {
            let next = adj[cur].iter().copied().find(|&w| w != prev)?;
            if next == depot {
                break;
            }
            if seq.len() > n {
                return None;
            }
            seq.push(next);
            prev = cur;
            cur = next;
        }
        let used: usize = adj.iter().filter(|a| !a.is_empty()).count();
        if used != seq.len() {
            return None;
        }
        validate_seq(self.inst, &seq).ok()
    }

    /// Path building on the current point, then the incumbent CC.
    fn primal_step(&mut self) -> Result<usize, SolveError> {
        let p = self.sol.as_ref().expect("solved").point();
        if let Some(t) = path_building(self.inst, &p, self.cfg.xheur_greedy_xmin, self.cfg.pb_join, &mut self.rng) {
            self.offer(t);
        }
        if let Some(t) = self.integral_tour() {
            self.offer(t);
        }
        self.incumbent_cc()
    }

    fn incumbent_cc(&mut self) -> Result<usize, SolveError> {
        let Some(best) = &self.best else { return Ok(0) };
        let cut = Cut::Cc { t: best.vertex_set() };
        let p = self.sol.as_ref().expect("solved").point();
        if cut.check(self.inst).is_err() || cut.violation(&p) <= self.cfg.add_min_viol {
            return Ok(0);
        }
        self.add_cuts(vec![cut])
    }

    /// Node-start heuristic chosen by the configuration.
    fn node_heuristic(&mut self, root: bool) {
        let sol = self.sol.as_ref().expect("solved");
        let y = sol.y.clone();
        let p = sol.point();
        let pb = path_building(self.inst, &p, self.cfg.xheur_greedy_xmin, self.cfg.pb_join, &mut self.rng);
        if let Some(t) = pb.clone() {
            self.offer(t);
        }
        let heur = if root && self.cfg.branch_heur == BranchHeuristic::Pb { BranchHeuristic::VpEa4op } else { self.cfg.branch_heur };
        match heur {
            BranchHeuristic::Pb => {}
            BranchHeuristic::Vp => {
                for _ in 0..self.cfg.ea4op_pop_size {
                    if let Some(t) = vertex_picking(self.inst, &y, &mut self.rng) {
                        self.offer(t);
                    }
                }
            }
            BranchHeuristic::VpEa4op => {
                let mut seeds: Vec<Tour> = pb.into_iter().collect();
                seeds.extend(self.best.clone());
                if let Some(t) = ea4op(self.inst, &y, &self.cfg, &seeds, &mut self.rng) {
                    self.offer(t);
                }
            }
        }
    }

    fn run_sep(&mut self, s: Sep) -> Vec<Cut> {
        let sol = self.sol.as_ref().expect("solved");
        let p = sol.point();
        let ub = self.ub_int();
        let ctx = SeparationContext::new(self.inst, &p, self.lb, ub, &self.cfg);
        match s {
            Sep::Components => sep_connected_components(&ctx),
            Sep::Logical => sep_logical(&ctx),
            Sep::Eph => sep_blossom_eph(&ctx),
            Sep::Egh => sep_blossom_egh(&ctx, self.cfg.add_egh_epsilon),
            Sep::Hong => sep_sec_cc_hong(&ctx),
            Sep::Fst => sep_blossom_fst(&ctx),
            Sep::CycleCover => sep_cycle_cover(&ctx),
            Sep::EdgeCover => sep_edge_cover(&ctx),
            Sep::VertexCover => sep_vertex_cover(&ctx),
            Sep::Path => sep_path(&ctx),
        }
    }

    /// Re-solve after rows were added, then age. Stops on prune/infeasible.
    fn after_rows(&mut self) -> Result<Flow, SolveError> {
        if !self.resolve()? {
            return Ok(Flow::Infeasible);
        }
        if self.age()? && !self.resolve()? {
            return Ok(Flow::Infeasible);
        }
        if self.bound_prunes() {
            return Ok(Flow::Prune);
        }
        Ok(Flow::Continue)
    }

    /// Heuristic, incumbent CC and pricing after a successful separation.
    fn after_cut_round(&mut self) -> Result<Flow, SolveError> {
        if self.primal_step()? > 0 {
            let f = self.after_rows()?;
            if f != Flow::Continue {
                return Ok(f);
            }
        }
        self.price()?;
        Ok(if self.bound_prunes() { Flow::Prune } else { Flow::Continue })
    }

    fn inner_loop(&mut self) -> Result<Flow, SolveError> {
        let list = [Sep::Components, Sep::Logical];
        loop {
            if self.timed_out() {
                return Ok(Flow::TimeLimit);
            }
            let mut found = false;
            for _ in 0..list.len() {
                let s = list[self.inner_cursor];
                self.inner_cursor = (self.inner_cursor + 1) % list.len();
                let cuts = self.run_sep(s);
                let k = self.add_cuts(cuts)?;
                self.emit(serde_json::json!({"event": "sep", "loop": "inner", "name": s.name(), "cuts": k}));
                if k > 0 {
                    found = true;
                    let f = self.after_rows()?;
                    if f != Flow::Continue {
                        return Ok(f);
                    }
                    let obj = self.sol.as_ref().expect("solved").objective;
                    if floor_bound(obj) == self.lb {
                        self.price()?;
                    }
                    break;
                }
            }
            if found {
                continue;
            }
            let added_before = self.pricer.stats.added;
            let cc = self.primal_step()?;
            if cc > 0 {
                let f = self.after_rows()?;
                if f != Flow::Continue {
                    return Ok(f);
                }
            }
            self.price()?;
            if self.bound_prunes() {
                return Ok(Flow::Prune);
            }
            if cc == 0 && self.pricer.stats.added == added_before {
                return Ok(Flow::Continue);
            }
        }
    }

    /// A sequential subloop over `list`; `level` 1 is the middle loop.
    fn subloop(&mut self, level: u8) -> Result<Flow, SolveError> {
        let list = if level == 1 { self.middle.clone() } else { self.outer.clone() };
        let name = if level == 1 { "middle" } else { "outer" };
        let mut pass_start_obj = f64::NAN;
        let mut found_in_pass = false;
        let mut tried = 0;
        loop {
            let f = if level == 1 { self.inner_loop()? } else { self.subloop(1)? };
            if f != Flow::Continue {
                return Ok(f);
            }
            if list.is_empty() {
                return Ok(Flow::Continue);
            }
            if tried == 0 {
                pass_start_obj = self.sol.as_ref().expect("solved").objective;
                found_in_pass = false;
            }
            while tried < list.len() {
                if self.timed_out() {
                    return Ok(Flow::TimeLimit);
                }
                let cursor = if level == 1 { &mut self.middle_cursor } else { &mut self.outer_cursor };
                let s = list[*cursor % list.len()];
                *cursor = (*cursor + 1) % list.len();
                tried += 1;
                let cuts = self.run_sep(s);
                let k = self.add_cuts(cuts)?;
                self.emit(serde_json::json!({"event": "sep", "loop": name, "name": s.name(), "cuts": k}));
                if k > 0 {
                    found_in_pass = true;
                    let f = self.after_rows()?;
                    if f != Flow::Continue {
                        return Ok(f);
                    }
                    let f = self.after_cut_round()?;
                    if f != Flow::Continue {
                        return Ok(f);
                    }
                    break;
                }
            }
            if tried >= list.len() {
                // a full pass over the list
                tried = 0;
                if !found_in_pass {
                    return Ok(Flow::Continue);
                }
                let now = self.sol.as_ref().expect("solved").objective;
                let impr = (pass_start_obj - now) / pass_start_obj.abs().max(1.0);
                if impr < self.cfg.subloop_impr {
                    // tailing off: finish with one more round of the lower loops
                    let f = if level == 1 { self.inner_loop()? } else { self.subloop(1)? };
                    return Ok(f);
                }
            }
        }
    }

    fn separation_loop(&mut self) -> Result<Flow, SolveError> {
        if self.cfg.sep_subloops <= 2 {
            self.subloop(1)
        } else {
            self.subloop(2)
        }
    }

    /// Re-add pool cuts violated by the current point.
    fn rescreen_pool(&mut self) -> Result<usize, SolveError> {
        let p = self.sol.as_ref().expect("solved").point();
        let ub = self.ub_int();
        let cuts: Vec<Cut> = self
            .pool
            .inactive()
            .map(|id| self.pool.cut(id))
            .filter(|c| c.check_bounds(self.inst, self.lb, ub).is_ok() && c.violation(&p) > self.cfg.add_min_viol)
            .cloned()
            .collect();
        self.add_cuts(cuts)
    }

    /// Move LP column bounds from the current node to `node`.
    fn apply_node(&mut self, node: Node) -> Result<(), SolveError> {
        for e in self.node.b0.iter().chain(&self.node.b1) {
            if self.model.has_edge(*e) {
                self.model.set_edge_bounds(*e, 0.0, 1.0)?;
            }
        }
        let missing: Vec<Edge> = node.b1.iter().copied().filter(|e| !self.model.has_edge(*e)).collect();
        self.model.add_edges(self.inst, &missing, &self.pool)?;
        for &e in &node.b0 {
            if self.model.has_edge(e) {
                self.model.set_edge_bounds(e, 0.0, 0.0)?;
            }
        }
        for &e in &node.b1 {
            self.model.set_edge_bounds(e, 1.0, 1.0)?;
        }
        self.node = node;
        Ok(())
    }

    /// Fractional edge closest to one half, ties to the smaller id.
    fn branching_edge(&self) -> Option<Edge> {
        let sol = self.sol.as_ref()?;
        sol.edges
            .iter()
            .zip(&sol.x)
            .filter(|&(_, &x)| x > 1e-6 && x < 1.0 - 1e-6)
            .min_by(|a, b| (a.1 - 0.5).abs().total_cmp(&(b.1 - 0.5).abs()).then(a.0.id().cmp(&b.0.id())))
            .map(|(&e, _)| e)
    }

    fn update_ubg(&mut self) {
        if self.sol.is_none() {
            return;
        }
        let snap = self.snapshot();
        // rows conditioned on LB only bound tours better than LB
        let ub = snap.lagrangian_bound(self.inst, &EdgeDomains::default()).max(self.lb as f64);
        if ub < self.ubg {
            self.ubg = ub;
            self.record_bounds();
        }
    }

    /// Process one node: returns the branching edge if the node is open.
    fn process_node(&mut self, root: bool) -> Result<(Flow, Option<Edge>), SolveError> {
        if !self.resolve()? {
            return Ok((Flow::Infeasible, None));
        }
        if !root && self.rescreen_pool()? > 0 && !self.resolve()? {
            return Ok((Flow::Infeasible, None));
        }
        let stride = self.cfg.effective_vp_stride(self.inst.n());
        if root || self.node.depth % stride == 0 {
            self.node_heuristic(root);
            if self.incumbent_cc()? > 0 && !self.resolve()? {
                return Ok((Flow::Infeasible, None));
            }
        }
        loop {
            let f = self.separation_loop()?;
            match f {
                Flow::Continue => {}
                Flow::Prune | Flow::Infeasible | Flow::TimeLimit => return Ok((f, None)),
            }
            // certified node bound
            self.price()?;
            if self.timed_out() {
                return Ok((Flow::TimeLimit, None));
            }
            if let Some(t) = self.integral_tour() {
                self.offer(t);
            }
            let snap = self.snapshot();
            let ubn = snap.lagrangian_bound(self.inst, &self.domains());
            if root {
                self.update_ubg();
            }
            if self.lb >= floor_bound(ubn) {
                return Ok((Flow::Prune, None));
            }
            match self.branching_edge() {
                Some(e) => return Ok((Flow::Continue, Some(e))),
                None => {
                    // integral but not a tour: separation must progress
                    let p = self.sol.as_ref().expect("solved").point();
                    let ctx = SeparationContext::new(self.inst, &p, self.lb, self.ub_int(), &self.cfg);
                    let cuts = [sep_connected_components(&ctx), sep_logical(&ctx), sep_sec_cc_hong(&ctx)].concat();
                    if self.add_cuts(cuts)? == 0 {
                        return Err(SolveError::Internal("integral point without violated cut or branching edge".into()));
                    }
                    if !self.resolve()? {
                        return Ok((Flow::Infeasible, None));
                    }
                }
            }
        }
    }

    pub fn run(mut self) -> Result<Report, SolveError> {
        self.start = Instant::now();
        self.emit(serde_json::json!({"event": "start", "instance": self.inst.name(), "n": self.inst.n()}));
        let mut stack = vec![Node::default()];
        let mut status = Status::Optimal;
        let mut root = true;
        while let Some(node) = stack.pop() {
            if self.timed_out() {
                status = Status::TimeLimit;
                break;
            }
            self.stats.nodes += 1;
            self.stats.max_depth = self.stats.max_depth.max(node.depth);
            let depth = node.depth;
            self.apply_node(node)?;
            self.emit(serde_json::json!({"event": "node", "depth": depth, "lb": self.lb, "ubg": self.ubg}));
            let (flow, branch) = self.process_node(root)?;
            if root {
                if let Some(path) = self.lp_dump.take() {
                    self.model.write_model(&path)?;
                }
            }
            root = false;
            match flow {
                Flow::TimeLimit => {
                    self.update_ubg();
                    status = Status::TimeLimit;
                    break;
                }
                Flow::Prune => {
                    self.update_ubg();
                    self.emit(serde_json::json!({"event": "prune", "depth": depth}));
                }
                Flow::Infeasible => {
                    self.emit(serde_json::json!({"event": "infeasible", "depth": depth}));
                }
                Flow::Continue => {
                    let e = branch.expect("open node has a branching edge");
                    self.emit(serde_json::json!({"event": "branch", "edge": e.to_string(), "depth": depth}));
                    let mut zero = self.node.clone();
                    zero.b0.push(e);
                    zero.depth += 1;
                    let mut one = self.node.clone();
                    one.b1.push(e);
                    one.depth += 1;
                    stack.push(zero);
                    stack.push(one);
                }
            }
        }
        if status == Status::Optimal {
            if self.best.is_none() {
                status = Status::Infeasible;
            } else {
                self.ubg = self.lb as f64;
            }
        }
        let ub = match status {
            Status::Optimal => self.lb,
            Status::Infeasible => -1,
            Status::TimeLimit => self.ub_int(),
        };
        self.record_bounds();
        let time_s = self.elapsed();
        self.emit(serde_json::json!({"event": "end", "status": status.as_str(), "lb": self.lb, "ub": ub}));
        let tour = self.best.as_ref().map(|t| t.seq().iter().map(|v| v + 1).collect()).unwrap_or_default();
        let tour_length = self.best.as_ref().map_or(0, |t| t.length());
        let mut stats = std::mem::take(&mut self.stats);
        stats.pricing = self.pricer.stats;
        Ok(Report {
            instance: self.inst.name().to_string(),
            n: self.inst.n(),
            lb: self.lb,
            ub,
            ub_value: self.ubg,
            gap: gap(self.lb, ub),
            status,
            tour,
            tour_length,
            time_s,
            stats,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_rounding() {
        assert_eq!(gap(31, 31), 0.0);
        assert_eq!(gap(3, 4), 0.3333);
        assert_eq!(floor_bound(31.7), 31);
        assert_eq!(floor_bound(32.0), 32);
        assert_eq!(floor_bound(31.9999999999), 32);
    }
}
