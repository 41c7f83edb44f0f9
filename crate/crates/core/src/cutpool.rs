//! Cut families, their row rendering, and the pool that deduplicates cuts,
//! tracks row ages and keeps the subset registry used by pricing.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Edge, Instance, VertexSet};
use crate::num::Scalar;
use crate::point::FracPoint;

pub type CutId = usize;
pub type SubsetId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    Sec,
    Cc,
    Blossom,
    EdgeCover,
    CycleCover,
    VertexCover,
    Path,
    Logical,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Sec,
        Family::Cc,
        Family::Blossom,
        Family::EdgeCover,
        Family::CycleCover,
        Family::VertexCover,
        Family::Path,
        Family::Logical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Sec => "sec",
            Family::Cc => "cc",
            Family::Blossom => "blossom",
            Family::EdgeCover => "edge_cover",
            Family::CycleCover => "cycle_cover",
            Family::VertexCover => "vertex_cover",
            Family::Path => "path",
            Family::Logical => "logical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Ge,
    Le,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid {family:?} cut: {reason}")]
pub struct InvalidCut {
    pub family: Family,
    pub reason: String,
}

/// One inequality of the model or of a valid-inequality family.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Cut {
    /// `x(δ(H)) - 2y_l - 2y_r >= -2`.
    Sec { h: VertexSet, l: usize, r: usize },
    /// `x(δ(T)) >= 2` with the depot in `T`.
    Cc { t: VertexSet },
    /// Comb with single-edge teeth.
    Blossom { h: VertexSet, teeth: Vec<Edge> },
    /// `x(F) <= |F| - 1`.
    EdgeCover { f: Vec<Edge> },
    /// `x(F) <= y(V(F)) - 1` for a cycle `F`.
    CycleCover { f: Vec<Edge> },
    /// `y(Q) <= |Q| - 1`.
    VertexCover { q: VertexSet },
    /// `x(P) - y(V(P)) + y_first + y_last - Σ_{v∈W} x_{last,v} <= 0`, `p` in visiting order.
    Path { p: Vec<usize>, w: VertexSet },
    /// `y_v - x_e >= 0`.
    Logical { v: usize, e: Edge },
}

/// Sparse row of a cut over the given columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutRow {
    pub y: Vec<(usize, f64)>,
    pub x: Vec<(Edge, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl CutRow {
    /// Dense dot product against full `y` and an edge lookup.
    pub fn lhs(&self, y: &[f64], x: impl Fn(Edge) -> f64) -> f64 {
        self.y.iter().map(|&(v, c)| c * y[v]).sum::<f64>() + self.x.iter().map(|&(e, c)| c * x(e)).sum::<f64>()
    }

    pub fn violation(&self, y: &[f64], x: impl Fn(Edge) -> f64) -> f64 {
        let lhs = self.lhs(y, x);
        match self.sense {
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Le => (lhs - self.rhs).max(0.0),
        }
    }
}

fn path_edges(p: &[usize]) -> impl Iterator<Item = Edge> + '_ {
    p.windows(2).map(|w| Edge::new(w[0], w[1]))
}

fn cycle_vertices(f: &[Edge]) -> VertexSet {
    f.iter().flat_map(|e| [e.u, e.v]).collect()
}

impl Cut {
    pub fn family(&self) -> Family {
        match self {
            Cut::Sec { .. } => Family::Sec,
            Cut::Cc { .. } => Family::Cc,
            Cut::Blossom { .. } => Family::Blossom,
            Cut::EdgeCover { .. } => Family::EdgeCover,
            Cut::CycleCover { .. } => Family::CycleCover,
            Cut::VertexCover { .. } => Family::VertexCover,
            Cut::Path { .. } => Family::Path,
            Cut::Logical { .. } => Family::Logical,
        }
    }

    /// Whether the edge part is a sum of star sets of vertex subsets.
    pub fn is_star_family(&self) -> bool {
        matches!(self, Cut::Sec { .. } | Cut::Cc { .. } | Cut::Blossom { .. })
    }

    /// Vertex subsets whose star sets make up the edge part, with multiplicity.
    pub fn subsets(&self) -> Vec<VertexSet> {
        match self {
            Cut::Sec { h, .. } => vec![h.clone()],
            Cut::Cc { t } => vec![t.clone()],
            Cut::Blossom { h, teeth } => {
                let mut v = vec![h.clone()];
                v.extend(teeth.iter().map(|e| VertexSet::from_sorted_unchecked(vec![e.u, e.v])));
                v
            }
            _ => Vec::new(),
        }
    }

    /// Normal form used for deduplication.
    pub fn canonical(self, n: usize) -> Cut {
        let smaller_side = |h: VertexSet| {
            let k = h.len();
            if 2 * k > n || (2 * k == n && h.contains(0)) {
                (h.complement(n), true)
            } else {
                (h, false)
            }
        };
        match self {
            Cut::Sec { h, l, r } => {
                let (h, flipped) = smaller_side(h);
                if flipped {
                    Cut::Sec { h, l: r, r: l }
                } else {
                    Cut::Sec { h, l, r }
                }
            }
            Cut::Cc { t } => {
                if t.contains(0) {
                    Cut::Cc { t }
                } else {
                    Cut::Cc { t: t.complement(n) }
                }
            }
            Cut::Blossom { h, mut teeth } => {
                teeth.sort();
                Cut::Blossom { h: smaller_side(h).0, teeth }
            }
            Cut::EdgeCover { mut f } => {
                f.sort();
                Cut::EdgeCover { f }
            }
            Cut::CycleCover { mut f } => {
                f.sort();
                Cut::CycleCover { f }
            }
            other => other,
        }
    }

    pub fn sense(&self) -> Sense {
        match self {
            Cut::Sec { .. } | Cut::Cc { .. } | Cut::Blossom { .. } | Cut::Logical { .. } => Sense::Ge,
            _ => Sense::Le,
        }
    }

    pub fn rhs(&self) -> i64 {
        match self {
            Cut::Sec { .. } => -2,
            Cut::Cc { .. } => 2,
            Cut::Blossom { teeth, .. } => 1 - teeth.len() as i64,
            Cut::EdgeCover { f } => f.len() as i64 - 1,
            Cut::CycleCover { .. } => -1,
            Cut::VertexCover { q } => q.len() as i64 - 1,
            Cut::Path { .. } | Cut::Logical { .. } => 0,
        }
    }

    /// Coefficient of `x_e`.
    pub fn edge_coef(&self, e: Edge) -> i32 {
        match self {
            Cut::Sec { h, .. } => h.crosses(e) as i32,
            Cut::Cc { t } => t.crosses(e) as i32,
            Cut::Blossom { h, teeth } => {
                h.crosses(e) as i32
                    + teeth
                        .iter()
                        .filter(|t| (t.touches(e.u) as i32 + t.touches(e.v) as i32) == 1)
                        .count() as i32
            }
            Cut::EdgeCover { f } | Cut::CycleCover { f } => f.binary_search(&e).is_ok() as i32,
            Cut::VertexCover { .. } => 0,
            Cut::Path { p, w } => {
                if path_edges(p).any(|pe| pe == e) {
                    1
                } else {
                    let last = *p.last().unwrap();
                    if e.touches(last) && w.contains(e.other(last)) {
                        -1
                    } else {
                        0
                    }
                }
            }
            Cut::Logical { e: le, .. } => -((*le == e) as i32),
        }
    }

    /// Nonzero coefficients of the vertex variables.
    pub fn vertex_terms(&self) -> Vec<(usize, i32)> {
        match self {
            Cut::Sec { l, r, .. } => vec![(*l, -2), (*r, -2)],
            Cut::Cc { .. } | Cut::EdgeCover { .. } => Vec::new(),
            Cut::Blossom { teeth, .. } => teeth.iter().flat_map(|t| [(t.u, -2), (t.v, -2)]).collect(),
            Cut::CycleCover { f } => cycle_vertices(f).iter().map(|v| (v, -1)).collect(),
            Cut::VertexCover { q } => q.iter().map(|v| (v, 1)).collect(),
            Cut::Path { p, .. } => {
                let k = p.len();
                p.iter().enumerate().filter(|&(i, _)| i != 0 && i != k - 1).map(|(_, &v)| (v, -1)).collect()
            }
            Cut::Logical { v, .. } => vec![(*v, 1)],
        }
    }

    /// Render over an explicit list of edge columns.
    pub fn render(&self, edges: impl IntoIterator<Item = Edge>) -> CutRow {
        CutRow {
            y: self.vertex_terms().into_iter().map(|(v, c)| (v, c as f64)).collect(),
            x: edges
                .into_iter()
                .filter_map(|e| {
                    let c = self.edge_coef(e);
                    (c != 0).then_some((e, c as f64))
                })
                .collect(),
            sense: self.sense(),
            rhs: self.rhs() as f64,
        }
    }

    /// Left-hand side at `p`, evaluated on the support only.
    pub fn lhs<T: Scalar>(&self, p: &FracPoint<T>) -> T {
        let int = |c: i64| T::from_i64(c).expect("small integer");
        let ysum = |terms: Vec<(usize, i32)>| {
            terms.into_iter().fold(T::zero(), |acc, (v, c)| acc + int(c as i64) * p.y[v])
        };
        match self {
            Cut::Sec { h, .. } => p.cut_value(h) + ysum(self.vertex_terms()),
            Cut::Cc { t } => p.cut_value(t),
            Cut::Blossom { h, teeth } => {
                let mut s = p.cut_value(h);
                for t in teeth {
                    s += p.star(t.u) + p.star(t.v) - T::two() * p.x(*t);
                }
                s + ysum(self.vertex_terms())
            }
            Cut::EdgeCover { f } => f.iter().fold(T::zero(), |a, &e| a + p.x(e)),
            Cut::CycleCover { f } => f.iter().fold(T::zero(), |a, &e| a + p.x(e)) + ysum(self.vertex_terms()),
            Cut::VertexCover { .. } => ysum(self.vertex_terms()),
            Cut::Path { p: seq, w } => {
                let last = *seq.last().unwrap();
                let mut s = path_edges(seq).fold(T::zero(), |a, e| a + p.x(e));
                for &(v, x) in p.neighbors(last) {
                    if w.contains(v) {
                        s -= x;
                    }
                }
                s + ysum(self.vertex_terms())
            }
            Cut::Logical { v, e } => p.y[*v] - p.x(*e),
        }
    }

    /// Amount by which `p` violates the cut, zero if satisfied.
    pub fn violation<T: Scalar>(&self, p: &FracPoint<T>) -> T {
        let lhs = self.lhs(p);
        let rhs = T::from_i64(self.rhs()).unwrap();
        let v = match self.sense() {
            Sense::Ge => rhs - lhs,
            Sense::Le => lhs - rhs,
        };
        v.max_of(T::zero())
    }

    /// Slack at `p` (nonnegative when satisfied).
    pub fn slack<T: Scalar>(&self, p: &FracPoint<T>) -> T {
        let lhs = self.lhs(p);
        let rhs = T::from_i64(self.rhs()).unwrap();
        match self.sense() {
            Sense::Ge => lhs - rhs,
            Sense::Le => rhs - lhs,
        }
    }

    /// Structural invariants of each family. Bound-dependent conditions
    /// are checked by [`Cut::check_bounds`].
    pub fn check(&self, inst: &Instance) -> Result<(), InvalidCut> {
        let n = inst.n();
        let fail = |reason: String| Err(InvalidCut { family: self.family(), reason });
        match self {
            Cut::Sec { h, l, r } => {
                if h.len() < 3 || h.len() + 3 > n {
                    return fail(format!("|H| = {} outside 3..={}", h.len(), n.saturating_sub(3)));
                }
                if !h.contains(*l) || h.contains(*r) {
                    return fail("need l in H and r outside H".into());
                }
            }
            Cut::Cc { t } => {
                if !t.contains(inst.depot()) || t.len() < 2 || t.len() >= n {
                    return fail(format!("T must contain the depot with 2 <= |T| < n, got |T| = {}", t.len()));
                }
            }
            Cut::Blossom { h, teeth } => {
                if teeth.len() < 3 || teeth.len() % 2 == 0 {
                    return fail(format!("{} teeth", teeth.len()));
                }
                if h.is_empty() || h.len() >= n {
                    return fail("degenerate handle".into());
                }
                let mut seen = VertexSet::new();
                for t in teeth {
                    if !h.crosses(*t) {
                        return fail(format!("tooth {t} does not cross the handle"));
                    }
                    if !seen.insert(t.u) || !seen.insert(t.v) {
                        return fail("teeth overlap".into());
                    }
                }
            }
            Cut::EdgeCover { f } => {
                let total: i64 = f.iter().map(|&e| inst.edge_length(e)).sum();
                if total <= inst.budget() {
                    return fail(format!("cover length {total} within budget"));
                }
                if f.iter().any(|&e| total - inst.edge_length(e) > inst.budget()) {
                    return fail("cover is not minimal".into());
                }
            }
            Cut::CycleCover { f } => {
                let vs = cycle_vertices(f);
                if f.len() < 3 || vs.len() != f.len() {
                    return fail("not a simple cycle".into());
                }
                for v in vs.iter() {
                    if f.iter().filter(|e| e.touches(v)).count() != 2 {
                        return fail("not a simple cycle".into());
                    }
                }
                let pf = FracPoint::new(n, vec![0.0; n], f.iter().map(|&e| (e, 1.0)), 0.0);
                if pf.components().len() != 1 {
                    return fail("cycle edges are disconnected".into());
                }
                let total: i64 = f.iter().map(|&e| inst.edge_length(e)).sum();
                if total <= inst.budget() {
                    return fail(format!("cycle length {total} within budget"));
                }
            }
            Cut::VertexCover { q } => {
                if q.is_empty() {
                    return fail("empty cover".into());
                }
            }
            Cut::Path { p, w } => {
                let vs: VertexSet = p.iter().copied().collect();
                if p.len() < 2 || vs.len() != p.len() {
                    return fail("path must be simple with at least one edge".into());
                }
                if vs.contains(inst.depot()) {
                    return fail("path visits the depot".into());
                }
                if *w != path_w(inst, p) {
                    return fail("W does not match its definition".into());
                }
            }
            Cut::Logical { v, e } => {
                if !e.touches(*v) {
                    return fail(format!("edge {e} not incident to {}", v + 1));
                }
            }
        }
        Ok(())
    }

    /// Conditions relative to the incumbent value `lb` and upper bound `ub`.
    pub fn check_bounds(&self, inst: &Instance, lb: i64, ub: i64) -> Result<(), InvalidCut> {
        match self {
            Cut::Cc { t } if inst.set_score(t.iter()) > lb => Err(InvalidCut {
                family: Family::Cc,
                reason: format!("score of T {} exceeds LB {lb}", inst.set_score(t.iter())),
            }),
            Cut::VertexCover { q } if inst.set_score(q.iter()) <= ub => Err(InvalidCut {
                family: Family::VertexCover,
                reason: format!("score of Q {} does not exceed UB {ub}", inst.set_score(q.iter())),
            }),
            _ => Ok(()),
        }
    }
}

/// `W(P)`: vertices outside the path that can close a budget-feasible
/// route `depot -> P -> v -> depot`.
pub fn path_w(inst: &Instance, p: &[usize]) -> VertexSet {
    let first = p[0];
    let last = *p.last().unwrap();
    let base = inst.distance(inst.depot(), first) + path_edges(p).map(|e| inst.edge_length(e)).sum::<i64>();
    let on_path: VertexSet = p.iter().copied().collect();
    (0..inst.n())
        .filter(|&v| !on_path.contains(v))
        .filter(|&v| base + inst.distance(last, v) + inst.distance(v, inst.depot()) <= inst.budget())
        .collect()
}

#[derive(Debug, Clone)]
struct SubsetEntry {
    set: VertexSet,
    refs: usize,
    pi: f64,
}

/// Interned vertex subsets of the active star-family cuts with their
/// accumulated duals `π_S`.
#[derive(Debug, Clone, Default)]
pub struct SubsetRegistry {
    entries: Vec<SubsetEntry>,
    index: HashMap<VertexSet, SubsetId>,
    free: Vec<SubsetId>,
}

impl SubsetRegistry {
    pub fn intern(&mut self, set: &VertexSet) -> SubsetId {
        if let Some(&id) = self.index.get(set) {
            self.entries[id].refs += 1;
            return id;
        }
        let entry = SubsetEntry { set: set.clone(), refs: 1, pi: 0.0 };
        let id = match self.free.pop() {
            Some(id) => {
                self.entries[id] = entry;
                id
            }
            None => {
                self.entries.push(entry);
                self.entries.len() - 1
            }
        };
        self.index.insert(set.clone(), id);
        id
    }

    pub fn release(&mut self, id: SubsetId) {
        let e = &mut self.entries[id];
        e.refs -= 1;
        if e.refs == 0 {
            self.index.remove(&e.set);
            e.set = VertexSet::new();
            e.pi = 0.0;
            self.free.push(id);
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, set: &VertexSet) -> Option<SubsetId> {
        self.index.get(set).copied()
    }

    pub fn refs(&self, id: SubsetId) -> usize {
        self.entries[id].refs
    }

    pub fn set(&self, id: SubsetId) -> &VertexSet {
        &self.entries[id].set
    }

    pub fn pi(&self, id: SubsetId) -> f64 {
        self.entries[id].pi
    }

    /// Live subsets with their duals.
    pub fn iter(&self) -> impl Iterator<Item = (SubsetId, &VertexSet, f64)> + '_ {
        self.index.values().map(move |&id| (id, &self.entries[id].set, self.entries[id].pi))
    }

    fn clear_duals(&mut self) {
        for e in &mut self.entries {
            e.pi = 0.0;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CutEntry {
    pub cut: Cut,
    pub active: bool,
    /// Consecutive solves with slack above the dust threshold.
    pub age: u32,
    /// Incumbent value when the cut was generated.
    pub lb_at_creation: i64,
    /// Dual `π_j` of the row in the last solve (oriented so that `>=` rows are nonnegative).
    pub dual: f64,
    #[serde(skip)]
    subsets: Vec<SubsetId>,
}

/// Outcome of registering a cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Registered {
    New(CutId),
    Existing(CutId),
    /// Too many SECs on the same handle.
    Capped,
}

/// Every cut generated during a solve, active or not.
#[derive(Debug, Clone)]
pub struct CutPool {
    n: usize,
    entries: Vec<CutEntry>,
    index: HashMap<Cut, CutId>,
    sec_per_set: HashMap<VertexSet, usize>,
    max_sec_per_set: usize,
    registry: SubsetRegistry,
}

impl CutPool {
    pub fn new(n: usize) -> Self {
        Self::with_sec_cap(n, 50)
    }

    pub fn with_sec_cap(n: usize, max_sec_per_set: usize) -> Self {
        CutPool {
            n,
            entries: Vec::new(),
            index: HashMap::new(),
            sec_per_set: HashMap::new(),
            max_sec_per_set,
            registry: SubsetRegistry::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cut(&self, id: CutId) -> &Cut {
        &self.entries[id].cut
    }

    pub fn entry(&self, id: CutId) -> &CutEntry {
        &self.entries[id]
    }

    pub fn entries(&self) -> impl Iterator<Item = (CutId, &CutEntry)> + '_ {
        self.entries.iter().enumerate()
    }

    pub fn registry(&self) -> &SubsetRegistry {
        &self.registry
    }

    pub fn find(&self, cut: &Cut) -> Option<CutId> {
        self.index.get(&cut.clone().canonical(self.n)).copied()
    }

    /// Add a cut in canonical form; duplicates map to the existing handle.
    pub fn register(&mut self, cut: Cut, lb: i64) -> Registered {
        let cut = cut.canonical(self.n);
        if let Some(&id) = self.index.get(&cut) {
            return Registered::Existing(id);
        }
        if let Cut::Sec { h, .. } = &cut {
            let c = self.sec_per_set.entry(h.clone()).or_insert(0);
            if *c >= self.max_sec_per_set {
                return Registered::Capped;
            }
            *c += 1;
        }
        let id = self.entries.len();
        self.index.insert(cut.clone(), id);
        self.entries.push(CutEntry { cut, active: false, age: 0, lb_at_creation: lb, dual: 0.0, subsets: Vec::new() });
        Registered::New(id)
    }

    /// Mark a cut as present in the LP.
    pub fn activate(&mut self, id: CutId) {
        let e = &mut self.entries[id];
        if e.active {
            return;
        }
        e.active = true;
        e.age = 0;
        e.subsets = e.cut.subsets().iter().map(|s| self.registry.intern(s)).collect();
    }

    pub fn deactivate(&mut self, id: CutId) {
        let e = &mut self.entries[id];
        if !e.active {
            return;
        }
        e.active = false;
        e.dual = 0.0;
        for sid in std::mem::take(&mut e.subsets) {
            self.registry.release(sid);
        }
    }

    pub fn inactive(&self) -> impl Iterator<Item = CutId> + '_ {
        self.entries.iter().enumerate().filter(|(_, e)| !e.active).map(|(i, _)| i)
    }

    /// Store row duals `π_j` of active cuts and recompute every `π_S`.
    pub fn set_duals(&mut self, duals: impl IntoIterator<Item = (CutId, f64)>) {
        for e in &mut self.entries {
            e.dual = 0.0;
        }
        for (id, pi) in duals {
            self.entries[id].dual = pi;
        }
        self.registry.clear_duals();
        for e in &self.entries {
            if e.active && e.dual != 0.0 {
                for &sid in &e.subsets {
                    self.registry.entries[sid].pi += e.dual;
                }
            }
        }
    }

    /// Update row ages at `p` and return the active cuts that have been
    /// slack for more than `max_age` consecutive solves.
    pub fn age_rows(&mut self, active: &[CutId], p: &FracPoint<f64>, dust: f64, max_age: u32) -> Vec<CutId> {
        let mut expired = Vec::new();
        for &id in active {
            let e = &mut self.entries[id];
            if e.cut.slack(p) > dust {
                e.age += 1;
            } else {
                e.age = 0;
            }
            if e.age > max_age {
                expired.push(id);
            }
        }
        expired
    }

    pub fn count_by_family(&self) -> Vec<(Family, usize)> {
        Family::ALL
            .iter()
            .map(|&f| (f, self.entries.iter().filter(|e| e.cut.family() == f).count()))
            .collect()
    }

    /// JSON summary of every cut: family, subset sizes, dual, age, activity.
    pub fn dump_json(&self) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "family": e.cut.family().name(),
                    "subset_sizes": e.cut.subsets().iter().map(|s| s.len()).collect::<Vec<_>>(),
                    "dual": e.dual,
                    "age": e.age,
                    "active": e.active,
                })
            })
            .collect();
        serde_json::Value::Array(items)
    }
}
