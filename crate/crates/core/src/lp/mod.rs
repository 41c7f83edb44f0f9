//! The working relaxation: column/row bookkeeping on top of an LP engine.
//!
//! Column layout is fixed: columns `0..n` are the vertex variables `y_v`,
//! the remaining columns are the active edge variables in insertion order.
//! Row 0 is the length budget, rows `1..=n` are the degree equations and
//! every further row belongs to a cut of the pool.

mod highs;

use std::collections::HashMap;

use thiserror::Error;

use crate::cutpool::{CutId, CutPool, Sense};
use crate::instance::{Edge, Instance};
use crate::point::FracPoint;

pub use highs::HighsBackend;

/// Values below this are treated as zero (Table "ZERO").
pub const ZERO: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("LP backend error: {0}")]
    Backend(String),
    #[error("model consistency error: {0}")]
    Consistency(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

/// Minimal engine contract: maximize, with bounded columns and ranged rows.
pub trait LpBackend {
    fn add_col(&mut self, cost: f64, lb: f64, ub: f64, entries: &[(usize, f64)]) -> Result<(), LpError>;
    fn add_row(&mut self, lb: f64, ub: f64, entries: &[(usize, f64)]) -> Result<(), LpError>;
    /// Remaining rows are renumbered compactly in their old order.
    fn delete_rows(&mut self, rows: &[usize]) -> Result<(), LpError>;
    fn delete_cols(&mut self, cols: &[usize]) -> Result<(), LpError>;
    fn set_col_bounds(&mut self, col: usize, lb: f64, ub: f64) -> Result<(), LpError>;
    fn set_col_cost(&mut self, col: usize, cost: f64) -> Result<(), LpError>;
    fn solve(&mut self) -> Result<LpStatus, LpError>;
    /// `(col_value, col_dual, row_dual)` of the last solve.
    fn solution(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>);
    fn objective(&self) -> f64;
    fn num_cols(&self) -> usize;
    fn num_rows(&self) -> usize;
    fn write_model(&mut self, path: &str) -> Result<(), LpError>;
}

/// Row categories of the working LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Budget,
    Degree(usize),
    Cut(CutId),
}

/// Primal/dual solution of the working LP.
///
/// Duals follow the convention `reduced cost = c - A^T dual` for a
/// maximization problem, so `<=` rows have nonnegative and `>=` rows
/// nonpositive duals at optimality.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub y: Vec<f64>,
    /// Active edge columns, in column order.
    pub edges: Vec<Edge>,
    pub x: Vec<f64>,
    /// Dual of every row, in row order (see [`LpModel::row_kind`]).
    pub row_duals: Vec<f64>,
    /// Backend reduced cost of every column.
    pub col_duals: Vec<f64>,
}

impl LpSolution {
    pub fn point(&self) -> FracPoint<f64> {
        FracPoint::new(
            self.y.len(),
            self.y.clone(),
            self.edges.iter().copied().zip(self.x.iter().copied()),
            ZERO,
        )
    }

    /// `true` if every variable is within `ZERO` of an integer.
    pub fn is_integral(&self) -> bool {
        let int = |v: &f64| (v - v.round()).abs() <= 1e-6;
        self.y.iter().all(int) && self.x.iter().all(int)
    }
}

#[derive(Debug, Clone)]
struct EdgeCol {
    edge: Edge,
    lb: f64,
    ub: f64,
    dust_age: u32,
}

/// The working relaxation and its mapping to the LP engine.
pub struct LpModel<B: LpBackend = HighsBackend> {
    backend: B,
    n: usize,
    scores: Vec<f64>,
    budget: f64,
    cols: Vec<EdgeCol>,
    col_of: HashMap<Edge, usize>,
    cut_rows: Vec<CutId>,
    row_of_cut: HashMap<CutId, usize>,
    last_x: Vec<f64>,
    solves: u64,
}

impl LpModel<HighsBackend> {
    /// LP with all vertex columns and the symmetric k-nearest-neighbour edges.
    pub fn build_initial(inst: &Instance, k_nn: usize) -> Result<Self, LpError> {
        let edges = inst.knn_edges(k_nn.max(2));
        Self::with_edges(HighsBackend::new(), inst, &edges)
    }
}

impl<B: LpBackend> LpModel<B> {
    pub fn with_edges(mut backend: B, inst: &Instance, edges: &[Edge]) -> Result<Self, LpError> {
        let n = inst.n();
        backend.add_row(f64::NEG_INFINITY, inst.budget() as f64, &[])?;
        for _ in 0..n {
            backend.add_row(0.0, 0.0, &[])?;
        }
        for v in 0..n {
            let lb = if v == inst.depot() { 1.0 } else { 0.0 };
            backend.add_col(inst.score(v) as f64, lb, 1.0, &[(1 + v, -2.0)])?;
        }
        let mut model = LpModel {
            backend,
            n,
            scores: inst.scores().iter().map(|&s| s as f64).collect(),
            budget: inst.budget() as f64,
            cols: Vec::new(),
            col_of: HashMap::new(),
            cut_rows: Vec::new(),
            row_of_cut: HashMap::new(),
            last_x: Vec::new(),
            solves: 0,
        };
        model.add_edges(inst, edges, &CutPool::new(n))?;
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        1 + self.n + self.cut_rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.n + self.cols.len()
    }

    pub fn solves(&self) -> u64 {
        self.solves
    }

    pub fn row_kind(&self, row: usize) -> RowKind {
        match row {
            0 => RowKind::Budget,
            r if r <= self.n => RowKind::Degree(r - 1),
            r => RowKind::Cut(self.cut_rows[r - 1 - self.n]),
        }
    }

    pub fn active_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.cols.iter().map(|c| c.edge)
    }

    pub fn num_active_edges(&self) -> usize {
        self.cols.len()
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.col_of.contains_key(&e)
    }

    pub fn edge_bounds(&self, e: Edge) -> Option<(f64, f64)> {
        self.col_of.get(&e).map(|&i| (self.cols[i].lb, self.cols[i].ub))
    }

    pub fn active_cuts(&self) -> &[CutId] {
        &self.cut_rows
    }

    pub fn has_cut(&self, id: CutId) -> bool {
        self.row_of_cut.contains_key(&id)
    }

    /// Add edge columns with their coefficients in every existing row.
    pub fn add_edges(&mut self, inst: &Instance, edges: &[Edge], pool: &CutPool) -> Result<usize, LpError> {
        let mut added = 0;
        for &e in edges {
            if self.col_of.contains_key(&e) {
                continue;
            }
            let mut entries = vec![(0, inst.edge_length(e) as f64), (1 + e.u, 1.0), (1 + e.v, 1.0)];
            for (i, &cid) in self.cut_rows.iter().enumerate() {
                let c = pool.cut(cid).edge_coef(e);
                if c != 0 {
                    entries.push((1 + self.n + i, c as f64));
                }
            }
            self.backend.add_col(0.0, 0.0, 1.0, &entries)?;
            self.col_of.insert(e, self.cols.len());
            self.cols.push(EdgeCol { edge: e, lb: 0.0, ub: 1.0, dust_age: 0 });
            self.last_x.push(0.0);
            added += 1;
        }
        Ok(added)
    }

    /// Remove edge columns; each must be at zero in the last solution.
    pub fn remove_edges(&mut self, edges: &[Edge]) -> Result<(), LpError> {
        let mut positions = Vec::with_capacity(edges.len());
        for e in edges {
            let &i = self
                .col_of
                .get(e)
                .ok_or_else(|| LpError::Consistency(format!("edge {e} is not an LP column")))?;
            if self.last_x[i] > ZERO {
                return Err(LpError::Consistency(format!("edge {e} has value {} in the last solution", self.last_x[i])));
            }
            if self.cols[i].lb > 0.0 {
                return Err(LpError::Consistency(format!("edge {e} is fixed to one")));
            }
            positions.push(i);
        }
        positions.sort_unstable();
        positions.dedup();
        let backend_cols: Vec<usize> = positions.iter().map(|&i| self.n + i).collect();
        self.backend.delete_cols(&backend_cols)?;
        let mut keep = vec![true; self.cols.len()];
        for &i in &positions {
            keep[i] = false;
        }
        let mut k = keep.iter();
        self.cols.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        self.last_x.retain(|_| *k.next().unwrap());
        self.col_of = self.cols.iter().enumerate().map(|(i, c)| (c.edge, i)).collect();
        Ok(())
    }

    pub fn set_edge_bounds(&mut self, e: Edge, lb: f64, ub: f64) -> Result<(), LpError> {
        let &i = self
            .col_of
            .get(&e)
            .ok_or_else(|| LpError::Consistency(format!("edge {e} is not an LP column")))?;
        self.backend.set_col_bounds(self.n + i, lb, ub)?;
        self.cols[i].lb = lb;
        self.cols[i].ub = ub;
        Ok(())
    }

    /// Append rows for the given pool cuts; cuts already present are skipped.
    pub fn add_cut_rows(&mut self, ids: &[CutId], pool: &CutPool) -> Result<usize, LpError> {
        let mut added = 0;
        for &id in ids {
            if self.row_of_cut.contains_key(&id) {
                continue;
            }
            let cut = pool.cut(id);
            let mut entries: Vec<(usize, f64)> = cut.vertex_terms().into_iter().map(|(v, c)| (v, c as f64)).collect();
            for (i, col) in self.cols.iter().enumerate() {
                let c = cut.edge_coef(col.edge);
                if c != 0 {
                    entries.push((self.n + i, c as f64));
                }
            }
            let rhs = cut.rhs() as f64;
            let (lb, ub) = match cut.sense() {
                Sense::Ge => (rhs, f64::INFINITY),
                Sense::Le => (f64::NEG_INFINITY, rhs),
            };
            self.backend.add_row(lb, ub, &entries)?;
            self.row_of_cut.insert(id, self.cut_rows.len());
            self.cut_rows.push(id);
            added += 1;
        }
        Ok(added)
    }

    pub fn remove_cut_rows(&mut self, ids: &[CutId]) -> Result<(), LpError> {
        let mut pos: Vec<usize> = ids.iter().filter_map(|id| self.row_of_cut.get(id).copied()).collect();
        if pos.is_empty() {
            return Ok(());
        }
        pos.sort_unstable();
        pos.dedup();
        let rows: Vec<usize> = pos.iter().map(|&i| 1 + self.n + i).collect();
        self.backend.delete_rows(&rows)?;
        let mut keep = vec![true; self.cut_rows.len()];
        for &i in &pos {
            keep[i] = false;
        }
        let mut k = keep.iter();
        self.cut_rows.retain(|_| *k.next().unwrap());
        self.row_of_cut = self.cut_rows.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Ok(())
    }

    /// Solve and read back the full primal/dual solution.
    pub fn solve(&mut self) -> Result<Option<LpSolution>, LpError> {
        self.solves += 1;
        match self.backend.solve()? {
            LpStatus::Infeasible => Ok(None),
            LpStatus::Optimal => {
                let (col_value, col_dual, row_dual) = self.backend.solution();
                let y: Vec<f64> = col_value[..self.n].iter().map(|v| v.clamp(0.0, 1.0)).collect();
                let x: Vec<f64> = col_value[self.n..].iter().map(|v| v.clamp(0.0, 1.0)).collect();
                for (i, &xv) in x.iter().enumerate() {
                    let c = &mut self.cols[i];
                    if xv < 1e-3 {
                        c.dust_age += 1;
                    } else {
                        c.dust_age = 0;
                    }
                }
                self.last_x = x.clone();
                let objective = self.backend.objective();
                Ok(Some(LpSolution {
                    objective,
                    y,
                    edges: self.cols.iter().map(|c| c.edge).collect(),
                    x,
                    row_duals: row_dual,
                    col_duals: col_dual,
                }))
            }
        }
    }

    /// Edge columns whose value stayed below `dust` for more than `max_age`
    /// consecutive solves, excluding columns fixed to one.
    pub fn aged_edges(&self, dust: f64, max_age: u32) -> Vec<Edge> {
        self.cols
            .iter()
            .zip(&self.last_x)
            .filter(|(c, &x)| c.dust_age > max_age && x < dust && x <= ZERO && c.lb == 0.0)
            .map(|(c, _)| c.edge)
            .collect()
    }

    /// Phase-one solve: maximize minus the total infeasibility over the
    /// current columns. Returns its objective and row duals; the model is
    /// restored afterwards.
    pub fn phase_one(&mut self, pool: &CutPool) -> Result<(f64, Vec<f64>), LpError> {
        for v in 0..self.n {
            self.backend.set_col_cost(v, 0.0)?;
        }
        let first_art = self.backend.num_cols();
        let mut arts = 0;
        self.backend.add_col(-1.0, 0.0, f64::INFINITY, &[(0, -1.0)])?;
        arts += 1;
        for v in 0..self.n {
            self.backend.add_col(-1.0, 0.0, f64::INFINITY, &[(1 + v, 1.0)])?;
            self.backend.add_col(-1.0, 0.0, f64::INFINITY, &[(1 + v, -1.0)])?;
            arts += 2;
        }
        for (i, &cid) in self.cut_rows.iter().enumerate() {
            let coef = match pool.cut(cid).sense() {
                Sense::Ge => 1.0,
                Sense::Le => -1.0,
            };
            self.backend.add_col(-1.0, 0.0, f64::INFINITY, &[(1 + self.n + i, coef)])?;
            arts += 1;
        }
        let result = match self.backend.solve() {
            Ok(LpStatus::Optimal) => {
                let (_, _, row_dual) = self.backend.solution();
                Ok((self.backend.objective(), row_dual))
            }
            Ok(LpStatus::Infeasible) => Err(LpError::Backend("phase-one LP reported infeasible".into())),
            Err(e) => Err(e),
        };
        let art_cols: Vec<usize> = (first_art..first_art + arts).collect();
        self.backend.delete_cols(&art_cols)?;
        for v in 0..self.n {
            self.backend.set_col_cost(v, self.scores[v])?;
        }
        result
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn write_model(&mut self, path: &str) -> Result<(), LpError> {
        self.backend.write_model(path)
    }
}
