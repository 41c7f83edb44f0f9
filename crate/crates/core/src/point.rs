//! Fractional points `(y, x)` and the set functions evaluated on them.

use std::collections::HashMap;

use crate::instance::{Edge, VertexSet};
use crate::num::{sum, Scalar};

/// A fractional `(y, x)` with `x` stored on its support only.
#[derive(Debug, Clone)]
pub struct FracPoint<T> {
    pub n: usize,
    pub y: Vec<T>,
    support: Vec<(Edge, T)>,
    index: HashMap<Edge, usize>,
    adj: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> FracPoint<T> {
    /// Keep edges with value strictly above `zero`.
    pub fn new(n: usize, y: Vec<T>, x: impl IntoIterator<Item = (Edge, T)>, zero: T) -> Self {
        let mut support: Vec<(Edge, T)> = x.into_iter().filter(|&(_, v)| v > zero).collect();
        support.sort_by(|a, b| a.0.cmp(&b.0));
        support.dedup_by(|a, b| a.0 == b.0);
        let mut adj = vec![Vec::new(); n];
        for &(e, v) in &support {
            adj[e.u].push((e.v, v));
            adj[e.v].push((e.u, v));
        }
        let index = support.iter().enumerate().map(|(i, &(e, _))| (e, i)).collect();
        FracPoint { n, y, support, index, adj }
    }

    pub fn support(&self) -> &[(Edge, T)] {
        &self.support
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, T)] {
        &self.adj[v]
    }

    pub fn x(&self, e: Edge) -> T {
        self.index.get(&e).map_or(T::zero(), |&i| self.support[i].1)
    }

    /// `x(δ(v))`.
    pub fn star(&self, v: usize) -> T {
        sum(self.adj[v].iter().map(|&(_, x)| x))
    }

    /// `x(δ(S))` from a membership mask.
    pub fn cut_value_mask(&self, mask: &[bool]) -> T {
        sum(self.support.iter().filter(|(e, _)| mask[e.u] != mask[e.v]).map(|&(_, x)| x))
    }

    pub fn cut_value(&self, set: &VertexSet) -> T {
        self.cut_value_mask(&set.mask(self.n))
    }

    /// `x(E(S))`.
    pub fn inner_value(&self, set: &VertexSet) -> T {
        let mask = set.mask(self.n);
        sum(self.support.iter().filter(|(e, _)| mask[e.u] && mask[e.v]).map(|&(_, x)| x))
    }

    pub fn y_sum(&self, set: &VertexSet) -> T {
        sum(set.iter().map(|v| self.y[v]))
    }

    /// Largest violation of a degree equation `x(δ(v)) = 2 y_v`.
    pub fn degree_residual(&self) -> T {
        (0..self.n)
            .map(|v| (self.star(v) - T::two() * self.y[v]).abs())
            .fold(T::zero(), |a, b| a.max_of(b))
    }

    /// Connected components of the support graph restricted to `y > 0`
    /// vertices, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX || !(self.y[s] > T::zero() || !self.adj[s].is_empty()) {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            comp[s] = id;
            let mut members = Vec::new();
            while let Some(v) = stack.pop() {
                members.push(v);
                for &(w, _) in &self.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            out.push(members.into_iter().collect());
        }
        out
    }
}
