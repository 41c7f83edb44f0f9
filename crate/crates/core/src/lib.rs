//! Exact branch-and-cut solver for the Orienteering Problem.
//!
//! The combinatorial kernels ([`point`], [`mincut`], [`cutpool`] evaluation)
//! are generic over [`num::Scalar`]; the LP-driven solver runs on `f64`.
pub mod config;
pub mod cutpool;
pub mod heuristics;
pub mod instance;
pub mod lp;
pub mod mincut;
pub mod num;
pub mod point;
pub mod pricing;
pub mod search;
pub mod separation;

pub use config::Config;
pub use heuristics::Tour;
pub use instance::{Edge, Instance, InstanceError, Metric, VertexSet};
pub use search::{solve, Report, SolveError, Solver, Status};

/// Fractional point used by the solver.
pub type Point = point::FracPoint<f64>;
/// Exact fractional point for rational checks.
pub type RationalPoint = point::FracPoint<num_rational::Rational64>;
/// Shrunk support graph used by the solver.
pub type Shrunk = mincut::ShrunkGraph<f64>;
