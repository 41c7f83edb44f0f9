//! Solver parameters and component toggles.

use serde::{Deserialize, Serialize};

use crate::mincut::ShrinkStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchHeuristic {
    /// Path building only.
    Pb,
    /// Vertex picking without evolution.
    Vp,
    /// Vertex picking followed by the evolutionary improver.
    VpEa4op,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathJoin {
    Random,
    Nearest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    pub zero: f64,
    pub add_cut_batch: usize,
    pub add_min_viol: f64,
    pub subloop_impr: f64,
    pub add_sec_per_set: usize,
    pub add_path_max: usize,
    pub add_egh_epsilon: f64,
    pub price_max_add: usize,
    pub price_rc_thresh: f64,
    pub del_dust_var: f64,
    pub del_dust_cut: f64,
    pub del_max_age_cut: u32,
    pub del_max_age_var: u32,
    pub xheur_greedy_xmin: f64,
    pub ea4op_pop_size: usize,
    pub ea4op_d2d: usize,
    pub ea4op_npar: usize,

    pub knn: usize,
    pub shrink: ShrinkStrategy,
    pub cc_strats: bool,
    pub eph: bool,
    pub egh: bool,
    pub fst_blossom: bool,
    pub cycle_cover: bool,
    pub edge_cover: bool,
    pub vertex_cover: bool,
    pub path: bool,
    /// 3 runs inner/middle/outer; 2 merges the middle and outer loops.
    pub sep_subloops: u8,
    pub branch_heur: BranchHeuristic,
    /// Minimum edge value for path-cut extraction.
    pub path_xmin: f64,
    pub pb_join: PathJoin,
    /// Run vertex picking at nodes whose depth is a multiple of this; `0` picks by size.
    pub vp_stride: usize,
    /// Generations of the evolutionary improver per call.
    pub ea4op_generations: usize,
    pub time_limit_s: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            zero: 1e-7,
            add_cut_batch: 250,
            add_min_viol: 1e-6,
            subloop_impr: 0.01,
            add_sec_per_set: 50,
            add_path_max: 500,
            add_egh_epsilon: 0.3,
            price_max_add: 200,
            price_rc_thresh: 1e-5,
            del_dust_var: 1e-3,
            del_dust_cut: 1e-3,
            del_max_age_cut: 5,
            del_max_age_var: 100,
            xheur_greedy_xmin: 0.3,
            ea4op_pop_size: 10,
            ea4op_d2d: 5,
            ea4op_npar: 3,
            knn: 10,
            shrink: ShrinkStrategy::S1S3,
            cc_strats: true,
            eph: true,
            egh: true,
            fst_blossom: false,
            cycle_cover: true,
            edge_cover: true,
            vertex_cover: false,
            path: true,
            sep_subloops: 3,
            branch_heur: BranchHeuristic::VpEa4op,
            path_xmin: 0.9,
            pb_join: PathJoin::Random,
            vp_stride: 0,
            ea4op_generations: 50,
            time_limit_s: 18000.0,
            seed: 1,
        }
    }
}

impl Config {
    pub fn effective_vp_stride(&self, n: usize) -> usize {
        match self.vp_stride {
            0 if n > 1000 => 8,
            0 => 1,
            s => s,
        }
    }
}
