//! Primal heuristics: tours built from LP points and local search.

use kiddo::float::distance::SquaredEuclidean;
use kiddo::float::kdtree::KdTree;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::config::{Config, PathJoin};
use crate::instance::{Edge, Instance, VertexSet};
use crate::point::FracPoint;

/// Large buckets avoid the split failure on many equal coordinates.
type Tree = KdTree<f64, u64, 2, 256, u32>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TourError {
    #[error("a tour needs at least 3 vertices, got {0}")]
    TooShort(usize),
    #[error("vertex {0} is out of range")]
    OutOfRange(usize),
    #[error("vertex {0} is visited twice")]
    Repeated(usize),
    #[error("the depot is not visited")]
    MissingDepot,
    #[error("tour length {length} exceeds the budget {budget}")]
    OverBudget { length: i64, budget: i64 },
}

/// A closed route starting at the depot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    seq: Vec<usize>,
    length: i64,
    score: i64,
}

impl Tour {
    /// Rotate `seq` so that it starts at the depot (if present).
    pub fn new(inst: &Instance, mut seq: Vec<usize>) -> Self {
        if let Some(p) = seq.iter().position(|&v| v == inst.depot()) {
            seq.rotate_left(p);
        }
        let length = inst.cycle_length(&seq);
        let score = inst.set_score(seq.iter().copied());
        Tour { seq, length, score }
    }

    pub fn seq(&self) -> &[usize] {
        &self.seq
    }

    pub fn length(&self) -> i64 {
        self.length
    }

    pub fn score(&self) -> i64 {
        self.score
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn edges(&self) -> Vec<Edge> {
        let m = self.seq.len();
        (0..m).map(|i| Edge::new(self.seq[i], self.seq[(i + 1) % m])).collect()
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.seq.iter().copied().collect()
    }

    pub fn validate(&self, inst: &Instance) -> Result<(), TourError> {
        validate_seq(inst, &self.seq).map(|_| ())
    }

    pub fn is_feasible(&self, inst: &Instance) -> bool {
        self.validate(inst).is_ok()
    }
}

/// Check that `seq` is a budget-feasible simple cycle through the depot.
pub fn validate_seq(inst: &Instance, seq: &[usize]) -> Result<Tour, TourError> {
    if seq.len() < 3 {
        return Err(TourError::TooShort(seq.len()));
    }
    let mut seen = vec![false; inst.n()];
    for &v in seq {
        if v >= inst.n() {
            return Err(TourError::OutOfRange(v));
        }
        if seen[v] {
            return Err(TourError::Repeated(v));
        }
        seen[v] = true;
    }
    if !seen[inst.depot()] {
        return Err(TourError::MissingDepot);
    }
    let t = Tour::new(inst, seq.to_vec());
    if t.length > inst.budget() {
        return Err(TourError::OverBudget { length: t.length, budget: inst.budget() });
    }
    Ok(t)
}

fn d(inst: &Instance, a: usize, b: usize) -> i64 {
    inst.distance(a, b)
}

/// First-improvement 2-opt. Returns whether the tour changed.
pub fn two_opt(inst: &Instance, seq: &mut [usize]) -> bool {
    let m = seq.len();
    if m < 4 {
        return false;
    }
    let mut changed = false;
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..m - 1 {
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (a, b, c, e) = (seq[i], seq[i + 1], seq[j], seq[(j + 1) % m]);
                let delta = d(inst, a, c) + d(inst, b, e) - d(inst, a, b) - d(inst, c, e);
                if delta < 0 {
                    seq[i + 1..=j].reverse();
                    improved = true;
                    changed = true;
                }
            }
        }
    }
    changed
}

/// Or-opt: move segments of one to three vertices, either orientation.
/// Returns whether the tour changed.
pub fn or_opt(inst: &Instance, seq: &mut Vec<usize>) -> bool {
    let mut changed = false;
    'restart: loop {
        let m = seq.len();
        for len in 1..=3usize {
            if m < len + 3 {
                continue;
            }
            for i in 1..=(m - len) {
                let prev = seq[i - 1];
                let next = seq[(i + len) % m];
                let (s0, s1) = (seq[i], seq[i + len - 1]);
                let gain = d(inst, prev, s0) + d(inst, s1, next) - d(inst, prev, next);
                let mut rest: Vec<usize> = seq[..i].to_vec();
                rest.extend_from_slice(&seq[i + len..]);
                let r = rest.len();
                for p in 0..r {
                    let (a, b) = (rest[p], rest[(p + 1) % r]);
                    if a == prev && b == next {
                        continue;
                    }
                    let fwd = d(inst, a, s0) + d(inst, s1, b) - d(inst, a, b);
                    let bwd = d(inst, a, s1) + d(inst, s0, b) - d(inst, a, b);
                    if fwd.min(bwd) < gain {
                        let mut seg = seq[i..i + len].to_vec();
                        if bwd < fwd {
                            seg.reverse();
                        }
                        rest.splice(p + 1..p + 1, seg);
                        *seq = rest;
                        changed = true;
                        continue 'restart;
                    }
                }
            }
        }
        return changed;
    }
}

/// 2-opt and Or-opt until neither improves.
pub fn improve(inst: &Instance, seq: &mut Vec<usize>) {
    loop {
        two_opt(inst, seq);
        if !or_opt(inst, seq) {
            break;
        }
    }
}

/// Remove the vertex with the largest length saving per unit of score
/// until the tour fits the budget.
pub fn drop_until_feasible(inst: &Instance, seq: &mut Vec<usize>) {
    let depot = inst.depot();
    let mut len = inst.cycle_length(seq);
    while len > inst.budget() && seq.len() > 1 {
        let m = seq.len();
        let mut best: Option<(f64, usize, i64)> = None;
        for i in 0..m {
            let v = seq[i];
            if v == depot {
                continue;
            }
            let (p, q) = (seq[(i + m - 1) % m], seq[(i + 1) % m]);
            let saving = d(inst, p, v) + d(inst, v, q) - d(inst, p, q);
            let ratio = saving as f64 / (inst.score(v) as f64).max(1e-9);
            if best.is_none_or(|(r, _, _)| ratio > r) {
                best = Some((ratio, i, saving));
            }
        }
        let Some((_, i, saving)) = best else { break };
        seq.remove(i);
        len -= saving;
    }
}

/// Nearest tour vertex for every query, by k-d tree on planar metrics and
/// by linear scan otherwise.
pub struct NearestTour<'a> {
    inst: &'a Instance,
    tree: Option<Tree>,
    members: Vec<usize>,
}

impl<'a> NearestTour<'a> {
    pub fn new(inst: &'a Instance, seq: &[usize], use_tree: bool) -> Self {
        let tree = (use_tree && inst.metric().is_planar()).then(|| {
            let mut t = Tree::new();
            for &v in seq {
                let (x, y) = inst.coords()[v];
                t.add(&[x, y], v as u64);
            }
            t
        });
        NearestTour { inst, tree, members: seq.to_vec() }
    }

    pub fn insert(&mut self, v: usize) {
        if let Some(t) = &mut self.tree {
            let (x, y) = self.inst.coords()[v];
            t.add(&[x, y], v as u64);
        }
        self.members.push(v);
    }

    /// Distance to the nearest member and that member.
    pub fn nearest(&self, v: usize) -> (i64, usize) {
        match &self.tree {
            Some(t) => {
                let (x, y) = self.inst.coords()[v];
                let nn = t.nearest_one::<SquaredEuclidean>(&[x, y]);
                let w = nn.item as usize;
                (self.inst.distance(v, w), w)
            }
            None => self
                .members
                .iter()
                .map(|&w| (self.inst.distance(v, w), w))
                .min()
                .expect("empty tour"),
        }
    }
}

/// Insert unvisited vertices next to their nearest tour vertex, best
/// score per added length first, while the budget allows.
pub fn add_greedy(inst: &Instance, seq: &mut Vec<usize>, use_tree: bool) {
    let n = inst.n();
    let mut in_tour = vec![false; n];
    for &v in seq.iter() {
        in_tour[v] = true;
    }
    let mut len = inst.cycle_length(seq);
    let mut near = NearestTour::new(inst, seq, use_tree);
    loop {
        let slack = inst.budget() - len;
        let m = seq.len();
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in seq.iter().enumerate() {
            pos[v] = i;
        }
        let mut best: Option<(f64, usize, usize, i64)> = None;
        for v in 0..n {
            if in_tour[v] || inst.score(v) == 0 {
                continue;
            }
            let (_, a) = near.nearest(v);
            let i = pos[a];
            let mut opts = vec![(i, seq[(i + 1) % m])];
            if m > 1 {
                opts.push(((i + m - 1) % m, seq[(i + m - 1) % m]));
            }
            for (at, _) in opts {
                let (p, q) = (seq[at], seq[(at + 1) % m]);
                let cost = d(inst, p, v) + d(inst, v, q) - if m > 1 { d(inst, p, q) } else { 0 };
                if cost > slack {
                    continue;
                }
                let ratio = inst.score(v) as f64 / (cost as f64 + 1e-9);
                if best.is_none_or(|(r, ..)| ratio > r) {
                    best = Some((ratio, v, at, cost));
                }
            }
        }
        let Some((_, v, at, cost)) = best else { break };
        seq.insert(at + 1, v);
        in_tour[v] = true;
        near.insert(v);
        len += cost;
    }
}

/// Local search, repair and greedy insertion until nothing changes.
pub fn polish(inst: &Instance, mut seq: Vec<usize>) -> Option<Tour> {
    let mut last = None;
    for _ in 0..5 {
        improve(inst, &mut seq);
        drop_until_feasible(inst, &mut seq);
        add_greedy(inst, &mut seq, true);
        improve(inst, &mut seq);
        let key = (inst.set_score(seq.iter().copied()), inst.cycle_length(&seq));
        if last == Some(key) {
            break;
        }
        last = Some(key);
    }
    let t = Tour::new(inst, seq);
    t.is_feasible(inst).then_some(t)
}

/// Cheapest insertion of `v` into `seq`.
fn insert_cheapest(inst: &Instance, seq: &mut Vec<usize>, v: usize) {
    let m = seq.len();
    if m < 2 {
        seq.push(v);
        return;
    }
    let at = (0..m)
        .min_by_key(|&i| {
            let (p, q) = (seq[i], seq[(i + 1) % m]);
            (d(inst, p, v) + d(inst, v, q) - d(inst, p, q), i)
        })
        .unwrap();
    seq.insert(at + 1, v);
}

/// Path building: greedy fragments from heavy edges, joined into a tour.
pub fn path_building<R: Rng>(inst: &Instance, p: &FracPoint<f64>, xmin: f64, join: PathJoin, rng: &mut R) -> Option<Tour> {
    let n = inst.n();
    let mut edges: Vec<(Edge, f64)> = p.support().iter().copied().filter(|&(_, x)| x >= xmin).collect();
    edges.shuffle(rng);
    edges.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    let mut deg = vec![0u8; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, _) in edges {
        if deg[e.u] >= 2 || deg[e.v] >= 2 {
            continue;
        }
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a == b {
            continue;
        }
        parent[a] = b;
        deg[e.u] += 1;
        deg[e.v] += 1;
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    // extract fragments
    let mut seen = vec![false; n];
    let mut frags: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if seen[s] || deg[s] != 1 {
            continue;
        }
        let mut f = vec![s];
        seen[s] = true;
        let mut cur = s;
        while let Some(&w) = adj[cur].iter().find(|&&w| !seen[w]) {
            seen[w] = true;
            f.push(w);
            cur = w;
        }
        frags.push(f);
    }
    let depot = inst.depot();
    let di = frags.iter().position(|f| f.contains(&depot));
    let mut seq = match di {
        Some(i) => frags.swap_remove(i),
        None => vec![depot],
    };
    match join {
        PathJoin::Random => frags.shuffle(rng),
        PathJoin::Nearest => {}
    }
    while !frags.is_empty() {
        let end = *seq.last().unwrap();
        let k = match join {
            PathJoin::Random => frags.len() - 1,
            PathJoin::Nearest => (0..frags.len())
                .min_by_key(|&k| d(inst, end, frags[k][0]).min(d(inst, end, *frags[k].last().unwrap())))
                .unwrap(),
        };
        let mut f = frags.swap_remove(k);
        if d(inst, end, *f.last().unwrap()) < d(inst, end, f[0]) {
            f.reverse();
        }
        seq.extend(f);
    }
    polish(inst, seq)
}

/// Vertex picking: keep each vertex with probability `y_v`, then build a
/// tour by cheapest insertion.
pub fn vertex_picking<R: Rng>(inst: &Instance, y: &[f64], rng: &mut R) -> Option<Tour> {
    let depot = inst.depot();
    let mut picked: Vec<usize> = (0..inst.n()).filter(|&v| v != depot && rng.gen_bool(y[v].clamp(0.0, 1.0))).collect();
    picked.shuffle(rng);
    let mut seq = vec![depot];
    for v in picked {
        insert_cheapest(inst, &mut seq, v);
    }
    polish(inst, seq)
}

fn better(a: &Tour, b: &Tour) -> bool {
    (a.score, -a.length) > (b.score, -b.length)
}

/// Best of `k` random individuals.
fn tournament<'p, R: Rng>(pop: &'p [Tour], k: usize, rng: &mut R) -> &'p Tour {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..k {
        let c = &pop[rng.gen_range(0..pop.len())];
        if better(c, best) {
            best = c;
        }
    }
    best
}

/// Small evolutionary improver seeded by vertex picking.
pub fn ea4op<R: Rng>(inst: &Instance, y: &[f64], cfg: &Config, seeds: &[Tour], rng: &mut R) -> Option<Tour> {
    let mut pop: Vec<Tour> = seeds.iter().filter(|t| t.is_feasible(inst)).cloned().collect();
    let mut tries = 0;
    while pop.len() < cfg.ea4op_pop_size.max(2) && tries < 4 * cfg.ea4op_pop_size.max(2) {
        tries += 1;
        if let Some(t) = vertex_picking(inst, y, rng) {
            pop.push(t);
        }
    }
    if pop.len() < 2 {
        return pop.into_iter().next();
    }
    let n = inst.n();
    for gen in 1..=cfg.ea4op_generations {
        let p1 = tournament(&pop, cfg.ea4op_npar, rng).clone();
        let p2 = tournament(&pop, cfg.ea4op_npar, rng).clone();
        let in2 = p2.vertex_set();
        // keep common vertices, each exclusive vertex with probability 1/2
        let mut child: Vec<usize> = p1.seq.iter().copied().filter(|&v| in2.contains(v) || rng.gen_bool(0.5)).collect();
        let in1 = p1.vertex_set();
        for &v in &p2.seq {
            if !in1.contains(v) && rng.gen_bool(0.5) {
                insert_cheapest(inst, &mut child, v);
            }
        }
        // mutation
        if rng.gen_bool(0.5) {
            let out: Vec<usize> = (0..n).filter(|&v| inst.score(v) > 0 && !child.contains(&v)).collect();
            if let Some(&v) = out.choose(rng) {
                insert_cheapest(inst, &mut child, v);
            }
        } else if child.len() > 3 {
            let i = rng.gen_range(1..child.len());
            child.remove(i);
        }
        drop_until_feasible(inst, &mut child);
        if gen % cfg.ea4op_d2d.max(1) == 0 {
            add_greedy(inst, &mut child, true);
            improve(inst, &mut child);
        } else {
            two_opt(inst, &mut child);
        }
        let c = Tour::new(inst, child);
        if !c.is_feasible(inst) {
            continue;
        }
        let cs = c.vertex_set();
        if pop.iter().any(|t| t.vertex_set() == cs) {
            continue;
        }
        let worst = (0..pop.len()).min_by(|&a, &b| (pop[a].score, -pop[a].length).cmp(&(pop[b].score, -pop[b].length))).unwrap();
        if better(&c, &pop[worst]) {
            pop[worst] = c;
        }
    }
    pop.into_iter().reduce(|a, b| if better(&b, &a) { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Metric;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inst(n: usize, budget: i64) -> Instance {
        let coords = (0..n).map(|i| (((i * 53) % 97) as f64, ((i * 29) % 89) as f64)).collect();
        let scores = (0..n).map(|i| if i == 0 { 0 } else { 1 + (i as i64 * 7) % 9 }).collect();
        Instance::from_coords("h", Metric::Euc2d, coords, scores, budget).unwrap()
    }

    #[test]
    fn validation_errors() {
        let g = inst(6, 1000);
        assert_eq!(validate_seq(&g, &[0, 1]), Err(TourError::TooShort(2)));
        assert_eq!(validate_seq(&g, &[0, 1, 1]), Err(TourError::Repeated(1)));
        assert_eq!(validate_seq(&g, &[1, 2, 3]), Err(TourError::MissingDepot));
        assert_eq!(validate_seq(&g, &[0, 1, 9]), Err(TourError::OutOfRange(9)));
        let small = inst(6, 1);
        assert!(matches!(validate_seq(&small, &[0, 1, 2]), Err(TourError::OverBudget { .. })));
        let t = validate_seq(&g, &[2, 0, 1]).unwrap();
        assert_eq!(t.seq(), &[0, 1, 2]);
    }

    #[test]
    fn local_search_never_lengthens() {
        let g = inst(30, 10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut seq: Vec<usize> = (0..30).collect();
            seq[1..].shuffle(&mut rng);
            let before = g.cycle_length(&seq);
            let mut s = seq.clone();
            improve(&g, &mut s);
            assert!(g.cycle_length(&s) <= before);
            let mut sorted = s.clone();
            sorted.sort();
            assert_eq!(sorted, (0..30).collect::<Vec<_>>());
            assert_eq!(s[0], 0);
        }
    }

    #[test]
    fn tree_and_scan_agree_on_nearest_distance() {
        let g = inst(60, 1000);
        let seq: Vec<usize> = (0..60).step_by(3).collect();
        let a = NearestTour::new(&g, &seq, true);
        let b = NearestTour::new(&g, &seq, false);
        for v in 0..60 {
            assert_eq!(a.nearest(v).0, b.nearest(v).0, "vertex {v}");
        }
    }

    #[test]
    fn drop_and_add_keep_feasibility() {
        let g = inst(40, 150);
        let mut seq: Vec<usize> = (0..40).collect();
        drop_until_feasible(&g, &mut seq);
        assert!(g.cycle_length(&seq) <= 150);
        add_greedy(&g, &mut seq, true);
        assert!(g.cycle_length(&seq) <= 150);
        let mut lin = seq.clone();
        add_greedy(&g, &mut lin, false);
        assert!(g.cycle_length(&lin) <= 150);
    }

    #[test]
    fn heuristics_return_feasible_tours() {
        let g = inst(40, 250);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = vec![0.5; 40];
        let e: Vec<(Edge, f64)> = (1..40).map(|i| (Edge::new(i - 1, i), 0.6)).collect();
        let p = FracPoint::new(40, y.clone(), e, 1e-9);
        for join in [PathJoin::Random, PathJoin::Nearest] {
            if let Some(t) = path_building(&g, &p, 0.3, join, &mut rng) {
                assert!(t.is_feasible(&g));
            }
        }
        let vp = vertex_picking(&g, &y, &mut rng);
        let cfg = Config::default();
        let ea = ea4op(&g, &y, &cfg, vp.as_slice(), &mut rng).unwrap();
        assert!(ea.is_feasible(&g));
        if let Some(vp) = vp {
            assert!(ea.score() >= vp.score());
        }
    }

    #[test]
    fn same_seed_same_tour() {
        let g = inst(40, 250);
        let y = vec![0.5; 40];
        let cfg = Config::default();
        let a = ea4op(&g, &y, &cfg, &[], &mut ChaCha8Rng::seed_from_u64(4));
        let b = ea4op(&g, &y, &cfg, &[], &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
    }
}
