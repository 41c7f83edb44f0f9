//! Independent reference implementations for the integration tests.
#![allow(dead_code)]

use opbac::{Instance, Metric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Euclidean distance rounded to nearest, computed independently.
pub fn euc(a: (f64, f64), b: (f64, f64)) -> i64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt().round() as i64
}

fn next_perm(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Shortest cycle through `depot` and all of `rest`, by enumerating every
/// order of `rest`.
pub fn tsp_by_permutation(dist: &dyn Fn(usize, usize) -> i64, depot: usize, rest: &[usize]) -> (i64, Vec<usize>) {
    let mut perm = rest.to_vec();
    perm.sort();
    let mut best = (i64::MAX, Vec::new());
    loop {
        let mut len = 0;
        let mut prev = depot;
        for &v in &perm {
            len += dist(prev, v);
            prev = v;
        }
        len += dist(prev, depot);
        if len < best.0 {
            let mut t = vec![depot];
            t.extend(&perm);
            best = (len, t);
        }
        if !next_perm(&mut perm) {
            break;
        }
    }
    best
}

/// Best OP value over all depot-containing vertex sets of size at least 3,
/// each closed by its optimal tour. Returns `(score, tour)`; score -1 when
/// no tour fits.
pub fn brute_force_op(inst: &Instance) -> (i64, Vec<usize>) {
    let n = inst.n();
    let depot = inst.depot();
    let others: Vec<usize> = (0..n).filter(|&v| v != depot).collect();
    let dist = |a: usize, b: usize| inst.distance(a, b);
    let mut best: (i64, Vec<usize>) = (-1, Vec::new());
    for mask in 0u32..(1 << others.len()) {
        if mask.count_ones() < 2 {
            continue;
        }
        let set: Vec<usize> = (0..others.len()).filter(|&i| mask >> i & 1 == 1).map(|i| others[i]).collect();
        let score: i64 = set.iter().map(|&v| inst.score(v)).sum::<i64>() + inst.score(depot);
        if score <= best.0 {
            continue;
        }
        let (len, tour) = tsp_by_permutation(&dist, depot, &set);
        if len <= inst.budget() {
            best = (score, tour);
        }
    }
    best
}

/// Nearest-neighbour tour length over all vertices.
pub fn greedy_tour_length(inst: &Instance) -> i64 {
    let n = inst.n();
    let mut seen = vec![false; n];
    let mut cur = inst.depot();
    seen[cur] = true;
    let mut len = 0;
    for _ in 1..n {
        let next = (0..n).filter(|&v| !seen[v]).min_by_key(|&v| (inst.distance(cur, v), v)).unwrap();
        len += inst.distance(cur, next);
        seen[next] = true;
        cur = next;
    }
    len + inst.distance(cur, inst.depot())
}

/// Random planar instance with budget half the greedy tour length.
pub fn random_instance(seed: u64, n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0..100) as f64, rng.gen_range(0..100) as f64)).collect();
    let scores: Vec<i64> = (0..n).map(|i| if i == 0 { 0 } else { rng.gen_range(1..=20) }).collect();
    let probe = Instance::from_coords(format!("rand{seed}"), Metric::Euc2d, coords.clone(), scores.clone(), 1).unwrap();
    let budget = (greedy_tour_length(&probe) / 2).max(1);
    Instance::from_coords(format!("rand{seed}"), Metric::Euc2d, coords, scores, budget).unwrap()
}

/// Data directory for instance fixtures.
pub fn data_dir() -> std::path::PathBuf {
    std::env::var_os("OPLIB_DIR")
        .map(Into::into)
        .unwrap_or_else(|| std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data"))
}
