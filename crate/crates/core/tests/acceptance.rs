//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Instances are looked up as `<name>-gen<k>.oplib` under `OPLIB_DIR`
//! (default `tests/data`). A criterion with a missing instance is reported
//! as FAIL with the reason; the exit status only reflects instances that
//! could be evaluated.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use common::{brute_force_op, data_dir, random_instance};
use num_rational::Rational64;
use opbac::config::BranchHeuristic;
use opbac::mincut::{min_cut_st, ShrinkStrategy};
use opbac::{Config, Edge, Instance, Point, Report, Solver, Status, Tour, VertexSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GEN1_LIMIT_S: f64 = 120.0;
const GEN23_LIMIT_S: f64 = 300.0;
const RC_AGREEMENT_TOL: f64 = 1e-5;
const RC_DOMINANCE_TOL: f64 = 1e-6;
const NESTED_CUT_TOL: f64 = 1e-9;
const LARGE_LIMIT_S: f64 = 900.0;
const LARGE_OPT: i64 = 251;
const LARGE_SOFT_LB: i64 = 245;
const LARGE_SOFT_UB: i64 = 260;

const GEN1: &[(&str, i64)] = &[
    ("att48", 31),
    ("gr48", 31),
    ("hk48", 30),
    ("eil51", 29),
    ("berlin52", 37),
    ("st70", 43),
    ("eil76", 47),
    ("pr76", 49),
    ("rat99", 52),
    ("kroA100", 56),
];
const GEN2: &[(&str, i64)] =
    &[("att48", 1717), ("gr48", 1761), ("hk48", 1614), ("eil51", 1674), ("berlin52", 1897), ("pr76", 2708)];
const GEN3: &[(&str, i64)] = &[("att48", 1049), ("gr48", 1480), ("hk48", 1764), ("eil51", 1399), ("pr76", 2430)];

#[derive(Default)]
struct Outcome {
    evaluated: bool,
    /// Result over the evaluated part.
    pass: bool,
    missing: usize,
    detail: Vec<String>,
}

impl Outcome {
    fn note(&mut self, s: impl Into<String>) {
        self.detail.push(s.into());
    }
}

fn report_line(k: u32, title: &str, o: &Outcome) -> bool {
    let verdict = if o.pass && o.evaluated && o.missing == 0 { "PASS" } else { "FAIL" };
    let missing = if o.missing > 0 { format!(" ({} instances unavailable)", o.missing) } else { String::new() };
    println!("criterion {k} [{title}]: {verdict}{missing}: {}", o.detail.join("; "));
    !o.evaluated || o.pass
}

fn instance_path(name: &str, gen: u32) -> PathBuf {
    data_dir().join(format!("{name}-gen{gen}.oplib"))
}

fn load(name: &str, gen: u32) -> Option<Instance> {
    let p = instance_path(name, gen);
    p.exists().then(|| Instance::parse_file(&p).expect("fixture parses"))
}

/// Solve twice: once to get an optimal tour, once more with that tour as
/// the cut sentinel and the pricing audit switched on.
struct Audited {
    report: Report,
    time_s: f64,
    sentinel_violations: u64,
    sentinel_checked: u64,
    audit: Option<opbac::search::PricingAudit>,
}

fn solve_audited(inst: &Instance, cfg: Config) -> Audited {
    let t0 = Instant::now();
    let report = Solver::new(inst, cfg.clone()).unwrap().run().unwrap();
    let time_s = t0.elapsed().as_secs_f64();
    let (mut v, mut c, mut audit) = (0, 0, None);
    if report.status == Status::Optimal {
        if let Some(tour) = report.best_tour(inst) {
            let r2 = Solver::new(inst, cfg).unwrap().with_sentinel(tour).with_pricing_audit().run().unwrap();
            v = r2.stats.sentinel_violations;
            c = r2.stats.sentinel_checked;
            audit = r2.stats.pricing_audit;
        }
    }
    Audited { report, time_s, sentinel_violations: v, sentinel_checked: c, audit }
}

struct Sentinel {
    violations: u64,
    checked: u64,
    runs: u64,
}

struct PricingTally {
    snapshots: u64,
    excess: f64,
    mismatch: f64,
}

fn golden(
    sets: &[(u32, &[(&str, i64)], f64)],
    sentinel: &mut Sentinel,
    pricing: Option<&mut PricingTally>,
) -> Outcome {
    let mut o = Outcome { pass: true, ..Default::default() };
    let mut pricing = pricing;
    for &(gen, table, limit) in sets {
        for &(name, want) in table {
            let Some(inst) = load(name, gen) else {
                o.missing += 1;
                o.note(format!("{name}-gen{gen} unavailable"));
                continue;
            };
            o.evaluated = true;
            let cfg = Config { time_limit_s: limit, ..Config::default() };
            let a = solve_audited(&inst, cfg);
            sentinel.violations += a.sentinel_violations;
            sentinel.checked += a.sentinel_checked;
            sentinel.runs += 1;
            if let (Some(p), Some(au)) = (pricing.as_deref_mut(), a.audit) {
                p.snapshots += au.snapshots;
                p.excess = p.excess.max(au.max_bound_excess);
                p.mismatch = p.mismatch.max(au.max_backend_mismatch);
            }
            let ok = a.report.status == Status::Optimal && a.report.lb == want && a.time_s <= limit;
            o.pass &= ok;
            o.note(format!(
                "{name}-gen{gen} {} {:?} {:.1}s (want {want}){}",
                a.report.lb,
                a.report.status,
                a.time_s,
                if ok { "" } else { " MISMATCH" }
            ));
        }
    }
    o
}

fn oracle(sentinel: &mut Sentinel) -> Outcome {
    let mut o = Outcome { evaluated: true, pass: true, ..Default::default() };
    let mut mismatches = 0;
    for seed in 0..50u64 {
        let n = 6 + (seed % 5) as usize;
        let inst = random_instance(seed, n);
        let (opt, tour) = brute_force_op(&inst);
        let mut s = Solver::new(&inst, Config { time_limit_s: 60.0, ..Config::default() }).unwrap();
        if opt >= 0 {
            s = s.with_sentinel(Tour::new(&inst, tour));
        }
        let r = s.run().unwrap();
        sentinel.violations += r.stats.sentinel_violations;
        sentinel.checked += r.stats.sentinel_checked;
        sentinel.runs += 1;
        let got = if r.status == Status::Infeasible { -1 } else { r.lb };
        let ok = (r.status == Status::Optimal || r.status == Status::Infeasible) && got == opt;
        if !ok {
            mismatches += 1;
            o.note(format!("seed {seed}: solver {got} {:?}, enumeration {opt}", r.status));
        }
    }
    o.pass = mismatches == 0;
    o.note(format!("{mismatches} mismatches over 50 instances"));
    o
}

fn cycle_mix(rng: &mut ChaCha8Rng, n: usize) -> Point {
    let mut y = vec![0.0; n];
    let mut x: std::collections::HashMap<Edge, f64> = Default::default();
    let k = rng.gen_range(1..=4);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum::<f64>() * rng.gen_range(1.0..1.5);
    for w in weights {
        let w = w / total;
        let mut verts: Vec<usize> = (1..n).collect();
        verts.shuffle(rng);
        let mut cyc = vec![0];
        cyc.extend_from_slice(&verts[..rng.gen_range(2..n)]);
        for j in 0..cyc.len() {
            y[cyc[j]] += w;
            *x.entry(Edge::new(cyc[j], cyc[(j + 1) % cyc.len()])).or_default() += w;
        }
    }
    Point::new(n, y, x, 0.0)
}

fn nested_cut() -> Outcome {
    let mut o = Outcome { evaluated: true, pass: true, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let n = rng.gen_range(3..=12);
        let p = cycle_mix(&mut rng, n);
        let deg = p.degree_residual();
        assert!(deg < 1e-12, "generator broke the degree equations");
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        let ks = rng.gen_range(2..=n);
        let kq = rng.gen_range(1..ks);
        let s: VertexSet = all[..ks].iter().copied().collect();
        let q: VertexSet = all[..kq].iter().copied().collect();
        let excess = p.cut_value(&s.difference(&q)) - p.cut_value(&s) - p.cut_value(&q);
        worst = worst.max(excess);
    }
    o.pass = worst <= NESTED_CUT_TOL;
    o.note(format!("1000 points, max excess {worst:.3e} (tol {NESTED_CUT_TOL:e})"));
    o
}

fn min_cut() -> Outcome {
    let mut o = Outcome { evaluated: true, pass: true, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(0.6) {
                    edges.push((u, v, Rational64::new(rng.gen_range(1..=30), rng.gen_range(1..=6))));
                }
            }
        }
        let s = rng.gen_range(0..n);
        let t = (s + rng.gen_range(1..n)) % n;
        let mut want: Option<Rational64> = None;
        for mask in 0u32..(1 << n) {
            if mask >> s & 1 == 1 && mask >> t & 1 == 0 {
                let v: Rational64 =
                    edges.iter().filter(|e| (mask >> e.0 & 1) != (mask >> e.1 & 1)).map(|e| e.2).sum();
                want = Some(want.map_or(v, |w| w.min(v)));
            }
        }
        if min_cut_st(n, &edges, s, t).value != want.unwrap() {
            bad += 1;
        }
    }
    o.pass = bad == 0;
    o.note(format!("{bad} of 200 graphs differ from enumeration (exact rationals)"));
    o
}

fn ablations() -> Outcome {
    let mut o = Outcome { pass: true, ..Default::default() };
    let variants: [(&str, fn(&mut Config)); 5] = [
        ("-SRK", |c| c.shrink = ShrinkStrategy::None),
        ("-EPH", |c| c.eph = false),
        ("-EGH", |c| c.egh = false),
        ("SEP=2", |c| c.sep_subloops = 2),
        ("BRANCH=PB", |c| c.branch_heur = BranchHeuristic::Pb),
    ];
    for &(name, want) in GEN1.iter().filter(|(n, _)| !matches!(*n, "rat99" | "kroA100")) {
        let Some(inst) = load(name, 1) else {
            o.missing += 1;
            o.note(format!("{name}-gen1 unavailable"));
            continue;
        };
        o.evaluated = true;
        for (label, tweak) in variants {
            let mut cfg = Config { time_limit_s: GEN1_LIMIT_S, ..Config::default() };
            tweak(&mut cfg);
            let r = Solver::new(&inst, cfg).unwrap().run().unwrap();
            let ok = r.status == Status::Optimal && r.lb == want;
            o.pass &= ok;
            o.note(format!("{name} {label} {} {:.1}s{}", r.lb, r.time_s, if ok { "" } else { " MISMATCH" }));
        }
    }
    o
}

fn large() -> Outcome {
    let mut o = Outcome { pass: true, ..Default::default() };
    let Some(inst) = load("pcb442", 1) else {
        o.missing += 1;
        o.note("pcb442-gen1 unavailable");
        return o;
    };
    o.evaluated = true;
    let r = Solver::new(&inst, Config { time_limit_s: LARGE_LIMIT_S, ..Config::default() }).unwrap().run().unwrap();
    let monotone = r.stats.bound_trace.windows(2).all(|w| w[1].lb >= w[0].lb && w[1].ub <= w[0].ub + 1e-9);
    let hard = r.lb <= LARGE_OPT && LARGE_OPT <= r.ub && monotone;
    let soft = r.lb >= LARGE_SOFT_LB && r.ub <= LARGE_SOFT_UB;
    o.pass = hard;
    o.note(format!(
        "LB={} UB={} {:?} {:.0}s, {} bound events, monotone={monotone}, soft target LB>={LARGE_SOFT_LB} UB<={LARGE_SOFT_UB} {}",
        r.lb,
        r.ub,
        r.status,
        r.time_s,
        r.stats.bound_trace.len(),
        if soft { "met" } else { "missed" }
    ));
    o
}

fn main() {
    let large_run = std::thread::spawn(large);

    let mut sentinel = Sentinel { violations: 0, checked: 0, runs: 0 };
    let mut pricing = PricingTally { snapshots: 0, excess: f64::NEG_INFINITY, mismatch: 0.0 };
    let c1 = golden(&[(1, GEN1, GEN1_LIMIT_S)], &mut sentinel, Some(&mut pricing));
    let c2 = golden(&[(2, GEN2, GEN23_LIMIT_S), (3, GEN3, GEN23_LIMIT_S)], &mut sentinel, None);
    let c3 = oracle(&mut sentinel);

    let mut c4 = Outcome { evaluated: sentinel.runs > 0, ..Default::default() };
    c4.pass = sentinel.violations == 0 && sentinel.checked > 0;
    c4.note(format!("{} violations over {} cut checks in {} runs", sentinel.violations, sentinel.checked, sentinel.runs));

    let mut c5 = Outcome { evaluated: pricing.snapshots > 0, ..Default::default() };
    c5.pass = pricing.excess <= RC_DOMINANCE_TOL && pricing.mismatch <= RC_AGREEMENT_TOL;
    c5.note(format!(
        "{} snapshots, max rc - bound {:.2e} (tol {RC_DOMINANCE_TOL:e}), max backend mismatch {:.2e} (tol {RC_AGREEMENT_TOL:e})",
        pricing.snapshots, pricing.excess, pricing.mismatch
    ));
    if !c1.evaluated {
        c5.note("no criterion-1 instance available");
    }

    let c6 = nested_cut();
    let c7 = min_cut();
    let c8 = ablations();
    let c9 = large_run.join().expect("large-instance run panicked");

    let mut ok = true;
    ok &= report_line(1, "golden optima, Gen1 medium", &c1);
    ok &= report_line(2, "golden optima, Gen2/Gen3", &c2);
    ok &= report_line(3, "oracle equivalence", &c3);
    ok &= report_line(4, "cut validity sentinel", &c4);
    ok &= report_line(5, "pricing dominance", &c5);
    ok &= report_line(6, "nested cut inequality", &c6);
    ok &= report_line(7, "min-cut exactness", &c7);
    ok &= report_line(8, "ablation smoke", &c8);
    ok &= report_line(9, "large instance, 15 minutes", &c9);
    if !ok {
        eprintln!("acceptance: an evaluated criterion failed");
        std::process::exit(1);
    }
}
