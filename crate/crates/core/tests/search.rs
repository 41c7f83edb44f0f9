mod common;

use std::cell::RefCell;
use std::io::Write;
use std::rc::Rc;

use common::{data_dir, random_instance};
use opbac::{Config, Instance, Solver, Status};
use serde_json::Value;

#[derive(Clone, Default)]
struct Sink(Rc<RefCell<Vec<u8>>>);

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.borrow_mut().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

fn traced(inst: &Instance, cfg: Config) -> (opbac::Report, Vec<Value>) {
    let sink = Sink::default();
    let r = Solver::new(inst, cfg).unwrap().with_trace(sink.clone()).run().unwrap();
    let text = String::from_utf8(sink.0.borrow().clone()).unwrap();
    (r, text.lines().map(|l| serde_json::from_str(l).unwrap()).collect())
}

/// Per node, a loop only runs after every loop below it has run.
fn check_loop_order(events: &[Value]) {
    let mut seen = [false; 3];
    for ev in events {
        match ev["event"].as_str().unwrap() {
            "node" => seen = [false; 3],
            "sep" => {
                let level = match ev["loop"].as_str().unwrap() {
                    "inner" => 0,
                    "middle" => 1,
                    "outer" => 2,
                    other => panic!("unknown loop {other}"),
                };
                assert!(seen[..level].iter().all(|&s| s), "{ev} before its lower loops");
                seen[level] = true;
            }
            _ => {}
        }
    }
}

#[test]
fn separation_loops_run_bottom_up() {
    let inst = Instance::parse_file(data_dir().join("berlin52-gen1.oplib")).unwrap();
    let (r, events) = traced(&inst, Config::default());
    assert_eq!(r.lb, 37);
    assert_eq!(events.first().unwrap()["event"], "start");
    assert_eq!(events.last().unwrap()["event"], "end");
    assert!(events.iter().any(|e| e["loop"] == "middle"));
    check_loop_order(&events);
}

#[test]
fn two_subloops_have_no_outer_loop() {
    let inst = Instance::parse_file(data_dir().join("berlin52-gen1.oplib")).unwrap();
    let (r, events) = traced(&inst, Config { sep_subloops: 2, ..Config::default() });
    assert_eq!(r.lb, 37);
    assert!(!events.iter().any(|e| e["loop"] == "outer"));
    check_loop_order(&events);
}

#[test]
fn bounds_are_monotone_and_gap_matches() {
    for seed in 0..6u64 {
        let inst = random_instance(500 + seed, 16);
        let (r, events) = traced(&inst, Config::default());
        assert_eq!(r.status, Status::Optimal);
        let trace = &r.stats.bound_trace;
        assert!(!trace.is_empty());
        for w in trace.windows(2) {
            assert!(w[1].lb >= w[0].lb, "LB decreased");
            assert!(w[1].ub <= w[0].ub + 1e-9, "UB increased");
        }
        for ev in events.iter().filter(|e| e["event"] == "bounds") {
            assert!(ev["lb"].as_f64().unwrap() <= ev["ub"].as_f64().unwrap() + 1e-6);
        }
        assert_eq!(r.ub, r.lb);
        assert_eq!(r.gap, 0.0);
        let prunes = events.iter().filter(|e| e["event"] == "prune").count() as u64;
        let branches = events.iter().filter(|e| e["event"] == "branch").count() as u64;
        assert_eq!(r.stats.nodes, 1 + 2 * branches, "every branch creates two nodes");
        assert!(prunes <= r.stats.nodes);
    }
}

#[test]
fn time_limit_keeps_valid_bounds() {
    let inst = Instance::parse_file(data_dir().join("berlin52-gen2.oplib")).unwrap();
    let r = Solver::new(&inst, Config { time_limit_s: 0.0, ..Config::default() }).unwrap().run().unwrap();
    assert_eq!(r.status, Status::TimeLimit);
    assert!(r.lb <= 1897 && 1897 <= r.ub);
}

#[test]
fn incumbent_is_kept_when_optimal() {
    let inst = random_instance(42, 9);
    let (opt, tour) = common::brute_force_op(&inst);
    let r = Solver::new(&inst, Config::default())
        .unwrap()
        .with_incumbent(opbac::Tour::new(&inst, tour))
        .run()
        .unwrap();
    assert_eq!(r.lb, opt);
    assert_eq!(r.status, Status::Optimal);
}
