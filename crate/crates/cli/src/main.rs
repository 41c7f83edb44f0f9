use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opbac::config::{BranchHeuristic, PathJoin};
use opbac::heuristics::validate_seq;
use opbac::mincut::ShrinkStrategy;
use opbac::{Config, Instance, SolveError, Solver};

#[derive(Parser)]
#[command(name = "opbac", version, about = "Exact branch-and-cut solver for the Orienteering Problem")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an OPLib instance.
    Solve(SolveArgs),
    /// Check a tour (1-based labels) against an instance.
    Validate {
        instance: PathBuf,
        tour: PathBuf,
        /// Print the verdict as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShrinkArg {
    None,
    C1c2,
    S1,
    C1c2s3,
    S1s3,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Pb,
    Vp,
    VpEa4op,
}

#[derive(Clone, Copy, ValueEnum)]
enum JoinArg {
    Random,
    Nearest,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Print the JSON report on stdout (the summary goes to stderr).
    #[arg(long)]
    json: bool,
    /// Write JSON-lines search events to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the root LP in LP-file format to this file.
    #[arg(long)]
    lp_dump: Option<PathBuf>,
    #[arg(long, default_value_t = 18000.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, value_enum, default_value = "s1s3")]
    shrink: ShrinkArg,
    #[arg(long)]
    no_cc_strats: bool,
    #[arg(long)]
    no_eph: bool,
    #[arg(long)]
    no_egh: bool,
    #[arg(long)]
    fst_blossom: bool,
    #[arg(long)]
    no_cycle_cover: bool,
    #[arg(long)]
    no_edge_cover: bool,
    #[arg(long)]
    vertex_cover: bool,
    #[arg(long)]
    no_path: bool,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=3))]
    sep_subloops: u8,
    #[arg(long, value_enum, default_value = "vp-ea4op")]
    branch_heur: BranchArg,
    #[arg(long, value_enum, default_value = "random")]
    pb_join: JoinArg,
    /// Run the node heuristic every this many levels; 0 picks by size.
    #[arg(long, default_value_t = 0)]
    vp_stride: usize,

    #[arg(long)]
    zero: Option<f64>,
    #[arg(long)]
    add_cut_batch: Option<usize>,
    #[arg(long)]
    add_min_viol: Option<f64>,
    #[arg(long)]
    subloop_impr: Option<f64>,
    #[arg(long)]
    add_sec_per_set: Option<usize>,
    #[arg(long)]
    add_path_max: Option<usize>,
    #[arg(long)]
    add_egh_epsilon: Option<f64>,
    #[arg(long)]
    price_max_add: Option<usize>,
    #[arg(long)]
    price_rc_thresh: Option<f64>,
    #[arg(long)]
    del_dust_var: Option<f64>,
    #[arg(long)]
    del_dust_cut: Option<f64>,
    #[arg(long)]
    del_max_age_cut: Option<u32>,
    #[arg(long)]
    del_max_age_var: Option<u32>,
    #[arg(long)]
    xheur_greedy_xmin: Option<f64>,
    #[arg(long)]
    ea4op_pop_size: Option<usize>,
    #[arg(long)]
    ea4op_d2d: Option<usize>,
    #[arg(long)]
    ea4op_npar: Option<usize>,
    #[arg(long)]
    ea4op_generations: Option<usize>,
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long)]
    path_xmin: Option<f64>,
}

impl SolveArgs {
    fn config(&self) -> Config {
        let mut c = Config {
            time_limit_s: self.time_limit,
            seed: self.seed,
            shrink: match self.shrink {
                ShrinkArg::None => ShrinkStrategy::None,
                ShrinkArg::C1c2 => ShrinkStrategy::C1C2,
                ShrinkArg::S1 => ShrinkStrategy::S1,
                ShrinkArg::C1c2s3 => ShrinkStrategy::C1C2S3,
                ShrinkArg::S1s3 => ShrinkStrategy::S1S3,
            },
            cc_strats: !self.no_cc_strats,
            eph: !self.no_eph,
            egh: !self.no_egh,
            fst_blossom: self.fst_blossom,
            cycle_cover: !self.no_cycle_cover,
            edge_cover: !self.no_edge_cover,
            vertex_cover: self.vertex_cover,
            path: !self.no_path,
            sep_subloops: self.sep_subloops,
            branch_heur: match self.branch_heur {
                BranchArg::Pb => BranchHeuristic::Pb,
                BranchArg::Vp => BranchHeuristic::Vp,
                BranchArg::VpEa4op => BranchHeuristic::VpEa4op,
            },
            pb_join: match self.pb_join {
                JoinArg::Random => PathJoin::Random,
                JoinArg::Nearest => PathJoin::Nearest,
            },
            vp_stride: self.vp_stride,
            ..Config::default()
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(
            zero, add_cut_batch, add_min_viol, subloop_impr, add_sec_per_set, add_path_max, add_egh_epsilon,
            price_max_add, price_rc_thresh, del_dust_var, del_dust_cut, del_max_age_cut, del_max_age_var,
            xheur_greedy_xmin, ea4op_pop_size, ea4op_d2d, ea4op_npar, ea4op_generations, knn, path_xmin
        );
        c
    }
}

const EXIT_PARSE: u8 = 2;
const EXIT_BACKEND: u8 = 3;

fn load(path: &Path) -> Result<Instance, ExitCode> {
    Instance::parse_file(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn backend_failure(e: SolveError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_BACKEND)
}

fn solve(args: SolveArgs) -> Result<ExitCode, ExitCode> {
    let inst = load(&args.instance)?;
    let mut solver = Solver::new(&inst, args.config()).map_err(backend_failure)?;
    if let Some(path) = &args.trace {
        let f = File::create(path).map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::FAILURE
        })?;
        solver = solver.with_trace(BufWriter::new(f));
    }
    if let Some(path) = &args.lp_dump {
        solver = solver.with_lp_dump(path.to_string_lossy());
    }
    let report = solver.run().map_err(backend_failure)?;
    let summary = format!(
        "{} LB={} UB={} gap={} nodes={} time={:.2}s",
        report.status.as_str(),
        report.lb,
        report.ub,
        report.gap,
        report.stats.nodes,
        report.time_s
    );
    if args.json {
        eprintln!("{summary}");
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{summary}");
        if !report.tour.is_empty() {
            let labels: Vec<String> = report.tour.iter().map(|v| v.to_string()).collect();
            println!("tour: {}", labels.join(" "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Vertex labels from a plain list or a TSPLIB tour file.
fn read_tour(text: &str) -> Result<Vec<i64>, String> {
    let body = match text.find("TOUR_SECTION") {
        Some(i) => &text[i + "TOUR_SECTION".len()..],
        None => text,
    };
    let mut out = Vec::new();
    for tok in body.split(|c: char| c.is_whitespace() || c == ',') {
        if tok.is_empty() {
            continue;
        }
        if tok == "EOF" {
            break;
        }
        let v: i64 = tok.parse().map_err(|_| format!("not a vertex label: {tok:?}"))?;
        if v == -1 {
            break;
        }
        out.push(v);
    }
    Ok(out)
}

fn validate(instance: &Path, tour: &Path, json: bool) -> Result<ExitCode, ExitCode> {
    let inst = load(instance)?;
    let text = std::fs::read_to_string(tour).map_err(|e| {
        eprintln!("error: {}: {e}", tour.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    let labels = read_tour(&text).map_err(|e| {
        eprintln!("error: {}: {e}", tour.display());
        ExitCode::from(EXIT_PARSE)
    })?;
    let n = inst.n();
    let bad = labels.iter().copied().find(|&l| l < 1 || l as usize > n);
    let seq: Vec<usize> = labels.iter().filter(|&&l| l >= 1 && l as usize <= n).map(|&l| l as usize - 1).collect();
    let length = (bad.is_none() && !seq.is_empty()).then(|| inst.cycle_length(&seq));
    let score = seq.iter().map(|&v| inst.score(v)).sum::<i64>();
    let verdict = match bad {
        Some(l) => Err(format!("vertex label {l} is out of range 1..={n}")),
        None => validate_seq(&inst, &seq).map_err(|e| e.to_string()),
    };
    let feasible = verdict.is_ok();
    if json {
        let v = serde_json::json!({
            "feasible": feasible,
            "length": length,
            "score": score,
            "budget": inst.budget(),
            "reason": verdict.as_ref().err(),
        });
        println!("{v}");
    } else {
        match &verdict {
            Ok(t) => println!("FEASIBLE score={} length={} budget={}", t.score(), t.length(), inst.budget()),
            Err(e) => println!("INVALID {e} score={score} length={} budget={}", length.map_or("-".into(), |l| l.to_string()), inst.budget()),
        }
    }
    Ok(if feasible { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Solve(args) => solve(args),
        Cmd::Validate { instance, tour, json } => validate(&instance, &tour, json),
    };
    res.unwrap_or_else(|code| code)
}
