//! Acceptance suite. Each test checks one criterion and prints a single
//! `PASS`/`FAIL` (or `SKIP`) line before asserting, so
//! `cargo test --test acceptance -- --nocapture` gives a readable report.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use mlas_core::bench::{
    export_dot, generate_instance, raw_csv, run_matrix, solve, summary_csv, Algorithm, BenchConfig, SolverParams,
};
use mlas_core::builders::{mlst, random_min_degree, round_heuristic, spt};
use mlas_core::exact::{exact_min_latency, exact_min_primary_latency};
use mlas_core::gls::{gls_trace_csv, run_gls, GlsParams};
use mlas_core::instance::load_orlib_case;
use mlas_core::latency::{arc_inversion_effect, primary_schedule, reattaching_effect};
use mlas_core::scheduler::{ndr_schedule, validate_schedule};
use mlas_core::vns::{run_vns, start_solution, vns_trace_csv, VnsParams};
use mlas_core::{AggTree, Instance, LocalSearch, Point, PointSet, Rng64};
use rand::{Rng, SeedableRng};

/// Criterion 1 wall-time budget.
const FUZZ_BUDGET: Duration = Duration::from_secs(600);
/// Criterion 4: share of runs that must hit the optimum, and the allowed excess.
const OPT_SHARE: f64 = 0.90;
const OPT_SLACK: u32 = 1;
/// Criterion 8 wall-time budget.
const VNS_BUDGET: Duration = Duration::from_secs(60);
/// Criterion 9 expected optimum for estein10 cases 1..=6 at d = 0.5.
const ESTEIN10_OPT: u32 = 5;
/// Largest instance handed to the exact solver during fuzzing.
const FUZZ_EXACT_N: usize = 10;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {id} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn from_coords(coords: &[(f64, f64)], d: f64) -> Instance {
    let pts = coords.iter().map(|&(x, y)| Point::new(x, y)).collect();
    Instance::build(PointSet::new(pts, "hand").unwrap(), d).unwrap()
}

/// Connected instance with `n` and `d` drawn from the given ranges.
fn random_instance(rng: &mut Rng64, n: (usize, usize), d: (f64, f64)) -> Instance {
    loop {
        let n = rng.gen_range(n.0..=n.1);
        let d = rng.gen_range(d.0..=d.1);
        if let Ok(inst) = generate_instance(n, d, rng.gen()) {
            return inst;
        }
    }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

/// Maps `f` over `items` on scoped threads, keeping order.
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let chunk = items.len().div_ceil(threads()).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    })
}

struct FuzzCase {
    n: usize,
    invalid: Vec<String>,
    heuristic_floor: u32,
    gls: [u32; 2],
    vns: u32,
    vns_start: u32,
}

struct Fuzz {
    cases: Vec<FuzzCase>,
    elapsed: Duration,
}

fn check(inst: &Instance, t: &AggTree, s: &mlas_core::FullSchedule, label: &str, out: &mut Vec<String>) {
    if let Err(e) = t.validate(inst) {
        out.push(format!("{label}: {e}"));
    }
    for v in validate_schedule(inst, t, s) {
        out.push(format!("{label}: {v}"));
    }
}

fn fuzz_one(inst: &Instance, seed: u64) -> FuzzCase {
    let mut invalid = Vec::new();
    let mut floor = u32::MAX;
    for (name, t) in [("H1", mlst(inst)), ("H2", round_heuristic(inst)), ("H3", spt(inst))] {
        let (t, s) = ndr_schedule(inst, &t);
        check(inst, &t, &s, name, &mut invalid);
        floor = floor.min(s.length());
    }
    let mut gls = [0; 2];
    for (k, ls) in [LocalSearch::ArcInversion, LocalSearch::BranchReattaching].into_iter().enumerate() {
        let r = run_gls(inst, &GlsParams { seed, ..GlsParams::default() }, ls).unwrap();
        check(inst, &r.tree, &r.schedule, "GLS", &mut invalid);
        gls[k] = r.length();
    }
    let r = run_vns(inst, &VnsParams { seed, ..VnsParams::default() }).unwrap();
    check(inst, &r.tree, &r.schedule, "VNS", &mut invalid);
    if inst.n() <= FUZZ_EXACT_N {
        let e = exact_min_latency(inst, FUZZ_EXACT_N).unwrap();
        check(inst, &e.tree, &e.schedule, "EXACT", &mut invalid);
    }
    FuzzCase { n: inst.n(), invalid, heuristic_floor: floor, gls, vns: r.length(), vns_start: r.start_length }
}

/// 1000 random instances with every algorithm, shared by criteria 1 and 5.
fn fuzz() -> &'static Fuzz {
    static FUZZ: OnceLock<Fuzz> = OnceLock::new();
    FUZZ.get_or_init(|| {
        let mut rng = Rng64::seed_from_u64(20_240_601);
        let instances: Vec<(Instance, u64)> =
            (0..1000).map(|i| (random_instance(&mut rng, (5, 100), (0.15, 0.5)), i)).collect();
        let start = Instant::now();
        let cases = par_map(&instances, |(inst, seed)| fuzz_one(inst, *seed));
        Fuzz { cases, elapsed: start.elapsed() }
    })
}

#[test]
fn c1_validity_fuzzing() {
    let f = fuzz();
    let bad: Vec<&String> = f.cases.iter().flat_map(|c| &c.invalid).collect();
    let small = f.cases.iter().filter(|c| c.n <= FUZZ_EXACT_N).count();
    let pass = bad.is_empty() && f.cases.len() >= 1000 && f.elapsed < FUZZ_BUDGET;
    let detail = format!(
        "{} instances (n 5..=100, d 0.15..=0.5; {} also solved exactly), {} violations, {:.1} s of {} s budget{}",
        f.cases.len(),
        small,
        bad.len(),
        f.elapsed.as_secs_f64(),
        FUZZ_BUDGET.as_secs(),
        bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
    );
    report(1, "validity fuzzing", pass, &detail);
}

/// Random labeled tree on a complete graph: each vertex after the sink picks
/// a uniformly random earlier vertex in a shuffled order.
fn random_tree(inst: &Instance, rng: &mut Rng64) -> AggTree {
    let n = inst.n();
    let mut order: Vec<usize> = (0..n).filter(|&v| v != inst.sink()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    order.insert(0, inst.sink());
    let mut parent = vec![None; n];
    for i in 1..n {
        parent[order[i]] = Some(order[rng.gen_range(0..i)]);
    }
    AggTree::from_parents(inst, parent).unwrap()
}

#[test]
fn c2_primary_oracle_equivalence() {
    let mut rng = Rng64::seed_from_u64(2);
    let mut mismatches = Vec::new();
    let mut trials = 0;
    while trials < 500 {
        let n = rng.gen_range(2..=8);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
        let Ok(ps) = PointSet::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect(), "c2") else { continue };
        // d > sqrt(2): every pair is adjacent, so every labeled tree is a spanning tree.
        let inst = Instance::build(ps, 1.5).unwrap();
        let t = random_tree(&inst, &mut rng);
        trials += 1;
        let fast = primary_schedule(&t).makespan();
        let oracle = exact_min_primary_latency(&t).unwrap();
        if fast != oracle {
            mismatches.push(format!("{:?}: {fast} vs {oracle}", t.parents()));
        }
    }
    let detail = format!(
        "{trials} random trees (n <= 8), {} mismatches{}",
        mismatches.len(),
        mismatches.first().map(|m| format!("; first: {m}")).unwrap_or_default()
    );
    report(2, "primary makespan equals exhaustive oracle", mismatches.is_empty(), &detail);
}

#[test]
fn c3_incremental_correctness() {
    let mut rng = Rng64::seed_from_u64(3);
    let (mut reattach, mut invert) = (0usize, 0usize);
    let mut wrong = Vec::new();
    while reattach < 1000 || invert < 1000 {
        let inst = random_instance(&mut rng, (5, 50), (0.2, 0.5));
        let t = random_min_degree(&inst, &mut rng);
        let ps = primary_schedule(&t);
        let base = i64::from(ps.makespan());
        for _ in 0..20 {
            let (v, u) = inst.arcs().nth(rng.gen_range(0..inst.arc_count())).unwrap();
            if reattach < 1000 {
                if let Ok(moved) = t.reattach(&inst, v, u) {
                    let truth = base - i64::from(primary_schedule(&moved).makespan());
                    let got = reattaching_effect(&inst, &t, &ps, v, u).unwrap();
                    if got != truth {
                        wrong.push(format!("reattach({v},{u}) on {:?}: {got} vs {truth}", t.parents()));
                    }
                    reattach += 1;
                }
            }
            if invert < 1000 {
                if let Ok(moved) = t.invert_and_reattach(&inst, v, u) {
                    let truth = base - i64::from(primary_schedule(&moved).makespan());
                    let got = arc_inversion_effect(&inst, &t, &ps, v, u).unwrap();
                    if got != truth {
                        wrong.push(format!("invert({v},{u}) on {:?}: {got} vs {truth}", t.parents()));
                    }
                    invert += 1;
                }
            }
        }
    }
    let detail = format!(
        "{reattach} reattach + {invert} inversion moves (n <= 50), {} mismatches{}",
        wrong.len(),
        wrong.first().map(|m| format!("; first: {m}")).unwrap_or_default()
    );
    report(3, "incremental effects equal recomputation", wrong.is_empty(), &detail);
}

#[test]
fn c4_near_optimality_small() {
    let mut rng = Rng64::seed_from_u64(4);
    let instances: Vec<Instance> = (0..20).map(|_| random_instance(&mut rng, (5, 8), (0.3, 0.5))).collect();
    let params = SolverParams::default();
    let algos = [Algorithm::GLS1, Algorithm::GLS2, Algorithm::VNS];
    // Per algorithm: (runs at optimum, runs, worst excess).
    let per_instance = par_map(&instances, |inst| {
        let opt = exact_min_latency(inst, 8).unwrap().length;
        algos.map(|a| {
            let mut hits = 0;
            let mut worst = 0;
            for seed in 0..20 {
                let l = solve(inst, a, seed, &params).unwrap().length();
                hits += usize::from(l == opt);
                worst = worst.max(l.saturating_sub(opt));
            }
            (hits, worst)
        })
    });
    let mut parts = Vec::new();
    let mut pass = true;
    for (k, a) in algos.iter().enumerate() {
        let hits: usize = per_instance.iter().map(|r| r[k].0).sum();
        let worst = per_instance.iter().map(|r| r[k].1).max().unwrap();
        let share = hits as f64 / 400.0;
        pass &= share >= OPT_SHARE && worst <= OPT_SLACK;
        parts.push(format!("{a} {:.1}% optimal, worst +{worst}", 100.0 * share));
    }
    let detail = format!("20 instances (n 5..=8) x 20 runs: {}", parts.join("; "));
    report(4, "near-optimality at small scale", pass, &detail);
}

#[test]
fn c5_seeded_dominance() {
    let f = fuzz();
    let gls_bad = f.cases.iter().filter(|c| c.gls.iter().any(|&l| l > c.heuristic_floor)).count();
    let vns_bad = f.cases.iter().filter(|c| c.vns > c.vns_start).count();
    let detail =
        format!("{} instances: GLS above best of H1..H3 on {gls_bad}, VNS above its start on {vns_bad}", f.cases.len());
    report(5, "seeded dominance", gls_bad == 0 && vns_bad == 0, &detail);
}

#[test]
fn c6_exact_sanity() {
    let star = from_coords(&[(0.5, 0.5), (0.6, 0.5), (0.4, 0.5), (0.5, 0.6), (0.5, 0.4)], 0.1001);
    let path = from_coords(&[(0.5, 0.5), (0.6, 0.5), (0.7, 0.5), (0.8, 0.5), (0.9, 0.5)], 0.11);
    let triangle = from_coords(&[(0.5, 0.5), (0.55, 0.5), (0.5, 0.55)], 0.2);
    let fixed = [
        ("star", exact_min_latency(&star, 12).unwrap().length, 4),
        ("path", exact_min_latency(&path, 12).unwrap().length, 4),
        ("triangle", exact_min_latency(&triangle, 12).unwrap().length, 2),
    ];
    let mut failures: Vec<String> = fixed
        .iter()
        .filter(|(_, got, want)| got != want)
        .map(|(k, got, want)| format!("{k}: {got} != {want}"))
        .collect();

    let mut rng = Rng64::seed_from_u64(6);
    let instances: Vec<Instance> = (0..50).map(|_| random_instance(&mut rng, (3, 10), (0.25, 0.6))).collect();
    let params = SolverParams::default();
    let results = par_map(&instances, |inst| {
        let e = exact_min_latency(inst, 10).unwrap();
        let mut out = Vec::new();
        if !validate_schedule(inst, &e.tree, &e.schedule).is_empty() {
            out.push(format!("{}: invalid witness", inst.id()));
        }
        let ecc = inst.levels().iter().max().copied().unwrap_or(0);
        let sink_kids = e.tree.children(inst.sink()).len() as u32;
        if e.length < ecc || e.length < sink_kids {
            out.push(format!("{}: optimum {} below a lower bound", inst.id(), e.length));
        }
        for a in [Algorithm::H1, Algorithm::H2, Algorithm::H3, Algorithm::GLS1, Algorithm::GLS2, Algorithm::VNS] {
            let l = solve(inst, a, 0, &params).unwrap().length();
            if l < e.length {
                out.push(format!("{}: {a} = {l} < exact {}", inst.id(), e.length));
            }
        }
        out
    });
    failures.extend(results.into_iter().flatten());
    let detail = format!(
        "star 4 leaves = {}, path 4 hops = {}, triangle = {}; 50 random instances (n <= 10): {} violations{}",
        fixed[0].1,
        fixed[1].1,
        fixed[2].1,
        failures.len(),
        failures.first().map(|m| format!("; first: {m}")).unwrap_or_default()
    );
    report(6, "exact solver sanity", failures.is_empty(), &detail);
}

#[test]
fn c7_determinism() {
    let cfg = BenchConfig::from_toml(
        "seed = 11\nreps = 4\n[[grid]]\nn = 9\nd = 0.4\ncount = 3\n[[grid]]\nn = 40\nd = 0.3\ncount = 1\n",
    )
    .unwrap();
    let insts = cfg.load_instances(std::path::Path::new(".")).unwrap();
    let a = run_matrix(&cfg, &insts).unwrap();
    let b = run_matrix(&cfg, &insts).unwrap();
    let mut same = summary_csv(&a.reports) == summary_csv(&b.reports) && raw_csv(&a.raw) == raw_csv(&b.raw);

    let inst = &insts[3];
    let dot = |seed| {
        let s = solve(inst, Algorithm::VNS, seed, &SolverParams::default()).unwrap();
        export_dot(inst, &s.tree, &s.schedule).unwrap()
    };
    same &= dot(5) == dot(5);
    let gls = |seed| {
        gls_trace_csv(
            &run_gls(inst, &GlsParams { seed, ..GlsParams::default() }, LocalSearch::ArcInversion).unwrap().trace,
            false,
        )
    };
    same &= gls(5) == gls(5);
    let vns = |seed| vns_trace_csv(&run_vns(inst, &VnsParams { seed, ..VnsParams::default() }).unwrap().trace, false);
    same &= vns(5) == vns(5);
    let detail = format!(
        "bench matrix ({} rows), DOT, GLS and VNS traces each produced twice: {}",
        a.reports.len(),
        if same { "byte-identical" } else { "differ" }
    );
    report(7, "determinism", same, &detail);
}

#[test]
fn c8_vns_runtime() {
    let inst = generate_instance(100, 0.3, 8).unwrap();
    let start = Instant::now();
    let r = run_vns(&inst, &VnsParams { seed: 8, ..VnsParams::default() }).unwrap();
    let t = start.elapsed();
    let valid = validate_schedule(&inst, &r.tree, &r.schedule).is_empty();
    let detail = format!(
        "n = 100, d = 0.3: L = {} (start {}), {:.2} s of {} s budget",
        r.length(),
        start_solution(&inst).1.length(),
        t.as_secs_f64(),
        VNS_BUDGET.as_secs()
    );
    report(8, "desk-scale VNS runtime", valid && t <= VNS_BUDGET, &detail);
}

/// `MLAS_ESTEIN10` overrides the location of the OR-Library file.
fn estein10_path() -> Option<PathBuf> {
    let p = std::env::var_os("MLAS_ESTEIN10")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/estein10.txt"));
    p.exists().then_some(p)
}

#[test]
fn c9_orlib_estein10() {
    let Some(path) = estein10_path() else {
        println!(
            "criterion 9 [SKIP] OR-Library estein10: file not supplied (set MLAS_ESTEIN10 or add data/estein10.txt)"
        );
        return;
    };
    let text = std::fs::read_to_string(&path).unwrap();
    let mut got = Vec::new();
    for nr in 1..=6 {
        let ps = load_orlib_case(&text, nr).unwrap();
        let inst = Instance::build(ps, 0.5).unwrap();
        got.push(exact_min_latency(&inst, 12).unwrap().length);
    }
    let pass = got.iter().all(|&l| l == ESTEIN10_OPT);
    report(
        9,
        "OR-Library estein10 optimum",
        pass,
        &format!("cases 1..=6 at d = 0.5: {got:?}, expected all {ESTEIN10_OPT}"),
    );
}
