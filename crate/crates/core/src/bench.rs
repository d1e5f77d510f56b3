//! Experiment harness: algorithm dispatch, run matrices, summary statistics,
//! CSV and DOT output, and random instance generation.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builders::{mlst, round_heuristic, spt};
use crate::exact::{exact_min_latency, ExactError, DEFAULT_LIMIT_N};
use crate::gls::{gls_trace_csv, run_gls, GlsParams, GlsTraceRow, SearchError};
use crate::instance::{load_orlib_case, load_points, Instance, InstanceError, Point, PointFormat, PointSet};
use crate::latency::LocalSearch;
use crate::scheduler::{ndr_schedule, validate_schedule, FullSchedule};
use crate::tree::AggTree;
use crate::vns::{run_vns, vns_trace_csv, VnsParams, VnsTraceRow};
use crate::{Rng64, Stopwatch};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("config: {0}")]
    Config(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no connected instance with n = {n}, d = {d} after {tries} draws; try a larger d")]
    Disconnected { n: usize, d: f64, tries: usize },
    #[error("invalid schedule from {algorithm} on {instance_id} (seed {seed}): {violations}\nschedule: {dump}")]
    Invalid { instance_id: String, algorithm: Algorithm, seed: u64, violations: String, dump: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Algorithm {
    H1,
    H2,
    H3,
    GLS1,
    GLS2,
    VNS,
    EXACT,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::H1,
        Algorithm::H2,
        Algorithm::H3,
        Algorithm::GLS1,
        Algorithm::GLS2,
        Algorithm::VNS,
        Algorithm::EXACT,
    ];

    /// Randomized algorithms are repeated once per seed; the others run once.
    pub fn is_randomized(self) -> bool {
        matches!(self, Algorithm::GLS1 | Algorithm::GLS2 | Algorithm::VNS)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::H1 => "H1",
            Algorithm::H2 => "H2",
            Algorithm::H3 => "H3",
            Algorithm::GLS1 => "GLS1",
            Algorithm::GLS2 => "GLS2",
            Algorithm::VNS => "VNS",
            Algorithm::EXACT => "EXACT",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.to_ascii_uppercase();
        let alias = match up.as_str() {
            "MLST" => "H1",
            "RH" => "H2",
            "SPT" => "H3",
            other => other,
        };
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == alias)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected one of H1 H2 H3 GLS1 GLS2 VNS EXACT)"))
    }
}

impl TryFrom<String> for Algorithm {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Algorithm> for String {
    fn from(a: Algorithm) -> String {
        a.name().to_string()
    }
}

/// Tunables shared by every algorithm call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub gls: GlsParams,
    pub vns: VnsParams,
    pub exact_limit: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { gls: GlsParams::default(), vns: VnsParams::default(), exact_limit: DEFAULT_LIMIT_N }
    }
}

impl SolverParams {
    /// Applies one `key=value` override such as `gls.pop_size=30`,
    /// `vns.k_max=10` or `exact_limit=10`.
    pub fn set(&mut self, assignment: &str) -> Result<(), BenchError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| BenchError::Config(format!("expected key=value, got `{assignment}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |e: &dyn fmt::Display| BenchError::Config(format!("{key}: {e}"));
        macro_rules! parse {
            () => {
                value.parse().map_err(|e| bad(&e))?
            };
        }
        match key {
            "gls.pop_size" => self.gls.pop_size = parse!(),
            "gls.offsp_size" => self.gls.offsp_size = parse!(),
            "gls.fp_it_count" => self.gls.fp_it_count = parse!(),
            "gls.sp_proportion" => self.gls.sp_proportion = parse!(),
            "gls.pm" => self.gls.pm = parse!(),
            "gls.pls" => self.gls.pls = parse!(),
            "gls.k_max" => self.gls.k_max = parse!(),
            "gls.stall_limit" => self.gls.stall_limit = parse!(),
            "vns.k_max" => self.vns.k_max = parse!(),
            "vns.stall_limit" => self.vns.stall_limit = parse!(),
            "exact_limit" => self.exact_limit = parse!(),
            _ => return Err(BenchError::Config(format!("unknown parameter `{key}`"))),
        }
        Ok(())
    }
}

/// Search trace of a metaheuristic run.
#[derive(Debug, Clone, Default)]
pub enum Trace {
    #[default]
    None,
    Gls(Vec<GlsTraceRow>),
    Vns(Vec<VnsTraceRow>),
}

impl Trace {
    /// CSV text, or `None` for algorithms without a trace.
    pub fn to_csv(&self, timing: bool) -> Option<String> {
        match self {
            Trace::None => None,
            Trace::Gls(rows) => Some(gls_trace_csv(rows, timing)),
            Trace::Vns(rows) => Some(vns_trace_csv(rows, timing)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub tree: AggTree,
    pub schedule: FullSchedule,
    pub trace: Trace,
}

impl Solved {
    pub fn length(&self) -> u32 {
        self.schedule.length()
    }
}

/// Runs one algorithm. `seed` only matters for the randomized ones.
pub fn solve(inst: &Instance, algo: Algorithm, seed: u64, params: &SolverParams) -> Result<Solved, BenchError> {
    let heuristic = |t: AggTree| {
        let (tree, schedule) = ndr_schedule(inst, &t);
        Solved { tree, schedule, trace: Trace::None }
    };
    Ok(match algo {
        Algorithm::H1 => heuristic(mlst(inst)),
        Algorithm::H2 => heuristic(round_heuristic(inst)),
        Algorithm::H3 => heuristic(spt(inst)),
        Algorithm::GLS1 | Algorithm::GLS2 => {
            let ls = if algo == Algorithm::GLS1 { LocalSearch::ArcInversion } else { LocalSearch::BranchReattaching };
            let r = run_gls(inst, &GlsParams { seed, ..params.gls.clone() }, ls)?;
            Solved { tree: r.tree, schedule: r.schedule, trace: Trace::Gls(r.trace) }
        }
        Algorithm::VNS => {
            let r = run_vns(inst, &VnsParams { seed, ..params.vns.clone() })?;
            Solved { tree: r.tree, schedule: r.schedule, trace: Trace::Vns(r.trace) }
        }
        Algorithm::EXACT => {
            let r = exact_min_latency(inst, params.exact_limit)?;
            Solved { tree: r.tree, schedule: r.schedule, trace: Trace::None }
        }
    })
}

/// Checks a produced solution independently of the solver that made it.
pub fn check_solution(
    inst: &Instance,
    instance_id: &str,
    algorithm: Algorithm,
    seed: u64,
    s: &Solved,
) -> Result<(), BenchError> {
    let mut problems: Vec<String> = Vec::new();
    if let Err(e) = s.tree.validate(inst) {
        problems.push(e.to_string());
    }
    problems.extend(validate_schedule(inst, &s.tree, &s.schedule).iter().map(|v| v.to_string()));
    if problems.is_empty() {
        return Ok(());
    }
    Err(BenchError::Invalid {
        instance_id: instance_id.to_string(),
        algorithm,
        seed,
        violations: problems.join("; "),
        dump: s.schedule.to_json(),
    })
}

/// Uniform points in the unit square, redrawn until the unit disk graph at
/// range `d` is connected.
pub fn generate_instance(n: usize, d: f64, seed: u64) -> Result<Instance, BenchError> {
    const TRIES: usize = 1000;
    if n < 2 {
        return Err(BenchError::Config(format!("generated instances need n >= 2, got {n}")));
    }
    let mut rng = Rng64::seed_from_u64(seed);
    for _ in 0..TRIES {
        let pts: Vec<Point> = (0..n).map(|_| Point::new(rng.gen::<f64>(), rng.gen::<f64>())).collect();
        let Ok(ps) = PointSet::new(pts, format!("gen-n{n}-s{seed}")) else { continue };
        match Instance::build(ps, d) {
            Ok(inst) => return Ok(inst),
            Err(InstanceError::Disconnected { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(BenchError::Disconnected { n, d, tries: TRIES })
}

/// Reads a point file and builds the instance at range `d`. With `case`, the
/// file is an OR-Library collection and that case (1-based) is taken.
pub fn load_instance_file(
    path: &Path,
    format: PointFormat,
    d: f64,
    case: Option<usize>,
) -> Result<Instance, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ps = match case {
        Some(nr) => load_orlib_case(&text, nr)?.with_source_id(format!("{stem}#{nr}")),
        None => load_points(&text, format)?.with_source_id(stem),
    };
    Ok(Instance::build(ps, d)?)
}

/// Identifier used in reports: source, vertex count and range.
pub fn instance_label(inst: &Instance) -> String {
    format!("{}/n={}/d={}", inst.id(), inst.n(), inst.d())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: String,
    pub d: f64,
    /// 1-based case number inside a multi-case OR-Library file.
    pub case: Option<usize>,
}

fn default_format() -> String {
    "orlib".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub d: f64,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

/// Experiment configuration, read from TOML. See the README for the syntax.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Record wall times; off by default so that reruns are byte-identical.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub grid: Vec<GridSpec>,
    #[serde(default)]
    pub gls: GlsParams,
    #[serde(default)]
    pub vns: VnsParams,
    #[serde(default = "default_exact_limit")]
    pub exact_limit: usize,
}

fn default_reps() -> usize {
    20
}

fn default_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

fn default_exact_limit() -> usize {
    DEFAULT_LIMIT_N
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn params(&self) -> SolverParams {
        SolverParams { gls: self.gls.clone(), vns: self.vns.clone(), exact_limit: self.exact_limit }
    }

    /// Loads file instances (relative to `base`) and generates the grid.
    pub fn load_instances(&self, base: &Path) -> Result<Vec<Instance>, BenchError> {
        let mut out = Vec::new();
        for spec in &self.instances {
            let format: PointFormat =
                spec.format.parse().map_err(|e: InstanceError| BenchError::Config(e.to_string()))?;
            out.push(load_instance_file(&base.join(&spec.path), format, spec.d, spec.case)?);
        }
        for g in &self.grid {
            for i in 0..g.count {
                out.push(generate_instance(g.n, g.d, self.seed.wrapping_add(i as u64))?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawRun {
    pub instance_id: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub sl: u32,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance_id: String,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub sl_best: u32,
    pub sl_av: f64,
    pub sl_sd: f64,
    pub opt_pct: Option<f64>,
    pub time_av_s: f64,
}

impl RunReport {
    /// Aggregates the runs of one (instance, algorithm) cell. `sl_sd` is the
    /// sample standard deviation (0 for a single run).
    pub fn from_runs(runs: &[RawRun], optimum: Option<u32>) -> RunReport {
        let k = runs.len();
        assert!(k > 0, "a report needs at least one run");
        let sls: Vec<f64> = runs.iter().map(|r| f64::from(r.sl)).collect();
        let mean = sls.iter().sum::<f64>() / k as f64;
        let sd =
            if k > 1 { (sls.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt() } else { 0.0 };
        RunReport {
            instance_id: runs[0].instance_id.clone(),
            algorithm: runs[0].algorithm,
            runs: k,
            sl_best: runs.iter().map(|r| r.sl).min().unwrap(),
            sl_av: mean,
            sl_sd: sd,
            opt_pct: optimum.map(|opt| 100.0 * runs.iter().filter(|r| r.sl == opt).count() as f64 / k as f64),
            time_av_s: runs.iter().map(|r| r.time_s).sum::<f64>() / k as f64,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MatrixOutput {
    pub reports: Vec<RunReport>,
    pub raw: Vec<RawRun>,
    /// Cells that were skipped, e.g. EXACT above its size limit.
    pub notes: Vec<String>,
}

struct Cell<'a> {
    inst: &'a Instance,
    id: String,
    algorithm: Algorithm,
    seed: u64,
}

/// Runs every configured algorithm on every instance. Every solution is
/// re-validated; the first invalid one aborts the matrix.
pub fn run_matrix(config: &BenchConfig, instances: &[Instance]) -> Result<MatrixOutput, BenchError> {
    if config.reps == 0 {
        return Err(BenchError::Config("reps must be at least 1".into()));
    }
    let params = config.params();
    params.gls.validate()?;
    params.vns.validate()?;
    let mut out = MatrixOutput::default();
    let mut cells = Vec::new();
    for inst in instances {
        let id = instance_label(inst);
        for &algorithm in &config.algorithms {
            if algorithm == Algorithm::EXACT && inst.n() > params.exact_limit {
                out.notes.push(format!("{id}: EXACT skipped (n = {} > limit {})", inst.n(), params.exact_limit));
                continue;
            }
            let reps = if algorithm.is_randomized() { config.reps } else { 1 };
            for r in 0..reps {
                cells.push(Cell { inst, id: id.clone(), algorithm, seed: config.seed.wrapping_add(r as u64) });
            }
        }
    }

    let run = |c: &Cell| -> Result<Option<RawRun>, BenchError> {
        let clock = Stopwatch::start();
        let solved = match solve(c.inst, c.algorithm, c.seed, &params) {
            Ok(s) => s,
            Err(BenchError::Exact(ExactError::Budget { .. })) => return Ok(None),
            Err(e) => return Err(e),
        };
        let secs = clock.elapsed_ms() / 1e3;
        check_solution(c.inst, &c.id, c.algorithm, c.seed, &solved)?;
        Ok(Some(RawRun {
            instance_id: c.id.clone(),
            algorithm: c.algorithm,
            seed: c.seed,
            sl: solved.length(),
            time_s: if config.timing { secs } else { 0.0 },
        }))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        cells.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = cells.iter().map(run).collect();

    for (c, r) in cells.iter().zip(results) {
        match r? {
            Some(raw) => out.raw.push(raw),
            None => out.notes.push(format!("{}: EXACT skipped (state budget exhausted)", c.id)),
        }
    }

    for inst in instances {
        let id = instance_label(inst);
        let optimum = out.raw.iter().find(|r| r.instance_id == id && r.algorithm == Algorithm::EXACT).map(|r| r.sl);
        for &algorithm in &config.algorithms {
            let runs: Vec<RawRun> =
                out.raw.iter().filter(|r| r.instance_id == id && r.algorithm == algorithm).cloned().collect();
            if !runs.is_empty() {
                out.reports.push(RunReport::from_runs(&runs, optimum));
            }
        }
    }
    Ok(out)
}

pub fn summary_csv(reports: &[RunReport]) -> String {
    let mut s = String::from("instance_id,algorithm,runs,sl_best,sl_av,sl_sd,opt_pct,time_av_s\n");
    for r in reports {
        let opt = r.opt_pct.map(|p| format!("{p:.1}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{:.3},{:.3},{},{:.4}",
            r.instance_id, r.algorithm, r.runs, r.sl_best, r.sl_av, r.sl_sd, opt, r.time_av_s
        );
    }
    s
}

pub fn raw_csv(raw: &[RawRun]) -> String {
    let mut s = String::from("instance_id,algorithm,seed,sl,time_s\n");
    for r in raw {
        let _ = writeln!(s, "{},{},{},{},{:.4}", r.instance_id, r.algorithm, r.seed, r.sl, r.time_s);
    }
    s
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

/// Color shared by all arcs of a slot.
pub fn slot_color(slot: u32) -> &'static str {
    PALETTE[(slot.saturating_sub(1) as usize) % PALETTE.len()]
}

/// DOT digraph of a scheduled tree: nodes pinned at their coordinates, arcs
/// labeled and colored by slot. Refuses schedules that do not validate.
pub fn export_dot(inst: &Instance, t: &AggTree, s: &FullSchedule) -> Result<String, BenchError> {
    check_solution(
        inst,
        inst.id(),
        Algorithm::H3,
        0,
        &Solved { tree: t.clone(), schedule: s.clone(), trace: Trace::None },
    )
    .map_err(|e| match e {
        BenchError::Invalid { violations, dump, .. } => {
            BenchError::Config(format!("refusing to render an invalid schedule: {violations}\nschedule: {dump}"))
        }
        other => other,
    })?;
    let mut out = String::from("digraph aggregation {\n  node [shape=circle, fontsize=10];\n");
    for v in 0..inst.n() {
        let p = inst.point(v);
        let shape = if v == inst.sink() { ", shape=doublecircle" } else { "" };
        let _ = writeln!(out, "  {v} [pos=\"{:.4},{:.4}!\"{shape}];", p.x * 10.0, p.y * 10.0);
    }
    for e in s.entries() {
        let slot = e.slot;
        let _ = writeln!(out, "  {} -> {} [label=\"{slot}\", color=\"{}\"];", e.vertex, e.parent, slot_color(slot));
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::tests::inst;

    fn path(n: usize) -> Instance {
        let pts: Vec<(f64, f64)> = (0..n).map(|i| (0.5 + 0.05 * i as f64, 0.5)).collect();
        inst(&pts, 0.051)
    }

    fn quick() -> SolverParams {
        let mut p = SolverParams::default();
        p.gls.pop_size = 10;
        p.gls.offsp_size = 5;
        p.vns.k_max = 4;
        p
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("spt".parse::<Algorithm>().unwrap(), Algorithm::H3);
        assert!("GLS3".parse::<Algorithm>().is_err());
    }

    #[test]
    fn path_matrix_is_flat() {
        let cfg = BenchConfig { reps: 20, gls: quick().gls, vns: quick().vns, ..BenchConfig::from_toml("").unwrap() };
        let out = run_matrix(&cfg, &[path(6)]).unwrap();
        assert_eq!(out.reports.len(), 7);
        for r in &out.reports {
            assert_eq!(r.sl_best, 5);
            assert_eq!(r.sl_av, 5.0);
            assert_eq!(r.sl_sd, 0.0);
            assert_eq!(r.opt_pct, Some(100.0));
            let expected_runs = if r.algorithm.is_randomized() { 20 } else { 1 };
            assert_eq!(r.runs, expected_runs);
        }
    }

    #[test]
    fn report_statistics() {
        let runs: Vec<RawRun> = [18, 19, 19, 20]
            .iter()
            .map(|&sl| RawRun { instance_id: "x".into(), algorithm: Algorithm::VNS, seed: 0, sl, time_s: 0.0 })
            .collect();
        let r = RunReport::from_runs(&runs, Some(18));
        assert_eq!(r.sl_best, 18);
        assert_eq!(r.sl_av, 19.0);
        // Sample variance: (1 + 0 + 0 + 1) / 3.
        assert!((r.sl_sd - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(r.opt_pct, Some(25.0));
    }

    #[test]
    fn generated_instances() {
        for seed in 0..100 {
            let i = generate_instance(10, 0.5, seed).unwrap();
            assert_eq!(i.n(), 10);
        }
        let a = generate_instance(20, 0.4, 7).unwrap();
        let b = generate_instance(20, 0.4, 7).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert!(matches!(generate_instance(2, 0.0001, 1), Err(BenchError::Disconnected { .. })));
    }

    #[test]
    fn dot_for_two_vertices() {
        let i = inst(&[(0.5, 0.5), (0.6, 0.5)], 0.2);
        let s = solve(&i, Algorithm::H3, 0, &quick()).unwrap();
        let dot = export_dot(&i, &s.tree, &s.schedule).unwrap();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("1 -> 0 [label=\"1\""));
        assert_eq!(dot.matches("->").count(), 1);
    }

    #[test]
    fn dot_colors_follow_slots() {
        let i = generate_instance(15, 0.45, 3).unwrap();
        let s = solve(&i, Algorithm::H2, 0, &quick()).unwrap();
        let dot = export_dot(&i, &s.tree, &s.schedule).unwrap();
        for line in dot.lines().filter(|l| l.contains("->")) {
            let slot: u32 = line.split("label=\"").nth(1).unwrap().split('"').next().unwrap().parse().unwrap();
            assert!(line.contains(slot_color(slot)));
        }
    }

    #[test]
    fn dot_refuses_invalid_schedule() {
        let i = inst(&[(0.5, 0.5), (0.55, 0.5), (0.45, 0.5)], 0.2);
        let s = solve(&i, Algorithm::H3, 0, &quick()).unwrap();
        // Both leaves into the sink in one slot.
        let bad = FullSchedule::on_tree(&s.tree, vec![None, Some(1), Some(1)]);
        assert!(export_dot(&i, &s.tree, &bad).is_err());
    }

    #[test]
    fn config_parses() {
        let cfg = BenchConfig::from_toml(
            r#"
            seed = 5
            reps = 3
            algorithms = ["H1", "VNS", "exact"]
            [[grid]]
            n = 8
            d = 0.5
            count = 2
            [gls]
            pop_size = 20
            [vns]
            k_max = 6
            "#,
        )
        .unwrap();
        assert_eq!(cfg.algorithms, vec![Algorithm::H1, Algorithm::VNS, Algorithm::EXACT]);
        assert_eq!(cfg.gls.pop_size, 20);
        assert_eq!(cfg.gls.offsp_size, 20);
        assert_eq!(cfg.vns.k_max, 6);
        assert_eq!(cfg.load_instances(Path::new(".")).unwrap().len(), 2);
        assert!(BenchConfig::from_toml("reps = 2\nbogus = 1").is_err());
    }

    #[test]
    fn params_override() {
        let mut p = SolverParams::default();
        p.set("gls.pop_size=12").unwrap();
        p.set("vns.k_max = 7").unwrap();
        assert_eq!((p.gls.pop_size, p.vns.k_max), (12, 7));
        assert!(p.set("gls.nope=1").is_err());
        assert!(p.set("gls.pm=x").is_err());
    }

    #[test]
    fn matrix_output_is_reproducible() {
        let cfg = BenchConfig::from_toml(
            "seed = 2\nreps = 3\n[[grid]]\nn = 8\nd = 0.45\ncount = 2\n[gls]\npop_size = 10\n[vns]\nk_max = 4\n",
        )
        .unwrap();
        let insts = cfg.load_instances(Path::new(".")).unwrap();
        let a = run_matrix(&cfg, &insts).unwrap();
        let b = run_matrix(&cfg, &insts).unwrap();
        assert_eq!(summary_csv(&a.reports), summary_csv(&b.reports));
        assert_eq!(raw_csv(&a.raw), raw_csv(&b.raw));
        for r in &a.reports {
            let pct = r.opt_pct.unwrap();
            assert!((0.0..=100.0).contains(&pct));
            assert!(r.sl_best as f64 <= r.sl_av);
        }
    }
}
