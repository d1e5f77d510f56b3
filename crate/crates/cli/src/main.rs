use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mlas_core::bench::{
    export_dot, generate_instance, instance_label, load_instance_file, raw_csv, run_matrix, solve, summary_csv,
    Algorithm, BenchConfig, SolverParams,
};
use mlas_core::exact::exact_min_latency;
use mlas_core::scheduler::validate_schedule;
use mlas_core::{AggTree, FullSchedule, Instance, PointFormat};

/// Minimum-latency aggregation scheduling in unit disk graphs.
#[derive(Parser)]
#[command(name = "mlas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one instance.
    Solve(SolveArgs),
    /// Run an experiment matrix from a TOML config.
    Bench(BenchArgs),
    /// Exact minimum latency for a small instance.
    Exact(ExactArgs),
    /// Render a scheduled tree as Graphviz DOT.
    Render(RenderArgs),
    /// Generate a random connected instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Point file.
    #[arg(long)]
    instance: PathBuf,
    /// Point file format: `orlib` (count, then one `x y` pair per point) or `csv` (header `x,y`).
    #[arg(long, default_value = "orlib")]
    format: PointFormat,
    /// Transmission range.
    #[arg(long)]
    d: f64,
    /// Case number (1-based) inside a multi-case OR-Library file.
    #[arg(long)]
    case: Option<usize>,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        load_instance_file(&self.instance, self.format, self.d, self.case)
            .with_context(|| format!("loading {}", self.instance.display()))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// H1 (MLST), H2 (round heuristic), H3 (shortest paths), GLS1, GLS2, VNS or EXACT.
    #[arg(long, default_value = "VNS")]
    algo: Algorithm,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Parameter override, e.g. `gls.pop_size=30`; repeatable.
    #[arg(long = "params", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Write the schedule as JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a DOT rendering.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the search trace (GLS/VNS) as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Record wall times in the trace.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's repetition count.
    #[arg(long)]
    reps: Option<usize>,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for summary.csv and raw.csv; the summary goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall times.
    #[arg(long)]
    timing: bool,
    #[arg(long = "params", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Largest vertex count attempted.
    #[arg(long, default_value_t = mlas_core::exact::DEFAULT_LIMIT_N)]
    limit: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Schedule JSON as written by `solve`.
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "orlib")]
    format: PointFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Render(a) => cmd_render(a),
        Command::Gen(a) => cmd_gen(a),
    }
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let inst = a.instance.load()?;
    let mut params = SolverParams::default();
    for p in &a.params {
        params.set(p)?;
    }
    let s = solve(&inst, a.algo, a.seed, &params)?;
    let problems = validate_schedule(&inst, &s.tree, &s.schedule);
    if !problems.is_empty() {
        bail!("solver produced an invalid schedule: {}", problems[0]);
    }
    eprintln!("{} {}: L = {}", instance_label(&inst), a.algo, s.length());
    emit(a.out.as_deref(), &s.schedule.to_json())?;
    if let Some(p) = &a.dot {
        fs::write(p, export_dot(&inst, &s.tree, &s.schedule)?)?;
    }
    if let Some(p) = &a.trace {
        match s.trace.to_csv(a.timing) {
            Some(csv) => fs::write(p, csv)?,
            None => eprintln!("{} has no search trace; {} not written", a.algo, p.display()),
        }
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg = BenchConfig::from_toml(&text)?;
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.timing |= a.timing;
    let mut params = cfg.params();
    for p in &a.params {
        params.set(p)?;
    }
    cfg.gls = params.gls;
    cfg.vns = params.vns;
    cfg.exact_limit = params.exact_limit;

    let base = a.config.parent().unwrap_or(Path::new("."));
    let instances = cfg.load_instances(base)?;
    if instances.is_empty() {
        bail!("the config names no instances");
    }
    let out = run_matrix(&cfg, &instances)?;
    for note in &out.notes {
        eprintln!("note: {note}");
    }
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("summary.csv"), summary_csv(&out.reports))?;
            fs::write(dir.join("raw.csv"), raw_csv(&out.raw))?;
            eprintln!("wrote {} and {}", dir.join("summary.csv").display(), dir.join("raw.csv").display());
        }
        None => print!("{}", summary_csv(&out.reports)),
    }
    Ok(())
}

fn cmd_exact(a: ExactArgs) -> Result<()> {
    let inst = a.instance.load()?;
    let sol = exact_min_latency(&inst, a.limit)?;
    eprintln!("{}: optimum L = {}", instance_label(&inst), sol.length);
    emit(a.out.as_deref(), &sol.schedule.to_json())
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let inst = a.instance.load()?;
    let text = fs::read_to_string(&a.schedule).with_context(|| format!("reading {}", a.schedule.display()))?;
    let s = FullSchedule::from_json(inst.n(), &text).context("parsing schedule")?;
    let parents = (0..inst.n()).map(|v| s.recipient(v)).collect();
    let t = AggTree::from_parents(&inst, parents).context("schedule does not describe a spanning tree")?;
    emit(a.out.as_deref(), &export_dot(&inst, &t, &s)?)
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let inst = generate_instance(a.n, a.d, a.seed)?;
    let ps = inst.point_set();
    let text = match a.format {
        PointFormat::OrLib => ps.to_orlib(),
        PointFormat::Csv => ps.to_csv(),
    };
    emit(a.out.as_deref(), &text)
}
