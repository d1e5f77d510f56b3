//! Genetic local search over aggregation trees.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builders::{mlst, pick_weighted, random_min_degree, random_shortest_path, round_heuristic, spt};
use crate::instance::{Instance, Vertex};
use crate::latency::LocalSearch;
use crate::scheduler::{ndr_schedule, FullSchedule};
use crate::tree::AggTree;
use crate::Rng64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid parameter: {0}")]
    Params(String),
    #[error("selection needs at least two individuals, population has {0}")]
    Selection(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlsParams {
    pub pop_size: usize,
    pub offsp_size: usize,
    pub fp_it_count: usize,
    pub sp_proportion: f64,
    pub pm: f64,
    pub pls: f64,
    /// `0` means "derive from the instance": `max(1, n / 3)`.
    pub k_max: usize,
    pub stall_limit: usize,
    pub seed: u64,
}

impl Default for GlsParams {
    fn default() -> Self {
        GlsParams {
            pop_size: 50,
            offsp_size: 20,
            fp_it_count: 150,
            sp_proportion: 0.6,
            pm: 0.5,
            pls: 0.5,
            k_max: 0,
            stall_limit: 3,
            seed: 0,
        }
    }
}

impl GlsParams {
    /// Mutation radius cap for an instance with `n` vertices.
    pub fn k_max_for(&self, n: usize) -> usize {
        if self.k_max == 0 {
            (n / 3).max(1)
        } else {
            self.k_max
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let unit = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(SearchError::Params(format!("{name} = {x} is outside [0, 1]")))
            }
        };
        if self.pop_size < 3 {
            return Err(SearchError::Params(format!("pop_size = {} must be at least 3", self.pop_size)));
        }
        if self.offsp_size < 1 {
            return Err(SearchError::Params("offsp_size must be at least 1".into()));
        }
        if self.stall_limit < 1 {
            return Err(SearchError::Params("stall_limit must be at least 1".into()));
        }
        unit("sp_proportion", self.sp_proportion)?;
        unit("pm", self.pm)?;
        unit("pls", self.pls)
    }
}

#[derive(Debug, Clone)]
pub struct Individual {
    pub tree: AggTree,
    pub schedule: FullSchedule,
    pub full_length: u32,
    pub fitness: f64,
    /// Generation in which the individual was created (0 = initial population).
    pub born: usize,
}

impl Individual {
    /// Schedules `t` with NDR; the stored tree is the one NDR returns.
    pub fn evaluate(inst: &Instance, t: &AggTree, born: usize) -> Self {
        let (tree, schedule) = ndr_schedule(inst, t);
        let full_length = schedule.length();
        Individual { tree, schedule, full_length, fitness: 1.0 / f64::from(full_length), born }
    }
}

fn evaluate_all(inst: &Instance, trees: &[AggTree], born: usize) -> Vec<Individual> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        trees.par_iter().map(|t| Individual::evaluate(inst, t, born)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        trees.iter().map(|t| Individual::evaluate(inst, t, born)).collect()
    }
}

pub fn initialize_population<R: Rng + ?Sized>(inst: &Instance, p: &GlsParams, rng: &mut R) -> Vec<Individual> {
    let mut seen: HashSet<Vec<Option<Vertex>>> = HashSet::new();
    let mut trees = Vec::new();
    let mut push = |t: AggTree, trees: &mut Vec<AggTree>| {
        if seen.insert(t.parents().to_vec()) {
            trees.push(t);
        }
    };
    for t in [spt(inst), round_heuristic(inst), mlst(inst)] {
        push(t, &mut trees);
    }
    for _ in 0..p.fp_it_count {
        if trees.len() >= p.pop_size {
            break;
        }
        let t = if rng.gen::<f64>() < p.sp_proportion {
            random_shortest_path(inst, rng)
        } else {
            random_min_degree(inst, rng)
        };
        push(t, &mut trees);
    }
    evaluate_all(inst, &trees, 0)
}

/// Index pairs drawn by fitness-proportional roulette: the first from the
/// whole population, the second from the rest.
pub fn select_pairs<R: Rng + ?Sized>(
    pop: &[Individual],
    count: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>, SearchError> {
    if pop.len() < 2 {
        return Err(SearchError::Selection(pop.len()));
    }
    let fitness: Vec<f64> = pop.iter().map(|i| i.fitness).collect();
    Ok(select_pairs_by_fitness(&fitness, count, rng))
}

pub(crate) fn select_pairs_by_fitness<R: Rng + ?Sized>(
    fitness: &[f64],
    count: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut rest = fitness.to_vec();
    (0..count)
        .map(|_| {
            let a = pick_weighted(fitness, rng);
            rest[a] = 0.0;
            let b = pick_weighted(&rest, rng);
            rest[a] = fitness[a];
            (a, b)
        })
        .collect()
}

/// Stand-in for `1/0` in [`crossover_weight`].
pub const WEIGHT_CAP: f64 = 1e6;

/// Preference for parent candidate `v_i` of `v`: inverse tree degree plus
/// closeness of the level gap to two.
pub fn crossover_weight(tree_degree: usize, level_v: u32, level_vi: u32) -> f64 {
    let gap = (i64::from(level_v) - i64::from(level_vi) - 2).unsigned_abs();
    let second = if gap == 0 { WEIGHT_CAP } else { 1.0 / gap as f64 };
    1.0 / tree_degree.max(1) as f64 + second
}

/// Whether making `x` the parent of `v` closes a cycle in the partial map.
fn closes_cycle(parent: &[Option<Vertex>], v: Vertex, x: Vertex) -> bool {
    let mut w = x;
    loop {
        if w == v {
            return true;
        }
        match parent[w] {
            Some(p) => w = p,
            None => return false,
        }
    }
}

/// Child tree mixing the parent maps of `t1` and `t2`. Vertices are processed
/// by increasing hop level, then id.
pub fn crossover<R: Rng + ?Sized>(inst: &Instance, t1: &AggTree, t2: &AggTree, rng: &mut R) -> AggTree {
    let n = inst.n();
    let mut order: Vec<Vertex> = (0..n).filter(|&v| v != inst.sink()).collect();
    order.sort_by_key(|&v| (inst.level(v), v));
    let mut parent: Vec<Option<Vertex>> = vec![None; n];
    for &v in &order {
        let v1 = t1.parent(v).expect("non-root");
        let v2 = t2.parent(v).expect("non-root");
        let ok1 = !closes_cycle(&parent, v, v1);
        let ok2 = !closes_cycle(&parent, v, v2);
        let pick = match (ok1, ok2) {
            (true, _) if v1 == v2 => Some(v1),
            (true, false) => Some(v1),
            (false, true) => Some(v2),
            (true, true) => {
                let w1 = crossover_weight(t1.tree_degree(v1), inst.level(v), inst.level(v1));
                let w2 = crossover_weight(t2.tree_degree(v2), inst.level(v), inst.level(v2));
                Some(if rng.gen::<f64>() * (w1 + w2) < w1 { v1 } else { v2 })
            }
            (false, false) => {
                let mut nb = inst.neighbors(v).to_vec();
                nb.sort_by_key(|&u| (inst.level(u), u));
                nb.into_iter().find(|&u| !closes_cycle(&parent, v, u))
            }
        };
        match pick {
            Some(u) => parent[v] = Some(u),
            None => repair(inst, &mut parent, &order, v),
        }
    }
    AggTree::from_parents_unchecked(inst, parent)
}

/// Every neighbor of `v` leads back to `v`: re-hang `v` and everything that
/// currently hangs below it on strictly shallower neighbors, which cannot cycle.
fn repair(inst: &Instance, parent: &mut [Option<Vertex>], order: &[Vertex], v: Vertex) {
    let below: Vec<Vertex> =
        order.iter().copied().filter(|&x| x != v && parent[x].is_some() && closes_cycle(parent, v, x)).collect();
    for x in std::iter::once(v).chain(below) {
        let lower = inst.neighbors(x).iter().copied().find(|&u| inst.level(u) + 1 == inst.level(x));
        parent[x] = lower;
    }
}

/// Draws a mutation radius in `1..=k_max` with probability proportional to `1/k`.
pub fn draw_radius<R: Rng + ?Sized>(k_max: usize, rng: &mut R) -> usize {
    let weights: Vec<f64> = (1..=k_max.max(1)).map(|k| 1.0 / k as f64).collect();
    pick_weighted(&weights, rng) + 1
}

/// Mutation with a random radius (see [`draw_radius`]).
pub fn mutate<R: Rng + ?Sized>(inst: &Instance, t: &AggTree, k_max: usize, rng: &mut R) -> AggTree {
    let k = draw_radius(k_max, rng);
    mutate_with_k(inst, t, k, rng)
}

/// Exactly `k` attempts: draw an arc `(v, u)` outside the tree and reattach `v`
/// to `u` unless `u` lies in `v`'s subtree.
pub fn mutate_with_k<R: Rng + ?Sized>(inst: &Instance, t: &AggTree, k: usize, rng: &mut R) -> AggTree {
    let mut out = t.clone();
    let m = inst.arc_count();
    if m < inst.n() {
        // Every arc is a tree arc.
        return out;
    }
    for _ in 0..k {
        let (v, u) = loop {
            let (v, u) = inst.arc_at(rng.gen_range(0..m));
            if out.parent(v) != Some(u) {
                break (v, u);
            }
        };
        if !out.is_descendant(u, v) {
            out.set_parent(v, u);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlsTraceRow {
    pub generation: usize,
    pub best_l: u32,
    pub mean_l: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct GlsResult {
    pub tree: AggTree,
    pub schedule: FullSchedule,
    pub trace: Vec<GlsTraceRow>,
}

impl GlsResult {
    pub fn length(&self) -> u32 {
        self.schedule.length()
    }
}

/// Trace as CSV. Elapsed times are written as 0 unless `timing` is set, so
/// that seeded runs produce identical files.
pub fn gls_trace_csv(rows: &[GlsTraceRow], timing: bool) -> String {
    let mut s = String::from("generation,best_L,mean_L,elapsed_ms\n");
    for r in rows {
        let ms = if timing { r.elapsed_ms } else { 0.0 };
        let _ = writeln!(s, "{},{},{:.4},{:.3}", r.generation, r.best_l, r.mean_l, ms);
    }
    s
}

/// Runs GLS seeded from `p.seed`.
pub fn run_gls(inst: &Instance, p: &GlsParams, ls: LocalSearch) -> Result<GlsResult, SearchError> {
    let mut rng = Rng64::seed_from_u64(p.seed);
    run_gls_with_rng(inst, p, ls, &mut rng)
}

pub fn run_gls_with_rng<R: Rng + ?Sized>(
    inst: &Instance,
    p: &GlsParams,
    ls: LocalSearch,
    rng: &mut R,
) -> Result<GlsResult, SearchError> {
    p.validate()?;
    let clock = crate::Stopwatch::start();
    let k_max = p.k_max_for(inst.n());
    let mut pop = initialize_population(inst, p, rng);
    sort_population(&mut pop);
    let mut trace = vec![trace_row(0, &pop, &clock)];
    let mut best = pop[0].full_length;
    let mut stall = 0;
    let mut generation = 0;
    while stall < p.stall_limit {
        generation += 1;
        if pop.len() >= 2 {
            let fitness: Vec<f64> = pop.iter().map(|i| i.fitness).collect();
            let pairs = select_pairs_by_fitness(&fitness, p.offsp_size, rng);
            let mut children = Vec::with_capacity(pairs.len());
            for (a, b) in pairs {
                let mut child = crossover(inst, &pop[a].tree, &pop[b].tree, rng);
                if rng.gen::<f64>() < p.pm {
                    child = mutate(inst, &child, k_max, rng);
                }
                let search = rng.gen::<f64>() < p.pls;
                children.push((child, search));
            }
            let offspring = develop(inst, ls, &children, generation);
            pop.extend(offspring);
            sort_population(&mut pop);
            pop.truncate(p.pop_size);
        }
        trace.push(trace_row(generation, &pop, &clock));
        if pop[0].full_length < best {
            best = pop[0].full_length;
            stall = 0;
        } else {
            stall += 1;
        }
    }
    let top = pop.swap_remove(0);
    Ok(GlsResult { tree: top.tree, schedule: top.schedule, trace })
}

/// Local search (where drawn) and NDR evaluation of the offspring. Consumes no randomness.
fn develop(inst: &Instance, ls: LocalSearch, children: &[(AggTree, bool)], born: usize) -> Vec<Individual> {
    let one = |(t, search): &(AggTree, bool)| {
        if *search {
            Individual::evaluate(inst, &ls.apply(inst, t), born)
        } else {
            Individual::evaluate(inst, t, born)
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        children.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        children.iter().map(one).collect()
    }
}

/// Best first: shorter schedule, then newer, then lexicographic parent map.
fn sort_population(pop: &mut [Individual]) {
    pop.sort_by(|a, b| {
        a.full_length.cmp(&b.full_length).then(b.born.cmp(&a.born)).then_with(|| a.tree.parents().cmp(b.tree.parents()))
    });
}

fn trace_row(generation: usize, pop: &[Individual], clock: &crate::Stopwatch) -> GlsTraceRow {
    let sum: u64 = pop.iter().map(|i| u64::from(i.full_length)).sum();
    GlsTraceRow {
        generation,
        best_l: pop[0].full_length,
        mean_l: sum as f64 / pop.len() as f64,
        elapsed_ms: clock.elapsed_ms(),
    }
}
