//! Variable neighborhood search over aggregation trees.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::builders::{mlst, round_heuristic, spt};
use crate::gls::{mutate_with_k, SearchError};
use crate::instance::Instance;
use crate::latency::LocalSearch;
use crate::scheduler::{ndr_schedule, FullSchedule};
use crate::tree::AggTree;
use crate::Rng64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VnsParams {
    pub k_max: usize,
    pub stall_limit: usize,
    pub seed: u64,
}

impl Default for VnsParams {
    fn default() -> Self {
        VnsParams { k_max: 30, stall_limit: 3, seed: 0 }
    }
}

impl VnsParams {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.k_max < 1 {
            return Err(SearchError::Params("k_max must be at least 1".into()));
        }
        if self.stall_limit < 1 {
            return Err(SearchError::Params("stall_limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// Descent order inside one shaken solution.
pub const DESCENT: [LocalSearch; 2] = [LocalSearch::BranchReattaching, LocalSearch::ArcInversion];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VnsTraceRow {
    pub outer_iteration: usize,
    pub k: usize,
    pub current_l: u32,
    pub best_l: u32,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct VnsResult {
    pub tree: AggTree,
    pub schedule: FullSchedule,
    /// Length of the starting solution.
    pub start_length: u32,
    pub trace: Vec<VnsTraceRow>,
}

impl VnsResult {
    pub fn length(&self) -> u32 {
        self.schedule.length()
    }
}

pub fn vns_trace_csv(rows: &[VnsTraceRow], timing: bool) -> String {
    let mut s = String::from("outer_iteration,K,current_L,best_L,elapsed_ms\n");
    for r in rows {
        let ms = if timing { r.elapsed_ms } else { 0.0 };
        let _ = writeln!(s, "{},{},{},{},{:.3}", r.outer_iteration, r.k, r.current_l, r.best_l, ms);
    }
    s
}

/// Best of the MLST, round-heuristic and shortest-path trees under NDR
/// (earliest in that order on ties).
pub fn start_solution(inst: &Instance) -> (AggTree, FullSchedule) {
    [mlst(inst), round_heuristic(inst), spt(inst)]
        .iter()
        .map(|t| ndr_schedule(inst, t))
        .reduce(|best, x| if x.1.length() < best.1.length() { x } else { best })
        .expect("three candidates")
}

pub fn run_vns(inst: &Instance, p: &VnsParams) -> Result<VnsResult, SearchError> {
    let mut rng = Rng64::seed_from_u64(p.seed);
    run_vns_with_rng(inst, p, &mut rng)
}

pub fn run_vns_with_rng<R: Rng + ?Sized>(
    inst: &Instance,
    p: &VnsParams,
    rng: &mut R,
) -> Result<VnsResult, SearchError> {
    p.validate()?;
    let clock = crate::Stopwatch::start();
    let (mut tree, mut schedule) = start_solution(inst);
    let start_length = schedule.length();
    let mut trace = Vec::new();
    let mut stall = 0;
    let mut outer = 0;
    while stall < p.stall_limit {
        outer += 1;
        let before = schedule.length();
        let mut k = 0;
        while k <= p.k_max {
            let shaken = mutate_with_k(inst, &tree, k, rng);
            let (cand, cand_s) = descend(inst, &shaken);
            let current_l = cand_s.length();
            let shaken_with = k;
            if current_l < schedule.length() {
                tree = cand;
                schedule = cand_s;
                k = 1;
            } else {
                k += 1;
            }
            trace.push(VnsTraceRow {
                outer_iteration: outer,
                k: shaken_with,
                current_l,
                best_l: schedule.length(),
                elapsed_ms: clock.elapsed_ms(),
            });
        }
        if schedule.length() < before {
            stall = 0;
        } else {
            stall += 1;
        }
    }
    Ok(VnsResult { tree, schedule, start_length, trace })
}

/// Variable neighborhood descent: cycle through [`DESCENT`], restarting from
/// the first search after every improvement.
fn descend(inst: &Instance, t: &AggTree) -> (AggTree, FullSchedule) {
    let (mut cur, mut cur_s) = ndr_schedule(inst, t);
    let mut l = 0;
    while l < DESCENT.len() {
        let (next, next_s) = ndr_schedule(inst, &DESCENT[l].apply(inst, &cur));
        if next_s.length() < cur_s.length() {
            cur = next;
            cur_s = next_s;
            l = 0;
        } else {
            l += 1;
        }
    }
    (cur, cur_s)
}
