//! Exact minimum latency for small instances.
//!
//! The search runs slot by slot over the set of vertices that have already
//! transmitted. A vertex picks its recipient when it transmits (any neighbor
//! that has not transmitted yet, or the sink), so trees and schedules are
//! searched jointly. States are visited breadth-first and each sent-set is
//! kept only at the earliest slot it is reached.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::builders;
use crate::instance::{Instance, Vertex};
use crate::scheduler::{ndr_schedule, FullSchedule};
use crate::tree::AggTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("instance has {n} vertices; the exact solver is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("state budget of {budget} exhausted")]
    Budget { budget: usize },
}

pub const DEFAULT_LIMIT_N: usize = 12;
pub const DEFAULT_STATE_BUDGET: usize = 5_000_000;

#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub length: u32,
    pub tree: AggTree,
    pub schedule: FullSchedule,
}

type Mask = u64;
/// Predecessor state and the (sender, receiver) pairs of the slot leading here.
type Pred = HashMap<Mask, (Mask, Vec<(Vertex, Vertex)>)>;

struct Search<'a> {
    inst: &'a Instance,
    sink: Vertex,
    nbr_mask: Vec<Mask>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance) -> Self {
        let nbr_mask = (0..inst.n()).map(|v| inst.neighbors(v).iter().fold(0, |m, &u| m | (1 << u))).collect();
        Search { inst, sink: inst.sink(), nbr_mask }
    }

    /// Lower bound on the slots still needed from `sent`, or `None` when some
    /// unsent vertex can no longer reach the sink.
    ///
    /// Two bounds: every remaining vertex needs at least its hop distance to
    /// the sink through unsent vertices; and senders in one slot need
    /// distinct receivers that are not themselves sending, so at most half of
    /// the remaining vertices (plus the sink) can finish per slot.
    fn lower_bound(&self, sent: Mask) -> Option<u32> {
        let n = self.inst.n();
        let open: Mask = !sent & ((1u64 << n) - 1);
        let mut dist_reached: Mask = 1 << self.sink;
        let mut frontier: Mask = 1 << self.sink;
        let mut hops = 0;
        while frontier != 0 {
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.nbr_mask[v];
            }
            next &= open & !dist_reached;
            if next == 0 {
                break;
            }
            hops += 1;
            dist_reached |= next;
            frontier = next;
        }
        if dist_reached != open {
            return None;
        }
        let remaining = open.count_ones() - 1;
        let halving = 32 - remaining.leading_zeros(); // ceil(log2(remaining + 1))
        Some(hops.max(halving))
    }

    /// All distinct nonempty sender sets feasible from `sent`, each with one
    /// receiver assignment.
    fn transitions(&self, sent: Mask) -> BTreeMap<Mask, Vec<(Vertex, Vertex)>> {
        let n = self.inst.n();
        let candidates: Vec<Vertex> = (0..n).filter(|&v| v != self.sink && sent & (1 << v) == 0).collect();
        let mut out = BTreeMap::new();
        let mut chosen = Vec::new();
        self.extend(sent, &candidates, 0, &mut chosen, &mut out);
        out
    }

    fn extend(
        &self,
        sent: Mask,
        cands: &[Vertex],
        i: usize,
        chosen: &mut Vec<(Vertex, Vertex)>,
        out: &mut BTreeMap<Mask, Vec<(Vertex, Vertex)>>,
    ) {
        if i == cands.len() {
            if !chosen.is_empty() {
                let m = chosen.iter().fold(0, |m, &(v, _)| m | (1u64 << v));
                out.entry(m).or_insert_with(|| chosen.clone());
            }
            return;
        }
        self.extend(sent, cands, i + 1, chosen, out);
        let v = cands[i];
        for &r in self.inst.neighbors(v) {
            if sent & (1 << r) != 0 {
                continue;
            }
            let ok = chosen.iter().all(|&(w, rw)| {
                v != rw && w != r && r != rw && !self.inst.adjacent(v, rw) && !self.inst.adjacent(w, r)
            });
            if ok {
                chosen.push((v, r));
                self.extend(sent, cands, i + 1, chosen, out);
                chosen.pop();
            }
        }
    }
}

/// Minimum schedule length over all aggregation trees and all feasible
/// schedules, with a witness. `limit_n` caps the instance size.
pub fn exact_min_latency(inst: &Instance, limit_n: usize) -> Result<ExactSolution, ExactError> {
    exact_min_latency_with_budget(inst, limit_n, DEFAULT_STATE_BUDGET)
}

pub fn exact_min_latency_with_budget(
    inst: &Instance,
    limit_n: usize,
    budget: usize,
) -> Result<ExactSolution, ExactError> {
    let n = inst.n();
    if n > limit_n || n > 63 {
        return Err(ExactError::TooLarge { n, limit: limit_n.min(63) });
    }
    let sink = inst.sink();
    if n == 1 {
        let tree = AggTree::from_parents_unchecked(inst, vec![None]);
        let schedule = FullSchedule::on_tree(&tree, vec![None]);
        return Ok(ExactSolution { length: 0, tree, schedule });
    }
    let search = Search::new(inst);
    let full: Mask = ((1u64 << n) - 1) & !(1 << sink);

    // Upper bound from the constructive heuristics prunes hopeless states.
    let upper = [builders::spt(inst), builders::round_heuristic(inst), builders::mlst(inst)]
        .iter()
        .map(|t| ndr_schedule(inst, t).1.length())
        .min()
        .unwrap();

    let mut pred: Pred = HashMap::new();
    pred.insert(0, (0, Vec::new()));
    let mut layer = vec![0 as Mask];
    let mut slot = 0u32;
    while !layer.is_empty() {
        slot += 1;
        let mut next = Vec::new();
        for &state in &layer {
            for (senders, assignment) in search.transitions(state) {
                let new_state = state | senders;
                let Entry::Vacant(e) = pred.entry(new_state) else { continue };
                let Some(lb) = search.lower_bound(new_state) else { continue };
                if slot + lb > upper {
                    continue;
                }
                e.insert((state, assignment));
                if new_state == full {
                    return Ok(reconstruct(inst, &pred, full, slot));
                }
                if pred.len() > budget {
                    return Err(ExactError::Budget { budget });
                }
                next.push(new_state);
            }
        }
        next.sort_unstable();
        layer = next;
    }
    unreachable!("the heuristic upper bound is attainable")
}

fn reconstruct(inst: &Instance, pred: &Pred, full: Mask, length: u32) -> ExactSolution {
    let n = inst.n();
    let mut send_slot = vec![None; n];
    let mut parent = vec![None; n];
    let mut state = full;
    let mut slot = length;
    while state != 0 {
        let (prev, assignment) = &pred[&state];
        for &(v, r) in assignment {
            send_slot[v] = Some(slot);
            parent[v] = Some(r);
        }
        state = *prev;
        slot -= 1;
    }
    let tree = AggTree::from_parents_unchecked(inst, parent);
    let schedule = FullSchedule::on_tree(&tree, send_slot);
    ExactSolution { length, tree, schedule }
}

pub const PRIMARY_LIMIT_N: usize = 10;

/// Minimum makespan on a fixed tree when only primary conflicts count, by
/// exhaustive breadth-first search over sent-sets. Independent of the
/// completion-value recursion in [`crate::latency`].
pub fn exact_min_primary_latency(t: &AggTree) -> Result<u32, ExactError> {
    let n = t.n();
    if n > PRIMARY_LIMIT_N {
        return Err(ExactError::TooLarge { n, limit: PRIMARY_LIMIT_N });
    }
    let root = t.root();
    let full: Mask = ((1u64 << n) - 1) & !(1 << root);
    let child_mask: Vec<Mask> = (0..n).map(|v| t.children(v).iter().fold(0, |m, &c| m | (1 << c))).collect();
    let mut seen = vec![false; 1 << n];
    seen[0] = true;
    let mut layer = vec![0 as Mask];
    let mut slot = 0;
    while !layer.is_empty() {
        if layer.contains(&full) {
            return Ok(slot);
        }
        slot += 1;
        let mut next = Vec::new();
        for &sent in &layer {
            let ready: Vec<Vertex> =
                (0..n).filter(|&v| v != root && sent & (1 << v) == 0 && child_mask[v] & !sent == 0).collect();
            // Every subset of ready vertices with pairwise distinct parents.
            for subset in 1u64..(1 << ready.len()) {
                let mut mask = 0;
                let mut parents: Mask = 0;
                let mut ok = true;
                for (k, &v) in ready.iter().enumerate() {
                    if subset & (1 << k) != 0 {
                        let p = t.parent(v).unwrap();
                        if parents & (1 << p) != 0 {
                            ok = false;
                            break;
                        }
                        parents |= 1 << p;
                        mask |= 1 << v;
                    }
                }
                let s = sent | mask;
                if ok && !seen[s as usize] {
                    seen[s as usize] = true;
                    next.push(s);
                }
            }
        }
        layer = next;
    }
    unreachable!("every tree can be scheduled")
}
