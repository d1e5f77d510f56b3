//! Latency on a fixed tree when only primary conflicts count (siblings may not
//! transmit in the same slot). Also the incremental move evaluators and the two
//! local searches built on them.
//!
//! For a vertex `v` with children sorted by completion value `f` descending
//! (ties by lower id), `f(v) = max_i (f(c_i) + i)` with 1-based `i`, and
//! `f(leaf) = 0`. The earliest slot in which `v` may transmit is `f(v) + 1`,
//! and the makespan of the tree is `f(root)`.

use std::cell::Cell;

use crate::instance::{Instance, Vertex};
use crate::tree::{AggTree, TreeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimarySchedule {
    f: Vec<u32>,
    send_slot: Vec<Option<u32>>,
    makespan: u32,
}

impl PrimarySchedule {
    /// Completion value: the slot by which all of `v`'s children have transmitted.
    pub fn f(&self, v: Vertex) -> u32 {
        self.f[v]
    }

    pub fn completion(&self) -> &[u32] {
        &self.f
    }

    pub fn send_slot(&self, v: Vertex) -> Option<u32> {
        self.send_slot[v]
    }

    pub fn send_slots(&self) -> &[Option<u32>] {
        &self.send_slot
    }

    pub fn makespan(&self) -> u32 {
        self.makespan
    }
}

/// Completion value of a vertex whose children have the given `f` values.
/// Sorts `fs` in place (descending).
fn completion_of(fs: &mut [u32]) -> u32 {
    fs.sort_unstable_by(|a, b| b.cmp(a));
    fs.iter().enumerate().map(|(i, &f)| f + i as u32 + 1).max().unwrap_or(0)
}

/// Optimal schedule under primary conflicts only.
pub fn primary_schedule(t: &AggTree) -> PrimarySchedule {
    let n = t.n();
    let mut f = vec![0u32; n];
    let mut send_slot = vec![None; n];
    let mut order: Vec<Vertex> = Vec::new();
    let mut used: Vec<u32> = Vec::new();
    for v in t.postorder() {
        let kids = t.children(v);
        if kids.is_empty() {
            continue;
        }
        order.clear();
        order.extend_from_slice(kids);
        order.sort_by(|&a, &b| f[b].cmp(&f[a]).then(a.cmp(&b)));
        used.clear();
        let mut top = 0;
        for &c in &order {
            let mut slot = f[c] + 1;
            while used.contains(&slot) {
                slot += 1;
            }
            used.push(slot);
            send_slot[c] = Some(slot);
            top = top.max(slot);
        }
        f[v] = top;
    }
    let makespan = f[t.root()];
    PrimarySchedule { f, send_slot, makespan }
}

/// Evaluates single-move makespan changes against a fixed tree and its
/// primary schedule, touching only the affected root paths.
pub struct EffectEvaluator<'a> {
    tree: &'a AggTree,
    ps: &'a PrimarySchedule,
    touched: Cell<u64>,
    scratch: std::cell::RefCell<Vec<u32>>,
}

/// One pending structural change at a vertex on a root path.
#[derive(Clone, Copy)]
struct Edit {
    removed: Option<(Vertex, Vertex)>,
    added: Option<(Vertex, Vertex, u32)>,
}

impl<'a> EffectEvaluator<'a> {
    pub fn new(tree: &'a AggTree, ps: &'a PrimarySchedule) -> Self {
        EffectEvaluator { tree, ps, touched: Cell::new(0), scratch: Default::default() }
    }

    /// Total number of vertices whose completion value was recomputed so far.
    pub fn touched(&self) -> u64 {
        self.touched.get()
    }

    /// Recomputes `f(w)` with the edit applied and `overrides` for changed children.
    fn recompute(&self, w: Vertex, edit: Edit, overrides: &[(Vertex, u32)]) -> u32 {
        self.touched.set(self.touched.get() + 1);
        let mut fs = self.scratch.borrow_mut();
        fs.clear();
        for &c in self.tree.children(w) {
            if matches!(edit.removed, Some((at, rc)) if at == w && rc == c) {
                continue;
            }
            let val = overrides.iter().find(|(x, _)| *x == c).map(|&(_, f)| f).unwrap_or(self.ps.f[c]);
            fs.push(val);
        }
        if let Some((at, _, f)) = edit.added {
            if at == w {
                fs.push(f);
            }
        }
        completion_of(&mut fs)
    }

    /// Makespan after removing `child` from `at` only (the detached part is dropped).
    fn makespan_after_removal(&self, at: Vertex, child: Vertex) -> u32 {
        let edit = Edit { removed: Some((at, child)), added: None };
        let mut w = at;
        let mut val = self.recompute(w, edit, &[]);
        loop {
            if val == self.ps.f[w] {
                return self.ps.makespan;
            }
            match self.tree.parent(w) {
                None => return val,
                Some(p) => {
                    val = self.recompute(p, edit, &[(w, val)]);
                    w = p;
                }
            }
        }
    }

    /// Exact makespan after removing `removed_child` from `at_remove` and
    /// adding a child with completion `added_f` at `at_add`.
    fn makespan_after(&self, at_remove: Vertex, removed_child: Vertex, at_add: Vertex, added_f: u32) -> u32 {
        let t = self.tree;
        let edit = Edit { removed: Some((at_remove, removed_child)), added: Some((at_add, usize::MAX, added_f)) };
        let a = t.lca(at_remove, at_add);

        // Walk one side up to (excluding) the meeting vertex; returns the
        // changed child of `a` on that side, if any.
        let climb = |start: Vertex| -> Option<(Vertex, u32)> {
            if start == a {
                return None;
            }
            let mut w = start;
            let mut val = self.recompute(w, edit, &[]);
            loop {
                let p = t.parent(w).expect("below the meeting vertex");
                if val == self.ps.f[w] {
                    return None;
                }
                if p == a {
                    return Some((w, val));
                }
                val = self.recompute(p, edit, &[(w, val)]);
                w = p;
            }
        };
        let mut at_a: Vec<(Vertex, u32)> = Vec::with_capacity(2);
        at_a.extend(climb(at_remove));
        at_a.extend(climb(at_add));

        let mut w = a;
        let mut val = self.recompute(w, edit, &at_a);
        loop {
            if val == self.ps.f[w] {
                return self.ps.makespan;
            }
            match t.parent(w) {
                None => return val,
                Some(p) => {
                    val = self.recompute(p, edit, &[(w, val)]);
                    w = p;
                }
            }
        }
    }

    /// `L(T) - L(T')` for `T' = reattach(T, v, u)`. Caller guarantees feasibility.
    pub fn reattach_effect(&self, v: Vertex, u: Vertex) -> i64 {
        let p = self.tree.parent(v).expect("v is not the root");
        if p == u {
            return 0;
        }
        let after = self.makespan_after(p, v, u, self.ps.f[v]);
        i64::from(self.ps.makespan) - i64::from(after)
    }

    /// `max(0, L(T) - L(T'))`, returning early when detaching `v` alone
    /// cannot lower the makespan.
    pub fn reattach_gain(&self, v: Vertex, u: Vertex) -> i64 {
        let p = self.tree.parent(v).expect("v is not the root");
        if p == u || !self.detach_helps(v) {
            return 0;
        }
        self.reattach_effect(v, u).max(0)
    }

    /// Whether removing the subtree of `v` lowers the makespan at all. When it
    /// does not, no move that detaches `v` can improve the tree.
    pub fn detach_helps(&self, v: Vertex) -> bool {
        let p = self.tree.parent(v).expect("v is not the root");
        self.makespan_after_removal(p, v) < self.ps.makespan
    }

    /// `L(T) - L(T')` for `T' = invert_and_reattach(T, v, u)`. Caller guarantees feasibility.
    pub fn invert_effect(&self, v: Vertex, u: Vertex) -> i64 {
        let t = self.tree;
        let p = t.parent(v).expect("v is not the root");
        let g = t.parent(p).expect("p is not the root");
        // p loses v, then v gains p.
        let p_edit = Edit { removed: Some((p, v)), added: None };
        let f_p = self.recompute(p, p_edit, &[]);
        let v_edit = Edit { removed: None, added: Some((v, p, f_p)) };
        let f_v = self.recompute(v, v_edit, &[]);
        let after = self.makespan_after(g, p, u, f_v);
        i64::from(self.ps.makespan) - i64::from(after)
    }

    /// `max(0, invert_effect)`, returning early when cutting `p` from its
    /// parent alone cannot lower the makespan.
    pub fn invert_gain(&self, v: Vertex, u: Vertex) -> i64 {
        let p = self.tree.parent(v).expect("v is not the root");
        if !self.detach_helps(p) {
            return 0;
        }
        self.invert_effect(v, u).max(0)
    }
}

fn check_schedule_matches(t: &AggTree, ps: &PrimarySchedule) -> Result<(), TreeError> {
    if ps.f.len() != t.n() {
        return Err(TreeError::Precondition("schedule does not belong to this tree".into()));
    }
    Ok(())
}

/// `L(T) - L(T')` for moving `v` under `u`; positive means the move shortens the schedule.
pub fn reattaching_effect(
    inst: &Instance,
    t: &AggTree,
    ps: &PrimarySchedule,
    v: Vertex,
    u: Vertex,
) -> Result<i64, TreeError> {
    check_schedule_matches(t, ps)?;
    t.reattach(inst, v, u)?;
    Ok(EffectEvaluator::new(t, ps).reattach_effect(v, u))
}

/// `L(T) - L(T')` for [`AggTree::invert_and_reattach`]`(v, u)`.
pub fn arc_inversion_effect(
    inst: &Instance,
    t: &AggTree,
    ps: &PrimarySchedule,
    v: Vertex,
    u: Vertex,
) -> Result<i64, TreeError> {
    check_schedule_matches(t, ps)?;
    t.invert_and_reattach(inst, v, u)?;
    Ok(EffectEvaluator::new(t, ps).invert_effect(v, u))
}

/// Best-improvement descent over single-vertex reattachments. Restarts the
/// scan after every applied move and stops at a local optimum.
pub fn branch_reattaching_ls(inst: &Instance, t: &AggTree) -> AggTree {
    let mut t = t.clone();
    loop {
        let ps = primary_schedule(&t);
        let tour = t.euler_tour();
        let eval = EffectEvaluator::new(&t, &ps);
        let mut best = 0;
        let mut best_move = None;
        for w in 0..t.n() {
            if w == t.root() || !eval.detach_helps(w) {
                continue;
            }
            let parent = t.parent(w);
            for &p in inst.neighbors(w) {
                if Some(p) == parent || tour.is_descendant(p, w) {
                    continue;
                }
                let gain = eval.reattach_effect(w, p);
                if gain > best {
                    best = gain;
                    best_move = Some((w, p));
                }
            }
        }
        match best_move {
            Some((w, p)) => t.set_parent(w, p),
            None => return t,
        }
    }
}

/// Arc-inversion descent: for each vertex below the root's children, applies
/// its best strictly improving inversion, and sweeps until a full pass makes
/// no change.
pub fn arc_inversion_ls(inst: &Instance, t: &AggTree) -> AggTree {
    let mut t = t.clone();
    let mut improved = true;
    while improved {
        improved = false;
        for v in 0..t.n() {
            let Some(p) = t.parent(v) else { continue };
            if p == t.root() {
                continue;
            }
            let ps = primary_schedule(&t);
            let eval = EffectEvaluator::new(&t, &ps);
            if !eval.detach_helps(p) {
                continue;
            }
            let tour = t.euler_tour();
            let mut best = 0;
            let mut best_u = None;
            for &u in inst.neighbors(v) {
                if tour.is_descendant(u, p) {
                    continue;
                }
                let gain = eval.invert_effect(v, u);
                if gain > best {
                    best = gain;
                    best_u = Some(u);
                }
            }
            if let Some(u) = best_u {
                t.invert_and_reattach_mut(inst, v, u).expect("candidate was checked");
                improved = true;
            }
        }
    }
    t
}

/// The two primary-conflict local searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalSearch {
    ArcInversion,
    BranchReattaching,
}

impl LocalSearch {
    pub fn apply(self, inst: &Instance, t: &AggTree) -> AggTree {
        match self {
            LocalSearch::ArcInversion => arc_inversion_ls(inst, t),
            LocalSearch::BranchReattaching => branch_reattaching_ls(inst, t),
        }
    }
}
