//! Scheduling under the protocol interference model (interference range equal
//! to transmission range) and an independent validator for such schedules.
//!
//! A transmission `v -> p` in slot `t` succeeds iff no other vertex adjacent
//! to `p` transmits in `t` and `p` itself does not transmit in `t`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, Vertex};
use crate::tree::AggTree;

/// Per-vertex transmission slot and recipient. The sink has neither.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullSchedule {
    send_slot: Vec<Option<u32>>,
    recipient: Vec<Option<Vertex>>,
    length: u32,
}

/// One row of the JSON schedule dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub vertex: Vertex,
    pub parent: Vertex,
    pub slot: u32,
}

impl FullSchedule {
    pub fn new(send_slot: Vec<Option<u32>>, recipient: Vec<Option<Vertex>>) -> Self {
        let length = send_slot.iter().flatten().copied().max().unwrap_or(0);
        FullSchedule { send_slot, recipient, length }
    }

    /// Schedule that sends along `t`'s arcs at the given slots.
    pub fn on_tree(t: &AggTree, send_slot: Vec<Option<u32>>) -> Self {
        FullSchedule::new(send_slot, t.parents().to_vec())
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn slot(&self, v: Vertex) -> Option<u32> {
        self.send_slot[v]
    }

    pub fn recipient(&self, v: Vertex) -> Option<Vertex> {
        self.recipient[v]
    }

    pub fn slots(&self) -> &[Option<u32>] {
        &self.send_slot
    }

    pub fn entries(&self) -> Vec<ScheduleEntry> {
        let mut out: Vec<ScheduleEntry> = (0..self.send_slot.len())
            .filter_map(|v| Some(ScheduleEntry { vertex: v, parent: self.recipient[v]?, slot: self.send_slot[v]? }))
            .collect();
        out.sort_by_key(|e| (e.slot, e.vertex));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries()).expect("entries serialize")
    }

    /// Rebuilds a schedule over `n` vertices from JSON dump rows.
    pub fn from_json(n: usize, text: &str) -> Result<Self, serde_json::Error> {
        let entries: Vec<ScheduleEntry> = serde_json::from_str(text)?;
        let mut send_slot = vec![None; n];
        let mut recipient = vec![None; n];
        for e in entries {
            if e.vertex >= n || e.parent >= n {
                return Err(serde::de::Error::custom(format!(
                    "entry {} -> {} names a vertex outside 0..{n}",
                    e.vertex, e.parent
                )));
            }
            send_slot[e.vertex] = Some(e.slot);
            recipient[e.vertex] = Some(e.parent);
        }
        Ok(FullSchedule::new(send_slot, recipient))
    }
}

/// Whether two simultaneous transmissions `a -> ra` and `b -> rb` can coexist.
fn compatible(inst: &Instance, a: Vertex, ra: Vertex, b: Vertex, rb: Vertex) -> bool {
    a != rb && b != ra && ra != rb && !inst.adjacent(a, rb) && !inst.adjacent(b, ra)
}

/// Greedy slot-by-slot scheduler. Ready vertices (all children done) are
/// ranked by communication-graph degree, descending, then id, and packed into
/// the current slot while they stay conflict-free. A ready vertex blocked only
/// by interference at its receiver may switch to another not-yet-sent
/// neighbor whose own readiness is unaffected, if that lets it send now.
///
/// Returns the possibly modified tree and a schedule valid on it.
pub fn ndr_schedule(inst: &Instance, t: &AggTree) -> (AggTree, FullSchedule) {
    let n = inst.n();
    let root = t.root();
    let mut tree = t.clone();
    let mut send_slot: Vec<Option<u32>> = vec![None; n];
    let mut pending_children: Vec<usize> = (0..n).map(|v| tree.children(v).len()).collect();
    let mut ready: Vec<Vertex> = (0..n).filter(|&v| v != root && pending_children[v] == 0).collect();
    let by_rank = |a: &Vertex, b: &Vertex| inst.degree(*b).cmp(&inst.degree(*a)).then(a.cmp(b));
    let mut unsent = n - 1;
    let mut slot = 0u32;
    let mut senders: Vec<(Vertex, Vertex)> = Vec::new();
    let mut deferred: Vec<Vertex> = Vec::new();
    while unsent > 0 {
        slot += 1;
        ready.sort_by(by_rank);
        senders.clear();
        deferred.clear();
        for &v in &ready {
            let p = tree.parent(v).expect("non-root");
            if senders.iter().all(|&(w, rw)| compatible(inst, v, p, w, rw)) {
                senders.push((v, p));
            } else {
                deferred.push(v);
            }
        }
        // Supplementary pass: try alternative receivers for the deferred vertices.
        for &v in &deferred {
            let cur = tree.parent(v).expect("non-root");
            let alt = inst
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| u != cur && send_slot[u].is_none() && !senders.iter().any(|&(w, _)| w == u))
                .filter(|&u| u == root || tree.children(u).iter().any(|&c| c != v && send_slot[c].is_none()))
                .filter(|&u| !tree.is_descendant(u, v))
                .filter(|&u| senders.iter().all(|&(w, rw)| compatible(inst, v, u, w, rw)))
                .min_by_key(|&u| (inst.level(u), u));
            if let Some(u) = alt {
                tree.set_parent(v, u);
                pending_children[cur] -= 1;
                pending_children[u] += 1;
                if pending_children[cur] == 0 && cur != root {
                    // cur may now be ready; it joins the ready list next slot.
                    ready.push(cur);
                }
                senders.push((v, u));
            }
        }
        debug_assert!(!senders.is_empty());
        for &(v, _) in &senders {
            send_slot[v] = Some(slot);
            unsent -= 1;
        }
        ready.retain(|&v| send_slot[v].is_none());
        for &(_, p) in &senders {
            pending_children[p] -= 1;
            if pending_children[p] == 0 && p != root {
                ready.push(p);
            }
        }
        ready.sort_unstable();
        ready.dedup();
    }
    let schedule = FullSchedule::on_tree(&tree, send_slot);
    (tree, schedule)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// A non-sink vertex does not send, or the sink sends.
    SendOnce,
    /// Recipient differs from the tree parent, or is not adjacent.
    TreeConsistency,
    /// A vertex sends no later than one of its children.
    Ordering,
    /// Another transmitter is within range of a receiver in the same slot.
    ReceiverConflict,
    /// A vertex sends and receives in the same slot.
    HalfDuplex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub slot: Option<u32>,
    pub vertices: Vec<Vertex>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slot {
            Some(s) => write!(f, "{:?} in slot {s} involving {:?}", self.rule, self.vertices),
            None => write!(f, "{:?} involving {:?}", self.rule, self.vertices),
        }
    }
}

/// Checks a schedule against the tree and every interference condition.
/// An empty result means the schedule is feasible.
pub fn validate_schedule(inst: &Instance, t: &AggTree, s: &FullSchedule) -> Vec<Violation> {
    let n = inst.n();
    let mut out = Vec::new();
    if t.validate(inst).is_err() || s.send_slot.len() != n || s.recipient.len() != n {
        out.push(Violation { rule: Rule::TreeConsistency, slot: None, vertices: vec![] });
        return out;
    }
    let sink = inst.sink();
    for v in 0..n {
        let sends = s.send_slot[v].is_some_and(|x| x >= 1) && s.recipient[v].is_some();
        if (v == sink) == sends || (v != sink && s.send_slot[v] == Some(0)) {
            out.push(Violation { rule: Rule::SendOnce, slot: s.send_slot[v], vertices: vec![v] });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for v in (0..n).filter(|&v| v != sink) {
        let r = s.recipient[v].unwrap();
        if t.parent(v) != Some(r) || !inst.adjacent(v, r) {
            out.push(Violation { rule: Rule::TreeConsistency, slot: s.send_slot[v], vertices: vec![v, r] });
        }
    }
    for v in (0..n).filter(|&v| v != sink) {
        let sv = s.send_slot[v].unwrap();
        for &c in t.children(v) {
            if s.send_slot[c].unwrap() >= sv {
                out.push(Violation { rule: Rule::Ordering, slot: Some(sv), vertices: vec![c, v] });
            }
        }
    }
    let length = s.length;
    let mut by_slot: Vec<Vec<Vertex>> = vec![Vec::new(); length as usize + 1];
    for v in (0..n).filter(|&v| v != sink) {
        by_slot[s.send_slot[v].unwrap() as usize].push(v);
    }
    for (slot, senders) in by_slot.iter().enumerate() {
        let slot = slot as u32;
        let mut receivers: Vec<Vertex> = senders.iter().map(|&v| s.recipient[v].unwrap()).collect();
        receivers.sort_unstable();
        receivers.dedup();
        for &r in &receivers {
            let intended: Vec<Vertex> = senders.iter().copied().filter(|&v| s.recipient[v] == Some(r)).collect();
            let in_range: Vec<Vertex> = senders.iter().copied().filter(|&w| inst.adjacent(w, r)).collect();
            // A lone intended sender is fine; anything else in range interferes.
            if in_range.len() > 1 || intended.len() > 1 {
                let mut vs = vec![r];
                vs.extend(in_range.iter().chain(&intended));
                vs[1..].sort_unstable();
                vs.dedup();
                out.push(Violation { rule: Rule::ReceiverConflict, slot: Some(slot), vertices: vs });
            }
            if s.send_slot[r] == Some(slot) {
                out.push(Violation { rule: Rule::HalfDuplex, slot: Some(slot), vertices: vec![r] });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::tests::{inst, tree};

    #[test]
    fn star_serializes() {
        let i = inst(&[(0.5, 0.5), (0.6, 0.5), (0.4, 0.5), (0.5, 0.6)], 0.1001);
        let t = tree(&i, &[None, Some(0), Some(0), Some(0)]);
        let (t2, s) = ndr_schedule(&i, &t);
        assert_eq!(s.length(), 3);
        assert!(validate_schedule(&i, &t2, &s).is_empty());
    }

    #[test]
    fn path_is_a_chain() {
        let i = inst(&[(0.5, 0.5), (0.6, 0.5), (0.7, 0.5), (0.8, 0.5)], 0.11);
        let t = tree(&i, &[None, Some(0), Some(1), Some(2)]);
        let (t2, s) = ndr_schedule(&i, &t);
        assert_eq!(t2, t);
        assert_eq!(s.length(), 3);
        assert_eq!(s.slots(), &[None, Some(3), Some(2), Some(1)]);
        assert!(validate_schedule(&i, &t2, &s).is_empty());
    }

    #[test]
    fn siblings_in_one_slot_is_one_receiver_conflict() {
        let i = inst(&[(0.5, 0.5), (0.6, 0.5), (0.4, 0.5), (0.5, 0.6)], 0.1001);
        let t = tree(&i, &[None, Some(0), Some(0), Some(0)]);
        let s = FullSchedule::on_tree(&t, vec![None, Some(1), Some(1), Some(2)]);
        let v = validate_schedule(&i, &t, &s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].rule, Rule::ReceiverConflict);
        assert_eq!(v[0].slot, Some(1));
        assert_eq!(v[0].vertices, vec![0, 1, 2]);
    }

    #[test]
    fn parent_before_child_is_one_ordering_violation() {
        let i = inst(&[(0.5, 0.5), (0.6, 0.5), (0.7, 0.5)], 0.11);
        let t = tree(&i, &[None, Some(0), Some(1)]);
        let s = FullSchedule::on_tree(&t, vec![None, Some(1), Some(2)]);
        let v = validate_schedule(&i, &t, &s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].rule, Rule::Ordering);
    }

    #[test]
    fn interference_and_half_duplex_detected() {
        // 0 sink at center; 1 and 2 on opposite sides; 3 beyond 2.
        let i = inst(&[(0.5, 0.5), (0.41, 0.5), (0.59, 0.5), (0.68, 0.5)], 0.1);
        let t = tree(&i, &[None, Some(0), Some(0), Some(2)]);
        // 3 -> 2 while 2 -> 0: half duplex at 2.
        let s = FullSchedule::on_tree(&t, vec![None, Some(2), Some(1), Some(1)]);
        let v = validate_schedule(&i, &t, &s);
        assert!(v.iter().any(|x| x.rule == Rule::HalfDuplex));
        assert!(v.iter().any(|x| x.rule == Rule::Ordering));
        // 1 -> 0 and 3 -> 2 together: 1 and 3 are out of each other's receivers' range.
        let s = FullSchedule::on_tree(&t, vec![None, Some(1), Some(2), Some(1)]);
        assert!(validate_schedule(&i, &t, &s).is_empty());
    }

    #[test]
    fn sink_sending_is_flagged() {
        let i = inst(&[(0.5, 0.5), (0.6, 0.5)], 0.11);
        let t = tree(&i, &[None, Some(0)]);
        let s = FullSchedule::new(vec![Some(1), Some(1)], vec![Some(1), Some(0)]);
        assert_eq!(validate_schedule(&i, &t, &s)[0].rule, Rule::SendOnce);
    }

    #[test]
    fn json_round_trip() {
        let i = inst(&[(0.5, 0.5), (0.6, 0.5), (0.7, 0.5)], 0.11);
        let t = tree(&i, &[None, Some(0), Some(1)]);
        let (_, s) = ndr_schedule(&i, &t);
        let back = FullSchedule::from_json(3, &s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(s.to_json().contains("\"slot\""));
    }
}
