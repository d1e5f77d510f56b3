//! Aggregation trees: rooted spanning trees of the communication graph whose
//! arcs point from each vertex to the neighbor it transmits to.

use std::fmt;

use thiserror::Error;

use crate::instance::{Instance, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("infeasible move: {0}")]
    Feasibility(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("trees span different instances")]
    InstanceMismatch,
    #[error("invalid tree: {0}")]
    Invalid(String),
}

/// A spanning tree rooted at the sink, stored as a parent map plus sorted
/// children lists.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AggTree {
    root: Vertex,
    parent: Vec<Option<Vertex>>,
    children: Vec<Vec<Vertex>>,
    instance: u64,
}

impl fmt::Debug for AggTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AggTree").field("root", &self.root).field("parent", &self.parent).finish()
    }
}

fn insert_sorted(list: &mut Vec<Vertex>, v: Vertex) {
    let pos = list.binary_search(&v).unwrap_or_else(|p| p);
    list.insert(pos, v);
}

fn remove_sorted(list: &mut Vec<Vertex>, v: Vertex) {
    if let Ok(pos) = list.binary_search(&v) {
        list.remove(pos);
    }
}

impl AggTree {
    /// Builds and validates a tree from a parent map. `parent[sink]` must be `None`.
    pub fn from_parents(inst: &Instance, parent: Vec<Option<Vertex>>) -> Result<Self, TreeError> {
        let n = inst.n();
        if parent.len() != n {
            return Err(TreeError::Invalid(format!("parent map has {} entries, expected {n}", parent.len())));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(TreeError::Invalid(format!("parent {p} of {v} out of range")));
                }
                children[p].push(v);
            }
        }
        let t = AggTree { root: inst.sink(), parent, children, instance: inst.fingerprint() };
        t.validate(inst)?;
        Ok(t)
    }

    /// Unchecked constructor for callers that build a parent map known to be valid.
    pub(crate) fn from_parents_unchecked(inst: &Instance, parent: Vec<Option<Vertex>>) -> Self {
        let mut children = vec![Vec::new(); inst.n()];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(v);
            }
        }
        let t = AggTree { root: inst.sink(), parent, children, instance: inst.fingerprint() };
        debug_assert_eq!(t.validate(inst), Ok(()));
        t
    }

    /// Checks every structural invariant against `inst`.
    pub fn validate(&self, inst: &Instance) -> Result<(), TreeError> {
        let n = inst.n();
        if self.instance != inst.fingerprint() {
            return Err(TreeError::InstanceMismatch);
        }
        if self.parent.len() != n || self.children.len() != n {
            return Err(TreeError::Invalid("size does not match the instance".into()));
        }
        if self.root != inst.sink() || self.parent[self.root].is_some() {
            return Err(TreeError::Invalid("root must be the sink and have no parent".into()));
        }
        for v in 0..n {
            if v == self.root {
                continue;
            }
            let Some(p) = self.parent[v] else {
                return Err(TreeError::Invalid(format!("vertex {v} has no parent")));
            };
            if !inst.adjacent(v, p) {
                return Err(TreeError::Invalid(format!("({v}, {p}) is not an edge")));
            }
            if self.children[p].binary_search(&v).is_err() {
                return Err(TreeError::Invalid(format!("{v} missing from children of {p}")));
            }
        }
        for (p, list) in self.children.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(TreeError::Invalid(format!("children of {p} not sorted")));
            }
            if list.iter().any(|&c| self.parent[c] != Some(p)) {
                return Err(TreeError::Invalid(format!("children of {p} disagree with parent map")));
            }
        }
        // Every vertex must reach the root; mark vertices by walking chains.
        let mut state = vec![0u8; n]; // 0 unseen, 1 on current chain, 2 reaches root
        state[self.root] = 2;
        for start in 0..n {
            let mut v = start;
            let mut chain = Vec::new();
            while state[v] == 0 {
                state[v] = 1;
                chain.push(v);
                v = self.parent[v].expect("non-root has a parent");
            }
            if state[v] == 1 {
                return Err(TreeError::Invalid(format!("cycle through vertex {v}")));
            }
            for c in chain {
                state[c] = 2;
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<Vertex>] {
        &self.parent
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    /// Number of incident tree edges (children plus the parent link).
    pub fn tree_degree(&self, v: Vertex) -> usize {
        self.children[v].len() + usize::from(self.parent[v].is_some())
    }

    pub fn instance_fingerprint(&self) -> u64 {
        self.instance
    }

    /// True iff `a` lies in the subtree rooted at `b` (reflexive).
    pub fn is_descendant(&self, a: Vertex, b: Vertex) -> bool {
        let mut v = a;
        loop {
            if v == b {
                return true;
            }
            match self.parent[v] {
                Some(p) => v = p,
                None => return false,
            }
        }
    }

    /// Lowest common ancestor of `a` and `b`.
    pub fn lca(&self, a: Vertex, b: Vertex) -> Vertex {
        let depth = |mut v: Vertex| {
            let mut d = 0;
            while let Some(p) = self.parent[v] {
                v = p;
                d += 1;
            }
            d
        };
        let (mut a, mut b) = (a, b);
        let (mut da, mut db) = (depth(a), depth(b));
        while da > db {
            a = self.parent[a].unwrap();
            da -= 1;
        }
        while db > da {
            b = self.parent[b].unwrap();
            db -= 1;
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    /// Tree depth of every vertex (root at 0).
    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.n()];
        for v in self.preorder() {
            if let Some(p) = self.parent[v] {
                depth[v] = depth[p] + 1;
            }
        }
        depth
    }

    /// Vertices in preorder from the root, children in ascending id.
    pub fn preorder(&self) -> Vec<Vertex> {
        let mut order = Vec::with_capacity(self.n());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        order
    }

    /// Vertices with every child listed before its parent.
    pub fn postorder(&self) -> Vec<Vertex> {
        let mut order = self.preorder();
        order.reverse();
        order
    }

    /// Entry/exit times of a DFS; `b` is an ancestor-or-self of `a` iff
    /// `tin[b] <= tin[a] && tout[a] <= tout[b]`.
    pub fn euler_tour(&self) -> EulerTour {
        let n = self.n();
        let mut tin = vec![0u32; n];
        let mut tout = vec![0u32; n];
        let mut clock = 0u32;
        let mut stack = vec![(self.root, 0usize)];
        tin[self.root] = clock;
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            if *idx < self.children[v].len() {
                let c = self.children[v][*idx];
                *idx += 1;
                clock += 1;
                tin[c] = clock;
                stack.push((c, 0));
            } else {
                tout[v] = clock;
                stack.pop();
            }
        }
        EulerTour { tin, tout }
    }

    pub(crate) fn set_parent(&mut self, v: Vertex, new_parent: Vertex) {
        if let Some(old) = self.parent[v] {
            remove_sorted(&mut self.children[old], v);
        }
        self.parent[v] = Some(new_parent);
        insert_sorted(&mut self.children[new_parent], v);
    }

    fn check_reattach(&self, inst: &Instance, v: Vertex, new_parent: Vertex) -> Result<(), TreeError> {
        if v == self.root {
            return Err(TreeError::Precondition("the root cannot be reattached".into()));
        }
        if !inst.adjacent(v, new_parent) {
            return Err(TreeError::Feasibility(format!("({v}, {new_parent}) is not an edge")));
        }
        if self.is_descendant(new_parent, v) {
            return Err(TreeError::Feasibility(format!("{new_parent} lies in the subtree of {v}")));
        }
        Ok(())
    }

    /// Moves `v` (with its subtree) under `new_parent`, in place.
    pub fn reattach_mut(&mut self, inst: &Instance, v: Vertex, new_parent: Vertex) -> Result<(), TreeError> {
        self.check_reattach(inst, v, new_parent)?;
        self.set_parent(v, new_parent);
        Ok(())
    }

    /// Copy of the tree with `v` moved under `new_parent`.
    pub fn reattach(&self, inst: &Instance, v: Vertex, new_parent: Vertex) -> Result<AggTree, TreeError> {
        let mut t = self.clone();
        t.reattach_mut(inst, v, new_parent)?;
        Ok(t)
    }

    fn check_invert(&self, inst: &Instance, v: Vertex, p_star: Vertex) -> Result<Vertex, TreeError> {
        if v == self.root {
            return Err(TreeError::Precondition("the root has no arc to invert".into()));
        }
        let p = self.parent[v].expect("non-root has a parent");
        if p == self.root {
            return Err(TreeError::Precondition(format!("{v} is a child of the root")));
        }
        if !inst.adjacent(v, p_star) {
            return Err(TreeError::Feasibility(format!("({v}, {p_star}) is not an edge")));
        }
        // After the inversion the subtree of v contains everything formerly under p.
        if self.is_descendant(p_star, p) {
            return Err(TreeError::Feasibility(format!("{p_star} lies in the component cut off with {v}")));
        }
        Ok(p)
    }

    /// Inverts the arc `(v, p)`, drops `(p, parent(p))` and attaches `v` to `p_star`, in place.
    pub fn invert_and_reattach_mut(&mut self, inst: &Instance, v: Vertex, p_star: Vertex) -> Result<(), TreeError> {
        let p = self.check_invert(inst, v, p_star)?;
        let g = self.parent[p].expect("p is not the root");
        remove_sorted(&mut self.children[g], p);
        remove_sorted(&mut self.children[p], v);
        self.parent[p] = Some(v);
        insert_sorted(&mut self.children[v], p);
        self.parent[v] = Some(p_star);
        insert_sorted(&mut self.children[p_star], v);
        Ok(())
    }

    pub fn invert_and_reattach(&self, inst: &Instance, v: Vertex, p_star: Vertex) -> Result<AggTree, TreeError> {
        let mut t = self.clone();
        t.invert_and_reattach_mut(inst, v, p_star)?;
        Ok(t)
    }
}

/// DFS interval labels for O(1) ancestor queries.
#[derive(Debug, Clone)]
pub struct EulerTour {
    tin: Vec<u32>,
    tout: Vec<u32>,
}

impl EulerTour {
    /// Same contract as [`AggTree::is_descendant`].
    pub fn is_descendant(&self, a: Vertex, b: Vertex) -> bool {
        self.tin[b] <= self.tin[a] && self.tout[a] <= self.tout[b]
    }
}

/// Number of non-root vertices whose parents differ.
pub fn tree_distance(a: &AggTree, b: &AggTree) -> Result<usize, TreeError> {
    if a.instance != b.instance || a.n() != b.n() || a.root != b.root {
        return Err(TreeError::InstanceMismatch);
    }
    Ok(a.parent.iter().zip(&b.parent).filter(|(x, y)| x != y).count())
}
