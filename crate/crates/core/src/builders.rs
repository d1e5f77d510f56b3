//! Constructive aggregation-tree heuristics.

use rand::Rng;

use crate::instance::{Instance, Vertex};
use crate::tree::AggTree;

/// Shortest-path tree: each vertex attaches to its lowest-id neighbor one hop
/// closer to the sink.
pub fn spt(inst: &Instance) -> AggTree {
    let parent = (0..inst.n())
        .map(|v| {
            if v == inst.sink() {
                return None;
            }
            inst.neighbors(v).iter().copied().find(|&u| inst.level(u) + 1 == inst.level(v))
        })
        .collect();
    AggTree::from_parents_unchecked(inst, parent)
}

/// Shortest-path tree with each parent drawn uniformly among the neighbors
/// one hop closer to the sink.
pub fn random_shortest_path<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> AggTree {
    let mut candidates = Vec::new();
    let parent = (0..inst.n())
        .map(|v| {
            if v == inst.sink() {
                return None;
            }
            candidates.clear();
            candidates.extend(inst.neighbors(v).iter().copied().filter(|&u| inst.level(u) + 1 == inst.level(v)));
            Some(candidates[rng.gen_range(0..candidates.len())])
        })
        .collect();
    AggTree::from_parents_unchecked(inst, parent)
}

/// Selection weight of a tree vertex in [`random_min_degree`]: inverse of its
/// current tree degree, with degree floored at 1.
pub fn min_degree_weight(tree_degree: usize) -> f64 {
    1.0 / tree_degree.max(1) as f64
}

/// Index drawn with probability proportional to `weights`.
pub(crate) fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    // Rounding can leave x marginally above the last bucket.
    weights.iter().rposition(|&w| w > 0.0).expect("at least one positive weight")
}

/// Random tree grown from the sink. Each step picks a frontier arc `(v, u)`
/// (`u` in the tree, `v` outside) with probability proportional to
/// [`min_degree_weight`] of `u`.
pub fn random_min_degree<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> AggTree {
    let n = inst.n();
    let mut in_tree = vec![false; n];
    let mut parent = vec![None; n];
    let mut degree = vec![0usize; n];
    // Number of neighbors outside the tree, for tree vertices.
    let mut outside = vec![0usize; n];
    let mut members = vec![inst.sink()];
    in_tree[inst.sink()] = true;
    outside[inst.sink()] = inst.degree(inst.sink());
    let mut weights = Vec::with_capacity(n);
    for _ in 1..n {
        // Two-stage draw: tree vertex by total arc weight, then a uniform outside neighbor.
        weights.clear();
        weights.extend(members.iter().map(|&u| outside[u] as f64 * min_degree_weight(degree[u])));
        let u = members[pick_weighted(&weights, rng)];
        let k = rng.gen_range(0..outside[u]);
        let v = inst.neighbors(u).iter().copied().filter(|&w| !in_tree[w]).nth(k).unwrap();

        in_tree[v] = true;
        parent[v] = Some(u);
        degree[u] += 1;
        degree[v] = 1;
        members.push(v);
        for &w in inst.neighbors(v) {
            if in_tree[w] {
                outside[w] -= 1;
            } else {
                outside[v] += 1;
            }
        }
    }
    AggTree::from_parents_unchecked(inst, parent)
}

/// Round-based reverse broadcast. In each round every vertex informed before
/// the round adopts at most one uninformed neighbor; uninformed vertices with
/// the fewest informed neighbors choose first, each taking the available
/// informed neighbor with the fewest children.
pub fn round_heuristic(inst: &Instance) -> AggTree {
    let n = inst.n();
    let mut informed = vec![false; n];
    let mut parent = vec![None; n];
    let mut child_count = vec![0usize; n];
    informed[inst.sink()] = true;
    let mut remaining = n - 1;
    let mut busy = vec![false; n];
    while remaining > 0 {
        let mut candidates: Vec<(usize, Vertex)> = (0..n)
            .filter(|&v| !informed[v])
            .filter_map(|v| {
                let k = inst.neighbors(v).iter().filter(|&&u| informed[u]).count();
                (k > 0).then_some((k, v))
            })
            .collect();
        candidates.sort_unstable();
        busy.iter_mut().for_each(|b| *b = false);
        let mut adopted = Vec::new();
        for (_, v) in candidates {
            let choice = inst
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| informed[u] && !busy[u])
                .min_by_key(|&u| (child_count[u], u));
            if let Some(u) = choice {
                busy[u] = true;
                parent[v] = Some(u);
                child_count[u] += 1;
                adopted.push(v);
            }
        }
        debug_assert!(!adopted.is_empty(), "a connected graph always has a frontier");
        for v in adopted {
            informed[v] = true;
            remaining -= 1;
        }
    }
    AggTree::from_parents_unchecked(inst, parent)
}

/// Cost of attaching a new child to a tree vertex in [`mlst`].
pub fn mlst_cost(depth: u32, child_count: usize) -> usize {
    depth as usize + child_count
}

/// Greedy tree grown from the sink, each step adding the frontier arc whose
/// receiver has the smallest depth + child count. Ties go to the lowest new
/// vertex id, then the lowest receiver id.
pub fn mlst(inst: &Instance) -> AggTree {
    let n = inst.n();
    let mut in_tree = vec![false; n];
    let mut parent = vec![None; n];
    let mut depth = vec![0u32; n];
    let mut child_count = vec![0usize; n];
    let mut members = vec![inst.sink()];
    in_tree[inst.sink()] = true;
    for _ in 1..n {
        let mut best: Option<(usize, Vertex, Vertex)> = None;
        for &u in &members {
            let cost = mlst_cost(depth[u], child_count[u]);
            if best.is_some_and(|(c, _, _)| cost > c) {
                continue;
            }
            if let Some(&v) = inst.neighbors(u).iter().find(|&&v| !in_tree[v]) {
                let key = (cost, v, u);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        let (_, v, u) = best.expect("connected graph has a frontier arc");
        in_tree[v] = true;
        parent[v] = Some(u);
        depth[v] = depth[u] + 1;
        child_count[u] += 1;
        members.push(v);
    }
    AggTree::from_parents_unchecked(inst, parent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::tests::inst;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path4() -> Instance {
        inst(&[(0.5, 0.5), (0.6, 0.5), (0.7, 0.5), (0.8, 0.5)], 0.11)
    }

    fn star4() -> Instance {
        // Leaves are pairwise farther apart than d, all within d of the center.
        inst(&[(0.5, 0.5), (0.6, 0.5), (0.4, 0.5), (0.5, 0.6)], 0.1001)
    }

    fn all_builders(i: &Instance) -> Vec<AggTree> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        vec![spt(i), round_heuristic(i), mlst(i), random_shortest_path(i, &mut rng), random_min_degree(i, &mut rng)]
    }

    #[test]
    fn path_and_star_are_forced() {
        let p = path4();
        for t in all_builders(&p) {
            assert_eq!(t.parents(), &[None, Some(0), Some(1), Some(2)]);
        }
        let s = star4();
        for t in all_builders(&s) {
            assert_eq!(t.parents(), &[None, Some(0), Some(0), Some(0)]);
        }
    }

    #[test]
    fn seeded_builders_are_deterministic() {
        let i = inst(&[(0.5, 0.5), (0.55, 0.5), (0.5, 0.55), (0.45, 0.5), (0.6, 0.6), (0.4, 0.4)], 0.12);
        let a = random_min_degree(&i, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_min_degree(&i, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        let a = random_shortest_path(&i, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_shortest_path(&i, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn min_degree_frequencies() {
        // Three single-arc candidates whose tree vertices have degree 1, 2, 4.
        let weights: Vec<f64> = [1, 2, 4].iter().map(|&d| min_degree_weight(d)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 10_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[pick_weighted(&weights, &mut rng)] += 1;
        }
        for (k, p) in [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0].iter().enumerate() {
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            let dev = (counts[k] as f64 - draws as f64 * p).abs();
            assert!(dev <= 3.0 * sigma, "bucket {k}: {} vs {}", counts[k], draws as f64 * p);
        }
        assert_eq!(min_degree_weight(0), 1.0);
    }

    #[test]
    fn mlst_prefers_cheaper_receiver() {
        assert!(mlst_cost(1, 0) < mlst_cost(1, 2));
        assert_eq!(mlst_cost(1, 2), 3);
        // Sink with two neighbors a, b and four outer vertices reachable from
        // both; MLST spreads them instead of piling onto a.
        let i = inst(&[(0.5, 0.5), (0.45, 0.5), (0.55, 0.5), (0.5, 0.58), (0.5, 0.42), (0.5, 0.6), (0.5, 0.4)], 0.1);
        let t = mlst(&i);
        assert!(t.children(1).len().abs_diff(t.children(2).len()) <= 1 || t.children(0).len() > 2);
    }

    #[test]
    fn shortest_path_builders_follow_levels() {
        let i = inst(&[(0.5, 0.5), (0.55, 0.5), (0.5, 0.55), (0.6, 0.55), (0.65, 0.6), (0.45, 0.45)], 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in [spt(&i), random_shortest_path(&i, &mut rng)] {
            assert_eq!(t.depths(), i.levels());
        }
    }
}
