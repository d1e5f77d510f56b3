//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Everything crosses the boundary as JSON text. The `*_json` functions are
//! plain Rust so they can be tested natively; the `#[wasm_bindgen]` wrappers
//! only turn errors into JS exceptions.

use mlas_core::bench::{generate_instance, solve, Algorithm, SolverParams, Trace};
use mlas_core::{Instance, Point, PointSet};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Serialize, Deserialize)]
pub struct Graph {
    pub points: Vec<[f64; 2]>,
    pub sink: usize,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Serialize)]
pub struct Solution {
    pub algorithm: String,
    pub length: u32,
    pub parent: Vec<Option<usize>>,
    pub slot: Vec<Option<u32>>,
    /// Incumbent length per generation (GLS) or per shake (VNS).
    pub progress: Vec<u32>,
}

fn build(points: &[[f64; 2]], d: f64) -> Result<Instance, String> {
    let pts = points.iter().map(|&[x, y]| Point::new(x, y)).collect();
    let ps = PointSet::new(pts, "demo").map_err(|e| e.to_string())?;
    Instance::build(ps, d).map_err(|e| e.to_string())
}

fn graph_of(inst: &Instance) -> Graph {
    Graph {
        points: inst.point_set().points().iter().map(|p| [p.x, p.y]).collect(),
        sink: inst.sink(),
        edges: (0..inst.n())
            .flat_map(|u| inst.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| [u, v]))
            .collect(),
    }
}

/// Random connected instance as a [`Graph`].
pub fn generate_json(n: usize, d: f64, seed: u64) -> Result<String, String> {
    let inst = generate_instance(n, d, seed).map_err(|e| e.to_string())?;
    serde_json::to_string(&graph_of(&inst)).map_err(|e| e.to_string())
}

/// Graph for user-placed points (`[[x, y], ...]`), e.g. after a click adds one.
pub fn graph_json(points: &str, d: f64) -> Result<String, String> {
    let pts: Vec<[f64; 2]> = serde_json::from_str(points).map_err(|e| e.to_string())?;
    serde_json::to_string(&graph_of(&build(&pts, d)?)).map_err(|e| e.to_string())
}

/// Runs one algorithm (`H1`, `H2`, `H3`, `GLS1`, `GLS2`, `VNS`, `EXACT`).
pub fn solve_json(points: &str, d: f64, algorithm: &str, seed: u64) -> Result<String, String> {
    let pts: Vec<[f64; 2]> = serde_json::from_str(points).map_err(|e| e.to_string())?;
    let inst = build(&pts, d)?;
    let algo: Algorithm = algorithm.parse()?;
    let s = solve(&inst, algo, seed, &SolverParams::default()).map_err(|e| e.to_string())?;
    let progress = match &s.trace {
        Trace::None => vec![s.length()],
        Trace::Gls(rows) => rows.iter().map(|r| r.best_l).collect(),
        Trace::Vns(rows) => rows.iter().map(|r| r.best_l).collect(),
    };
    let out = Solution {
        algorithm: algo.to_string(),
        length: s.length(),
        parent: s.tree.parents().to_vec(),
        slot: s.schedule.slots().to_vec(),
        progress,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn generate(n: usize, d: f64, seed: u64) -> Result<String, JsError> {
    generate_json(n, d, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn graph(points: &str, d: f64) -> Result<String, JsError> {
    graph_json(points, d).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solve)]
pub fn solve_js(points: &str, d: f64, algorithm: &str, seed: u64) -> Result<String, JsError> {
    solve_json(points, d, algorithm, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn generated_graph_round_trips() {
        let g: Graph = serde_json::from_str(&generate_json(12, 0.45, 1).unwrap()).unwrap();
        assert_eq!(g.points.len(), 12);
        let again: Graph =
            serde_json::from_str(&graph_json(&serde_json::to_string(&g.points).unwrap(), 0.45).unwrap()).unwrap();
        assert_eq!(again.edges, g.edges);
        assert_eq!(again.sink, g.sink);
    }

    #[test]
    fn solve_reports_tree_and_slots() {
        let pts = "[[0.5,0.5],[0.6,0.5],[0.7,0.5]]";
        let v: Value = serde_json::from_str(&solve_json(pts, 0.11, "VNS", 3).unwrap()).unwrap();
        assert_eq!(v["length"], 2);
        assert_eq!(v["parent"], serde_json::json!([null, 0, 1]));
        assert_eq!(v["slot"], serde_json::json!([null, 2, 1]));
        assert!(!v["progress"].as_array().unwrap().is_empty());
    }

    #[test]
    fn errors_are_messages() {
        assert!(solve_json("[[0.1,0.1],[0.9,0.9]]", 0.2, "H1", 0).unwrap_err().contains("connected"));
        assert!(solve_json("[[0.5,0.5]]", 0.2, "nope", 0).is_err());
        assert!(graph_json("not json", 0.2).is_err());
    }
}
