//! Point sets, unit disk communication graphs, sink selection and hop levels.

use std::collections::hash_map::DefaultHasher;
use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use thiserror::Error;

/// Vertex identifier, an index into the instance's point list.
pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("graph is disconnected at d = {d}: vertex {vertex} is unreachable from the sink")]
    Disconnected { d: f64, vertex: Vertex },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    /// First token is the point count, followed by that many `x y` pairs.
    OrLib,
    /// Header `x,y`, then one point per row.
    Csv,
}

impl FromStr for PointFormat {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "orlib" => Ok(PointFormat::OrLib),
            "csv" => Ok(PointFormat::Csv),
            other => Err(InstanceError::Format(format!("unknown point format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Points in the unit square. Coordinates are in `[0, 1]` and pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
    source_id: String,
}

impl PointSet {
    pub fn new(points: Vec<Point>, source_id: impl Into<String>) -> Result<Self, InstanceError> {
        if points.is_empty() {
            return Err(InstanceError::Domain("point set is empty".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
                return Err(InstanceError::Domain(format!(
                    "point {i} = ({}, {}) lies outside the unit square",
                    p.x, p.y
                )));
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (points[a], points[b]);
            pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y))
        });
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(InstanceError::Domain(format!(
                    "points {} and {} coincide",
                    w[0].min(w[1]),
                    w[0].max(w[1])
                )));
            }
        }
        Ok(PointSet { points, source_id: source_id.into() })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.x, p.y));
        }
        out
    }

    pub fn to_orlib(&self) -> String {
        let mut out = format!("{}\n", self.points.len());
        for p in &self.points {
            out.push_str(&format!("{} {}\n", p.x, p.y));
        }
        out
    }
}

fn parse_coord(tok: &str, line: usize) -> Result<f64, InstanceError> {
    let v: f64 = tok.parse().map_err(|_| InstanceError::Parse { line, msg: format!("`{tok}` is not a number") })?;
    if !v.is_finite() {
        return Err(InstanceError::Parse { line, msg: format!("`{tok}` is not finite") });
    }
    Ok(v)
}

/// Line-numbered whitespace tokenizer over the OR-Library layout.
struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text.lines().enumerate().flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t))).collect();
        Tokens { items, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.items.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn next_count(&mut self, what: &str) -> Result<usize, InstanceError> {
        let (line, tok) = self.next().ok_or_else(|| InstanceError::Format(format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| InstanceError::Parse { line, msg: format!("{what} `{tok}` is not a non-negative integer") })
    }

    fn read_points(&mut self, count: usize) -> Result<Vec<Point>, InstanceError> {
        let mut points = Vec::with_capacity(count);
        for i in 0..count {
            let (lx, tx) =
                self.next().ok_or_else(|| InstanceError::Format(format!("declared {count} points, found {i}")))?;
            let (ly, ty) = self.next().ok_or_else(|| {
                InstanceError::Format(format!("declared {count} points, point {} has no y coordinate", i + 1))
            })?;
            points.push(Point::new(parse_coord(tx, lx)?, parse_coord(ty, ly)?));
        }
        Ok(points)
    }
}

/// Parses a point set from text in the given format.
pub fn load_points(text: &str, format: PointFormat) -> Result<PointSet, InstanceError> {
    if text.trim().is_empty() {
        return Err(InstanceError::Format("input is empty".into()));
    }
    match format {
        PointFormat::OrLib => {
            let mut toks = Tokens::new(text);
            let count = toks.next_count("point count")?;
            let points = toks.read_points(count)?;
            if let Some((line, _)) = toks.next() {
                return Err(InstanceError::Format(format!(
                    "declared {count} points but more data follows at line {line}"
                )));
            }
            PointSet::new(points, "orlib")
        }
        PointFormat::Csv => {
            let mut points = Vec::new();
            let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
            match lines.next() {
                Some((_, h)) if h.replace(' ', "").eq_ignore_ascii_case("x,y") => {}
                Some((i, h)) => {
                    return Err(InstanceError::Parse {
                        line: i + 1,
                        msg: format!("expected header `x,y`, found `{h}`"),
                    })
                }
                None => unreachable!("non-empty input has a line"),
            }
            for (i, l) in lines {
                let fields: Vec<&str> = l.split(',').map(str::trim).collect();
                if fields.len() != 2 {
                    return Err(InstanceError::Parse {
                        line: i + 1,
                        msg: format!("expected 2 fields, found {}", fields.len()),
                    });
                }
                points.push(Point::new(parse_coord(fields[0], i + 1)?, parse_coord(fields[1], i + 1)?));
            }
            PointSet::new(points, "csv")
        }
    }
}

/// Reads case `nr` (1-based) out of an OR-Library collection file, which
/// starts with the number of cases followed by one point-count block per case.
pub fn load_orlib_case(text: &str, nr: usize) -> Result<PointSet, InstanceError> {
    let mut toks = Tokens::new(text);
    let cases = toks.next_count("case count")?;
    if nr == 0 || nr > cases {
        return Err(InstanceError::Format(format!("case {nr} not in 1..={cases}")));
    }
    for k in 1..=nr {
        let count = toks.next_count("point count")?;
        let points = toks.read_points(count)?;
        if k == nr {
            return PointSet::new(points, format!("orlib-n{count}-nr{nr}"));
        }
    }
    unreachable!()
}

/// Vertex nearest to the square's center; ties go to the lowest id.
pub fn sink_of(ps: &PointSet) -> Vertex {
    let center = Point::new(0.5, 0.5);
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in ps.points().iter().enumerate() {
        let d = p.dist2(&center);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Unit disk communication graph over a point set with its sink and hop levels.
#[derive(Debug, Clone)]
pub struct Instance {
    points: PointSet,
    d: f64,
    adjacency: Vec<Vec<Vertex>>,
    adj_matrix: Vec<bool>,
    sink: Vertex,
    level: Vec<u32>,
    arc_offsets: Vec<usize>,
    fingerprint: u64,
}

impl Instance {
    /// Builds the unit disk graph at critical distance `d`. Edges use an exact
    /// `<=` comparison on squared distances.
    pub fn build(points: PointSet, d: f64) -> Result<Self, InstanceError> {
        if !d.is_finite() || d <= 0.0 {
            return Err(InstanceError::Domain(format!("critical distance must be positive, got {d}")));
        }
        let n = points.len();
        let d2 = d * d;
        let mut adjacency = vec![Vec::new(); n];
        let mut adj_matrix = vec![false; n * n];
        let pts = points.points();
        for u in 0..n {
            for v in (u + 1)..n {
                if pts[u].dist2(&pts[v]) <= d2 {
                    adjacency[u].push(v);
                    adjacency[v].push(u);
                    adj_matrix[u * n + v] = true;
                    adj_matrix[v * n + u] = true;
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let sink = sink_of(&points);
        let level = bfs_levels(&adjacency, sink);
        if let Some(vertex) = level.iter().position(|&l| l == u32::MAX) {
            return Err(InstanceError::Disconnected { d, vertex });
        }
        let mut arc_offsets = Vec::with_capacity(n + 1);
        arc_offsets.push(0);
        for (u, list) in adjacency.iter().enumerate() {
            let out = if u == sink { 0 } else { list.len() };
            arc_offsets.push(arc_offsets[u] + out);
        }

        let mut h = DefaultHasher::new();
        n.hash(&mut h);
        d.to_bits().hash(&mut h);
        sink.hash(&mut h);
        for p in pts {
            p.x.to_bits().hash(&mut h);
            p.y.to_bits().hash(&mut h);
        }
        let fingerprint = h.finish();

        Ok(Instance { points, d, adjacency, adj_matrix, sink, level, arc_offsets, fingerprint })
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn sink(&self) -> Vertex {
        self.sink
    }

    pub fn point_set(&self) -> &PointSet {
        &self.points
    }

    pub fn point(&self, v: Vertex) -> Point {
        self.points.points()[v]
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.adj_matrix[u * self.n() + v]
    }

    /// Hop distance from `v` to the sink.
    pub fn level(&self, v: Vertex) -> u32 {
        self.level[v]
    }

    pub fn levels(&self) -> &[u32] {
        &self.level
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Number of directed arcs `(u, v)` with `u` not the sink.
    pub fn arc_count(&self) -> usize {
        self.arc_offsets[self.n()]
    }

    /// All directed arcs of the aggregation digraph: both orientations of
    /// each edge, except arcs leaving the sink.
    pub fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n()).filter(move |&u| u != self.sink).flat_map(move |u| self.adjacency[u].iter().map(move |&v| (u, v)))
    }

    /// The `i`-th arc in the order of [`Instance::arcs`], in O(log n).
    pub(crate) fn arc_at(&self, i: usize) -> (Vertex, Vertex) {
        assert!(i < self.arc_count(), "arc index out of range");
        let u = self.arc_offsets.partition_point(|&off| off <= i) - 1;
        (u, self.adjacency[u][i - self.arc_offsets[u]])
    }

    /// Identity used to check that trees and schedules belong to this instance.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn id(&self) -> &str {
        self.points.source_id()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n = {}, d = {}, |E| = {}, sink = {})", self.id(), self.n(), self.d, self.edge_count(), self.sink)
    }
}

/// Shorthand for [`Instance::build`].
pub fn build_instance(ps: PointSet, d: f64) -> Result<Instance, InstanceError> {
    Instance::build(ps, d)
}

/// Hop distances from `root`; unreachable vertices get `u32::MAX`.
pub(crate) fn bfs_levels(adjacency: &[Vec<Vertex>], root: Vertex) -> Vec<u32> {
    let mut level = vec![u32::MAX; adjacency.len()];
    let mut queue = VecDeque::new();
    level[root] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if level[v] == u32::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    level
}
