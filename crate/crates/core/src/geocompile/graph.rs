use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{GeoError, Result};

/// Coordinates closer than this are the same point.
pub const COORD_TOL: f64 = 1e-9;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A finite graph with every vertex placed in `R^D`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedGraph {
    pub dim: usize,
    pub ids: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    /// Unordered pairs, stored with the smaller index first.
    pub edges: Vec<(usize, usize)>,
    /// Translation basis the graph is claimed to be invariant under.
    pub basis: Option<Vec<Vec<f64>>>,
}

impl EmbeddedGraph {
    pub fn new(
        dim: usize,
        ids: Vec<String>,
        coords: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(GeoError::BadGraph("dimension must be positive".into()));
        }
        if ids.len() != coords.len() {
            return Err(GeoError::BadGraph(format!(
                "{} ids for {} coordinates",
                ids.len(),
                coords.len()
            )));
        }
        for (id, c) in ids.iter().zip(&coords) {
            if c.len() != dim || c.iter().any(|x| !x.is_finite()) {
                return Err(GeoError::BadGraph(format!(
                    "vertex `{id}` needs {dim} finite coordinates"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(d) = ids.iter().find(|i| !seen.insert(*i)) {
            return Err(GeoError::BadGraph(format!("duplicate vertex `{d}`")));
        }
        let mut norm = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= ids.len() || b >= ids.len() || a == b {
                return Err(GeoError::BadGraph(format!(
                    "edge ({a}, {b}) is a loop or out of range"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !norm.contains(&e) {
                norm.push(e);
            }
        }
        Ok(EmbeddedGraph {
            dim,
            ids,
            coords,
            edges: norm,
            basis: None,
        })
    }

    pub fn with_basis(mut self, basis: Vec<Vec<f64>>) -> Result<Self> {
        if basis.len() != self.dim || basis.iter().any(|v| v.len() != self.dim) {
            return Err(GeoError::BadGraph(format!(
                "basis must hold {0} vectors of length {0}",
                self.dim
            )));
        }
        self.basis = Some(basis);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj.iter_mut().for_each(|v| v.sort_unstable());
        adj
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_length(&self, e: (usize, usize)) -> f64 {
        dist(&self.coords[e.0], &self.coords[e.1])
    }

    /// Index of the vertex at `p`, if any.
    pub fn vertex_at(&self, p: &[f64]) -> Option<usize> {
        self.coords.iter().position(|c| dist(c, p) <= COORD_TOL)
    }

    /// Translation invariance on the window: every vertex and edge whose
    /// translate by a basis vector stays inside the window (in basis
    /// coordinates, shrunk by the longest edge) must map onto a vertex or
    /// edge of the graph.
    pub fn check_translation(&self) -> Result<()> {
        let Some(basis) = &self.basis else {
            return Err(GeoError::BadGraph("no translation basis".into()));
        };
        let d = self.dim;
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| basis[c][r]);
        let inv = m
            .try_inverse()
            .ok_or_else(|| GeoError::BadGraph("basis is singular".into()))?;
        let frac = |p: &[f64]| -> Vec<f64> {
            (&inv * nalgebra::DVector::from_column_slice(p))
                .iter()
                .copied()
                .collect()
        };
        let fr: Vec<Vec<f64>> = self.coords.iter().map(|c| frac(c)).collect();
        let mut reach = vec![0.0f64; d];
        for &(a, b) in &self.edges {
            for k in 0..d {
                reach[k] = reach[k].max((fr[a][k] - fr[b][k]).abs());
            }
        }
        let lo: Vec<f64> = (0..d)
            .map(|k| fr.iter().map(|f| f[k]).fold(f64::INFINITY, f64::min) + reach[k])
            .collect();
        let hi: Vec<f64> = (0..d)
            .map(|k| fr.iter().map(|f| f[k]).fold(f64::NEG_INFINITY, f64::max) - reach[k])
            .collect();
        let inside = |p: &[f64]| {
            let f = frac(p);
            (0..d).all(|k| f[k] >= lo[k] - 1e-7 && f[k] <= hi[k] + 1e-7)
        };
        let adj = self.adjacency();
        for v in basis {
            let shifted = |i: usize| -> Vec<f64> {
                self.coords[i].iter().zip(v).map(|(a, b)| a + b).collect()
            };
            for i in 0..self.len() {
                let p = shifted(i);
                if !inside(&self.coords[i]) || !inside(&p) {
                    continue;
                }
                let j = self.vertex_at(&p).ok_or_else(|| {
                    GeoError::NotInvariant(format!(
                        "vertex `{}` has no translate by {v:?}",
                        self.ids[i]
                    ))
                })?;
                for &n in &adj[i] {
                    let q = shifted(n);
                    if let Some(m) = self.vertex_at(&q) {
                        if !adj[j].contains(&m) {
                            return Err(GeoError::NotInvariant(format!(
                                "edge ({}, {}) has no translate by {v:?}",
                                self.ids[i], self.ids[n]
                            )));
                        }
                    } else if inside(&q) {
                        return Err(GeoError::NotInvariant(format!(
                            "vertex `{}` has no translate",
                            self.ids[n]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            dim: self.dim,
            vertices: self
                .ids
                .iter()
                .zip(&self.coords)
                .map(|(id, c)| VertexDoc {
                    id: id.clone(),
                    coord: c.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| [self.ids[a].clone(), self.ids[b].clone()])
                .collect(),
            basis: self.basis.clone(),
        }
    }

    pub fn from_doc(doc: &GraphDoc) -> Result<Self> {
        let index: HashMap<&str, usize> = doc
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for [a, b] in &doc.edges {
            let find = |s: &str| {
                index
                    .get(s)
                    .copied()
                    .ok_or_else(|| GeoError::BadGraph(format!("unknown vertex `{s}`")))
            };
            edges.push((find(a)?, find(b)?));
        }
        let g = EmbeddedGraph::new(
            doc.dim,
            doc.vertices.iter().map(|v| v.id.clone()).collect(),
            doc.vertices.iter().map(|v| v.coord.clone()).collect(),
            edges,
        )?;
        match &doc.basis {
            Some(b) => g.with_basis(b.clone()),
            None => Ok(g),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_doc()).expect("graph documents serialise")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: GraphDoc = toml::from_str(text).map_err(|e| GeoError::Document(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: String,
    pub coord: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub dim: usize,
    pub vertices: Vec<VertexDoc>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
}

/// Locality constants: at most `c` vertices per closed unit ball and no
/// edge longer than `big_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityParams {
    pub c: usize,
    pub big_c: f64,
}

impl LocalityParams {
    pub fn new(c: usize, big_c: f64) -> Result<Self> {
        if c < 1 || !(big_c > 0.0) {
            return Err(GeoError::BadParams(format!(
                "need c >= 1 and C > 0, got c = {c}, C = {big_c}"
            )));
        }
        Ok(LocalityParams { c, big_c })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallViolation {
    pub center: String,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeViolation {
    pub a: String,
    pub b: String,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub pass: bool,
    /// Largest unit-ball population seen.
    pub max_ball: usize,
    pub max_edge: f64,
    pub balls: Vec<BallViolation>,
    pub edges: Vec<EdgeViolation>,
}

/// Check geometric locality on unit balls centred at the vertices.
pub fn check_locality(g: &EmbeddedGraph, params: &LocalityParams) -> LocalityReport {
    let mut balls = Vec::new();
    let mut max_ball = 0;
    for (i, c) in g.coords.iter().enumerate() {
        let members: Vec<usize> = (0..g.len())
            .filter(|&j| dist(c, &g.coords[j]) <= 1.0 + COORD_TOL)
            .collect();
        max_ball = max_ball.max(members.len());
        if members.len() > params.c {
            balls.push(BallViolation {
                center: g.ids[i].clone(),
                members: members.iter().map(|&j| g.ids[j].clone()).collect(),
            });
        }
    }
    let mut edges = Vec::new();
    let mut max_edge = 0.0f64;
    for &e in &g.edges {
        let length = g.edge_length(e);
        max_edge = max_edge.max(length);
        if length > params.big_c + COORD_TOL {
            edges.push(EdgeViolation {
                a: g.ids[e.0].clone(),
                b: g.ids[e.1].clone(),
                length,
            });
        }
    }
    LocalityReport {
        pass: balls.is_empty() && edges.is_empty(),
        max_ball,
        max_edge,
        balls,
        edges,
    }
}

/// Vertex `r` of the unit cell translated by `cell` (in basis units).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PVertex {
    pub cell: Vec<i64>,
    pub r: usize,
}

impl PVertex {
    pub fn shifted(&self, by: &[i64]) -> PVertex {
        PVertex {
            cell: self.cell.iter().zip(by).map(|(a, b)| a + b).collect(),
            r: self.r,
        }
    }
}

/// Infinite translation-invariant graph given by one unit cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGraph {
    pub name: String,
    pub dim: usize,
    pub basis: Vec<Vec<f64>>,
    /// Positions of the cell's vertices.
    pub cell: Vec<Vec<f64>>,
    /// `(u, v, offset)`: vertex `u` of cell `k` joins vertex `v` of cell `k + offset`.
    pub edges: Vec<(usize, usize, Vec<i64>)>,
}

impl PeriodicGraph {
    pub fn new(
        name: &str,
        basis: Vec<Vec<f64>>,
        cell: Vec<Vec<f64>>,
        edges: Vec<(usize, usize, Vec<i64>)>,
    ) -> Result<Self> {
        let dim = basis.len();
        if dim == 0
            || basis.iter().any(|v| v.len() != dim)
            || cell.iter().any(|c| c.len() != dim)
            || cell.is_empty()
        {
            return Err(GeoError::BadGraph(
                "basis must be D vectors in R^D and the cell nonempty".into(),
            ));
        }
        for (u, v, off) in &edges {
            if *u >= cell.len()
                || *v >= cell.len()
                || off.len() != dim
                || (u == v && off.iter().all(|&o| o == 0))
            {
                return Err(GeoError::BadGraph(format!(
                    "bad cell edge ({u}, {v}, {off:?})"
                )));
            }
        }
        Ok(PeriodicGraph {
            name: name.into(),
            dim,
            basis,
            cell,
            edges,
        })
    }

    /// Hypercubic lattice `Z^D`.
    pub fn square(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let edges = (0..dim)
            .map(|i| (0, 0, (0..dim).map(|j| (i == j) as i64).collect()))
            .collect();
        PeriodicGraph::new(
            if dim == 2 { "square" } else { "hypercubic" },
            basis,
            vec![vec![0.0; dim]],
            edges,
        )
        .expect("well formed")
    }

    /// Honeycomb lattice with unit bonds.
    pub fn hexagonal() -> Self {
        let s = 3f64.sqrt();
        PeriodicGraph::new(
            "hexagonal",
            vec![vec![s, 0.0], vec![s / 2.0, 1.5]],
            vec![vec![0.0, 0.0], vec![0.0, 1.0]],
            vec![(0, 1, vec![0, 0]), (0, 1, vec![0, -1]), (0, 1, vec![1, -1])],
        )
        .expect("well formed")
    }

    /// Square lattice with every edge subdivided once.
    pub fn subdivided_square() -> Self {
        PeriodicGraph::new(
            "subdivided_square",
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5]],
            vec![
                (0, 1, vec![0, 0]),
                (1, 0, vec![1, 0]),
                (0, 2, vec![0, 0]),
                (2, 0, vec![0, 1]),
            ],
        )
        .expect("well formed")
    }

    pub fn position(&self, v: &PVertex) -> Vec<f64> {
        let mut p = self.cell[v.r].clone();
        for (k, b) in v.cell.iter().zip(&self.basis) {
            p.iter_mut().zip(b).for_each(|(x, y)| *x += *k as f64 * y);
        }
        p
    }

    /// Neighbours in a fixed order (cell edges in declaration order, forward then backward).
    pub fn neighbours(&self, v: &PVertex) -> Vec<PVertex> {
        let mut out: Vec<PVertex> = Vec::new();
        let mut push = |w: PVertex| {
            if !out.contains(&w) {
                out.push(w);
            }
        };
        for (a, b, off) in &self.edges {
            if *a == v.r {
                push(PVertex {
                    cell: v.cell.iter().zip(off).map(|(c, o)| c + o).collect(),
                    r: *b,
                });
            }
            if *b == v.r {
                push(PVertex {
                    cell: v.cell.iter().zip(off).map(|(c, o)| c - o).collect(),
                    r: *a,
                });
            }
        }
        out
    }

    pub fn adjacent(&self, a: &PVertex, b: &PVertex) -> bool {
        self.neighbours(a).contains(b)
    }

    /// Two-colouring of the cell vertices with the parity each basis
    /// translation adds, if the graph is bipartite with a periodic colouring.
    pub fn colouring(&self) -> Option<(Vec<u8>, Vec<u8>)> {
        // Unknowns: colour of each cell vertex and parity of each basis step.
        // Each edge says colour(u) + Σ off_i parity_i + colour(v) = 1 (mod 2),
        // solved by elimination over GF(2).
        let n = self.cell.len() + self.dim;
        let mut rows: Vec<(Vec<u8>, u8)> = Vec::new();
        for (u, v, off) in &self.edges {
            let mut row = vec![0u8; n];
            row[*u] ^= 1;
            row[*v] ^= 1;
            for (i, o) in off.iter().enumerate() {
                row[self.cell.len() + i] ^= (o.rem_euclid(2)) as u8;
            }
            rows.push((row, 1));
        }
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n {
            let Some(p) = (r..rows.len()).find(|&i| rows[i].0[col] == 1) else {
                continue;
            };
            rows.swap(r, p);
            for i in 0..rows.len() {
                if i != r && rows[i].0[col] == 1 {
                    let (pr, pb) = rows[r].clone();
                    rows[i].0.iter_mut().zip(&pr).for_each(|(a, b)| *a ^= b);
                    rows[i].1 ^= pb;
                }
            }
            pivots.push(col);
            r += 1;
        }
        if rows[r..].iter().any(|(_, b)| *b == 1) {
            return None;
        }
        let mut x = vec![0u8; n];
        for (i, &col) in pivots.iter().enumerate() {
            x[col] = rows[i].1;
        }
        Some((x[..self.cell.len()].to_vec(), x[self.cell.len()..].to_vec()))
    }

    /// Colour of a vertex under [`PeriodicGraph::colouring`].
    pub fn colour_of(colours: &(Vec<u8>, Vec<u8>), v: &PVertex) -> u8 {
        let mut c = colours.0[v.r];
        for (k, p) in v.cell.iter().zip(&colours.1) {
            c ^= (k.rem_euclid(2) as u8) & p;
        }
        c
    }

    /// Finite patch of cells `lo..=hi` in every direction, with its basis.
    pub fn window(&self, lo: i64, hi: i64) -> EmbeddedGraph {
        let mut cells: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..self.dim {
            cells = cells
                .into_iter()
                .flat_map(|c| (lo..=hi).map(move |k| [c.clone(), vec![k]].concat()))
                .collect();
        }
        let mut index = BTreeMap::new();
        let mut ids = Vec::new();
        let mut coords = Vec::new();
        for c in &cells {
            for r in 0..self.cell.len() {
                let v = PVertex { cell: c.clone(), r };
                index.insert(v.clone(), ids.len());
                ids.push(pvertex_id(&v));
                coords.push(self.position(&v));
            }
        }
        let mut edges = Vec::new();
        for (v, &i) in &index {
            for w in self.neighbours(v) {
                if let Some(&j) = index.get(&w) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        EmbeddedGraph::new(self.dim, ids, coords, edges)
            .expect("window is well formed")
            .with_basis(self.basis.clone())
            .expect("basis matches")
    }

    /// Recover the unit cell from a window that carries a basis: representatives
    /// are the vertices with fractional basis coordinates in `[0, 1)`.
    pub fn from_window(name: &str, g: &EmbeddedGraph) -> Result<Self> {
        let basis = g
            .basis
            .clone()
            .ok_or_else(|| GeoError::BadGraph("window has no basis".into()))?;
        g.check_translation()?;
        let d = g.dim;
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| basis[c][r]);
        let inv = m
            .try_inverse()
            .ok_or_else(|| GeoError::BadGraph("basis is singular".into()))?;
        let frac = |p: &[f64]| -> (Vec<i64>, Vec<f64>) {
            let x = &inv * nalgebra::DVector::from_column_slice(p);
            let cell: Vec<i64> = x.iter().map(|v| (v + 1e-9).floor() as i64).collect();
            let rem = x.iter().zip(&cell).map(|(v, c)| v - *c as f64).collect();
            (cell, rem)
        };
        let mut reps: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut orbit = vec![(0usize, vec![0i64; d]); g.len()];
        for i in 0..g.len() {
            let (cell, rem) = frac(&g.coords[i]);
            let r = match reps
                .iter()
                .position(|(_, q)| q.iter().zip(&rem).all(|(a, b)| (a - b).abs() < 1e-7))
            {
                Some(r) => r,
                None => {
                    reps.push((i, rem));
                    reps.len() - 1
                }
            };
            orbit[i] = (r, cell);
        }
        let cell: Vec<Vec<f64>> = reps
            .iter()
            .map(|(_, rem)| {
                (0..d)
                    .map(|k| (0..d).map(|c| rem[c] * basis[c][k]).sum())
                    .collect()
            })
            .collect();
        let mut edges: Vec<(usize, usize, Vec<i64>)> = Vec::new();
        for &(a, b) in &g.edges {
            let (ra, ca) = &orbit[a];
            let (rb, cb) = &orbit[b];
            let off: Vec<i64> = cb.iter().zip(ca).map(|(x, y)| x - y).collect();
            let neg: Vec<i64> = off.iter().map(|x| -x).collect();
            let known = edges.iter().any(|(u, v, o)| {
                (u == ra && v == rb && *o == off) || (u == rb && v == ra && *o == neg)
            });
            if !known {
                edges.push((*ra, *rb, off));
            }
        }
        PeriodicGraph::new(name, basis, cell, edges)
    }
}

pub fn pvertex_id(v: &PVertex) -> String {
    let cell: Vec<String> = v.cell.iter().map(|k| k.to_string()).collect();
    format!("v{}@{}", v.r, cell.join("_"))
}

/// Breadth-first shortest path in a periodic graph from any source to the
/// first vertex accepted by `goal`, within `max_depth` steps.
pub fn bfs_path(
    g: &PeriodicGraph,
    sources: &[PVertex],
    goal: impl Fn(&PVertex) -> bool,
    blocked: impl Fn(&PVertex) -> bool,
    max_depth: usize,
) -> Option<Vec<PVertex>> {
    let mut prev: HashMap<PVertex, Option<PVertex>> = HashMap::new();
    let mut queue = VecDeque::new();
    for s in sources {
        if prev.insert(s.clone(), None).is_none() {
            queue.push_back((s.clone(), 0usize));
        }
    }
    while let Some((v, d)) = queue.pop_front() {
        if goal(&v) {
            let mut path = vec![v.clone()];
            let mut cur = v;
            while let Some(Some(p)) = prev.get(&cur) {
                path.push(p.clone());
                cur = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        if d == max_depth {
            continue;
        }
        for w in g.neighbours(&v) {
            if !prev.contains_key(&w) && !blocked(&w) {
                prev.insert(w.clone(), Some(v.clone()));
                queue.push_back((w, d + 1));
            }
        }
    }
    None
}
