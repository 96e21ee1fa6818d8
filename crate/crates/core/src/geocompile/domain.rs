use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::graph::{bfs_path, PVertex, PeriodicGraph};
use super::{GeoError, Result};

/// BFS depth cap while growing the domain.
const SEARCH_DEPTH: usize = 64;

/// Edge joining the domain to its translate by `+w[dir]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub dir: usize,
    /// Vertex of `T`.
    pub from: PVertex,
    /// Vertex of `T + w[dir]`.
    pub to: PVertex,
}

/// Connected vertex set `T` whose translates by the lattice spanned by `w`
/// are disjoint and joined along every `w` direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDomain {
    pub vertices: Vec<PVertex>,
    /// Translations in units of the graph basis; `w[j]` vanishes past entry `j`.
    pub w: Vec<Vec<i64>>,
    pub ports: Vec<Port>,
    /// Overlap bounds `s_j` found at each stage.
    pub s: Vec<i64>,
}

/// Back-substitution in the triangular lattice spanned by `w[..j]`.
fn lattice_coords(d: &[i64], w: &[Vec<i64>], j: usize) -> Option<Vec<i64>> {
    let mut rest = d.to_vec();
    let mut k = vec![0i64; j];
    for i in (0..j).rev() {
        let l = w[i][i];
        if rest[i] % l != 0 {
            return None;
        }
        k[i] = rest[i] / l;
        for (r, x) in rest.iter_mut().zip(&w[i]) {
            *r -= k[i] * x;
        }
    }
    rest.iter().all(|&x| x == 0).then_some(k)
}

/// `d` has the form `m e_j + λ` with `λ` in the span of `w[..j]`; returns `m`.
fn stage_offset(d: &[i64], w: &[Vec<i64>], j: usize) -> Option<i64> {
    if d[j + 1..].iter().any(|&x| x != 0) {
        return None;
    }
    let mut head = d.to_vec();
    head[j] = 0;
    lattice_coords(&head, w, j).map(|_| d[j])
}

fn diff(a: &PVertex, b: &PVertex) -> Vec<i64> {
    a.cell.iter().zip(&b.cell).map(|(x, y)| x - y).collect()
}

/// Grow `T` one basis direction at a time: find the shortest path from `T` to
/// a translate of the partial tiling strictly beyond its overlap bound, cut it
/// at the first vertex that repeats an earlier vertex up to such a
/// translation, and keep the prefix.
pub fn extract_domain(g: &PeriodicGraph) -> Result<FundamentalDomain> {
    let dim = g.dim;
    let mut t = vec![PVertex {
        cell: vec![0; dim],
        r: 0,
    }];
    let mut w: Vec<Vec<i64>> = Vec::new();
    let mut ports = Vec::new();
    let mut s = Vec::new();
    for j in 0..dim {
        let mut sj = 0;
        for a in &t {
            for b in &t {
                if a.r == b.r {
                    if let Some(m) = stage_offset(&diff(a, b), &w, j) {
                        sj = sj.max(m);
                    }
                }
            }
        }
        let goal = |x: &PVertex| {
            t.iter()
                .any(|y| y.r == x.r && stage_offset(&diff(x, y), &w, j).is_some_and(|m| m > sj))
        };
        let path = bfs_path(g, &t, goal, |_| false, SEARCH_DEPTH).ok_or_else(|| {
            GeoError::Domain(format!(
                "no path along direction {j} within {SEARCH_DEPTH} steps"
            ))
        })?;
        let mut cut = None;
        'walk: for idx in 1..path.len() {
            let x = &path[idx];
            for y in t.iter().chain(&path[..idx]) {
                if y.r != x.r {
                    continue;
                }
                let tau = diff(x, y);
                if stage_offset(&tau, &w, j).is_some_and(|m| m > sj) {
                    cut = Some((idx, tau));
                    break 'walk;
                }
            }
        }
        let (idx, tau) = cut.expect("the path ends on a translate of T");
        for v in &path[..idx] {
            if !t.contains(v) {
                t.push(v.clone());
            }
        }
        ports.push(Port {
            dir: j,
            from: path[idx - 1].clone(),
            to: path[idx].clone(),
        });
        w.push(tau);
        s.push(sj);
    }
    let dom = FundamentalDomain {
        vertices: t,
        w,
        ports,
        s,
    };
    dom.verify(g, 2)?;
    Ok(dom)
}

impl FundamentalDomain {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Cell offset of the translate `T(k)`.
    pub fn offset(&self, k: &[i64]) -> Vec<i64> {
        let mut off = vec![0i64; self.dim()];
        for (ki, wi) in k.iter().zip(&self.w) {
            off.iter_mut().zip(wi).for_each(|(o, x)| *o += ki * x);
        }
        off
    }

    /// Vertex `i` of `T(k)`.
    pub fn member(&self, k: &[i64], i: usize) -> PVertex {
        self.vertices[i].shifted(&self.offset(k))
    }

    /// `(k, i)` with `v` the `i`-th vertex of `T(k)`.
    pub fn locate(&self, v: &PVertex) -> Option<(Vec<i64>, usize)> {
        self.vertices.iter().enumerate().find_map(|(i, t)| {
            if t.r != v.r {
                return None;
            }
            lattice_coords(&diff(v, t), &self.w, self.dim()).map(|k| (k, i))
        })
    }

    /// Port toward `T(k ± e_dir)`: `(i, j)` with vertex `i` of `T(k)` adjacent
    /// to vertex `j` of the neighbouring translate.
    pub fn port(&self, dir: usize, positive: bool) -> (usize, usize) {
        let p = &self.ports[dir];
        let idx = |v: &PVertex| self.locate(v).expect("ports lie in translates of T").1;
        let (a, b) = (idx(&p.from), idx(&p.to));
        if positive {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Induced adjacency on `T`.
    pub fn induced(&self, g: &PeriodicGraph) -> Vec<Vec<usize>> {
        self.vertices
            .iter()
            .map(|v| {
                let n = g.neighbours(v);
                (0..self.len())
                    .filter(|&j| n.contains(&self.vertices[j]))
                    .collect()
            })
            .collect()
    }

    /// Disjointness of translates with `|k_i| <= radius`, connectivity of `T`
    /// and an edge along every direction.
    pub fn verify(&self, g: &PeriodicGraph, radius: i64) -> Result<()> {
        let adj = self.induced(g);
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(GeoError::Domain("T is disconnected".into()));
        }
        for (k, _) in cube(self.dim(), -radius, radius) {
            if k.iter().all(|&x| x == 0) {
                continue;
            }
            let off = self.offset(&k);
            if self
                .vertices
                .iter()
                .any(|v| self.vertices.contains(&v.shifted(&off)))
            {
                return Err(GeoError::Domain(format!("T meets its translate by {k:?}")));
            }
        }
        for p in &self.ports {
            if !g.adjacent(&p.from, &p.to) {
                return Err(GeoError::Domain(format!("port {} is not an edge", p.dir)));
            }
        }
        Ok(())
    }
}

/// Points of `[lo, hi]^dim` with their row-major index.
pub(crate) fn cube(dim: usize, lo: i64, hi: i64) -> Vec<(Vec<i64>, usize)> {
    let mut pts: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        pts = pts
            .into_iter()
            .flat_map(|c| (lo..=hi).map(move |k| [c.clone(), vec![k]].concat()))
            .collect();
    }
    pts.into_iter().enumerate().map(|(i, p)| (p, i)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorCheck {
    pub side: i64,
    pub translates: usize,
    pub grid_edges: usize,
}

/// Check that contracting each `T(k)` of a `side^D` window leaves every
/// hypercubic edge present and the translates pairwise disjoint.
pub fn verify_minor(g: &PeriodicGraph, dom: &FundamentalDomain, side: i64) -> Result<MinorCheck> {
    let pts = cube(dom.dim(), 0, side - 1);
    let mut all = BTreeSet::new();
    for (k, _) in &pts {
        for i in 0..dom.len() {
            if !all.insert(dom.member(k, i)) {
                return Err(GeoError::Domain(format!(
                    "translate {k:?} overlaps another"
                )));
            }
        }
    }
    let mut grid_edges = 0;
    for (k, _) in &pts {
        for dir in 0..dom.dim() {
            let mut next = k.clone();
            next[dir] += 1;
            if next[dir] >= side {
                continue;
            }
            let (a, b) = dom.port(dir, true);
            if !g.adjacent(&dom.member(k, a), &dom.member(&next, b)) {
                return Err(GeoError::Domain(format!(
                    "no edge from T{k:?} to T{next:?}"
                )));
            }
            grid_edges += 1;
        }
    }
    Ok(MinorCheck {
        side,
        translates: pts.len(),
        grid_edges,
    })
}

/// Vertex `y` of a small graph with internally disjoint paths `y -> x_i` to up
/// to three ports: a shortest `x1 - x2` path, then the shortest path from `x3`
/// onto it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Central {
    pub y: usize,
    /// `paths[i]` runs from `y` to port `i`.
    pub paths: Vec<Vec<usize>>,
}

fn bfs_small(adj: &[Vec<usize>], from: usize, goal: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if goal(v) {
            let mut path = vec![v];
            let mut cur = v;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &u in &adj[v] {
            if prev[u] == usize::MAX {
                prev[u] = v;
                queue.push_back(u);
            }
        }
    }
    None
}

pub fn central_vertex(adj: &[Vec<usize>], ports: &[usize]) -> Result<Central> {
    if ports.is_empty() || ports.len() > 3 || ports.iter().any(|&p| p >= adj.len()) {
        return Err(GeoError::Domain(format!(
            "need one to three ports inside the graph, got {ports:?}"
        )));
    }
    let x1 = ports[0];
    if ports.len() == 1 {
        return Ok(Central {
            y: x1,
            paths: vec![vec![x1]],
        });
    }
    let p = bfs_small(adj, x1, |v| v == ports[1])
        .ok_or_else(|| GeoError::Domain("ports are disconnected".into()))?;
    if ports.len() == 2 {
        return Ok(Central {
            y: x1,
            paths: vec![vec![x1], p],
        });
    }
    let q = bfs_small(adj, ports[2], |v| p.contains(&v))
        .ok_or_else(|| GeoError::Domain("ports are disconnected".into()))?;
    let y = *q.last().expect("nonempty");
    let at = p.iter().position(|&v| v == y).expect("on the path");
    let to_x1: Vec<usize> = p[..=at].iter().rev().copied().collect();
    let to_x2 = p[at..].to_vec();
    let to_x3: Vec<usize> = q.iter().rev().copied().collect();
    Ok(Central {
        y,
        paths: vec![to_x1, to_x2, to_x3],
    })
}
