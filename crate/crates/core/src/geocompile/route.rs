use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::graph::EmbeddedGraph;
use super::{GeoError, Result};

/// Spacing may shrink to this fraction of the requested one.
pub const MIN_SPACING_FACTOR: f64 = 1.0 / (1u64 << 20) as f64;

/// Routed paths stay within this multiple of their endpoints' grid distance.
pub const ROUTE_STRETCH: usize = 8;

/// Extra cost of passing through another path in the plane.
const CROSS_COST: usize = 1000;

pub type GridPoint = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snap {
    /// Final spacing `a`; grid point `k` sits at `a k`.
    pub spacing: f64,
    pub halvings: u32,
    pub points: Vec<GridPoint>,
    pub max_displacement: f64,
}

/// Snap every vertex to the nearest point of the grid `a Z^D`, halving the
/// spacing until the assignment is injective.
pub fn snap_to_grid(g: &EmbeddedGraph, spacing: f64) -> Result<Snap> {
    snap_with(&g.coords, spacing, |_, _| true)
}

/// [`snap_to_grid`] restricted to grid points accepted by `feasible(vertex, k)`.
pub fn snap_with(
    coords: &[Vec<f64>],
    spacing: f64,
    feasible: impl Fn(usize, &[i64]) -> bool,
) -> Result<Snap> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(GeoError::BadParams(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    let mut a = spacing;
    let mut halvings = 0;
    loop {
        let mut points = Vec::with_capacity(coords.len());
        let mut max_displacement = 0.0f64;
        for (v, x) in coords.iter().enumerate() {
            let (k, d) = nearest(x, a, |k| feasible(v, k)).ok_or_else(|| {
                GeoError::Snap(format!("no admissible grid point near vertex {v}"))
            })?;
            max_displacement = max_displacement.max(d);
            points.push(k);
        }
        let distinct: BTreeSet<&GridPoint> = points.iter().collect();
        if distinct.len() == points.len() {
            return Ok(Snap {
                spacing: a,
                halvings,
                points,
                max_displacement,
            });
        }
        a /= 2.0;
        halvings += 1;
        if a < spacing * MIN_SPACING_FACTOR {
            return Err(GeoError::Snap(format!(
                "spacing underflow below {:.3e}",
                spacing * MIN_SPACING_FACTOR
            )));
        }
    }
}

/// Closest admissible point within two grid steps of the rounded position;
/// ties go to the lexicographically smallest.
fn nearest(x: &[f64], a: f64, ok: impl Fn(&[i64]) -> bool) -> Option<(GridPoint, f64)> {
    let base: Vec<i64> = x.iter().map(|v| (v / a).round() as i64).collect();
    let mut best: Option<(GridPoint, f64)> = None;
    for off in super::domain::cube(x.len(), -2, 2)
        .into_iter()
        .map(|(p, _)| p)
    {
        let k: GridPoint = base.iter().zip(&off).map(|(b, o)| b + o).collect();
        if !ok(&k) {
            continue;
        }
        let d = k
            .iter()
            .zip(x)
            .map(|(ki, xi)| (*ki as f64 * a - xi).powi(2))
            .sum::<f64>()
            .sqrt();
        if best
            .as_ref()
            .is_none_or(|(bk, bd)| d < bd - 1e-12 || (d <= bd + 1e-12 && k < *bk))
        {
            best = Some((k, d));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteOptions {
    /// Routing box: bounding box of the points grown by this many steps.
    pub margin: i64,
    pub retries: usize,
    /// Let a path pass through another when disjoint routing fails in `D = 2`.
    pub allow_crossings: bool,
}

impl Default for RouteOptions {
    fn default() -> Self {
        RouteOptions {
            margin: 1,
            retries: 8,
            allow_crossings: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub point: GridPoint,
    /// Edge indices of the two paths meeting here.
    pub paths: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub points: Vec<GridPoint>,
    pub edges: Vec<(usize, usize)>,
    /// `paths[e]` runs from `points[edges[e].0]` to `points[edges[e].1]`.
    pub paths: Vec<Vec<GridPoint>>,
    pub crossings: Vec<Crossing>,
    pub rip_ups: usize,
}

fn manhattan(a: &[i64], b: &[i64]) -> usize {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y) as usize).sum()
}

impl RoutePlan {
    pub fn lengths(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p.len() - 1).collect()
    }

    /// Largest ratio of path length to grid distance.
    pub fn max_stretch(&self) -> f64 {
        self.edges
            .iter()
            .zip(&self.paths)
            .map(|(&(u, v), p)| {
                (p.len() - 1) as f64 / manhattan(&self.points[u], &self.points[v]).max(1) as f64
            })
            .fold(0.0, f64::max)
    }

    /// Paths share no grid point other than common endpoints and declared crossings.
    pub fn is_vertex_disjoint(&self) -> bool {
        let crossing: BTreeSet<&GridPoint> = self.crossings.iter().map(|c| &c.point).collect();
        let ends: BTreeSet<&GridPoint> = self.points.iter().collect();
        let mut owner: BTreeMap<&GridPoint, usize> = BTreeMap::new();
        for (e, p) in self.paths.iter().enumerate() {
            for q in &p[1..p.len() - 1] {
                if ends.contains(q) {
                    return false;
                }
                if let Some(o) = owner.insert(q, e) {
                    if o != e && !crossing.contains(q) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn steps(dim: usize) -> Vec<GridPoint> {
    (0..dim)
        .flat_map(|d| {
            [1i64, -1].map(|s| {
                let mut v = vec![0; dim];
                v[d] = s;
                v
            })
        })
        .collect()
}

struct Router<'a> {
    lo: GridPoint,
    hi: GridPoint,
    moves: Vec<GridPoint>,
    points: &'a [GridPoint],
    ends: BTreeSet<GridPoint>,
}

/// Search state: a point and the move index that reached it.
type State = (GridPoint, usize);

impl Router<'_> {
    fn inside(&self, p: &[i64]) -> bool {
        p.iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .all(|((x, l), h)| x >= l && x <= h)
    }

    /// Least-cost path. Steps cost `STEP`, turns `TURN` (so shortest paths
    /// prefer straight runs), and a point where `free` fails may only be
    /// jumped straight across when `crossable(point, axis)` allows it.
    fn search(
        &self,
        from: &GridPoint,
        to: &GridPoint,
        free: impl Fn(&GridPoint) -> bool,
        crossable: impl Fn(&GridPoint, usize) -> bool,
    ) -> Option<Vec<GridPoint>> {
        const STEP: usize = 16;
        const TURN: usize = 1;
        let none = self.moves.len();
        let start: State = (from.clone(), none);
        let mut dist: HashMap<State, usize> = HashMap::from([(start.clone(), 0)]);
        let mut prev: HashMap<State, (State, Option<GridPoint>)> = HashMap::new();
        let mut heap = BinaryHeap::from([Reverse((0usize, 0usize, start))]);
        let mut order = 0usize;
        let open = |q: &GridPoint| q == to || (!self.ends.contains(q) && free(q));
        while let Some(Reverse((d, _, state))) = heap.pop() {
            if dist.get(&state).is_some_and(|&best| best < d) {
                continue;
            }
            if &state.0 == to {
                let mut path = vec![state.0.clone()];
                let mut cur = state;
                while let Some((p, mid)) = prev.get(&cur) {
                    path.extend(mid.iter().cloned());
                    path.push(p.0.clone());
                    cur = p.clone();
                }
                path.reverse();
                return Some(path);
            }
            for (mi, m) in self.moves.iter().enumerate() {
                let turn = if state.1 == none || state.1 == mi {
                    0
                } else {
                    TURN
                };
                let q: GridPoint = state.0.iter().zip(m).map(|(a, b)| a + b).collect();
                if !self.inside(&q) {
                    continue;
                }
                let (next, mid, cost) = if open(&q) {
                    ((q, mi), None, STEP + turn)
                } else if !self.ends.contains(&q) && crossable(&q, mi / 2) {
                    let over: GridPoint = q.iter().zip(m).map(|(a, b)| a + b).collect();
                    if !self.inside(&over) || !open(&over) {
                        continue;
                    }
                    ((over, mi), Some(q), 2 * STEP + turn + CROSS_COST)
                } else {
                    continue;
                };
                let nd = d + cost;
                if dist.get(&next).is_none_or(|&old| nd < old) {
                    dist.insert(next.clone(), nd);
                    prev.insert(next.clone(), (state.clone(), mid));
                    order += 1;
                    heap.push(Reverse((nd, order, next)));
                }
            }
        }
        None
    }
}

/// `p` runs straight through `q` along an axis other than `axis`.
fn straight_across(p: &[GridPoint], q: &GridPoint, axis: usize) -> bool {
    let Some(i) = p.iter().position(|x| x == q) else {
        return false;
    };
    if i == 0 || i + 1 == p.len() {
        return false;
    }
    let (a, b) = (&p[i - 1], &p[i + 1]);
    let along = a.iter().zip(b).position(|(x, y)| x != y);
    along.is_some_and(|d| d != axis && a.iter().zip(b).filter(|(x, y)| x != y).count() == 1)
}

/// Route every edge between its snapped endpoints, longest first, with
/// rip-up and reroute on conflicts. In the plane, paths that still cannot be
/// separated pass through each other and the meeting points are returned as
/// crossings.
pub fn route_paths(
    points: &[GridPoint],
    edges: &[(usize, usize)],
    opts: &RouteOptions,
) -> Result<RoutePlan> {
    let dim = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != dim)
        || edges
            .iter()
            .any(|&(u, v)| u >= points.len() || v >= points.len() || u == v)
    {
        return Err(GeoError::BadParams(
            "edges must join distinct snapped points of one dimension".into(),
        ));
    }
    let distinct: BTreeSet<&GridPoint> = points.iter().collect();
    if distinct.len() != points.len() {
        return Err(GeoError::Route("snapped points collide".into()));
    }
    if edges.is_empty() {
        return Ok(RoutePlan {
            points: points.to_vec(),
            edges: vec![],
            paths: vec![],
            crossings: vec![],
            rip_ups: 0,
        });
    }
    let lo = (0..dim)
        .map(|d| points.iter().map(|p| p[d]).min().unwrap() - opts.margin)
        .collect();
    let hi = (0..dim)
        .map(|d| points.iter().map(|p| p[d]).max().unwrap() + opts.margin)
        .collect();
    let router = Router {
        lo,
        hi,
        moves: steps(dim),
        points,
        ends: points.iter().cloned().collect(),
    };

    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&e| {
        (
            Reverse(manhattan(&points[edges[e].0], &points[edges[e].1])),
            e,
        )
    });
    let mut queue: VecDeque<usize> = order.into();
    let mut paths: Vec<Option<Vec<GridPoint>>> = vec![None; edges.len()];
    let mut owner: HashMap<GridPoint, usize> = HashMap::new();
    let mut crossings = Vec::new();
    let mut rip_ups = 0;

    fn commit(
        owner: &mut HashMap<GridPoint, usize>,
        paths: &mut [Option<Vec<GridPoint>>],
        e: usize,
        p: Vec<GridPoint>,
    ) {
        for q in &p[1..p.len() - 1] {
            owner.entry(q.clone()).or_insert(e);
        }
        paths[e] = Some(p);
    }

    while let Some(e) = queue.pop_front() {
        let (from, to) = (&router.points[edges[e].0], &router.points[edges[e].1]);
        if let Some(p) = router.search(from, to, |q| !owner.contains_key(q), |_, _| false) {
            commit(&mut owner, &mut paths, e, p);
            continue;
        }
        if rip_ups < opts.retries && crossings.is_empty() {
            if let Some(p) = router.search(from, to, |_| true, |_, _| false) {
                let victims: BTreeSet<usize> =
                    p.iter().filter_map(|q| owner.get(q).copied()).collect();
                for v in victims {
                    if let Some(old) = paths[v].take() {
                        for q in &old[1..old.len() - 1] {
                            if owner.get(q) == Some(&v) {
                                owner.remove(q);
                            }
                        }
                    }
                    queue.push_back(v);
                }
                commit(&mut owner, &mut paths, e, p);
                rip_ups += 1;
                continue;
            }
        }
        if dim == 2 && opts.allow_crossings {
            let crossed: BTreeSet<&GridPoint> =
                crossings.iter().map(|c: &Crossing| &c.point).collect();
            let p = router
                .search(
                    from,
                    to,
                    |q| !owner.contains_key(q),
                    |q, axis| {
                        !crossed.contains(q)
                            && owner.get(q).is_some_and(|&o| {
                                paths[o]
                                    .as_ref()
                                    .is_some_and(|op| straight_across(op, q, axis))
                            })
                    },
                )
                .ok_or_else(|| {
                    GeoError::Route(format!("edge {e} is cut off inside the routing box"))
                })?;
            for q in &p[1..p.len() - 1] {
                if let Some(&o) = owner.get(q) {
                    crossings.push(Crossing {
                        point: q.clone(),
                        paths: [o.min(e), o.max(e)],
                    });
                }
            }
            commit(&mut owner, &mut paths, e, p);
            continue;
        }
        return Err(GeoError::Route(format!(
            "edge {e} has no disjoint route after {rip_ups} rip-ups; halve the spacing"
        )));
    }
    let paths: Vec<Vec<GridPoint>> = paths
        .into_iter()
        .map(|p| p.expect("every edge routed"))
        .collect();
    crossings.sort_by(|a, b| a.point.cmp(&b.point));
    Ok(RoutePlan {
        points: points.to_vec(),
        edges: edges.to_vec(),
        paths,
        crossings,
        rip_ups,
    })
}
