use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::degree::{
    interaction_edges, reduce_degree, relocate, target_family, DegreeSummary, Names,
};
use super::domain::{central_vertex, extract_domain, FundamentalDomain};
use super::graph::{check_locality, EmbeddedGraph, LocalityParams, PVertex, PeriodicGraph};
use super::route::{route_paths, snap_with, RouteOptions, RoutePlan, Snap};
use super::{GeoError, Result};
use crate::gadgets::{
    apply_plan, certify, Family, GadgetKind, GadgetPlan, Ledger, PlanApplication,
};
use crate::opcore::HamiltonianExpr;
use crate::simcheck::SimulationReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileParams {
    pub locality: LocalityParams,
    /// Initial grid spacing for snapping the degree-reduced graph.
    pub spacing: f64,
    pub delta_base: f64,
    pub route: RouteOptions,
    /// Certify numerically when the simulator has at most this many qubits.
    pub certify_max_sites: usize,
    pub certify_eps: f64,
}

impl Default for CompileParams {
    fn default() -> Self {
        CompileParams {
            locality: LocalityParams { c: 5, big_c: 1.5 },
            spacing: 1.0 / 3.0,
            delta_base: 1e4,
            route: RouteOptions::default(),
            certify_max_sites: 8,
            certify_eps: 0.1,
        }
    }
}

/// Lattice path carrying one edge of the degree-reduced graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainPath {
    pub a: String,
    pub b: String,
    pub path: Vec<PVertex>,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub family: Option<Family>,
    pub lattice: String,
    pub degree: DegreeSummary,
    pub domain: FundamentalDomain,
    pub snap: Snap,
    pub route: RoutePlan,
    pub chains: Vec<ChainPath>,
    /// Lattice vertex of every simulator qubit.
    pub placement: BTreeMap<String, PVertex>,
    pub plan: GadgetPlan,
    pub ledger: Ledger,
    /// Simulator with every qubit at its lattice position.
    pub sim: HamiltonianExpr,
    pub energy_shift: f64,
    pub mediator_pairs: Vec<[String; 2]>,
    pub certification: Option<SimulationReport>,
}

impl Compiled {
    pub fn depth(&self) -> usize {
        self.plan.depth()
    }

    pub fn total_chain_length(&self) -> usize {
        self.chains.iter().map(|c| c.path.len() - 1).sum()
    }

    /// Chains share lattice vertices only at common endpoints.
    pub fn chains_disjoint(&self) -> bool {
        let ends: BTreeSet<&PVertex> = self
            .chains
            .iter()
            .flat_map(|c| [&c.path[0], c.path.last().unwrap()])
            .collect();
        let mut seen = BTreeSet::new();
        self.chains.iter().all(|c| {
            c.path[1..c.path.len() - 1]
                .iter()
                .all(|v| !ends.contains(v) && seen.insert(v))
        })
    }
}

/// Interaction graph of `h` with the sites' coordinates.
pub fn interaction_graph(h: &HamiltonianExpr) -> Result<EmbeddedGraph> {
    let sites = h.system().sites();
    let coords: Vec<Vec<f64>> = sites
        .iter()
        .map(|s| {
            s.coord
                .clone()
                .ok_or_else(|| GeoError::Target(format!("site `{}` has no coordinate", s.id)))
        })
        .collect::<Result<_>>()?;
    let index: BTreeMap<&str, usize> = sites
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i))
        .collect();
    let edges = interaction_edges(h)
        .iter()
        .map(|(a, b)| (index[a.as_str()], index[b.as_str()]))
        .collect();
    let dim = coords.first().map_or(1, Vec::len);
    EmbeddedGraph::new(
        dim,
        sites.iter().map(|s| s.id.clone()).collect(),
        coords,
        edges,
    )
}

fn two_colour(g: &EmbeddedGraph) -> Result<Vec<u8>> {
    let adj = g.adjacency();
    let mut col = vec![u8::MAX; g.len()];
    for s in 0..g.len() {
        if col[s] != u8::MAX {
            continue;
        }
        col[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if col[u] == u8::MAX {
                    col[u] = col[v] ^ 1;
                    queue.push_back(u);
                } else if col[u] == col[v] {
                    return Err(GeoError::Parity(format!(
                        "odd cycle through `{}`: mediator chains need odd lattice paths, which a bipartite lattice only offers between opposite colours",
                        g.ids[v]
                    )));
                }
            }
        }
    }
    Ok(col)
}

/// Step direction between neighbouring grid points.
fn direction(a: &[i64], b: &[i64]) -> (usize, bool) {
    let d = a
        .iter()
        .zip(b)
        .position(|(x, y)| x != y)
        .expect("distinct points");
    (d, b[d] > a[d])
}

fn simple_paths(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<Vec<usize>> {
    const CAP: usize = 4096;
    let mut out = Vec::new();
    let mut stack = vec![vec![from]];
    while let Some(p) = stack.pop() {
        let last = *p.last().unwrap();
        if last == to {
            out.push(p);
            if out.len() == CAP {
                break;
            }
            continue;
        }
        for &n in adj[last].iter().rev() {
            if !p.contains(&n) {
                let mut q = p.clone();
                q.push(n);
                stack.push(q);
            }
        }
    }
    out.sort_by_key(Vec::len);
    out
}

/// Paths from `host` to each port, pairwise disjoint away from `host`, with
/// least total length.
fn disjoint_paths(adj: &[Vec<usize>], host: usize, ports: &[usize]) -> Option<Vec<Vec<usize>>> {
    let options: Vec<Vec<Vec<usize>>> = ports.iter().map(|&p| simple_paths(adj, host, p)).collect();
    fn search(
        options: &[Vec<Vec<usize>>],
        i: usize,
        used: &mut BTreeSet<usize>,
        chosen: &mut Vec<Vec<usize>>,
        best: &mut Option<(usize, Vec<Vec<usize>>)>,
    ) {
        let len: usize = chosen.iter().map(Vec::len).sum();
        if best.as_ref().is_some_and(|(b, _)| len >= *b) {
            return;
        }
        if i == options.len() {
            *best = Some((len, chosen.clone()));
            return;
        }
        for p in &options[i] {
            if p[1..].iter().any(|v| used.contains(v)) {
                continue;
            }
            used.extend(p[1..].iter().copied());
            chosen.push(p.clone());
            search(options, i + 1, used, chosen, best);
            chosen.pop();
            p[1..].iter().for_each(|v| {
                used.remove(v);
            });
        }
    }
    let mut best = None;
    search(
        &options,
        0,
        &mut BTreeSet::new(),
        &mut Vec::new(),
        &mut best,
    );
    best.map(|(_, p)| p)
}

fn bfs_local(adj: &[Vec<usize>], from: usize, to: usize) -> Option<Vec<usize>> {
    simple_paths(adj, from, to).into_iter().next()
}

struct Embedding {
    snap: Snap,
    route: RoutePlan,
    hosts: Vec<PVertex>,
    chains: Vec<Vec<PVertex>>,
}

impl Embedding {
    fn total_length(&self) -> usize {
        self.chains.iter().map(|c| c.len() - 1).sum()
    }
}

type Colours = (Vec<u8>, Vec<u8>);

fn embed(
    f: &EmbeddedGraph,
    g: &PeriodicGraph,
    dom: &FundamentalDomain,
    colours: Option<&Colours>,
    required: Option<&[u8]>,
    params: &CompileParams,
) -> Result<Embedding> {
    let colour = |v: &PVertex| colours.map(|c| PeriodicGraph::colour_of(c, v));
    let matches = |u: usize, v: &PVertex| required.is_none_or(|r| colour(v) == Some(r[u]));
    let snap = snap_with(&f.coords, params.spacing, |u, k| {
        (0..dom.len()).any(|i| matches(u, &dom.member(k, i)))
    })?;
    let route = route_paths(&snap.points, &f.edges, &params.route)?;
    if !route.crossings.is_empty() {
        return Err(GeoError::Route(format!(
            "{} crossing(s) remain; placing crossing gadgets on the lattice is not supported, lower the spacing",
            route.crossings.len()
        )));
    }
    let tadj = dom.induced(g);

    // Exit port of every edge at each of its ends.
    let mut exits: Vec<Vec<(usize, usize)>> = vec![Vec::new(); f.len()];
    for (e, (&(u, v), p)) in f.edges.iter().zip(&route.paths).enumerate() {
        let (d, pos) = direction(&p[0], &p[1]);
        exits[u].push((e, dom.port(d, pos).0));
        let (d, pos) = direction(&p[p.len() - 1], &p[p.len() - 2]);
        exits[v].push((e, dom.port(d, pos).0));
    }
    let mut hosts = Vec::with_capacity(f.len());
    let mut local: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for u in 0..f.len() {
        let k = &snap.points[u];
        let ports: Vec<usize> = exits[u].iter().map(|x| x.1).collect();
        let mut candidates: Vec<usize> = (0..dom.len())
            .filter(|&i| matches(u, &dom.member(k, i)))
            .collect();
        if let Ok(c) = central_vertex(&tadj, &ports[..ports.len().min(3)]) {
            if let Some(pos) = candidates.iter().position(|&i| i == c.y) {
                candidates.remove(pos);
                candidates.insert(0, c.y);
            }
        }
        let mut best: Option<(usize, usize, Vec<Vec<usize>>)> = None;
        for &h in &candidates {
            if let Some(paths) = disjoint_paths(&tadj, h, &ports) {
                let len: usize = paths.iter().map(Vec::len).sum();
                if best.as_ref().is_none_or(|(b, _, _)| len < *b) {
                    best = Some((len, h, paths));
                }
            }
        }
        let (_, h, paths) = best.ok_or_else(|| {
            GeoError::Embed(format!(
                "no vertex of T{k:?} reaches the ports of `{}` disjointly",
                f.ids[u]
            ))
        })?;
        for (&(e, _), p) in exits[u].iter().zip(paths) {
            local.insert((u, e), p);
        }
        hosts.push(dom.member(k, h));
    }

    let mut chains = Vec::with_capacity(f.edges.len());
    for (e, (&(u, v), p)) in f.edges.iter().zip(&route.paths).enumerate() {
        let lift =
            |k: &[i64], idx: &[usize]| idx.iter().map(|&i| dom.member(k, i)).collect::<Vec<_>>();
        let mut gp = lift(&p[0], &local[&(u, e)]);
        let last = p.len() - 1;
        for s in 0..last {
            let (d, pos) = direction(&p[s], &p[s + 1]);
            let entry = dom.port(d, pos).1;
            let inner = if s + 1 == last {
                let mut back = local[&(v, e)].clone();
                back.reverse();
                back
            } else {
                let (d2, pos2) = direction(&p[s + 1], &p[s + 2]);
                bfs_local(&tadj, entry, dom.port(d2, pos2).0).expect("T is connected")
            };
            if inner[0] != entry {
                return Err(GeoError::Embed(format!(
                    "edge {e}: entry and host path disagree"
                )));
            }
            gp.extend(lift(&p[s + 1], &inner));
        }
        if let Some(w) = gp.windows(2).find(|w| !g.adjacent(&w[0], &w[1])) {
            return Err(GeoError::Embed(format!(
                "edge {e}: {:?} and {:?} are not adjacent",
                w[0], w[1]
            )));
        }
        if gp.len() % 2 != 0 {
            return Err(GeoError::Parity(format!(
                "edge ({}, {}) maps to a lattice path of even length {}",
                f.ids[u],
                f.ids[v],
                gp.len() - 1
            )));
        }
        chains.push(gp);
    }
    let host_set: BTreeSet<&PVertex> = hosts.iter().collect();
    let mut interior = BTreeSet::new();
    for c in &chains {
        for x in &c[1..c.len() - 1] {
            if host_set.contains(x) || !interior.insert(x.clone()) {
                return Err(GeoError::Embed(format!(
                    "lattice vertex {x:?} is used twice"
                )));
            }
        }
    }
    Ok(Embedding {
        snap,
        route,
        hosts,
        chains,
    })
}

/// Odd split `(l1, l2, l1)` of an odd span `l >= 3`, `l1` close to `l / 3`.
pub(crate) fn split(l: usize) -> (usize, usize, usize) {
    let mut l1 = l.div_ceil(3);
    if l1.is_multiple_of(2) {
        l1 -= 1;
    }
    while l < 2 * l1 + 1 {
        l1 -= 2;
    }
    (l1, l - 2 * l1, l1)
}

/// Compile a two-local Heisenberg or XY target onto a translation-invariant lattice:
/// reduce degree, snap to the hypercubic grid, route edges as disjoint grid
/// paths, lift the grid into the lattice through translates of a fundamental
/// domain, and stretch every edge along its lattice path with nested
/// subdivision rounds.
pub fn compile(
    target: &HamiltonianExpr,
    g: &PeriodicGraph,
    params: &CompileParams,
) -> Result<Compiled> {
    let family = target_family(target)?;
    let tg = interaction_graph(target)?;
    if !tg.is_empty() && tg.dim != g.dim {
        return Err(GeoError::Target(format!(
            "target is {}-dimensional, lattice {}-dimensional",
            tg.dim, g.dim
        )));
    }
    let loc = check_locality(&tg, &params.locality);
    if !loc.pass {
        return Err(GeoError::NotLocal(format!(
            "{} crowded ball(s), {} long edge(s); largest ball {}, longest edge {:.3}",
            loc.balls.len(),
            loc.edges.len(),
            loc.max_ball,
            loc.max_edge
        )));
    }
    let reduced = reduce_degree(target, params.delta_base)?;
    let f = interaction_graph(&reduced.expr)?;
    let domain = extract_domain(g)?;
    let colours = g.colouring();
    let fcol = if colours.is_some() {
        Some(two_colour(&f)?)
    } else {
        None
    };

    let mut best: Option<Embedding> = None;
    let mut first_err = None;
    for flip in [0u8, 1] {
        let required: Option<Vec<u8>> = fcol.as_ref().map(|c| c.iter().map(|x| x ^ flip).collect());
        if flip == 1 && required.is_none() {
            break;
        }
        match embed(
            &f,
            g,
            &domain,
            colours.as_ref(),
            required.as_deref(),
            params,
        ) {
            Ok(e) => {
                if best
                    .as_ref()
                    .is_none_or(|b| e.total_length() < b.total_length())
                {
                    best = Some(e);
                }
            }
            Err(err) => {
                first_err.get_or_insert(err);
            }
        }
    }
    let emb = match best {
        Some(e) => e,
        None => return Err(first_err.expect("at least one attempt")),
    };

    // Nested subdivisions along each lattice path.
    let mut names = Names::new(reduced.expr.system());
    let mut placement: BTreeMap<String, PVertex> = f
        .ids
        .iter()
        .cloned()
        .zip(emb.hosts.iter().cloned())
        .collect();
    let mut segs: Vec<(String, usize, String, usize, usize)> = f
        .edges
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            (
                f.ids[u].clone(),
                0,
                f.ids[v].clone(),
                emb.chains[e].len() - 1,
                e,
            )
        })
        .collect();
    let mut chain_rounds: Vec<Vec<PlanApplication>> = Vec::new();
    let fam = family.unwrap_or(Family::Heisenberg);
    loop {
        let mut round = Vec::new();
        let mut next = Vec::new();
        for (a, pa, b, pb, e) in segs {
            if pb - pa <= 1 {
                next.push((a, pa, b, pb, e));
                continue;
            }
            let (l1, _, l3) = split(pb - pa);
            let meds = names.pair();
            placement.insert(meds[0].clone(), emb.chains[e][pa + l1].clone());
            placement.insert(meds[1].clone(), emb.chains[e][pb - l3].clone());
            round.push(PlanApplication {
                kind: GadgetKind::SubdivPos,
                sites: vec![a.clone(), b.clone()],
                lambda: None,
                mu: None,
                mediators: meds.clone(),
                family: fam,
            });
            next.push((a, pa, meds[0].clone(), pa + l1, e));
            next.push((meds[0].clone(), pa + l1, meds[1].clone(), pb - l3, e));
            next.push((meds[1].clone(), pb - l3, b, pb, e));
        }
        segs = next;
        if round.is_empty() {
            break;
        }
        chain_rounds.push(round);
    }
    let mut inner_first = reduced.inner_first.clone();
    inner_first.extend(chain_rounds);
    let plan = GadgetPlan::scheduled(params.delta_base, inner_first.into_iter().rev().collect());
    let out = apply_plan(target, &plan)?;

    let mut positions = BTreeMap::new();
    for s in out.expr.system().sites() {
        let v = placement
            .get(&s.id)
            .ok_or_else(|| GeoError::Embed(format!("site `{}` was never placed", s.id)))?;
        positions.insert(s.id.clone(), g.position(v));
    }
    let used: BTreeSet<&PVertex> = placement.values().collect();
    if used.len() != placement.len() {
        return Err(GeoError::Embed("two qubits share a lattice vertex".into()));
    }
    for t in out.expr.terms() {
        if let [a, b] = t.support() {
            if !g.adjacent(&placement[a], &placement[b]) {
                return Err(GeoError::Embed(format!(
                    "term on ({a}, {b}) is not a lattice edge"
                )));
            }
        }
    }
    let sim = relocate(&out.expr, &positions)?;

    let certification = if family.is_some() && out.expr.system().len() <= params.certify_max_sites {
        let cut = plan
            .rounds
            .iter()
            .map(|r| r.delta)
            .fold(f64::INFINITY, f64::min)
            / 2.0;
        Some(certify(
            target,
            &out.expr,
            out.energy_shift,
            &out.mediator_pairs,
            cut,
            f64::INFINITY,
            params.certify_eps,
        )?)
    } else {
        None
    };
    let chains = f
        .edges
        .iter()
        .zip(emb.chains)
        .map(|(&(u, v), path)| ChainPath {
            a: f.ids[u].clone(),
            b: f.ids[v].clone(),
            path,
        })
        .collect();
    Ok(Compiled {
        family,
        lattice: g.name.clone(),
        degree: reduced.summary(),
        domain,
        snap: emb.snap,
        route: emb.route,
        chains,
        placement,
        plan,
        ledger: out.ledger,
        sim,
        energy_shift: out.energy_shift,
        mediator_pairs: out.mediator_pairs,
        certification,
    })
}
