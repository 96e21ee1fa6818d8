use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{GeoError, Result};
use crate::gadgets::{apply_plan, Family, GadgetKind, GadgetPlan, PlanApplication};
use crate::opcore::{HamiltonianExpr, Interaction, Site, SiteSystem};

/// Largest degree the reduced interaction graph may have.
pub const MAX_DEGREE: usize = 3;

/// Family shared by every term of a two-local Heisenberg or XY Hamiltonian.
pub fn target_family(h: &HamiltonianExpr) -> Result<Option<Family>> {
    let mut family = None;
    for t in h.terms() {
        let f = match t.label() {
            Some(Interaction::Heisenberg) => Family::Heisenberg,
            Some(Interaction::Xy) => Family::Xy,
            _ => {
                return Err(GeoError::Target(
                    "every term must be a named heisenberg or xy interaction".into(),
                ))
            }
        };
        if family.is_some_and(|g| g != f) {
            return Err(GeoError::Target("heisenberg and xy terms are mixed".into()));
        }
        family = Some(f);
    }
    if h.system().sites().iter().any(|s| s.dim != 2) {
        return Err(GeoError::Target("all sites must be qubits".into()));
    }
    Ok(family)
}

/// Unordered supports of the two-site terms, in term order.
pub fn interaction_edges(h: &HamiltonianExpr) -> Vec<(String, String)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in h.terms() {
        if let [a, b] = t.support() {
            let key = if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            };
            if seen.insert(key) {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

pub fn max_degree(h: &HamiltonianExpr) -> usize {
    let mut deg: BTreeMap<String, usize> = BTreeMap::new();
    for (a, b) in interaction_edges(h) {
        *deg.entry(a).or_default() += 1;
        *deg.entry(b).or_default() += 1;
    }
    deg.values().copied().max().unwrap_or(0)
}

/// Allocates mediator names `m0, m1, ...` that avoid a fixed set.
#[derive(Clone, Debug)]
pub(crate) struct Names {
    taken: BTreeSet<String>,
    next: usize,
}

impl Names {
    pub(crate) fn new(system: &SiteSystem) -> Self {
        Names {
            taken: system.sites().iter().map(|s| s.id.clone()).collect(),
            next: 0,
        }
    }

    pub(crate) fn fresh(&mut self) -> String {
        loop {
            let id = format!("m{}", self.next);
            self.next += 1;
            if self.taken.insert(id.clone()) {
                return id;
            }
        }
    }

    pub(crate) fn pair(&mut self) -> [String; 2] {
        [self.fresh(), self.fresh()]
    }
}

#[derive(Clone, Debug)]
pub struct Reduced {
    pub family: Option<Family>,
    pub plan: GadgetPlan,
    /// Rounds in application order (first entry applied first).
    pub inner_first: Vec<Vec<PlanApplication>>,
    /// The plan applied to the target, mediators placed on their edges.
    pub expr: HamiltonianExpr,
    pub energy_shift: f64,
    pub mediator_pairs: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeSummary {
    pub depth: usize,
    pub forks: usize,
    pub subdivisions: usize,
    pub max_degree: usize,
}

impl Reduced {
    pub fn summary(&self) -> DegreeSummary {
        let count = |k: GadgetKind| {
            self.inner_first
                .iter()
                .flatten()
                .filter(|a| a.kind == k)
                .count()
        };
        DegreeSummary {
            depth: self.plan.depth(),
            forks: count(GadgetKind::Fork),
            subdivisions: count(GadgetKind::SubdivPos),
            max_degree: max_degree(&self.expr),
        }
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Subdivide every edge, then split high-degree vertices with rounds of forks
/// that pair up their incident edges, until no vertex has degree above three.
///
/// Subdivision mediators sit at one and two thirds along their edge; a fork's
/// shared mediator at the mean of the two sites it joins and its partner
/// halfway back toward the split vertex.
pub fn reduce_degree(h: &HamiltonianExpr, delta_base: f64) -> Result<Reduced> {
    let family = target_family(h)?;
    if h.terms().iter().any(|t| t.support().len() != 2) {
        return Err(GeoError::Target("terms must act on two sites".into()));
    }
    let Some(fam) = family else {
        return Ok(Reduced {
            family,
            plan: GadgetPlan {
                delta_base,
                rounds: vec![],
            },
            inner_first: vec![],
            expr: h.clone(),
            energy_shift: 0.0,
            mediator_pairs: vec![],
        });
    };
    let mut coords: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for s in h.system().sites() {
        let c = s
            .coord
            .clone()
            .ok_or_else(|| GeoError::Target(format!("site `{}` has no coordinate", s.id)))?;
        coords.insert(s.id.clone(), c);
    }
    let mut names = Names::new(h.system());
    let mut adj: BTreeMap<String, BTreeSet<String>> = coords
        .keys()
        .map(|k| (k.clone(), BTreeSet::new()))
        .collect();
    let link = |adj: &mut BTreeMap<String, BTreeSet<String>>, a: &str, b: &str| {
        adj.entry(a.into()).or_default().insert(b.into());
        adj.entry(b.into()).or_default().insert(a.into());
    };
    let unlink = |adj: &mut BTreeMap<String, BTreeSet<String>>, a: &str, b: &str| {
        adj.get_mut(a).map(|s| s.remove(b));
        adj.get_mut(b).map(|s| s.remove(a));
    };

    let mut inner_first: Vec<Vec<PlanApplication>> = Vec::new();
    let mut round = Vec::new();
    for (a, b) in interaction_edges(h) {
        let meds = names.pair();
        coords.insert(meds[0].clone(), lerp(&coords[&a], &coords[&b], 1.0 / 3.0));
        coords.insert(meds[1].clone(), lerp(&coords[&a], &coords[&b], 2.0 / 3.0));
        link(&mut adj, &a, &meds[0]);
        link(&mut adj, &meds[0], &meds[1]);
        link(&mut adj, &meds[1], &b);
        round.push(PlanApplication {
            kind: GadgetKind::SubdivPos,
            sites: vec![a, b],
            lambda: None,
            mu: None,
            mediators: meds,
            family: fam,
        });
    }
    inner_first.push(round);

    loop {
        let heavy: Vec<String> = adj
            .iter()
            .filter(|(_, n)| n.len() > MAX_DEGREE)
            .map(|(k, _)| k.clone())
            .collect();
        if heavy.is_empty() {
            break;
        }
        let mut round = Vec::new();
        for v in heavy {
            let nbrs: Vec<String> = adj[&v].iter().cloned().collect();
            for pair in nbrs.chunks_exact(2) {
                let (n1, n2) = (&pair[0], &pair[1]);
                let meds = names.pair();
                let shared = lerp(&coords[n1], &coords[n2], 0.5);
                coords.insert(meds[1].clone(), lerp(&coords[&v], &shared, 0.5));
                coords.insert(meds[0].clone(), shared);
                unlink(&mut adj, n1, &v);
                unlink(&mut adj, n2, &v);
                link(&mut adj, &v, &meds[1]);
                link(&mut adj, &meds[1], &meds[0]);
                link(&mut adj, n1, &meds[0]);
                link(&mut adj, n2, &meds[0]);
                link(&mut adj, n1, n2);
                round.push(PlanApplication {
                    kind: GadgetKind::Fork,
                    sites: vec![n1.clone(), n2.clone(), v.clone()],
                    lambda: None,
                    mu: None,
                    mediators: meds,
                    family: fam,
                });
            }
        }
        inner_first.push(round);
    }

    let plan = GadgetPlan::scheduled(delta_base, inner_first.iter().rev().cloned().collect());
    let out = apply_plan(h, &plan)?;
    let expr = relocate(&out.expr, &coords)?;
    Ok(Reduced {
        family,
        plan,
        inner_first,
        expr,
        energy_shift: out.energy_shift,
        mediator_pairs: out.mediator_pairs,
    })
}

/// Same terms on a system whose coordinates come from `coords`.
pub(crate) fn relocate(
    h: &HamiltonianExpr,
    coords: &BTreeMap<String, Vec<f64>>,
) -> Result<HamiltonianExpr> {
    let sites = h
        .system()
        .sites()
        .iter()
        .map(|s| match coords.get(&s.id) {
            Some(c) => Site::at(s.id.clone(), s.dim, c.clone()),
            None => s.clone(),
        })
        .collect();
    let mut out = HamiltonianExpr::new(SiteSystem::new(sites)?.with_cap(h.system().cap()));
    for t in h.terms() {
        out.add_term(t.clone())?;
    }
    Ok(out)
}
