use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{apply, find_target, Family, GadgetApplication, GadgetError, GadgetKind, Result};
use crate::opcore::HamiltonianExpr;

/// A gadget inside a plan. Missing `lambda`/`mu` are read off the target
/// terms the gadget compiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanApplication {
    pub kind: GadgetKind,
    pub sites: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub mediators: [String; 2],
    pub family: Family,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub delta: f64,
    pub applications: Vec<PlanApplication>,
}

/// Rounds of gadget applications, listed outermost first.
///
/// The outermost round carries the largest heavy scale and is applied last:
/// round `r + 1` produces the couplings of strength `√Δ_(r+1)` that round `r`
/// compiles further, so application runs from the last round to the first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GadgetPlan {
    pub delta_base: f64,
    pub rounds: Vec<Round>,
}

impl GadgetPlan {
    /// Default heavy scale of round `r` (1-based): `Δ_base^((2/3)^(r-1))`
    /// rounded to the nearest power of ten.
    pub fn scheduled_delta(delta_base: f64, r: usize) -> f64 {
        let exponent = delta_base.log10() * (2.0f64 / 3.0).powi(r as i32 - 1);
        10f64.powi(exponent.round() as i32)
    }

    /// A plan whose round scales follow [`GadgetPlan::scheduled_delta`].
    pub fn scheduled(delta_base: f64, rounds: Vec<Vec<PlanApplication>>) -> Self {
        let rounds = rounds
            .into_iter()
            .enumerate()
            .map(|(i, applications)| Round {
                delta: Self::scheduled_delta(delta_base, i + 1),
                applications,
            })
            .collect();
        GadgetPlan { delta_base, rounds }
    }

    pub fn depth(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.iter().all(|r| r.applications.is_empty())
    }

    /// Static checks: decreasing scales and no interference inside a round.
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.rounds.iter().enumerate() {
            if !(r.delta > 0.0) || !r.delta.is_finite() {
                return Err(GadgetError::BadDelta(r.delta));
            }
            if i > 0 && r.delta >= self.rounds[i - 1].delta {
                return Err(GadgetError::BadPlan(format!(
                    "round {} scale {} is not below round {} scale {}",
                    i + 1,
                    r.delta,
                    i,
                    self.rounds[i - 1].delta
                )));
            }
            let round = i + 1;
            let mut mediators = HashSet::new();
            let mut edges = HashSet::new();
            for app in &r.applications {
                for m in &app.mediators {
                    if !mediators.insert(m.clone()) {
                        return Err(GadgetError::Interference {
                            round,
                            detail: format!("mediator `{m}` allocated twice"),
                        });
                    }
                }
                for (a, b) in target_pairs(app.kind, &app.sites) {
                    let key = if a <= b {
                        (a.clone(), b.clone())
                    } else {
                        (b.clone(), a.clone())
                    };
                    if !edges.insert(key) {
                        return Err(GadgetError::Interference {
                            round,
                            detail: format!("edge ({a}, {b}) compiled by two applications"),
                        });
                    }
                }
            }
            for app in &r.applications {
                if let Some(s) = app.sites.iter().find(|s| mediators.contains(*s)) {
                    return Err(GadgetError::Interference {
                        round,
                        detail: format!("site `{s}` is a mediator created in the same round"),
                    });
                }
            }
        }
        Ok(())
    }
}

fn target_pairs(kind: GadgetKind, s: &[String]) -> Vec<(String, String)> {
    let pair = |i: usize, j: usize| s.get(i).zip(s.get(j)).map(|(a, b)| (a.clone(), b.clone()));
    match kind {
        GadgetKind::SubdivPos | GadgetKind::SubdivNeg => pair(0, 1).into_iter().collect(),
        GadgetKind::Fork => [pair(0, 2), pair(1, 2)].into_iter().flatten().collect(),
        GadgetKind::Crossing => [pair(0, 3), pair(1, 2)].into_iter().flatten().collect(),
    }
}

fn resolve(h: &HamiltonianExpr, app: &PlanApplication) -> Result<GadgetApplication> {
    let pairs = target_pairs(app.kind, &app.sites);
    let read = |k: usize| -> Result<f64> {
        let (a, b) = pairs
            .get(k)
            .ok_or_else(|| GadgetError::BadSites(app.sites.clone()))?;
        let i = find_target(h, app.family, a, b, None).ok_or_else(|| GadgetError::MissingTerm {
            family: app.family,
            a: a.clone(),
            b: b.clone(),
        })?;
        Ok(h.terms()[i].coeff())
    };
    let lambda = match app.lambda {
        Some(l) => l,
        None if app.kind == GadgetKind::SubdivNeg => -read(0)?,
        None => read(0)?,
    };
    let mu = match (app.kind, app.mu) {
        (_, Some(m)) => m,
        (GadgetKind::Fork | GadgetKind::Crossing, None) => read(1)?,
        _ => 0.0,
    };
    Ok(GadgetApplication {
        kind: app.kind,
        sites: app.sites.clone(),
        lambda,
        mu,
        mediators: app.mediators.clone(),
        family: app.family,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerStep {
    /// 1-based round in plan order (1 = outermost).
    pub round: usize,
    pub delta: f64,
    pub application: GadgetApplication,
    /// Original target terms whose descendants this step compiled.
    pub origins: Vec<usize>,
    pub energy_shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    /// Index of the original target term.
    pub term: usize,
    pub description: String,
    /// Indices into [`Ledger::steps`], in application order.
    pub steps: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub steps: Vec<LedgerStep>,
    pub chains: Vec<Chain>,
}

#[derive(Clone, Debug)]
pub struct PlanOutput {
    pub expr: HamiltonianExpr,
    pub ledger: Ledger,
    /// Sum of the per-gadget energy shifts.
    pub energy_shift: f64,
    pub mediator_pairs: Vec<[String; 2]>,
}

fn describe(h: &HamiltonianExpr, i: usize) -> String {
    let t = &h.terms()[i];
    let name = t
        .label()
        .map_or_else(|| "op".to_string(), |l| l.to_string());
    format!("{} {}({})", t.coeff(), name, t.support().join(","))
}

/// Apply `plan` to `h`, innermost round first, and record a ledger.
pub fn apply_plan(h: &HamiltonianExpr, plan: &GadgetPlan) -> Result<PlanOutput> {
    plan.validate()?;
    let mut expr = h.clone();
    let mut origins: Vec<BTreeSet<usize>> =
        (0..h.terms().len()).map(|i| BTreeSet::from([i])).collect();
    let mut steps = Vec::new();
    let mut energy_shift = 0.0;
    let mut mediator_pairs = Vec::new();
    for (ri, round) in plan.rounds.iter().enumerate().rev() {
        for app in &round.applications {
            let resolved = resolve(&expr, app)?;
            let applied = apply(&expr, &resolved, round.delta)?;
            let inherited: BTreeSet<usize> = applied
                .consumed
                .iter()
                .flat_map(|&i| origins[i].iter().copied())
                .collect();
            let mut next: Vec<BTreeSet<usize>> = origins
                .iter()
                .enumerate()
                .filter(|(i, _)| !applied.consumed.contains(i))
                .map(|(_, o)| o.clone())
                .collect();
            next.resize(applied.expr.terms().len(), inherited.clone());
            origins = next;
            steps.push(LedgerStep {
                round: ri + 1,
                delta: round.delta,
                application: resolved,
                origins: inherited.into_iter().collect(),
                energy_shift: applied.energy_shift,
            });
            energy_shift += applied.energy_shift;
            mediator_pairs.push(app.mediators.clone());
            expr = applied.expr;
        }
    }
    let chains = (0..h.terms().len())
        .map(|i| Chain {
            term: i,
            description: describe(h, i),
            steps: steps
                .iter()
                .enumerate()
                .filter(|(_, s)| s.origins.contains(&i))
                .map(|(k, _)| k)
                .collect(),
        })
        .collect();
    Ok(PlanOutput {
        expr,
        ledger: Ledger { steps, chains },
        energy_shift,
        mediator_pairs,
    })
}

/// Re-apply the recorded steps to `h`.
pub fn replay(h: &HamiltonianExpr, ledger: &Ledger) -> Result<HamiltonianExpr> {
    let mut expr = h.clone();
    for step in &ledger.steps {
        expr = apply(&expr, &step.application, step.delta)?.expr;
    }
    Ok(expr)
}
