use super::*;
use crate::opcore::SiteSystem;

fn pair_target(lambda: f64) -> HamiltonianExpr {
    let mut h = HamiltonianExpr::new(SiteSystem::qubits("q", 2));
    h.add_named(Interaction::Heisenberg, &["q0", "q1"], lambda)
        .unwrap();
    h
}

#[test]
fn subdivision_adds_two_mediators_and_exact_heavy_term() {
    let h = pair_target(1.0);
    let out = subdivide(&h, ("q0", "q1"), 1.0, 1, 1e4, Family::Heisenberg).unwrap();
    assert_eq!(out.expr.system().len(), 4);
    assert_eq!(out.consumed, vec![0]);
    assert_eq!(
        out.application.mediators,
        ["m0".to_string(), "m1".to_string()]
    );
    let heavy = out
        .expr
        .terms()
        .iter()
        .find(|t| t.support() == ["m0", "m1"])
        .unwrap();
    assert_eq!(heavy.coeff(), 1e4);
    assert!(out
        .expr
        .find_named(&Interaction::Heisenberg, "q0", "q1")
        .is_none());
    assert_eq!(out.energy_shift, -3e4 - 1.5 * 2.0);
}

#[test]
fn unmatched_target_is_left_alone() {
    let h = pair_target(0.5);
    let out = subdivide(&h, ("q0", "q1"), 1.0, 1, 1e4, Family::Heisenberg).unwrap();
    assert!(out.consumed.is_empty());
    assert!(out
        .expr
        .find_named(&Interaction::Heisenberg, "q0", "q1")
        .is_some());
}

#[test]
fn degenerate_and_colliding_gadgets_are_rejected() {
    let h = pair_target(1.0);
    assert!(matches!(
        subdivide(&h, ("q0", "q1"), 0.0, 1, 1e4, Family::Xy),
        Err(GadgetError::Degenerate(_))
    ));
    let h3 = HamiltonianExpr::new(SiteSystem::qubits("q", 3));
    assert!(matches!(
        fork(&h3, ["q0", "q1", "q2"], 0.0, 0.0, 1e4, Family::Xy),
        Err(GadgetError::Degenerate(_))
    ));
    let app = GadgetApplication {
        kind: GadgetKind::SubdivPos,
        sites: vec!["q0".into(), "q1".into()],
        lambda: 1.0,
        mu: 0.0,
        mediators: ["q1".into(), "m9".into()],
        family: Family::Heisenberg,
    };
    assert!(matches!(
        apply(&h, &app, 1e4),
        Err(GadgetError::MediatorCollision(_))
    ));
    assert!(matches!(
        apply(
            &h,
            &GadgetApplication {
                lambda: 1.0,
                ..app.clone()
            },
            -1.0
        ),
        Err(GadgetError::BadDelta(_))
    ));
    let same = GadgetApplication {
        sites: vec!["q0".into(), "q0".into()],
        mediators: ["a".into(), "b".into()],
        ..app
    };
    assert!(matches!(
        apply(&h, &same, 1e4),
        Err(GadgetError::BadSites(_))
    ));
}

#[test]
fn large_couplings_are_balanced() {
    assert_eq!(split_coupling(0.5), (1.0, 0.5));
    assert_eq!(split_coupling(-4.0), (2.0, -2.0));
}

#[test]
fn crossing_with_zero_couplings_keeps_only_h12_compensation() {
    let h = HamiltonianExpr::new(SiteSystem::qubits("q", 4));
    let out = crossing(
        &h,
        ["q0", "q1", "q2", "q3"],
        0.0,
        0.0,
        1e3,
        Family::Heisenberg,
    )
    .unwrap();
    let logical: Vec<_> = out
        .expr
        .terms()
        .iter()
        .filter(|t| !t.support().iter().any(|s| s.starts_with('m')))
        .collect();
    assert_eq!(logical.len(), 1);
    assert_eq!(logical[0].support(), ["q0", "q1"]);
}

fn sub(sites: [&str; 2], mediators: [&str; 2]) -> PlanApplication {
    PlanApplication {
        kind: GadgetKind::SubdivPos,
        sites: sites.iter().map(|s| s.to_string()).collect(),
        lambda: None,
        mu: None,
        mediators: mediators.map(String::from),
        family: Family::Heisenberg,
    }
}

#[test]
fn schedule_rounds_to_powers_of_ten() {
    assert_eq!(GadgetPlan::scheduled_delta(1e6, 1), 1e6);
    assert_eq!(GadgetPlan::scheduled_delta(1e6, 2), 1e4);
    assert_eq!(GadgetPlan::scheduled_delta(1e6, 3), 1e3);
    let plan = GadgetPlan::scheduled(1e6, vec![vec![], vec![]]);
    assert_eq!(plan.rounds[1].delta, 1e4);
}

#[test]
fn plan_validation() {
    let increasing = GadgetPlan {
        delta_base: 1e3,
        rounds: vec![
            Round {
                delta: 1e3,
                applications: vec![],
            },
            Round {
                delta: 1e4,
                applications: vec![],
            },
        ],
    };
    assert!(matches!(
        increasing.validate(),
        Err(GadgetError::BadPlan(_))
    ));
    let twice = GadgetPlan {
        delta_base: 1e4,
        rounds: vec![Round {
            delta: 1e4,
            applications: vec![
                sub(["q0", "q1"], ["m0", "m1"]),
                sub(["q1", "q0"], ["m2", "m3"]),
            ],
        }],
    };
    assert!(matches!(
        twice.validate(),
        Err(GadgetError::Interference { .. })
    ));
    let uses_fresh = GadgetPlan {
        delta_base: 1e4,
        rounds: vec![Round {
            delta: 1e4,
            applications: vec![
                sub(["q0", "q1"], ["m0", "m1"]),
                sub(["m0", "q2"], ["m2", "m3"]),
            ],
        }],
    };
    assert!(matches!(
        uses_fresh.validate(),
        Err(GadgetError::Interference { .. })
    ));
}

#[test]
fn empty_plan_is_identity() {
    let h = pair_target(1.0);
    let out = apply_plan(&h, &GadgetPlan::default()).unwrap();
    assert_eq!(out.expr, h);
    assert_eq!(out.ledger.chains.len(), 1);
    assert!(out.ledger.chains[0].steps.is_empty());
}

#[test]
fn nested_chain_ledger_and_replay() {
    let h = pair_target(1.0);
    let plan = GadgetPlan {
        delta_base: 1e6,
        rounds: vec![
            Round {
                delta: 1e6,
                applications: vec![sub(["q0", "m0"], ["m2", "m3"])],
            },
            Round {
                delta: 1e3,
                applications: vec![sub(["q0", "q1"], ["m0", "m1"])],
            },
        ],
    };
    let out = apply_plan(&h, &plan).unwrap();
    assert_eq!(out.ledger.steps.len(), 2);
    assert_eq!(out.ledger.steps[0].round, 2);
    assert_eq!(out.ledger.chains[0].steps, vec![0, 1]);
    assert_eq!(replay(&h, &out.ledger).unwrap(), out.expr);
    let lam = out.ledger.steps[1].application.lambda;
    assert!((lam - (2.0f64 * 1e3).sqrt()).abs() < 1e-9);
}

#[test]
fn missing_target_term_is_an_error() {
    let h = HamiltonianExpr::new(SiteSystem::qubits("q", 2));
    let plan = GadgetPlan {
        delta_base: 1e3,
        rounds: vec![Round {
            delta: 1e3,
            applications: vec![sub(["q0", "q1"], ["m0", "m1"])],
        }],
    };
    assert!(matches!(
        apply_plan(&h, &plan),
        Err(GadgetError::MissingTerm { .. })
    ));
}

#[test]
fn constant_builder_scan_is_exact() {
    let h = pair_target(1.0);
    let v = crate::simcheck::LocalIsometry::identity(h.system());
    let table = error_scan(&h, |_| Ok((h.clone(), v.clone(), 0.0)), &[1e2, 1e3, 1e4]).unwrap();
    assert!(table.exact);
    assert!(table.slope.is_none());
    assert!(matches!(
        error_scan(&h, |_| Ok((h.clone(), v.clone(), 0.0)), &[1e2, 1e3]),
        Err(GadgetError::BadSweep)
    ));
    assert!(matches!(
        error_scan(&h, |_| Ok((h.clone(), v.clone(), 0.0)), &[1e2, 1e3, 1e5]),
        Err(GadgetError::BadSweep)
    ));
}
