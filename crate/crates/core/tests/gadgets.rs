use hamsim::gadgets::*;
use hamsim::opcore::{full_spectrum, HamiltonianExpr, SiteSystem};

const FAMILIES: [Family; 2] = [Family::Heisenberg, Family::Xy];

fn target(n: usize, family: Family, terms: &[(usize, usize, f64)]) -> HamiltonianExpr {
    let mut h = HamiltonianExpr::new(SiteSystem::qubits("q", n));
    for &(a, b, c) in terms {
        if c != 0.0 {
            h.add_named(
                family.interaction(),
                &[&format!("q{a}"), &format!("q{b}")],
                c,
            )
            .unwrap();
        }
    }
    h
}

fn empty(n: usize) -> HamiltonianExpr {
    HamiltonianExpr::new(SiteSystem::qubits("q", n))
}

/// Certified ε at cut Δ/2 (requested η, ε loose so only the rank gates).
fn eps(target: &HamiltonianExpr, out: &Applied, delta: f64) -> f64 {
    let rep = certify(
        target,
        &out.expr,
        out.energy_shift,
        std::slice::from_ref(&out.application.mediators),
        delta / 2.0,
        1.0,
        1.0,
    )
    .unwrap();
    assert!(rep.rank_ok, "{rep:?}");
    rep.eps_achieved.unwrap()
}

#[test]
fn subdivision_certifies_both_signs() {
    for fam in FAMILIES {
        let plus = target(2, fam, &[(0, 1, 1.0)]);
        let out = subdivide(&plus, ("q0", "q1"), 1.0, 1, 1e4, fam).unwrap();
        assert!(eps(&plus, &out, 1e4) <= 0.1, "{fam}");
        let minus = target(2, fam, &[(0, 1, -1.0)]);
        let out = subdivide(&empty(2), ("q0", "q1"), 1.0, -1, 1e4, fam).unwrap();
        assert!(eps(&minus, &out, 1e4) <= 0.1, "{fam}");
    }
}

#[test]
fn subdivision_error_shrinks_with_delta() {
    for fam in FAMILIES {
        let t = target(2, fam, &[(0, 1, 1.0)]);
        let lo = eps(
            &t,
            &subdivide(&t, ("q0", "q1"), 1.0, 1, 1e2, fam).unwrap(),
            1e2,
        );
        let hi = eps(
            &t,
            &subdivide(&t, ("q0", "q1"), 1.0, 1, 1e4, fam).unwrap(),
            1e4,
        );
        assert!(hi < lo, "{fam}: {hi} !< {lo}");
    }
}

#[test]
fn fork_certifies_signed_pairs() {
    for fam in FAMILIES {
        for (l, m) in [(1.0, 1.0), (-1.0, 1.0)] {
            let t = target(3, fam, &[(0, 2, l), (1, 2, m)]);
            let out = fork(&empty(3), ["q0", "q1", "q2"], l, m, 1e5, fam).unwrap();
            assert!(eps(&t, &out, 1e5) <= 0.05, "{fam} λ={l} μ={m}");
        }
    }
}

#[test]
fn fork_with_mu_zero_is_a_subdivision_of_h13() {
    let fam = Family::Heisenberg;
    let out = fork(&empty(3), ["q0", "q1", "q2"], 1.0, 0.0, 1e4, fam).unwrap();
    assert!(out
        .expr
        .terms()
        .iter()
        .all(|t| !t.support().contains(&"q1".to_string())));
    let t = target(3, fam, &[(0, 2, 1.0)]);
    let sub = subdivide(&t, ("q0", "q2"), 1.0, 1, 1e4, fam).unwrap();
    let a = eps(&t, &out, 1e4);
    let b = eps(&t, &sub, 1e4);
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

#[test]
fn crossing_certifies() {
    for fam in FAMILIES {
        let t = target(4, fam, &[(0, 3, 1.0), (1, 2, 1.0)]);
        let out = crossing(&empty(4), ["q0", "q1", "q2", "q3"], 1.0, 1.0, 1e5, fam).unwrap();
        assert!(eps(&t, &out, 1e5) <= 0.1, "{fam}");
    }
}

#[test]
fn crossing_with_zero_couplings_simulates_zero() {
    let out = crossing(
        &empty(4),
        ["q0", "q1", "q2", "q3"],
        0.0,
        0.0,
        1e4,
        Family::Heisenberg,
    )
    .unwrap();
    assert!(eps(&empty(4), &out, 1e4) <= 0.1);
}

#[test]
fn crossing_relabelling_is_isospectral() {
    let a = crossing(
        &empty(4),
        ["q0", "q1", "q2", "q3"],
        0.7,
        -0.4,
        1e3,
        Family::Heisenberg,
    )
    .unwrap();
    let b = crossing(
        &empty(4),
        ["q0", "q1", "q3", "q2"],
        -0.4,
        0.7,
        1e3,
        Family::Heisenberg,
    )
    .unwrap();
    let ea = full_spectrum(&a.expr).unwrap().eigenvalues;
    let eb = full_spectrum(&b.expr).unwrap().eigenvalues;
    for (x, y) in ea.iter().zip(&eb) {
        assert!((x - y).abs() < 1e-7 * x.abs().max(1.0));
    }
}

fn scan_of(kind: GadgetKind) -> ScanTable {
    let fam = Family::Heisenberg;
    let (t, sites): (HamiltonianExpr, Vec<&str>) = match kind {
        GadgetKind::Fork => (
            target(3, fam, &[(0, 2, 1.0), (1, 2, 1.0)]),
            vec!["q0", "q1", "q2"],
        ),
        _ => (target(2, fam, &[(0, 1, 1.0)]), vec!["q0", "q1"]),
    };
    let builder = |delta: f64| {
        let out = match kind {
            GadgetKind::Fork => fork(&t, [sites[0], sites[1], sites[2]], 1.0, 1.0, delta, fam)?,
            _ => subdivide(&t, (sites[0], sites[1]), 1.0, 1, delta, fam)?,
        };
        let v = gadget_isometry(t.system(), std::slice::from_ref(&out.application.mediators))?;
        Ok((out.expr, v, out.energy_shift))
    };
    error_scan(&t, builder, &[1e2, 1e3, 1e4, 1e5]).unwrap()
}

#[test]
fn subdivision_scan_decays_like_inverse_sqrt_delta() {
    let table = scan_of(GadgetKind::SubdivPos);
    let slope = table.slope.unwrap();
    assert!(table.monotone);
    assert!((-0.75..=-0.35).contains(&slope), "{slope}");
    assert!(table.rows[3].eps <= 0.05);
}

#[test]
fn fork_scan_decays_like_inverse_sqrt_delta() {
    let table = scan_of(GadgetKind::Fork);
    let slope = table.slope.unwrap();
    assert!(table.monotone);
    assert!((-0.75..=-0.35).contains(&slope), "{slope}");
}

fn sub(sites: [&str; 2], mediators: [&str; 2], family: Family) -> PlanApplication {
    PlanApplication {
        kind: GadgetKind::SubdivPos,
        sites: sites.iter().map(|s| s.to_string()).collect(),
        lambda: None,
        mu: None,
        mediators: mediators.map(String::from),
        family,
    }
}

fn plan_eps(t: &HamiltonianExpr, plan: &GadgetPlan, cut: f64) -> f64 {
    let out = apply_plan(t, plan).unwrap();
    assert_eq!(replay(t, &out.ledger).unwrap(), out.expr);
    let rep = certify(
        t,
        &out.expr,
        out.energy_shift,
        &out.mediator_pairs,
        cut,
        1.0,
        1.0,
    )
    .unwrap();
    assert!(rep.rank_ok);
    rep.eps_achieved.unwrap()
}

#[test]
fn disjoint_subdivisions_in_one_round() {
    for fam in FAMILIES {
        let t = target(4, fam, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let plan = GadgetPlan {
            delta_base: 1e4,
            rounds: vec![Round {
                delta: 1e4,
                applications: vec![
                    sub(["q0", "q1"], ["m0", "m1"], fam),
                    sub(["q2", "q3"], ["m2", "m3"], fam),
                ],
            }],
        };
        let both = plan_eps(&t, &plan, 5e3);
        let single_t = target(2, fam, &[(0, 1, 1.0)]);
        let single = eps(
            &single_t,
            &subdivide(&single_t, ("q0", "q1"), 1.0, 1, 1e4, fam).unwrap(),
            1e4,
        );
        // Independent gadgets: their errors add, at most.
        assert!(both <= 2.0 * single + 1e-9, "{fam}: {both} vs 2 x {single}");
        if fam == Family::Xy {
            assert!(both <= 0.15);
        }
    }
}

#[test]
fn two_round_chain() {
    for fam in FAMILIES {
        let t = target(2, fam, &[(0, 1, 1.0)]);
        let plan = GadgetPlan {
            delta_base: 1e6,
            rounds: vec![
                Round {
                    delta: 1e6,
                    applications: vec![sub(["q0", "m0"], ["m2", "m3"], fam)],
                },
                Round {
                    delta: 1e3,
                    applications: vec![sub(["q0", "q1"], ["m0", "m1"], fam)],
                },
            ],
        };
        let e = plan_eps(&t, &plan, 5e2);
        if fam == Family::Xy {
            assert!(e <= 0.2, "{e}");
        }
    }
}
