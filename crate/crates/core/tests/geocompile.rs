use hamsim::gadgets::GadgetKind;
use hamsim::geocompile::*;
use hamsim::opcore::{HamiltonianExpr, Interaction, Site, SiteSystem};

fn chain(n: usize, dim: usize) -> HamiltonianExpr {
    let sites = (0..n)
        .map(|i| {
            let mut c = vec![0.0; dim];
            c[0] = i as f64;
            Site::at(format!("q{i}"), 2, c)
        })
        .collect();
    let mut h = HamiltonianExpr::new(SiteSystem::new(sites).unwrap());
    for i in 1..n {
        h.add_named(
            Interaction::Heisenberg,
            &[&format!("q{}", i - 1), &format!("q{i}")],
            1.0,
        )
        .unwrap();
    }
    h
}

/// Every two-site simulator term joins qubits one bond length apart; on
/// these lattices no two non-adjacent vertices are that close.
fn terms_on_unit_bonds(c: &Compiled) -> bool {
    let sys = c.sim.system();
    c.sim.terms().iter().all(|t| match t.support() {
        [a, b] => {
            let (x, y) = (
                sys.site(a).unwrap().coord.as_ref().unwrap(),
                sys.site(b).unwrap().coord.as_ref().unwrap(),
            );
            let d: f64 = x
                .iter()
                .zip(y)
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt();
            (d - 1.0).abs() < 1e-9
        }
        _ => false,
    })
}

#[test]
fn two_qubit_target_on_the_square_lattice() {
    let c = compile(
        &chain(2, 2),
        &PeriodicGraph::square(2),
        &CompileParams::default(),
    )
    .unwrap();
    assert_eq!(c.depth(), 1);
    assert_eq!(c.plan.rounds[0].delta, 1e4);
    let apps = &c.plan.rounds[0].applications;
    assert_eq!(apps.len(), 1);
    assert_eq!(apps[0].kind, GadgetKind::SubdivPos);
    assert_eq!(c.total_chain_length(), 3);
    assert_eq!(c.sim.system().len(), 4);
    assert!(terms_on_unit_bonds(&c));
    let report = c.certification.as_ref().unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.eps_achieved.unwrap() <= 0.1);
}

#[test]
fn hexagonal_chain_at_most_twice_the_square_one() {
    let square = compile(
        &chain(2, 2),
        &PeriodicGraph::square(2),
        &CompileParams::default(),
    )
    .unwrap();
    let hex = compile(
        &chain(2, 2),
        &PeriodicGraph::hexagonal(),
        &CompileParams::default(),
    )
    .unwrap();
    assert_eq!(hex.domain.len(), 2);
    assert!(hex.total_chain_length() <= 2 * square.total_chain_length());
    assert!(hex.chains.iter().all(|c| c.path.len() % 2 == 0));
    assert!(hex.chains_disjoint());
    assert!(terms_on_unit_bonds(&hex));
}

#[test]
fn depth_does_not_grow_with_the_chain() {
    for g in [
        PeriodicGraph::square(2),
        PeriodicGraph::hexagonal(),
        PeriodicGraph::subdivided_square(),
    ] {
        let depths: Vec<usize> = (2..=4)
            .map(|n| {
                let c = compile(&chain(n, 2), &g, &CompileParams::default()).unwrap();
                assert!(c.route.is_vertex_disjoint() && c.route.crossings.is_empty());
                assert!(c.chains_disjoint(), "{} n = {n}", g.name);
                assert!(terms_on_unit_bonds(&c) || g.name == "subdivided_square");
                c.depth()
            })
            .collect();
        assert!(
            depths.windows(2).all(|w| w[0] == w[1]),
            "{}: {depths:?}",
            g.name
        );
    }
}

#[test]
fn plaquette_and_three_dimensions() {
    let sites = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| Site::at(format!("q{i}"), 2, vec![x, y]))
        .collect();
    let mut h = HamiltonianExpr::new(SiteSystem::new(sites).unwrap());
    for i in 0..4 {
        h.add_named(
            Interaction::Xy,
            &[&format!("q{i}"), &format!("q{}", (i + 1) % 4)],
            0.5,
        )
        .unwrap();
    }
    let c = compile(&h, &PeriodicGraph::square(2), &CompileParams::default()).unwrap();
    assert_eq!(c.depth(), 1);
    assert!(terms_on_unit_bonds(&c));

    let c = compile(
        &chain(3, 3),
        &PeriodicGraph::square(3),
        &CompileParams::default(),
    )
    .unwrap();
    assert_eq!(c.depth(), 1);
    assert!(terms_on_unit_bonds(&c));
}

#[test]
fn empty_target_gives_an_empty_plan() {
    let sites = vec![
        Site::at("a", 2, vec![0.0, 0.0]),
        Site::at("b", 2, vec![3.0, 0.0]),
    ];
    let h = HamiltonianExpr::new(SiteSystem::new(sites).unwrap());
    let c = compile(&h, &PeriodicGraph::square(2), &CompileParams::default()).unwrap();
    assert!(c.plan.is_empty());
    assert!(c.chains.is_empty() && c.certification.is_none());
    assert_eq!(c.placement.len(), 2);
}

#[test]
fn rejected_targets() {
    // Degree four needs forks, whose compensation terms close triangles.
    let mut sites = vec![Site::at("c", 2, vec![0.0, 0.0])];
    let leaves = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
    for (k, &(x, y)) in leaves.iter().enumerate() {
        sites.push(Site::at(format!("l{k}"), 2, vec![x, y]));
    }
    let mut star = HamiltonianExpr::new(SiteSystem::new(sites).unwrap());
    for k in 0..4 {
        star.add_named(Interaction::Heisenberg, &["c", &format!("l{k}")], 1.0)
            .unwrap();
    }
    assert!(matches!(
        compile(&star, &PeriodicGraph::square(2), &CompileParams::default()),
        Err(GeoError::Parity(_))
    ));

    let sites = vec![
        Site::at("a", 2, vec![0.0, 0.0]),
        Site::at("b", 2, vec![4.0, 0.0]),
    ];
    let mut far = HamiltonianExpr::new(SiteSystem::new(sites).unwrap());
    far.add_named(Interaction::Heisenberg, &["a", "b"], 1.0)
        .unwrap();
    assert!(matches!(
        compile(&far, &PeriodicGraph::square(2), &CompileParams::default()),
        Err(GeoError::NotLocal(_))
    ));

    let mut wrong = chain(2, 2);
    wrong
        .add_named(Interaction::Pauli("ZZ".into()), &["q0", "q1"], 1.0)
        .unwrap();
    assert!(matches!(
        compile(&wrong, &PeriodicGraph::square(2), &CompileParams::default()),
        Err(GeoError::Target(_))
    ));
}

#[test]
fn ledger_traces_the_target_term() {
    let c = compile(
        &chain(2, 2),
        &PeriodicGraph::hexagonal(),
        &CompileParams::default(),
    )
    .unwrap();
    assert_eq!(c.ledger.chains.len(), 1);
    // One subdivision of the target edge, one stretching the long leg.
    assert_eq!(c.ledger.chains[0].steps.len(), c.ledger.steps.len());
    assert_eq!(c.ledger.steps.len(), 2);
    let placed: std::collections::BTreeSet<_> = c.placement.values().collect();
    assert_eq!(placed.len(), c.sim.system().len());
}
