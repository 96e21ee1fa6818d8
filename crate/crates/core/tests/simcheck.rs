use hamsim::opcore::{full_spectrum, HamiltonianExpr, Interaction, SiteSystem};
use hamsim::simcheck::{
    assemble_hab, build_first_order, grid_required_delta1, synthetic_ha, verify_simulation,
    CouplingGrid, IsometryBlock, LocalIsometry, Request,
};
use hamsim::C64;

fn first_order_instance(delta: f64) -> f64 {
    let sys = SiteSystem::qubits("q", 2);
    let mut h0 = HamiltonianExpr::new(sys.clone());
    h0.add_named(Interaction::Projector(1), &["q0"], 1.0)
        .unwrap();
    let mut h1 = HamiltonianExpr::new(sys);
    h1.add_named(Interaction::Pauli("X".into()), &["q1"], 0.3)
        .unwrap();
    h1.add_named(Interaction::Pauli("XZ".into()), &["q0", "q1"], 0.5)
        .unwrap();
    h1.add_named(Interaction::Pauli("YX".into()), &["q0", "q1"], 0.4)
        .unwrap();
    let sim = build_first_order(&h0, &h1, delta, None).unwrap().expr;

    let tsys = SiteSystem::qubits("q", 2).permuted(&[1]).unwrap();
    let mut target = HamiltonianExpr::new(tsys.clone());
    target
        .add_named(Interaction::Pauli("X".into()), &["q1"], 0.3)
        .unwrap();
    let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let v = LocalIsometry::new(
        tsys.clone(),
        vec![IsometryBlock::with_ancilla(
            &tsys.sites()[0],
            &["q0"],
            &zero,
        )],
    )
    .unwrap();
    let rep = verify_simulation(&sim, &target, &Request::new(delta / 2.0, 1.0, 1.0), &v).unwrap();
    assert!(rep.pass, "{rep:?}");
    rep.eps_achieved.unwrap()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[test]
fn first_order_error_decays_like_inverse_delta() {
    let deltas = [1e2, 1e3, 1e4];
    let eps: Vec<f64> = deltas.iter().map(|&d| first_order_instance(d)).collect();
    assert!(eps.windows(2).all(|w| w[1] < w[0]), "{eps:?}");
    let s = slope(&deltas, &eps);
    assert!(s <= -0.8, "slope {s}, eps {eps:?}");
}

fn two_layer_grid() -> CouplingGrid {
    CouplingGrid::new(
        vec![vec![0.5, 0.0], vec![0.25, 0.0]],
        vec![vec![0.25, 0.5], vec![0.0, 0.0]],
        1.0,
        2,
    )
    .unwrap()
}

#[test]
fn two_layer_low_spectrum_matches_heisenberg_grid() {
    let grid = two_layer_grid();
    let a = synthetic_ha(&grid, 2, 2).unwrap();
    let delta1 = grid_required_delta1(1.0, 2, 2, 0.1, 0.1);
    assert_eq!(delta1, 200.0);
    let sim = assemble_hab(&a.expr, [&a.p1, &a.p2, &a.p3], delta1, 1.0, 2, 2, 2).unwrap();
    assert_eq!(sim.dim().unwrap(), 1296);
    let target = grid.target();
    let v = a.isometry(&grid).unwrap();
    let rep = verify_simulation(&sim, &target, &Request::new(delta1 / 2.0, 0.1, 0.1), &v).unwrap();
    assert_eq!(rep.low_dim, 16);
    for (s, t) in rep
        .simulator_eigenvalues
        .iter()
        .zip(&rep.target_eigenvalues)
    {
        assert!((s - t).abs() <= 0.1, "{s} vs {t}");
    }
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn two_layer_with_zero_couplings_is_flat() {
    let zeros = vec![vec![0.0; 2]; 2];
    let grid = CouplingGrid::new(zeros.clone(), zeros, 1.0, 1).unwrap();
    let a = synthetic_ha(&grid, 2, 2).unwrap();
    let sim = assemble_hab(&a.expr, [&a.p1, &a.p2, &a.p3], 200.0, 1.0, 2, 2, 2).unwrap();
    assert!(grid.target().terms().is_empty());
    let eig = full_spectrum(&sim).unwrap().eigenvalues;
    assert!(eig[..16].iter().all(|e| e.abs() < 1e-9));
    assert!(eig[16] > 100.0);
}
