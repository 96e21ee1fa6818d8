use proptest::prelude::*;

use super::gates::apply;
use super::*;
use crate::opcore::full_spectrum;
use crate::{CMatrix, C64};

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn id(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

fn matvec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
        .collect()
}

fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
}

const ALL: [Gate; 17] = [
    Gate::I,
    Gate::H,
    Gate::X,
    Gate::Y,
    Gate::Z,
    Gate::S,
    Gate::Sdg,
    Gate::T,
    Gate::Tdg,
    Gate::Vx,
    Gate::Vxdg,
    Gate::Vy,
    Gate::Vydg,
    Gate::Vz,
    Gate::Vzdg,
    Gate::Cnot,
    Gate::Swap,
];

#[test]
fn named_gates_are_unitary_and_daggers_invert() {
    for g in ALL.iter().cloned().chain([Gate::Ry(0.3)]) {
        let m = g.matrix();
        assert!(unitary_defect(&m) < UNITARY_TOL, "{g}");
        let p = g.dagger().matrix() * &m;
        assert!((p - id(m.nrows())).norm() < 1e-12, "{g}");
        if let Gate::Ry(_) | Gate::Matrix(_) = g {
            continue;
        }
        assert_eq!(Gate::from_name(g.name()), Some(g));
    }
    // Named conventions.
    let w = Gate::T.matrix();
    assert!((w[(1, 1)] * w[(1, 1)] - C64::new(0.0, 1.0)).norm() < 1e-15);
    let v = Gate::Vz.matrix();
    assert!((v[(0, 0)] * 5f64.sqrt() - C64::new(1.0, 2.0)).norm() < 1e-12);
}

#[test]
fn ry_prepares_half_angle() {
    let s = apply_word(&[Gate::Ry(1.0)]);
    assert!((s[0].re - 0.5f64.cos()).abs() < 1e-15 && (s[1].re - 0.5f64.sin()).abs() < 1e-15);
}

#[test]
fn apply_matches_kronecker_products() {
    let u = Gate::Vy.matrix() * Gate::T.matrix() * Gate::H.matrix();
    let cx = Gate::Cnot.matrix();
    let swap = Gate::Swap.matrix();
    let psi: Vec<C64> = (0..8)
        .map(|k| C64::new(k as f64 + 1.0, 0.5 - k as f64))
        .collect();

    let mut got = psi.clone();
    apply(&mut got, 3, &[1], &u);
    assert!(close(
        &got,
        &matvec(&kron(&kron(&id(2), &u), &id(2)), &psi),
        1e-12
    ));

    let mut got = psi.clone();
    apply(&mut got, 3, &[1, 2], &cx);
    assert!(close(&got, &matvec(&kron(&id(2), &cx), &psi), 1e-12));

    // Control below target: conjugate by SWAP.
    let mut got = psi.clone();
    apply(&mut got, 3, &[1, 0], &cx);
    assert!(close(
        &got,
        &matvec(&kron(&(&swap * &cx * &swap), &id(2)), &psi),
        1e-12
    ));
}

#[test]
fn rejects_bad_steps() {
    let mut seq = GateSequence::new(2);
    let bad = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(1e-9, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ],
    );
    assert!(matches!(
        seq.push(Gate::Matrix(bad), &[0]),
        Err(ClockError::NotUnitary { step: 1, .. })
    ));
    assert!(matches!(
        seq.push(Gate::X, &[2]),
        Err(ClockError::BadQubit { .. })
    ));
    assert!(matches!(
        seq.push(Gate::Cnot, &[1, 1]),
        Err(ClockError::BadQubit { .. })
    ));
    assert!(matches!(
        seq.push(Gate::Cnot, &[0]),
        Err(ClockError::Dimension(_))
    ));

    let mut far = GateSequence::new(2)
        .with_layout(vec![(0, 0), (2, 0)])
        .unwrap();
    assert!(matches!(
        far.push(Gate::Swap, &[0, 1]),
        Err(ClockError::NotAdjacent { .. })
    ));
    let mut near = GateSequence::new(2)
        .with_layout(vec![(0, 0), (1, 1)])
        .unwrap();
    near.push(Gate::Swap, &[0, 1]).unwrap();
}

#[test]
fn document_round_trip() {
    let mut seq = GateSequence::new(2)
        .with_input(vec![
            [C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap()
        .with_layout(vec![(0, 0), (0, 1)])
        .unwrap();
    seq.push(Gate::H, &[0]).unwrap();
    seq.push(Gate::Ry(0.25), &[1]).unwrap();
    seq.push(Gate::Cnot, &[0, 1]).unwrap();
    seq.push(Gate::Matrix(Gate::Vx.matrix()), &[1]).unwrap();
    assert_eq!(GateSequence::from_toml(&seq.to_toml()).unwrap(), seq);
    assert!(matches!(
        GateSequence::from_toml("qubits = 1\n[[steps]]\ngate = \"Q\"\nqubits = [0]\n"),
        Err(ClockError::Document(_))
    ));
}

#[test]
fn single_identity_step_has_the_textbook_ground_state() {
    let mut seq = GateSequence::new(1);
    seq.push(Gate::I, &[0]).unwrap();
    let h = clock_hamiltonian(&seq).unwrap();
    let spec = full_spectrum(&h.expr).unwrap();
    assert!(spec.eigenvalues[0].abs() < 1e-12);
    // (|0> + |1>)|0> / √2 in clock-major order: entries 0 and 2.
    let g = spec.eigenvectors.column(0);
    let s = 0.5f64.sqrt();
    assert!((g[0].norm() - s).abs() < 1e-12 && (g[2].norm() - s).abs() < 1e-12);
    let hist = history_state(&seq, &seq.input_vector()).unwrap();
    assert!(close(
        &hist,
        &[
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(s, 0.0),
            C64::new(0.0, 0.0)
        ],
        1e-15
    ));
}

#[test]
fn wrong_input_gives_orthogonal_history() {
    let mut seq = GateSequence::new(1);
    seq.push(Gate::H, &[0]).unwrap();
    seq.push(Gate::T, &[0]).unwrap();
    let check = verify_history(&seq, &seq.input_vector()).unwrap();
    assert!(check.ground_energy.abs() < 1e-10 && check.overlap > 1.0 - 1e-10);
    let wrong = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let check = verify_history(&seq, &wrong).unwrap();
    assert!(check.overlap < 1e-10, "{}", check.overlap);
}

#[test]
fn short_clock_gaps() {
    let rows = gap_scan(&[1, 4]).unwrap();
    assert!((rows[0].gap - 2.0).abs() < 1e-12);
    assert!((rows[1].gap - 2.0 * (1.0 - (std::f64::consts::PI / 5.0).cos())).abs() < 1e-12);
    assert!((rows[1].gap - 0.381966).abs() < 1e-6);
    assert!(matches!(bare_clock(0), Err(ClockError::NoSteps)));
}

#[test]
fn snake_small_cases() {
    let one = snake_path(1).unwrap();
    assert_eq!(one.cells, vec![(0, 0)]);
    assert!(one.turns.is_empty() && one.schedule().is_empty());

    let three = snake_path(3).unwrap();
    assert_eq!(
        three.cells,
        vec![(0, 0), (1, 0), (2, 0), (1, 1), (0, 1), (0, 2)]
    );
    assert_eq!(three.turns.len(), 2);
    assert_eq!(
        three.directions,
        vec![
            Direction::LeftToRight,
            Direction::RightToLeft,
            Direction::LeftToRight
        ]
    );
    assert_eq!(three.turns[0].side, TurnSide::Right);
    assert_eq!(three.turns[1].path, [(0, 1), (-1, 1), (-1, 2), (0, 2)]);
    assert!(three.is_connected());
    assert!(snake_path(0).is_err());
}

#[test]
fn synthesis_trivial_angles() {
    let s = synthesize_rotation(0.0, 1e-6).unwrap();
    assert!(s.word.is_empty() && s.error == 0.0);
    let s = synthesize_rotation(std::f64::consts::FRAC_PI_2, 1e-12).unwrap();
    assert_eq!(s.word, vec![Gate::X]);
    assert!(s.error < 1e-15);
    assert!(synthesize_rotation(0.3, 0.0).is_err());
}

#[test]
fn synthesis_budget_reports_best_distance() {
    let opts = SynthOptions {
        max_len: 3,
        ..SynthOptions::default()
    };
    match synthesize_with(0.4, 1e-6, &opts) {
        Err(ClockError::SynthesisFailed { best, .. }) => assert!(best > 1e-6 && best < 0.4),
        other => panic!("expected failure, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthesised_words_meet_tolerance(theta in 0.0f64..std::f64::consts::PI) {
        let s = synthesize_rotation(theta, 0.05).unwrap();
        let out = apply_word(&s.word);
        let err = ((out[0] - theta.cos()).norm_sqr() + (out[1] - theta.sin()).norm_sqr()).sqrt();
        prop_assert!(err <= 0.05);
        prop_assert!((err - s.error).abs() < 1e-12);
    }

    #[test]
    fn snake_covers_triangle_once(b in 1usize..12) {
        let p = snake_path(b).unwrap();
        prop_assert_eq!(p.cells.len(), b * (b + 1) / 2);
        let set: std::collections::BTreeSet<_> = p.cells.iter().collect();
        prop_assert_eq!(set.len(), p.cells.len());
        prop_assert!(p.cells.iter().all(|&c| p.contains(c)));
        prop_assert!(p.is_connected());
        prop_assert_eq!(p.turns.len(), b - 1);
        prop_assert_eq!(replay_schedule(&p).unwrap(), p.cells.clone());
    }
}
