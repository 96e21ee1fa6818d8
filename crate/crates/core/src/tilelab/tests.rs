use proptest::prelude::*;

use super::*;

fn two_tiles() -> Tileset {
    let mut ts = Tileset::new("pair", &["a", "b"], &[0, 0]).unwrap();
    ts.allow_h("a", "a").unwrap();
    ts.allow_h("a", "b").unwrap();
    ts.allow_v("a", "a").unwrap();
    ts.allow_v("b", "b").unwrap();
    ts
}

fn cfg(ts: &Tileset, w: usize, h: usize, cells: &[&str]) -> TileConfig {
    TileConfig::new(ts, w, h, cells.iter().map(|s| s.to_string()).collect()).unwrap()
}

#[test]
fn energy_counts_pairs_and_weights() {
    let ts = two_tiles();
    assert_eq!(
        tiling_energy(&ts, &cfg(&ts, 2, 1, &["a", "b"])).unwrap(),
        0.0
    );
    assert_eq!(
        tiling_energy(&ts, &cfg(&ts, 2, 1, &["b", "a"])).unwrap(),
        1.0
    );
    assert_eq!(
        tiling_energy(&ts, &cfg(&ts, 1, 2, &["a", "b"])).unwrap(),
        1.0
    );
    let counter = binary_counter_tileset(false);
    assert_eq!(
        tiling_energy(&counter, &cfg(&counter, 1, 1, &["S"])).unwrap(),
        -0.5
    );
}

#[test]
fn unknown_label_is_rejected() {
    let ts = two_tiles();
    let bad = TileConfig {
        width: 1,
        height: 1,
        cells: vec!["c".into()],
        energy_halves: 0,
    };
    assert_eq!(
        tiling_energy(&ts, &bad),
        Err(TileError::UnknownTile("c".into()))
    );
}

#[test]
fn boundary_markers_cost_one_unit_per_side() {
    let mut ts = Tileset::unconstrained("b", &["a", "b"]).unwrap();
    ts.set_boundary(Side::Left, &["a"]).unwrap();
    ts.set_boundary(Side::Top, &["a"]).unwrap();
    assert_eq!(cfg(&ts, 2, 2, &["b", "a", "a", "a"]).energy_halves, 4);
    assert_eq!(cfg(&ts, 2, 2, &["a", "b", "b", "b"]).energy_halves, 4);
}

#[test]
fn mirror_swaps_edges_across_the_antidiagonal() {
    let t = EdgeTile::new("x", ["t", "r", "b", "l"], 0).mirrored("m");
    assert_eq!(
        (
            t.label.as_str(),
            t.top.as_str(),
            t.right.as_str(),
            t.bottom.as_str(),
            t.left.as_str()
        ),
        ("mx", "r", "t", "l", "b")
    );
}

#[test]
fn dash_edges_never_match() {
    let ts = Tileset::from_edges("d", &[EdgeTile::new("a", ["-", "-", "-", "-"], 0)]).unwrap();
    assert!(!ts.h_ok(0, 0) && !ts.v_ok(0, 0));
    assert!(ts.closed(Side::Top, 0));
}

#[test]
fn document_round_trip() {
    for ts in [
        binary_counter_tileset(true),
        marker_tilesets(MarkerKind::Square),
    ] {
        let back = Tileset::from_toml(&ts.to_toml()).unwrap();
        assert_eq!(back, ts);
    }
    let bad = "name = \"x\"\n[[tiles]]\nlabel = \"a\"\nweight = 0.25\n";
    assert!(matches!(
        Tileset::from_toml(bad),
        Err(TileError::BadWeight(..))
    ));
}

#[test]
fn grid_dump_round_trip() {
    let ts = binary_counter_tileset(false);
    let g = ground_transfer(&ts, 4, 3).unwrap().minimizer;
    let back = TileConfig::from_grid(&ts, &g.to_grid()).unwrap();
    assert_eq!(back, g);
}

#[test]
fn trivial_tilesets() {
    let one = Tileset::unconstrained("one", &["a"]).unwrap();
    let r = ground_exhaustive(&one, 3, 3).unwrap();
    assert_eq!((r.energy_halves, r.count), (0, 1));
    for (w, h) in [(1, 1), (4, 2), (7, 5)] {
        assert_eq!(ground_transfer(&one, w, h).unwrap().count, 1);
    }
    let two = Tileset::unconstrained("two", &["a", "b"]).unwrap();
    for (w, h) in [(2, 2), (3, 4), (5, 6)] {
        let r = ground_transfer(&two, w, h).unwrap();
        assert_eq!((r.energy_halves, r.count), (0, 1u128 << (w * h)));
    }
}

#[test]
fn size_limits() {
    let ts = binary_counter_tileset(false);
    assert!(matches!(
        ground_exhaustive(&ts, 4, 4),
        Err(TileError::TooLarge(_))
    ));
    assert!(matches!(
        ground_transfer(&ts, 8, 2),
        Err(TileError::TooLarge(_))
    ));
}

#[test]
fn single_cell_counter_is_the_corner() {
    let r = ground_exhaustive(&binary_counter_tileset(false), 1, 1).unwrap();
    assert_eq!((r.energy_halves, r.count), (-1, 1));
    assert_eq!(r.minimizers[0].cells, vec!["S".to_string()]);
}

#[test]
fn counter_rows_count_up() {
    let ts = binary_counter_tileset(false);
    let g = ground_transfer(&ts, 4, 6).unwrap();
    assert_eq!(
        counter_row_values(&g.minimizer).unwrap(),
        vec![0, 1, 2, 3, 4, 5]
    );
}

#[test]
fn search_uses_bonus_corner_first() {
    let r = ground_search(
        &binary_counter_tileset(true),
        7,
        5,
        &SearchOptions::default(),
    )
    .unwrap();
    assert_eq!((r.energy_halves, r.count), (-1, 1));
    assert!(
        r.nodes < 200,
        "search should be nearly forced, took {} nodes",
        r.nodes
    );
}

#[test]
fn frustrated_tileset_needs_positive_excess() {
    // Nothing may touch anything: every pair costs a unit.
    let ts = Tileset::new("bare", &["a"], &[0]).unwrap();
    let opts = SearchOptions {
        max_excess: 64,
        ..SearchOptions::default()
    };
    let r = ground_search(&ts, 3, 2, &opts).unwrap();
    assert_eq!(r.energy_halves, 2 * 7);
    assert_eq!(
        r.energy_halves,
        ground_exhaustive(&ts, 3, 2).unwrap().energy_halves
    );
}

fn random_tileset(n: usize, bits: &[bool], weights: &[i64], bounds: &[bool]) -> Tileset {
    let labels: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let mut ts = Tileset::new("rand", &refs, &weights[..n]).unwrap();
    for a in 0..n {
        for b in 0..n {
            if bits[a * n + b] {
                ts.allow_h(refs[a], refs[b]).unwrap();
            }
            if bits[n * n + a * n + b] {
                ts.allow_v(refs[a], refs[b]).unwrap();
            }
        }
    }
    if bounds[0] {
        ts.set_boundary(Side::Top, &refs[..1]).unwrap();
    }
    if bounds[1] {
        ts.set_boundary(Side::Right, &refs[n - 1..]).unwrap();
    }
    ts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solvers_agree(
        n in 2usize..4,
        w in 1usize..4,
        h in 1usize..4,
        bits in proptest::collection::vec(any::<bool>(), 18),
        weights in proptest::collection::vec(-2i64..3, 3),
        bounds in proptest::collection::vec(any::<bool>(), 2),
    ) {
        let ts = random_tileset(n, &bits, &weights, &bounds);
        let ex = ground_exhaustive(&ts, w, h).unwrap();
        let tr = ground_transfer(&ts, w, h).unwrap();
        let opts = SearchOptions { max_excess: 200, count_limit: u128::MAX, ..SearchOptions::default() };
        let se = ground_search(&ts, w, h, &opts).unwrap();
        prop_assert_eq!((ex.energy_halves, ex.count), (tr.energy_halves, tr.count));
        prop_assert_eq!((ex.energy_halves, ex.count), (se.energy_halves, se.count));
        prop_assert_eq!(tiling_energy_halves(&ts, &tr.minimizer, None).unwrap(), tr.energy_halves);
        for m in se.minimizers.iter().chain(&ex.minimizers) {
            prop_assert_eq!(tiling_energy_halves(&ts, m, None).unwrap(), ex.energy_halves);
        }
    }
}
