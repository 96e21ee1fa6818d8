use std::collections::BTreeSet;

use hamsim::tilelab::*;

/// Row values predicted by running the counter's carry rule: every row adds
/// the carry injected by the `R` column to the bits above it.
fn simulate_counter(w: usize, h: usize) -> Vec<u128> {
    let mut bits = vec![false; w - 1];
    let mut rows = vec![0u128];
    for _ in 1..h {
        let mut carry = true;
        for b in bits.iter_mut() {
            let sum = *b as u8 + carry as u8;
            *b = sum & 1 == 1;
            carry = sum >= 2;
        }
        rows.push(
            bits.iter()
                .enumerate()
                .map(|(k, &b)| (b as u128) << k)
                .sum(),
        );
    }
    rows
}

fn cells(pred: impl Fn(usize, usize) -> bool, w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..h {
        for i in 0..w {
            if pred(i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

#[test]
fn shipped_documents_match_builtins() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tilesets/");
    for (file, ts) in [
        ("binary_counter.toml", binary_counter_tileset(false)),
        ("binary_counter_mirrored.toml", binary_counter_tileset(true)),
        ("triangle.toml", marker_tilesets(MarkerKind::Triangle)),
        ("square.toml", marker_tilesets(MarkerKind::Square)),
    ] {
        let text = std::fs::read_to_string(format!("{dir}{file}")).unwrap();
        assert_eq!(Tileset::from_toml(&text).unwrap(), ts, "{file}");
    }
}

#[test]
fn counter_has_seven_tiles() {
    assert_eq!(binary_counter_tileset(false).len(), 7);
    assert_eq!(binary_counter_tileset(true).len(), 7);
}

#[test]
fn small_counters_agree_across_solvers() {
    let ts = binary_counter_tileset(false);
    for (w, h) in [(1, 1), (2, 2), (3, 3)] {
        let ex = ground_exhaustive(&ts, w, h).unwrap();
        let tr = ground_transfer(&ts, w, h).unwrap();
        assert_eq!(
            (ex.energy_halves, ex.count),
            (tr.energy_halves, tr.count),
            "{w}x{h}"
        );
        assert_eq!((ex.energy_halves, ex.count), (-1, 1), "{w}x{h}");
        assert_eq!(ex.minimizers[0], tr.minimizer);
    }
}

#[test]
fn counter_ground_is_unique_and_counts() {
    let ts = binary_counter_tileset(false);
    for w in 1..=6 {
        for h in 1..=8 {
            let r = ground_transfer(&ts, w, h).unwrap();
            assert_eq!((r.energy_halves, r.count), (-1, 1), "{w}x{h}");
            assert_eq!(r.minimizer.at(0, 0), "S");
            assert_eq!(tiling_energy(&ts, &r.minimizer).unwrap(), -0.5);
            if w > 1 {
                let rows = counter_row_values(&r.minimizer).unwrap();
                assert_eq!(rows, simulate_counter(w, h), "{w}x{h}");
            }
        }
    }
}

#[test]
fn bottom_row_offset_is_h_minus_one() {
    let ts = binary_counter_tileset(false);
    let r = ground_transfer(&ts, 6, 5).unwrap();
    assert_eq!((r.energy_halves, r.count), (-1, 1));
    assert_eq!(
        *counter_row_values(&r.minimizer).unwrap().last().unwrap(),
        4
    );
    // Wrap-around once the height exceeds the counter's range.
    let r = ground_transfer(&ts, 3, 7).unwrap();
    assert_eq!(
        *counter_row_values(&r.minimizer).unwrap().last().unwrap(),
        6 % 4
    );
}

#[test]
fn search_matches_transfer_on_counters() {
    let ts = binary_counter_tileset(false);
    for (w, h) in [(4, 4), (6, 7), (5, 8)] {
        let tr = ground_transfer(&ts, w, h).unwrap();
        let se = ground_search(&ts, w, h, &SearchOptions::default()).unwrap();
        assert_eq!((se.energy_halves, se.count), (tr.energy_halves, tr.count));
        assert_eq!(se.minimizers[0], tr.minimizer);
    }
}

#[test]
fn mirrored_counter_writes_width_on_left_column() {
    let ts = binary_counter_tileset(true);
    for (w, h) in [(2, 3), (6, 4), (10, 6), (13, 5)] {
        let r = ground_search(&ts, w, h, &SearchOptions::default()).unwrap();
        assert_eq!((r.energy_halves, r.count), (-1, 1), "{w}x{h}");
        let g = &r.minimizers[0];
        assert_eq!(g.at(w - 1, h - 1), "t_S");
        assert_eq!(
            mirrored_column_value(g, 0).unwrap(),
            (w as u128 - 1) % (1 << (h - 1))
        );
    }
    // Same instance as the transfer solver can see.
    let tr = ground_transfer(&ts, 5, 4).unwrap();
    assert_eq!((tr.energy_halves, tr.count), (-1, 1));
}

#[test]
fn stack_recovers_width_powers() {
    let stack = layer_stack(10, 6).unwrap();
    assert!(stack.is_unique(), "{:?}", stack.counts);
    assert_eq!(stack.energy_halves(), -2);
    let d = decode_layers(&stack).unwrap();
    assert_eq!(d.powers, Some((1, 3)));
    assert_eq!(d.width_value, 9);
    assert_eq!(d.height_value, 5);
    assert_eq!(d.triangle, cells(|i, j| i + j < 3, 10, 6));
    assert_eq!(d.square, cells(|i, j| i < 1 && j < 1, 10, 6));
}

#[test]
fn marker_regions_match_predicates() {
    for b in 1..=5u32 {
        for n in 0..b.min(4) {
            let w = (1usize << n) + (1usize << b);
            for h in [b as usize + 2, b as usize + 4] {
                let stack = layer_stack(w, h).unwrap();
                assert!(stack.is_unique(), "b={b} n={n} h={h}: {:?}", stack.counts);
                let d = decode_layers(&stack).unwrap();
                assert_eq!(d.powers, Some((n, b)));
                assert_eq!(
                    d.height_value,
                    (h as u128 - 1) % (1u128 << (w - 1).min(127))
                );
                assert_eq!(
                    d.triangle,
                    cells(|i, j| i + j < b as usize, w, h),
                    "b={b} n={n} h={h}"
                );
                let n = n as usize;
                assert_eq!(
                    d.square,
                    cells(|i, j| i < n && j < n, w, h),
                    "b={b} n={n} h={h}"
                );
            }
        }
    }
}

/// A mirrored-counter stand-in whose left column holds `bits` (least
/// significant first) above the foot tile.
fn column_context(bits: &[bool], w: usize) -> TileConfig {
    let h = bits.len() + 1;
    let mut cells = vec!["t_zero".to_string(); w * h];
    for (k, &b) in bits.iter().enumerate() {
        cells[(h - 2 - k) * w] = if b { "t_one" } else { "t_zero" }.into();
    }
    cells[(h - 1) * w] = "t_R".into();
    TileConfig {
        width: w,
        height: h,
        cells,
        energy_halves: 0,
    }
}

fn solved_cells(kind: MarkerKind, ctx: &TileConfig) -> BTreeSet<(usize, usize)> {
    let (cfg, count) = solve_marker(kind, ctx).unwrap();
    assert_eq!(count, 1);
    let marked = match kind {
        MarkerKind::Triangle => TRIANGLE_MARKED,
        MarkerKind::Square => SQUARE_MARKED,
    };
    let mut out = BTreeSet::new();
    for y in 0..cfg.height {
        for x in 0..cfg.width {
            if marked.contains(&cfg.at(x, y)) {
                out.insert((x, cfg.height - 1 - y));
            }
        }
    }
    out
}

#[test]
fn marker_layers_on_hand_made_columns() {
    // Highest one at bit 3.
    let ctx = column_context(&[true, false, false, true, false], 6);
    let tri = solved_cells(MarkerKind::Triangle, &ctx);
    assert_eq!(tri, cells(|i, j| i + j < 3, 6, 6).into_iter().collect());
    // Highest one at bit 0: nothing to shade.
    let ctx = column_context(&[true, false, false], 4);
    assert!(solved_cells(MarkerKind::Triangle, &ctx).is_empty());
    // Two trailing ones: a 2 x 2 square.
    let ctx = column_context(&[true, true, false, true], 5);
    let sq = solved_cells(MarkerKind::Square, &ctx);
    assert_eq!(sq, cells(|i, j| i < 2 && j < 2, 5, 5).into_iter().collect());
}

#[test]
fn tampered_stack_is_refused() {
    let stack = layer_stack(6, 5).unwrap();
    assert!(decode_layers(&stack).is_ok());

    let mut bad = stack.clone();
    let k = bad.counter.cells.iter().position(|c| c == "zero").unwrap();
    bad.counter.cells[k] = "one".into();
    assert!(matches!(
        decode_layers(&bad),
        Err(TileError::Inconsistent(_))
    ));

    let mut bad = stack.clone();
    let k = bad.triangle.cells.iter().position(|c| c == "S").unwrap();
    bad.triangle.cells[k] = "U".into();
    assert!(matches!(
        decode_layers(&bad),
        Err(TileError::Inconsistent(_))
    ));

    let mut bad = stack;
    bad.square.width = 5;
    assert!(matches!(
        decode_layers(&bad),
        Err(TileError::Inconsistent(_))
    ));
}

#[test]
fn widths_without_two_powers_decode_without_powers() {
    let d = decode_layers(&layer_stack(8, 5).unwrap()).unwrap();
    assert_eq!(d.width_value, 7);
    assert_eq!(d.powers, None);
}
