//! The binary counter layers and the triangle and square marker layers.
//!
//! Counter tiles carry edge colours `(top, right, bottom, left)`: the top
//! edge holds a bit of the previous row, the left edge the carry coming in,
//! the bottom edge the new bit and the right edge the carry going out. The
//! `R` column injects a carry into every row, the `B` row starts the count at
//! zero and the `S` corner tile carries the only bonus, `-1/2`.
//!
//! Offset convention: row `y` of the counter (row 0 being the `S B B ..`
//! row) reads `y mod 2^(W-1)` from the bottom colours of columns `1..W`,
//! least significant bit in column 1. The bottom row therefore encodes
//! `H - 1`. The mirrored layer encodes `W - 1` in its left column, with the
//! least significant bit one row above the bottom and higher bits upwards.
//!
//! Marker layers sit on the mirrored counter through per-tile context lists.
//! For `W = 2^n + 2^b` with `n < b`, the left column holds `W - 1`, whose
//! highest one is bit `b` and whose run of trailing ones has length `n`. The
//! triangle layer finds bit `b` (tile `M`), steps down one cell (`G`) and
//! starts a diagonal (`D`) that moves one column right per row, shading all
//! cells left of it (`S`); the marked cells are `{(i, j) : i + j < b}`. The
//! square layer finds the lowest zero bit (`Z`), starts the same diagonal two
//! rows lower (`D0`, below `Ot`), and carries a row flag rightwards from the
//! left column and a column flag upwards from the shaded part of the bottom
//! row; a cell is marked when both flags are set, giving
//! `{(i, j) : i < n, j < n}`.

use super::solve::{SearchOptions, TilingProblem};
use super::{violations, EdgeTile, Result, Side, TileConfig, TileError, Tileset};

const COUNTER: &str = "binary_counter";
const MIRRORED: &str = "binary_counter_mirrored";
const MIRROR_PREFIX: &str = "t_";

/// Tiles marking the triangle.
pub const TRIANGLE_MARKED: &[&str] = &["D", "S"];
/// Tiles marking the square.
pub const SQUARE_MARKED: &[&str] = &["D0", "S0", "D", "S", "U11"];

fn counter_tiles() -> Vec<EdgeTile> {
    vec![
        EdgeTile::new("zero", ["0", "0", "0", "0"], 0),
        EdgeTile::new("one", ["1", "0", "1", "0"], 0),
        EdgeTile::new("carry", ["1", "1", "0", "1"], 0),
        EdgeTile::new("flip", ["0", "0", "1", "1"], 0),
        EdgeTile::new("R", ["R", "1", "R", "-"], 0),
        EdgeTile::new("B", ["-", "B", "0", "B"], 0),
        EdgeTile::new("S", ["-", "B", "R", "-"], -1),
    ]
}

fn counter_edges(transpose: bool) -> Vec<EdgeTile> {
    let tiles = counter_tiles();
    if transpose {
        tiles.iter().map(|t| t.mirrored(MIRROR_PREFIX)).collect()
    } else {
        tiles
    }
}

/// The seven-tile binary counter; `transpose` gives the copy mirrored in
/// the lower-left to upper-right diagonal, labelled with a `t_` prefix.
pub fn binary_counter_tileset(transpose: bool) -> Tileset {
    let name = if transpose { MIRRORED } else { COUNTER };
    Tileset::from_edges(name, &counter_edges(transpose)).expect("counter labels are distinct")
}

fn bit(colour: &str) -> Option<bool> {
    match colour {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

fn edge_of<'a>(tiles: &'a [EdgeTile], label: &str) -> Result<&'a EdgeTile> {
    tiles
        .iter()
        .find(|t| t.label == label)
        .ok_or_else(|| TileError::UnknownTile(label.into()))
}

fn pack(bits: &[bool]) -> Result<u128> {
    if bits.len() > 127 {
        return Err(TileError::TooLarge(format!("{} bit counter", bits.len())));
    }
    Ok(bits
        .iter()
        .enumerate()
        .fold(0u128, |acc, (k, &b)| acc | ((b as u128) << k)))
}

/// Bits held by each counter row, least significant first.
fn counter_row_bits(cfg: &TileConfig) -> Result<Vec<Vec<bool>>> {
    let tiles = counter_edges(false);
    (0..cfg.height)
        .map(|y| {
            (1..cfg.width)
                .map(|x| {
                    let t = edge_of(&tiles, cfg.at(x, y))?;
                    bit(&t.bottom).ok_or_else(|| {
                        TileError::Inconsistent(format!(
                            "counter tile `{}` at ({x}, {y}) holds no bit",
                            t.label
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

/// Value held by each row of a counter configuration, top row first.
pub fn counter_row_values(cfg: &TileConfig) -> Result<Vec<u128>> {
    counter_row_bits(cfg)?.iter().map(|b| pack(b)).collect()
}

fn mirrored_column_bits(cfg: &TileConfig, x: usize) -> Result<Vec<bool>> {
    let tiles = counter_edges(true);
    (0..cfg.height.saturating_sub(1))
        .rev()
        .map(|y| {
            let t = edge_of(&tiles, cfg.at(x, y))?;
            bit(&t.left).ok_or_else(|| {
                TileError::Inconsistent(format!(
                    "mirrored tile `{}` at ({x}, {y}) holds no bit",
                    t.label
                ))
            })
        })
        .collect()
}

/// Value held by column `x` of a mirrored counter configuration.
pub fn mirrored_column_value(cfg: &TileConfig, x: usize) -> Result<u128> {
    pack(&mirrored_column_bits(cfg, x)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MarkerKind {
    Triangle,
    Square,
}

fn mirrored_label(l: &str) -> String {
    format!("{MIRROR_PREFIX}{l}")
}

fn context_sets() -> (Vec<String>, Vec<String>, Vec<String>) {
    let zero = ["zero", "carry", "B"].map(mirrored_label).to_vec();
    let one = ["one", "flip"].map(mirrored_label).to_vec();
    let foot = ["R", "S"].map(mirrored_label).to_vec();
    (zero, one, foot)
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Marker layer drawn over the mirrored counter.
pub fn marker_tilesets(kind: MarkerKind) -> Tileset {
    match kind {
        MarkerKind::Triangle => triangle_tileset(),
        MarkerKind::Square => square_tileset(),
    }
    .expect("marker tilesets are well formed")
}

fn triangle_tileset() -> Result<Tileset> {
    let labels = ["U0", "M", "G", "U", "D", "S"];
    let mut ts = Tileset::new("triangle", &labels, &[0; 6])?;
    for (a, b) in [
        ("U0", "U"),
        ("M", "U"),
        ("G", "U"),
        ("U", "U"),
        ("S", "S"),
        ("S", "D"),
        ("D", "U"),
    ] {
        ts.allow_h(a, b)?;
    }
    for (a, b) in [
        ("U0", "U0"),
        ("U0", "M"),
        ("M", "G"),
        ("G", "D"),
        ("D", "S"),
        ("S", "S"),
        ("U", "U"),
        ("U", "D"),
    ] {
        ts.allow_v(a, b)?;
    }
    ts.set_boundary(Side::Left, &["U0", "M", "G", "D", "S"])?;
    ts.set_boundary(Side::Top, &["U0", "M", "U"])?;
    ts.set_boundary(Side::Bottom, &["G", "U", "D", "S"])?;
    let (zero, one, _) = context_sets();
    ts.set_context(MIRRORED, "U0", &refs(&zero))?;
    ts.set_context(MIRRORED, "M", &refs(&one))?;
    Ok(ts)
}

fn square_tileset() -> Result<Tileset> {
    // (label, row flag, column flag, shade) with shade 'u' above the
    // diagonal, 'd' on it and 's' below it.
    let col0: [(&str, u8, u8, char); 8] = [
        ("X0", 0, 0, 'u'),
        ("X1", 0, 1, 'u'),
        ("Z0", 0, 0, 'u'),
        ("Z1", 0, 1, 'u'),
        ("Ot", 0, 1, 'u'),
        ("E0", 0, 0, 'u'),
        ("D0", 1, 1, 'd'),
        ("S0", 1, 1, 's'),
    ];
    let bulk: [(&str, u8, u8, char); 6] = [
        ("U00", 0, 0, 'u'),
        ("U01", 0, 1, 'u'),
        ("U10", 1, 0, 'u'),
        ("U11", 1, 1, 'u'),
        ("D", 1, 1, 'd'),
        ("S", 1, 1, 's'),
    ];
    let all: Vec<(&str, u8, u8, char)> = col0.iter().chain(bulk.iter()).copied().collect();
    let labels: Vec<&str> = all.iter().map(|t| t.0).collect();
    let mut ts = Tileset::new("square", &labels, &vec![0; labels.len()])?;
    for &(a, ra, _, sa) in &all {
        for &(b, rb, _, sb) in &bulk {
            let shade_ok = matches!((sa, sb), ('u', 'u') | ('s', 's') | ('s', 'd') | ('d', 'u'));
            if ra == rb && shade_ok {
                ts.allow_h(a, b)?;
            }
        }
    }
    for &(a, _, ca, sa) in &bulk {
        for &(b, _, cb, sb) in &bulk {
            let shade_ok = matches!((sa, sb), ('u', 'u') | ('u', 'd') | ('d', 's') | ('s', 's'));
            if ca == cb && shade_ok {
                ts.allow_v(a, b)?;
            }
        }
    }
    for (a, b) in [
        ("X0", "X0"),
        ("X1", "X1"),
        ("X0", "Z0"),
        ("X1", "Z1"),
        ("Z0", "E0"),
        ("Z1", "Ot"),
        ("Ot", "D0"),
        ("D0", "S0"),
        ("S0", "S0"),
    ] {
        ts.allow_v(a, b)?;
    }
    ts.set_boundary(Side::Left, &col0.map(|t| t.0))?;
    ts.set_boundary(
        Side::Top,
        &["X0", "X1", "Z0", "Z1", "U00", "U01", "U10", "U11"],
    )?;
    ts.set_boundary(Side::Bottom, &["E0", "D0", "S0", "U00", "U10", "D", "S"])?;
    let (zero, one, foot) = context_sets();
    let inside: Vec<String> = one.iter().chain(foot.iter()).cloned().collect();
    ts.set_context(MIRRORED, "Z0", &refs(&zero))?;
    ts.set_context(MIRRORED, "Z1", &refs(&zero))?;
    ts.set_context(MIRRORED, "Ot", &refs(&one))?;
    ts.set_context(MIRRORED, "E0", &refs(&foot))?;
    ts.set_context(MIRRORED, "D0", &refs(&inside))?;
    ts.set_context(MIRRORED, "S0", &refs(&inside))?;
    Ok(ts)
}

/// Ground configurations of the four layers on one lattice, solved
/// bottom-up: the two counters first, then the markers on top of the
/// mirrored counter.
///
/// Marker layers have no bonuses, so their energy is at least zero; a
/// zero-energy marker configuration over the counters' ground state is
/// therefore a ground state of the whole stack, and the stack's ground state
/// is unique exactly when every layer's is.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerStack {
    pub width: usize,
    pub height: usize,
    pub counter: TileConfig,
    pub mirrored: TileConfig,
    pub triangle: TileConfig,
    pub square: TileConfig,
    /// Number of minimizers found per layer, in the order above.
    pub counts: [u128; 4],
}

impl LayerStack {
    pub fn energy_halves(&self) -> i64 {
        self.counter.energy_halves
            + self.mirrored.energy_halves
            + self.triangle.energy_halves
            + self.square.energy_halves
    }

    pub fn is_unique(&self) -> bool {
        self.counts.iter().all(|&c| c == 1)
    }
}

fn solve_layer(prob: TilingProblem<'_>, what: &str) -> Result<(TileConfig, u128)> {
    let opts = SearchOptions {
        keep: 1,
        count_limit: 16,
        ..SearchOptions::default()
    };
    let res = prob.search(&opts)?;
    let cfg = res
        .minimizers
        .into_iter()
        .next()
        .ok_or_else(|| TileError::SearchExhausted(format!("{what} layer has no minimizer")))?;
    Ok((cfg, res.count))
}

/// Solve the marker layer of `kind` over a mirrored-counter configuration.
pub fn solve_marker(kind: MarkerKind, mirrored: &TileConfig) -> Result<(TileConfig, u128)> {
    let ts = marker_tilesets(kind);
    let prob = TilingProblem::new(&ts, mirrored.width, mirrored.height)?
        .with_site_penalty(ts.context_penalty(mirrored))?;
    solve_layer(prob, "marker")
}

/// Solve all four layers on a `width x height` lattice.
pub fn layer_stack(width: usize, height: usize) -> Result<LayerStack> {
    if width < 2 || height < 2 {
        return Err(TileError::Shape {
            w: 2,
            h: 2,
            got_w: width,
            got_h: height,
        });
    }
    let counter_ts = binary_counter_tileset(false);
    let mirrored_ts = binary_counter_tileset(true);
    let (counter, c0) = solve_layer(TilingProblem::new(&counter_ts, width, height)?, "counter")?;
    let (mirrored, c1) = solve_layer(
        TilingProblem::new(&mirrored_ts, width, height)?,
        "mirrored counter",
    )?;
    let (triangle, c2) = solve_marker(MarkerKind::Triangle, &mirrored)?;
    let (square, c3) = solve_marker(MarkerKind::Square, &mirrored)?;
    Ok(LayerStack {
        width,
        height,
        counter,
        mirrored,
        triangle,
        square,
        counts: [c0, c1, c2, c3],
    })
}

/// What the layer stack writes onto the lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    /// Bottom row of the counter, least significant bit first.
    pub h_bits: Vec<bool>,
    /// Left column of the mirrored counter, least significant bit first.
    pub w_bits: Vec<bool>,
    /// `H - 1` modulo `2^(W-1)`.
    pub height_value: u128,
    /// `W - 1` modulo `2^(H-1)`.
    pub width_value: u128,
    /// `(n, b)` with `W = 2^n + 2^b` and `n < b`, when the width has that form.
    pub powers: Option<(u32, u32)>,
    /// Marked cells as `(i, j)`, column from the left and row from the bottom.
    pub triangle: Vec<(usize, usize)>,
    pub square: Vec<(usize, usize)>,
}

fn marked(cfg: &TileConfig, labels: &[&str]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..cfg.height {
        for i in 0..cfg.width {
            if labels.contains(&cfg.at(i, cfg.height - 1 - j)) {
                out.push((i, j));
            }
        }
    }
    out
}

/// `(n, b)` with `value + 1 = 2^n + 2^b` and `n < b`.
fn powers_of(value: u128) -> Option<(u32, u32)> {
    let w = value.checked_add(1)?;
    if w.count_ones() != 2 {
        return None;
    }
    Some((w.trailing_zeros(), 127 - w.leading_zeros()))
}

/// Read the encodings and the marked regions off a ground stack, refusing
/// stacks in which any layer breaks a rule.
pub fn decode_layers(stack: &LayerStack) -> Result<Decoded> {
    let (w, h) = (stack.width, stack.height);
    for (name, cfg) in [
        ("counter", &stack.counter),
        ("mirrored", &stack.mirrored),
        ("triangle", &stack.triangle),
        ("square", &stack.square),
    ] {
        if cfg.width != w || cfg.height != h {
            return Err(TileError::Inconsistent(format!(
                "{name} layer is {}x{}, stack is {w}x{h}",
                cfg.width, cfg.height
            )));
        }
    }
    let counter_ts = binary_counter_tileset(false);
    let mirrored_ts = binary_counter_tileset(true);
    let mut checks = vec![
        ("counter", violations(&counter_ts, &stack.counter, None)?),
        ("mirrored", violations(&mirrored_ts, &stack.mirrored, None)?),
    ];
    for (name, kind, cfg) in [
        ("triangle", MarkerKind::Triangle, &stack.triangle),
        ("square", MarkerKind::Square, &stack.square),
    ] {
        let ts = marker_tilesets(kind);
        let pen = ts.context_penalty(&stack.mirrored);
        checks.push((name, violations(&ts, cfg, Some(&pen))?));
    }
    if let Some((name, v)) = checks.iter().find(|(_, v)| *v != 0) {
        return Err(TileError::Inconsistent(format!(
            "{name} layer has {v} violated constraints"
        )));
    }
    if stack.counter.at(0, 0) != "S" {
        return Err(TileError::Inconsistent(
            "counter corner tile is not S".into(),
        ));
    }
    if stack.mirrored.at(w - 1, h - 1) != mirrored_label("S") {
        return Err(TileError::Inconsistent(
            "mirrored counter corner tile is not S".into(),
        ));
    }
    let h_bits = counter_row_bits(&stack.counter)?.pop().unwrap_or_default();
    let w_bits = mirrored_column_bits(&stack.mirrored, 0)?;
    let height_value = pack(&h_bits)?;
    let width_value = pack(&w_bits)?;
    Ok(Decoded {
        powers: powers_of(width_value),
        h_bits,
        w_bits,
        height_value,
        width_value,
        triangle: marked(&stack.triangle, TRIANGLE_MARKED),
        square: marked(&stack.square, SQUARE_MARKED),
    })
}
