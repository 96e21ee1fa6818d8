//! Weighted tiling Hamiltonians.
//!
//! A tiling Hamiltonian is diagonal in the basis of tile assignments: each
//! basis state costs one unit per adjacent pair that is not allowed, one unit
//! per tile sitting on a lattice edge it may not touch, plus the site weight
//! of every tile. All energies here are exact integers in units of 1/2.
//!
//! Coordinates: `(x, y)` with `x` the column from the left and `y` the row
//! from the top; configurations are stored row-major. Marked regions returned
//! by [`decode_layers`] use `(i, j)` with `j` counted from the bottom row.

mod layers;
mod solve;

pub use layers::{
    binary_counter_tileset, counter_row_values, decode_layers, layer_stack, marker_tilesets,
    mirrored_column_value, solve_marker, Decoded, LayerStack, MarkerKind, SQUARE_MARKED,
    TRIANGLE_MARKED,
};
pub use solve::{
    ground_exhaustive, ground_search, ground_transfer, ExhaustiveResult, SearchOptions,
    SearchResult, TilingProblem, TransferResult, EXHAUSTIVE_LIMIT, TRANSFER_LIMIT,
};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TileError {
    #[error("unknown tile label `{0}`")]
    UnknownTile(String),
    #[error("duplicate tile label `{0}`")]
    DuplicateTile(String),
    #[error("weight {0} of tile `{1}` is not a finite multiple of 1/2")]
    BadWeight(f64, String),
    #[error("configuration is {got_w}x{got_h}, expected {w}x{h}")]
    Shape {
        w: usize,
        h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("search gave up: {0}")]
    SearchExhausted(String),
    #[error("site penalty table has length {got}, expected {expected}")]
    BadPenalty { got: usize, expected: usize },
    #[error("layers inconsistent: {0}")]
    Inconsistent(String),
    #[error("bad tileset document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, TileError>;

/// Lattice edges, in the order used by the boundary table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Top,
    Right,
    Bottom,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Top, Side::Right, Side::Bottom, Side::Left];

    fn index(self) -> usize {
        self as usize
    }
}

/// A tile given by its four edge colours; `-` matches nothing, not even `-`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTile {
    pub label: String,
    pub top: String,
    pub right: String,
    pub bottom: String,
    pub left: String,
    pub half_weight: i64,
}

impl EdgeTile {
    pub fn new(label: &str, [top, right, bottom, left]: [&str; 4], half_weight: i64) -> Self {
        EdgeTile {
            label: label.into(),
            top: top.into(),
            right: right.into(),
            bottom: bottom.into(),
            left: left.into(),
            half_weight,
        }
    }

    /// Reflection in the diagonal running from the lower left to the upper
    /// right corner.
    pub fn mirrored(&self, prefix: &str) -> Self {
        EdgeTile {
            label: format!("{prefix}{}", self.label),
            top: self.right.clone(),
            right: self.top.clone(),
            bottom: self.left.clone(),
            left: self.bottom.clone(),
            half_weight: self.half_weight,
        }
    }
}

fn colours_match(a: &str, b: &str) -> bool {
    a == b && a != "-"
}

/// Tiles, allowed neighbour pairs, site weights and boundary markers.
///
/// A marker layer may also name a context layer: each of its tiles can list
/// the context tiles it is allowed to sit on, and sitting on any other costs
/// one unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Tileset {
    name: String,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    weights: Vec<i64>,
    h_ok: Vec<bool>,
    v_ok: Vec<bool>,
    boundary: [Option<Vec<bool>>; 4],
    context_layer: Option<String>,
    context: Vec<Option<Vec<String>>>,
}

impl Tileset {
    /// Tiles with no allowed pairs and no boundary markers.
    pub fn new(name: &str, labels: &[&str], half_weights: &[i64]) -> Result<Self> {
        assert_eq!(labels.len(), half_weights.len(), "one weight per tile");
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.to_string(), i).is_some() {
                return Err(TileError::DuplicateTile(l.to_string()));
            }
        }
        let n = labels.len();
        Ok(Tileset {
            name: name.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            index,
            weights: half_weights.to_vec(),
            h_ok: vec![false; n * n],
            v_ok: vec![false; n * n],
            boundary: [None, None, None, None],
            context_layer: None,
            context: vec![None; n],
        })
    }

    /// Tileset whose pair relations come from matching edge colours.
    pub fn from_edges(name: &str, tiles: &[EdgeTile]) -> Result<Self> {
        let labels: Vec<&str> = tiles.iter().map(|t| t.label.as_str()).collect();
        let weights: Vec<i64> = tiles.iter().map(|t| t.half_weight).collect();
        let mut ts = Tileset::new(name, &labels, &weights)?;
        let n = tiles.len();
        for (a, ta) in tiles.iter().enumerate() {
            for (b, tb) in tiles.iter().enumerate() {
                ts.h_ok[a * n + b] = colours_match(&ta.right, &tb.left);
                ts.v_ok[a * n + b] = colours_match(&ta.bottom, &tb.top);
            }
        }
        Ok(ts)
    }

    /// Every tile may sit next to every other tile.
    pub fn unconstrained(name: &str, labels: &[&str]) -> Result<Self> {
        let mut ts = Tileset::new(name, labels, &vec![0; labels.len()])?;
        ts.h_ok.fill(true);
        ts.v_ok.fill(true);
        Ok(ts)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, t: usize) -> &str {
        &self.labels[t]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| TileError::UnknownTile(label.into()))
    }

    /// Site weight in half units.
    pub fn half_weight(&self, t: usize) -> i64 {
        self.weights[t]
    }

    /// `a` directly left of `b`.
    pub fn h_ok(&self, a: usize, b: usize) -> bool {
        self.h_ok[a * self.len() + b]
    }

    /// `a` directly above `b`.
    pub fn v_ok(&self, a: usize, b: usize) -> bool {
        self.v_ok[a * self.len() + b]
    }

    pub fn allow_h(&mut self, a: &str, b: &str) -> Result<()> {
        let (a, b) = (self.index_of(a)?, self.index_of(b)?);
        let n = self.len();
        self.h_ok[a * n + b] = true;
        Ok(())
    }

    pub fn allow_v(&mut self, a: &str, b: &str) -> Result<()> {
        let (a, b) = (self.index_of(a)?, self.index_of(b)?);
        let n = self.len();
        self.v_ok[a * n + b] = true;
        Ok(())
    }

    /// Restrict the tiles that may touch a lattice edge.
    pub fn set_boundary(&mut self, side: Side, allowed: &[&str]) -> Result<()> {
        let mut mask = vec![false; self.len()];
        for a in allowed {
            mask[self.index_of(a)?] = true;
        }
        self.boundary[side.index()] = Some(mask);
        Ok(())
    }

    /// Whether tile `t` may touch `side`.
    pub fn boundary_ok(&self, side: Side, t: usize) -> bool {
        self.boundary[side.index()].as_ref().is_none_or(|m| m[t])
    }

    pub fn context_layer(&self) -> Option<&str> {
        self.context_layer.as_deref()
    }

    /// Tiles of `layer` that `tile` may sit on.
    pub fn set_context(&mut self, layer: &str, tile: &str, allowed: &[&str]) -> Result<()> {
        if self.context_layer.as_deref().is_some_and(|l| l != layer) {
            return Err(TileError::Document(format!(
                "second context layer `{layer}`"
            )));
        }
        self.context_layer = Some(layer.into());
        let t = self.index_of(tile)?;
        self.context[t] = Some(allowed.iter().map(|s| s.to_string()).collect());
        Ok(())
    }

    pub fn context_of(&self, t: usize) -> Option<&[String]> {
        self.context[t].as_deref()
    }

    /// Site penalties (half units, row-major, one entry per cell and tile)
    /// charged for sitting on the wrong context tile.
    pub fn context_penalty(&self, under: &TileConfig) -> Vec<i64> {
        let n = self.len();
        let mut pen = vec![0; under.cells.len() * n];
        for (c, below) in under.cells.iter().enumerate() {
            for t in 0..n {
                if let Some(allowed) = &self.context[t] {
                    if !allowed.iter().any(|a| a == below) {
                        pen[c * n + t] = 2;
                    }
                }
            }
        }
        pen
    }

    /// Tiles for which no partner exists on the given side.
    pub(crate) fn closed(&self, side: Side, t: usize) -> bool {
        let n = self.len();
        match side {
            Side::Top => !(0..n).any(|u| self.v_ok(u, t)),
            Side::Bottom => !(0..n).any(|u| self.v_ok(t, u)),
            Side::Left => !(0..n).any(|u| self.h_ok(u, t)),
            Side::Right => !(0..n).any(|u| self.h_ok(t, u)),
        }
    }

    pub fn to_doc(&self) -> TilesetDoc {
        let n = self.len();
        let pairs = |ok: &Vec<bool>| {
            let mut out = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if ok[a * n + b] {
                        out.push([self.labels[a].clone(), self.labels[b].clone()]);
                    }
                }
            }
            out
        };
        let side = |s: Side| {
            self.boundary[s.index()].as_ref().map(|m| {
                (0..n)
                    .filter(|&t| m[t])
                    .map(|t| self.labels[t].clone())
                    .collect()
            })
        };
        TilesetDoc {
            name: self.name.clone(),
            context_layer: self.context_layer.clone(),
            tiles: (0..n)
                .map(|t| TileDoc {
                    label: self.labels[t].clone(),
                    weight: self.weights[t] as f64 / 2.0,
                    context: self.context[t].clone(),
                })
                .collect(),
            horizontal: pairs(&self.h_ok),
            vertical: pairs(&self.v_ok),
            boundary: BoundaryDoc {
                top: side(Side::Top),
                right: side(Side::Right),
                bottom: side(Side::Bottom),
                left: side(Side::Left),
            },
        }
    }

    pub fn from_doc(doc: &TilesetDoc) -> Result<Self> {
        let labels: Vec<&str> = doc.tiles.iter().map(|t| t.label.as_str()).collect();
        let mut weights = Vec::with_capacity(labels.len());
        for t in &doc.tiles {
            let h = t.weight * 2.0;
            if !h.is_finite() || h.fract() != 0.0 {
                return Err(TileError::BadWeight(t.weight, t.label.clone()));
            }
            weights.push(h as i64);
        }
        let mut ts = Tileset::new(&doc.name, &labels, &weights)?;
        for [a, b] in &doc.horizontal {
            ts.allow_h(a, b)?;
        }
        for [a, b] in &doc.vertical {
            ts.allow_v(a, b)?;
        }
        let b = &doc.boundary;
        for (side, list) in [
            (Side::Top, &b.top),
            (Side::Right, &b.right),
            (Side::Bottom, &b.bottom),
            (Side::Left, &b.left),
        ] {
            if let Some(list) = list {
                let refs: Vec<&str> = list.iter().map(String::as_str).collect();
                ts.set_boundary(side, &refs)?;
            }
        }
        for t in &doc.tiles {
            if let Some(ctx) = &t.context {
                let layer = doc.context_layer.as_deref().ok_or_else(|| {
                    TileError::Document(format!(
                        "tile `{}` has a context but no context_layer is set",
                        t.label
                    ))
                })?;
                let refs: Vec<&str> = ctx.iter().map(String::as_str).collect();
                ts.set_context(layer, &t.label, &refs)?;
            }
        }
        Ok(ts)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_doc()).expect("tileset documents always serialise")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: TilesetDoc =
            toml::from_str(text).map_err(|e| TileError::Document(e.to_string()))?;
        Tileset::from_doc(&doc)
    }
}

/// Serialised tileset: labels, pair relations, weights and boundary markers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilesetDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_layer: Option<String>,
    pub tiles: Vec<TileDoc>,
    /// `[left, right]` pairs.
    #[serde(default)]
    pub horizontal: Vec<[String; 2]>,
    /// `[above, below]` pairs.
    #[serde(default)]
    pub vertical: Vec<[String; 2]>,
    #[serde(default)]
    pub boundary: BoundaryDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileDoc {
    pub label: String,
    #[serde(default)]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<Vec<String>>,
}

/// A tile assignment on a `width x height` lattice, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileConfig {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<String>,
    /// Energy in half units, as computed when the configuration was built.
    pub energy_halves: i64,
}

impl TileConfig {
    /// Configuration from labels; the energy is evaluated against `ts`.
    pub fn new(ts: &Tileset, width: usize, height: usize, cells: Vec<String>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(TileError::Shape {
                w: width,
                h: height,
                got_w: cells.len(),
                got_h: 1,
            });
        }
        let mut cfg = TileConfig {
            width,
            height,
            cells,
            energy_halves: 0,
        };
        cfg.energy_halves = tiling_energy_halves(ts, &cfg, None)?;
        Ok(cfg)
    }

    pub(crate) fn from_indices(
        ts: &Tileset,
        width: usize,
        height: usize,
        idx: &[usize],
        energy_halves: i64,
    ) -> Self {
        TileConfig {
            width,
            height,
            cells: idx.iter().map(|&t| ts.label(t).to_string()).collect(),
            energy_halves,
        }
    }

    /// Parse the character-grid dump: one row per line, labels separated by
    /// whitespace.
    pub fn from_grid(ts: &Tileset, text: &str) -> Result<Self> {
        let rows: Vec<Vec<String>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_whitespace().map(String::from).collect())
            .collect();
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(TileError::Shape {
                w: width,
                h: height,
                got_w: r.len(),
                got_h: height,
            });
        }
        TileConfig::new(ts, width, height, rows.concat())
    }

    pub fn at(&self, x: usize, y: usize) -> &str {
        &self.cells[y * self.width + x]
    }

    pub fn energy(&self) -> f64 {
        self.energy_halves as f64 / 2.0
    }

    pub fn indices(&self, ts: &Tileset) -> Result<Vec<usize>> {
        self.cells.iter().map(|l| ts.index_of(l)).collect()
    }

    /// Character-grid dump with aligned columns.
    pub fn to_grid(&self) -> String {
        let w = self
            .cells
            .iter()
            .map(|c| c.chars().count())
            .max()
            .unwrap_or(1);
        let mut out = String::new();
        for row in self.cells.chunks(self.width.max(1)) {
            let line: Vec<String> = row.iter().map(|c| format!("{c:<w$}")).collect();
            out.push_str(line.join(" ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// Energy of `cfg` under `ts`.
pub fn tiling_energy(ts: &Tileset, cfg: &TileConfig) -> Result<f64> {
    Ok(tiling_energy_halves(ts, cfg, None)? as f64 / 2.0)
}

/// Exact energy in half units; `site` adds per-cell, per-tile penalties.
pub fn tiling_energy_halves(ts: &Tileset, cfg: &TileConfig, site: Option<&[i64]>) -> Result<i64> {
    let idx = cfg.indices(ts)?;
    let prob = TilingProblem::new(ts, cfg.width, cfg.height)?;
    let prob = match site {
        Some(s) => prob.with_site_penalty(s.to_vec())?,
        None => prob,
    };
    Ok(prob.energy(&idx))
}

/// Number of violated pairs, forbidden boundary contacts and context
/// mismatches in `cfg`; site weights are not counted.
pub fn violations(ts: &Tileset, cfg: &TileConfig, site: Option<&[i64]>) -> Result<i64> {
    let idx = cfg.indices(ts)?;
    let weights: i64 = idx.iter().map(|&t| ts.half_weight(t)).sum();
    Ok((tiling_energy_halves(ts, cfg, site)? - weights) / 2)
}

#[cfg(test)]
mod tests;
