use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::gates::Gate;
use super::{ClockError, Result};
use crate::C64;

/// Fixed universal gate sets searched by [`synthesize_rotation`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateSet {
    /// `X` and the six `V` gates `(I ± 2iσ)/√5`.
    #[default]
    VBasis,
    /// `H, T, Tdg, S, Sdg, X, Z`.
    CliffordT,
}

impl GateSet {
    pub fn gates(self) -> Vec<Gate> {
        match self {
            GateSet::VBasis => vec![
                Gate::X,
                Gate::Vx,
                Gate::Vxdg,
                Gate::Vy,
                Gate::Vydg,
                Gate::Vz,
                Gate::Vzdg,
            ],
            GateSet::CliffordT => vec![
                Gate::H,
                Gate::T,
                Gate::Tdg,
                Gate::S,
                Gate::Sdg,
                Gate::X,
                Gate::Z,
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthOptions {
    pub gate_set: GateSet,
    pub max_len: usize,
    /// Cap on distinct states stored by both search directions together.
    pub max_states: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            gate_set: GateSet::VBasis,
            max_len: 40,
            max_states: 4_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub theta: f64,
    /// Gates in application order: `word[0]` acts first.
    pub word: Vec<Gate>,
    /// `||U|0> - (cos θ|0> + sin θ|1>)||`.
    pub error: f64,
    /// Distinct states stored by the search.
    pub explored: usize,
}

type State = [C64; 2];
type Mat = [[C64; 2]; 2];

/// Dedup key: components rounded to 1e-9.
fn key(s: &State) -> [i64; 4] {
    let r = |x: f64| (x * 1e9).round() as i64;
    [r(s[0].re), r(s[0].im), r(s[1].re), r(s[1].im)]
}

fn cell(s: &State, delta: f64) -> [i64; 4] {
    let f = |x: f64| (x / delta).floor() as i64;
    [f(s[0].re), f(s[0].im), f(s[1].re), f(s[1].im)]
}

fn dist(a: &State, b: &State) -> f64 {
    ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt()
}

fn mul(m: &Mat, s: &State) -> State {
    [
        m[0][0] * s[0] + m[0][1] * s[1],
        m[1][0] * s[0] + m[1][1] * s[1],
    ]
}

struct Node {
    state: State,
    parent: u32,
    gate: u8,
}

/// One direction of the search: BFS levels of distinct states.
struct Side {
    mats: Vec<Mat>,
    levels: Vec<Vec<Node>>,
    grids: Vec<HashMap<[i64; 4], Vec<u32>>>,
    seen: HashSet<[i64; 4]>,
}

impl Side {
    fn new(start: State, mats: Vec<Mat>, delta: f64) -> Self {
        let mut side = Side {
            mats,
            levels: Vec::new(),
            grids: Vec::new(),
            seen: HashSet::new(),
        };
        side.seen.insert(key(&start));
        side.push_level(
            vec![Node {
                state: start,
                parent: u32::MAX,
                gate: u8::MAX,
            }],
            delta,
        );
        side
    }

    fn push_level(&mut self, level: Vec<Node>, delta: f64) {
        let mut grid: HashMap<[i64; 4], Vec<u32>> = HashMap::new();
        for (i, n) in level.iter().enumerate() {
            grid.entry(cell(&n.state, delta))
                .or_default()
                .push(i as u32);
        }
        self.levels.push(level);
        self.grids.push(grid);
    }

    fn grow(&mut self, delta: f64) {
        let mut next = Vec::new();
        for (i, n) in self.levels.last().expect("start level").iter().enumerate() {
            for (g, m) in self.mats.iter().enumerate() {
                let s = mul(m, &n.state);
                if self.seen.insert(key(&s)) {
                    next.push(Node {
                        state: s,
                        parent: i as u32,
                        gate: g as u8,
                    });
                }
            }
        }
        self.push_level(next, delta);
    }

    fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Gate indices from the start state to `levels[depth][idx]`, first applied first.
    fn path(&self, depth: usize, mut idx: u32) -> Vec<u8> {
        let mut out = Vec::with_capacity(depth);
        for d in (1..=depth).rev() {
            let n = &self.levels[d][idx as usize];
            out.push(n.gate);
            idx = n.parent;
        }
        out.reverse();
        out
    }
}

/// Best match between one level of `a` and one level of `b`.
fn best_match(a: &Side, da: usize, b: &Side, db: usize, delta: f64) -> Option<(f64, u32, u32)> {
    let grid = &b.grids[db];
    let mut best: Option<(f64, u32, u32)> = None;
    for (i, n) in a.levels[da].iter().enumerate() {
        let c = cell(&n.state, delta);
        for off in 0..81 {
            let mut k = c;
            let mut o = off;
            for x in k.iter_mut() {
                *x += o % 3 - 1;
                o /= 3;
            }
            for &j in grid.get(&k).into_iter().flatten() {
                let d = dist(&n.state, &b.levels[db][j as usize].state);
                if d <= delta && best.is_none_or(|(bd, ..)| d < bd) {
                    best = Some((d, i as u32, j));
                }
            }
        }
    }
    best
}

/// Shortest word `U` over `SynthOptions::default()` with `||U|0> - |θ>|| ≤ δ`.
pub fn synthesize_rotation(theta: f64, delta: f64) -> Result<Synthesis> {
    synthesize_with(theta, delta, &SynthOptions::default())
}

/// Bidirectional breadth-first search: forward from `|0>` with the gates and
/// backward from the target with their inverses, states deduplicated at each
/// side. Since the gates are unitary, a forward state within `δ` of a
/// backward state yields a word within `δ` of the target, and growing the two
/// sides alternately finds a shortest such word.
pub fn synthesize_with(theta: f64, delta: f64, opts: &SynthOptions) -> Result<Synthesis> {
    if !(delta > 0.0) || !theta.is_finite() {
        return Err(ClockError::BadAngle(format!(
            "need finite θ and δ > 0, got θ = {theta}, δ = {delta}"
        )));
    }
    let gates = opts.gate_set.gates();
    let to_mat = |g: &Gate| {
        let m = g.matrix();
        [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
    };
    let fwd_mats: Vec<Mat> = gates.iter().map(to_mat).collect();
    let bwd_mats: Vec<Mat> = gates.iter().map(|g| to_mat(&g.dagger())).collect();
    let zero: State = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let target: State = [C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)];

    let mut fwd = Side::new(zero, fwd_mats, delta);
    let mut bwd = Side::new(target, bwd_mats, delta);
    let mut best_seen = dist(&zero, &target);
    for len in 0..=opts.max_len {
        // (error, forward depth, forward index, backward depth, backward index)
        let mut found: Option<(f64, usize, u32, usize, u32)> = None;
        let mut consider = |m: Option<(f64, u32, u32)>, fd: usize, bd: usize, swap: bool| {
            if let Some((d, i, j)) = m {
                let (fi, bi) = if swap { (j, i) } else { (i, j) };
                if found.is_none_or(|f| d < f.0) {
                    found = Some((d, fd, fi, bd, bi));
                }
            }
        };
        if len == 0 {
            consider(best_match(&fwd, 0, &bwd, 0, delta), 0, 0, false);
        } else if len % 2 == 1 {
            fwd.grow(delta);
            let fd = fwd.depth();
            for bd in 0..=bwd.depth() {
                consider(best_match(&fwd, fd, &bwd, bd, delta), fd, bd, false);
            }
        } else {
            bwd.grow(delta);
            let bd = bwd.depth();
            for fd in 0..=fwd.depth() {
                consider(best_match(&bwd, bd, &fwd, fd, delta), fd, bd, true);
            }
        }
        let explored = fwd.seen.len() + bwd.seen.len();
        if let Some((_, fd, fi, bd, bi)) = found {
            let mut idx: Vec<u8> = fwd.path(fd, fi);
            idx.extend(bwd.path(bd, bi).into_iter().rev());
            let word: Vec<Gate> = idx.into_iter().map(|g| gates[g as usize].clone()).collect();
            let error = dist(&apply_word(&word), &target);
            log::debug!(
                "θ = {theta}: length {} word at error {error:.3e} after {explored} states",
                word.len()
            );
            return Ok(Synthesis {
                theta,
                word,
                error,
                explored,
            });
        }
        for n in fwd.levels.last().into_iter().flatten() {
            best_seen = best_seen.min(dist(&n.state, &target));
        }
        for n in bwd.levels.last().into_iter().flatten() {
            best_seen = best_seen.min(dist(&n.state, &zero));
        }
        if explored > opts.max_states {
            return Err(ClockError::SynthesisFailed {
                theta,
                delta,
                best: best_seen,
                explored,
            });
        }
    }
    Err(ClockError::SynthesisFailed {
        theta,
        delta,
        best: best_seen,
        explored: fwd.seen.len() + bwd.seen.len(),
    })
}

/// `U|0>` for a word in application order.
pub fn apply_word(word: &[Gate]) -> [C64; 2] {
    let mut s: State = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    for g in word {
        let m = g.matrix();
        s = [
            m[(0, 0)] * s[0] + m[(0, 1)] * s[1],
            m[(1, 0)] * s[0] + m[(1, 1)] * s[1],
        ];
    }
    s
}
