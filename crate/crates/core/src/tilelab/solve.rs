//! Ground-state solvers for tiling Hamiltonians.
//!
//! Three exact solvers share one cost model: plain enumeration, a transfer
//! dynamic program over row profiles, and a branch-and-bound search that
//! scales to the lattices used by the layer stack.

use super::{Result, Side, TileConfig, TileError, Tileset};

/// Largest `|T|^(W H)` accepted by [`ground_exhaustive`].
pub const EXHAUSTIVE_LIMIT: f64 = 1e8;
/// Largest `|T|^W` accepted by [`ground_transfer`].
pub const TRANSFER_LIMIT: f64 = 5e5;
/// Minimizers kept by the exhaustive solver; the count is always exact.
const KEEP_ALL: usize = 1024;

/// A tileset on a fixed lattice, optionally with per-cell site penalties.
#[derive(Clone, Debug)]
pub struct TilingProblem<'a> {
    ts: &'a Tileset,
    w: usize,
    h: usize,
    unary: Vec<i64>,
}

impl<'a> TilingProblem<'a> {
    pub fn new(ts: &'a Tileset, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || ts.is_empty() {
            return Err(TileError::Shape {
                w: w.max(1),
                h: h.max(1),
                got_w: w,
                got_h: h,
            });
        }
        let n = ts.len();
        let mut unary = vec![0; w * h * n];
        for y in 0..h {
            for x in 0..w {
                for t in 0..n {
                    let mut e = ts.half_weight(t);
                    for side in Side::ALL {
                        let on = match side {
                            Side::Top => y == 0,
                            Side::Bottom => y == h - 1,
                            Side::Left => x == 0,
                            Side::Right => x == w - 1,
                        };
                        if on && !ts.boundary_ok(side, t) {
                            e += 2;
                        }
                    }
                    unary[(y * w + x) * n + t] = e;
                }
            }
        }
        Ok(TilingProblem { ts, w, h, unary })
    }

    /// Add per-cell, per-tile penalties in half units (row-major cells).
    pub fn with_site_penalty(mut self, site: Vec<i64>) -> Result<Self> {
        if site.len() != self.unary.len() {
            return Err(TileError::BadPenalty {
                got: site.len(),
                expected: self.unary.len(),
            });
        }
        for (u, s) in self.unary.iter_mut().zip(site) {
            *u += s;
        }
        Ok(self)
    }

    pub fn tileset(&self) -> &Tileset {
        self.ts
    }

    fn cost(&self, c: usize, t: usize) -> i64 {
        self.unary[c * self.ts.len() + t]
    }

    fn hpen(&self, a: usize, b: usize) -> i64 {
        if self.ts.h_ok(a, b) {
            0
        } else {
            2
        }
    }

    fn vpen(&self, a: usize, b: usize) -> i64 {
        if self.ts.v_ok(a, b) {
            0
        } else {
            2
        }
    }

    /// Energy in half units of a row-major assignment of tile indices.
    pub fn energy(&self, idx: &[usize]) -> i64 {
        let w = self.w;
        let mut e = 0;
        for (c, &t) in idx.iter().enumerate() {
            e += self.cost(c, t);
            if c % w > 0 {
                e += self.hpen(idx[c - 1], t);
            }
            if c >= w {
                e += self.vpen(idx[c - w], t);
            }
        }
        e
    }

    fn config(&self, idx: &[usize], energy: i64) -> TileConfig {
        TileConfig::from_indices(self.ts, self.w, self.h, idx, energy)
    }

    /// Enumerate every assignment.
    pub fn exhaustive(&self) -> Result<ExhaustiveResult> {
        let n = self.ts.len();
        let cells = self.w * self.h;
        let size = (n as f64).powi(cells as i32);
        if size > EXHAUSTIVE_LIMIT {
            return Err(TileError::TooLarge(format!(
                "{n}^{cells} = {size:.3e} assignments exceeds {EXHAUSTIVE_LIMIT:e}"
            )));
        }
        let mut st = Enum {
            best: i64::MAX,
            count: 0,
            kept: Vec::new(),
            idx: vec![0; cells],
        };
        self.enumerate(0, 0, &mut st);
        let minimizers = st
            .kept
            .iter()
            .map(|idx| self.config(idx, st.best))
            .collect();
        Ok(ExhaustiveResult {
            energy_halves: st.best,
            count: st.count,
            minimizers,
        })
    }

    fn enumerate(&self, c: usize, acc: i64, st: &mut Enum) {
        if c == st.idx.len() {
            if acc < st.best {
                st.best = acc;
                st.count = 0;
                st.kept.clear();
            }
            if acc == st.best {
                st.count += 1;
                if st.kept.len() < KEEP_ALL {
                    st.kept.push(st.idx.clone());
                }
            }
            return;
        }
        let w = self.w;
        for t in 0..self.ts.len() {
            let mut e = acc + self.cost(c, t);
            if !c.is_multiple_of(w) {
                e += self.hpen(st.idx[c - 1], t);
            }
            if c >= w {
                e += self.vpen(st.idx[c - w], t);
            }
            st.idx[c] = t;
            self.enumerate(c + 1, e, st);
        }
    }

    /// Transfer dynamic program over row profiles, one cell at a time.
    ///
    /// The state after placing cell `(x, y)` holds the last tile placed in
    /// every column, so a full row of cells is one transfer-matrix step.
    pub fn transfer(&self) -> Result<TransferResult> {
        let n = self.ts.len();
        let w = self.w;
        let size = (n as f64).powi(w as i32);
        if size > TRANSFER_LIMIT {
            return Err(TileError::TooLarge(format!(
                "{n}^{w} = {size:.3e} row states exceeds {TRANSFER_LIMIT:e}"
            )));
        }
        let states = n.pow(w as u32);
        let pow: Vec<usize> = (0..w).map(|x| n.pow(x as u32)).collect();
        let digit = |s: usize, x: usize| (s / pow[x]) % n;

        let mut energy = vec![i64::MAX; states];
        let mut count = vec![0u128; states];
        energy[0] = 0;
        count[0] = 1;
        let cells = w * self.h;
        let mut back: Vec<Vec<u32>> = Vec::with_capacity(cells);
        for c in 0..cells {
            let (x, y) = (c % w, c / w);
            let mut ne = vec![i64::MAX; states];
            let mut nc = vec![0u128; states];
            let mut nb = vec![u32::MAX; states];
            for s in 0..states {
                if energy[s] == i64::MAX {
                    continue;
                }
                let above = digit(s, x);
                let base = s - above * pow[x];
                for t in 0..n {
                    let mut e = energy[s] + self.cost(c, t);
                    if y > 0 {
                        e += self.vpen(above, t);
                    }
                    if x > 0 {
                        e += self.hpen(digit(s, x - 1), t);
                    }
                    let ns = base + t * pow[x];
                    if e < ne[ns] {
                        ne[ns] = e;
                        nc[ns] = count[s];
                        nb[ns] = above as u32;
                    } else if e == ne[ns] {
                        nc[ns] = nc[ns].saturating_add(count[s]);
                    }
                }
            }
            energy = ne;
            count = nc;
            back.push(nb);
        }
        let best = *energy.iter().min().expect("at least one state");
        let total = energy
            .iter()
            .zip(&count)
            .filter(|(e, _)| **e == best)
            .fold(0u128, |acc, (_, c)| acc.saturating_add(*c));
        let mut s = energy
            .iter()
            .position(|&e| e == best)
            .expect("minimum is attained");
        let mut idx = vec![0; cells];
        for c in (0..cells).rev() {
            let x = c % w;
            let t = digit(s, x);
            idx[c] = t;
            s = s - t * pow[x] + back[c][s] as usize * pow[x];
        }
        Ok(TransferResult {
            energy_halves: best,
            count: total,
            minimizer: self.config(&idx, best),
        })
    }

    /// Exact minimization by depth-first branch and bound.
    ///
    /// Every cell has a lower bound on its share of the energy: its site
    /// cost plus half a unit for each side on which its tile has no possible
    /// partner. The search spends an excess budget above the sum of these
    /// bounds, raising the budget one half unit at a time until a
    /// configuration is found, so the first budget that succeeds gives the
    /// exact minimum and all its minimizers. Cells are filled most
    /// constrained first. The zero-excess pass, which settles every layer of
    /// the counter stack, runs as a constraint problem with arc consistency.
    pub fn search(&self, opts: &SearchOptions) -> Result<SearchResult> {
        let n = self.ts.len();
        let cells = self.w * self.h;
        let mut closed = vec![[false; 4]; n];
        for (t, cl) in closed.iter_mut().enumerate() {
            for side in Side::ALL {
                cl[side.index()] = self.ts.closed(side, t);
            }
        }
        let nbrs: Vec<[Option<usize>; 4]> = (0..cells).map(|c| self.neighbours(c)).collect();
        let mut floor = vec![0i64; cells];
        for c in 0..cells {
            floor[c] = (0..n)
                .map(|t| {
                    let open: i64 = Side::ALL
                        .iter()
                        .filter(|s| nbrs[c][s.index()].is_some() && closed[t][s.index()])
                        .count() as i64;
                    self.cost(c, t) + open
                })
                .min()
                .expect("non-empty tileset");
        }
        let bound: i64 = floor.iter().sum();
        let mut nodes = 0u64;
        if n <= 128 {
            let mut csp = Csp::new(self, &closed, &nbrs, &floor, opts);
            csp.run()?;
            nodes += csp.nodes;
            if csp.found > 0 {
                let minimizers = csp.kept.iter().map(|idx| self.config(idx, bound)).collect();
                return Ok(SearchResult {
                    energy_halves: bound,
                    count: csp.found,
                    saturated: csp.saturated,
                    minimizers,
                    nodes,
                });
            }
        }
        let start = if n <= 128 { 1 } else { 0 };
        for budget in start..=opts.max_excess {
            let mut st = Search {
                prob: self,
                closed: &closed,
                nbrs: &nbrs,
                floor: &floor,
                assign: vec![usize::MAX; cells],
                found: 0,
                saturated: false,
                kept: Vec::new(),
                nodes: 0,
                opts,
            };
            st.dfs(budget)?;
            nodes += st.nodes;
            if st.found > 0 {
                let energy = bound + budget;
                let minimizers = st.kept.iter().map(|idx| self.config(idx, energy)).collect();
                return Ok(SearchResult {
                    energy_halves: energy,
                    count: st.found,
                    saturated: st.saturated,
                    minimizers,
                    nodes,
                });
            }
        }
        Err(TileError::SearchExhausted(format!(
            "no configuration within {} half units of the bound {bound}",
            opts.max_excess
        )))
    }

    fn neighbours(&self, c: usize) -> [Option<usize>; 4] {
        let (x, y, w) = (c % self.w, c / self.w, self.w);
        [
            (y > 0).then(|| c - w),
            (x + 1 < w).then(|| c + 1),
            (y + 1 < self.h).then(|| c + w),
            (x > 0).then(|| c - 1),
        ]
    }
}

/// Zero-excess search as a constraint problem with arc consistency.
///
/// At zero excess every cell must take a tile meeting its own bound and
/// every edge must either be allowed or be forced on both sides, so the
/// problem has only hard constraints and domain propagation applies.
struct Csp<'p> {
    nbrs: &'p [[Option<usize>; 4]],
    /// `support[t][side]`: tiles allowed on that side of `t`.
    support: Vec<[u128; 4]>,
    initial: Vec<u128>,
    found: u128,
    saturated: bool,
    kept: Vec<Vec<usize>>,
    nodes: u64,
    opts: &'p SearchOptions,
}

impl<'p> Csp<'p> {
    fn new(
        prob: &TilingProblem<'_>,
        closed: &[[bool; 4]],
        nbrs: &'p [[Option<usize>; 4]],
        floor: &[i64],
        opts: &'p SearchOptions,
    ) -> Self {
        let ts = prob.ts;
        let n = ts.len();
        let mut support = vec![[0u128; 4]; n];
        for t in 0..n {
            for side in Side::ALL {
                let s = side.index();
                for u in 0..n {
                    let ok = match side {
                        Side::Top => ts.v_ok(u, t),
                        Side::Bottom => ts.v_ok(t, u),
                        Side::Left => ts.h_ok(u, t),
                        Side::Right => ts.h_ok(t, u),
                    };
                    if ok || (closed[t][s] && closed[u][OPPOSITE[s]]) {
                        support[t][s] |= 1 << u;
                    }
                }
            }
        }
        let initial = (0..nbrs.len())
            .map(|c| {
                (0..n)
                    .filter(|&t| {
                        let open = Side::ALL
                            .iter()
                            .filter(|s| nbrs[c][s.index()].is_some() && closed[t][s.index()])
                            .count();
                        prob.cost(c, t) + open as i64 == floor[c]
                    })
                    .fold(0u128, |m, t| m | 1 << t)
            })
            .collect();
        Csp {
            nbrs,
            support,
            initial,
            found: 0,
            saturated: false,
            kept: Vec::new(),
            nodes: 0,
            opts,
        }
    }

    fn run(&mut self) -> Result<()> {
        let mut dom = self.initial.clone();
        let all: Vec<usize> = (0..dom.len()).collect();
        if self.propagate(&mut dom, all) {
            self.dfs(dom)?;
        }
        Ok(())
    }

    /// Shrink domains until every tile has support on every side; false on
    /// a wipe-out.
    fn propagate(&self, dom: &mut [u128], mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; dom.len()];
        for &c in &queue {
            queued[c] = true;
        }
        while let Some(c) = queue.pop() {
            queued[c] = false;
            for side in 0..4 {
                let Some(d) = self.nbrs[c][side] else {
                    continue;
                };
                let mut allowed = 0u128;
                let mut m = dom[c];
                while m != 0 {
                    let t = m.trailing_zeros() as usize;
                    m &= m - 1;
                    allowed |= self.support[t][side];
                }
                let next = dom[d] & allowed;
                if next != dom[d] {
                    if next == 0 {
                        return false;
                    }
                    dom[d] = next;
                    if !queued[d] {
                        queued[d] = true;
                        queue.push(d);
                    }
                }
            }
        }
        true
    }

    fn dfs(&mut self, dom: Vec<u128>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.opts.max_nodes {
            return Err(TileError::SearchExhausted(format!(
                "node budget {} spent",
                self.opts.max_nodes
            )));
        }
        let pick = (0..dom.len())
            .filter(|&c| dom[c].count_ones() > 1)
            .min_by_key(|&c| dom[c].count_ones());
        let Some(c) = pick else {
            self.found = self.found.saturating_add(1);
            if self.kept.len() < self.opts.keep {
                self.kept
                    .push(dom.iter().map(|m| m.trailing_zeros() as usize).collect());
            }
            if self.found >= self.opts.count_limit {
                self.saturated = true;
            }
            return Ok(());
        };
        let mut m = dom[c];
        while m != 0 {
            let t = m.trailing_zeros() as usize;
            m &= m - 1;
            let mut next = dom.clone();
            next[c] = 1 << t;
            if self.propagate(&mut next, vec![c]) {
                self.dfs(next)?;
            }
            if self.saturated {
                break;
            }
        }
        Ok(())
    }
}

struct Enum {
    best: i64,
    count: u128,
    kept: Vec<Vec<usize>>,
    idx: Vec<usize>,
}

struct Search<'p, 'a> {
    prob: &'p TilingProblem<'a>,
    closed: &'p [[bool; 4]],
    nbrs: &'p [[Option<usize>; 4]],
    floor: &'p [i64],
    assign: Vec<usize>,
    found: u128,
    saturated: bool,
    kept: Vec<Vec<usize>>,
    nodes: u64,
    opts: &'p SearchOptions,
}

const OPPOSITE: [usize; 4] = [2, 3, 0, 1];

impl Search<'_, '_> {
    /// Increase of the energy bound when `t` is placed at `c`.
    fn excess(&self, c: usize, t: usize) -> i64 {
        let ts = self.prob.ts;
        let mut d = self.prob.cost(c, t) - self.floor[c];
        for side in Side::ALL {
            let Some(nb) = self.nbrs[c][side.index()] else {
                continue;
            };
            let u = self.assign[nb];
            if u == usize::MAX {
                d += self.closed[t][side.index()] as i64;
                continue;
            }
            let ok = match side {
                Side::Top => ts.v_ok(u, t),
                Side::Bottom => ts.v_ok(t, u),
                Side::Left => ts.h_ok(u, t),
                Side::Right => ts.h_ok(t, u),
            };
            d += if ok { 0 } else { 2 } - self.closed[u][OPPOSITE[side.index()]] as i64;
        }
        d
    }

    fn candidates(&self, c: usize, budget: i64) -> usize {
        (0..self.prob.ts.len())
            .filter(|&t| self.excess(c, t) <= budget)
            .count()
    }

    fn dfs(&mut self, budget: i64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.opts.max_nodes {
            return Err(TileError::SearchExhausted(format!(
                "node budget {} spent",
                self.opts.max_nodes
            )));
        }
        let mut pick = None;
        let mut fewest = usize::MAX;
        for c in 0..self.assign.len() {
            if self.assign[c] != usize::MAX {
                continue;
            }
            let k = self.candidates(c, budget);
            if k < fewest {
                fewest = k;
                pick = Some(c);
                if k <= 1 {
                    break;
                }
            }
        }
        let Some(c) = pick else {
            if budget == 0 {
                self.found = self.found.saturating_add(1);
                if self.kept.len() < self.opts.keep {
                    self.kept.push(self.assign.clone());
                }
                if self.found >= self.opts.count_limit {
                    self.saturated = true;
                }
            }
            return Ok(());
        };
        if fewest == 0 {
            return Ok(());
        }
        for t in 0..self.prob.ts.len() {
            let d = self.excess(c, t);
            if d > budget {
                continue;
            }
            self.assign[c] = t;
            self.dfs(budget - d)?;
            self.assign[c] = usize::MAX;
            if self.saturated {
                break;
            }
        }
        Ok(())
    }
}

/// Limits for [`TilingProblem::search`].
#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Largest excess over the lower bound tried, in half units.
    pub max_excess: i64,
    pub max_nodes: u64,
    /// Stop counting minimizers once this many are found.
    pub count_limit: u128,
    /// Minimizers returned.
    pub keep: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_excess: 8,
            max_nodes: 20_000_000,
            count_limit: 1 << 20,
            keep: 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExhaustiveResult {
    pub energy_halves: i64,
    pub count: u128,
    /// Up to 1024 minimizers in enumeration order.
    pub minimizers: Vec<TileConfig>,
}

impl ExhaustiveResult {
    pub fn energy(&self) -> f64 {
        self.energy_halves as f64 / 2.0
    }
}

#[derive(Clone, Debug)]
pub struct TransferResult {
    pub energy_halves: i64,
    pub count: u128,
    pub minimizer: TileConfig,
}

impl TransferResult {
    pub fn energy(&self) -> f64 {
        self.energy_halves as f64 / 2.0
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub energy_halves: i64,
    /// Exact unless `saturated`, in which case it is a lower bound.
    pub count: u128,
    pub saturated: bool,
    pub minimizers: Vec<TileConfig>,
    pub nodes: u64,
}

impl SearchResult {
    pub fn energy(&self) -> f64 {
        self.energy_halves as f64 / 2.0
    }
}

pub fn ground_exhaustive(ts: &Tileset, w: usize, h: usize) -> Result<ExhaustiveResult> {
    TilingProblem::new(ts, w, h)?.exhaustive()
}

pub fn ground_transfer(ts: &Tileset, w: usize, h: usize) -> Result<TransferResult> {
    TilingProblem::new(ts, w, h)?.transfer()
}

pub fn ground_search(
    ts: &Tileset,
    w: usize,
    h: usize,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    TilingProblem::new(ts, w, h)?.search(opts)
}
