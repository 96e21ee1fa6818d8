use serde::{Deserialize, Serialize};

use super::{hermitian_norm, IsometryBlock, LocalIsometry, Result, SimError};
use crate::opcore::{
    self, full_spectrum, named_interaction, HamiltonianExpr, Interaction, LocalTerm, Site,
    SiteSystem,
};
use crate::{CMatrix, C64};

/// Constant in the first-order requirement Δ = κ (||H1||²/ε + ||H1||/η).
pub const KAPPA: f64 = 8.0;

pub fn first_order_required_delta(h1_norm: f64, eps: f64, eta: f64) -> f64 {
    KAPPA * (h1_norm * h1_norm / eps + h1_norm / eta)
}

#[derive(Clone, Debug)]
pub struct FirstOrder {
    pub expr: HamiltonianExpr,
    pub h1_norm: f64,
    pub required_delta: Option<f64>,
    pub warnings: Vec<String>,
}

/// `Δ H0 + H1`, after checking that `H0` has ground energy 0 and gap at least 1.
///
/// When `accuracy = Some((ε, η))` the Δ requirement is checked too; a shortfall
/// is only a warning.
pub fn build_first_order(
    h0: &HamiltonianExpr,
    h1: &HamiltonianExpr,
    delta: f64,
    accuracy: Option<(f64, f64)>,
) -> Result<FirstOrder> {
    if h0.system() != h1.system() {
        return Err(SimError::Precondition(
            "H0 and H1 act on different systems".into(),
        ));
    }
    let spec = full_spectrum(h0)?;
    let l0 = spec.eigenvalues[0];
    if l0.abs() > 1e-9 {
        return Err(SimError::Precondition(format!(
            "ground energy {l0} is not 0"
        )));
    }
    if let Some(&e) = spec
        .eigenvalues
        .iter()
        .find(|&&e| e > 1e-9 && e < 1.0 - 1e-9)
    {
        return Err(SimError::Precondition(format!(
            "excited level {e} below the unit gap"
        )));
    }
    let h1_norm = hermitian_norm(&opcore::assemble(h1)?);
    let required_delta = accuracy.map(|(eps, eta)| first_order_required_delta(h1_norm, eps, eta));
    let mut warnings = Vec::new();
    if let Some(req) = required_delta {
        if delta < req {
            let msg = format!("Δ = {delta} is below the first-order requirement {req}");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let mut expr = h0.scaled(delta);
    for t in h1.terms() {
        expr.add_term(t.clone())?;
    }
    Ok(FirstOrder {
        expr,
        h1_norm,
        required_delta,
        warnings,
    })
}

/// Coupling strengths on an `n x n` grid: `alpha[x][y]` weights the vertical
/// edge `(x, y)-(x, y+1)` and `beta[x][y]` the horizontal edge `(x, y)-(x+1, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingGrid {
    pub n: usize,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub delta2: f64,
    /// Every coupling is a multiple of `delta2 / 2^bits`.
    pub bits: u32,
}

impl CouplingGrid {
    pub fn new(alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>, delta2: f64, bits: u32) -> Result<Self> {
        let grid = CouplingGrid {
            n: alpha.len(),
            alpha,
            beta,
            delta2,
            bits,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || !(self.delta2 > 0.0) {
            return Err(SimError::BadGrid("need n >= 1 and Δ2 > 0".into()));
        }
        let square = |v: &Vec<Vec<f64>>| v.len() == n && v.iter().all(|r| r.len() == n);
        if !square(&self.alpha) || !square(&self.beta) {
            return Err(SimError::BadGrid(format!("alpha and beta must be {n}x{n}")));
        }
        let scale = 2f64.powi(self.bits as i32) / self.delta2;
        for (name, fam) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            for (x, row) in fam.iter().enumerate() {
                for (y, &v) in row.iter().enumerate() {
                    if !(0.0..=self.delta2).contains(&v) {
                        return Err(SimError::CouplingRange {
                            name: format!("{name}[{x}][{y}]"),
                            value: v,
                            max: self.delta2,
                        });
                    }
                    if ((v * scale) - (v * scale).round()).abs() > 1e-9 {
                        return Err(SimError::BadGrid(format!(
                            "{name}[{x}][{y}] = {v} is not representable in {} bits of Δ2",
                            self.bits
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Target qubits `b{x}_{y}` of the `n x n` grid, row-major.
    pub fn target_system(&self) -> SiteSystem {
        SiteSystem::lattice("b", self.n, self.n, 2).expect("generated ids are unique")
    }

    /// `Σ α h^Heis(vertical) + Σ β h^Heis(horizontal)` on the `n x n` grid.
    pub fn target(&self) -> HamiltonianExpr {
        let mut h = HamiltonianExpr::new(self.target_system());
        for x in 0..self.n {
            for y in 0..self.n {
                let here = format!("b{x}_{y}");
                if y + 1 < self.n && self.alpha[x][y] != 0.0 {
                    h.add_named(
                        Interaction::Heisenberg,
                        &[&here, &format!("b{x}_{}", y + 1)],
                        self.alpha[x][y],
                    )
                    .expect("sites exist");
                }
                if x + 1 < self.n && self.beta[x][y] != 0.0 {
                    h.add_named(
                        Interaction::Heisenberg,
                        &[&here, &format!("b{}_{y}", x + 1)],
                        self.beta[x][y],
                    )
                    .expect("sites exist");
                }
            }
        }
        h
    }
}

/// Level indices of the synthetic A-site.
const IDLE: usize = 0;
const FLAG: usize = 1;
const GLAG: usize = 2;
const OUT: usize = 3;

/// Product-form stand-in for the `H_A` of the full construction.
#[derive(Clone, Debug)]
pub struct SyntheticA {
    pub expr: HamiltonianExpr,
    pub p1: CMatrix,
    pub p2: CMatrix,
    pub p3: CMatrix,
    /// Single-site ground state of each A site, row-major.
    pub states: Vec<Vec<f64>>,
    pub w: usize,
    pub h: usize,
    pub n: usize,
}

fn level_projector(d: usize, level: usize) -> CMatrix {
    let mut p = CMatrix::zeros(d, d);
    if level < d {
        p[(level, level)] = C64::new(1.0, 0.0);
    }
    p
}

/// Build `H_A = Σ (I - |φ_xy><φ_xy|)` on a `w x h` lattice of A sites `a{x}_{y}`.
///
/// Inside the `n x n` corner `φ = √(1-a-b)|idle> + √a|flag> + √b|glag>` with
/// `a = α/Δ2`, `b = β/Δ2`, so `<P1> = a` and `<P2> = b` exactly; this needs
/// `α + β ≤ Δ2` per site. Outside the corner `φ = |out>` and `<P3> = 1`. The
/// `out` level exists only when the lattice is larger than the corner, so the
/// local dimension is 3 or 4. Each site term has spectrum {0, 1}.
pub fn synthetic_ha(grid: &CouplingGrid, w: usize, h: usize) -> Result<SyntheticA> {
    grid.validate()?;
    let n = grid.n;
    if n > w || n > h {
        return Err(SimError::BadGrid(format!(
            "corner {n} exceeds lattice {w}x{h}"
        )));
    }
    let d = if w == n && h == n { 3 } else { 4 };
    let system = SiteSystem::lattice("a", w, h, d)?;
    let mut expr = HamiltonianExpr::new(system);
    let mut states = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut phi = vec![0.0; d];
            if x < n && y < n {
                let a = grid.alpha[x][y] / grid.delta2;
                let b = grid.beta[x][y] / grid.delta2;
                if a + b > 1.0 + 1e-12 {
                    return Err(SimError::CouplingRange {
                        name: format!("alpha[{x}][{y}] + beta[{x}][{y}]"),
                        value: grid.alpha[x][y] + grid.beta[x][y],
                        max: grid.delta2,
                    });
                }
                phi[IDLE] = (1.0 - a - b).max(0.0).sqrt();
                phi[FLAG] = a.sqrt();
                phi[GLAG] = b.sqrt();
            } else {
                phi[OUT] = 1.0;
            }
            let op = CMatrix::from_fn(d, d, |r, c| {
                let id = if r == c { 1.0 } else { 0.0 };
                C64::new(id - phi[r] * phi[c], 0.0)
            });
            expr.add_term(LocalTerm::new(vec![format!("a{x}_{y}")], op, 1.0)?)?;
            states.push(phi);
        }
    }
    Ok(SyntheticA {
        expr,
        p1: level_projector(d, FLAG),
        p2: level_projector(d, GLAG),
        p3: level_projector(d, OUT),
        states,
        w,
        h,
        n,
    })
}

impl SyntheticA {
    /// `b{x}_{y} -> |φ_xy>_A ⊗ |x>_B` inside the corner, `|out>|0>` outside.
    pub fn isometry(&self, grid: &CouplingGrid) -> Result<LocalIsometry> {
        let d = self.p1.nrows();
        let mut blocks = Vec::new();
        for y in 0..self.h {
            for x in 0..self.w {
                let phi = &self.states[y * self.w + x];
                let (a, b) = (format!("a{x}_{y}"), format!("b{x}_{y}"));
                if x < self.n && y < self.n {
                    let map = CMatrix::from_fn(2 * d, 2, |r, c| {
                        if r % 2 == c {
                            C64::new(phi[r / 2], 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    });
                    blocks.push(IsometryBlock::new(Some(&b), &[&a, &b], map));
                } else {
                    let mut state = vec![C64::new(0.0, 0.0); 2 * d];
                    state[2 * OUT] = C64::new(1.0, 0.0);
                    blocks.push(IsometryBlock::ancilla(&[&a, &b], &state));
                }
            }
        }
        LocalIsometry::new(grid.target_system(), blocks)
    }
}

/// Δ1 ≥ Δ2² W² H² / ε + Δ2 W H / η.
pub fn grid_required_delta1(delta2: f64, w: usize, h: usize, eps: f64, eta: f64) -> f64 {
    let wh = (w * h) as f64;
    delta2 * delta2 * wh * wh / eps + delta2 * wh / eta
}

/// `Δ1 (H_A ⊗ I + Σ P3 ⊗ |1><1|) + Δ2 (Σ P1 ⊗ h^Heis_vert + Σ P2 ⊗ h^Heis_hor)`.
///
/// `h_a` must hold `w * h` sites in row-major order; B qubits `b{x}_{y}` are
/// appended after them. The coupling sums run over every lattice edge, so the
/// coupling part is translationally invariant.
pub fn assemble_hab(
    h_a: &HamiltonianExpr,
    p: [&CMatrix; 3],
    delta1: f64,
    delta2: f64,
    w: usize,
    h: usize,
    n: usize,
) -> Result<HamiltonianExpr> {
    let a_sites = h_a.system().sites();
    if a_sites.len() != w * h || n > w || n > h {
        return Err(SimError::BadGrid(format!(
            "H_A has {} sites, lattice is {w}x{h} with corner {n}",
            a_sites.len()
        )));
    }
    let d = a_sites[0].dim;
    if a_sites.iter().any(|s| s.dim != d) || p.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(SimError::BadGrid(format!(
            "projectors must be {d}x{d} like every A site"
        )));
    }
    let mut system = h_a.system().clone();
    for y in 0..h {
        for x in 0..w {
            system.push(Site::at(format!("b{x}_{y}"), 2, vec![x as f64, y as f64]))?;
        }
    }
    let a = |x: usize, y: usize| a_sites[y * w + x].id.clone();
    let b = |x: usize, y: usize| format!("b{x}_{y}");
    let mut out = HamiltonianExpr::new(system);
    for t in h_a.terms() {
        out.add_term(t.with_coeff(t.coeff() * delta1))?;
    }
    let one = level_projector(2, 1);
    let heis = named_interaction(&Interaction::Heisenberg, &[2, 2])?;
    let nonzero = |m: &CMatrix| m.iter().any(|z| z.norm() > 0.0);
    let [p1, p2, p3] = p;
    for y in 0..h {
        for x in 0..w {
            if nonzero(p3) {
                out.add_term(LocalTerm::new(
                    vec![a(x, y), b(x, y)],
                    p3.kronecker(&one),
                    delta1,
                )?)?;
            }
            if y + 1 < h && nonzero(p1) {
                out.add_term(LocalTerm::new(
                    vec![a(x, y), b(x, y), b(x, y + 1)],
                    p1.kronecker(&heis),
                    delta2,
                )?)?;
            }
            if x + 1 < w && nonzero(p2) {
                out.add_term(LocalTerm::new(
                    vec![a(x, y), b(x, y), b(x + 1, y)],
                    p2.kronecker(&heis),
                    delta2,
                )?)?;
            }
        }
    }
    Ok(out)
}
