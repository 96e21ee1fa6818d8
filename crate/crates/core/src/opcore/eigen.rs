use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    assemble, assemble_real, assemble_sparse, CsrMatrix, HamiltonianExpr, OpError, Result,
};
use crate::{CMatrix, C64};

/// Dimension at which `low_spectrum` switches from dense to Krylov.
pub const DENSE_SWITCHOVER: usize = 4096;

/// Eigenvalues closer than this to a cut make the cut ambiguous.
pub const AMBIGUOUS_CUT_TOL: f64 = 1e-9;

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    /// Bound on `||H v - λ v||` for every returned pair.
    pub residual_tol: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn gap(&self) -> Option<f64> {
        (self.eigenvalues.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }
}

fn sorted_pairs(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

/// Full diagonalisation of the dense matrix of `h`.
pub fn full_spectrum(h: &HamiltonianExpr) -> Result<Spectrum> {
    let dim = h.dim()?;
    let (values, vectors, norm) = if h.is_real() {
        let m = assemble_real(h)?;
        let norm = m.abs().row_sum().max();
        let eig = SymmetricEigen::new(m);
        let vecs = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        (eig.eigenvalues.as_slice().to_vec(), vecs, norm)
    } else {
        let m = assemble(h)?;
        let norm = (0..dim)
            .map(|r| m.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let eig = SymmetricEigen::new(m);
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors, norm)
    };
    let order = sorted_pairs(&values);
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = CMatrix::from_fn(dim, dim, |r, c| vectors[(r, order[c])]);
    // Backward-stable dense solvers give residuals of order machine epsilon times ||H||.
    let residual_tol = 1e-12 * (1.0 + norm) * (dim as f64).sqrt().max(1.0);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        residual_tol,
    })
}

fn truncate(spec: Spectrum, k: usize) -> Spectrum {
    let vecs = spec.eigenvectors.columns(0, k).into_owned();
    Spectrum {
        eigenvalues: spec.eigenvalues[..k].to_vec(),
        eigenvectors: vecs,
        residual_tol: spec.residual_tol,
    }
}

/// `k` lowest eigenpairs via dense diagonalisation.
pub fn low_spectrum_dense(h: &HamiltonianExpr, k: usize, tol: f64) -> Result<Spectrum> {
    let dim = h.dim()?;
    if k > dim {
        return Err(OpError::TooManyEigenpairs { k, dim });
    }
    let mut spec = truncate(full_spectrum(h)?, k);
    spec.residual_tol = spec.residual_tol.max(tol);
    Ok(spec)
}

/// `k` lowest eigenpairs, dense below [`DENSE_SWITCHOVER`] and Krylov above.
pub fn low_spectrum(h: &HamiltonianExpr, k: usize, tol: f64) -> Result<Spectrum> {
    if h.dim()? < DENSE_SWITCHOVER {
        low_spectrum_dense(h, k, tol)
    } else {
        low_spectrum_krylov(h, k, tol, &KrylovOptions::default())
    }
}

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    /// Largest basis before a thick restart; 0 picks a size from `k`.
    pub max_basis: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            max_basis: 0,
            max_iterations: 5000,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

struct KrylovBasis<'a> {
    a: &'a CsrMatrix,
    v: Vec<Vec<C64>>,
    av: Vec<Vec<C64>>,
    t: DMatrix<C64>,
}

impl KrylovBasis<'_> {
    /// Orthogonalise `x` against the basis (twice, DGKS style) and append it.
    fn push(&mut self, mut x: Vec<C64>) -> bool {
        let start = norm(&x);
        if start == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for q in &self.v {
                let c = dot(q, &x);
                x.iter_mut().zip(q).for_each(|(xi, qi)| *xi -= c * qi);
            }
        }
        let nx = norm(&x);
        if nx <= 1e-10 * start {
            return false;
        }
        x.iter_mut().for_each(|z| *z /= nx);
        let mut ax = vec![C64::new(0.0, 0.0); x.len()];
        self.a.matvec(&x, &mut ax);
        let m = self.v.len();
        let mut t = DMatrix::zeros(m + 1, m + 1);
        t.view_mut((0, 0), (m, m)).copy_from(&self.t);
        for i in 0..m {
            let tij = dot(&self.v[i], &ax);
            t[(i, m)] = tij;
            t[(m, i)] = tij.conj();
        }
        t[(m, m)] = C64::new(dot(&x, &ax).re, 0.0);
        self.t = t;
        self.v.push(x);
        self.av.push(ax);
        true
    }

    fn combine(vs: &[Vec<C64>], y: nalgebra::DVectorView<C64>) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); vs[0].len()];
        for (j, vj) in vs.iter().enumerate() {
            let c = y[j];
            out.iter_mut().zip(vj).for_each(|(o, x)| *o += c * x);
        }
        out
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// `k` lowest eigenpairs by a block Krylov method with full reorthogonalisation
/// and thick restarts.
///
/// The block size equals `k`, so eigenvalues of multiplicity up to `k` are found.
/// Every returned pair is checked against a fresh matrix-vector product.
pub fn low_spectrum_krylov(
    h: &HamiltonianExpr,
    k: usize,
    tol: f64,
    opts: &KrylovOptions,
) -> Result<Spectrum> {
    let a = assemble_sparse(h)?;
    let n = a.dim;
    if k > n {
        return Err(OpError::TooManyEigenpairs { k, dim: n });
    }
    if k == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(n, 0),
            residual_tol: tol,
        });
    }
    let p = k;
    let max_basis = if opts.max_basis > 0 {
        opts.max_basis
    } else {
        (3 * k + 40).max(3 * p)
    }
    .min(n)
    .max(k + p.min(n - k).max(1))
    .min(n);
    let keep_target = (k + p).min(max_basis.saturating_sub(p)).max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis = KrylovBasis {
        a: &a,
        v: Vec::new(),
        av: Vec::new(),
        t: DMatrix::zeros(0, 0),
    };
    while basis.v.len() < p {
        basis.push(random_vector(&mut rng, n));
    }
    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let m = basis.v.len();
        let t = (&basis.t + basis.t.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(t);
        let order = sorted_pairs(eig.eigenvalues.as_slice());
        let nritz = keep_target.min(m);
        let mut xs = Vec::with_capacity(nritz);
        let mut axs = Vec::with_capacity(nritz);
        let mut residuals = Vec::with_capacity(nritz);
        for &i in order.iter().take(nritz) {
            let y = eig.eigenvectors.column(i);
            let theta = eig.eigenvalues[i];
            let x = KrylovBasis::combine(&basis.v, y);
            let ax = KrylovBasis::combine(&basis.av, y);
            let r: Vec<C64> = ax.iter().zip(&x).map(|(u, v)| u - v * theta).collect();
            residuals.push(r);
            xs.push(x);
            axs.push(ax);
        }
        let res_norms: Vec<f64> = residuals.iter().map(|r| norm(r)).collect();
        if m >= k {
            worst = res_norms[..k].iter().copied().fold(0.0, f64::max);
            if worst <= tol {
                let values: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
                return finish(&a, &xs[..k], &values, tol);
            }
        }
        let mut candidates: Vec<Vec<C64>> = (0..k.min(nritz))
            .filter(|&i| res_norms[i] > tol)
            .take(p)
            .map(|i| std::mem::take(&mut residuals[i]))
            .collect();
        if m + candidates.len().max(1) > max_basis {
            let keep = keep_target.min(xs.len());
            let thetas: Vec<f64> = order[..keep].iter().map(|&i| eig.eigenvalues[i]).collect();
            basis.v = xs.drain(..keep).collect();
            basis.av = axs.drain(..keep).collect();
            basis.t = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                keep,
                thetas.iter().map(|&x| C64::new(x, 0.0)),
            ));
        }
        let before = basis.v.len();
        for c in candidates.drain(..) {
            if basis.v.len() < max_basis {
                basis.push(c);
            }
        }
        if basis.v.len() == before && basis.v.len() < n {
            // Stagnation: the residual block lies in the current basis.
            basis.push(random_vector(&mut rng, n));
        }
    }
    Err(OpError::NoConvergence {
        iterations: opts.max_iterations,
        residual: worst,
    })
}

fn finish(a: &CsrMatrix, xs: &[Vec<C64>], values: &[f64], tol: f64) -> Result<Spectrum> {
    let n = a.dim;
    let mut vecs = CMatrix::zeros(n, xs.len());
    let mut ax = vec![C64::new(0.0, 0.0); n];
    let mut worst = 0.0f64;
    for (j, x) in xs.iter().enumerate() {
        let nx = norm(x);
        let x: Vec<C64> = x.iter().map(|z| z / nx).collect();
        a.matvec(&x, &mut ax);
        let r: f64 = ax
            .iter()
            .zip(&x)
            .map(|(u, v)| (u - v * values[j]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
        vecs.column_mut(j)
            .iter_mut()
            .zip(&x)
            .for_each(|(d, s)| *d = *s);
    }
    if worst > tol * 1.01 {
        return Err(OpError::NoConvergence {
            iterations: 0,
            residual: worst,
        });
    }
    Ok(Spectrum {
        eigenvalues: values.to_vec(),
        eigenvectors: vecs,
        residual_tol: tol,
    })
}

/// Eigenvectors of `H` with eigenvalue at most `cut`.
#[derive(Clone, Debug)]
pub struct LowSubspace {
    pub cut: f64,
    /// All eigenvalues of `H`, ascending.
    pub all_eigenvalues: Vec<f64>,
    /// Eigenvalues at most `cut`.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal basis of the low-energy space, one column per eigenvalue.
    pub basis: CMatrix,
}

impl LowSubspace {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Split a full spectrum at `cut`, refusing eigenvalues within [`AMBIGUOUS_CUT_TOL`] of it.
    pub fn from_spectrum(spec: &Spectrum, cut: f64) -> Result<Self> {
        if !cut.is_finite() {
            return Err(OpError::NonFiniteCut(cut));
        }
        if let Some(&e) = spec
            .eigenvalues
            .iter()
            .find(|&&e| (e - cut).abs() < AMBIGUOUS_CUT_TOL)
        {
            return Err(OpError::AmbiguousCut {
                delta: cut,
                eigenvalue: e,
            });
        }
        let r = spec.eigenvalues.iter().take_while(|&&e| e <= cut).count();
        Ok(LowSubspace {
            cut,
            all_eigenvalues: spec.eigenvalues.clone(),
            eigenvalues: spec.eigenvalues[..r].to_vec(),
            basis: spec.eigenvectors.columns(0, r).into_owned(),
        })
    }
}

/// Low-energy subspace of `H` below `cut` (dense).
pub fn eigen_below(h: &HamiltonianExpr, cut: f64) -> Result<LowSubspace> {
    if !cut.is_finite() {
        return Err(OpError::NonFiniteCut(cut));
    }
    LowSubspace::from_spectrum(&full_spectrum(h)?, cut)
}

/// Projector onto the eigenvalues at most Δ and the restricted operator `H P`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowEnergy {
    pub projector: CMatrix,
    pub restricted: CMatrix,
    pub rank: usize,
}

pub fn restrict_below(h: &HamiltonianExpr, delta: f64) -> Result<LowEnergy> {
    let low = eigen_below(h, delta)?;
    let b = &low.basis;
    let lam = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        low.rank(),
        low.eigenvalues.iter().map(|&x| C64::new(x, 0.0)),
    ));
    Ok(LowEnergy {
        projector: b * b.adjoint(),
        restricted: b * lam * b.adjoint(),
        rank: low.rank(),
    })
}
