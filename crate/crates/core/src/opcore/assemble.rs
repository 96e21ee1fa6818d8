use nalgebra::DMatrix;

use super::{HamiltonianExpr, LocalTerm, Result};
use crate::{CMatrix, C64};

/// Index bookkeeping for embedding one term into the global basis.
struct Embedding {
    /// Global stride and local dimension of each supported site.
    positions: Vec<(usize, usize)>,
    /// Global offset contributed by each local basis index.
    offsets: Vec<usize>,
}

impl Embedding {
    fn new(h: &HamiltonianExpr, term: &LocalTerm) -> Result<Self> {
        let strides = h.system().strides();
        let mut positions = Vec::with_capacity(term.support().len());
        for id in term.support() {
            let i = h.system().index_of(id)?;
            positions.push((strides[i], h.system().sites()[i].dim));
        }
        let local_dim: usize = positions.iter().map(|p| p.1).product();
        let offsets = (0..local_dim)
            .map(|mut l| {
                let mut off = 0;
                for &(stride, d) in positions.iter().rev() {
                    off += (l % d) * stride;
                    l /= d;
                }
                off
            })
            .collect();
        Ok(Embedding { positions, offsets })
    }

    /// Local index of global basis state `col`.
    fn local_index(&self, col: usize) -> usize {
        self.positions
            .iter()
            .fold(0, |acc, &(stride, d)| acc * d + (col / stride) % d)
    }
}

/// Visit every nonzero `(row, col, value)` of `coeff * op ⊗ I` for each term.
fn for_each_entry(h: &HamiltonianExpr, mut f: impl FnMut(usize, usize, C64)) -> Result<()> {
    let dim = h.dim()?;
    for term in h.terms() {
        if term.coeff() == 0.0 {
            continue;
        }
        let emb = Embedding::new(h, term)?;
        let op = term.op();
        for col in 0..dim {
            let l = emb.local_index(col);
            let base = col - emb.offsets[l];
            for (lr, off) in emb.offsets.iter().enumerate() {
                let v = op[(lr, l)];
                if v != C64::new(0.0, 0.0) {
                    f(base + off, col, v * term.coeff());
                }
            }
        }
    }
    Ok(())
}

/// Dense matrix of `H`.
pub fn assemble(h: &HamiltonianExpr) -> Result<CMatrix> {
    let dim = h.dim()?;
    let mut m = CMatrix::zeros(dim, dim);
    for_each_entry(h, |r, c, v| m[(r, c)] += v)?;
    Ok(m)
}

/// Dense real matrix of `H`; imaginary parts are dropped, so call only when `h.is_real()`.
pub fn assemble_real(h: &HamiltonianExpr) -> Result<DMatrix<f64>> {
    let dim = h.dim()?;
    let mut m = DMatrix::zeros(dim, dim);
    for_each_entry(h, |r, c, v| m[(r, c)] += v.re)?;
    Ok(m)
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<C64>,
}

impl CsrMatrix {
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Max absolute row sum.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|z| z.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Sparse matrix of `H`, with duplicate entries summed.
pub fn assemble_sparse(h: &HamiltonianExpr) -> Result<CsrMatrix> {
    let dim = h.dim()?;
    let mut triplets = Vec::new();
    for_each_entry(h, |r, c, v| triplets.push((r, c, v)))?;
    triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
    let mut row_ptr = vec![0usize; dim + 1];
    let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
    let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
    let mut last: Option<(usize, usize)> = None;
    for (r, c, v) in triplets {
        if last == Some((r, c)) {
            *vals.last_mut().expect("previous entry") += v;
        } else {
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
    }
    for r in 0..dim {
        row_ptr[r + 1] += row_ptr[r];
    }
    Ok(CsrMatrix {
        dim,
        row_ptr,
        cols,
        vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{named_interaction, Interaction, SiteSystem};

    fn heis() -> CMatrix {
        named_interaction(&Interaction::Heisenberg, &[2, 2]).unwrap()
    }

    #[test]
    fn empty_sum_is_zero() {
        let h = HamiltonianExpr::new(SiteSystem::qubits("q", 3));
        assert_eq!(assemble(&h).unwrap(), CMatrix::zeros(8, 8));
    }

    #[test]
    fn leading_pair_embeds_as_op_tensor_identity() {
        let mut h = HamiltonianExpr::new(SiteSystem::qubits("q", 3));
        h.add_named(Interaction::Heisenberg, &["q0", "q1"], 1.0)
            .unwrap();
        assert_eq!(
            assemble(&h).unwrap(),
            heis().kronecker(&CMatrix::identity(2, 2))
        );
    }

    #[test]
    fn swapped_heisenberg_support_adds_up() {
        let mut h = HamiltonianExpr::new(SiteSystem::qubits("q", 3));
        h.add_named(Interaction::Heisenberg, &["q1", "q2"], 1.0)
            .unwrap();
        h.add_named(Interaction::Heisenberg, &["q2", "q1"], 1.0)
            .unwrap();
        let want = CMatrix::identity(2, 2).kronecker(&heis()) * C64::new(2.0, 0.0);
        assert!((assemble(&h).unwrap() - want).camax() < 1e-15);
    }

    #[test]
    fn reversed_support_reverses_tensor_order() {
        let mut h = HamiltonianExpr::new(SiteSystem::qubits("q", 2));
        h.add_named(Interaction::Pauli("XZ".into()), &["q1", "q0"], 1.0)
            .unwrap();
        let want = super::super::term::pauli('Z').kronecker(&super::super::term::pauli('X'));
        assert_eq!(assemble(&h).unwrap(), want);
    }

    #[test]
    fn sparse_and_dense_agree() {
        let mut h = HamiltonianExpr::new(SiteSystem::qubits("q", 4));
        h.add_named(Interaction::Heisenberg, &["q0", "q2"], 0.7)
            .unwrap();
        h.add_named(Interaction::Pauli("YXZ".into()), &["q3", "q1", "q0"], -0.3)
            .unwrap();
        h.add_named(Interaction::Projector(1), &["q2"], 2.0)
            .unwrap();
        let dense = assemble(&h).unwrap();
        let sparse = assemble_sparse(&h).unwrap();
        let mut x = vec![C64::new(0.0, 0.0); 16];
        let mut y = vec![C64::new(0.0, 0.0); 16];
        for c in 0..16 {
            x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            x[c] = C64::new(1.0, 0.0);
            sparse.matvec(&x, &mut y);
            for r in 0..16 {
                assert!((y[r] - dense[(r, c)]).norm() < 1e-15);
            }
        }
    }
}
