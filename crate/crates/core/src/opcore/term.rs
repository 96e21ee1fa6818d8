use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::{OpError, Result, Site, SiteSystem};
use crate::{CMatrix, C64};

/// Max-entry tolerance for accepting an operator as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Interactions that can be named in documents instead of spelled out.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Interaction {
    /// XX + YY + ZZ on two qubits.
    Heisenberg,
    /// XX + YY on two qubits.
    Xy,
    /// Tensor product of Pauli letters, one per supported qubit.
    Pauli(String),
    /// `|k><k|` on a single site.
    Projector(usize),
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interaction::Heisenberg => write!(f, "heisenberg"),
            Interaction::Xy => write!(f, "xy"),
            Interaction::Pauli(w) => write!(f, "pauli:{w}"),
            Interaction::Projector(k) => write!(f, "proj:{k}"),
        }
    }
}

impl FromStr for Interaction {
    type Err = OpError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || OpError::UnknownInteraction(s.to_string());
        match s {
            "heisenberg" => Ok(Interaction::Heisenberg),
            "xy" => Ok(Interaction::Xy),
            _ => {
                if let Some(word) = s.strip_prefix("pauli:") {
                    if word.is_empty() || !word.chars().all(|c| "IXYZ".contains(c)) {
                        return Err(bad());
                    }
                    Ok(Interaction::Pauli(word.to_string()))
                } else if let Some(k) = s.strip_prefix("proj:") {
                    k.parse().map(Interaction::Projector).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

pub(crate) fn pauli(c: char) -> CMatrix {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match c {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("not a Pauli letter: {c}"),
    }
}

fn pauli_word(word: &str) -> CMatrix {
    word.chars()
        .fold(DMatrix::identity(1, 1), |acc: CMatrix, c| {
            acc.kronecker(&pauli(c))
        })
}

/// Matrix of a named interaction on sites with local dimensions `dims`.
pub fn named_interaction(kind: &Interaction, dims: &[usize]) -> Result<CMatrix> {
    let mismatch = || OpError::InteractionDims {
        kind: kind.to_string(),
        dims: dims.to_vec(),
    };
    match kind {
        Interaction::Heisenberg | Interaction::Xy => {
            if dims != [2, 2] {
                return Err(mismatch());
            }
            let letters: &[&str] = if *kind == Interaction::Heisenberg {
                &["XX", "YY", "ZZ"]
            } else {
                &["XX", "YY"]
            };
            Ok(letters
                .iter()
                .map(|w| pauli_word(w))
                .fold(CMatrix::zeros(4, 4), |a, b| a + b))
        }
        Interaction::Pauli(word) => {
            if word.is_empty() || !word.chars().all(|c| "IXYZ".contains(c)) {
                return Err(OpError::UnknownInteraction(kind.to_string()));
            }
            if dims.len() != word.len() || dims.iter().any(|&d| d != 2) {
                return Err(mismatch());
            }
            Ok(pauli_word(word))
        }
        Interaction::Projector(k) => {
            if dims.len() != 1 || *k >= dims[0] {
                return Err(mismatch());
            }
            let mut m = CMatrix::zeros(dims[0], dims[0]);
            m[(*k, *k)] = C64::new(1.0, 0.0);
            Ok(m)
        }
    }
}

pub(crate) fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `coeff * op` acting on an ordered support of 1 to 3 sites.
///
/// The first support site is the most significant digit of `op`'s index.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    support: Vec<String>,
    op: CMatrix,
    coeff: f64,
    label: Option<Interaction>,
}

impl LocalTerm {
    pub fn new(support: Vec<String>, op: CMatrix, coeff: f64) -> Result<Self> {
        let distinct = support
            .iter()
            .enumerate()
            .all(|(i, s)| !support[..i].contains(s));
        if support.is_empty() || support.len() > 3 || !distinct {
            return Err(OpError::BadSupport(support));
        }
        if op.nrows() != op.ncols() {
            return Err(OpError::OperatorShape {
                rows: op.nrows(),
                cols: op.ncols(),
                expected: op.nrows(),
            });
        }
        let defect = hermitian_defect(&op);
        if defect > HERMITIAN_TOL {
            return Err(OpError::NotHermitian(defect));
        }
        Ok(LocalTerm {
            support,
            op,
            coeff,
            label: None,
        })
    }

    /// A named interaction on `support`, with the local dimensions taken from `system`.
    pub fn named(
        system: &SiteSystem,
        kind: Interaction,
        support: &[&str],
        coeff: f64,
    ) -> Result<Self> {
        let dims = support
            .iter()
            .map(|id| {
                system
                    .site(id)
                    .map(|s| s.dim)
                    .ok_or_else(|| OpError::UnknownSite(id.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let op = named_interaction(&kind, &dims)?;
        let mut t = LocalTerm::new(support.iter().map(|s| s.to_string()).collect(), op, coeff)?;
        t.label = Some(kind);
        Ok(t)
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn op(&self) -> &CMatrix {
        &self.op
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn label(&self) -> Option<&Interaction> {
        self.label.as_ref()
    }

    pub fn with_coeff(&self, coeff: f64) -> Self {
        LocalTerm {
            coeff,
            ..self.clone()
        }
    }

    pub fn is_real(&self) -> bool {
        self.op.iter().all(|z| z.im == 0.0)
    }

    /// True if this is the named interaction `kind` on the given unordered pair.
    pub fn is_named_on(&self, kind: &Interaction, a: &str, b: &str) -> bool {
        self.label.as_ref() == Some(kind)
            && self.support.len() == 2
            && ((self.support[0] == a && self.support[1] == b)
                || (self.support[0] == b && self.support[1] == a))
    }
}

/// A qudit system together with a list of local Hermitian terms.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianExpr {
    system: SiteSystem,
    terms: Vec<LocalTerm>,
}

impl HamiltonianExpr {
    pub fn new(system: SiteSystem) -> Self {
        HamiltonianExpr {
            system,
            terms: Vec::new(),
        }
    }

    pub fn system(&self) -> &SiteSystem {
        &self.system
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn dim(&self) -> Result<usize> {
        self.system.checked_dim()
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(LocalTerm::is_real)
    }

    pub fn term_dims(&self, term: &LocalTerm) -> Result<Vec<usize>> {
        term.support
            .iter()
            .map(|id| {
                self.system
                    .site(id)
                    .map(|s| s.dim)
                    .ok_or_else(|| OpError::UnknownSite(id.clone()))
            })
            .collect()
    }

    pub fn add_site(&mut self, site: Site) -> Result<()> {
        self.system.push(site)
    }

    pub fn add_term(&mut self, term: LocalTerm) -> Result<()> {
        let expected: usize = self.term_dims(&term)?.iter().product();
        if term.op.nrows() != expected {
            return Err(OpError::OperatorShape {
                rows: term.op.nrows(),
                cols: term.op.ncols(),
                expected,
            });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn add_named(&mut self, kind: Interaction, support: &[&str], coeff: f64) -> Result<()> {
        let term = LocalTerm::named(&self.system, kind, support, coeff)?;
        self.terms.push(term);
        Ok(())
    }

    pub fn remove_term(&mut self, index: usize) -> LocalTerm {
        self.terms.remove(index)
    }

    /// Index of the first term that is `kind` on the unordered pair `(a, b)`.
    pub fn find_named(&self, kind: &Interaction, a: &str, b: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.is_named_on(kind, a, b))
    }

    /// Same terms with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| t.with_coeff(t.coeff * factor))
            .collect();
        HamiltonianExpr {
            system: self.system.clone(),
            terms,
        }
    }

    /// Same operator on a reordered site list.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Ok(HamiltonianExpr {
            system: self.system.permuted(order)?,
            terms: self.terms.clone(),
        })
    }

    /// Sum of the absolute coefficients times operator norms; an upper bound on `||H||`.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.abs() * spectral_radius_bound(&t.op))
            .sum()
    }
}

/// Max absolute row sum, an upper bound on the operator norm.
fn spectral_radius_bound(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|r| m.row(r).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
