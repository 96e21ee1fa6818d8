use std::collections::HashSet;

use super::{Result, SimError};
use crate::opcore::{Site, SiteSystem};
use crate::{CMatrix, C64};

/// One factor `V_i` of a local isometry.
///
/// Maps target site `target` into the simulator sites `sites` (first site most
/// significant). A block without a target prepares a fixed ancilla state; its
/// map is a single column.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometryBlock {
    pub target: Option<String>,
    pub sites: Vec<String>,
    pub map: CMatrix,
}

impl IsometryBlock {
    pub fn new(target: Option<&str>, sites: &[&str], map: CMatrix) -> Self {
        IsometryBlock {
            target: target.map(str::to_string),
            sites: sites.iter().map(|s| s.to_string()).collect(),
            map,
        }
    }

    /// Identity from a target site onto the simulator site of the same name.
    pub fn identity(site: &Site) -> Self {
        IsometryBlock::new(
            Some(&site.id),
            &[&site.id],
            CMatrix::identity(site.dim, site.dim),
        )
    }

    /// `|x> -> |x> ⊗ |anc>` with the ancilla on `extra` following the target site.
    pub fn with_ancilla(site: &Site, extra: &[&str], anc: &[C64]) -> Self {
        let d = site.dim;
        let a = anc.len();
        let mut map = CMatrix::zeros(d * a, d);
        for x in 0..d {
            for (k, amp) in anc.iter().enumerate() {
                map[(x * a + k, x)] = *amp;
            }
        }
        let mut sites = vec![site.id.as_str()];
        sites.extend_from_slice(extra);
        IsometryBlock::new(Some(&site.id), &sites, map)
    }

    /// A fixed state on `sites`, independent of the target.
    pub fn ancilla(sites: &[&str], state: &[C64]) -> Self {
        IsometryBlock::new(
            None,
            sites,
            CMatrix::from_column_slice(state.len(), 1, state),
        )
    }
}

/// `V = ⊗_i V_i`, mapping a target system into a simulator system.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalIsometry {
    target: SiteSystem,
    blocks: Vec<IsometryBlock>,
}

impl LocalIsometry {
    pub fn new(target: SiteSystem, blocks: Vec<IsometryBlock>) -> Result<Self> {
        let bad = |s: String| Err(SimError::BadIsometry(s));
        let mut seen_targets = HashSet::new();
        let mut seen_sites = HashSet::new();
        for b in &blocks {
            let cols = match &b.target {
                Some(t) => {
                    let Some(site) = target.site(t) else {
                        return bad(format!("unknown target site `{t}`"));
                    };
                    if !seen_targets.insert(t.clone()) {
                        return bad(format!("target site `{t}` mapped twice"));
                    }
                    site.dim
                }
                None => 1,
            };
            if b.map.ncols() != cols {
                return bad(format!(
                    "block for {:?} has {} columns, expected {cols}",
                    b.target,
                    b.map.ncols()
                ));
            }
            for s in &b.sites {
                if !seen_sites.insert(s.clone()) {
                    return bad(format!("simulator site `{s}` used by two blocks"));
                }
            }
            let gram = b.map.adjoint() * &b.map;
            let defect = (gram - CMatrix::identity(cols, cols)).camax();
            if defect > 1e-12 {
                return bad(format!(
                    "block for {:?} is not an isometry (defect {defect:.3e})",
                    b.target
                ));
            }
        }
        if let Some(s) = target
            .sites()
            .iter()
            .find(|s| !seen_targets.contains(&s.id))
        {
            return bad(format!("target site `{}` is not mapped", s.id));
        }
        Ok(LocalIsometry { target, blocks })
    }

    /// Identity isometry of a system onto itself.
    pub fn identity(system: &SiteSystem) -> Self {
        let blocks = system.sites().iter().map(IsometryBlock::identity).collect();
        LocalIsometry {
            target: system.clone(),
            blocks,
        }
    }

    pub fn target(&self) -> &SiteSystem {
        &self.target
    }

    pub fn blocks(&self) -> &[IsometryBlock] {
        &self.blocks
    }

    /// Dense `N x m` matrix of `V` with respect to the simulator's site order.
    pub fn matrix(&self, sim: &SiteSystem) -> Result<CMatrix> {
        let n = sim.checked_dim()?;
        let m = self.target.checked_dim()?;
        let strides = sim.strides();
        let covered: usize = self.blocks.iter().map(|b| b.sites.len()).sum();
        if covered != sim.len() {
            return Err(SimError::BadIsometry(format!(
                "blocks cover {covered} of {} simulator sites",
                sim.len()
            )));
        }
        // Per block: global offset of each local row index.
        let mut offsets = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let mut pos = Vec::new();
            for s in &b.sites {
                let i = sim.index_of(s)?;
                pos.push((strides[i], sim.sites()[i].dim));
            }
            let local: usize = pos.iter().map(|p| p.1).product();
            if local != b.map.nrows() {
                return Err(SimError::BadIsometry(format!(
                    "block for {:?} has {} rows, simulator sites need {local}",
                    b.target,
                    b.map.nrows()
                )));
            }
            offsets.push(
                (0..local)
                    .map(|mut l| {
                        let mut off = 0;
                        for &(stride, d) in pos.iter().rev() {
                            off += (l % d) * stride;
                            l /= d;
                        }
                        off
                    })
                    .collect::<Vec<_>>(),
            );
        }
        let tstrides = self.target.strides();
        let tindex: Vec<Option<(usize, usize)>> = self
            .blocks
            .iter()
            .map(|b| {
                b.target.as_ref().map(|t| {
                    let i = self.target.index_of(t).expect("checked in new");
                    (tstrides[i], self.target.sites()[i].dim)
                })
            })
            .collect();
        let mut out = CMatrix::zeros(n, m);
        for col in 0..m {
            let mut amps = vec![(0usize, C64::new(1.0, 0.0))];
            for (bi, b) in self.blocks.iter().enumerate() {
                let c = tindex[bi].map_or(0, |(stride, d)| (col / stride) % d);
                let mut next = Vec::new();
                for (r, off) in offsets[bi].iter().enumerate() {
                    let v = b.map[(r, c)];
                    if v != C64::new(0.0, 0.0) {
                        next.extend(amps.iter().map(|&(idx, a)| (idx + off, a * v)));
                    }
                }
                amps = next;
            }
            for (idx, a) in amps {
                out[(idx, col)] += a;
            }
        }
        Ok(out)
    }
}
