use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{OpError, Result};

/// Largest Hilbert dimension allowed before assembly is refused.
pub const DEFAULT_DIM_CAP: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<Vec<f64>>,
}

impl Site {
    pub fn new(id: impl Into<String>, dim: usize) -> Self {
        Site {
            id: id.into(),
            dim,
            coord: None,
        }
    }

    pub fn at(id: impl Into<String>, dim: usize, coord: Vec<f64>) -> Self {
        Site {
            id: id.into(),
            dim,
            coord: Some(coord),
        }
    }
}

/// An ordered collection of qudits.
#[derive(Clone, Debug)]
pub struct SiteSystem {
    sites: Vec<Site>,
    index: HashMap<String, usize>,
    cap: usize,
}

impl PartialEq for SiteSystem {
    fn eq(&self, other: &Self) -> bool {
        self.sites == other.sites && self.cap == other.cap
    }
}

impl SiteSystem {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        let mut sys = SiteSystem {
            sites: Vec::new(),
            index: HashMap::new(),
            cap: DEFAULT_DIM_CAP,
        };
        for s in sites {
            sys.push(s)?;
        }
        Ok(sys)
    }

    /// `n` qubits named `{prefix}0 .. {prefix}{n-1}`.
    pub fn qubits(prefix: &str, n: usize) -> Self {
        let sites = (0..n)
            .map(|i| Site::new(format!("{prefix}{i}"), 2))
            .collect();
        SiteSystem::new(sites).expect("generated ids are unique")
    }

    /// A `w x h` lattice in row-major order; site `(x, y)` is named `{prefix}{x}_{y}`.
    pub fn lattice(prefix: &str, w: usize, h: usize, dim: usize) -> Result<Self> {
        let mut sites = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                sites.push(Site::at(
                    format!("{prefix}{x}_{y}"),
                    dim,
                    vec![x as f64, y as f64],
                ));
            }
        }
        SiteSystem::new(sites)
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn push(&mut self, site: Site) -> Result<()> {
        if site.dim < 2 {
            return Err(OpError::BadDimension {
                id: site.id,
                dim: site.dim,
            });
        }
        if self.index.contains_key(&site.id) {
            return Err(OpError::DuplicateSite(site.id));
        }
        self.index.insert(site.id.clone(), self.sites.len());
        self.sites.push(site);
        Ok(())
    }

    /// Concatenate two systems; `other`'s sites follow `self`'s.
    pub fn join(&self, other: &SiteSystem) -> Result<Self> {
        let mut out = self.clone();
        for s in &other.sites {
            out.push(s.clone())?;
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, id: &str) -> Option<&Site> {
        self.index.get(id).map(|&i| &self.sites[i])
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| OpError::UnknownSite(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.dim).collect()
    }

    /// Product of local dimensions, exact even when it overflows `usize`.
    pub fn total_dim(&self) -> u128 {
        self.sites
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.dim as u128))
    }

    /// Total dimension, or an error if it exceeds the cap.
    pub fn checked_dim(&self) -> Result<usize> {
        let dim = self.total_dim();
        if dim > self.cap as u128 {
            return Err(OpError::DimensionCap { dim, cap: self.cap });
        }
        Ok(dim as usize)
    }

    /// Stride of each site in the global basis index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.sites.len()];
        for i in (0..self.sites.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1].saturating_mul(self.sites[i + 1].dim);
        }
        strides
    }

    /// Same sites, reordered so that position `i` holds the old site `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let sites = order.iter().map(|&i| self.sites[i].clone()).collect();
        Ok(SiteSystem::new(sites)?.with_cap(self.cap))
    }

    /// A fresh id of the form `m0, m1, ...` not yet present.
    pub fn fresh_id(&self, prefix: &str) -> String {
        (0..)
            .map(|i| format!("{prefix}{i}"))
            .find(|id| !self.contains(id))
            .expect("unbounded search")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sites() {
        assert!(matches!(
            SiteSystem::new(vec![Site::new("a", 2), Site::new("a", 3)]),
            Err(OpError::DuplicateSite(_))
        ));
        assert!(matches!(
            SiteSystem::new(vec![Site::new("a", 1)]),
            Err(OpError::BadDimension { .. })
        ));
    }

    #[test]
    fn lattice_is_row_major() {
        let sys = SiteSystem::lattice("q", 3, 2, 2).unwrap();
        let ids: Vec<_> = sys.sites().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["q0_0", "q1_0", "q2_0", "q0_1", "q1_1", "q2_1"]);
        assert_eq!(sys.strides(), vec![32, 16, 8, 4, 2, 1]);
    }

    #[test]
    fn cap_is_enforced() {
        let sys = SiteSystem::qubits("q", 23);
        assert!(matches!(
            sys.checked_dim(),
            Err(OpError::DimensionCap { .. })
        ));
        assert_eq!(sys.with_cap(1 << 23).checked_dim().unwrap(), 1 << 23);
    }

    #[test]
    fn fresh_ids_skip_taken_names() {
        let sys = SiteSystem::new(vec![Site::new("m0", 2), Site::new("m2", 2)]).unwrap();
        assert_eq!(sys.fresh_id("m"), "m1");
    }
}
