use crate::channels::DensityMatrix;
use crate::error::{Error, Result};
use crate::mat::{c, CMatrix};

pub const PRIORITY_SUM_TOL: f64 = 1e-12;

/// Ordered list of states with priorities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSequence {
    items: Vec<(f64, DensityMatrix)>,
}

impl WeightedSequence {
    pub fn new(items: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Invalid("sequence must contain at least one state".into()));
        }
        let d = items[0].1.dim();
        let mut total = 0.0;
        for (i, (p, s)) in items.iter().enumerate() {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::Invalid(format!("priority {i} = {p} outside (0, 1]")));
            }
            if s.dim() != d {
                return Err(Error::Dimension(format!("state {i} has dimension {}, expected {d}", s.dim())));
            }
            total += p;
        }
        if (total - 1.0).abs() > PRIORITY_SUM_TOL {
            return Err(Error::Invalid(format!("priorities sum to {total}")));
        }
        Ok(WeightedSequence { items })
    }

    /// Equal priorities `1/I`.
    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len() as f64;
        Self::new(states.into_iter().map(|s| (1.0 / n, s)).collect())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.items[0].1.dim()
    }

    pub fn items(&self) -> &[(f64, DensityMatrix)] {
        &self.items
    }

    pub fn priorities(&self) -> Vec<f64> {
        self.items.iter().map(|(p, _)| *p).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = &DensityMatrix> {
        self.items.iter().map(|(_, s)| s)
    }

    /// Block-diagonal matrix `⊕ π_i ρ_i`.
    pub fn direct_sum(&self) -> CMatrix {
        direct_sum(self.items.iter().map(|(p, s)| (*p, s.matrix())))
    }

    /// Check that two sequences have equal length, dimension and priorities.
    pub fn check_compatible(&self, other: &WeightedSequence) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!("sequence lengths {} and {}", self.len(), other.len())));
        }
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("state dimensions {} and {}", self.dim(), other.dim())));
        }
        for (i, ((p, _), (q, _))) in self.items.iter().zip(&other.items).enumerate() {
            if (p - q).abs() > PRIORITY_SUM_TOL {
                return Err(Error::Invalid(format!("priority {i} differs: {p} vs {q}")));
            }
        }
        Ok(())
    }
}

/// Block-diagonal matrix of weighted blocks.
pub fn direct_sum<'a>(blocks: impl IntoIterator<Item = (f64, &'a CMatrix)>) -> CMatrix {
    let blocks: Vec<(f64, &CMatrix)> = blocks.into_iter().collect();
    let n: usize = blocks.iter().map(|(_, m)| m.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut off = 0;
    for (w, m) in blocks {
        let k = m.nrows();
        out.view_mut((off, off), (k, k)).copy_from(&(m * c(w, 0.0)));
        off += k;
    }
    out
}

