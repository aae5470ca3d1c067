use std::collections::HashSet;

use crate::error::{Error, Result};

/// Composite space of truncated modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSpace {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl ModeSpace {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.is_empty() {
            return Err(Error::InvalidSpace("at least one mode is required".into()));
        }
        if dims.len() != labels.len() {
            return Err(Error::InvalidSpace(format!("{} dims but {} labels", dims.len(), labels.len())));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("mode dimension {d} < 2")));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate label {l:?}")));
            }
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidSpace("dimension product overflows".into()))?;
        Ok(Self { dims, labels })
    }

    /// Space with labels `m0, m1, ...`.
    pub fn from_dims(dims: &[usize]) -> Result<Self> {
        let labels = (0..dims.len()).map(|i| format!("m{i}")).collect();
        Self::new(dims.to_vec(), labels)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.dims.len() {
            Ok(())
        } else {
            Err(Error::ModeIndex { index: mode, modes: self.dims.len() })
        }
    }

    /// Distance between consecutive levels of `mode` in the composite index.
    pub fn stride(&self, mode: usize) -> usize {
        self.dims[mode + 1..].iter().product()
    }

    /// Occupation of `mode` in composite basis state `index`.
    #[inline]
    pub fn level(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.dims[mode]
    }

    /// Composite index of the product basis state with the given levels.
    pub fn basis_index(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), actual: levels.len() });
        }
        let mut idx = 0;
        for (m, (&n, &d)) in levels.iter().zip(&self.dims).enumerate() {
            if n >= d {
                return Err(Error::InvalidParameter(format!("level {n} out of range for mode {m} (dim {d})")));
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Levels of every mode for composite index `index`.
    pub fn levels(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|m| self.level(index, m)).collect()
    }
}
