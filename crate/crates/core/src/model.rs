//! Model identifiers: a subset of the candidate covariates plus the implicit intercept.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of candidate covariates a [`ModelSpec`] can address.
pub const MAX_COVARIATES: usize = 63;

/// A model as a bitmask over the candidate covariates.
///
/// Bit `j` (0-based) set means covariate `j + 1` is included. The intercept
/// is always present and is not stored, so the null (reference) model is
/// the empty mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ModelSpec(u64);

impl ModelSpec {
    pub const NULL: ModelSpec = ModelSpec(0);

    pub fn from_mask(mask: u64) -> Self {
        ModelSpec(mask)
    }

    /// Builds a model from 1-based covariate indices.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut mask = 0u64;
        for j in indices {
            if j == 0 || j > MAX_COVARIATES {
                return Err(Error::InvalidModel(format!(
                    "covariate index {j} outside 1..={MAX_COVARIATES}"
                )));
            }
            mask |= 1 << (j - 1);
        }
        Ok(ModelSpec(mask))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    /// 1-based covariate indices in ascending order.
    pub fn indices(self) -> Vec<usize> {
        (0..64)
            .filter(|b| self.0 >> b & 1 == 1)
            .map(|b| b + 1)
            .collect()
    }

    pub fn contains(self, j: usize) -> bool {
        (1..=64).contains(&j) && self.0 >> (j - 1) & 1 == 1
    }

    /// Number of included covariates (intercept excluded).
    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Columns of the model design, intercept counted.
    pub fn dim(self) -> usize {
        self.size() + 1
    }

    pub fn is_null(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: ModelSpec) -> bool {
        self.0 & !other.0 == 0
    }

    /// Largest covariate index referenced, 0 for the null model.
    pub fn max_index(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn with(self, j: usize) -> Result<Self> {
        Ok(ModelSpec(self.0 | ModelSpec::from_indices([j])?.0))
    }

    pub fn without(self, j: usize) -> Result<Self> {
        Ok(ModelSpec(self.0 & !ModelSpec::from_indices([j])?.0))
    }

    /// MAP tie-break order: fewer covariates first, then lexicographic on the
    /// ascending index lists.
    pub fn parsimony_cmp(self, other: ModelSpec) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.indices().cmp(&other.indices()))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().iter().map(|j| j.to_string()).collect();
        write!(f, "{{{}}}", idx.join(","))
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// Accepts `3,4,5`, `{3,4,5}`, `{}` or an empty string.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        let mut idx = Vec::new();
        for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let j: usize = tok.parse().map_err(|_| {
                Error::InvalidModel(format!("cannot parse covariate index '{tok}'"))
            })?;
            idx.push(j);
        }
        ModelSpec::from_indices(idx)
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let idx = Vec::<usize>::deserialize(d)?;
        ModelSpec::from_indices(idx).map_err(serde::de::Error::custom)
    }
}
