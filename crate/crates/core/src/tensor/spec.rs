use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QfcError, Result};

/// Ordered list of labeled tensor factors. The first factor is the most
/// significant index (big-endian).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemSpec {
    factors: Vec<(String, usize)>,
}

impl SubsystemSpec {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> = factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        let mut seen = HashSet::new();
        for (label, dim) in &factors {
            if *dim == 0 {
                return Err(QfcError::DimensionMismatch(format!("subsystem `{label}` has dimension 0")));
            }
            if !seen.insert(label.as_str()) {
                return Err(QfcError::LabelCollision(label.clone()));
            }
        }
        Ok(Self { factors })
    }

    pub fn single(label: &str, dim: usize) -> Self {
        assert!(dim > 0, "subsystem dimension must be positive");
        Self { factors: vec![(label.to_string(), dim)] }
    }

    /// The spec of a 1x1 state with no subsystems.
    pub fn empty() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|(_, d)| *d).collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(l, _)| l.as_str())
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|(l, _)| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|p| self.factors[p].1)
            .ok_or_else(|| QfcError::UnknownLabel(label.to_string()))
    }

    /// Positions of `labels`, in the order given. Errors on unknown or repeated labels.
    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        labels
            .iter()
            .map(|l| {
                if !seen.insert(*l) {
                    return Err(QfcError::LabelCollision(l.to_string()));
                }
                self.position(l).ok_or_else(|| QfcError::UnknownLabel(l.to_string()))
            })
            .collect()
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(self.factors.iter().chain(&other.factors).cloned())
    }

    /// Sub-spec made of the factors at `positions`, in that order.
    pub fn select(&self, positions: &[usize]) -> Self {
        Self { factors: positions.iter().map(|&p| self.factors[p].clone()).collect() }
    }

    /// Replace the dimension of one factor.
    pub fn with_dim(&self, label: &str, dim: usize) -> Result<Self> {
        let p = self.position(label).ok_or_else(|| QfcError::UnknownLabel(label.to_string()))?;
        let mut out = self.clone();
        out.factors[p].1 = dim;
        Ok(out)
    }
}

impl fmt::Display for SubsystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (l, d)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}:{d}")?;
        }
        write!(f, "}}")
    }
}

/// Index table splitting a composite index into (kept, traced) parts.
///
/// `table[t * kept_dim + k]` is the full index whose kept digits encode `k`
/// and traced digits encode `t`, both big-endian in the original order.
pub(crate) struct IndexSplit {
    pub kept_dim: usize,
    pub traced_dim: usize,
    pub table: Vec<usize>,
}

impl IndexSplit {
    /// `keep` lists positions to keep, in output order.
    pub fn new(dims: &[usize], keep: &[usize]) -> Self {
        let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
        let kept_dim: usize = keep.iter().map(|&p| dims[p]).product();
        let traced_dim: usize = traced.iter().map(|&p| dims[p]).product();
        let total: usize = dims.iter().product();

        let mut strides = vec![1usize; dims.len()];
        for p in (0..dims.len().saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * dims[p + 1];
        }
        let mut table = vec![0usize; total];
        let mut digits = vec![0usize; dims.len()];
        for full in 0..total {
            let mut rem = full;
            for p in 0..dims.len() {
                digits[p] = rem / strides[p];
                rem %= strides[p];
            }
            let k = keep.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            let t = traced.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            table[t * kept_dim + k] = full;
        }
        Self { kept_dim, traced_dim, table }
    }
}
