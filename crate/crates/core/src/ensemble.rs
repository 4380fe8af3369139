use crate::entropy::{entropy_unchecked, shannon_bits};
use crate::error::{QfcError, Result};
use crate::tensor::{check_dimension_cap, ComplexMatrix, MultipartiteState, SubsystemSpec, ZERO};

/// Tolerance on `Σ p_i = 1`.
pub const PROBABILITY_TOL: f64 = 1e-10;

/// Message distribution `p_i` with one branch state `ρ^i` per message, all on
/// the same subsystems. Stands for the classical-quantum state
/// `Σ p_i |i⟩⟨i|_M ⊗ ρ^i` without materializing the block matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEnsemble {
    probabilities: Vec<f64>,
    branches: Vec<MultipartiteState>,
}

impl LabeledEnsemble {
    pub fn new(probabilities: Vec<f64>, branches: Vec<MultipartiteState>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(QfcError::InvalidEnsemble("no messages".into()));
        }
        if probabilities.len() != branches.len() {
            return Err(QfcError::InvalidEnsemble(format!(
                "{} probabilities for {} branches",
                probabilities.len(),
                branches.len()
            )));
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(QfcError::InvalidEnsemble("negative or non-finite probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(QfcError::InvalidEnsemble(format!("probabilities sum to {total}")));
        }
        let spec = branches[0].spec();
        if let Some(bad) = branches.iter().find(|b| b.spec() != spec) {
            return Err(QfcError::DimensionMismatch(format!(
                "branch spec {} differs from {}",
                bad.spec(),
                spec
            )));
        }
        Ok(Self { probabilities, branches })
    }

    /// Uniform distribution over `branches`.
    pub fn uniform(branches: Vec<MultipartiteState>) -> Result<Self> {
        let n = branches.len().max(1);
        Self::new(vec![1.0 / n as f64; branches.len()], branches)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn branches(&self) -> &[MultipartiteState] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn spec(&self) -> &SubsystemSpec {
        self.branches[0].spec()
    }

    pub fn branch_dim(&self) -> usize {
        self.branches[0].dim()
    }

    /// `Σ p_i ρ^i`.
    pub fn average(&self) -> MultipartiteState {
        let refs: Vec<&MultipartiteState> = self.branches.iter().collect();
        MultipartiteState::mixture(&self.probabilities, &refs).expect("branches share a spec")
    }

    /// Shannon entropy of the message distribution.
    pub fn message_entropy(&self) -> f64 {
        shannon_bits(self.probabilities.iter().copied())
    }

    /// `S(Σ p_i ρ^i) - Σ p_i S(ρ^i)`, i.e. `S(M:rest)` of the cq-state.
    pub(crate) fn holevo_bits(&self) -> f64 {
        let avg = entropy_unchecked(self.average().matrix());
        let mean: f64 = self
            .probabilities
            .iter()
            .zip(&self.branches)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, b)| p * entropy_unchecked(b.matrix()))
            .sum();
        avg - mean
    }

    /// Ensemble of the branch marginals on `keep`.
    pub fn reduce_to(&self, keep: &[&str]) -> Result<Self> {
        let branches = self.branches.iter().map(|b| b.reduce_to(keep)).collect::<Result<Vec<_>>>()?;
        Ok(Self { probabilities: self.probabilities.clone(), branches })
    }

    /// Apply `f` to every branch; the results must again share a spec.
    pub fn map_branches<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&MultipartiteState) -> Result<MultipartiteState>,
    {
        let branches = self.branches.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.probabilities.clone(), branches)
    }

    /// Block-diagonal `Σ p_i |i⟩⟨i|_M ⊗ ρ^i`, with `M` as the first factor.
    pub fn assemble_cq_state(&self, message_label: &str) -> Result<MultipartiteState> {
        let m = self.len();
        let d = self.branch_dim();
        let spec = SubsystemSpec::single(message_label, m).concat(self.spec())?;
        check_dimension_cap("cq-state", spec.total_dim())?;
        let n = m * d;
        let mut data = vec![ZERO; n * n];
        for (i, (p, b)) in self.probabilities.iter().zip(&self.branches).enumerate() {
            let src = b.matrix().as_slice();
            for r in 0..d {
                for c in 0..d {
                    data[(i * d + r) * n + i * d + c] = src[r * d + c] * *p;
                }
            }
        }
        Ok(MultipartiteState::from_parts_unchecked(spec, ComplexMatrix::from_vec_unchecked(n, n, data)))
    }
}
