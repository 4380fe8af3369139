use serde::Serialize;

use crate::ensemble::LabeledEnsemble;
use crate::entropy::mutual_information;
use crate::error::{QfcError, Result};
use crate::tensor::MultipartiteState;

/// Label of the classical message register in explicit cq-states.
pub const MESSAGE_LABEL: &str = "M";
/// Increase of `S(M:·)` tolerated as numerical noise.
pub const MONOTONICITY_TOL: f64 = 1e-9;

/// Change of `S(M:Bob)` when Bob's holdings shrink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityStep {
    /// `S(M:before) - S(M:after)`; nonnegative up to noise.
    pub slack: f64,
    pub holds: bool,
}

impl MonotonicityStep {
    fn from_values(before: f64, after: f64) -> Self {
        let slack = before - after;
        Self { slack, holds: slack >= -MONOTONICITY_TOL }
    }

    /// Same check on per-branch ensembles (Holevo form of `S(M:·)`).
    pub fn from_ensembles(before: &LabeledEnsemble, after: &LabeledEnsemble) -> Result<Self> {
        if before.probabilities() != after.probabilities() {
            return Err(QfcError::InvalidEnsemble("message distributions differ".into()));
        }
        Ok(Self::from_values(before.holevo_bits(), after.holevo_bits()))
    }
}

/// Compare `S(M:rest)` of two explicit cq-states carrying the label `M`.
pub fn verify_monotonicity_step(before: &MultipartiteState, after: &MultipartiteState) -> Result<MonotonicityStep> {
    let rest = |s: &MultipartiteState| -> Result<Vec<String>> {
        if !s.spec().contains(MESSAGE_LABEL) {
            return Err(QfcError::UnknownLabel(MESSAGE_LABEL.into()));
        }
        Ok(s.spec().labels().filter(|l| *l != MESSAGE_LABEL).map(String::from).collect())
    };
    let rb = rest(before)?;
    let ra = rest(after)?;
    if before.spec().dim_of(MESSAGE_LABEL)? != after.spec().dim_of(MESSAGE_LABEL)? {
        return Err(QfcError::DimensionMismatch("message registers differ".into()));
    }
    let mi = |s: &MultipartiteState, r: &[String]| -> Result<f64> {
        let refs: Vec<&str> = r.iter().map(String::as_str).collect();
        Ok(mutual_information(s, &[MESSAGE_LABEL], &refs)?.bits())
    };
    Ok(MonotonicityStep::from_values(mi(before, &rb)?, mi(after, &ra)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{ComplexMatrix, SubsystemSpec};

    fn classical(p: &[f64], spec: SubsystemSpec) -> MultipartiteState {
        MultipartiteState::new(spec, ComplexMatrix::from_diagonal(p)).unwrap()
    }

    #[test]
    fn uncorrelated_ancilla() {
        // M perfectly correlated with B, ancilla C independent
        let mb = classical(&[0.5, 0.0, 0.0, 0.5], SubsystemSpec::new([("M", 2), ("B", 2)]).unwrap());
        let c = classical(&[0.3, 0.7], SubsystemSpec::single("C", 2));
        let before = mb.tensor_product(&c).unwrap();
        let after = before.partial_trace(&["C"]).unwrap();
        let step = verify_monotonicity_step(&before, &after).unwrap();
        assert!(step.slack.abs() < 1e-10);
        assert!(step.holds);
    }

    #[test]
    fn discarding_correlated_half() {
        // M = (b, c) two classical bits, Bob holds both copies
        let spec = SubsystemSpec::new([("M", 4), ("B", 2), ("C", 2)]).unwrap();
        let mut d = vec![0.0; 16];
        for m in 0..4 {
            d[m * 4 + m] = 0.25;
        }
        let before = classical(&d, spec);
        let after = before.partial_trace(&["C"]).unwrap();
        let step = verify_monotonicity_step(&before, &after).unwrap();
        assert!((step.slack - 1.0).abs() < 1e-12);
        assert!(step.holds);
    }

    #[test]
    fn missing_message_label() {
        let s = classical(&[0.5, 0.5], SubsystemSpec::single("B", 2));
        assert!(verify_monotonicity_step(&s, &s).is_err());
    }
}
