use crate::channels::{weyl_operators, QuantumChannel};
use crate::ensemble::LabeledEnsemble;
use crate::entropy::{entropy_unchecked, EntropyValue, IDENTITY_TOL};
use crate::error::{QfcError, Result};
use crate::par::{map_indexed, sub_seed, Execution};
use crate::tensor::random::{random_simplex, random_state_with, rng_from_seed};
use crate::tensor::{maximally_entangled, MultipartiteState, SubsystemSpec};

use rand::Rng;

/// Label of the channel-input half of a Δ ensemble.
pub const SENT: &str = "A";
/// Label of the side system kept by the sender's partner.
pub const SIDE: &str = "B";

fn mean_entropy(ens: &LabeledEnsemble) -> f64 {
    ens.probabilities()
        .iter()
        .zip(ens.branches())
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, b)| p * entropy_unchecked(b.matrix()))
        .sum()
}

/// `S(M:A|B)` of `Σ p_i |i⟩⟨i| ⊗ (Λ_A ⊗ I_B) ρ^i_AB`.
///
/// Computed from joint entropies `S(MB) + S(AB) - S(B) - S(MAB)` and checked
/// against `S(M:AB) - S(M:B)`.
pub fn delta_conditional_mi(ch: &QuantumChannel, ens: &LabeledEnsemble) -> Result<EntropyValue> {
    let spec = ens.spec();
    if spec.len() != 2 || !spec.contains(SENT) || !spec.contains(SIDE) {
        return Err(QfcError::DimensionMismatch(format!(
            "Δ ensembles live on {{{SENT}, {SIDE}}}, got {spec}"
        )));
    }
    let sent = ens.map_branches(|b| ch.apply_to_subsystem(b, SENT))?;
    let side = sent.reduce_to(&[SIDE])?;

    let h = ens.message_entropy();
    let s_mab = h + mean_entropy(&sent);
    let s_mb = h + mean_entropy(&side);
    let s_ab = entropy_unchecked(sent.average().matrix());
    let s_b = entropy_unchecked(side.average().matrix());
    let value = s_mb + s_ab - s_b - s_mab;

    let chained = sent.holevo_bits() - side.holevo_bits();
    if (value - chained).abs() > IDENTITY_TOL {
        return Err(QfcError::Consistency(format!(
            "S(M:A|B) = {value} but S(M:AB) - S(M:B) = {chained}"
        )));
    }
    Ok(EntropyValue(value))
}

/// Uniform ensemble of `(W ⊗ I)|Φ⁺⟩` over the `d²` Weyl operators `W` acting on
/// `A` of a maximally entangled `A:B` pair.
pub fn dense_coding_ensemble(d: usize) -> Result<LabeledEnsemble> {
    let phi = maximally_entangled(SENT, SIDE, d);
    let branches = weyl_operators(d)
        .iter()
        .map(|w| phi.apply_unitary(&[SENT], w)?.density().permute_subsystems(&[SENT, SIDE]))
        .collect::<Result<Vec<_>>>()?;
    LabeledEnsemble::uniform(branches)
}

/// Random ensemble on `{A: d_a, B: d_b}` with 2..=4 messages, random
/// probabilities and random mixed branch states of random rank.
pub fn random_delta_ensemble<R: Rng + ?Sized>(d_a: usize, d_b: usize, rng: &mut R) -> Result<LabeledEnsemble> {
    let spec = SubsystemSpec::new([(SENT, d_a), (SIDE, d_b)])?;
    let n = rng.random_range(2..=4usize);
    let probs = random_simplex(n, rng);
    let d = spec.total_dim();
    let branches = (0..n)
        .map(|_| {
            let rank = rng.random_range(1..=d);
            random_state_with(spec.clone(), rank, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledEnsemble::new(probs, branches)
}

#[derive(Debug, Clone)]
pub struct DeltaSearchResult {
    /// Best `S(M:A|B)` found.
    pub value: EntropyValue,
    pub best: LabeledEnsemble,
    /// Value of the dense-coding ansatz (only when `d_B == d_in`).
    pub ansatz_value: Option<f64>,
    /// Best value among the random ensembles.
    pub random_best: f64,
    /// Every random-trial value, in trial order.
    pub trial_values: Vec<f64>,
}

/// Largest `S(M:A|B)` over `trials` random ensembles plus the dense-coding
/// ansatz. Trial `t` is drawn from `sub_seed(seed, t)`.
pub fn max_delta_search(
    ch: &QuantumChannel,
    trials: usize,
    seed: u64,
    d_b: usize,
    exec: Execution,
) -> Result<DeltaSearchResult> {
    if trials == 0 {
        return Err(QfcError::ParameterOutOfRange("trials must be at least 1".into()));
    }
    let d_a = ch.d_in();
    let runs = map_indexed(exec, trials, |t| -> Result<(f64, LabeledEnsemble)> {
        let mut rng = rng_from_seed(sub_seed(seed, t as u64));
        let ens = random_delta_ensemble(d_a, d_b, &mut rng)?;
        Ok((delta_conditional_mi(ch, &ens)?.bits(), ens))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let trial_values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (mut best_value, mut best) = runs
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("trials >= 1");
    let random_best = best_value;

    let ansatz_value = if d_b == d_a {
        let ens = dense_coding_ensemble(d_a)?;
        let v = delta_conditional_mi(ch, &ens)?.bits();
        if v > best_value {
            best_value = v;
            best = ens;
        }
        Some(v)
    } else {
        None
    };
    Ok(DeltaSearchResult { value: EntropyValue(best_value), best, ansatz_value, random_best, trial_values })
}

/// Ensemble whose branches are all the same state: carries no message.
pub fn constant_ensemble(state: MultipartiteState, messages: usize) -> Result<LabeledEnsemble> {
    LabeledEnsemble::uniform(vec![state; messages])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing, identity, qubit_erasure};
    use crate::tensor::PureState;

    fn orthogonal_pure_branches(n: usize) -> LabeledEnsemble {
        let spec = SubsystemSpec::new([(SENT, n), (SIDE, 1)]).unwrap();
        let branches = (0..n).map(|i| PureState::basis(spec.clone(), i).unwrap().density()).collect();
        LabeledEnsemble::uniform(branches).unwrap()
    }

    #[test]
    fn identity_with_trivial_side_system() {
        for n in [2usize, 3, 4] {
            let ens = orthogonal_pure_branches(n);
            let v = delta_conditional_mi(&identity(n).unwrap(), &ens).unwrap().bits();
            assert!((v - (n as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_branches_give_zero() {
        let mut rng = rng_from_seed(1);
        let spec = SubsystemSpec::new([(SENT, 2), (SIDE, 2)]).unwrap();
        let s = random_state_with(spec, 3, &mut rng).unwrap();
        let ens = constant_ensemble(s, 3).unwrap();
        let v = delta_conditional_mi(&qubit_erasure(0.3).unwrap(), &ens).unwrap().bits();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn dense_coding_through_erasure() {
        let ens = dense_coding_ensemble(2).unwrap();
        let v = delta_conditional_mi(&qubit_erasure(0.5).unwrap(), &ens).unwrap().bits();
        assert!((v - 1.0).abs() < 1e-12);
        let v = delta_conditional_mi(&identity(2).unwrap(), &ens).unwrap().bits();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn search_examples() {
        let r = max_delta_search(&identity(2).unwrap(), 20, 0, 2, Execution::Parallel).unwrap();
        assert!((r.value.bits() - 2.0).abs() < 1e-9);
        let r = max_delta_search(&qubit_erasure(0.5).unwrap(), 20, 0, 2, Execution::Parallel).unwrap();
        assert!((r.value.bits() - 1.0).abs() < 1e-6);
        let r = max_delta_search(&depolarizing(0.25).unwrap(), 20, 0, 2, Execution::Parallel).unwrap();
        assert!(r.value.bits().abs() < 1e-6);
    }

    #[test]
    fn rejects_wrong_labels() {
        let ens = LabeledEnsemble::uniform(vec![MultipartiteState::maximally_mixed(SubsystemSpec::single("Q", 2))]).unwrap();
        assert!(delta_conditional_mi(&identity(2).unwrap(), &ens).is_err());
    }
}
