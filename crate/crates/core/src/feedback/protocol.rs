use serde::Serialize;

use crate::channels::QuantumChannel;
use crate::ensemble::LabeledEnsemble;
use crate::entropy::entropy_unchecked;
use crate::error::{QfcError, Result};
use crate::par::{map_indexed, sub_seed, Execution};
use crate::tensor::random::{haar_unitary_with, random_pure_with, random_simplex, rng_from_seed};
use crate::tensor::{dimension_cap, maximally_entangled, ComplexMatrix, PureState, SubsystemSpec, C64};

use super::monotonicity::MonotonicityStep;

/// Largest `‖U†U - I‖_max` accepted for protocol unitaries.
pub const UNITARITY_TOL: f64 = 1e-10;

fn q(k: usize) -> String {
    format!("Q{k}")
}
fn x(k: usize) -> String {
    format!("X{k}")
}
fn y(k: usize) -> String {
    format!("Y{k}")
}
fn z(k: usize) -> String {
    format!("Z{k}")
}
fn e(k: usize) -> String {
    format!("E{k}")
}

/// Per-round register dimensions. `shared` is the dimension of the
/// entangled pair `Z0:Y0` Alice and Bob hold before the first round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeedbackDims {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub shared: usize,
}

impl Default for FeedbackDims {
    fn default() -> Self {
        Self { x: 2, y: 2, z: 2, shared: 1 }
    }
}

/// Message distribution and the message-independent pure state on `[Z0, Y0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub probabilities: Vec<f64>,
    pub shared: PureState,
}

impl InitialState {
    /// Uniform messages and a maximally entangled `Z0:Y0` pair.
    pub fn uniform(messages: usize, shared_dim: usize) -> Self {
        Self {
            probabilities: vec![1.0 / messages.max(1) as f64; messages],
            shared: maximally_entangled(&z(0), &y(0), shared_dim),
        }
    }
}

/// An n-round protocol over a fixed channel.
///
/// `alice[k][i]` is round `k+1`'s unitary for message `i`, acting on
/// `[Q_k, X_1..X_{k-1}, Z_0..Z_k]`. `bob[k]` acts on
/// `[Q_1..Q_k, X_k, Y_0..Y_k]` and has no message index.
#[derive(Debug, Clone)]
pub struct FeedbackProtocol {
    channel: QuantumChannel,
    dims: FeedbackDims,
    initial: InitialState,
    alice: Vec<Vec<ComplexMatrix>>,
    bob: Vec<ComplexMatrix>,
}

/// Product of all party register dimensions after `rounds` rounds.
pub fn tracked_dimension(channel: &QuantumChannel, dims: FeedbackDims, rounds: usize) -> usize {
    let per_round = channel.d_in().max(channel.d_out()) * dims.x * dims.y * dims.z;
    (0..rounds).fold(dims.shared * dims.shared, |acc, _| acc.saturating_mul(per_round))
}

/// Fails with `DimensionBudget` when [`tracked_dimension`] exceeds the cap.
pub fn check_budget(channel: &QuantumChannel, dims: FeedbackDims, rounds: usize) -> Result<()> {
    let total = tracked_dimension(channel, dims, rounds);
    let cap = dimension_cap();
    if total > cap {
        return Err(QfcError::DimensionBudget {
            what: format!("{rounds}-round protocol registers (shared² · Π max(d_in, d_out)·d_X·d_Y·d_Z)"),
            dim: total,
            cap,
        });
    }
    Ok(())
}

fn alice_dim(channel: &QuantumChannel, dims: FeedbackDims, round: usize) -> usize {
    channel.d_in() * dims.x.pow(round as u32 - 1) * dims.shared * dims.z.pow(round as u32)
}

fn bob_dim(channel: &QuantumChannel, dims: FeedbackDims, round: usize) -> usize {
    channel.d_out().pow(round as u32) * dims.x * dims.shared * dims.y.pow(round as u32)
}

impl FeedbackProtocol {
    pub fn new(
        channel: QuantumChannel,
        dims: FeedbackDims,
        initial: InitialState,
        alice: Vec<Vec<ComplexMatrix>>,
        bob: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if [dims.x, dims.y, dims.z, dims.shared].contains(&0) {
            return Err(QfcError::ParameterOutOfRange("register dimensions must be positive".into()));
        }
        let rounds = bob.len();
        if alice.len() != rounds {
            return Err(QfcError::DimensionMismatch(format!(
                "{} rounds of Alice unitaries, {rounds} of Bob unitaries",
                alice.len()
            )));
        }
        check_budget(&channel, dims, rounds)?;
        let expected = SubsystemSpec::new([(z(0), dims.shared), (y(0), dims.shared)])?;
        if initial.shared.spec() != &expected {
            return Err(QfcError::DimensionMismatch(format!(
                "shared state lives on {}, expected {expected}",
                initial.shared.spec()
            )));
        }
        let messages = initial.probabilities.len();
        LabeledEnsemble::new(
            initial.probabilities.clone(),
            vec![initial.shared.density(); messages],
        )?;
        for (k, (per_message, u)) in alice.iter().zip(&bob).enumerate() {
            let round = k + 1;
            if per_message.len() != messages {
                return Err(QfcError::DimensionMismatch(format!(
                    "round {round}: {} Alice unitaries for {messages} messages",
                    per_message.len()
                )));
            }
            let da = alice_dim(&channel, dims, round);
            let db = bob_dim(&channel, dims, round);
            let all = per_message.iter().map(|v| (v, da)).chain(std::iter::once((u, db)));
            for (v, d) in all {
                if v.rows() != d || v.cols() != d {
                    return Err(QfcError::DimensionMismatch(format!(
                        "round {round}: unitary is {}x{}, expected {d}x{d}",
                        v.rows(),
                        v.cols()
                    )));
                }
                let err = v.unitarity_error();
                if err > UNITARITY_TOL {
                    return Err(QfcError::NotUnitary(err));
                }
            }
        }
        Ok(Self { channel, dims, initial, alice, bob })
    }

    /// Haar-random unitaries for every party and round, random message
    /// probabilities and a random shared pure state. The initial state draws
    /// from `sub_seed(seed, 0)` and round `k` from `sub_seed(seed, k)`.
    pub fn random(
        channel: QuantumChannel,
        rounds: usize,
        dims: FeedbackDims,
        messages: usize,
        seed: u64,
    ) -> Result<Self> {
        if messages == 0 {
            return Err(QfcError::ParameterOutOfRange("at least one message".into()));
        }
        check_budget(&channel, dims, rounds)?;
        let mut rng = rng_from_seed(sub_seed(seed, 0));
        let probabilities = random_simplex(messages, &mut rng);
        let spec = SubsystemSpec::new([(z(0), dims.shared), (y(0), dims.shared)])?;
        let shared = random_pure_with(spec, &mut rng);
        let mut alice = Vec::with_capacity(rounds);
        let mut bob = Vec::with_capacity(rounds);
        for round in 1..=rounds {
            let mut rng = rng_from_seed(sub_seed(seed, round as u64));
            let da = alice_dim(&channel, dims, round);
            alice.push((0..messages).map(|_| haar_unitary_with(da, &mut rng)).collect());
            bob.push(haar_unitary_with(bob_dim(&channel, dims, round), &mut rng));
        }
        Self::new(channel, dims, InitialState { probabilities, shared }, alice, bob)
    }

    /// Same protocol with every Alice unitary replaced by message 0's, so the
    /// message never reaches the registers.
    pub fn without_encoding(&self) -> Self {
        let mut out = self.clone();
        for per_message in &mut out.alice {
            let first = per_message[0].clone();
            per_message.iter_mut().for_each(|v| *v = first.clone());
        }
        out
    }

    pub fn rounds(&self) -> usize {
        self.bob.len()
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn dims(&self) -> FeedbackDims {
        self.dims
    }

    pub fn messages(&self) -> usize {
        self.initial.probabilities.len()
    }

    pub fn initial(&self) -> &InitialState {
        &self.initial
    }

    /// Labels of Alice's round-`round` targets.
    pub fn alice_targets(round: usize) -> Vec<String> {
        let mut t = vec![q(round)];
        t.extend((1..round).map(x));
        t.extend((0..=round).map(z));
        t
    }

    /// Labels of Bob's round-`round` targets.
    pub fn bob_targets(round: usize) -> Vec<String> {
        let mut t: Vec<String> = (1..=round).map(q).collect();
        t.push(x(round));
        t.extend((0..=round).map(y));
        t
    }

    /// Spec of Bob's round-`round` targets, in target order.
    pub fn bob_space(&self, round: usize) -> SubsystemSpec {
        let mut f: Vec<(String, usize)> = (1..=round).map(|k| (q(k), self.channel.d_out())).collect();
        f.push((x(round), self.dims.x));
        f.push((y(0), self.dims.shared));
        f.extend((1..=round).map(|k| (y(k), self.dims.y)));
        SubsystemSpec::new(f).expect("distinct labels")
    }

    /// Spec of Alice's round-`round` targets, in target order.
    pub fn alice_space(&self, round: usize) -> SubsystemSpec {
        let mut f = vec![(q(round), self.channel.d_in())];
        f.extend((1..round).map(|k| (x(k), self.dims.x)));
        f.push((z(0), self.dims.shared));
        f.extend((1..=round).map(|k| (z(k), self.dims.z)));
        SubsystemSpec::new(f).expect("distinct labels")
    }
}

/// What one round leaves behind. Entropic quantities are in bits and refer
/// to the message correlations of Bob's holdings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// `S(M:Q_k | Q^(k-1) Y^(k-1))`.
    pub conditional: f64,
    /// `S(M:Q^(k) X_k Y^(k))`, before `X_k` is returned to Alice.
    pub mi_with_feedback_register: f64,
    /// `S(M:Q^(k) Y^(k))`.
    pub mi: f64,
    pub monotonicity: MonotonicityStep,
    /// `Σ_{j≤k} conditional_j - mi_k`.
    pub bound_slack: f64,
    /// `Σ_i p_i S(Q^(k) Y^(k))_i`: entanglement between Bob and everyone else.
    pub bob_entropy: f64,
    /// Message distribution carried through the round.
    pub message_marginal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolTrajectory {
    pub rounds: usize,
    pub mi_per_round: Vec<f64>,
    pub conditional_terms: Vec<f64>,
    pub bound_slack: Vec<f64>,
    #[serde(skip)]
    pub records: Vec<RoundRecord>,
    #[serde(skip)]
    pub initial_marginal: Vec<f64>,
}

impl ProtocolTrajectory {
    /// `S(M:Q^(n) Y^(n))`, zero for an empty protocol.
    pub fn total_mi(&self) -> f64 {
        self.mi_per_round.last().copied().unwrap_or(0.0)
    }

    pub fn conditional_sum(&self) -> f64 {
        self.conditional_terms.iter().sum()
    }

    /// Every round satisfies the conditional-term bound and the monotonicity
    /// step within `tol`.
    pub fn lemma_bound_holds(&self, tol: f64) -> bool {
        self.records
            .iter()
            .all(|r| r.bound_slack >= -tol && r.monotonicity.slack >= -tol)
    }

    /// Message marginal is bit-identical across all rounds.
    pub fn message_invariant(&self) -> bool {
        self.records.iter().all(|r| r.message_marginal == self.initial_marginal)
    }

    /// `total_mi ≤ n · delta_max + tol`.
    pub fn within_rounds_times(&self, delta_max: f64, tol: f64) -> bool {
        self.total_mi() <= self.rounds as f64 * delta_max + tol
    }
}

struct Branches {
    probabilities: Vec<f64>,
    states: Vec<PureState>,
}

impl Branches {
    fn map(&mut self, f: impl Fn(usize, &PureState) -> Result<PureState>) -> Result<()> {
        let next = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| f(i, s))
            .collect::<Result<Vec<_>>>()?;
        self.states = next;
        Ok(())
    }

    fn holdings(&self, labels: &[String]) -> Result<LabeledEnsemble> {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let reduced = self.states.iter().map(|s| s.reduce_to(&refs)).collect::<Result<Vec<_>>>()?;
        LabeledEnsemble::new(self.probabilities.clone(), reduced)
    }
}

fn mean_entropy(ens: &LabeledEnsemble) -> f64 {
    ens.probabilities()
        .iter()
        .zip(ens.branches())
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, b)| p * entropy_unchecked(b.matrix()))
        .sum()
}

fn as_refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

/// Run the protocol on every message branch and record the per-round
/// message correlations of Bob's holdings.
pub fn simulate_feedback_protocol(p: &FeedbackProtocol) -> Result<ProtocolTrajectory> {
    let n = p.rounds();
    let iso = p.channel.stinespring();
    let (d_in, d_out, d_env) = (p.channel.d_in(), p.channel.d_out(), iso.d_env);
    let mut br = Branches {
        probabilities: p.initial.probabilities.clone(),
        states: vec![p.initial.shared.clone(); p.messages()],
    };
    let mut bob: Vec<String> = vec![y(0)];
    let mut records = Vec::with_capacity(n);
    let mut running = 0.0;
    let mut previous = br.holdings(&bob)?.holevo_bits();

    for k in 1..=n {
        // Alice encodes into Q_k with fresh ancilla Z_k
        let alice = FeedbackProtocol::alice_targets(k);
        br.map(|i, s| {
            let s = s.with_zero_register(&q(k), d_in)?.with_zero_register(&z(k), p.dims.z)?;
            s.apply_unitary(&as_refs(&alice), &p.alice[k - 1][i])
        })?;
        let outputs = [(q(k), d_out), (e(k), d_env)];
        br.map(|_, s| s.apply_isometry(&[q(k).as_str()], &iso.matrix, &outputs))?;

        bob.insert(k - 1, q(k));
        let received = br.holdings(&bob)?.holevo_bits();
        let conditional = received - previous;

        // Bob's decoding step with fresh X_k, Y_k
        let targets = FeedbackProtocol::bob_targets(k);
        br.map(|_, s| {
            let s = s.with_zero_register(&x(k), p.dims.x)?.with_zero_register(&y(k), p.dims.y)?;
            s.apply_unitary(&as_refs(&targets), &p.bob[k - 1])
        })?;
        bob.push(y(k));
        let mut with_x = bob.clone();
        with_x.push(x(k));
        let before = br.holdings(&with_x)?;
        let after = br.holdings(&bob)?;
        let monotonicity = MonotonicityStep::from_ensembles(&before, &after)?;
        let mi = after.holevo_bits();
        running += conditional;
        records.push(RoundRecord {
            round: k,
            conditional,
            mi_with_feedback_register: before.holevo_bits(),
            mi,
            monotonicity,
            bound_slack: running - mi,
            bob_entropy: mean_entropy(&after),
            message_marginal: after.probabilities().to_vec(),
        });
        previous = mi;
    }

    Ok(ProtocolTrajectory {
        rounds: n,
        mi_per_round: records.iter().map(|r| r.mi).collect(),
        conditional_terms: records.iter().map(|r| r.conditional).collect(),
        bound_slack: records.iter().map(|r| r.bound_slack).collect(),
        records,
        initial_marginal: p.initial.probabilities.clone(),
    })
}

/// Simulate independent protocols, results in input order.
pub fn simulate_many(protocols: &[FeedbackProtocol], exec: Execution) -> Vec<Result<ProtocolTrajectory>> {
    map_indexed(exec, protocols.len(), |i| simulate_feedback_protocol(&protocols[i]))
}

/// Lift `op` acting on `targets` (in that order) to the whole of `space`.
pub fn embed_operator(op: &ComplexMatrix, space: &SubsystemSpec, targets: &[&str]) -> Result<ComplexMatrix> {
    let pos = space.positions(targets)?;
    let dims = space.dims();
    let dt: usize = pos.iter().map(|&p| dims[p]).product();
    if op.rows() != dt || op.cols() != dt {
        return Err(QfcError::DimensionMismatch(format!(
            "operator is {}x{}, targets span {dt}",
            op.rows(),
            op.cols()
        )));
    }
    let d = space.total_dim();
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; dims.len()];
        for p in (0..dims.len()).rev() {
            out[p] = idx % dims[p];
            idx /= dims[p];
        }
        out
    };
    let split = |dg: &[usize]| -> (usize, Vec<usize>) {
        let t = pos.iter().fold(0, |acc, &p| acc * dims[p] + dg[p]);
        let rest = (0..dims.len()).filter(|p| !pos.contains(p)).map(|p| dg[p]).collect();
        (t, rest)
    };
    let parts: Vec<(usize, Vec<usize>)> = (0..d).map(|i| split(&digits(i))).collect();
    let mut out = ComplexMatrix::zeros(d, d);
    for (r, (tr, rr)) in parts.iter().enumerate() {
        for (c, (tc, rc)) in parts.iter().enumerate() {
            if rr == rc {
                out[(r, c)] = op[(*tr, *tc)];
            }
        }
    }
    Ok(out)
}

fn hadamard_cnot() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).expect("2x2");
    let h1 = h.kron(&ComplexMatrix::identity(2));
    let mut cnot = ComplexMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        cnot[(r, c)] = C64::new(1.0, 0.0);
    }
    cnot.matmul(&h1)
}

/// Two-message protocol over the noiseless qubit channel in which feedback
/// builds Bob–Alice entanglement without touching message correlations:
/// Alice sends `|i⟩` in round 1 and `|0⟩` afterwards; each round Bob makes a
/// Bell pair on `X_k Y_k` and returns `X_k`.
pub fn witness_protocol(rounds: usize) -> Result<FeedbackProtocol> {
    let channel = crate::channels::identity(2)?;
    let dims = FeedbackDims { x: 2, y: 2, z: 1, shared: 1 };
    let flip = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])?;
    let bell = hadamard_cnot();
    let mut alice = Vec::with_capacity(rounds);
    let mut bob = Vec::with_capacity(rounds);
    let skeleton = FeedbackProtocol {
        channel: channel.clone(),
        dims,
        initial: InitialState::uniform(2, 1),
        alice: Vec::new(),
        bob: Vec::new(),
    };
    for k in 1..=rounds {
        let space = skeleton.alice_space(k);
        let id = ComplexMatrix::identity(space.total_dim());
        let v1 = if k == 1 { embed_operator(&flip, &space, &[&q(1)])? } else { id.clone() };
        alice.push(vec![id, v1]);
        let space = skeleton.bob_space(k);
        bob.push(embed_operator(&bell, &space, &[&x(k), &y(k)])?);
    }
    FeedbackProtocol::new(channel, dims, InitialState::uniform(2, 1), alice, bob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{identity, qubit_erasure, random_channel, weyl_operators};

    fn swap(d: usize) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                s[(b * d + a, a * d + b)] = C64::new(1.0, 0.0);
            }
        }
        s
    }

    #[test]
    fn dense_coding_single_round() {
        let channel = identity(2).unwrap();
        let dims = FeedbackDims { x: 1, y: 1, z: 1, shared: 2 };
        // Alice moves her half of Φ⁺ into Q1 and applies a Weyl operator
        let alice: Vec<ComplexMatrix> = weyl_operators(2)
            .iter()
            .map(|w| {
                let sw = swap(2).kron(&ComplexMatrix::identity(1));
                w.kron(&ComplexMatrix::identity(2)).matmul(&sw)
            })
            .collect();
        let bob = vec![ComplexMatrix::identity(4)];
        let p = FeedbackProtocol::new(channel, dims, InitialState::uniform(4, 2), vec![alice], bob).unwrap();
        let t = simulate_feedback_protocol(&p).unwrap();
        assert_eq!(t.rounds, 1);
        assert!((t.total_mi() - 2.0).abs() < 1e-12);
        assert!((t.conditional_terms[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_two_round_chain() {
        let ch = random_channel(2, 2, 2, 3).unwrap();
        for seed in 0..5 {
            let p = FeedbackProtocol::random(ch.clone(), 2, FeedbackDims::default(), 3, seed).unwrap();
            let t = simulate_feedback_protocol(&p).unwrap();
            assert_eq!(t.records.len(), 2);
            assert!(t.total_mi() <= t.conditional_sum() + 1e-9);
            assert!(t.lemma_bound_holds(1e-9));
            assert!(t.message_invariant());
        }
    }

    #[test]
    fn message_independent_alice_carries_nothing() {
        let ch = qubit_erasure(0.25).unwrap();
        let p = FeedbackProtocol::random(ch, 2, FeedbackDims::default(), 4, 11).unwrap().without_encoding();
        let t = simulate_feedback_protocol(&p).unwrap();
        assert!(t.total_mi().abs() < 1e-10);
        assert!(t.conditional_terms.iter().all(|c| c.abs() < 1e-10));
    }

    #[test]
    fn zero_rounds() {
        let p = FeedbackProtocol::random(identity(2).unwrap(), 0, FeedbackDims::default(), 2, 0).unwrap();
        let t = simulate_feedback_protocol(&p).unwrap();
        assert_eq!(t.rounds, 0);
        assert!(t.mi_per_round.is_empty());
        assert_eq!(t.total_mi(), 0.0);
    }

    #[test]
    fn budget() {
        let ch = identity(2).unwrap();
        assert_eq!(tracked_dimension(&ch, FeedbackDims::default(), 3), 4096);
        let err = FeedbackProtocol::random(ch, 4, FeedbackDims::default(), 2, 0).unwrap_err();
        assert!(matches!(err, QfcError::DimensionBudget { dim: 65536, .. }));
    }

    #[test]
    fn rejects_non_unitary() {
        let ch = identity(2).unwrap();
        let mut p = FeedbackProtocol::random(ch.clone(), 1, FeedbackDims::default(), 2, 0).unwrap();
        p.bob[0] = p.bob[0].scale_real(1.01);
        let err = FeedbackProtocol::new(ch, p.dims, p.initial.clone(), p.alice.clone(), p.bob.clone());
        assert!(matches!(err, Err(QfcError::NotUnitary(_))));
    }

    #[test]
    fn witness_keeps_message_correlation_fixed() {
        let t = simulate_feedback_protocol(&witness_protocol(3).unwrap()).unwrap();
        for (k, r) in t.records.iter().enumerate() {
            assert!((r.mi - 1.0).abs() < 1e-12);
            assert!((r.bob_entropy - (k + 1) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn embed_matches_kron() {
        let space = SubsystemSpec::new([("a", 2), ("b", 3)]).unwrap();
        let op = crate::tensor::random_haar_unitary(2, 5);
        let e = embed_operator(&op, &space, &["a"]).unwrap();
        assert!(e.max_abs_diff(&op.kron(&ComplexMatrix::identity(3))) < 1e-15);
        let op3 = crate::tensor::random_haar_unitary(3, 6);
        let e = embed_operator(&op3, &space, &["b"]).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(2).kron(&op3)) < 1e-15);
    }

    #[test]
    fn json_schema() {
        let t = simulate_feedback_protocol(&witness_protocol(1).unwrap()).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["bound_slack", "conditional_terms", "mi_per_round", "rounds"]);
    }
}
