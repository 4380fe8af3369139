//! Randomized invariant suites behind `qfc verify`.
//!
//! Each trial draws its instances from `sub_seed(seed, trial)`, so a suite's
//! summary depends only on `(suite, trials, seed, tolerances)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::capacity::{ea_objective_via_purification, entanglement_assisted_capacity, CapacityOptions, Objective, ObjectiveEvaluator};
use crate::channels::{dephasing, depolarizing, identity, qubit_erasure, random_channel_with, QuantumChannel};
use crate::ensemble::LabeledEnsemble;
use crate::entropy::{conditional_entropy, entropy_unchecked, sampled_accessible_information};
use crate::error::{QfcError, Result};
use crate::feedback::{
    delta_conditional_mi, dense_coding_ensemble, random_delta_ensemble, simulate_feedback_protocol, FeedbackDims,
    FeedbackProtocol,
};
use crate::par::{map_indexed, sub_seed, Execution};
use crate::tensor::random::{haar_unitary_with, random_hermitian_with, random_state_with, rng_from_seed, SeededRng};
use crate::tensor::{purify, ComplexMatrix, MultipartiteState, SubsystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Entropic,
    Channel,
    Capacity,
    Feedback,
    All,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Entropic, Suite::Channel, Suite::Capacity, Suite::Feedback];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Entropic => "entropic",
            Suite::Channel => "channel",
            Suite::Capacity => "capacity",
            Suite::Feedback => "feedback",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = QfcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropic" => Ok(Suite::Entropic),
            "channel" => Ok(Suite::Channel),
            "capacity" => Ok(Suite::Capacity),
            "feedback" => Ok(Suite::Feedback),
            "all" => Ok(Suite::All),
            other => Err(QfcError::Parse(format!("unknown suite `{other}`"))),
        }
    }
}

/// Tolerances of the suites, one per kind of check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyTolerances {
    /// Entropic inequalities, monotonicity and chain bounds.
    pub inequality: f64,
    /// Identities that hold exactly in exact arithmetic.
    pub identity: f64,
    /// `Δ ≤ C_E`, loose enough to absorb the optimizer's gap.
    pub theorem3: f64,
    /// Analytic gradient against central differences.
    pub gradient: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self { inequality: 1e-9, identity: 1e-9, theorem3: 1e-7, gradient: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckFailure {
    pub suite: &'static str,
    pub check: String,
    pub trial: usize,
    /// How far past its tolerance the check landed, or NaN for errors.
    pub violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub trials: usize,
    pub checks: usize,
    pub failures: Vec<CheckFailure>,
    /// Largest amount by which any check fell short of its bound (zero if none).
    pub max_slack_violation: f64,
    /// Largest `Δ - C_E` seen; present when the feedback suite ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_theorem3_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// One evaluated check. `excess` is `lhs - rhs` for a claim `lhs ≤ rhs`,
/// or the absolute difference for an identity.
struct Outcome {
    name: &'static str,
    excess: f64,
    tol: f64,
}

#[derive(Default)]
struct TrialResult {
    outcomes: Vec<Outcome>,
    error: Option<String>,
    theorem3: Option<f64>,
}

impl TrialResult {
    fn le(&mut self, name: &'static str, lhs: f64, rhs: f64, tol: f64) {
        self.outcomes.push(Outcome { name, excess: lhs - rhs, tol });
    }

    fn eq(&mut self, name: &'static str, a: f64, b: f64, tol: f64) {
        self.outcomes.push(Outcome { name, excess: (a - b).abs(), tol });
    }
}

fn run_trials<F>(suite: Suite, trials: usize, exec: Execution, f: F) -> SuiteSummary
where
    F: Fn(usize, &mut TrialResult) -> Result<()> + Sync + Send,
{
    let results = map_indexed(exec, trials, |t| {
        let mut r = TrialResult::default();
        if let Err(e) = f(t, &mut r) {
            r.error = Some(e.to_string());
        }
        r
    });
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    let mut theorem3: Option<f64> = None;
    for (t, r) in results.into_iter().enumerate() {
        for o in &r.outcomes {
            checks += 1;
            let over = o.excess - o.tol;
            if !(over <= 0.0) {
                failures.push(CheckFailure {
                    suite: suite.name(),
                    check: o.name.to_string(),
                    trial: t,
                    violation: over,
                    error: None,
                });
            }
            if o.excess.is_finite() {
                worst = worst.max(o.excess);
            }
        }
        if let Some(e) = r.error {
            failures.push(CheckFailure {
                suite: suite.name(),
                check: "trial".into(),
                trial: t,
                violation: f64::NAN,
                error: Some(e),
            });
        }
        if let Some(s) = r.theorem3 {
            theorem3 = Some(theorem3.map_or(s, |w: f64| w.max(s)));
        }
    }
    SuiteSummary {
        suite,
        trials,
        checks,
        failures,
        max_slack_violation: worst,
        worst_theorem3_slack: theorem3,
        warning: None,
    }
}

fn s(m: &MultipartiteState, keep: &[&str]) -> Result<f64> {
    Ok(entropy_unchecked(m.reduce_to(keep)?.matrix()))
}

fn random_tripartite(rng: &mut SeededRng) -> Result<MultipartiteState> {
    let da = rng.random_range(2..=3usize);
    let db = rng.random_range(2..=3usize);
    let dc = 2usize;
    let spec = SubsystemSpec::new([("A", da), ("B", db), ("C", dc)])?;
    let rank = rng.random_range(1..=spec.total_dim());
    random_state_with(spec, rank, rng)
}

fn entropic_trial(t: usize, seed: u64, tol: &VerifyTolerances, r: &mut TrialResult) -> Result<()> {
    let mut rng = rng_from_seed(sub_seed(seed, t as u64));
    let abc = random_tripartite(&mut rng)?;
    let (sa, sb) = (s(&abc, &["A"])?, s(&abc, &["B"])?);
    let (sab, sbc) = (s(&abc, &["A", "B"])?, s(&abc, &["B", "C"])?);
    let sabc = entropy_unchecked(abc.matrix());
    r.le("subadditivity", sab, sa + sb, tol.inequality);
    r.le("strong subadditivity", sabc + sb, sab + sbc, tol.inequality);

    // conditioning on more never raises the conditional entropy
    let h_a_bc = conditional_entropy(&abc, &["A"], &["B", "C"])?.bits();
    let h_a_b = conditional_entropy(&abc, &["A"], &["B"])?.bits();
    r.le("conditional entropy monotonicity", h_a_bc, h_a_b, tol.inequality);

    // concavity of S(A|B) along a mixture
    let ab = abc.reduce_to(&["A", "B"])?;
    let other = random_state_with(ab.spec().clone(), rng.random_range(1..=ab.dim()), &mut rng)?;
    let lambda: f64 = rng.random();
    let mix = MultipartiteState::mixture(&[lambda, 1.0 - lambda], &[&ab, &other])?;
    let h = |m: &MultipartiteState| conditional_entropy(m, &["A"], &["B"]).map(|v| v.bits());
    r.le("conditional entropy concavity", lambda * h(&ab)? + (1.0 - lambda) * h(&other)?, h(&mix)?, tol.inequality);

    // Holevo bound against sampled projective measurements
    let d = rng.random_range(2..=3usize);
    let n = rng.random_range(2..=4usize);
    let spec = SubsystemSpec::single("A", d);
    let branches = (0..n)
        .map(|_| {
            let rank = rng.random_range(1..=d);
            random_state_with(spec.clone(), rank, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let probs = crate::tensor::random::random_simplex(n, &mut rng);
    let ens = LabeledEnsemble::new(probs, branches)?;
    let chi = crate::entropy::holevo_chi(&ens)?.bits();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..MEASUREMENTS_PER_ENSEMBLE {
        let basis = haar_unitary_with(d, &mut rng);
        best = best.max(sampled_accessible_information(&ens, &basis)?.bits());
    }
    r.le("holevo bound", best, chi, tol.inequality);
    Ok(())
}

/// Random measurements tried against each ensemble in the Holevo check.
pub const MEASUREMENTS_PER_ENSEMBLE: usize = 200;

fn random_small_channel(rng: &mut SeededRng) -> Result<QuantumChannel> {
    let d_in = rng.random_range(2..=3usize);
    let d_out = rng.random_range(2..=3usize);
    let lo = d_in.div_ceil(d_out);
    let n_kraus = rng.random_range(lo..=(d_in * d_out).min(4));
    random_channel_with(d_in, d_out, n_kraus, rng)
}

fn channel_trial(t: usize, seed: u64, tol: &VerifyTolerances, r: &mut TrialResult) -> Result<()> {
    let mut rng = rng_from_seed(sub_seed(seed, t as u64));
    let ch = random_small_channel(&mut rng)?;
    r.le("trace preservation", ch.trace_preservation_error(), 0.0, tol.identity);
    r.le("stinespring isometry", ch.stinespring().isometry_error(), 0.0, tol.identity);

    let rho = random_state_with(SubsystemSpec::single("in", ch.d_in()), ch.d_in(), &mut rng)?;
    let out = ch.apply(&rho)?;
    r.le("output positivity", -out.min_eigenvalue(), 0.0, tol.identity);
    r.eq("output trace", out.matrix().trace().re, 1.0, tol.identity);

    // environment of a purification matches the complementary channel
    let psi = purify(&rho, "ref")?;
    let joint = ch.apply_to_subsystem(&psi.density(), "in")?;
    let s_joint = entropy_unchecked(joint.matrix());
    let s_env = entropy_unchecked(&ch.complementary().apply_matrix(rho.matrix()));
    r.eq("complementary entropy", s_joint, s_env, tol.identity);

    // Stinespring dilation traced over the environment gives the channel
    let dilated = ch.stinespring().dilate(rho.matrix()).reduce_to(&["out"])?;
    r.le("stinespring marginal", dilated.matrix().max_abs_diff(out.matrix()), 0.0, tol.identity);

    let choi = ch.choi();
    r.le("choi positivity", -choi.state.min_eigenvalue(), 0.0, tol.identity);
    let reduced = choi.state.reduce_to(&["ref"])?;
    let flat = ComplexMatrix::identity(ch.d_in()).scale_real(1.0 / ch.d_in() as f64);
    r.le("choi reference marginal", reduced.matrix().max_abs_diff(&flat), 0.0, tol.identity);

    let canon = ch.canonicalize();
    r.le(
        "canonical form action",
        canon.apply_matrix(rho.matrix()).max_abs_diff(out.matrix()),
        0.0,
        tol.identity,
    );
    Ok(())
}

/// Step of the central-difference gradient check.
const FD_STEP: f64 = 1e-4;

fn capacity_trial(t: usize, seed: u64, tol: &VerifyTolerances, r: &mut TrialResult) -> Result<()> {
    let mut rng = rng_from_seed(sub_seed(seed, t as u64));
    let ch = random_small_channel(&mut rng)?;
    let d = ch.d_in();
    let rho = random_state_with(SubsystemSpec::single("in", d), d, &mut rng)?;
    let eval = ObjectiveEvaluator::new(&ch, Objective::EntanglementAssisted);
    let direct = eval.value(rho.matrix());
    let purified = ea_objective_via_purification(&ch, &rho)?.bits();
    r.eq("objective two-path identity", direct, purified, tol.identity);

    // fourth-order central stencil; the step shrinks with the smallest
    // eigenvalue because the logarithms steepen near the boundary
    let h = crate::capacity::traceless_part(&random_hermitian_with(d, &mut rng));
    let h = h.scale_real(1.0 / h.frobenius_norm());
    let step = FD_STEP.min(rho.min_eigenvalue() / 50.0);
    let f = |s: f64| eval.value(&(rho.matrix() + &h.scale_real(s)));
    let fd = (f(-2.0 * step) - 8.0 * f(-step) + 8.0 * f(step) - f(2.0 * step)) / (12.0 * step);
    let analytic = eval.gradient(rho.matrix()).trace_product(&h).re;
    r.eq("gradient vs central differences", analytic, fd, tol.gradient);

    let opts = CapacityOptions { seed: sub_seed(seed, t as u64), restarts: 1, execution: Execution::Sequential, ..Default::default() };
    let report = entanglement_assisted_capacity(&ch, &opts)?;
    r.le("capacity dominates sampled input", direct, report.value, tol.inequality);
    let upper = 2.0 * (d as f64).log2().min((ch.d_out() as f64).log2());
    r.le("capacity upper bound", report.value, upper, tol.inequality);
    r.le("capacity nonnegative", -report.value, 0.0, tol.inequality);
    Ok(())
}

/// Channels the feedback suite cycles through.
pub fn feedback_zoo() -> Result<Vec<QuantumChannel>> {
    Ok(vec![
        identity(2)?,
        qubit_erasure(0.25)?,
        qubit_erasure(0.5)?,
        depolarizing(0.5)?,
        depolarizing(0.75)?,
        dephasing(0.2)?,
    ])
}

struct ZooEntry {
    channel: QuantumChannel,
    c_e: f64,
}

fn feedback_trial(t: usize, seed: u64, zoo: &[ZooEntry], tol: &VerifyTolerances, r: &mut TrialResult) -> Result<()> {
    let entry = &zoo[t % zoo.len()];
    let ch = &entry.channel;
    let mut rng = rng_from_seed(sub_seed(seed, t as u64));
    let ens = random_delta_ensemble(ch.d_in(), ch.d_in(), &mut rng)?;
    let delta = delta_conditional_mi(ch, &ens)?.bits();
    r.le("converse Δ ≤ C_E (random ensemble)", delta, entry.c_e, tol.theorem3);
    let mut worst = delta - entry.c_e;
    if t < zoo.len() {
        let ansatz = delta_conditional_mi(ch, &dense_coding_ensemble(ch.d_in())?)?.bits();
        r.le("converse Δ ≤ C_E (dense coding)", ansatz, entry.c_e, tol.theorem3);
        worst = worst.max(ansatz - entry.c_e);
    }
    r.theorem3 = Some(worst);

    let messages = rng.random_range(2..=4usize);
    let p = FeedbackProtocol::random(ch.clone(), 2, FeedbackDims::default(), messages, sub_seed(seed, t as u64))?;
    let traj = simulate_feedback_protocol(&p)?;
    r.le("chain-rule bound", traj.total_mi(), traj.conditional_sum(), tol.inequality);
    for rec in &traj.records {
        r.le("monotonicity step", -rec.monotonicity.slack, 0.0, tol.inequality);
        r.le("round bound", -rec.bound_slack, 0.0, tol.inequality);
    }
    r.le("rounds times C_E", traj.total_mi(), traj.rounds as f64 * entry.c_e, tol.theorem3);
    r.le("message invariance", if traj.message_invariant() { 0.0 } else { 1.0 }, 0.0, 0.0);
    Ok(())
}

fn single_suite(suite: Suite, trials: usize, seed: u64, tol: &VerifyTolerances, exec: Execution) -> Result<SuiteSummary> {
    Ok(match suite {
        Suite::Entropic => run_trials(suite, trials, exec, |t, r| entropic_trial(t, seed, tol, r)),
        Suite::Channel => run_trials(suite, trials, exec, |t, r| channel_trial(t, seed, tol, r)),
        Suite::Capacity => run_trials(suite, trials, exec, |t, r| capacity_trial(t, seed, tol, r)),
        Suite::Feedback => {
            let zoo = if trials == 0 {
                Vec::new()
            } else {
                feedback_zoo()?
                    .into_iter()
                    .map(|channel| {
                        let c_e = entanglement_assisted_capacity(&channel, &CapacityOptions { seed, execution: exec, ..Default::default() })?.value;
                        Ok(ZooEntry { channel, c_e })
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            run_trials(suite, trials, exec, |t, r| feedback_trial(t, seed, &zoo, tol, r))
        }
        Suite::All => unreachable!("expanded by run_suite"),
    })
}

/// Run `suite` for `trials` random trials. `trials = 0` passes vacuously
/// with a warning.
pub fn run_suite(suite: Suite, trials: usize, seed: u64, tol: &VerifyTolerances, exec: Execution) -> Result<SuiteSummary> {
    let mut summary = if suite == Suite::All {
        let parts = Suite::ALL
            .iter()
            .map(|&s| single_suite(s, trials, seed, tol, exec))
            .collect::<Result<Vec<_>>>()?;
        SuiteSummary {
            suite,
            trials,
            checks: parts.iter().map(|p| p.checks).sum(),
            failures: parts.iter().flat_map(|p| p.failures.clone()).collect(),
            max_slack_violation: parts.iter().map(|p| p.max_slack_violation).fold(0.0, f64::max),
            worst_theorem3_slack: parts.iter().find_map(|p| p.worst_theorem3_slack),
            warning: None,
        }
    } else {
        single_suite(suite, trials, seed, tol, exec)?
    };
    if trials == 0 {
        summary.warning = Some("no trials requested; the suite passes vacuously".into());
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        let tol = VerifyTolerances::default();
        for suite in Suite::ALL {
            let s = run_suite(suite, 6, 1, &tol, Execution::Parallel).unwrap();
            assert!(s.passed(), "{suite}: {:?}", s.failures);
            assert!(s.checks > 0);
        }
    }

    #[test]
    fn vacuous_pass() {
        let s = run_suite(Suite::All, 0, 0, &VerifyTolerances::default(), Execution::Parallel).unwrap();
        assert!(s.passed());
        assert_eq!(s.checks, 0);
        assert!(s.warning.is_some());
    }

    #[test]
    fn impossible_tolerance_reports_failures() {
        let tol = VerifyTolerances { identity: -1.0, ..Default::default() };
        let s = run_suite(Suite::Channel, 2, 0, &tol, Execution::Sequential).unwrap();
        assert!(!s.passed());
    }

    #[test]
    fn parse_names() {
        for s in Suite::ALL.iter().chain([Suite::All].iter()) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
