//! Entanglement-assisted capacity `C_E = max_ρ S(ρ) + S(Λρ) - S(Λ^c ρ)` and the
//! single-letter coherent information `S(Λρ) - S(Λ^c ρ)`.
//!
//! Both are maximized over density matrices with a conditional-gradient
//! (Frank-Wolfe) ascent: the linear oracle over the state space is the top
//! eigenvector of the gradient, the step length comes from a line search on
//! the directional derivative, and the Frank-Wolfe gap `λ_max(G) - Tr(Gρ)` is
//! reported as the stationarity certificate. For the concave
//! entanglement-assisted objective the gap also bounds the suboptimality.

use serde::Serialize;

use crate::channels::QuantumChannel;
use crate::entropy::{entropy_unchecked, EntropyValue};
use crate::error::{QfcError, Result};
use crate::par::{map_indexed, sub_seed, Execution};
use crate::tensor::random::{random_state_with, rng_from_seed};
use crate::tensor::{eig_unchecked, purify, ComplexMatrix, MultipartiteState, SubsystemSpec};

/// Eigenvalue floor applied inside logarithms of the gradient.
pub const LOG_FLOOR: f64 = 1e-12;
/// Largest input dimension accepted by the optimizer.
pub const MAX_INPUT_DIM: usize = 64;

const LINE_SEARCH_STEPS: usize = 60;

const INPUT_LABEL: &str = "in";
const REFERENCE_LABEL: &str = "ref";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `S(ρ) + S(Λρ) - S(Λ^c ρ)`.
    EntanglementAssisted,
    /// `S(Λρ) - S(Λ^c ρ)`.
    CoherentInformation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOptions {
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Random starts in addition to the maximally mixed state.
    pub restarts: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-8, max_iter: 10_000, restarts: 4, seed: 0, execution: Execution::Parallel }
    }
}

/// Outcome of one optimizer start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartOutcome {
    pub value: f64,
    pub iterations: usize,
    pub gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    /// Best objective value found, in bits.
    pub value: f64,
    pub argmax: MultipartiteState,
    /// Iterations used by the start that produced `value`.
    pub iterations: usize,
    /// Frank-Wolfe gap at `argmax`.
    pub stationarity_gap: f64,
    /// Max minus min of the final values across starts.
    pub multistart_spread: f64,
    /// Whether the start that produced `value` met the gap tolerance.
    pub converged: bool,
    pub starts: Vec<StartOutcome>,
}

/// Precomputed channel pair for repeated evaluation.
#[derive(Debug, Clone)]
pub struct ObjectiveEvaluator {
    channel: QuantumChannel,
    complementary: QuantumChannel,
    kind: Objective,
}

fn log2_floored(m: &ComplexMatrix) -> ComplexMatrix {
    eig_unchecked(m).map_spectrum(|x| x.max(LOG_FLOOR).log2())
}

impl ObjectiveEvaluator {
    pub fn new(channel: &QuantumChannel, kind: Objective) -> Self {
        Self { channel: channel.clone(), complementary: channel.complementary(), kind }
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn d_in(&self) -> usize {
        self.channel.d_in()
    }

    pub fn value(&self, rho: &ComplexMatrix) -> f64 {
        let out = entropy_unchecked(&self.channel.apply_matrix(rho));
        let env = entropy_unchecked(&self.complementary.apply_matrix(rho));
        match self.kind {
            Objective::EntanglementAssisted => entropy_unchecked(rho) + out - env,
            Objective::CoherentInformation => out - env,
        }
    }

    /// Euclidean gradient, modulo multiples of the identity.
    pub fn gradient(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let out_term = self.channel.apply_adjoint(&log2_floored(&self.channel.apply_matrix(rho)));
        let env_term = self.complementary.apply_adjoint(&log2_floored(&self.complementary.apply_matrix(rho)));
        // -Λ*(log Λρ) + Λ^c*(log Λ^c ρ)
        let mut g = &env_term - &out_term;
        if self.kind == Objective::EntanglementAssisted {
            g = &g - &log2_floored(rho);
        }
        g.hermitian_part()
    }

    /// `d/dγ f(x + γ d)`.
    fn directional_derivative(&self, x: &ComplexMatrix, dir: &ComplexMatrix) -> f64 {
        self.gradient(x).trace_product(dir).re
    }

    /// Step along `dir` from `x` maximizing `f` on `[0, 1]`, found as a root of
    /// the directional derivative (Illinois false position). `slope0 > 0` is the
    /// derivative at 0. Derivative values stay accurate where differences of
    /// objective values are lost to rounding.
    fn line_search(&self, x: &ComplexMatrix, dir: &ComplexMatrix, slope0: f64) -> f64 {
        let slope1 = self.directional_derivative(&(x + dir), dir);
        if slope1 >= 0.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let (mut f_lo, mut f_hi) = (slope0, slope1);
        let mut side = 0i8;
        for _ in 0..LINE_SEARCH_STEPS {
            let t = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            let t = if t.is_finite() && t > lo && t < hi { t } else { 0.5 * (lo + hi) };
            let ft = self.directional_derivative(&(x + &dir.scale_real(t)), dir);
            if ft > 0.0 {
                lo = t;
                f_lo = ft;
                if side == 1 {
                    f_hi *= 0.5;
                }
                side = 1;
            } else {
                hi = t;
                f_hi = ft;
                if side == -1 {
                    f_lo *= 0.5;
                }
                side = -1;
            }
            if hi - lo <= 1e-15 * hi.max(1e-300) || ft.abs() <= 1e-15 * slope0 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// One Frank-Wolfe ascent from `start`.
    fn ascend(&self, start: ComplexMatrix, opts: &CapacityOptions) -> (ComplexMatrix, StartOutcome) {
        let mut x = start;
        let mut gap = f64::INFINITY;
        let mut iterations = 0;
        while iterations < opts.max_iter {
            let g = self.gradient(&x);
            let eig = eig_unchecked(&g);
            let vertex = ComplexMatrix::outer(&eig.top_vector());
            gap = eig.values[0] - g.trace_product(&x).re;
            if gap <= opts.gap_tol {
                break;
            }
            iterations += 1;
            let dir = &vertex - &x;
            let step = self.line_search(&x, &dir, gap);
            if step <= 0.0 {
                break;
            }
            x = (&x + &dir.scale_real(step)).hermitian_part();
        }
        let converged = gap <= opts.gap_tol;
        let value = self.value(&x);
        (x, StartOutcome { value, iterations, gap, converged })
    }

    /// Multistart maximization.
    pub fn maximize(&self, opts: &CapacityOptions) -> Result<CapacityReport> {
        let d = self.d_in();
        if d > MAX_INPUT_DIM {
            return Err(QfcError::DimensionBudget {
                what: "optimizer input".into(),
                dim: d,
                cap: MAX_INPUT_DIM,
            });
        }
        let spec = SubsystemSpec::single(INPUT_LABEL, d);
        let mut starts = vec![MultipartiteState::maximally_mixed(spec.clone()).matrix().clone()];
        if self.kind == Objective::CoherentInformation {
            // pure inputs always give zero coherent information
            starts.push(MultipartiteState::basis(spec.clone(), 0)?.matrix().clone());
        }
        for k in 0..opts.restarts {
            let mut rng = rng_from_seed(sub_seed(opts.seed, k as u64));
            starts.push(random_state_with(spec.clone(), d, &mut rng)?.matrix().clone());
        }
        let runs = map_indexed(opts.execution, starts.len(), |i| self.ascend(starts[i].clone(), opts));

        let best = runs
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.1.value.total_cmp(&b.1.value).then(j.cmp(i)))
            .map(|(i, _)| i)
            .expect("at least one start");
        let max = runs.iter().map(|r| r.1.value).fold(f64::NEG_INFINITY, f64::max);
        let min = runs.iter().map(|r| r.1.value).fold(f64::INFINITY, f64::min);
        let (argmax, outcome) = runs[best].clone();
        Ok(CapacityReport {
            value: outcome.value,
            argmax: MultipartiteState::from_parts_unchecked(spec, argmax),
            iterations: outcome.iterations,
            stationarity_gap: outcome.gap,
            multistart_spread: max - min,
            converged: outcome.converged,
            starts: runs.into_iter().map(|r| r.1).collect(),
        })
    }
}

fn input_matrix<'a>(ch: &QuantumChannel, rho: &'a MultipartiteState) -> Result<&'a ComplexMatrix> {
    if rho.dim() != ch.d_in() {
        return Err(QfcError::DimensionMismatch(format!(
            "channel `{}` takes dimension {}, state has {}",
            ch.name(),
            ch.d_in(),
            rho.dim()
        )));
    }
    Ok(rho.matrix())
}

/// `S(ρ) + S(Λρ) - S(Λ^c ρ)`, evaluated through the complementary channel.
pub fn ea_objective(ch: &QuantumChannel, rho: &MultipartiteState) -> Result<EntropyValue> {
    let m = input_matrix(ch, rho)?;
    Ok(EntropyValue(ObjectiveEvaluator::new(ch, Objective::EntanglementAssisted).value(m)))
}

/// `S(ρ) + S(Λρ) - S((I ⊗ Λ)|Ψ⟩⟨Ψ|)` with `|Ψ⟩` an explicit purification.
pub fn ea_objective_via_purification(ch: &QuantumChannel, rho: &MultipartiteState) -> Result<EntropyValue> {
    let m = input_matrix(ch, rho)?;
    let single = MultipartiteState::from_parts_unchecked(SubsystemSpec::single(INPUT_LABEL, ch.d_in()), m.clone());
    let psi = purify(&single, REFERENCE_LABEL)?;
    let joint = ch.apply_to_subsystem(&psi.density(), INPUT_LABEL)?;
    let s_in = entropy_unchecked(m);
    let s_out = entropy_unchecked(&ch.apply_matrix(m));
    Ok(EntropyValue(s_in + s_out - entropy_unchecked(joint.matrix())))
}

fn checked_gradient(ch: &QuantumChannel, rho: &MultipartiteState, floor: bool, kind: Objective) -> Result<ComplexMatrix> {
    let m = input_matrix(ch, rho)?;
    if !floor {
        let eval = ObjectiveEvaluator::new(ch, kind);
        let singular = |x: &ComplexMatrix| eig_unchecked(x).values.last().is_some_and(|&l| l <= LOG_FLOOR);
        if (kind == Objective::EntanglementAssisted && singular(m))
            || singular(&eval.channel.apply_matrix(m))
            || singular(&eval.complementary.apply_matrix(m))
        {
            return Err(QfcError::Singular("gradient needs strictly positive input and outputs".into()));
        }
    }
    Ok(ObjectiveEvaluator::new(ch, kind).gradient(m))
}

/// Gradient `-log₂ρ + Λ*(-log₂ Λρ) - Λ^c*(-log₂ Λ^c ρ)` of [`ea_objective`], up
/// to a multiple of the identity. With `floor = false`, singular arguments of
/// the logarithms are an error; otherwise eigenvalues are floored at
/// [`LOG_FLOOR`].
pub fn ea_gradient(ch: &QuantumChannel, rho: &MultipartiteState, floor: bool) -> Result<ComplexMatrix> {
    checked_gradient(ch, rho, floor, Objective::EntanglementAssisted)
}

pub fn coherent_information_gradient(ch: &QuantumChannel, rho: &MultipartiteState, floor: bool) -> Result<ComplexMatrix> {
    checked_gradient(ch, rho, floor, Objective::CoherentInformation)
}

pub fn entanglement_assisted_capacity(ch: &QuantumChannel, opts: &CapacityOptions) -> Result<CapacityReport> {
    ObjectiveEvaluator::new(ch, Objective::EntanglementAssisted).maximize(opts)
}

/// `S(Λρ) - S(Λ^c ρ)`.
pub fn coherent_information(ch: &QuantumChannel, rho: &MultipartiteState) -> Result<EntropyValue> {
    let m = input_matrix(ch, rho)?;
    Ok(EntropyValue(ObjectiveEvaluator::new(ch, Objective::CoherentInformation).value(m)))
}

/// Multistart maximization of the coherent information. The objective is not
/// concave in general, so `multistart_spread` matters.
pub fn max_coherent_information(ch: &QuantumChannel, opts: &CapacityOptions) -> Result<CapacityReport> {
    ObjectiveEvaluator::new(ch, Objective::CoherentInformation).maximize(opts)
}

/// Component of `g` orthogonal to the identity, i.e. its projection onto
/// traceless Hermitian matrices.
pub fn traceless_part(g: &ComplexMatrix) -> ComplexMatrix {
    let d = g.rows();
    let shift = g.trace().re / d as f64;
    g - &ComplexMatrix::identity(d).scale_real(shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing, depolarizing, identity, qubit_erasure};

    fn mixed(d: usize) -> MultipartiteState {
        MultipartiteState::maximally_mixed(SubsystemSpec::single("A", d))
    }

    #[test]
    fn objective_examples() {
        let id = identity(2).unwrap();
        assert!((ea_objective(&id, &mixed(2)).unwrap().bits() - 2.0).abs() < 1e-12);
        for eps in [0.0, 0.2, 0.5, 0.9] {
            let v = ea_objective(&qubit_erasure(eps).unwrap(), &mixed(2)).unwrap().bits();
            assert!((v - 2.0 * (1.0 - eps)).abs() < 1e-12, "eps={eps}");
        }
        let rho = crate::tensor::random_density_matrix(2, 2, 5).unwrap();
        assert!(ea_objective(&depolarizing(0.25).unwrap(), &rho).unwrap().bits().abs() < 1e-9);
    }

    #[test]
    fn coherent_information_examples() {
        let id = identity(2).unwrap();
        assert!((coherent_information(&id, &mixed(2)).unwrap().bits() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_stationary_at_symmetric_points() {
        let g = ea_gradient(&identity(2).unwrap(), &mixed(2), false).unwrap();
        assert!(traceless_part(&g).max_abs() < 1e-12);
        for eps in [0.1, 0.5, 0.8] {
            let g = ea_gradient(&qubit_erasure(eps).unwrap(), &mixed(2), true).unwrap();
            assert!(traceless_part(&g).frobenius_norm() <= 1e-6);
        }
    }

    #[test]
    fn unfloored_gradient_rejects_singular_input() {
        let pure = crate::tensor::random_density_matrix(2, 1, 2).unwrap();
        let id = identity(2).unwrap();
        assert!(matches!(ea_gradient(&id, &pure, false), Err(QfcError::Singular(_))));
        assert!(ea_gradient(&id, &pure, true).is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            ea_objective(&identity(2).unwrap(), &mixed(3)),
            Err(QfcError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn capacity_of_simple_channels() {
        let opts = CapacityOptions::default();
        let r = entanglement_assisted_capacity(&identity(2).unwrap(), &opts).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6);
        assert!(r.converged);
        let r = entanglement_assisted_capacity(&depolarizing(0.25).unwrap(), &opts).unwrap();
        assert!(r.value.abs() < 1e-6);
    }

    #[test]
    fn dephasing_capacity_matches_closed_form() {
        let p = 0.2;
        let r = entanglement_assisted_capacity(&dephasing(p).unwrap(), &CapacityOptions::default()).unwrap();
        let expected = 2.0 - crate::entropy::binary_entropy(p);
        assert!((r.value - expected).abs() < 1e-6, "{} vs {expected}", r.value);
    }

    #[test]
    fn report_value_matches_argmax() {
        let ch = qubit_erasure(0.3).unwrap();
        let r = entanglement_assisted_capacity(&ch, &CapacityOptions::default()).unwrap();
        let again = ea_objective(&ch, &r.argmax).unwrap().bits();
        assert!((again - r.value).abs() < 1e-9);
        assert_eq!(r.starts.len(), 5);
    }

    #[test]
    fn optimizer_is_deterministic_across_execution_modes() {
        let ch = crate::channels::random_channel(2, 2, 3, 9).unwrap();
        let par = CapacityOptions { seed: 3, ..Default::default() };
        let seq = CapacityOptions { execution: Execution::Sequential, ..par };
        let a = entanglement_assisted_capacity(&ch, &par).unwrap();
        let b = entanglement_assisted_capacity(&ch, &seq).unwrap();
        assert_eq!(a, b);
    }
}
