//! Entropic quantities in bits.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::ensemble::LabeledEnsemble;
use crate::error::{QfcError, Result};
use crate::tensor::{eigenvalues_unchecked, ComplexMatrix, MultipartiteState, HERMITICITY_TOL, PSD_FLOOR, TRACE_TOL};

/// Eigenvalues at or below this contribute nothing to an entropy.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;
/// Tolerance of the internal two-route cross-check for conditional mutual information.
pub const IDENTITY_TOL: f64 = 1e-10;

/// An information quantity in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct EntropyValue(pub f64);

impl EntropyValue {
    pub fn bits(self) -> f64 {
        self.0
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// `-Σ λ log₂ λ` over `λ > EIGENVALUE_CLAMP`.
pub fn shannon_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > EIGENVALUE_CLAMP)
        .map(|p| -p * p.log2())
        .sum()
}

/// Binary entropy `h₂(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_bits([p, 1.0 - p])
}

/// Entropy of a matrix assumed to be a valid state.
pub(crate) fn entropy_unchecked(m: &ComplexMatrix) -> f64 {
    shannon_bits(eigenvalues_unchecked(m))
}

pub fn von_neumann_entropy(rho: &MultipartiteState) -> Result<EntropyValue> {
    let m = rho.matrix();
    let herm = m.hermiticity_error();
    if herm > HERMITICITY_TOL {
        return Err(QfcError::NotHermitian(herm));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(QfcError::InvalidState(format!("trace {tr} is not 1")));
    }
    let eig = eigenvalues_unchecked(m);
    if let Some(&min) = eig.last() {
        if min < PSD_FLOOR {
            return Err(QfcError::InvalidState(format!("eigenvalue {min:e} below floor")));
        }
    }
    Ok(EntropyValue(shannon_bits(eig)))
}

fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen = HashSet::new();
    for g in groups {
        for l in *g {
            if !seen.insert(*l) {
                return Err(QfcError::LabelOverlap(format!("`{l}` appears in more than one group")));
            }
        }
    }
    Ok(())
}

fn marginal_entropy(s: &MultipartiteState, labels: &[&str]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy_unchecked(s.reduce_to(labels)?.matrix()))
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b).copied().collect()
}

/// `S(A|B) = S(AB) - S(B)`.
pub fn conditional_entropy(s: &MultipartiteState, a: &[&str], b: &[&str]) -> Result<EntropyValue> {
    check_disjoint(&[a, b])?;
    s.validate()?;
    let ab = marginal_entropy(s, &union(a, b))?;
    Ok(EntropyValue(ab - marginal_entropy(s, b)?))
}

/// `S(A:B) = S(A) + S(B) - S(AB)`.
pub fn mutual_information(s: &MultipartiteState, a: &[&str], b: &[&str]) -> Result<EntropyValue> {
    check_disjoint(&[a, b])?;
    s.validate()?;
    let sa = marginal_entropy(s, a)?;
    let sb = marginal_entropy(s, b)?;
    Ok(EntropyValue(sa + sb - marginal_entropy(s, &union(a, b))?))
}

/// `S(A:B|C) = S(AC) + S(BC) - S(C) - S(ABC)`, cross-checked against
/// `S(A:BC) - S(A:C)`.
pub fn conditional_mutual_information(
    s: &MultipartiteState,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<EntropyValue> {
    check_disjoint(&[a, b, c])?;
    s.validate()?;
    let sa = marginal_entropy(s, a)?;
    let sc = marginal_entropy(s, c)?;
    let sac = marginal_entropy(s, &union(a, c))?;
    let sbc = marginal_entropy(s, &union(b, c))?;
    let abc: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
    let sabc = marginal_entropy(s, &abc)?;

    let value = sac + sbc - sc - sabc;
    let chained = (sa + sbc - sabc) - (sa + sc - sac);
    if (value - chained).abs() > IDENTITY_TOL {
        return Err(QfcError::Consistency(format!(
            "S(A:B|C) = {value} but S(A:BC) - S(A:C) = {chained}"
        )));
    }
    Ok(EntropyValue(value))
}

/// `χ = S(Σ p_i ρ_i) - Σ p_i S(ρ_i)`.
pub fn holevo_chi(ens: &LabeledEnsemble) -> Result<EntropyValue> {
    Ok(EntropyValue(ens.holevo_bits()))
}

/// Classical mutual information between the message and the outcome of a
/// rank-1 projective measurement whose basis vectors are the columns of
/// `basis`. A lower bound on the accessible information.
pub fn sampled_accessible_information(ens: &LabeledEnsemble, basis: &ComplexMatrix) -> Result<EntropyValue> {
    let d = ens.branch_dim();
    if basis.rows() != d || basis.cols() != d {
        return Err(QfcError::DimensionMismatch(format!(
            "measurement basis is {}x{}, ensemble space has dimension {d}",
            basis.rows(),
            basis.cols()
        )));
    }
    let err = basis.unitarity_error();
    if err > 1e-10 {
        return Err(QfcError::NotUnitary(err));
    }
    let outcome = |rho: &ComplexMatrix, j: usize| -> f64 {
        let v = basis.column(j);
        let rv = rho.matvec(&v);
        v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<crate::tensor::C64>().re.max(0.0)
    };
    let p = ens.probabilities();
    let conditionals: Vec<Vec<f64>> = ens
        .branches()
        .iter()
        .map(|rho| (0..d).map(|j| outcome(rho.matrix(), j)).collect())
        .collect();
    let marginal: Vec<f64> = (0..d)
        .map(|j| p.iter().zip(&conditionals).map(|(pi, c)| pi * c[j]).sum())
        .collect();
    let h_cond: f64 = p.iter().zip(&conditionals).map(|(pi, c)| pi * shannon_bits(c.iter().copied())).sum();
    Ok(EntropyValue(shannon_bits(marginal) - h_cond))
}
