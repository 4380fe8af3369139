//! Closed-form rate algebra: feedback-assisted quantum rates, the erasure
//! channel specializations, and consistency checks between capacities.

use serde::Serialize;

use crate::error::{QfcError, Result};

/// Slack allowed in every ordering check.
pub const ORDERING_TOL: f64 = 1e-9;
/// Smallest value a present rate may take.
pub const RATE_FLOOR: f64 = -1e-12;

/// `R/(R + E) · Q_E`: quantum rate of a protocol that spends `E` ebits per
/// use, regenerated over the feedback line at rate `R`.
pub fn feedback_assisted_quantum_rate(r_fb: f64, e_q: f64, q_e: f64) -> Result<f64> {
    if !(r_fb.is_finite() && r_fb > 0.0) {
        return Err(QfcError::ParameterOutOfRange(format!("feedback rate must be positive, got {r_fb}")));
    }
    if !(e_q.is_finite() && e_q >= 0.0) {
        return Err(QfcError::ParameterOutOfRange(format!("entanglement cost must be nonnegative, got {e_q}")));
    }
    if !(q_e.is_finite() && q_e >= 0.0) {
        return Err(QfcError::ParameterOutOfRange(format!("Q_E must be nonnegative, got {q_e}")));
    }
    Ok(r_fb / (r_fb + e_q) * q_e)
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(QfcError::ParameterOutOfRange(format!("erasure probability {eps} not in [0, 1]")));
    }
    Ok(())
}

/// `(1 - ε)²`.
pub fn erasure_feedback_rate(eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    Ok(1.0 - 2.0 * eps + eps * eps)
}

/// `1 - 2ε`, which goes negative past `ε = ½`.
pub fn erasure_unassisted_q_raw(eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    Ok(1.0 - 2.0 * eps)
}

/// Quantum capacity of the erasure channel, `max(1 - 2ε, 0)`.
pub fn erasure_unassisted_q(eps: f64) -> Result<f64> {
    Ok(erasure_unassisted_q_raw(eps)?.max(0.0))
}

/// Entanglement-assisted quantum capacity of the erasure channel, `1 - ε`.
pub fn erasure_q_e(eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    Ok(1.0 - eps)
}

/// Feedback rate of the erasure channel through the general formula with
/// `R = 1 - ε`, `E = ε`, `Q_E = 1 - ε`. Undefined at `ε = 1`.
pub fn erasure_feedback_rate_via_protocol(eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    feedback_assisted_quantum_rate(1.0 - eps, eps, 1.0 - eps)
}

/// Capacities of one channel in bits per use; absent values are skipped by
/// the ordering checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RateSet {
    pub c: Option<f64>,
    pub c_fb: Option<f64>,
    pub c_qfb: Option<f64>,
    pub c_e: Option<f64>,
    pub q: Option<f64>,
    pub q_e: Option<f64>,
    pub q_fb_star: Option<f64>,
}

impl RateSet {
    fn fields(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("C", self.c),
            ("C_FB", self.c_fb),
            ("C_QFB", self.c_qfb),
            ("C_E", self.c_e),
            ("Q", self.q),
            ("Q_E", self.q_e),
            ("Q_FB_star", self.q_fb_star),
        ]
    }

    pub fn present(&self) -> usize {
        self.fields().iter().filter(|(_, v)| v.is_some()).count()
    }
}

/// One failed relation between two rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingViolation {
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
}

/// All violated relations among the present fields, each within
/// [`ORDERING_TOL`]:
/// `C ≤ C_FB ≤ C_QFB`, `C_QFB = C_E`, `Q_E = C_E / 2`, `Q ≤ Q_FB* ≤ Q_E`,
/// plus nonnegativity of each present value.
pub fn check_capacity_ordering(r: &RateSet) -> Vec<OrderingViolation> {
    let mut out = Vec::new();
    for (name, v) in r.fields() {
        if let Some(v) = v {
            if !(v >= RATE_FLOOR) {
                out.push(OrderingViolation { relation: format!("{name} >= 0"), lhs: v, rhs: 0.0 });
            }
        }
    }
    let mut le = |name: &str, a: Option<f64>, b: Option<f64>| {
        if let (Some(a), Some(b)) = (a, b) {
            if !(a <= b + ORDERING_TOL) {
                out.push(OrderingViolation { relation: name.to_string(), lhs: a, rhs: b });
            }
        }
    };
    le("C <= C_FB", r.c, r.c_fb);
    le("C_FB <= C_QFB", r.c_fb, r.c_qfb);
    le("C <= C_QFB", r.c, r.c_qfb);
    le("C <= C_E", r.c, r.c_e);
    le("C_FB <= C_E", r.c_fb, r.c_e);
    le("Q <= Q_FB_star", r.q, r.q_fb_star);
    le("Q_FB_star <= Q_E", r.q_fb_star, r.q_e);
    le("Q <= Q_E", r.q, r.q_e);
    let mut eq = |name: &str, a: Option<f64>, b: Option<f64>| {
        if let (Some(a), Some(b)) = (a, b) {
            if !((a - b).abs() <= ORDERING_TOL) {
                out.push(OrderingViolation { relation: name.to_string(), lhs: a, rhs: b });
            }
        }
    };
    eq("C_QFB = C_E", r.c_qfb, r.c_e);
    eq("Q_E = C_E/2", r.q_e, r.c_e.map(|c| c / 2.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| i as f64 / (n - 1) as f64)
    }

    #[test]
    fn worked_example() {
        // ε = 1/4: R = 3/4, E = 1/4, Q_E = 3/4
        assert_eq!(feedback_assisted_quantum_rate(0.75, 0.25, 0.75).unwrap(), 0.5625);
        assert_eq!(feedback_assisted_quantum_rate(0.3, 0.0, 0.8).unwrap(), 0.8);
        assert!(feedback_assisted_quantum_rate(0.0, 0.1, 0.5).is_err());
        assert!(feedback_assisted_quantum_rate(-1.0, 0.1, 0.5).is_err());
    }

    #[test]
    fn erasure_half() {
        assert_eq!(erasure_feedback_rate(0.5).unwrap(), 0.25);
        assert_eq!(erasure_unassisted_q(0.5).unwrap(), 0.0);
        assert_eq!(erasure_q_e(0.5).unwrap(), 0.5);
        assert_eq!(erasure_feedback_rate(0.0).unwrap(), 1.0);
        assert_eq!(erasure_unassisted_q(0.0).unwrap(), 1.0);
        assert_eq!(erasure_q_e(0.0).unwrap(), 1.0);
        assert!(erasure_feedback_rate(1.5).is_err());
        assert!(erasure_unassisted_q(-0.1).is_err());
    }

    #[test]
    fn protocol_formula_matches_closed_form() {
        for eps in grid(101).filter(|&e| e < 1.0) {
            let a = erasure_feedback_rate_via_protocol(eps).unwrap();
            let b = erasure_feedback_rate(eps).unwrap();
            assert!((a - b).abs() <= 1e-12, "ε = {eps}");
        }
    }

    #[test]
    fn strict_separation_inside() {
        let pts: Vec<f64> = grid(101).collect();
        for &eps in &pts[1..100] {
            assert!(erasure_feedback_rate(eps).unwrap() > erasure_unassisted_q(eps).unwrap());
            assert!(erasure_feedback_rate(eps).unwrap() <= erasure_q_e(eps).unwrap());
        }
        for eps in [0.0, 1.0] {
            assert_eq!(erasure_feedback_rate(eps).unwrap(), erasure_unassisted_q(eps).unwrap());
        }
    }

    #[test]
    fn orderings() {
        let ok = RateSet { c_e: Some(2.0), q_e: Some(1.0), ..Default::default() };
        assert!(check_capacity_ordering(&ok).is_empty());
        let bad = RateSet { c_e: Some(1.0), q_e: Some(0.7), ..Default::default() };
        let v = check_capacity_ordering(&bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].relation, "Q_E = C_E/2");
        let bad = RateSet { c: Some(1.0), c_fb: Some(0.9), ..Default::default() };
        assert_eq!(check_capacity_ordering(&bad).len(), 1);
        let neg = RateSet { q: Some(-0.1), ..Default::default() };
        assert_eq!(check_capacity_ordering(&neg).len(), 1);
    }
}
