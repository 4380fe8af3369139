//! Dense complex multipartite linear algebra.
//!
//! Storage is row-major and composite indices are big-endian: the first label
//! of a [`SubsystemSpec`] varies slowest.

mod eig;
mod matrix;
pub mod random;
mod spec;
mod state;

use std::sync::OnceLock;

pub use eig::{hermitian_eigendecomposition, Eigen, HERMITIAN_TOL};
pub use matrix::{ComplexMatrix, C64};
pub use random::{random_density_matrix, random_haar_unitary};
pub use spec::SubsystemSpec;
pub use state::{MultipartiteState, PureState, HERMITICITY_TOL, NORM_TOL, PSD_FLOOR, TRACE_TOL};

pub(crate) use eig::{eig_unchecked, eigenvalues_unchecked};
pub(crate) use matrix::{ONE, ZERO};

use crate::error::{QfcError, Result};

/// Default cap on the total dimension of any tracked state.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// Dimension cap, overridable once per process through `QFC_MAX_DIM`.
pub fn dimension_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("QFC_MAX_DIM")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_DIMENSION_CAP)
    })
}

pub(crate) fn check_dimension_cap(what: &str, dim: usize) -> Result<()> {
    let cap = dimension_cap();
    if dim > cap {
        return Err(QfcError::DimensionBudget { what: what.to_string(), dim, cap });
    }
    Ok(())
}

/// Reorder the axes of a row-major tensor: new axis `j` is old axis `order[j]`.
pub(crate) fn permute_axes<T: Copy>(data: &[T], dims: &[usize], order: &[usize]) -> Vec<T> {
    let k = dims.len();
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return data.to_vec();
    }
    let mut old_strides = vec![1usize; k];
    for p in (0..k.saturating_sub(1)).rev() {
        old_strides[p] = old_strides[p + 1] * dims[p + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let strides: Vec<usize> = order.iter().map(|&o| old_strides[o]).collect();
    let mut out = Vec::with_capacity(data.len());
    let mut counter = vec![0usize; k];
    let mut src = 0usize;
    for _ in 0..data.len() {
        out.push(data[src]);
        // odometer increment over new_dims, tracking the source offset
        for ax in (0..k).rev() {
            counter[ax] += 1;
            src += strides[ax];
            if counter[ax] < new_dims[ax] {
                break;
            }
            src -= strides[ax] * new_dims[ax];
            counter[ax] = 0;
        }
    }
    out
}

/// `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2` on two qubits.
pub fn bell_state(a: &str, b: &str) -> PureState {
    maximally_entangled(a, b, 2)
}

/// `Σ_i |ii⟩/√d`.
pub fn maximally_entangled(a: &str, b: &str, d: usize) -> PureState {
    let spec = SubsystemSpec::new([(a, d), (b, d)]).expect("distinct labels");
    let mut amps = vec![ZERO; d * d];
    let s = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        amps[i * d + i] = C64::new(s, 0.0);
    }
    PureState::from_parts_unchecked(spec, amps)
}

/// `|Ψ⟩ = Σ_i √λ_i |e_i⟩|i⟩_ref`, eigenvalues descending, reference in the
/// computational basis.
pub fn purify(rho: &MultipartiteState, ref_label: &str) -> Result<PureState> {
    if rho.spec().contains(ref_label) {
        return Err(QfcError::LabelCollision(ref_label.to_string()));
    }
    let d = rho.dim();
    let spec = rho.spec().concat(&SubsystemSpec::single(ref_label, d))?;
    let eig = eig_unchecked(rho.matrix());
    let mut amps = vec![ZERO; d * d];
    for (i, &lambda) in eig.values.iter().enumerate() {
        let w = lambda.max(0.0).sqrt();
        if w == 0.0 {
            continue;
        }
        for row in 0..d {
            amps[row * d + i] = eig.vectors[(row, i)] * w;
        }
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut amps {
        *z /= norm;
    }
    Ok(PureState::from_parts_unchecked(spec, amps))
}
