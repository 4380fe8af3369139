use nalgebra::SymmetricEigen;

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{QfcError, Result};

/// Hermiticity tolerance accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Spectrum and eigenbasis of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = self.vectors.as_slice();
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = ZERO;
                for k in 0..n {
                    if fv[k] != 0.0 {
                        acc += v[i * n + k] * v[j * n + k].conj() * fv[k];
                    }
                }
                out[i * n + j] = acc;
                out[j * n + i] = acc.conj();
            }
        }
        ComplexMatrix::from_vec_unchecked(n, n, out)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }

    /// Eigenvector for the largest eigenvalue.
    pub fn top_vector(&self) -> Vec<C64> {
        self.vectors.column(0)
    }
}

/// Full eigendecomposition of a Hermitian matrix. Any orthonormal basis is
/// returned for degenerate eigenvalues.
pub fn hermitian_eigendecomposition(m: &ComplexMatrix) -> Result<Eigen> {
    let err = m.hermiticity_error();
    if err > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(QfcError::NotHermitian(err));
    }
    Ok(eig_unchecked(m))
}

pub(crate) fn eig_unchecked(m: &ComplexMatrix) -> Eigen {
    let n = m.rows();
    if n == 1 {
        return Eigen { values: vec![m[(0, 0)].re], vectors: ComplexMatrix::identity(1) };
    }
    let sym = SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[b].total_cmp(&sym.eigenvalues[a]));
    let values = order.iter().map(|&k| sym.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = sym.eigenvectors[(i, k)];
        }
    }
    Eigen { values, vectors }
}

/// Eigenvalues only, sorted descending. Input must be Hermitian; only the
/// Hermitian part is used.
pub(crate) fn eigenvalues_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut vals: Vec<f64> = m.hermitian_part().to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let m = ComplexMatrix::from_diagonal(&[0.25, 0.5, 0.25]);
        let e = hermitian_eigendecomposition(&m).unwrap();
        assert!((e.values[0] - 0.5).abs() < 1e-15);
        assert!((e.values[1] - 0.25).abs() < 1e-15);
        assert!((e.values[2] - 0.25).abs() < 1e-15);
        // top eigenvector is e_1 up to phase
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = hermitian_eigendecomposition(&x).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
        let plus = e.top_vector();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let overlap = (plus[0] * s + plus[1] * s).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigendecomposition(&m), Err(QfcError::NotHermitian(_))));
    }
}
