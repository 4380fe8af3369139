//! Seeded random states and unitaries (Ginibre / Haar).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, C64};
use super::spec::SubsystemSpec;
use super::state::{MultipartiteState, PureState};
use crate::error::{QfcError, Result};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::from_vec_unchecked(rows, cols, data)
}

/// Haar-distributed unitary: QR of a square Ginibre sample, with the phases of
/// `R`'s diagonal pushed into `Q`.
pub fn haar_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let qr = g.to_nalgebra().qr();
    let (q, r) = (qr.q(), qr.r());
    let mut fixed: DMatrix<C64> = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            fixed[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&fixed)
}

pub fn random_haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_with(dim, &mut rng_from_seed(seed))
}

/// `G G† / Tr(G G†)` for a `dim x rank` Ginibre factor `G`.
pub fn random_state_with<R: Rng + ?Sized>(
    spec: SubsystemSpec,
    rank: usize,
    rng: &mut R,
) -> Result<MultipartiteState> {
    let dim = spec.total_dim();
    if rank == 0 || rank > dim {
        return Err(QfcError::ParameterOutOfRange(format!("rank {rank} not in 1..={dim}")));
    }
    let g = ginibre(dim, rank, rng);
    let gg = g.matmul(&g.adjoint());
    let tr = gg.trace().re;
    Ok(MultipartiteState::from_parts_unchecked(spec, gg.scale_real(1.0 / tr)))
}

/// Random density matrix on a single subsystem labeled `A`.
pub fn random_density_matrix(dim: usize, rank: usize, seed: u64) -> Result<MultipartiteState> {
    if dim == 0 {
        return Err(QfcError::ParameterOutOfRange("dimension 0".into()));
    }
    random_state_with(SubsystemSpec::single("A", dim), rank, &mut rng_from_seed(seed))
}

/// Haar-random pure state.
pub fn random_pure_with<R: Rng + ?Sized>(spec: SubsystemSpec, rng: &mut R) -> PureState {
    let g = ginibre(spec.total_dim(), 1, rng).into_vec();
    let n = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    PureState::from_parts_unchecked(spec, g.into_iter().map(|z| z / n).collect())
}

/// Random Hermitian matrix with Gaussian entries (GUE-like).
pub fn random_hermitian_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(dim, dim, rng).hermitian_part()
}

/// Uniform point on the probability simplex with `n` entries.
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
