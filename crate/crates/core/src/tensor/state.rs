use super::eig::{eig_unchecked, eigenvalues_unchecked};
use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use super::spec::{IndexSplit, SubsystemSpec};
use super::{check_dimension_cap, permute_axes};
use crate::error::{QfcError, Result};

/// Max tolerated `|M - M†|` entry for a state.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Max tolerated `|Tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue tolerated for a state.
pub const PSD_FLOOR: f64 = -1e-9;
/// Max tolerated `|‖ψ‖² - 1|`.
pub const NORM_TOL: f64 = 1e-12;

/// Density operator over a labeled tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipartiteState {
    spec: SubsystemSpec,
    matrix: ComplexMatrix,
}

impl MultipartiteState {
    /// Validates Hermiticity, unit trace and positivity. Invalid input is rejected.
    pub fn new(spec: SubsystemSpec, matrix: ComplexMatrix) -> Result<Self> {
        let state = Self::shape_checked(spec, matrix)?;
        state.validate()?;
        Ok(state)
    }

    /// Zeroes eigenvalues in `[PSD_FLOOR, 0)` and renormalizes. Anything more
    /// negative is still rejected.
    pub fn clip_and_renormalize(spec: SubsystemSpec, matrix: ComplexMatrix) -> Result<Self> {
        let state = Self::shape_checked(spec, matrix)?;
        let herm = state.matrix.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(QfcError::NotHermitian(herm));
        }
        let eig = eig_unchecked(&state.matrix);
        if let Some(&min) = eig.values.last() {
            if min < PSD_FLOOR {
                return Err(QfcError::InvalidState(format!("eigenvalue {min:e} below floor")));
            }
        }
        let clipped = eig.map_spectrum(|x| x.max(0.0));
        let tr = clipped.trace().re;
        if tr <= 0.0 {
            return Err(QfcError::InvalidState("zero trace after clipping".into()));
        }
        Ok(Self { spec: state.spec, matrix: clipped.scale_real(1.0 / tr) })
    }

    fn shape_checked(spec: SubsystemSpec, matrix: ComplexMatrix) -> Result<Self> {
        let d = spec.total_dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(QfcError::DimensionMismatch(format!(
                "spec {spec} needs a {d}x{d} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { spec, matrix })
    }

    /// For results of operations that preserve the state invariants.
    pub(crate) fn from_parts_unchecked(spec: SubsystemSpec, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(spec.total_dim(), matrix.rows());
        Self { spec, matrix }
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.matrix.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(QfcError::NotHermitian(herm));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QfcError::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue();
        if min < PSD_FLOOR {
            return Err(QfcError::InvalidState(format!("eigenvalue {min:e} below floor")));
        }
        Ok(())
    }

    pub fn single(label: &str, matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows();
        Self::new(SubsystemSpec::single(label, d), matrix)
    }

    pub fn maximally_mixed(spec: SubsystemSpec) -> Self {
        let d = spec.total_dim();
        let m = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
        Self { spec, matrix: m }
    }

    /// `|index⟩⟨index|` in the computational basis.
    pub fn basis(spec: SubsystemSpec, index: usize) -> Result<Self> {
        let d = spec.total_dim();
        if index >= d {
            return Err(QfcError::DimensionMismatch(format!("basis index {index} >= {d}")));
        }
        let mut m = ComplexMatrix::zeros(d, d);
        m[(index, index)] = ONE;
        Ok(Self { spec, matrix: m })
    }

    pub fn spec(&self) -> &SubsystemSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_unchecked(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// `ρ ⊗ σ`. Label sets must be disjoint.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        let spec = self.spec.concat(&other.spec)?;
        check_dimension_cap("tensor product", spec.total_dim())?;
        Ok(Self { spec, matrix: self.matrix.kron(&other.matrix) })
    }

    /// Trace out the labels in `discard`. The remaining labels keep their order.
    pub fn partial_trace(&self, discard: &[&str]) -> Result<Self> {
        let drop = self.spec.positions(discard)?;
        let keep: Vec<usize> = (0..self.spec.len()).filter(|p| !drop.contains(p)).collect();
        Ok(self.trace_keeping_positions(&keep))
    }

    /// Reduced state on `keep`, in the state's label order.
    pub fn reduce_to(&self, keep: &[&str]) -> Result<Self> {
        let mut pos = self.spec.positions(keep)?;
        pos.sort_unstable();
        Ok(self.trace_keeping_positions(&pos))
    }

    fn trace_keeping_positions(&self, keep: &[usize]) -> Self {
        let split = IndexSplit::new(&self.spec.dims(), keep);
        let (dk, dt) = (split.kept_dim, split.traced_dim);
        let n = self.dim();
        let src = self.matrix.as_slice();
        let mut out = vec![ZERO; dk * dk];
        for t in 0..dt {
            let idx = &split.table[t * dk..(t + 1) * dk];
            for (a, &ia) in idx.iter().enumerate() {
                let row = &src[ia * n..(ia + 1) * n];
                let out_row = &mut out[a * dk..(a + 1) * dk];
                for (o, &ib) in out_row.iter_mut().zip(idx) {
                    *o += row[ib];
                }
            }
        }
        Self {
            spec: self.spec.select(keep),
            matrix: ComplexMatrix::from_vec_unchecked(dk, dk, out),
        }
    }

    /// Reorder the tensor factors to `new_order`.
    pub fn permute_subsystems(&self, new_order: &[&str]) -> Result<Self> {
        if new_order.len() != self.spec.len() {
            return Err(QfcError::NotAPermutation(format!(
                "{} labels given for a {}-factor state",
                new_order.len(),
                self.spec.len()
            )));
        }
        let order = self
            .spec
            .positions(new_order)
            .map_err(|e| QfcError::NotAPermutation(e.to_string()))?;
        Ok(self.permute_positions(&order))
    }

    pub(crate) fn permute_positions(&self, order: &[usize]) -> Self {
        let dims = self.spec.dims();
        let k = dims.len();
        let mut axes_dims = dims.clone();
        axes_dims.extend_from_slice(&dims);
        let axes_order: Vec<usize> = order.iter().copied().chain(order.iter().map(|&p| p + k)).collect();
        let data = permute_axes(self.matrix.as_slice(), &axes_dims, &axes_order);
        let n = self.dim();
        Self {
            spec: self.spec.select(order),
            matrix: ComplexMatrix::from_vec_unchecked(n, n, data),
        }
    }

    /// Rename one subsystem.
    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let p = self.spec.position(from).ok_or_else(|| QfcError::UnknownLabel(from.into()))?;
        let factors = self
            .spec
            .factors()
            .iter()
            .enumerate()
            .map(|(i, (l, d))| if i == p { (to.to_string(), *d) } else { (l.clone(), *d) });
        Ok(Self { spec: SubsystemSpec::new(factors)?, matrix: self.matrix.clone() })
    }

    /// Apply `Σ_k K_k (·) K_k†` on the factor `target`, whose dimension becomes
    /// the Kraus output dimension. Label order is preserved.
    pub(crate) fn apply_kraus_on(&self, target: &str, kraus: &[ComplexMatrix]) -> Result<Self> {
        let pos = self.spec.position(target).ok_or_else(|| QfcError::UnknownLabel(target.into()))?;
        let d_in = self.spec.factors()[pos].1;
        let d_out = kraus.first().map_or(d_in, |k| k.rows());
        if kraus.iter().any(|k| k.cols() != d_in || k.rows() != d_out) {
            return Err(QfcError::DimensionMismatch(format!(
                "Kraus operators do not map dimension {d_in} of `{target}`"
            )));
        }
        // bring target to the front
        let mut order = vec![pos];
        order.extend((0..self.spec.len()).filter(|&p| p != pos));
        let front = self.permute_positions(&order);
        let r = front.dim() / d_in;
        let n = front.dim();
        let src = front.matrix.as_slice();
        let m = d_out * r;
        let mut out = vec![ZERO; m * m];
        // out[(o,x),(o',y)] = Σ_{k,k'} K[o,k] ρ[(k,x),(k',y)] conj(K[o',k'])
        let mut tmp = vec![ZERO; m * n];
        for kr in kraus {
            tmp.iter_mut().for_each(|z| *z = ZERO);
            // tmp[(o,x), col] = Σ_k K[o,k] ρ[(k,x), col]
            for o in 0..d_out {
                for k in 0..d_in {
                    let a = kr[(o, k)];
                    if a == ZERO {
                        continue;
                    }
                    for x in 0..r {
                        let dst = &mut tmp[(o * r + x) * n..(o * r + x + 1) * n];
                        let row = &src[(k * r + x) * n..(k * r + x + 1) * n];
                        for (d, s) in dst.iter_mut().zip(row) {
                            *d += a * s;
                        }
                    }
                }
            }
            // out[row, (o',y)] += Σ_k' tmp[row, (k',y)] conj(K[o',k'])
            for row in 0..m {
                let trow = &tmp[row * n..(row + 1) * n];
                let orow = &mut out[row * m..(row + 1) * m];
                for op in 0..d_out {
                    for kp in 0..d_in {
                        let b = kr[(op, kp)].conj();
                        if b == ZERO {
                            continue;
                        }
                        let dst = &mut orow[op * r..(op + 1) * r];
                        let s = &trow[kp * r..(kp + 1) * r];
                        for (d, v) in dst.iter_mut().zip(s) {
                            *d += v * b;
                        }
                    }
                }
            }
        }
        let front_spec = front.spec.with_dim(target, d_out)?;
        let result = Self::from_parts_unchecked(front_spec, ComplexMatrix::from_vec_unchecked(m, m, out));
        // move target back to its original slot
        let mut back = vec![0usize; self.spec.len()];
        for (new_pos, &old_pos) in order.iter().enumerate() {
            back[old_pos] = new_pos;
        }
        Ok(result.permute_positions(&back))
    }

    /// Mixture `Σ w_i ρ_i` of states sharing one spec.
    pub fn mixture(weights: &[f64], states: &[&Self]) -> Result<Self> {
        let first = states.first().ok_or_else(|| QfcError::InvalidState("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(QfcError::DimensionMismatch("weights and states differ in length".into()));
        }
        let d = first.dim();
        let mut acc = vec![ZERO; d * d];
        for (w, s) in weights.iter().zip(states) {
            if s.spec != first.spec {
                return Err(QfcError::DimensionMismatch(format!("spec {} vs {}", s.spec, first.spec)));
            }
            for (a, b) in acc.iter_mut().zip(s.matrix.as_slice()) {
                *a += b * *w;
            }
        }
        Ok(Self::from_parts_unchecked(first.spec.clone(), ComplexMatrix::from_vec_unchecked(d, d, acc)))
    }
}

/// Normalized state vector over a labeled tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    spec: SubsystemSpec,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(spec: SubsystemSpec, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != spec.total_dim() {
            return Err(QfcError::DimensionMismatch(format!(
                "spec {spec} needs {} amplitudes, got {}",
                spec.total_dim(),
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QfcError::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(Self { spec, amplitudes })
    }

    pub(crate) fn from_parts_unchecked(spec: SubsystemSpec, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(spec.total_dim(), amplitudes.len());
        Self { spec, amplitudes }
    }

    /// `|index⟩`.
    pub fn basis(spec: SubsystemSpec, index: usize) -> Result<Self> {
        let d = spec.total_dim();
        if index >= d {
            return Err(QfcError::DimensionMismatch(format!("basis index {index} >= {d}")));
        }
        let mut amps = vec![ZERO; d];
        amps[index] = ONE;
        Ok(Self { spec, amplitudes: amps })
    }

    pub fn spec(&self) -> &SubsystemSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn density(&self) -> MultipartiteState {
        MultipartiteState::from_parts_unchecked(self.spec.clone(), ComplexMatrix::outer(&self.amplitudes))
    }

    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        let spec = self.spec.concat(&other.spec)?;
        let mut amps = Vec::with_capacity(spec.total_dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Ok(Self { spec, amplitudes: amps })
    }

    /// Append a fresh factor in `|0⟩`.
    pub fn with_zero_register(&self, label: &str, dim: usize) -> Result<Self> {
        self.tensor_product(&Self::basis(SubsystemSpec::single(label, dim), 0)?)
    }

    /// Reduced density operator on `keep`, in the state's label order.
    pub fn reduce_to(&self, keep: &[&str]) -> Result<MultipartiteState> {
        let mut pos = self.spec.positions(keep)?;
        pos.sort_unstable();
        let split = IndexSplit::new(&self.spec.dims(), &pos);
        let (dk, dt) = (split.kept_dim, split.traced_dim);
        // column-gather A[k, t] then ρ = A A†
        let mut cols = vec![ZERO; dk * dt];
        for t in 0..dt {
            for k in 0..dk {
                cols[t * dk + k] = self.amplitudes[split.table[t * dk + k]];
            }
        }
        let mut out = vec![ZERO; dk * dk];
        for t in 0..dt {
            let col = &cols[t * dk..(t + 1) * dk];
            for (a, &va) in col.iter().enumerate() {
                if va == ZERO {
                    continue;
                }
                let row = &mut out[a * dk..(a + 1) * dk];
                for (o, vb) in row.iter_mut().zip(col) {
                    *o += va * vb.conj();
                }
            }
        }
        Ok(MultipartiteState::from_parts_unchecked(
            self.spec.select(&pos),
            ComplexMatrix::from_vec_unchecked(dk, dk, out),
        ))
    }

    /// Apply `op` (an isometry from the joint space of `targets`, in that order,
    /// onto the joint space of `outputs`). The output factors are placed first,
    /// followed by the untouched factors in their previous order.
    pub fn apply_isometry(
        &self,
        targets: &[&str],
        op: &ComplexMatrix,
        outputs: &[(String, usize)],
    ) -> Result<Self> {
        let pos = self.spec.positions(targets)?;
        let dims = self.spec.dims();
        let split = IndexSplit::new(&dims, &pos);
        let out_dim: usize = outputs.iter().map(|(_, d)| d).product();
        if op.cols() != split.kept_dim || op.rows() != out_dim {
            return Err(QfcError::DimensionMismatch(format!(
                "operator is {}x{}, targets need {}x{}",
                op.rows(),
                op.cols(),
                out_dim,
                split.kept_dim
            )));
        }
        let rest: Vec<usize> = (0..dims.len()).filter(|p| !pos.contains(p)).collect();
        let out_spec = SubsystemSpec::new(outputs.iter().cloned())?.concat(&self.spec.select(&rest))?;
        let (dk, dt) = (split.kept_dim, split.traced_dim);
        let mut gathered = vec![ZERO; dk];
        let mut amps = vec![ZERO; out_dim * dt];
        let ops = op.as_slice();
        for t in 0..dt {
            for (g, &i) in gathered.iter_mut().zip(&split.table[t * dk..(t + 1) * dk]) {
                *g = self.amplitudes[i];
            }
            for o in 0..out_dim {
                let row = &ops[o * dk..(o + 1) * dk];
                amps[o * dt + t] = row.iter().zip(&gathered).map(|(a, b)| a * b).sum();
            }
        }
        Ok(Self { spec: out_spec, amplitudes: amps })
    }

    pub fn permute_subsystems(&self, new_order: &[&str]) -> Result<Self> {
        if new_order.len() != self.spec.len() {
            return Err(QfcError::NotAPermutation(format!(
                "{} labels given for a {}-factor state",
                new_order.len(),
                self.spec.len()
            )));
        }
        let order = self
            .spec
            .positions(new_order)
            .map_err(|e| QfcError::NotAPermutation(e.to_string()))?;
        Ok(Self {
            spec: self.spec.select(&order),
            amplitudes: permute_axes(&self.amplitudes, &self.spec.dims(), &order),
        })
    }

    /// Apply a unitary on `targets`, keeping their labels and dimensions.
    pub fn apply_unitary(&self, targets: &[&str], u: &ComplexMatrix) -> Result<Self> {
        let pos = self.spec.positions(targets)?;
        let outputs: Vec<(String, usize)> = pos.iter().map(|&p| self.spec.factors()[p].clone()).collect();
        self.apply_isometry(targets, u, &outputs)
    }
}
