//! Memoryless quantum channels in Kraus form, with their Stinespring dilation,
//! complementary channel and Choi state.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QfcError, Result};
use crate::tensor::random::{haar_unitary_with, rng_from_seed};
use crate::tensor::{
    eig_unchecked, maximally_entangled, ComplexMatrix, MultipartiteState, SubsystemSpec, C64, ONE, ZERO,
};

/// Trace-preservation tolerance for channels built in code.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;
/// Looser tolerance applied to channels read from JSON.
pub const JSON_TRACE_PRESERVATION_TOL: f64 = 1e-8;
/// Index of the erasure flag `|e⟩` in the erasure channel's output.
pub const ERASURE_FLAG: usize = 2;

/// A CPTP map `ρ ↦ Σ_k K_k ρ K_k†` from dimension `d_in` to `d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    name: String,
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl QuantumChannel {
    pub fn new(name: impl Into<String>, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(name, kraus, TRACE_PRESERVATION_TOL)
    }

    pub fn with_tolerance(name: impl Into<String>, kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| QfcError::InvalidChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if d_in == 0 || d_out == 0 {
            return Err(QfcError::InvalidChannel("zero dimension".into()));
        }
        if kraus.iter().any(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(QfcError::InvalidChannel("Kraus operators differ in shape".into()));
        }
        if kraus.len() > d_in * d_out {
            return Err(QfcError::InvalidChannel(format!(
                "{} Kraus operators exceed d_in*d_out = {}",
                kraus.len(),
                d_in * d_out
            )));
        }
        let channel = Self { name: name.into(), d_in, d_out, kraus };
        let err = channel.trace_preservation_error();
        if err > tol {
            return Err(QfcError::InvalidChannel(format!(
                "not trace preserving: max |Σ K†K - I| = {err:e}"
            )));
        }
        Ok(channel)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn trace_preservation_error(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            sum = &sum + &k.adjoint().matmul(k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.d_in))
    }

    /// `Σ K m K†` on a bare matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out = &out + &k.sandwich(m);
        }
        out
    }

    /// The adjoint map `X ↦ Σ K† X K`.
    pub fn apply_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            out = &out + &k.adjoint().matmul(x).matmul(k);
        }
        out
    }

    /// `Λ(ρ)` for a single-subsystem state; the output keeps the label.
    pub fn apply(&self, rho: &MultipartiteState) -> Result<MultipartiteState> {
        if rho.spec().len() != 1 || rho.dim() != self.d_in {
            return Err(QfcError::DimensionMismatch(format!(
                "channel `{}` takes one subsystem of dimension {}, got {}",
                self.name,
                self.d_in,
                rho.spec()
            )));
        }
        let label = rho.spec().factors()[0].0.clone();
        Ok(MultipartiteState::from_parts_unchecked(
            SubsystemSpec::single(&label, self.d_out),
            self.apply_matrix(rho.matrix()),
        ))
    }

    /// `(Λ_target ⊗ I_rest)(s)`. The target keeps its position and label.
    pub fn apply_to_subsystem(&self, s: &MultipartiteState, target: &str) -> Result<MultipartiteState> {
        let d = s.spec().dim_of(target)?;
        if d != self.d_in {
            return Err(QfcError::DimensionMismatch(format!(
                "`{target}` has dimension {d}, channel `{}` takes {}",
                self.name, self.d_in
            )));
        }
        s.apply_kraus_on(target, &self.kraus)
    }

    pub fn stinespring(&self) -> StinespringIsometry {
        let d_env = self.kraus.len();
        let mut v = ComplexMatrix::zeros(self.d_out * d_env, self.d_in);
        for (k, kr) in self.kraus.iter().enumerate() {
            for o in 0..self.d_out {
                for j in 0..self.d_in {
                    v[(o * d_env + k, j)] = kr[(o, j)];
                }
            }
        }
        StinespringIsometry { matrix: v, d_in: self.d_in, d_out: self.d_out, d_env }
    }

    /// The channel onto the Stinespring environment: Kraus operators
    /// `F_o[k, j] = K_k[o, j]`.
    pub fn complementary(&self) -> QuantumChannel {
        let d_env = self.kraus.len();
        let kraus = (0..self.d_out)
            .map(|o| {
                let mut f = ComplexMatrix::zeros(d_env, self.d_in);
                for (k, kr) in self.kraus.iter().enumerate() {
                    for j in 0..self.d_in {
                        f[(k, j)] = kr[(o, j)];
                    }
                }
                f
            })
            .collect();
        QuantumChannel {
            name: format!("{}^c", self.name),
            d_in: self.d_in,
            d_out: d_env,
            kraus,
        }
    }

    /// Channel applied to the `in` half of `Σ_j |jj⟩/√d_in`; factors `out`, `ref`.
    pub fn choi(&self) -> ChoiMatrix {
        let phi = maximally_entangled("out", "ref", self.d_in).density();
        let state = phi
            .apply_kraus_on("out", &self.kraus)
            .expect("Kraus shapes checked at construction");
        ChoiMatrix { state }
    }

    /// `⟨Φ⁺| J |Φ⁺⟩` of the Choi state; requires `d_in == d_out`.
    pub fn entanglement_fidelity(&self) -> Result<f64> {
        if self.d_in != self.d_out {
            return Err(QfcError::DimensionMismatch("entanglement fidelity needs d_in == d_out".into()));
        }
        let j = self.choi();
        let phi = maximally_entangled("out", "ref", self.d_in);
        let v = phi.amplitudes();
        let jv = j.state.matrix().matvec(v);
        Ok(v.iter().zip(&jv).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    }

    /// Minimal Kraus family read off the Choi eigendecomposition. Eigenvalues
    /// below `1e-14` are dropped.
    pub fn canonicalize(&self) -> QuantumChannel {
        let choi = self.choi();
        let eig = eig_unchecked(choi.state.matrix());
        let (d_in, d_out) = (self.d_in, self.d_out);
        let kraus: Vec<ComplexMatrix> = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 1e-14)
            .map(|(k, &l)| {
                let w = (d_in as f64 * l).sqrt();
                let mut m = ComplexMatrix::zeros(d_out, d_in);
                for o in 0..d_out {
                    for r in 0..d_in {
                        m[(o, r)] = eig.vectors[(o * d_in + r, k)] * w;
                    }
                }
                m
            })
            .collect();
        QuantumChannel { name: self.name.clone(), d_in, d_out, kraus }
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            name: self.name.clone(),
            d_in: self.d_in,
            d_out: self.d_out,
            kraus: self
                .kraus
                .iter()
                .map(|k| (0..k.rows()).map(|r| k.row(r).iter().map(|z| [z.re, z.im]).collect()).collect())
                .collect(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let parsed: ChannelJson = serde_json::from_str(text).map_err(|e| QfcError::Parse(e.to_string()))?;
        parsed.into_channel()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QfcError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

/// `V|ψ⟩ = Σ_k K_k|ψ⟩ ⊗ |k⟩_env`; rows indexed `(out, env)` big-endian.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringIsometry {
    pub matrix: ComplexMatrix,
    pub d_in: usize,
    pub d_out: usize,
    pub d_env: usize,
}

impl StinespringIsometry {
    pub fn isometry_error(&self) -> f64 {
        self.matrix.unitarity_error()
    }

    /// `V ρ V†` on factors `out`, `env`.
    pub fn dilate(&self, rho: &ComplexMatrix) -> MultipartiteState {
        let spec = SubsystemSpec::new([("out", self.d_out), ("env", self.d_env)]).expect("distinct labels");
        MultipartiteState::from_parts_unchecked(spec, self.matrix.sandwich(rho))
    }
}

/// Normalized Choi state on factors `out` (d_out) and `ref` (d_in).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub state: MultipartiteState,
}

impl ChoiMatrix {
    pub fn spectrum(&self) -> Vec<f64> {
        self.state.eigenvalues()
    }
}

/// Channel file schema: each Kraus operator is a row-major list of rows of
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub name: String,
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelJson {
    pub fn into_channel(self) -> Result<QuantumChannel> {
        let mut ops = Vec::with_capacity(self.kraus.len());
        for (idx, k) in self.kraus.iter().enumerate() {
            if k.len() != self.d_out || k.iter().any(|row| row.len() != self.d_in) {
                return Err(QfcError::Parse(format!(
                    "Kraus operator {idx} is not {}x{}",
                    self.d_out, self.d_in
                )));
            }
            let data = k.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
            ops.push(ComplexMatrix::from_row_major(self.d_out, self.d_in, data)?);
        }
        QuantumChannel::with_tolerance(self.name, ops, JSON_TRACE_PRESERVATION_TOL)
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(QfcError::ParameterOutOfRange(format!("{name} = {x} not in [0, 1]")));
    }
    Ok(())
}

fn pauli(which: char) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    let data = match which {
        'I' => vec![ONE, ZERO, ZERO, ONE],
        'X' => vec![ZERO, ONE, ONE, ZERO],
        'Y' => vec![ZERO, -i, i, ZERO],
        'Z' => vec![ONE, ZERO, ZERO, -ONE],
        _ => unreachable!("not a Pauli label"),
    };
    ComplexMatrix::from_row_major(2, 2, data).expect("2x2")
}

/// Pauli matrices `I, X, Y, Z`.
pub fn paulis() -> [ComplexMatrix; 4] {
    [pauli('I'), pauli('X'), pauli('Y'), pauli('Z')]
}

/// Weyl operators `X^a Z^b` on dimension `d`, ordered `(a, b)` lexicographically.
pub fn weyl_operators(d: usize) -> Vec<ComplexMatrix> {
    let omega = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64);
    let mut ops = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut m = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                // X^a Z^b |j⟩ = ω^{bj} |j+a⟩
                m[((j + a) % d, j)] = omega((b * j) % d);
            }
            ops.push(m);
        }
    }
    ops
}

pub fn identity(d: usize) -> Result<QuantumChannel> {
    if d == 0 {
        return Err(QfcError::ParameterOutOfRange("dimension 0".into()));
    }
    QuantumChannel::new("identity", vec![ComplexMatrix::identity(d)])
}

/// Qubit erasure: with probability `ε` the input is replaced by the flag `|e⟩`
/// (output index 2).
pub fn qubit_erasure(epsilon: f64) -> Result<QuantumChannel> {
    check_unit_interval("erasure probability", epsilon)?;
    let keep = (1.0 - epsilon).sqrt();
    let lose = epsilon.sqrt();
    let mut embed = ComplexMatrix::zeros(3, 2);
    embed[(0, 0)] = C64::new(keep, 0.0);
    embed[(1, 1)] = C64::new(keep, 0.0);
    let mut e0 = ComplexMatrix::zeros(3, 2);
    e0[(ERASURE_FLAG, 0)] = C64::new(lose, 0.0);
    let mut e1 = ComplexMatrix::zeros(3, 2);
    e1[(ERASURE_FLAG, 1)] = C64::new(lose, 0.0);
    QuantumChannel::new("erasure", vec![embed, e0, e1])
}

/// Mixing probability `p` of `ρ ↦ pρ + (1-p) I/2` for entanglement fidelity `F`.
pub fn depolarizing_mixing_from_fidelity(fidelity: f64) -> f64 {
    (4.0 * fidelity - 1.0) / 3.0
}

pub fn depolarizing_fidelity_from_mixing(p: f64) -> f64 {
    (3.0 * p + 1.0) / 4.0
}

/// Qubit depolarizing channel with entanglement fidelity `F ∈ [1/4, 1]`:
/// Kraus `√F I, √((1-F)/3) {X, Y, Z}`.
pub fn depolarizing(fidelity: f64) -> Result<QuantumChannel> {
    if !(0.25..=1.0).contains(&fidelity) {
        return Err(QfcError::ParameterOutOfRange(format!(
            "entanglement fidelity {fidelity} not in [0.25, 1]"
        )));
    }
    let q = (1.0 - fidelity) / 3.0;
    let [i, x, y, z] = paulis();
    QuantumChannel::new(
        "depolarizing",
        vec![i.scale_real(fidelity.sqrt()), x.scale_real(q.sqrt()), y.scale_real(q.sqrt()), z.scale_real(q.sqrt())],
    )
}

/// `ρ ↦ (1-p) ρ + p ZρZ`.
pub fn dephasing(p: f64) -> Result<QuantumChannel> {
    check_unit_interval("dephasing probability", p)?;
    let [i, _, _, z] = paulis();
    QuantumChannel::new("dephasing", vec![i.scale_real((1.0 - p).sqrt()), z.scale_real(p.sqrt())])
}

/// Random channel from the first `d_in` columns of a Haar unitary on
/// `d_out * n_kraus` dimensions.
pub fn random_channel_with<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    n_kraus: usize,
    rng: &mut R,
) -> Result<QuantumChannel> {
    if d_in == 0 || d_out == 0 || n_kraus == 0 || n_kraus > d_in * d_out || d_in > d_out * n_kraus {
        return Err(QfcError::ParameterOutOfRange(format!(
            "cannot build a {d_in}->{d_out} channel with {n_kraus} Kraus operators"
        )));
    }
    let u = haar_unitary_with(d_out * n_kraus, rng);
    let kraus = (0..n_kraus)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(d_out, d_in);
            for o in 0..d_out {
                for j in 0..d_in {
                    m[(o, j)] = u[(o * n_kraus + k, j)];
                }
            }
            m
        })
        .collect();
    QuantumChannel::new("random", kraus)
}

pub fn random_channel(d_in: usize, d_out: usize, n_kraus: usize, seed: u64) -> Result<QuantumChannel> {
    random_channel_with(d_in, d_out, n_kraus, &mut rng_from_seed(seed))
}

/// Named channel constructor used by the CLI: `identity` (uses `dim`),
/// `erasure` (ε), `depolarizing` (F), `dephasing` (p).
pub fn by_name(name: &str, param: Option<f64>, dim: Option<usize>) -> Result<QuantumChannel> {
    let need = |what: &str| {
        param.ok_or_else(|| QfcError::ParameterOutOfRange(format!("channel `{name}` needs a {what} parameter")))
    };
    match name {
        "identity" => identity(dim.unwrap_or(2)),
        "erasure" => qubit_erasure(need("erasure probability")?),
        "depolarizing" => depolarizing(need("entanglement fidelity")?),
        "dephasing" => dephasing(need("dephasing probability")?),
        other => Err(QfcError::ParameterOutOfRange(format!("unknown channel `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{binary_entropy, von_neumann_entropy};
    use crate::tensor::bell_state;

    fn qubit_mixed() -> MultipartiteState {
        MultipartiteState::maximally_mixed(SubsystemSpec::single("A", 2))
    }

    #[test]
    fn identity_leaves_input() {
        let rho = crate::tensor::random_density_matrix(2, 2, 3).unwrap();
        let out = identity(2).unwrap().apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn erasure_on_maximally_mixed() {
        let out = qubit_erasure(0.5).unwrap().apply(&qubit_mixed()).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[0.25, 0.25, 0.5]);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
        assert!((von_neumann_entropy(&out).unwrap().bits() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn fully_depolarizing_outputs_maximally_mixed() {
        let ch = depolarizing(0.25).unwrap();
        for seed in 0..5 {
            let psi = crate::tensor::random_density_matrix(2, 1, seed).unwrap();
            let out = ch.apply(&psi).unwrap();
            assert!(out.matrix().max_abs_diff(qubit_mixed().matrix()) < 1e-15);
        }
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let rho = MultipartiteState::maximally_mixed(SubsystemSpec::single("A", 3));
        assert!(matches!(identity(2).unwrap().apply(&rho), Err(QfcError::DimensionMismatch(_))));
    }

    #[test]
    fn full_erasure_on_bell_half() {
        let phi = bell_state("A", "B").density();
        let out = qubit_erasure(1.0).unwrap().apply_to_subsystem(&phi, "B").unwrap();
        let flag = MultipartiteState::basis(SubsystemSpec::single("B", 3), ERASURE_FLAG).unwrap();
        let expected = qubit_mixed().tensor_product(&flag).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) < 1e-15);
        assert_eq!(out.spec(), expected.spec());
    }

    #[test]
    fn partial_erasure_on_bell_half_entropy() {
        for eps in [0.1, 0.3, 0.5, 0.9] {
            let phi = bell_state("A", "B").density();
            let out = qubit_erasure(eps).unwrap().apply_to_subsystem(&phi, "B").unwrap();
            let s = von_neumann_entropy(&out).unwrap().bits();
            assert!((s - (binary_entropy(eps) + eps)).abs() < 1e-10, "eps={eps}");
        }
    }

    #[test]
    fn apply_to_subsystem_unknown_label() {
        let phi = bell_state("A", "B").density();
        assert!(matches!(
            identity(2).unwrap().apply_to_subsystem(&phi, "C"),
            Err(QfcError::UnknownLabel(_))
        ));
    }

    #[test]
    fn identity_dilation_is_trivial() {
        let ch = identity(2).unwrap();
        let v = ch.stinespring();
        assert_eq!(v.d_env, 1);
        let comp = ch.complementary();
        assert_eq!(comp.d_out(), 1);
        let out = comp.apply_matrix(&crate::tensor::random_density_matrix(2, 2, 1).unwrap().matrix().clone());
        assert!((out[(0, 0)] - ONE).norm() < 1e-14);
    }

    #[test]
    fn identity_choi_is_bell_projector() {
        let j = identity(2).unwrap().choi();
        let phi = bell_state("out", "ref").density();
        assert!(j.state.matrix().max_abs_diff(phi.matrix()) < 1e-15);
    }

    #[test]
    fn depolarizing_choi_spectrum() {
        for f in [0.25, 0.4, 0.75, 1.0] {
            let spec = depolarizing(f).unwrap().choi().spectrum();
            let q = (1.0 - f) / 3.0;
            let mut expected = vec![f, q, q, q];
            expected.sort_by(|a, b| b.total_cmp(a));
            for (a, b) in spec.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "F={f}: {spec:?}");
            }
            assert!((depolarizing(f).unwrap().entanglement_fidelity().unwrap() - f).abs() < 1e-12);
        }
    }

    #[test]
    fn constructor_endpoints() {
        let e0 = qubit_erasure(0.0).unwrap();
        let rho = crate::tensor::random_density_matrix(2, 2, 4).unwrap();
        let out = e0.apply_matrix(rho.matrix());
        for i in 0..2 {
            for j in 0..2 {
                assert!((out[(i, j)] - rho.matrix()[(i, j)]).norm() < 1e-15);
            }
        }
        assert!(out[(2, 2)].norm() < 1e-15);
        let d1 = depolarizing(1.0).unwrap();
        assert!(d1.apply_matrix(rho.matrix()).max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn parameter_ranges() {
        assert!(qubit_erasure(-0.1).is_err());
        assert!(qubit_erasure(1.1).is_err());
        assert!(depolarizing(0.2).is_err());
        assert!(depolarizing(1.01).is_err());
        assert!(dephasing(2.0).is_err());
    }

    #[test]
    fn mixing_conversion_round_trip() {
        for f in [0.25, 0.5, 0.8, 1.0] {
            let p = depolarizing_mixing_from_fidelity(f);
            assert!((depolarizing_fidelity_from_mixing(p) - f).abs() < 1e-15);
        }
        assert_eq!(depolarizing_mixing_from_fidelity(0.25), 0.0);
        assert_eq!(depolarizing_mixing_from_fidelity(1.0), 1.0);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let k = ComplexMatrix::identity(2).scale_real(0.9);
        assert!(matches!(QuantumChannel::new("bad", vec![k]), Err(QfcError::InvalidChannel(_))));
    }

    #[test]
    fn json_round_trip_and_rejection() {
        let ch = depolarizing(0.6).unwrap();
        let text = serde_json::to_string(&ch.to_json()).unwrap();
        let back = QuantumChannel::from_json_str(&text).unwrap();
        assert_eq!(back, ch);

        let bad = r#"{"name":"x","d_in":2,"d_out":2,"kraus":[[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.99,0.0]]]]}"#;
        assert!(matches!(QuantumChannel::from_json_str(bad), Err(QfcError::InvalidChannel(_))));
        let shape = r#"{"name":"x","d_in":2,"d_out":2,"kraus":[[[[1.0,0.0]],[[0.0,0.0],[1.0,0.0]]]]}"#;
        assert!(matches!(QuantumChannel::from_json_str(shape), Err(QfcError::Parse(_))));
        // within the 1e-8 file tolerance
        let loose = r#"{"name":"x","d_in":1,"d_out":1,"kraus":[[[[1.000000001,0.0]]]]}"#;
        assert!(QuantumChannel::from_json_str(loose).is_ok());
    }

    #[test]
    fn weyl_operators_are_unitary_and_distinct() {
        let ops = weyl_operators(3);
        assert_eq!(ops.len(), 9);
        for op in &ops {
            assert!(op.unitarity_error() < 1e-14);
        }
        // pairwise trace-orthogonal
        for a in 0..9 {
            for b in 0..9 {
                let t = ops[a].adjoint().trace_product(&ops[b]).norm();
                let expected = if a == b { 3.0 } else { 0.0 };
                assert!((t - expected).abs() < 1e-12);
            }
        }
    }
}
