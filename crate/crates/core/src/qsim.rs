//! Dense states and density operators on the bipartite query ⊗ answer
//! register.
//!
//! Basis index of `|x⟩|a⟩` is `x · 2^answer_qubits + a`; the query register
//! is always the first tensor factor.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, ALGEBRAIC_TOL, C64, EIGEN_TOL, MAX_DENSE_DIM};

/// d⊗d layouts square the dense dimension, so they stop at six query qubits.
pub const MAX_DXD_QUBITS: usize = 6;

/// State vectors up to `2^24` amplitudes.
pub const MAX_STATE_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One answer qubit.
    Minimal,
    /// As many answer qubits as query qubits; the oracle writes the last one.
    Dxd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterLayout {
    query_qubits: usize,
    answer_qubits: usize,
}

impl RegisterLayout {
    pub fn new(query_qubits: usize, mode: Mode) -> Result<Self> {
        if query_qubits == 0 {
            return Err(Error::InvalidArgument("empty query register".into()));
        }
        let answer_qubits = match mode {
            Mode::Minimal => 1,
            Mode::Dxd => {
                if query_qubits > MAX_DXD_QUBITS {
                    return Err(Error::CapExceeded {
                        what: "query qubits in d⊗d mode",
                        value: query_qubits as u64,
                        cap: MAX_DXD_QUBITS as u64,
                    });
                }
                query_qubits
            }
        };
        if query_qubits + answer_qubits > MAX_STATE_QUBITS {
            return Err(Error::CapExceeded {
                what: "register qubits",
                value: (query_qubits + answer_qubits) as u64,
                cap: MAX_STATE_QUBITS as u64,
            });
        }
        Ok(Self { query_qubits, answer_qubits })
    }

    pub fn minimal(query_qubits: usize) -> Result<Self> {
        Self::new(query_qubits, Mode::Minimal)
    }

    pub fn dxd(query_qubits: usize) -> Result<Self> {
        Self::new(query_qubits, Mode::Dxd)
    }

    /// At `n = 1` both layouts coincide and report `Minimal`.
    pub fn mode(&self) -> Mode {
        if self.answer_qubits == 1 {
            Mode::Minimal
        } else {
            Mode::Dxd
        }
    }

    pub fn query_qubits(&self) -> usize {
        self.query_qubits
    }

    pub fn answer_qubits(&self) -> usize {
        self.answer_qubits
    }

    pub fn query_dim(&self) -> usize {
        1 << self.query_qubits
    }

    pub fn answer_dim(&self) -> usize {
        1 << self.answer_qubits
    }

    /// `D = 2^(query + answer)`.
    pub fn dim(&self) -> usize {
        self.query_dim() * self.answer_dim()
    }

    pub fn index(&self, query: u64, answer: u64) -> usize {
        (query as usize) * self.answer_dim() + answer as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: RegisterLayout,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(layout: RegisterLayout, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} amplitudes", layout.dim()),
                actual: amplitudes.len().to_string(),
            });
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { layout, amplitudes })
    }

    /// `2^(-n/2) Σ_x |x⟩|0…0⟩`.
    pub fn uniform_superposition(layout: RegisterLayout) -> Self {
        let amp = c64((layout.query_dim() as f64).sqrt().recip(), 0.0);
        let mut amplitudes = DVector::zeros(layout.dim());
        for x in 0..layout.query_dim() as u64 {
            amplitudes[layout.index(x, 0)] = amp;
        }
        Self { layout, amplitudes }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &PureState) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch {
                expected: format!("{:?}", self.layout),
                actual: format!("{:?}", other.layout),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Reduced operator of one register, computed straight from the
    /// amplitudes without forming `|ψ⟩⟨ψ|`.
    pub fn marginal(&self, keep: Subsystem) -> DensityOp {
        let (dq, da) = (self.layout.query_dim(), self.layout.answer_dim());
        let amp = |q: usize, a: usize| self.amplitudes[q * da + a];
        let matrix = match keep {
            Subsystem::A => CMatrix::from_fn(dq, dq, |r, c| (0..da).map(|a| amp(r, a) * amp(c, a).conj()).sum()),
            Subsystem::B => CMatrix::from_fn(da, da, |r, c| (0..dq).map(|q| amp(q, r) * amp(q, c).conj()).sum()),
        };
        let dims = match keep {
            Subsystem::A => (dq, 1),
            Subsystem::B => (1, da),
        };
        DensityOp { dims, matrix }
    }
}

/// Selects one side of a bipartite operator. `A` is the query register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Hermitian, unit-trace, positive semidefinite operator on `d_A ⊗ d_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp {
    dims: (usize, usize),
    matrix: CMatrix,
}

impl DensityOp {
    /// Validates Hermiticity and trace to `1e-12` and the smallest
    /// eigenvalue against `-1e-10`.
    pub fn new(dims: (usize, usize), matrix: CMatrix) -> Result<Self> {
        let dim = dims.0 * dims.1;
        if dims.0 == 0 || dims.1 == 0 || matrix.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: format!("{dim}x{dim} for dims {dims:?}"),
                actual: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        check_dense_cap(dim)?;
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > ALGEBRAIC_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (defect {defect:e})")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > ALGEBRAIC_TOL || trace.im.abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} differs from 1")));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -EIGEN_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { dims, matrix })
    }

    /// For constructions that are positive and unit-trace by design.
    pub(crate) fn from_parts(dims: (usize, usize), matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.0 * dims.1);
        Self { dims, matrix }
    }

    /// `|ψ⟩⟨ψ|` with dims `(query_dim, answer_dim)`.
    pub fn from_state(state: &PureState) -> Result<Self> {
        let norm = state.norm_squared();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::NotNormalized(norm));
        }
        check_dense_cap(state.layout.dim())?;
        let psi = &state.amplitudes;
        Ok(Self { dims: (state.layout.query_dim(), state.layout.answer_dim()), matrix: psi * psi.adjoint() })
    }

    /// `|i⟩⟨i|` on a `d_a ⊗ d_b` space.
    pub fn basis(dims: (usize, usize), i: usize) -> Result<Self> {
        let dim = dims.0 * dims.1;
        if i >= dim {
            return Err(Error::InvalidArgument(format!("basis index {i} >= {dim}")));
        }
        check_dense_cap(dim)?;
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix[(i, i)] = c64(1.0, 0.0);
        Ok(Self { dims, matrix })
    }

    /// `I / dim`.
    pub fn maximally_mixed(dims: (usize, usize)) -> Result<Self> {
        let dim = dims.0 * dims.1;
        check_dense_cap(dim)?;
        Ok(Self { dims, matrix: CMatrix::identity(dim, dim) * c64(1.0 / dim as f64, 0.0) })
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        let mut matrix = CMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            matrix[(r, c)] = c64(0.5, 0.0);
        }
        Self { dims: (2, 2), matrix }
    }

    /// `ρ_A ⊗ ρ_B` of two single-system operators (their dims' products
    /// become the factor dimensions).
    pub fn product(a: &DensityOp, b: &DensityOp) -> Result<Self> {
        let dims = (a.dim(), b.dim());
        check_dense_cap(dims.0 * dims.1)?;
        Ok(Self { dims, matrix: a.matrix.kronecker(&b.matrix) })
    }

    /// `2^-n [(2^n - k)|0⟩⟨0| + k|1⟩⟨1|]`, the answer register after a
    /// full superposition meets an oracle with `k` marked inputs.
    pub fn answer_closed_form(num_qubits: usize, solutions: u64) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 62 {
            return Err(Error::InvalidArgument(format!("qubit count {num_qubits} out of range")));
        }
        let size = 1u64 << num_qubits;
        if solutions > size {
            return Err(Error::InvalidArgument(format!("k = {solutions} exceeds 2^{num_qubits}")));
        }
        let one = solutions as f64 / size as f64;
        let zero = (size - solutions) as f64 / size as f64;
        let mut matrix = CMatrix::zeros(2, 2);
        matrix[(0, 0)] = c64(zero, 0.0);
        matrix[(1, 1)] = c64(one, 0.0);
        Ok(Self { dims: (1, 2), matrix })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    /// `Tr_other(ρ)`. The result is a single-factor operator whose dims put
    /// the kept dimension on the same side.
    pub fn partial_trace(&self, keep: Subsystem) -> DensityOp {
        let (da, db) = self.dims;
        let keep_mask = match keep {
            Subsystem::A => [true, false],
            Subsystem::B => [false, true],
        };
        let matrix = linalg::partial_trace(&self.matrix, &[da, db], &keep_mask);
        let dims = match keep {
            Subsystem::A => (da, 1),
            Subsystem::B => (1, db),
        };
        DensityOp { dims, matrix }
    }

    /// Marginal of the last qubit of subsystem B. In d⊗d mode this is the
    /// qubit the oracle writes.
    pub fn last_qubit_marginal(&self) -> Result<DensityOp> {
        let (da, db) = self.dims;
        if db < 2 || !db.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: "subsystem B made of qubits".into(),
                actual: db.to_string(),
            });
        }
        let matrix = linalg::partial_trace(&self.matrix, &[da, db / 2, 2], &[false, false, true]);
        Ok(DensityOp { dims: (1, 2), matrix })
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `(1 - p)ρ + p I/dim`.
    pub fn depolarize(&self, p: f64) -> Result<DensityOp> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("mixing weight {p} outside [0, 1]")));
        }
        let dim = self.dim();
        let matrix = &self.matrix * c64(1.0 - p, 0.0) + CMatrix::identity(dim, dim) * c64(p / dim as f64, 0.0);
        Ok(DensityOp { dims: self.dims, matrix })
    }

    /// Convex combination `Σ w_i ρ_i`; weights must be non-negative and sum
    /// to one.
    pub fn mixture(parts: &[(f64, DensityOp)]) -> Result<DensityOp> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::InvalidArgument("empty mixture".into()));
        };
        let dims = first.dims;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, r)| *w < 0.0 || r.dims != dims) || (total - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::InvalidArgument("mixture weights or dims invalid".into()));
        }
        let mut matrix = CMatrix::zeros(first.dim(), first.dim());
        for (w, r) in parts {
            matrix += &r.matrix * c64(*w, 0.0);
        }
        Ok(DensityOp { dims, matrix })
    }
}

fn check_dense_cap(dim: usize) -> Result<()> {
    if dim > MAX_DENSE_DIM {
        return Err(Error::CapExceeded {
            what: "dense matrix dimension",
            value: dim as u64,
            cap: MAX_DENSE_DIM as u64,
        });
    }
    Ok(())
}

/// Row-major JSON form: `{"dims": [dA, dB], "matrix": [[[re, im], …], …]}`.
#[derive(Serialize, Deserialize)]
struct DensityRepr {
    dims: (usize, usize),
    matrix: Vec<Vec<[f64; 2]>>,
}

impl Serialize for DensityOp {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let matrix = self.matrix.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect();
        DensityRepr { dims: self.dims, matrix }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOp {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DensityRepr::deserialize(deserializer)?;
        let dim = repr.matrix.len();
        if repr.matrix.iter().any(|row| row.len() != dim) {
            return Err(serde::de::Error::custom("matrix is not square"));
        }
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            let [re, im] = repr.matrix[r][c];
            c64(re, im)
        });
        DensityOp::new(repr.dims, matrix).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize)]
struct StateRepr {
    layout: RegisterLayout,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr { layout: self.layout, amplitudes: self.amplitudes.iter().map(|z| [z.re, z.im]).collect() }
            .serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn approx(a: C64, re: f64) -> bool {
        (a.re - re).abs() < 1e-15 && a.im.abs() < 1e-15
    }

    #[test]
    fn uniform_superposition_one_qubit() {
        let psi = PureState::uniform_superposition(RegisterLayout::minimal(1).unwrap());
        let expect = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0];
        for (a, e) in psi.amplitudes().iter().zip(expect) {
            assert!(approx(*a, e));
        }
    }

    #[test]
    fn uniform_superposition_two_qubits() {
        let psi = PureState::uniform_superposition(RegisterLayout::minimal(2).unwrap());
        for (i, a) in psi.amplitudes().iter().enumerate() {
            assert!(approx(*a, if i % 2 == 0 { 0.5 } else { 0.0 }));
        }
    }

    #[test]
    fn empty_query_register_rejected() {
        assert!(RegisterLayout::minimal(0).is_err());
        assert!(matches!(RegisterLayout::dxd(7), Err(Error::CapExceeded { .. })));
        let l = RegisterLayout::dxd(3).unwrap();
        assert_eq!((l.answer_qubits(), l.dim()), (3, 64));
    }

    #[test]
    fn density_of_basis_and_plus() {
        let l = RegisterLayout::minimal(1).unwrap();
        let mut v = DVector::zeros(4);
        v[0] = c64(1.0, 0.0);
        let rho = DensityOp::from_state(&PureState::new(l, v).unwrap()).unwrap();
        assert!(approx(rho.matrix()[(0, 0)], 1.0));
        assert_eq!(rho.matrix().iter().filter(|z| z.norm() > 0.0).count(), 1);

        let mut v = DVector::zeros(4);
        v[0] = c64(FRAC_1_SQRT_2, 0.0);
        v[1] = c64(FRAC_1_SQRT_2, 0.0);
        let rho = DensityOp::from_state(&PureState::new(l, v).unwrap()).unwrap();
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((rho.matrix()[(r, c)].re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn density_rejects_unnormalized() {
        let l = RegisterLayout::minimal(1).unwrap();
        let v = DVector::from_element(4, c64(1.0, 0.0));
        assert!(matches!(PureState::new(l, v.clone()), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let half = DensityOp::bell().partial_trace(Subsystem::B);
        let expected = CMatrix::identity(2, 2) * c64(0.5, 0.0);
        assert!(linalg::max_abs_diff(half.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn product_state_reduces_to_factor() {
        let zero = DensityOp::basis((1, 2), 0).unwrap();
        let one = DensityOp::basis((1, 2), 1).unwrap();
        let prod = DensityOp::product(&zero, &one).unwrap();
        assert_eq!(prod.partial_trace(Subsystem::B).matrix(), one.matrix());
        assert_eq!(prod.partial_trace(Subsystem::A).matrix(), zero.matrix());
    }

    #[test]
    fn closed_form_examples() {
        let cases = [(3, 0, 1.0, 0.0), (3, 8, 0.0, 1.0), (2, 1, 0.75, 0.25)];
        for (n, k, p0, p1) in cases {
            let r = DensityOp::answer_closed_form(n, k).unwrap();
            assert!(approx(r.matrix()[(0, 0)], p0) && approx(r.matrix()[(1, 1)], p1));
            assert_eq!(r.matrix()[(0, 1)], c64(0.0, 0.0));
        }
        assert!(DensityOp::answer_closed_form(2, 5).is_err());
    }

    #[test]
    fn purity_examples() {
        assert!((DensityOp::basis((1, 2), 0).unwrap().purity() - 1.0).abs() < 1e-15);
        assert!((DensityOp::maximally_mixed((1, 2)).unwrap().purity() - 0.5).abs() < 1e-15);
        let r = DensityOp::answer_closed_form(2, 1).unwrap();
        // (3/4)² + (1/4)²
        assert!((r.purity() - (0.75f64.powi(2) + 0.25f64.powi(2))).abs() < 1e-15);
        assert!((r.purity() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn depolarize_examples() {
        let bell = DensityOp::bell();
        assert_eq!(bell.depolarize(0.0).unwrap().matrix(), bell.matrix());
        let mixed = bell.depolarize(1.0).unwrap();
        assert!(linalg::max_abs_diff(mixed.matrix(), DensityOp::maximally_mixed((2, 2)).unwrap().matrix()) < 1e-15);
        // Oracle: the Bell projector has spectrum {1,0,0,0}, so the mixture
        // has 0.5·{1,0,0,0} + 0.5·{1/4,1/4,1/4,1/4}.
        let ev = bell.depolarize(0.5).unwrap().eigenvalues();
        let expected = [0.125, 0.125, 0.125, 0.625];
        for (e, x) in ev.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "{ev:?}");
        }
        assert!(bell.depolarize(1.5).is_err());
    }

    #[test]
    fn new_rejects_invalid_matrices() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c64(0.5, 0.0);
        m[(1, 1)] = c64(0.5, 0.0);
        m[(0, 1)] = c64(0.1, 0.0);
        assert!(DensityOp::new((1, 2), m.clone()).is_err());
        m[(1, 0)] = c64(0.1, 0.0);
        assert!(DensityOp::new((1, 2), m.clone()).is_ok());
        m[(0, 0)] = c64(0.6, 0.0);
        assert!(DensityOp::new((1, 2), m.clone()).is_err());
        let neg = CMatrix::from_diagonal(&DVector::from_vec(vec![c64(1.2, 0.0), c64(-0.2, 0.0)]));
        assert!(DensityOp::new((1, 2), neg).is_err());
        assert!(DensityOp::new((2, 2), CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let rho = DensityOp::bell().depolarize(0.3).unwrap();
        let text = serde_json::to_string(&rho).unwrap();
        assert!(text.starts_with("{\"dims\":[2,2],\"matrix\":[[[0.425,0.0]"));
        let back: DensityOp = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rho);
        assert!(serde_json::from_str::<DensityOp>("{\"dims\":[1,2],\"matrix\":[[[1,0],[0,0]],[[0,0],[1,0]]]}").is_err());
    }

    #[test]
    fn inner_products() {
        let l = RegisterLayout::minimal(2).unwrap();
        let psi = PureState::uniform_superposition(l);
        assert!((psi.inner_product(&psi).unwrap() - c64(1.0, 0.0)).norm() < 1e-15);
        let mut a = DVector::zeros(8);
        a[0] = c64(1.0, 0.0);
        let mut b = DVector::zeros(8);
        b[2] = c64(0.0, 1.0);
        let (a, b) = (PureState::new(l, a).unwrap(), PureState::new(l, b).unwrap());
        assert_eq!(a.inner_product(&b).unwrap(), c64(0.0, 0.0));
        let other = PureState::uniform_superposition(RegisterLayout::minimal(1).unwrap());
        assert!(psi.inner_product(&other).is_err());
    }
}
