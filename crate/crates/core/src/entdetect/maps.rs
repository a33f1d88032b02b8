//! Linear maps on `M_d`, their Choi states, and the structural physical
//! approximation (SPA) that mixes `id ⊗ Λ` with full depolarization.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, ALGEBRAIC_TOL, EIGEN_TOL};
use crate::qsim::DensityOp;

/// Largest local dimension for which Choi states (side `d^4`) are built by
/// default.
pub const DEFAULT_MAX_MAP_DIM: usize = 4;

/// Hard ceiling: side `8^4 = 4096` matches the simulator's dense cap.
pub const MAX_MAP_DIM: usize = 8;

/// Bisection steps when searching the minimal SPA mixing weight.
pub const BISECTION_STEPS: usize = 50;

/// Product states used to check positivity of a user-supplied map.
const POSITIVITY_SAMPLES: usize = 256;

/// A Hermiticity-preserving linear map `M_d → M_d`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap {
    Identity(usize),
    Transpose(usize),
    /// Given by its unnormalized Choi matrix `J = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`.
    Custom {
        d: usize,
        choi: CMatrix,
    },
}

impl LinearMap {
    pub fn dim(&self) -> usize {
        match self {
            LinearMap::Identity(d) | LinearMap::Transpose(d) => *d,
            LinearMap::Custom { d, .. } => *d,
        }
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        match self {
            LinearMap::Identity(_) => x.clone(),
            LinearMap::Transpose(_) => x.transpose(),
            LinearMap::Custom { d, choi } => {
                let d = *d;
                let mut out = CMatrix::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        let w = x[(i, j)];
                        if w != c64(0.0, 0.0) {
                            out += choi.view((i * d, j * d), (d, d)) * w;
                        }
                    }
                }
                out
            }
        }
    }

    /// `J = Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`.
    pub fn choi_matrix(&self) -> CMatrix {
        if let LinearMap::Custom { choi, .. } = self {
            return choi.clone();
        }
        let d = self.dim();
        let mut j = CMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                let mut unit = CMatrix::zeros(d, d);
                unit[(a, b)] = c64(1.0, 0.0);
                j.view_mut((a * d, b * d), (d, d)).copy_from(&self.apply(&unit));
            }
        }
        j
    }

    /// `(id_d ⊗ Λ)` on an operator over `d_a ⊗ d`.
    pub fn apply_second_factor(&self, m: &CMatrix, d_a: usize) -> CMatrix {
        match self {
            LinearMap::Transpose(d) => linalg::partial_transpose_b(m, d_a, *d),
            _ => linalg::apply_to_second_factor(m, d_a, self.dim(), |block| self.apply(block)),
        }
    }
}

/// A positive but not completely positive map, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveMapSpec {
    map: LinearMap,
}

impl PositiveMapSpec {
    /// The transpose on `M_d`.
    pub fn transpose(d: usize) -> Result<Self> {
        check_map_dim(d, MAX_MAP_DIM)?;
        Ok(Self { map: LinearMap::Transpose(d) })
    }

    /// A user-supplied map. Checks Hermiticity preservation, trace
    /// preservation, positivity on a seeded sample of pure inputs (a
    /// necessary condition only), and that the Choi matrix has a negative
    /// eigenvalue.
    pub fn custom(d: usize, choi: CMatrix) -> Result<Self> {
        check_map_dim(d, MAX_MAP_DIM)?;
        if choi.shape() != (d * d, d * d) {
            return Err(Error::InvalidMap(format!("Choi matrix must be {0}x{0}", d * d)));
        }
        if linalg::hermiticity_defect(&choi) > ALGEBRAIC_TOL {
            return Err(Error::InvalidMap("Choi matrix is not Hermitian".into()));
        }
        // Tr_out J = I  ⇔  Λ is trace preserving.
        let reduced = linalg::partial_trace(&choi, &[d, d], &[true, false]);
        if linalg::max_abs_diff(&reduced, &CMatrix::identity(d, d)) > ALGEBRAIC_TOL {
            return Err(Error::InvalidMap("map is not trace preserving".into()));
        }
        let spec = Self { map: LinearMap::Custom { d, choi } };
        spec.check_positive_on_samples(POSITIVITY_SAMPLES, 0)?;
        if spec.is_completely_positive() {
            return Err(Error::InvalidMap("map is completely positive and detects nothing".into()));
        }
        Ok(spec)
    }

    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn is_transpose(&self) -> bool {
        matches!(self.map, LinearMap::Transpose(_))
    }

    /// `Λ(|v⟩⟨v|) ≥ 0` on `samples` Haar-random pure states.
    pub fn check_positive_on_samples(&self, samples: usize, seed: u64) -> Result<()> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let v = random_pure_vector(d, &mut rng);
            let rho = &v * v.adjoint();
            let min = linalg::min_eigenvalue(&self.map.apply(&rho));
            if min < -EIGEN_TOL {
                return Err(Error::InvalidMap(format!("maps a pure state to eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    pub fn is_completely_positive(&self) -> bool {
        linalg::min_eigenvalue(&self.map.choi_matrix()) >= -EIGEN_TOL
    }
}

fn check_map_dim(d: usize, cap: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("map dimension {d} < 2")));
    }
    if d > cap {
        return Err(Error::CapExceeded { what: "map dimension", value: d as u64, cap: cap as u64 });
    }
    Ok(())
}

pub(crate) fn random_pure_vector<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> nalgebra::DVector<linalg::C64> {
    let v = nalgebra::DVector::from_fn(d, |_, _| c64(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let norm = v.norm();
    v / c64(norm, 0.0)
}

/// Normalized Choi state of the induced map `(I ⊗ I) ⊗ (I ⊗ Λ)` on the
/// maximally entangled state of `C^{d²} ⊗ C^{d²}`. Side `d^4`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    d: usize,
    matrix: CMatrix,
}

impl ChoiState {
    pub fn new(map: &LinearMap) -> Result<Self> {
        Self::with_cap(map, DEFAULT_MAX_MAP_DIM)
    }

    pub fn with_cap(map: &LinearMap, cap: usize) -> Result<Self> {
        let d = map.dim();
        check_map_dim(d, cap.min(MAX_MAP_DIM))?;
        let big = d * d;
        // Λ(|i⟩⟨j|) for the second factor of each pair.
        let images: Vec<CMatrix> = (0..d * d)
            .map(|ij| {
                let mut unit = CMatrix::zeros(d, d);
                unit[(ij / d, ij % d)] = c64(1.0, 0.0);
                map.apply(&unit)
            })
            .collect();
        let scale = 1.0 / big as f64;
        let mut matrix = CMatrix::zeros(big * big, big * big);
        for i in 0..big {
            let (i1, i2) = (i / d, i % d);
            for j in 0..big {
                let (j1, j2) = (j / d, j % d);
                let image = &images[i2 * d + j2];
                // |I⟩⟨J| ⊗ |i1⟩⟨j1| ⊗ Λ(|i2⟩⟨j2|)
                for k2 in 0..d {
                    for l2 in 0..d {
                        let row = i * big + i1 * d + k2;
                        let col = j * big + j1 * d + l2;
                        matrix[(row, col)] = image[(k2, l2)] * scale;
                    }
                }
            }
        }
        Ok(Self { d, matrix })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// `λ`, the most negative eigenvalue (or the smallest, if none is
    /// negative).
    pub fn lambda(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Choi state of `(1 - p)(I ⊗ Λ) + p·D`, where `D` sends every input to
    /// `Tr(ρ) I/d²`.
    pub fn mixed(&self, p: f64) -> CMatrix {
        let side = self.matrix.nrows();
        &self.matrix * c64(1.0 - p, 0.0) + CMatrix::identity(side, side) * c64(p / side as f64, 0.0)
    }
}

/// `d² |λ| / (d⁴ |λ| + 1)`: the smallest eigenvalue any separable input can
/// produce under the SPA built from a map whose Choi state has most
/// negative eigenvalue `λ`.
pub fn spa_threshold(lambda: f64, d: usize) -> f64 {
    let d2 = (d * d) as f64;
    let mag = lambda.abs();
    d2 * mag / (d2 * d2 * mag + 1.0)
}

/// Closed form of the minimal mixing weight, `d⁴|λ| / (d⁴|λ| + 1)`.
pub fn spa_weight_closed_form(lambda: f64, d: usize) -> f64 {
    let d4 = (d * d * d * d) as f64;
    d4 * lambda.abs() / (d4 * lambda.abs() + 1.0)
}

/// Structural physical approximation of `I ⊗ Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaMap {
    base: PositiveMapSpec,
    mixing: f64,
    lambda: f64,
    threshold: f64,
}

impl SpaMap {
    pub fn new(base: PositiveMapSpec) -> Result<Self> {
        Self::with_cap(base, DEFAULT_MAX_MAP_DIM)
    }

    pub fn with_cap(base: PositiveMapSpec, cap: usize) -> Result<Self> {
        let choi = ChoiState::with_cap(base.map(), cap)?;
        let lambda = choi.lambda();
        if lambda >= -EIGEN_TOL {
            return Err(Error::InvalidMap("Choi state is positive; no approximation needed".into()));
        }
        let mixing = minimal_mixing_weight(&choi);
        let threshold = spa_threshold(lambda, base.dim());
        Ok(Self { base, mixing, lambda, threshold })
    }

    /// SPA of the transpose on `M_d`. Built once per dimension and process.
    pub fn transpose(d: usize) -> Result<Self> {
        static BUILT: OnceLock<Mutex<HashMap<usize, SpaMap>>> = OnceLock::new();
        let cache = BUILT.get_or_init(Default::default);
        if let Some(spa) = cache.lock().expect("cache lock").get(&d) {
            return Ok(spa.clone());
        }
        let spa = Self::new(PositiveMapSpec::transpose(d)?)?;
        cache.lock().expect("cache lock").insert(d, spa.clone());
        Ok(spa)
    }

    pub fn base(&self) -> &PositiveMapSpec {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `p*`.
    pub fn mixing(&self) -> f64 {
        self.mixing
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `ρ' = (1 - p*)(I ⊗ Λ)(ρ) + p* I/d²` for a state on `d ⊗ d`.
    pub fn apply(&self, rho: &DensityOp) -> Result<DensityOp> {
        let d = self.dim();
        if rho.dims() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: format!("({d}, {d})"),
                actual: format!("{:?}", rho.dims()),
            });
        }
        let side = d * d;
        let mapped = self.base.map().apply_second_factor(rho.matrix(), d);
        let matrix =
            mapped * c64(1.0 - self.mixing, 0.0) + CMatrix::identity(side, side) * c64(self.mixing / side as f64, 0.0);
        Ok(DensityOp::from_parts((d, d), matrix))
    }
}

/// Bisection for the smallest `p` with a positive semidefinite mixed Choi
/// state. Returns the upper bracket, which is always PSD.
fn minimal_mixing_weight(choi: &ChoiState) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if linalg::min_eigenvalue(&choi.mixed(mid)) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    /// Oracle for λ: the Choi state factorizes into `P+_d ⊗ J/d` (up to a
    /// reordering of factors), so its spectrum is `{1, 0, …} × spec(J/d)`.
    fn lambda_by_factorization(map: &LinearMap) -> f64 {
        let d = map.dim();
        let j_over_d = map.choi_matrix() / c64(d as f64, 0.0);
        let factor = linalg::hermitian_eigenvalues(&j_over_d);
        let p_plus = [1.0, 0.0];
        let mut products: Vec<f64> = factor.iter().flat_map(|a| p_plus.iter().map(move |b| a * b)).collect();
        products.sort_by(f64::total_cmp);
        products[0]
    }

    #[test]
    fn transpose_choi_lambda() {
        let choi = ChoiState::new(&LinearMap::Transpose(2)).unwrap();
        assert!((choi.lambda() + 0.5).abs() < 1e-10);
        assert!((lambda_by_factorization(&LinearMap::Transpose(2)) + 0.5).abs() < 1e-10);
        assert!((choi.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(linalg::hermiticity_defect(choi.matrix()) < 1e-15);
    }

    #[test]
    fn transpose_lambda_in_higher_dimension() {
        for d in [3, 4] {
            let choi = ChoiState::new(&LinearMap::Transpose(d)).unwrap();
            let oracle = lambda_by_factorization(&LinearMap::Transpose(d));
            assert!((choi.lambda() - oracle).abs() < 1e-10);
            assert!((oracle + 1.0 / d as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_choi_is_psd() {
        let choi = ChoiState::new(&LinearMap::Identity(2)).unwrap();
        assert!(choi.lambda() >= -1e-12);
        assert!(SpaMap::new(PositiveMapSpec { map: LinearMap::Identity(2) }).is_err());
    }

    #[test]
    fn threshold_for_qubit_transpose() {
        // |λ| = 1/2, d = 2: 4·(1/2) / (16·(1/2) + 1) = 2/9.
        let spa = SpaMap::transpose(2).unwrap();
        assert!((spa.lambda() + 0.5).abs() < 1e-10);
        assert!((spa.threshold() - 2.0 / 9.0).abs() < 1e-10);
        assert_eq!(spa.threshold(), spa_threshold(spa.lambda(), 2));
    }

    #[test]
    fn bisection_matches_closed_form_and_is_minimal() {
        for d in [2, 3] {
            let spa = SpaMap::transpose(d).unwrap();
            let closed = spa_weight_closed_form(spa.lambda(), d);
            assert!((spa.mixing() - closed).abs() < 1e-12, "{} vs {closed}", spa.mixing());
            let choi = ChoiState::new(spa.base().map()).unwrap();
            assert!(linalg::min_eigenvalue(&choi.mixed(spa.mixing())) >= -EIGEN_TOL);
            assert!(linalg::min_eigenvalue(&choi.mixed(spa.mixing() * (1.0 - 1e-3))) < -EIGEN_TOL);
            // Separable inputs bottom out at p*/d², which is the threshold.
            assert!((spa.mixing() / (d * d) as f64 - spa.threshold()).abs() < 1e-12);
        }
    }

    #[test]
    fn spa_output_is_a_state() {
        let spa = SpaMap::transpose(2).unwrap();
        let out = spa.apply(&DensityOp::bell()).unwrap();
        let checked = DensityOp::new((2, 2), out.matrix().clone()).unwrap();
        // Bell: partial transpose has spectrum {1/2,1/2,1/2,-1/2}.
        let expected = spa.mixing() / 4.0 - 0.5 * (1.0 - spa.mixing());
        assert!((checked.min_eigenvalue() - expected).abs() < 1e-12);
        assert!(spa.apply(&DensityOp::maximally_mixed((1, 4)).unwrap()).is_err());
    }

    #[test]
    fn custom_map_equals_builtin_transpose() {
        let t = LinearMap::Transpose(2);
        let custom = PositiveMapSpec::custom(2, t.choi_matrix()).unwrap();
        let x = CMatrix::from_fn(2, 2, |r, c| c64(r as f64 + 1.0, c as f64 - r as f64));
        assert_eq!(custom.map().apply(&x), t.apply(&x));
        let rho = DensityOp::bell().depolarize(0.2).unwrap();
        let a = custom.map().apply_second_factor(rho.matrix(), 2);
        let b = t.apply_second_factor(rho.matrix(), 2);
        assert!(linalg::max_abs_diff(&a, &b) < 1e-15);
        let spa = SpaMap::new(custom).unwrap();
        assert!((spa.threshold() - 2.0 / 9.0).abs() < 1e-10);
    }

    #[test]
    fn custom_map_validation() {
        // Completely positive: the identity.
        assert!(PositiveMapSpec::custom(2, LinearMap::Identity(2).choi_matrix()).is_err());
        // Λ(X) = 1.5 Tr(X) I - 2 Xᵀ is trace preserving but sends pure
        // states to eigenvalue -1/2. Its Choi matrix is 1.5 I - 2 SWAP.
        let swap = LinearMap::Transpose(2).choi_matrix();
        let bad = CMatrix::identity(4, 4) * c64(1.5, 0.0) - swap * c64(2.0, 0.0);
        assert!(matches!(PositiveMapSpec::custom(2, bad), Err(Error::InvalidMap(m)) if m.contains("pure state")));
        // Not trace preserving.
        let scaled = LinearMap::Transpose(2).choi_matrix() * c64(2.0, 0.0);
        assert!(PositiveMapSpec::custom(2, scaled).is_err());
        assert!(PositiveMapSpec::custom(2, CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn transpose_is_positive_but_not_cp() {
        let t = PositiveMapSpec::transpose(3).unwrap();
        t.check_positive_on_samples(64, 9).unwrap();
        assert!(!t.is_completely_positive());
    }

    #[test]
    fn choi_cap_enforced() {
        assert!(matches!(ChoiState::new(&LinearMap::Transpose(5)), Err(Error::CapExceeded { .. })));
        assert!(PositiveMapSpec::transpose(1).is_err());
    }

    #[test]
    fn mixed_choi_of_depolarizer_is_flat() {
        let choi = ChoiState::new(&LinearMap::Transpose(2)).unwrap();
        let flat = choi.mixed(1.0);
        let expected = CMatrix::from_diagonal(&DVector::from_element(16, c64(1.0 / 16.0, 0.0)));
        assert!(linalg::max_abs_diff(&flat, &expected) < 1e-15);
    }
}
