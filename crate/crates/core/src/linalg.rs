//! Small dense helpers shared by the simulator and the detectors.

use nalgebra::DMatrix;
use ndarray::Array2;
use ndarray_linalg::{EigValsh, UPLO};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance for algebraic identities (Hermiticity, trace, closed forms).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Noise floor of the dense Hermitian eigensolver.
pub const EIGEN_TOL: f64 = 1e-10;

/// Largest matrix side any dense routine will build (`2^12`).
pub const MAX_DENSE_DIM: usize = 1 << 12;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Eigenvalues of a Hermitian matrix in ascending order, from LAPACK.
/// Only the lower triangle is read.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    assert!(m.is_square());
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let a = Array2::from_shape_fn((n, n), |(i, j)| m[(i, j)]);
    let values = a.eigvalsh(UPLO::Lower).expect("LAPACK Hermitian eigensolver failed");
    let mut values = values.to_vec();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Transposes the second factor of a `d_a ⊗ d_b` operator:
/// `⟨a b|X^Γ|a' b'⟩ = ⟨a b'|X|a' b⟩`.
pub fn partial_transpose_b(m: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    let dim = d_a * d_b;
    assert_eq!(m.shape(), (dim, dim));
    CMatrix::from_fn(dim, dim, |row, col| {
        let (a, b) = (row / d_b, row % d_b);
        let (a2, b2) = (col / d_b, col % d_b);
        m[(a * d_b + b2, a2 * d_b + b)]
    })
}

/// Applies a linear map to each `d_b × d_b` block of a `d_a ⊗ d_b`
/// operator, i.e. computes `(id ⊗ Λ)(X)`.
pub fn apply_to_second_factor<F>(m: &CMatrix, d_a: usize, d_b: usize, map: F) -> CMatrix
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let dim = d_a * d_b;
    assert_eq!(m.shape(), (dim, dim));
    let mut out = CMatrix::zeros(dim, dim);
    for a in 0..d_a {
        for a2 in 0..d_a {
            let block = m.view((a * d_b, a2 * d_b), (d_b, d_b)).into_owned();
            out.view_mut((a * d_b, a2 * d_b), (d_b, d_b)).copy_from(&map(&block));
        }
    }
    out
}

/// Partial trace over a multipartite operator with factor dimensions
/// `dims`, keeping the factors flagged in `keep`. Factor 0 is the most
/// significant digit of the row index.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[bool]) -> CMatrix {
    assert_eq!(dims.len(), keep.len());
    let total: usize = dims.iter().product();
    assert_eq!(m.shape(), (total, total));
    let kept_dim: usize = dims.iter().zip(keep).filter(|(_, &k)| k).map(|(d, _)| d).product();
    let traced_dim = total / kept_dim;

    // Split a kept index and a traced index back into a full index.
    let compose = |kept: usize, traced: usize| -> usize {
        let mut kept_rem = kept;
        let mut traced_rem = traced;
        let mut index = 0usize;
        let mut kept_stride = kept_dim;
        let mut traced_stride = traced_dim;
        for (&d, &k) in dims.iter().zip(keep) {
            let digit = if k {
                kept_stride /= d;
                let digit = kept_rem / kept_stride;
                kept_rem %= kept_stride;
                digit
            } else {
                traced_stride /= d;
                let digit = traced_rem / traced_stride;
                traced_rem %= traced_stride;
                digit
            };
            index = index * d + digit;
        }
        index
    };

    CMatrix::from_fn(kept_dim, kept_dim, |r, c| (0..traced_dim).map(|t| m[(compose(r, t), compose(c, t))]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_diagonal() {
        let m =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(0.3, 0.0), c64(-0.2, 0.0), c64(0.9, 0.0)]));
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] + 0.2).abs() < 1e-14);
        assert!((ev[2] - 0.9).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(1.0, 0.0)]);
        let ev = hermitian_eigenvalues(&m);
        assert!(ev[0].abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let m = CMatrix::from_fn(6, 6, |r, c| c64(r as f64 + 0.5 * c as f64, r as f64 - c as f64));
        let back = partial_transpose_b(&partial_transpose_b(&m, 2, 3), 2, 3);
        assert_eq!(max_abs_diff(&m, &back), 0.0);
    }

    #[test]
    fn multipartite_trace_of_product() {
        let a = CMatrix::from_row_slice(2, 2, &[c64(0.25, 0.0), c64(0.1, 0.2), c64(0.1, -0.2), c64(0.75, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c64(0.5, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.5, 0.0)]);
        let c = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        let abc = a.kronecker(&b).kronecker(&c);
        assert!(max_abs_diff(&partial_trace(&abc, &[2, 2, 2], &[true, false, false]), &a) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&abc, &[2, 2, 2], &[false, true, false]), &b) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&abc, &[2, 2, 2], &[false, false, true]), &c) < 1e-15);
        assert!(max_abs_diff(&partial_trace(&abc, &[2, 2, 2], &[true, false, true]), &a.kronecker(&c)) < 1e-15);
    }
}
