//! Dense complex matrices of dimension 2 or 4, with the Hermitian
//! eigensolvers every norm in this crate is built on.
//!
//! The dimensions are fixed by the problem domain (one- and two-qubit
//! operators), which keeps the solvers exact and dependency-free:
//! 2×2 Hermitian eigenvalues come from the closed-form quadratic, 4×4 from a
//! cyclic complex Jacobi iteration driven to an off-diagonal Frobenius norm
//! below 1e-14.

use num_complex::Complex64;
use thiserror::Error;

/// Off-diagonal Frobenius-norm threshold at which the Jacobi iteration stops.
pub const JACOBI_OFF_DIAGONAL_THRESHOLD: f64 = 1e-14;

/// Hard cap on Jacobi sweeps; convergence for 4×4 Hermitian input is
/// typically reached in well under ten sweeps.
const JACOBI_MAX_SWEEPS: usize = 64;

/// Errors from matrix construction and decomposition.
#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    /// Only 2×2 and 4×4 matrices are supported.
    #[error("unsupported matrix dimension {0}; only 2 and 4 are supported")]
    UnsupportedDim(usize),
    /// Operands of an arithmetic operation have different dimensions.
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    /// Data length does not match dim².
    #[error("expected {expected} entries for dimension {dim}, got {got}")]
    BadLength { dim: usize, expected: usize, got: usize },
    /// An operation required a Hermitian matrix.
    #[error("matrix is not Hermitian within tolerance {0}")]
    NotHermitian(f64),
    /// A rotation gate was given a NaN or infinite angle.
    #[error("rotation angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    /// The Jacobi iteration failed to converge (should not happen for
    /// well-formed Hermitian input).
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

/// A dense row-major complex matrix of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Validate a dimension (2 or 4).
    fn check_dim(dim: usize) -> Result<(), MatrixError> {
        if dim == 2 || dim == 4 {
            Ok(())
        } else {
            Err(MatrixError::UnsupportedDim(dim))
        }
    }

    /// Zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Result<Self, MatrixError> {
        Self::check_dim(dim)?;
        Ok(Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] })
    }

    /// Identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        Ok(m)
    }

    /// Build from a row-major entry slice (length must be dim²).
    pub fn from_row_major(dim: usize, data: &[Complex64]) -> Result<Self, MatrixError> {
        Self::check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(MatrixError::BadLength { dim, expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data: data.to_vec() })
    }

    /// Build a 2×2 matrix from four entries in row-major order.
    pub fn from2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { dim: 2, data: vec![a, b, c, d] }
    }

    /// Matrix dimension (2 or 4).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry at `(row, col)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// Set entry at `(row, col)`.
    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.dim + col] = v;
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch(self.dim, other.dim));
        }
        let n = self.dim;
        let mut out = Self::zeros(n)?;
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Entry-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch(self.dim, other.dim));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    /// Entry-wise difference.
    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim != other.dim {
            return Err(MatrixError::DimMismatch(self.dim, other.dim));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dim: self.dim, data })
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self { dim: n, data: vec![Complex64::new(0.0, 0.0); n * n] };
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Trace.
    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance to another matrix.
    pub fn frobenius_distance(&self, other: &Self) -> Result<f64, MatrixError> {
        Ok(self.sub(other)?.frobenius_norm())
    }

    /// Hermiticity check: `‖M − M†‖_∞entry ≤ tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Unitarity check: `‖M†M − I‖_∞entry ≤ tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = match self.adjoint().mul(self) {
            Ok(p) => p,
            Err(_) => return false,
        };
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (prod.get(i, j) - Complex64::new(expect, 0.0)).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Kronecker product of two 2×2 matrices, yielding a 4×4 matrix.
    pub fn kron(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.dim != 2 || other.dim != 2 {
            return Err(MatrixError::UnsupportedDim(self.dim * other.dim));
        }
        let mut out = Self::zeros(4)?;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out.set(2 * i + k, 2 * j + l, self.get(i, j) * other.get(k, l));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    ///
    /// 2×2 uses the closed-form quadratic; 4×4 uses cyclic complex Jacobi
    /// rotations until the off-diagonal Frobenius norm drops below
    /// [`JACOBI_OFF_DIAGONAL_THRESHOLD`]. Errors when the matrix is not
    /// Hermitian within 1e-9.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>, MatrixError> {
        if !self.is_hermitian(1e-9) {
            return Err(MatrixError::NotHermitian(1e-9));
        }
        match self.dim {
            2 => Ok(eig2_hermitian(self).to_vec()),
            4 => jacobi_hermitian_eigenvalues(self),
            d => Err(MatrixError::UnsupportedDim(d)),
        }
    }
}

/// Closed-form eigenvalues of a 2×2 Hermitian matrix, ascending.
///
/// For `[[a, b], [b̄, d]]` with real `a, d`:
/// `λ± = (a+d)/2 ± √(((a−d)/2)² + |b|²)`.
fn eig2_hermitian(m: &ComplexMatrix) -> [f64; 2] {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1);
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mid - rad, mid + rad]
}

/// Off-diagonal Frobenius norm of a square matrix.
fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi eigenvalues for a 4×4 Hermitian matrix, ascending.
///
/// Each sweep annihilates every off-diagonal pair `(p, q)` with a unitary
/// plane rotation `R(p, q)` chosen so `(R† M R)[p][q] = 0`. For Hermitian
/// input the iteration converges quadratically; we stop once the
/// off-diagonal Frobenius norm is below [`JACOBI_OFF_DIAGONAL_THRESHOLD`].
fn jacobi_hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, MatrixError> {
    let n = m.dim();
    let mut a = m.clone();
    // Symmetrize exactly to suppress drift from the input's Hermiticity slack.
    for i in 0..n {
        for j in 0..n {
            let h = 0.5 * (a.get(i, j) + a.get(j, i).conj());
            a.set(i, j, h);
            a.set(j, i, h.conj());
        }
    }

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < JACOBI_OFF_DIAGONAL_THRESHOLD {
            let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
            eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
            return Ok(eig);
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.norm() < JACOBI_OFF_DIAGONAL_THRESHOLD / 16.0 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Phase that makes the pivot real, then a real Jacobi angle.
                let phase = apq / apq.norm();
                let abs_apq = apq.norm();
                let theta = 0.5 * (2.0 * abs_apq).atan2(aqq - app);
                let (sin_t, cos_t) = theta.sin_cos();
                // Column rotation: columns p and q of A.
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * cos_t - aiq * phase.conj() * sin_t);
                    a.set(i, q, aip * phase * sin_t + aiq * cos_t);
                }
                // Row rotation: rows p and q of A (conjugated coefficients).
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, apj * cos_t - aqj * phase * sin_t);
                    a.set(q, j, apj * phase.conj() * sin_t + aqj * cos_t);
                }
            }
        }
    }
    Err(MatrixError::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_unsupported_dims() {
        assert_eq!(ComplexMatrix::zeros(3).unwrap_err(), MatrixError::UnsupportedDim(3));
        assert_eq!(ComplexMatrix::zeros(1).unwrap_err(), MatrixError::UnsupportedDim(1));
    }

    #[test]
    fn identity_multiplication_is_neutral() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        let m = ComplexMatrix::from2(c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.0), c(-2.0, 4.0));
        assert_eq!(m.mul(&i2).unwrap(), m);
        assert_eq!(i2.mul(&m).unwrap(), m);
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let m = ComplexMatrix::from2(c(1.0, 2.0), c(3.0, -1.0), c(0.0, 5.0), c(-2.0, 4.0));
        let a = m.adjoint();
        assert_eq!(a.get(0, 1), c(0.0, -5.0));
        assert_eq!(a.get(1, 0), c(3.0, 1.0));
        assert_eq!(a.get(0, 0), c(1.0, -2.0));
    }

    #[test]
    fn eig2_closed_form_matches_pauli_z() {
        let z = ComplexMatrix::from2(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        let eig = z.hermitian_eigenvalues().unwrap();
        assert_abs_diff_eq!(eig[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig2_complex_offdiagonal() {
        // [[2, i], [-i, 2]] has eigenvalues {1, 3}.
        let m = ComplexMatrix::from2(c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0));
        let eig = m.hermitian_eigenvalues().unwrap();
        assert_abs_diff_eq!(eig[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn jacobi_diagonal_4x4() {
        let mut m = ComplexMatrix::zeros(4).unwrap();
        for (i, v) in [3.0, -1.0, 0.5, 7.0].iter().enumerate() {
            m.set(i, i, c(*v, 0.0));
        }
        let eig = m.hermitian_eigenvalues().unwrap();
        assert_eq!(eig.len(), 4);
        assert_abs_diff_eq!(eig[0], -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(eig[3], 7.0, epsilon = 1e-13);
    }

    #[test]
    fn jacobi_matches_closed_form_on_block_diagonal() {
        // Block diag of two 2×2 Hermitian blocks: eigenvalues are the union.
        let b1 = ComplexMatrix::from2(c(1.0, 0.0), c(0.5, 0.25), c(0.5, -0.25), c(-1.0, 0.0));
        let b2 = ComplexMatrix::from2(c(2.0, 0.0), c(0.0, -1.5), c(0.0, 1.5), c(0.0, 0.0));
        let mut m = ComplexMatrix::zeros(4).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, b1.get(i, j));
                m.set(i + 2, j + 2, b2.get(i, j));
            }
        }
        let mut expected: Vec<f64> = b1
            .hermitian_eigenvalues()
            .unwrap()
            .into_iter()
            .chain(b2.hermitian_eigenvalues().unwrap())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = m.hermitian_eigenvalues().unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(g, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn hermitian_eigenvalues_rejects_non_hermitian() {
        let m = ComplexMatrix::from2(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(m.hermitian_eigenvalues(), Err(MatrixError::NotHermitian(_))));
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        let i4 = ComplexMatrix::identity(4).unwrap();
        assert_eq!(i2.kron(&i2).unwrap(), i4);
    }

    #[test]
    fn eigenvalue_sum_matches_trace_4x4() {
        // Dense Hermitian 4×4 with complex off-diagonals.
        let vals = [
            (0, 0, c(1.0, 0.0)),
            (1, 1, c(2.0, 0.0)),
            (2, 2, c(-3.0, 0.0)),
            (3, 3, c(0.5, 0.0)),
            (0, 1, c(0.3, 0.7)),
            (0, 2, c(-0.2, 0.1)),
            (0, 3, c(0.0, 0.9)),
            (1, 2, c(1.1, -0.4)),
            (1, 3, c(0.6, 0.0)),
            (2, 3, c(-0.5, 0.5)),
        ];
        let mut m = ComplexMatrix::zeros(4).unwrap();
        for &(i, j, v) in &vals {
            m.set(i, j, v);
            if i != j {
                m.set(j, i, v.conj());
            }
        }
        let eig = m.hermitian_eigenvalues().unwrap();
        let sum: f64 = eig.iter().sum();
        assert_abs_diff_eq!(sum, m.trace().re, epsilon = 1e-12);
        // Sum of squares equals the Frobenius norm squared for Hermitian input.
        let sq: f64 = eig.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(sq, m.frobenius_norm().powi(2), epsilon = 1e-10);
    }
}
