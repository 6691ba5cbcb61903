//! Dense linear algebra for small, fixed dimension.
//!
//! Everything in this crate works with vectors and symmetric matrices of one
//! dimension `d` fixed per experiment (desk scale, `d <= 64`). Storage is
//! dense, solves go through Cholesky, and the eigensolver is a cyclic Jacobi
//! iteration. Symmetric matrices are re-symmetrized after every mutation so
//! the covariance recursions cannot drift over long runs.

use thiserror::Error;

/// Pivots at or below this threshold fail the positive-definiteness check.
pub const SPD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:e})")]
    NotPositiveDefinite { pivot: f64 },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },
}

/// A dense vector of fixed dimension with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Vector {
            data: vec![0.0; dim],
        }
    }

    /// Builds a vector from entries. Panics on non-finite input.
    pub fn from_slice(entries: &[f64]) -> Self {
        assert!(!entries.is_empty(), "dimension must be at least 1");
        assert!(
            entries.iter().all(|v| v.is_finite()),
            "vector entries must be finite"
        );
        Vector {
            data: entries.to_vec(),
        }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Vector::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self += scale * other`, re-validating finiteness.
    pub fn add_scaled(&mut self, scale: f64, other: &Vector) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += scale * b;
        }
        debug_assert!(self.data.iter().all(|v| v.is_finite()));
    }

    pub fn scale(&mut self, scale: f64) {
        for a in self.data.iter_mut() {
            *a *= scale;
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Vector {
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// A dense symmetric matrix of fixed dimension.
///
/// All constructors and updates re-symmetrize (average with the transpose),
/// so `get(i, j) == get(j, i)` holds exactly at all times.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    // Row-major dense storage.
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        assert!(scale.is_finite(), "scale must be finite");
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = scale;
        }
        m
    }

    /// Builds from a row-major slice, averaging with the transpose.
    pub fn from_rows(dim: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), dim * dim, "expected {} entries", dim * dim);
        assert!(
            rows.iter().all(|v| v.is_finite()),
            "matrix entries must be finite"
        );
        let mut m = SymMatrix {
            dim,
            data: rows.to_vec(),
        };
        m.resymmetrize();
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    fn resymmetrize(&mut self) {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let avg = 0.5 * (self.data[i * self.dim + j] + self.data[j * self.dim + i]);
                self.data[i * self.dim + j] = avg;
                self.data[j * self.dim + i] = avg;
            }
        }
    }

    pub fn matvec(&self, v: &Vector) -> Vector {
        assert_eq!(self.dim, v.dim(), "dimension mismatch");
        let out = self
            .data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v.data.iter()).map(|(a, b)| a * b).sum())
            .collect();
        Vector { data: out }
    }

    /// Quadratic form `v' M v`.
    pub fn quad_form(&self, v: &Vector) -> f64 {
        v.dot(&self.matvec(v))
    }

    /// Returns `M + scale * v v'`, re-symmetrized. Panics on non-finite input.
    pub fn rank_one_update(&self, scale: f64, v: &Vector) -> SymMatrix {
        assert_eq!(self.dim, v.dim(), "dimension mismatch");
        assert!(scale.is_finite(), "scale must be finite");
        assert!(
            v.data.iter().all(|x| x.is_finite()),
            "vector entries must be finite"
        );
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.data[i * self.dim + j] += scale * v.data[i] * v.data[j];
            }
        }
        out.resymmetrize();
        out
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, scale: f64) -> SymMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= scale;
        }
        out
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Lower Cholesky factor. Fails if any pivot is at or below [`SPD_TOL`].
    fn cholesky(&self) -> Result<Vec<f64>, LinalgError> {
        let d = self.dim;
        let mut l = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let mut sum = self.data[i * d + j];
                for k in 0..j {
                    sum -= l[i * d + k] * l[j * d + k];
                }
                if i == j {
                    if sum <= SPD_TOL {
                        return Err(LinalgError::NotPositiveDefinite { pivot: sum });
                    }
                    l[i * d + i] = sum.sqrt();
                } else {
                    l[i * d + j] = sum / l[j * d + j];
                }
            }
        }
        Ok(l)
    }

    /// Solves `M z = v` for symmetric positive definite `M`.
    pub fn solve_spd(&self, v: &Vector) -> Result<Vector, LinalgError> {
        assert_eq!(self.dim, v.dim(), "dimension mismatch");
        let d = self.dim;
        let l = self.cholesky()?;
        // Forward substitution L y = v.
        let mut y = v.data.clone();
        for i in 0..d {
            for k in 0..i {
                y[i] -= l[i * d + k] * y[k];
            }
            y[i] /= l[i * d + i];
        }
        // Back substitution L' z = y.
        let mut z = y;
        for i in (0..d).rev() {
            for k in (i + 1)..d {
                z[i] -= l[k * d + i] * z[k];
            }
            z[i] /= l[i * d + i];
        }
        Ok(Vector { data: z })
    }

    /// Explicit inverse of a symmetric positive definite matrix.
    pub fn inverse_spd(&self) -> Result<SymMatrix, LinalgError> {
        let d = self.dim;
        let mut out = SymMatrix::zeros(d);
        for j in 0..d {
            let col = self.solve_spd(&Vector::basis(d, j))?;
            for i in 0..d {
                out.data[i * d + j] = col.data[i];
            }
        }
        out.resymmetrize();
        Ok(out)
    }

    /// `ln det(M)` for symmetric positive definite `M`.
    pub fn log_det(&self) -> Result<f64, LinalgError> {
        let d = self.dim;
        let l = self.cholesky()?;
        Ok((0..d).map(|i| 2.0 * l[i * d + i].ln()).sum())
    }

    /// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
    ///
    /// Returns eigenvalues sorted descending with matching orthonormal
    /// eigenvectors as columns. The sweep budget is capped at `100 * d^2`.
    pub fn sym_eigen(&self) -> Result<(Vec<f64>, Vec<Vector>), LinalgError> {
        let d = self.dim;
        let max_sweeps = 100 * d * d;
        let mut a = self.data.clone();
        let mut v = SymMatrix::identity(d).data;

        let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let tol = 1e-14 * (1.0 + frob);

        let mut converged = false;
        for _ in 0..max_sweeps {
            let off: f64 = {
                let mut s = 0.0;
                for i in 0..d {
                    for j in (i + 1)..d {
                        s += 2.0 * a[i * d + j] * a[i * d + j];
                    }
                }
                s.sqrt()
            };
            if off <= tol {
                converged = true;
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a[p * d + q];
                    if apq.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    // Rotate rows/columns p and q of A.
                    for k in 0..d {
                        let akp = a[k * d + p];
                        let akq = a[k * d + q];
                        a[k * d + p] = c * akp - s * akq;
                        a[k * d + q] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = a[p * d + k];
                        let aqk = a[q * d + k];
                        a[p * d + k] = c * apk - s * aqk;
                        a[q * d + k] = s * apk + c * aqk;
                    }
                    for k in 0..d {
                        let vkp = v[k * d + p];
                        let vkq = v[k * d + q];
                        v[k * d + p] = c * vkp - s * vkq;
                        v[k * d + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged {
            return Err(LinalgError::ConvergenceFailure { sweeps: max_sweeps });
        }

        let mut pairs: Vec<(f64, Vec<f64>)> = (0..d)
            .map(|j| {
                let col: Vec<f64> = (0..d).map(|i| v[i * d + j]).collect();
                (a[j * d + j], col)
            })
            .collect();
        pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite eigenvalues"));
        let values = pairs.iter().map(|p| p.0).collect();
        let vectors = pairs
            .into_iter()
            .map(|(_, col)| Vector { data: col })
            .collect();
        Ok((values, vectors))
    }
}
