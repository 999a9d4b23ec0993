//! Small dense symmetric linear algebra (row-major `n×n` slices).

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen<F: Real = f64> {
    /// Ascending.
    pub values: Vec<F>,
    /// Column `j` (entries `vectors[i*n + j]`) is the eigenvector of `values[j]`.
    pub vectors: Vec<F>,
    pub n: usize,
}

/// Cyclic Jacobi until the off-diagonal mass is below `tol` times the Frobenius norm.
pub fn jacobi_eigen<F: Real>(a: &[F], n: usize, tol: F) -> Result<SymmetricEigen<F>> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
    }
    let mut m = a.to_vec();
    let mut v = vec![F::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = F::one();
    }
    let frob = m.iter().fold(F::zero(), |s, x| s + *x * *x).sqrt();
    let off = |m: &[F]| {
        let mut s = F::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s = s + m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let two = F::of(2.0);
    for _ in 0..MAX_SWEEPS {
        if off(&m) <= tol * frob || frob == F::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = (t * t + F::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap());
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![F::zero(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = v[k * n + old];
        }
    }
    Ok(SymmetricEigen { values, vectors, n })
}

impl<F: Real> SymmetricEigen<F> {
    /// `V diag(g(λ)) Vᵀ`.
    pub fn map_values(&self, g: impl Fn(F) -> F) -> Vec<F> {
        let n = self.n;
        let gl: Vec<F> = self.values.iter().map(|&l| g(l)).collect();
        let mut out = vec![F::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = F::zero();
                for k in 0..n {
                    s = s + self.vectors[i * n + k] * gl[k] * self.vectors[j * n + k];
                }
                out[i * n + j] = s;
            }
        }
        out
    }
}

pub fn mat_vec<F: Real>(a: &[F], x: &[F], out: &mut [F]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..n).fold(F::zero(), |s, j| s + a[i * n + j] * x[j]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizes_known_matrix() {
        // eigenvalues 1, 3 with vectors (1,−1)/√2, (1,1)/√2
        let e = jacobi_eigen(&[2.0f64, 1.0, 1.0, 2.0], 2, 1e-12).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12 && (e.values[1] - 3.0).abs() < 1e-12);
        let back = e.map_values(|l| l);
        for (a, b) in back.iter().zip([2.0, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_square_root() {
        let a = [4.0f64, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let e = jacobi_eigen(&a, 3, 1e-14).unwrap();
        let w = e.map_values(|l| l.sqrt().recip());
        // W A W = I
        let mut wa = [0.0f64; 9];
        let mut waw = [0.0f64; 9];
        for i in 0..3 {
            for j in 0..3 {
                wa[i * 3 + j] = (0..3).map(|k| w[i * 3 + k] * a[k * 3 + j]).sum();
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                waw[i * 3 + j] = (0..3).map(|k| wa[i * 3 + k] * w[k * 3 + j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((waw[i * 3 + j] - id).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_precision() {
        let e = jacobi_eigen(&[2.0f32, 0.0, 0.0, 5.0], 2, 1e-6).unwrap();
        assert_eq!(e.values, vec![2.0, 5.0]);
    }
}
