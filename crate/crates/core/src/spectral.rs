//! Spectral utilities for Hermitian matrices: full eigendecomposition,
//! Lanczos estimate of the largest eigenvalue, Fourier transform and
//! spectral convolution.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `Φ` (columns are orthonormal eigenvectors) and ascending eigenvalues `Λ`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvectors: Array2<C64>,
    pub eigenvalues: Vec<f64>,
}

/// Largest `|A − A*|` entry.
pub fn hermitian_residual(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for u in 0..n {
        for v in u..n {
            worst = worst.max((a[[u, v]] - a[[v, u]].conj()).norm());
        }
    }
    worst
}

fn to_nalgebra(a: &Array2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn spectral_decomposition(a: &Array2<C64>) -> Result<SpectralDecomposition> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("matrix is {}x{}", n, a.ncols())));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if hermitian_residual(a) > 1e-12 * scale {
        return Err(Error::Invalid("matrix is not Hermitian".into()));
    }
    let eig =
        SymmetricEigen::try_new(to_nalgebra(a), f64::EPSILON, 0).ok_or(Error::NoConvergence {
            what: "Hermitian eigensolver",
            iterations: 0,
            residual: f64::NAN,
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvectors,
        eigenvalues,
    })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Result<Vec<f64>> {
    Ok(spectral_decomposition(a)?.eigenvalues)
}

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending and
/// eigenvectors as columns.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("matrix is {}x{}", n, a.ncols())));
    }
    let eig = SymmetricEigen::try_new(DMatrix::from_fn(n, n, |i, j| a[[i, j]]), f64::EPSILON, 0)
        .ok_or(Error::NoConvergence {
            what: "symmetric eigensolver",
            iterations: 0,
            residual: f64::NAN,
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

fn matvec(a: &Array2<C64>, x: &[C64]) -> Vec<C64> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of a Hermitian matrix by Lanczos iteration with full
/// reorthogonalization. Stops when the Ritz residual `|β_k s_k|` of the top
/// Ritz pair drops below `tol`, or when the Krylov space is exhausted.
pub fn lanczos_lambda_max(a: &Array2<C64>, tol: f64) -> Result<f64> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::Invalid("empty matrix".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_705);
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random::<f64>() + 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);

    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last = (f64::NAN, f64::INFINITY);
    for k in 0..n {
        let mut w = matvec(a, &v);
        let alpha = dot(&v, &w).re;
        basis.push(v.clone());
        alphas.push(alpha);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let beta = norm(&w);
        let (theta, s_last) = top_ritz(&alphas, &betas);
        let residual = beta * s_last.abs();
        last = (theta, residual);
        if !theta.is_finite() {
            break;
        }
        // an exhausted Krylov space makes the Ritz value exact
        if residual <= tol || beta <= f64::EPSILON * theta.abs().max(1.0) || k + 1 == n {
            return Ok(theta);
        }
        betas.push(beta);
        v = w.into_iter().map(|z| z / beta).collect();
    }
    Err(Error::NoConvergence {
        what: "Lanczos lambda_max",
        iterations: n,
        residual: last.1,
    })
}

/// Largest eigenvalue of the tridiagonal matrix and the last component of
/// its eigenvector.
fn top_ritz(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    (theta, eig.eigenvectors[(k - 1, idx)])
}

/// `x̂ = Φ* x`.
pub fn fourier_transform(x: &Array1<C64>, phi: &Array2<C64>) -> Array1<C64> {
    phi.t().mapv(|z| z.conj()).dot(x)
}

/// `x = Φ x̂`.
pub fn inverse_fourier(x_hat: &Array1<C64>, phi: &Array2<C64>) -> Array1<C64> {
    phi.dot(x_hat)
}

/// `y * x = Φ Diag(Φ* y) Φ* x`.
pub fn convolve(y: &Array1<C64>, x: &Array1<C64>, phi: &Array2<C64>) -> Array1<C64> {
    let y_hat = fourier_transform(y, phi);
    let x_hat = fourier_transform(x, phi);
    inverse_fourier(&(&y_hat * &x_hat), phi)
}

/// The convolution matrix `C_y = Φ Diag(ŷ) Φ*`.
pub fn convolution_matrix(y: &Array1<C64>, phi: &Array2<C64>) -> Array2<C64> {
    let y_hat = fourier_transform(y, phi);
    let mut scaled = phi.clone();
    for (mut col, &s) in scaled.columns_mut().into_iter().zip(y_hat.iter()) {
        col.mapv_inplace(|z| z * s);
    }
    scaled.dot(&phi.t().mapv(|z| z.conj()))
}
