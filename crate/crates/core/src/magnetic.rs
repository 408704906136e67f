//! Hermitian adjacency matrices and magnetic Laplacians of weighted digraphs.
//!
//! For a nonnegative matrix `P` (typically a hypergraph transition matrix):
//!
//! * `P_s = (P + Pᵀ)/2`, `D_s = diag(P_s 1)`
//! * `Θ = 2π q (P − Pᵀ)` for a scalar charge, or `Θ = 2π Q ⊙ (P − Pᵀ)` for a
//!   symmetric charge matrix `Q`
//! * `H = P_s ⊙ exp(iΘ)`
//! * `L = I − (D_s^{-1/2} P_s D_s^{-1/2}) ⊙ exp(iΘ)` (normalized) or `D_s − H`

use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::spectral;

pub type C64 = Complex64;

/// Default value of every learnable charge entry.
pub const DEFAULT_CHARGE: f64 = 0.25;

/// Symmetric charge matrix with one parameter per unordered supported pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeMatrix {
    n: usize,
    pairs: Vec<(usize, usize)>,
    values: Vec<f64>,
}

impl ChargeMatrix {
    /// One entry per pair `u < v` with `(P_s)_uv > 0`, all set to `init`.
    pub fn for_support(p: &Array2<f64>, init: f64) -> Self {
        let n = p.nrows();
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if p[[u, v]] + p[[v, u]] > 0.0 {
                    pairs.push((u, v));
                }
            }
        }
        let values = vec![init; pairs.len()];
        Self { n, pairs, values }
    }

    /// Reads a dense charge matrix; rejects asymmetric input and entries
    /// outside the support of `P_s`.
    pub fn from_dense(q: &Array2<f64>, p: &Array2<f64>) -> Result<Self> {
        let n = p.nrows();
        if q.dim() != (n, n) {
            return Err(Error::Dimension(format!(
                "charge matrix is {:?}, expected {n}x{n}",
                q.dim()
            )));
        }
        let mut out = Self::for_support(p, 0.0);
        for u in 0..n {
            for v in 0..n {
                if q[[u, v]] != q[[v, u]] {
                    return invalid(format!("charge matrix is not symmetric at ({u}, {v})"));
                }
                if u != v && q[[u, v]] != 0.0 && p[[u, v]] + p[[v, u]] == 0.0 {
                    return invalid(format!(
                        "charge entry ({u}, {v}) lies outside the support of P_s"
                    ));
                }
            }
        }
        for (k, &(u, v)) in out.pairs.iter().enumerate() {
            out.values[k] = q[[u, v]];
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Dense symmetric matrix with zero diagonal.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut q = Array2::zeros((self.n, self.n));
        for (&(u, v), &x) in self.pairs.iter().zip(&self.values) {
            q[[u, v]] = x;
            q[[v, u]] = x;
        }
        q
    }
}

/// Scalar charge `q` or learnable charge matrix `Q`.
#[derive(Debug, Clone, PartialEq)]
pub enum ChargeParams {
    Scalar(f64),
    Matrix(ChargeMatrix),
}

impl ChargeParams {
    fn check(&self, n: usize) -> Result<()> {
        match self {
            ChargeParams::Scalar(q) if !(q.is_finite() && *q >= 0.0) => {
                invalid(format!("charge parameter must be nonnegative, got {q}"))
            }
            ChargeParams::Matrix(m) if m.n() != n => Err(Error::Dimension(format!(
                "charge matrix built for n = {}, not {n}",
                m.n()
            ))),
            _ => Ok(()),
        }
    }
}

fn check_square_nonneg(p: &Array2<f64>) -> Result<()> {
    if p.nrows() != p.ncols() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return invalid("matrix has a negative or non-finite entry");
    }
    Ok(())
}

/// `P_s = (P + Pᵀ)/2` and its row sums. Rejects isolated vertices.
pub fn symmetrize(p: &Array2<f64>) -> Result<(Array2<f64>, Vec<f64>)> {
    check_square_nonneg(p)?;
    let ps = (p + &p.t()) * 0.5;
    let d: Vec<f64> = ps.rows().into_iter().map(|r| r.sum()).collect();
    if let Some(vertex) = d.iter().position(|&x| x == 0.0) {
        return Err(Error::IsolatedVertex { vertex });
    }
    Ok((ps, d))
}

/// Skew-symmetric phase matrix `Θ`.
pub fn phase_matrix(p: &Array2<f64>, charge: &ChargeParams) -> Result<Array2<f64>> {
    check_square_nonneg(p)?;
    let n = p.nrows();
    charge.check(n)?;
    let mut theta = Array2::zeros((n, n));
    match charge {
        ChargeParams::Scalar(q) => {
            for u in 0..n {
                for v in (u + 1)..n {
                    let t = 2.0 * PI * q * (p[[u, v]] - p[[v, u]]);
                    theta[[u, v]] = t;
                    theta[[v, u]] = -t;
                }
            }
        }
        ChargeParams::Matrix(m) => {
            for (&(u, v), &q) in m.pairs().iter().zip(m.values()) {
                let t = 2.0 * PI * q * (p[[u, v]] - p[[v, u]]);
                theta[[u, v]] = t;
                theta[[v, u]] = -t;
            }
        }
    }
    Ok(theta)
}

/// `H = P_s ⊙ exp(iΘ)`.
pub fn hermitian_adjacency(p: &Array2<f64>, charge: &ChargeParams) -> Result<Array2<C64>> {
    check_square_nonneg(p)?;
    let theta = phase_matrix(p, charge)?;
    let ps = (p + &p.t()) * 0.5;
    Ok(apply_phase(&ps, &theta))
}

fn apply_phase(magnitude: &Array2<f64>, theta: &Array2<f64>) -> Array2<C64> {
    let mut out = Array2::from_elem(magnitude.dim(), C64::new(0.0, 0.0));
    ndarray::Zip::from(&mut out)
        .and(magnitude)
        .and(theta)
        .for_each(|o, &m, &t| *o = C64::from_polar(m, t));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianForm {
    Normalized,
    Unnormalized,
}

/// Tolerance of the `λ_max` solve behind the renormalized Laplacian.
pub const LAMBDA_MAX_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MagneticLaplacian {
    pub laplacian: Array2<C64>,
    pub symmetrized: Array2<f64>,
    pub degrees: Vec<f64>,
    pub phase: Array2<f64>,
    pub form: LaplacianForm,
    pub lambda_max: Option<f64>,
    /// `(2 / λ_max) L − I`, when requested.
    pub renormalized: Option<Array2<C64>>,
}

impl MagneticLaplacian {
    pub fn n(&self) -> usize {
        self.laplacian.nrows()
    }
}

/// Builds the magnetic Laplacian of `p`, optionally with its renormalized
/// form `L̃ = (2/λ_max) L − I`.
pub fn magnetic_laplacian(
    p: &Array2<f64>,
    charge: &ChargeParams,
    form: LaplacianForm,
    renormalize: bool,
) -> Result<MagneticLaplacian> {
    let (ps, d) = symmetrize(p)?;
    let theta = phase_matrix(p, charge)?;
    let n = p.nrows();
    let laplacian = match form {
        LaplacianForm::Normalized => {
            let inv_sqrt: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
            let mut scaled = ps.clone();
            for ((u, v), x) in scaled.indexed_iter_mut() {
                *x *= inv_sqrt[u] * inv_sqrt[v];
            }
            let mut l = apply_phase(&scaled, &theta).mapv(|z| -z);
            for i in 0..n {
                l[[i, i]] += 1.0;
            }
            l
        }
        LaplacianForm::Unnormalized => {
            let mut l = apply_phase(&ps, &theta).mapv(|z| -z);
            for i in 0..n {
                l[[i, i]] += d[i];
            }
            l
        }
    };
    let (lambda_max, renormalized) = if renormalize {
        let lmax = spectral::lanczos_lambda_max(&laplacian, LAMBDA_MAX_TOL)?;
        let mut lt = laplacian.mapv(|z| z * (2.0 / lmax));
        for i in 0..n {
            lt[[i, i]] -= 1.0;
        }
        (Some(lmax), Some(lt))
    } else {
        (None, None)
    };
    Ok(MagneticLaplacian {
        laplacian,
        symmetrized: ps,
        degrees: d,
        phase: theta,
        form,
        lambda_max,
        renormalized,
    })
}

/// Fixed parts of the first-order propagation operator
/// `A = D̃^{-1/2} (P_s + I) D̃^{-1/2} ⊙ exp(iΘ)`.
///
/// The magnitude and skew part `P − Pᵀ` do not depend on the charge, so a
/// network keeps one `Propagation` for its lifetime and rebuilds only the
/// phase when the charge changes.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// `D̃^{-1/2} (P_s + I) D̃^{-1/2}`, real symmetric.
    pub magnitude: Array2<f64>,
    /// `P − Pᵀ`.
    pub skew: Array2<f64>,
}

impl Propagation {
    pub fn new(p: &Array2<f64>) -> Result<Self> {
        check_square_nonneg(p)?;
        let n = p.nrows();
        let mut tilde = (p + &p.t()) * 0.5;
        for i in 0..n {
            tilde[[i, i]] += 1.0;
        }
        let inv_sqrt: Vec<f64> = tilde
            .rows()
            .into_iter()
            .map(|r| 1.0 / r.sum().sqrt())
            .collect();
        for ((u, v), x) in tilde.indexed_iter_mut() {
            *x *= inv_sqrt[u] * inv_sqrt[v];
        }
        Ok(Self {
            magnitude: tilde,
            skew: p - &p.t(),
        })
    }

    /// Wraps an already-normalized real symmetric operator with no phase.
    pub fn real(magnitude: Array2<f64>) -> Self {
        let skew = Array2::zeros(magnitude.dim());
        Self { magnitude, skew }
    }

    pub fn n(&self) -> usize {
        self.magnitude.nrows()
    }

    /// `Θ` for the given charge.
    pub fn phase(&self, charge: &ChargeParams) -> Array2<f64> {
        match charge {
            ChargeParams::Scalar(q) => self.skew.mapv(|s| 2.0 * PI * q * s),
            ChargeParams::Matrix(m) => {
                let mut theta = Array2::zeros(self.skew.dim());
                for (&(u, v), &q) in m.pairs().iter().zip(m.values()) {
                    let t = 2.0 * PI * q * self.skew[[u, v]];
                    theta[[u, v]] = t;
                    theta[[v, u]] = -t;
                }
                theta
            }
        }
    }

    /// Real and imaginary parts of the operator.
    pub fn parts(&self, charge: &ChargeParams) -> (Array2<f64>, Array2<f64>) {
        let theta = self.phase(charge);
        let mut re = self.magnitude.clone();
        let mut im = Array2::zeros(self.magnitude.dim());
        ndarray::Zip::from(&mut re)
            .and(&mut im)
            .and(&theta)
            .for_each(|r, i, &t| {
                let m = *r;
                *r = m * t.cos();
                *i = m * t.sin();
            });
        (re, im)
    }
}

/// The propagation operator as a complex matrix.
pub fn propagation_operator(p: &Array2<f64>, charge: &ChargeParams) -> Result<Array2<C64>> {
    charge.check(p.nrows())?;
    let prop = Propagation::new(p)?;
    let theta = prop.phase(charge);
    Ok(apply_phase(&prop.magnitude, &theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn edge_01() -> Array2<f64> {
        array![[0.0, 1.0], [0.0, 0.0]]
    }

    #[test]
    fn zero_charge_has_zero_phase() {
        let p = array![[0.1, 0.9], [0.4, 0.6]];
        let t = phase_matrix(&p, &ChargeParams::Scalar(0.0)).unwrap();
        assert!(t.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn quarter_charge_single_edge() {
        let t = phase_matrix(&edge_01(), &ChargeParams::Scalar(0.25)).unwrap();
        assert_eq!(t[[0, 1]], PI / 2.0);
        assert_eq!(t[[1, 0]], -PI / 2.0);
        let h = hermitian_adjacency(&edge_01(), &ChargeParams::Scalar(0.25)).unwrap();
        assert!((h[[0, 1]] - C64::new(0.0, 0.5)).norm() < 1e-16);
        assert!((h[[1, 0]] - C64::new(0.0, -0.5)).norm() < 1e-16);
    }

    #[test]
    fn third_charge_phase_follows_formula() {
        // 2π · (1/3) · (1 − 0)
        let h = hermitian_adjacency(&edge_01(), &ChargeParams::Scalar(1.0 / 3.0)).unwrap();
        assert!((h[[0, 1]].arg() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((h[[0, 1]].norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_edges_are_real() {
        let p = array![[0.0, 0.3], [0.3, 0.0]];
        let h = hermitian_adjacency(&p, &ChargeParams::Scalar(0.25)).unwrap();
        assert_eq!(h[[0, 1]], C64::new(0.3, 0.0));
    }

    #[test]
    fn symmetrize_halves_single_edge() {
        let (ps, d) = symmetrize(&edge_01()).unwrap();
        assert_eq!(ps, array![[0.0, 0.5], [0.5, 0.0]]);
        assert_eq!(d, vec![0.5, 0.5]);
        let p = array![[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(matches!(
            symmetrize(&p),
            Err(Error::IsolatedVertex { vertex: 2 })
        ));
    }

    #[test]
    fn constant_charge_matrix_matches_scalar() {
        let p = array![[0.2, 0.5, 0.3], [0.1, 0.1, 0.8], [0.6, 0.4, 0.0]];
        let mut q = ChargeMatrix::for_support(&p, 0.0);
        q.values_mut().iter_mut().for_each(|x| *x = 0.17);
        let a = phase_matrix(&p, &ChargeParams::Matrix(q)).unwrap();
        let b = phase_matrix(&p, &ChargeParams::Scalar(0.17)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn asymmetric_charge_rejected() {
        let p = array![[0.5, 0.5], [0.5, 0.5]];
        let q = array![[0.0, 0.1], [0.2, 0.0]];
        assert!(ChargeMatrix::from_dense(&q, &p).is_err());
        let q = array![[0.0, 0.1], [0.1, 0.0]];
        let m = ChargeMatrix::from_dense(&q, &p).unwrap();
        assert_eq!(m.to_dense(), q);
        let off = array![[0.0, 0.0], [0.0, 0.0]];
        let eye = Array2::eye(2);
        assert!(ChargeMatrix::from_dense(&array![[0.0, 0.1], [0.1, 0.0]], &eye).is_err());
        assert!(ChargeMatrix::from_dense(&off, &eye).is_ok());
    }

    #[test]
    fn two_vertex_laplacian() {
        let p = array![[0.0, 1.0], [1.0, 0.0]];
        let l = magnetic_laplacian(
            &p,
            &ChargeParams::Scalar(0.0),
            LaplacianForm::Normalized,
            true,
        )
        .unwrap();
        assert_eq!(l.laplacian[[0, 0]], C64::new(1.0, 0.0));
        assert!((l.laplacian[[0, 1]] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((l.lambda_max.unwrap() - 2.0).abs() < 1e-9);
        let u = magnetic_laplacian(
            &p,
            &ChargeParams::Scalar(0.0),
            LaplacianForm::Unnormalized,
            false,
        )
        .unwrap();
        assert_eq!(u.laplacian[[0, 0]], C64::new(1.0, 0.0));
        assert!(u.renormalized.is_none());
    }

    #[test]
    fn single_vertex_propagation_is_one() {
        let a = propagation_operator(&array![[1.0]], &ChargeParams::Scalar(0.25)).unwrap();
        assert!((a[[0, 0]] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn propagation_parts_match_operator() {
        let p = array![[0.2, 0.5, 0.3], [0.1, 0.1, 0.8], [0.6, 0.4, 0.0]];
        let charge = ChargeParams::Scalar(0.3);
        let a = propagation_operator(&p, &charge).unwrap();
        let (re, im) = Propagation::new(&p).unwrap().parts(&charge);
        for ((u, v), z) in a.indexed_iter() {
            assert!((z.re - re[[u, v]]).abs() < 1e-15);
            assert!((z.im - im[[u, v]]).abs() < 1e-15);
            assert!((z - a[[v, u]].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn negative_charge_rejected() {
        assert!(phase_matrix(&edge_01(), &ChargeParams::Scalar(-0.1)).is_err());
    }
}
