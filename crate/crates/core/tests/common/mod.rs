#![allow(dead_code)]

pub mod gradcheck;

use hypermagnet::Hypergraph;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected hypergraph: a spanning chain of pairs plus random edges.
pub fn random_connected_hypergraph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Hypergraph {
    let mut edges: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
    while edges.len() < m {
        let size = rng.random_range(1..=n.min(6));
        let mut e: Vec<usize> = Vec::new();
        while e.len() < size {
            let v = rng.random_range(0..n);
            if !e.contains(&v) {
                e.push(v);
            }
        }
        edges.push(e);
    }
    let weights = (0..edges.len())
        .map(|_| rng.random_range(0.5..3.0))
        .collect();
    Hypergraph::from_edges(n, edges, Some(weights)).unwrap()
}

/// Random row-stochastic matrix with roughly `density` of entries positive
/// and a positive diagonal-adjacent cycle so every row is nonempty.
pub fn random_stochastic(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Array2<f64> {
    let mut p = Array2::zeros((n, n));
    for u in 0..n {
        p[[u, (u + 1) % n]] = rng.random_range(0.1..1.0);
        for v in 0..n {
            if rng.random::<f64>() < density {
                p[[u, v]] = rng.random_range(0.0..1.0);
            }
        }
        let s: f64 = p.row(u).sum();
        p.row_mut(u).mapv_inplace(|x| x / s);
    }
    p
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

/// Real symmetric eigenvalues by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a Hermitian matrix through its real 2n × 2n embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is each eigenvalue twice.
pub fn hermitian_eigenvalues_oracle(a: &Array2<num_complex::Complex64>) -> Vec<f64> {
    let n = a.nrows();
    let mut big = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let z = a[[i, j]];
            big[[i, j]] = z.re;
            big[[i + n, j + n]] = z.re;
            big[[i, j + n]] = -z.im;
            big[[i + n, j]] = z.im;
        }
    }
    jacobi_eigenvalues(big).into_iter().step_by(2).collect()
}

/// Binary logistic regression on the features alone, fit by full-batch
/// gradient descent on the training mask. Returns test accuracy.
pub fn logistic_accuracy(
    x: &Array2<f64>,
    labels: &[Option<usize>],
    train: &[bool],
    test: &[bool],
) -> f64 {
    let f = x.ncols();
    let score = |w: &[f64], i: usize| w[f] + (0..f).map(|j| w[j] * x[[i, j]]).sum::<f64>();
    let mut w = vec![0.0; f + 1];
    for _ in 0..2000 {
        let mut g = vec![0.0; f + 1];
        for i in (0..x.nrows()).filter(|&i| train[i]) {
            let p = 1.0 / (1.0 + (-score(&w, i)).exp());
            let y = if labels[i] == Some(1) { 1.0 } else { 0.0 };
            for j in 0..f {
                g[j] += (p - y) * x[[i, j]];
            }
            g[f] += p - y;
        }
        for (wj, gj) in w.iter_mut().zip(&g) {
            *wj -= 0.01 * gj;
        }
    }
    let tested: Vec<usize> = (0..x.nrows()).filter(|&i| test[i]).collect();
    let correct = tested
        .iter()
        .filter(|&&i| (score(&w, i) > 0.0) == (labels[i] == Some(1)))
        .count();
    correct as f64 / tested.len() as f64
}
