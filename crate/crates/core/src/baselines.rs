//! Graph-reduction baselines: the Zhou/HGNN hypergraph Laplacian, its EDVW
//! variant, a GCN on the clique expansion, and spectral clustering with
//! majority-vote labels.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edvw::EdvwMatrix;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::magnetic::Propagation;
use crate::network::{evaluate, train, History, ModelConfig, ModelState, SplitMask};
use crate::spectral::symmetric_eigen;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorKind {
    Zhou,
    HgnnStar,
    CliqueGcn,
}

/// A real symmetric operator used in place of the magnetic propagation.
///
/// For `Zhou` and `HgnnStar`, `laplacian` holds `Δ` and `matrix` holds the
/// smoothing form `I − Δ` that the network multiplies by.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPropagator {
    pub matrix: Array2<f64>,
    pub laplacian: Option<Array2<f64>>,
    pub kind: PropagatorKind,
}

impl RealPropagator {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.matrix - &self.matrix.t())
            .iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn to_propagation(&self) -> Propagation {
        Propagation::real(self.matrix.clone())
    }
}

/// `D_V^{-1/2} Q W D_E^{-1} Qᵀ D_V^{-1/2}` for per-edge columns `Q`.
fn smoothing(h: &Hypergraph, columns: &[Vec<f64>]) -> Result<Array2<f64>> {
    if let Some(vertex) = h.isolated_vertex() {
        return Err(Error::IsolatedVertex { vertex });
    }
    let n = h.n_vertices();
    let inv_sqrt: Vec<f64> = h.vertex_degrees().iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut out = Array2::zeros((n, n));
    for (e, edge) in h.edges().iter().enumerate() {
        let c = h.edge_weights()[e] / edge.len() as f64;
        let col = &columns[e];
        for (a, &u) in edge.iter().enumerate() {
            for (b, &v) in edge.iter().enumerate() {
                out[[u, v]] += c * col[a] * col[b];
            }
        }
    }
    for ((u, v), x) in out.indexed_iter_mut() {
        *x *= inv_sqrt[u] * inv_sqrt[v];
    }
    Ok(out)
}

fn from_smoothing(s: Array2<f64>, kind: PropagatorKind) -> RealPropagator {
    let n = s.nrows();
    let laplacian =
        Array2::from_shape_fn((n, n), |(u, v)| if u == v { 1.0 } else { 0.0 } - s[[u, v]]);
    RealPropagator {
        matrix: s,
        laplacian: Some(laplacian),
        kind,
    }
}

/// `Δ = I − D_V^{-1/2} Y W D_E^{-1} Yᵀ D_V^{-1/2}`.
pub fn zhou_laplacian(h: &Hypergraph) -> Result<RealPropagator> {
    let ones: Vec<Vec<f64>> = h.edges().iter().map(|e| vec![1.0; e.len()]).collect();
    let prop = from_smoothing(smoothing(h, &ones)?, PropagatorKind::Zhou);
    let (eig, _) = symmetric_eigen(prop.laplacian.as_ref().expect("set above"))?;
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    if lo < -1e-8 || hi > 2.0 + 1e-8 {
        return Err(Error::Invalid(format!(
            "Laplacian spectrum [{lo}, {hi}] outside [0, 2]"
        )));
    }
    Ok(prop)
}

/// `Δ = I − D_V^{-1/2} R W D_E^{-1} Rᵀ D_V^{-1/2}`.
pub fn hgnn_star_laplacian(h: &Hypergraph, r: &EdvwMatrix) -> Result<RealPropagator> {
    r.check_shape(h)?;
    Ok(from_smoothing(
        smoothing(h, r.columns())?,
        PropagatorKind::HgnnStar,
    ))
}

/// Renormalized clique-expansion adjacency `D̃^{-1/2} (A + I) D̃^{-1/2}`.
pub fn clique_gcn(h: &Hypergraph) -> RealPropagator {
    let mut a = h.clique_expansion();
    for i in 0..a.nrows() {
        a[[i, i]] += 1.0;
    }
    let inv_sqrt: Vec<f64> = a.sum_axis(Axis(1)).iter().map(|d| 1.0 / d.sqrt()).collect();
    for ((u, v), x) in a.indexed_iter_mut() {
        *x *= inv_sqrt[u] * inv_sqrt[v];
    }
    RealPropagator {
        matrix: a,
        laplacian: None,
        kind: PropagatorKind::CliqueGcn,
    }
}

/// Trains the real two-layer network with `propagator` in place of the
/// magnetic operator. Returns the trained state, its history and the final
/// test accuracy.
pub fn train_real_gcn(
    propagator: &RealPropagator,
    features: &Array2<f64>,
    labels: &[Option<usize>],
    split: &SplitMask,
    config: &ModelConfig,
) -> Result<(ModelState, History, f64)> {
    let prop = propagator.to_propagation();
    let (state, history) = train(&prop, features, labels, split, config, false)?;
    let acc = evaluate(&state, &prop, features, labels, &split.test)?;
    Ok((state, history, acc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub clusters: Vec<usize>,
    pub predictions: Vec<usize>,
    /// Accuracy on labeled vertices outside the training mask, or on all
    /// labeled vertices when the mask covers them.
    pub accuracy: f64,
    pub inertia: f64,
}

const KMEANS_RESTARTS: usize = 50;
const KMEANS_MAX_ITER: usize = 300;

/// Spectral clustering of `adjacency` into `k` clusters, each labeled by the
/// majority training label inside it.
pub fn spectral_clustering_majority(
    adjacency: &Array2<f64>,
    k: usize,
    labels: &[Option<usize>],
    train_mask: &[bool],
    seed: u64,
) -> Result<ClusteringResult> {
    let n = adjacency.nrows();
    if adjacency.ncols() != n || labels.len() != n || train_mask.len() != n {
        return Err(Error::Dimension(format!(
            "adjacency {}x{}, {} labels, {} mask entries",
            n,
            adjacency.ncols(),
            labels.len(),
            train_mask.len()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("k = {k} for {n} vertices")));
    }
    let inv_sqrt: Vec<f64> = adjacency
        .sum_axis(Axis(1))
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let lap = Array2::from_shape_fn((n, n), |(u, v)| {
        let id = if u == v { 1.0 } else { 0.0 };
        id - inv_sqrt[u] * adjacency[[u, v]] * inv_sqrt[v]
    });
    let (_, vectors) = symmetric_eigen(&lap)?;
    let mut embed = vectors.slice(ndarray::s![.., ..k]).to_owned();
    for mut row in embed.rows_mut() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|x| x / norm);
        }
    }
    let (clusters, inertia) = kmeans(&embed, k, seed);

    let n_classes = labels.iter().flatten().max().map_or(0, |&c| c + 1);
    let mut global = vec![0usize; n_classes.max(1)];
    let mut votes = vec![vec![0usize; n_classes.max(1)]; k];
    for i in 0..n {
        if let (true, Some(c)) = (train_mask[i], labels[i]) {
            votes[clusters[i]][c] += 1;
            global[c] += 1;
        }
    }
    let argmax = |v: &[usize]| {
        (0..v.len())
            .max_by_key(|&c| (v[c], std::cmp::Reverse(c)))
            .unwrap_or(0)
    };
    let fallback = argmax(&global);
    let cluster_label: Vec<usize> = votes
        .iter()
        .map(|v| {
            if v.iter().any(|&x| x > 0) {
                argmax(v)
            } else {
                fallback
            }
        })
        .collect();
    let predictions: Vec<usize> = clusters.iter().map(|&c| cluster_label[c]).collect();

    let held_out: Vec<usize> = (0..n)
        .filter(|&i| labels[i].is_some() && !train_mask[i])
        .collect();
    let scored = if held_out.is_empty() {
        (0..n).filter(|&i| labels[i].is_some()).collect()
    } else {
        held_out
    };
    let accuracy = if scored.is_empty() {
        f64::NAN
    } else {
        scored
            .iter()
            .filter(|&&i| labels[i] == Some(predictions[i]))
            .count() as f64
            / scored.len() as f64
    };
    Ok(ClusteringResult {
        clusters,
        predictions,
        accuracy,
        inertia,
    })
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding and Lloyd iterations, best of several restarts.
pub fn kmeans(points: &Array2<f64>, k: usize, seed: u64) -> (Vec<usize>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let (assign, inertia) = lloyd(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| inertia < b.1) {
            best = Some((assign, inertia));
        }
    }
    best.expect("at least one restart")
}

fn lloyd(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = points.nrows();
    let mut centers = Array2::zeros((k, points.ncols()));
    centers
        .row_mut(0)
        .assign(&points.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), centers.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    idx = i;
                    break;
                }
                r -= d;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).assign(&points.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), centers.row(c)));
        }
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let nearest = (0..k)
                .min_by(|&a, &b| {
                    sq_dist(points.row(i), centers.row(a))
                        .total_cmp(&sq_dist(points.row(i), centers.row(b)))
                })
                .expect("k > 0");
            if assign[i] != nearest {
                assign[i] = nearest;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros(centers.dim());
        let mut counts = vec![0usize; k];
        for i in 0..n {
            sums.row_mut(assign[i]).scaled_add(1.0, &points.row(i));
            counts[assign[i]] += 1;
        }
        for c in 0..k {
            // empty clusters keep their old center
            if counts[c] > 0 {
                centers
                    .row_mut(c)
                    .assign(&(&sums.row(c) / counts[c] as f64));
            }
        }
    }
    let inertia = (0..n)
        .map(|i| sq_dist(points.row(i), centers.row(assign[i])))
        .sum();
    (assign, inertia)
}
