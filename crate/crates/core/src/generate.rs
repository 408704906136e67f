//! Planted-partition hypergraphs with class-dependent vertex weights.

use ndarray::Array2;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::edvw::EdvwMatrix;
use crate::error::{invalid, Result};
use crate::hypergraph::Hypergraph;

/// Generator settings.
///
/// Each hyperedge is anchored at a class and each member is drawn from that
/// class with probability `p_within`, otherwise from another class. Vertex
/// weights grow toward class 0 with `direction_signal`, so the walk drifts
/// between classes in a fixed direction, and a random per-membership factor
/// makes them edge-dependent. Features are one-hot class
/// indicators, replaced by a wrong class with probability `p_noise`, plus
/// Gaussian noise on every column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedConfig {
    pub n: usize,
    pub n_classes: usize,
    pub edges_per_class: usize,
    pub p_within: f64,
    pub p_noise: f64,
    pub direction_signal: f64,
    pub seed: u64,
    pub min_edge_size: usize,
    pub max_edge_size: usize,
    /// Spread of the per-(edge, vertex) factor `exp(s · jitter · U(−1, 1))`
    /// that makes the weights edge-dependent.
    pub weight_jitter: f64,
    /// Extra pure-noise feature columns.
    pub noise_features: usize,
    pub feature_sigma: f64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            n: 400,
            n_classes: 2,
            edges_per_class: 800,
            p_within: 0.55,
            p_noise: 0.4,
            direction_signal: 0.8,
            seed: 0,
            min_edge_size: 4,
            max_edge_size: 10,
            weight_jitter: 0.5,
            noise_features: 4,
            feature_sigma: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedData {
    /// Carries the labels and features as well.
    pub hypergraph: Hypergraph,
    pub edvw: EdvwMatrix,
    pub features: Array2<f64>,
    pub labels: Vec<Option<usize>>,
}

impl PlantedConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.n_classes < 2 {
            return invalid(format!("need at least 2 classes, got {}", self.n_classes));
        }
        if self.n < 2 * self.n_classes {
            return invalid(format!(
                "{} vertices for {} classes",
                self.n, self.n_classes
            ));
        }
        if self.edges_per_class == 0 {
            return invalid("edges_per_class must be positive");
        }
        if self.min_edge_size < 2 || self.min_edge_size > self.max_edge_size {
            return invalid(format!(
                "edge sizes {}..={}",
                self.min_edge_size, self.max_edge_size
            ));
        }
        if self.max_edge_size > self.n / self.n_classes {
            return invalid(format!(
                "edge size {} exceeds class size",
                self.max_edge_size
            ));
        }
        if !unit(self.p_within) || !unit(self.p_noise) || !unit(self.direction_signal) {
            return invalid("p_within, p_noise and direction_signal must lie in [0, 1]");
        }
        if !(self.weight_jitter >= 0.0 && self.weight_jitter.is_finite()) {
            return invalid(format!("weight_jitter {}", self.weight_jitter));
        }
        if !(self.feature_sigma >= 0.0 && self.feature_sigma.is_finite()) {
            return invalid(format!("feature_sigma {}", self.feature_sigma));
        }
        Ok(())
    }
}

/// Vertex weight of a class-`c` vertex: `exp(s (1 − 2c/(C − 1)))`.
pub fn class_weight(c: usize, n_classes: usize, signal: f64) -> f64 {
    (signal * (1.0 - 2.0 * c as f64 / (n_classes - 1) as f64)).exp()
}

pub fn generate_planted_hypergraph(cfg: &PlantedConfig) -> Result<PlantedData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (n, k) = (cfg.n, cfg.n_classes);

    let mut class_of: Vec<usize> = (0..n).map(|i| i % k).collect();
    class_of.shuffle(&mut rng);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (v, &c) in class_of.iter().enumerate() {
        members[c].push(v);
    }

    let mut edges: Vec<Vec<usize>> = Vec::with_capacity(k * cfg.edges_per_class);
    let mut anchors = Vec::with_capacity(k * cfg.edges_per_class);
    for anchor in 0..k {
        for _ in 0..cfg.edges_per_class {
            let size = rng.random_range(cfg.min_edge_size..=cfg.max_edge_size);
            let mut edge: Vec<usize> = Vec::with_capacity(size);
            while edge.len() < size {
                let class = if rng.random::<f64>() < cfg.p_within {
                    anchor
                } else {
                    let other = rng.random_range(0..k - 1);
                    if other >= anchor {
                        other + 1
                    } else {
                        other
                    }
                };
                let v = *members[class]
                    .choose(&mut rng)
                    .expect("classes are nonempty");
                if !edge.contains(&v) {
                    edge.push(v);
                }
            }
            edge.sort_unstable();
            edges.push(edge);
            anchors.push(anchor);
        }
    }

    // attach uncovered vertices to a random edge anchored at their class
    let mut covered = vec![false; n];
    edges.iter().flatten().for_each(|&v| covered[v] = true);
    for v in 0..n {
        if !covered[v] {
            let own: Vec<usize> = (0..edges.len())
                .filter(|&e| anchors[e] == class_of[v])
                .collect();
            let e = *own.choose(&mut rng).expect("every class anchors an edge");
            edges[e].push(v);
            edges[e].sort_unstable();
        }
    }

    let columns: Vec<Vec<f64>> = edges
        .iter()
        .map(|e| {
            e.iter()
                .map(|&v| {
                    let jitter =
                        (cfg.direction_signal * cfg.weight_jitter * rng.random_range(-1.0..1.0))
                            .exp();
                    class_weight(class_of[v], k, cfg.direction_signal) * jitter
                })
                .collect()
        })
        .collect();
    let labels: Vec<Option<usize>> = class_of.iter().map(|&c| Some(c)).collect();

    let normal =
        Normal::new(0.0, cfg.feature_sigma).map_err(|e| crate::Error::Invalid(e.to_string()))?;
    let mut features = Array2::zeros((n, k + cfg.noise_features));
    for v in 0..n {
        let shown = if rng.random::<f64>() < cfg.p_noise {
            let other = rng.random_range(0..k - 1);
            if other >= class_of[v] {
                other + 1
            } else {
                other
            }
        } else {
            class_of[v]
        };
        features[[v, shown]] = 1.0;
        for x in features.row_mut(v).iter_mut() {
            *x += normal.sample(&mut rng);
        }
    }

    let hypergraph = Hypergraph::from_edges(n, edges, None)?
        .with_labels(labels.clone())?
        .with_features(features.clone())?;
    let edvw = EdvwMatrix::new(&hypergraph, columns)?.normalized();
    Ok(PlantedData {
        hypergraph,
        edvw,
        features,
        labels,
    })
}
