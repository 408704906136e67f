//! Repeated random-split experiments and their reports.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    clique_gcn, hgnn_star_laplacian, spectral_clustering_majority, train_real_gcn, zhou_laplacian,
    RealPropagator,
};
use crate::edvw::{degree_edvw, EdvwMatrix};
use crate::error::{invalid, Error, Result};
use crate::generate::{generate_planted_hypergraph, PlantedConfig};
use crate::hypergraph::Hypergraph;
use crate::io;
use crate::magnetic::Propagation;
use crate::network::{evaluate, train, ChargeMode, History, ModelConfig, SplitMask};
use crate::walks::edvw_transition;

/// Environment variable holding the worker thread count for concurrent splits.
pub const THREADS_ENV: &str = "HYPERMAGNET_THREADS";

/// Where the vertex weights come from when data is read from files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdvwSource {
    /// The `edvw` arrays of the hypergraph file.
    File,
    /// `degree_edvw`.
    Degree,
    /// Constant weights, which give the Zhou walk.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Files {
        hypergraph: PathBuf,
        features: PathBuf,
        labels: PathBuf,
        edvw: EdvwSource,
    },
    Planted(PlantedConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// The magnetic network; the charge comes from `ModelConfig::charge_mode`.
    Hmn,
    Hgnn,
    HgnnStar,
    Gcn,
    Spectral,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Hmn => "hmn",
            Method::Hgnn => "hgnn",
            Method::HgnnStar => "hgnn-star",
            Method::Gcn => "gcn",
            Method::Spectral => "spectral",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub method: Method,
    /// `n_classes` is overwritten from the labels.
    pub model: ModelConfig,
    pub n_splits: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(data: DataSource, method: Method, model: ModelConfig) -> Self {
        Self {
            data,
            method,
            model,
            n_splits: 10,
            train_fraction: 0.8,
            seed: 0,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_splits == 0 {
            return invalid("n_splits must be at least 1");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return invalid(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            ));
        }
        match &self.data {
            DataSource::Files {
                hypergraph,
                features,
                labels,
                ..
            } => {
                for p in [hypergraph, features, labels] {
                    if !p.is_file() {
                        return invalid(format!("{} does not exist", p.display()));
                    }
                }
            }
            DataSource::Planted(cfg) => cfg.validate()?,
        }
        let mut model = self.model.clone();
        model.n_classes = model.n_classes.max(2);
        model.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub method: String,
    pub per_split_accuracy: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over splits.
    pub std: f64,
    pub wall_clock_seconds: f64,
    pub history_csv_path: Option<PathBuf>,
    pub config: ExperimentConfig,
}

impl ExperimentReport {
    /// Copy with the timing field zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_clock_seconds: 0.0,
            ..self.clone()
        }
    }
}

/// A labeled hypergraph ready for training.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub hypergraph: Hypergraph,
    /// Normalized vertex weights.
    pub edvw: EdvwMatrix,
    pub features: Array2<f64>,
    pub labels: Vec<Option<usize>>,
    pub classes: Vec<String>,
}

impl Dataset {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }
}

pub fn load_dataset(source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::Planted(cfg) => {
            let d = generate_planted_hypergraph(cfg)?;
            Ok(Dataset {
                hypergraph: d.hypergraph,
                edvw: d.edvw,
                features: d.features,
                labels: d.labels,
                classes: (0..cfg.n_classes).map(|c| c.to_string()).collect(),
            })
        }
        DataSource::Files {
            hypergraph,
            features,
            labels,
            edvw,
        } => {
            let (h, from_file) = io::load_hypergraph(hypergraph)?;
            let x = io::load_features(features, h.vertex_ids())?;
            let (y, classes) = io::load_labels(labels, h.vertex_ids())?;
            let r = match edvw {
                EdvwSource::File => from_file.ok_or_else(|| {
                    Error::Invalid(format!("{} has no edvw values", hypergraph.display()))
                })?,
                EdvwSource::Degree => degree_edvw(&h)?,
                EdvwSource::Uniform => EdvwMatrix::incidence(&h),
            };
            let h = h.with_labels(y.clone())?.with_features(x.clone())?;
            Ok(Dataset {
                edvw: r.normalized(),
                hypergraph: h,
                features: x,
                labels: y,
                classes,
            })
        }
    }
}

/// Split-mask seed and model seed of split `index`.
pub fn split_seeds(seed: u64, index: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (rng.next_u64(), rng.next_u64())
}

enum Prepared {
    Magnetic(Propagation),
    Real(RealPropagator),
    Spectral(Array2<f64>),
}

fn prepare(method: Method, data: &Dataset) -> Result<Prepared> {
    let h = &data.hypergraph;
    Ok(match method {
        Method::Hmn => {
            let p = edvw_transition(h, &data.edvw)?;
            Prepared::Magnetic(Propagation::new(p.values())?)
        }
        Method::Hgnn => Prepared::Real(zhou_laplacian(h)?),
        Method::HgnnStar => Prepared::Real(hgnn_star_laplacian(h, &data.edvw)?),
        Method::Gcn => Prepared::Real(clique_gcn(h)),
        Method::Spectral => Prepared::Spectral(h.clique_expansion()),
    })
}

/// Accuracy and history of one split.
pub fn run_split(
    method: Method,
    data: &Dataset,
    model: &ModelConfig,
    fraction: f64,
    seed: u64,
    index: usize,
) -> Result<(f64, History)> {
    let prepared = prepare(method, data)?;
    run_prepared(&prepared, data, model, fraction, seed, index)
}

fn run_prepared(
    prepared: &Prepared,
    data: &Dataset,
    model: &ModelConfig,
    fraction: f64,
    seed: u64,
    index: usize,
) -> Result<(f64, History)> {
    let (mask_seed, model_seed) = split_seeds(seed, index);
    let split = SplitMask::random(&data.labels, fraction, mask_seed)?;
    let config = ModelConfig {
        seed: model_seed,
        n_classes: data.n_classes(),
        ..model.clone()
    };
    match prepared {
        Prepared::Magnetic(prop) => {
            let (state, history) =
                train(prop, &data.features, &data.labels, &split, &config, true)?;
            let acc = evaluate(&state, prop, &data.features, &data.labels, &split.test)?;
            Ok((acc, history))
        }
        Prepared::Real(prop) => {
            let (_, history, acc) =
                train_real_gcn(prop, &data.features, &data.labels, &split, &config)?;
            Ok((acc, history))
        }
        Prepared::Spectral(adj) => {
            let res = spectral_clustering_majority(
                adj,
                data.n_classes(),
                &data.labels,
                &split.train,
                model_seed,
            )?;
            Ok((res.accuracy, Vec::new()))
        }
    }
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n > 0)
}

/// Runs every split, concurrently when more than one thread is available,
/// and writes `report.json` and `history.csv` to the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let data = load_dataset(&config.data)?;
    if data.n_classes() < 2 {
        return invalid("labels name fewer than two classes");
    }
    let prepared = prepare(config.method, &data)?;

    let job = |i: usize| {
        run_prepared(
            &prepared,
            &data,
            &config.model,
            config.train_fraction,
            config.seed,
            i,
        )
        .map_err(|e| Error::Split {
            split: i,
            source: Box::new(e),
        })
    };
    let results: Vec<Result<(f64, History)>> = match thread_count() {
        Some(1) => (0..config.n_splits).map(job).collect(),
        threads => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::Invalid(e.to_string()))?;
            pool.install(|| (0..config.n_splits).into_par_iter().map(job).collect())
        }
    };
    let mut accs = Vec::with_capacity(config.n_splits);
    let mut histories = Vec::with_capacity(config.n_splits);
    for r in results {
        let (acc, history) = r?;
        accs.push(acc);
        histories.push(history);
    }
    let (mean, std) = mean_std(&accs);

    let mut report = ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        method: config.method.name().to_string(),
        per_split_accuracy: accs,
        mean,
        std,
        wall_clock_seconds: 0.0,
        history_csv_path: None,
        config: config.clone(),
    };
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        let history_path = dir.join("history.csv");
        io::save_history(&history_path, &histories)?;
        report.history_csv_path = Some(history_path);
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = &config.output_dir {
        save_report(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn save_report(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// `ChargeMode` from the command-line form `q=<float>` or `matrix`.
pub fn parse_charge(s: &str) -> Result<ChargeMode> {
    if s == "matrix" {
        return Ok(ChargeMode::Matrix);
    }
    match s.strip_prefix("q=").map(str::parse::<f64>) {
        Some(Ok(q)) if q >= 0.0 && q.is_finite() => Ok(ChargeMode::Scalar(q)),
        _ => invalid(format!(
            "charge must be `q=<nonnegative float>` or `matrix`, got {s:?}"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_single_split() {
        assert_eq!(mean_std(&[0.75]), (0.75, 0.0));
        let (m, s) = mean_std(&[0.5, 1.0]);
        assert_eq!(m, 0.75);
        assert!((s - 0.25).abs() < 1e-15);
    }

    #[test]
    fn split_seeds_differ_by_index() {
        assert_ne!(split_seeds(3, 0), split_seeds(3, 1));
        assert_eq!(split_seeds(3, 4), split_seeds(3, 4));
    }

    #[test]
    fn charge_flag_forms() {
        assert_eq!(parse_charge("matrix").unwrap(), ChargeMode::Matrix);
        assert_eq!(parse_charge("q=0.25").unwrap(), ChargeMode::Scalar(0.25));
        assert!(parse_charge("q=-1").is_err());
        assert!(parse_charge("0.25").is_err());
    }
}
