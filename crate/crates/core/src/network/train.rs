use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::model::{backward, forward, loss, predict, ModelState};
use crate::error::{Error, Result};
use crate::magnetic::Propagation;

/// Disjoint train/test masks over the labeled vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMask {
    pub train: Vec<bool>,
    pub test: Vec<bool>,
    pub fraction: f64,
}

impl SplitMask {
    /// Shuffles the labeled vertices with `seed` and puts the first
    /// `round(fraction · k)` of them in the training set.
    pub fn random(labels: &[Option<usize>], fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Invalid(format!(
                "split fraction {fraction} outside (0, 1)"
            )));
        }
        let mut labeled: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_some()).collect();
        if labeled.len() < 2 {
            return Err(Error::Invalid("need at least two labeled vertices".into()));
        }
        labeled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train =
            ((fraction * labeled.len() as f64).round() as usize).clamp(1, labeled.len() - 1);
        let mut train = vec![false; labels.len()];
        let mut test = vec![false; labels.len()];
        for (k, &i) in labeled.iter().enumerate() {
            if k < n_train {
                train[i] = true;
            } else {
                test[i] = true;
            }
        }
        Ok(Self {
            train,
            test,
            fraction,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

pub type History = Vec<EpochRecord>;

/// Accuracy of `argmax(logits)` over the masked vertices.
pub fn accuracy(logits: &Array2<f64>, labels: &[Option<usize>], mask: &[bool]) -> Result<f64> {
    let pred = predict(logits);
    let mut total = 0usize;
    let mut correct = 0usize;
    for (i, &m) in mask.iter().enumerate() {
        if !m {
            continue;
        }
        let label =
            labels[i].ok_or_else(|| Error::Invalid(format!("masked vertex {i} is unlabeled")))?;
        total += 1;
        if pred[i] == label {
            correct += 1;
        }
    }
    if total == 0 {
        return Err(Error::Invalid("mask selects no vertices".into()));
    }
    Ok(correct as f64 / total as f64)
}

/// Accuracy of a trained model on the masked vertices.
pub fn evaluate(
    state: &ModelState,
    prop: &Propagation,
    features: &Array2<f64>,
    labels: &[Option<usize>],
    mask: &[bool],
) -> Result<f64> {
    let (logits, _) = forward(state, prop, features)?;
    accuracy(&logits, labels, mask)
}

/// Full-batch training for `config.epochs` epochs.
///
/// `complex = false` trains the real specialization used by the baselines.
pub fn train(
    prop: &Propagation,
    features: &Array2<f64>,
    labels: &[Option<usize>],
    split: &SplitMask,
    config: &ModelConfig,
    complex: bool,
) -> Result<(ModelState, History)> {
    if labels.len() != prop.n() || features.nrows() != prop.n() {
        return Err(Error::Dimension(format!(
            "{} labels and {} feature rows for {} vertices",
            labels.len(),
            features.nrows(),
            prop.n()
        )));
    }
    let mut state = ModelState::init(config, features.ncols(), prop, complex)?;
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (logits, cache) = forward(&state, prop, features)?;
        let value = loss(&logits, labels, &split.train, &state, config.weight_decay)?;
        if !value.is_finite() {
            return Err(Error::Diverged { epoch, loss: value });
        }
        history.push(EpochRecord {
            epoch,
            loss: value,
            train_accuracy: accuracy(&logits, labels, &split.train)?,
            test_accuracy: if split.test.iter().any(|&m| m) {
                accuracy(&logits, labels, &split.test)?
            } else {
                f64::NAN
            },
        });
        let grads = backward(&state, prop, &cache, &logits, labels, &split.train)?;
        state.adam_step(&grads);
        state.epoch = epoch + 1;
    }
    Ok((state, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_disjoint_and_covers_labeled() {
        let labels: Vec<Option<usize>> = (0..20)
            .map(|i| if i % 5 == 0 { None } else { Some(i % 2) })
            .collect();
        let s = SplitMask::random(&labels, 0.8, 3).unwrap();
        for i in 0..20 {
            assert!(!(s.train[i] && s.test[i]));
            assert_eq!(s.train[i] || s.test[i], labels[i].is_some());
        }
        assert_eq!(s.train.iter().filter(|&&b| b).count(), 13);
        assert_eq!(s, SplitMask::random(&labels, 0.8, 3).unwrap());
        assert!(SplitMask::random(&labels, 1.0, 3).is_err());
    }

    #[test]
    fn accuracy_hand_count() {
        let logits = ndarray::array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.2, 0.1]];
        let labels = vec![Some(0), Some(0), Some(1), Some(0)];
        let acc = accuracy(&logits, &labels, &[true, true, true, true]).unwrap();
        assert_eq!(acc, 0.5);
        assert_eq!(
            accuracy(&logits, &labels, &[true, false, false, true]).unwrap(),
            1.0
        );
        assert!(accuracy(&logits, &labels, &[false; 4]).is_err());
    }
}
