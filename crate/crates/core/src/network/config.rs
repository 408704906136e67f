use serde::{Deserialize, Serialize};

/// How the phase of the propagation operator is parameterized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeMode {
    /// Fixed scalar charge `q`; no charge gradient.
    Scalar(f64),
    /// Learnable symmetric charge matrix `Q`, one entry per supported pair.
    Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_layers: usize,
    /// Width of every convolution layer.
    pub hidden: usize,
    pub n_classes: usize,
    pub learning_rate: f64,
    /// Learning rate of the charge entries; `None` uses `learning_rate`.
    pub charge_learning_rate: Option<f64>,
    pub weight_decay: f64,
    pub epochs: usize,
    pub seed: u64,
    pub charge_mode: ChargeMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_layers: 2,
            hidden: 128,
            n_classes: 2,
            learning_rate: 0.001,
            charge_learning_rate: None,
            weight_decay: 0.0005,
            epochs: 200,
            seed: 0,
            charge_mode: ChargeMode::Matrix,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::Invalid(m.to_string()));
        if self.n_layers == 0 || self.hidden == 0 {
            return bad("layer count and hidden width must be positive");
        }
        if self.n_classes < 2 {
            return bad("need at least two classes");
        }
        if !(self.learning_rate > 0.0) || self.charge_learning_rate.is_some_and(|r| !(r >= 0.0)) {
            return bad("learning rates must be positive");
        }
        if !(self.weight_decay >= 0.0) {
            return bad("weight decay must be nonnegative");
        }
        if let ChargeMode::Scalar(q) = self.charge_mode {
            if !(q >= 0.0 && q.is_finite()) {
                return bad("charge parameter must be nonnegative");
            }
        }
        Ok(())
    }
}
