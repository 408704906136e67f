//! Complex spectral convolution network.
//!
//! Layer `l` computes
//!
//! ```text
//! X⁽ˡ⁾ = σ(X⁽ˡ⁻¹⁾ W_self + A X⁽ˡ⁻¹⁾ W_neigh + B)
//! ```
//!
//! with real weights, a real bias on the real channel, the complex
//! propagation operator `A = M ⊙ exp(iΘ)` and the complex ReLU `σ`. The
//! last layer's real and imaginary parts are concatenated and mapped to
//! class logits by a linear head.
//!
//! Complex matrices are carried as separate real and imaginary arrays.

use ndarray::{concatenate, s, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::adam::Adam;
use super::config::{ChargeMode, ModelConfig};
use crate::error::{Error, Result};
use crate::magnetic::{ChargeMatrix, ChargeParams, Propagation, DEFAULT_CHARGE};

/// True where the complex ReLU keeps `z`: `Arg(z) ∈ [−π/2, π/2)`,
/// i.e. `Re z > 0`, or `Re z = 0` and `Im z < 0`. Zero is dropped.
#[inline]
pub fn relu_keeps(re: f64, im: f64) -> bool {
    re > 0.0 || (re == 0.0 && im < 0.0)
}

/// Entrywise complex ReLU on `(re, im)` arrays.
pub fn complex_relu(re: &Array2<f64>, im: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let mut out_re = re.clone();
    let mut out_im = im.clone();
    ndarray::Zip::from(&mut out_re)
        .and(&mut out_im)
        .for_each(|r, i| {
            if !relu_keeps(*r, *i) {
                *r = 0.0;
                *i = 0.0;
            }
        });
    (out_re, out_im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub w_self: Array2<f64>,
    pub w_neigh: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Learnable parameters plus optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub config: ModelConfig,
    pub layers: Vec<LayerParams>,
    /// `2 f_L × n_c` for complex models, `f_L × n_c` for real ones.
    pub head: Array2<f64>,
    pub charge: ChargeParams,
    /// Whether the imaginary channel exists. Real models are the baseline GCNs.
    pub complex: bool,
    pub adam: Adam,
    pub epoch: usize,
}

fn glorot(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Array2<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-limit..limit))
}

impl ModelState {
    /// Glorot-uniform weights from `config.seed`, zero biases, charge
    /// entries at 0.25 in matrix mode.
    pub fn init(
        config: &ModelConfig,
        n_features: usize,
        prop: &Propagation,
        complex: bool,
    ) -> Result<Self> {
        config.validate()?;
        if n_features == 0 {
            return Err(Error::Invalid("feature matrix has no columns".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut layers = Vec::with_capacity(config.n_layers);
        let mut fan_in = n_features;
        for _ in 0..config.n_layers {
            layers.push(LayerParams {
                w_self: glorot(&mut rng, fan_in, config.hidden),
                w_neigh: glorot(&mut rng, fan_in, config.hidden),
                bias: Array1::zeros(config.hidden),
            });
            fan_in = config.hidden;
        }
        let head_in = if complex {
            2 * config.hidden
        } else {
            config.hidden
        };
        let head = glorot(&mut rng, head_in, config.n_classes);
        let charge = match (complex, config.charge_mode) {
            (false, _) => ChargeParams::Scalar(0.0),
            (true, ChargeMode::Scalar(q)) => ChargeParams::Scalar(q),
            (true, ChargeMode::Matrix) => {
                ChargeParams::Matrix(support_charge(prop, DEFAULT_CHARGE))
            }
        };
        let mut state = Self {
            config: config.clone(),
            layers,
            head,
            charge,
            complex,
            adam: Adam::new(&[]),
            epoch: 0,
        };
        state.adam = Adam::new(&state.tensor_sizes());
        Ok(state)
    }

    pub fn learns_charge(&self) -> bool {
        matches!(self.charge, ChargeParams::Matrix(_))
    }

    fn tensor_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self
            .layers
            .iter()
            .flat_map(|l| [l.w_self.len(), l.w_neigh.len(), l.bias.len()])
            .collect();
        sizes.push(self.head.len());
        if let ChargeParams::Matrix(q) = &self.charge {
            sizes.push(q.len());
        }
        sizes
    }

    /// `½ Σ ‖W‖²` over weight matrices (biases and charges excluded).
    pub fn weight_norm_sq(&self) -> f64 {
        let sq = |a: &Array2<f64>| a.iter().map(|x| x * x).sum::<f64>();
        0.5 * (self
            .layers
            .iter()
            .map(|l| sq(&l.w_self) + sq(&l.w_neigh))
            .sum::<f64>()
            + sq(&self.head))
    }

    /// Applies one Adam step with the given gradients.
    pub fn adam_step(&mut self, grads: &Gradients) {
        let lr = self.config.learning_rate;
        let charge_lr = self.config.charge_learning_rate.unwrap_or(lr);
        let mut lrs = Vec::new();
        let mut params: Vec<&mut [f64]> = Vec::new();
        for l in self.layers.iter_mut() {
            params.push(l.w_self.as_slice_mut().expect("contiguous"));
            params.push(l.w_neigh.as_slice_mut().expect("contiguous"));
            params.push(l.bias.as_slice_mut().expect("contiguous"));
            lrs.extend([lr; 3]);
        }
        params.push(self.head.as_slice_mut().expect("contiguous"));
        lrs.push(lr);
        if let ChargeParams::Matrix(q) = &mut self.charge {
            params.push(q.values_mut());
            lrs.push(charge_lr);
        }
        let mut g: Vec<&[f64]> = Vec::new();
        for l in &grads.layers {
            g.push(l.w_self.as_slice().expect("contiguous"));
            g.push(l.w_neigh.as_slice().expect("contiguous"));
            g.push(l.bias.as_slice().expect("contiguous"));
        }
        g.push(grads.head.as_slice().expect("contiguous"));
        let empty: Vec<f64> = Vec::new();
        if params.len() > g.len() {
            g.push(grads.charge.as_deref().unwrap_or(&empty));
        }
        self.adam.update(&mut params, &g, &lrs);
    }
}

fn support_charge(prop: &Propagation, init: f64) -> ChargeMatrix {
    // the charge lives on the off-diagonal support of P_s, which equals
    // the off-diagonal support of the propagation magnitude
    ChargeMatrix::for_support(&prop.magnitude, init)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
    pub head: Array2<f64>,
    pub charge: Option<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(state: &ModelState) -> Self {
        Self {
            layers: state
                .layers
                .iter()
                .map(|l| LayerParams {
                    w_self: Array2::zeros(l.w_self.dim()),
                    w_neigh: Array2::zeros(l.w_neigh.dim()),
                    bias: Array1::zeros(l.bias.len()),
                })
                .collect(),
            head: Array2::zeros(state.head.dim()),
            charge: match &state.charge {
                ChargeParams::Matrix(q) => Some(vec![0.0; q.len()]),
                ChargeParams::Scalar(_) => None,
            },
        }
    }
}

#[derive(Debug, Clone)]
struct LayerCache {
    x_re: Array2<f64>,
    x_im: Option<Array2<f64>>,
    y_re: Array2<f64>,
    y_im: Option<Array2<f64>>,
    keep: Array2<f64>,
}

/// Intermediates retained by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    a_re: Array2<f64>,
    a_im: Option<Array2<f64>>,
    theta: Option<Array2<f64>>,
    layers: Vec<LayerCache>,
    /// `[Re X⁽ᴸ⁾ | Im X⁽ᴸ⁾]` (or `Re X⁽ᴸ⁾` alone for real models).
    pub unwound: Array2<f64>,
    /// Per-layer outputs `(Re, Im)`.
    pub activations: Vec<(Array2<f64>, Option<Array2<f64>>)>,
}

impl ForwardCache {
    /// Per-layer 0/1 masks of the entries the complex ReLU kept.
    pub fn keep_masks(&self) -> Vec<&Array2<f64>> {
        self.layers.iter().map(|l| &l.keep).collect()
    }
}

fn check_finite(a: &Array2<f64>, layer: usize) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { layer })
    }
}

/// Forward pass. Rebuilds the propagation operator from the current charge.
pub fn forward(
    state: &ModelState,
    prop: &Propagation,
    x0: &Array2<f64>,
) -> Result<(Array2<f64>, ForwardCache)> {
    let n = prop.n();
    if x0.nrows() != n {
        return Err(Error::Dimension(format!(
            "{} feature rows for {n} vertices",
            x0.nrows()
        )));
    }
    let expected = state.layers.first().map(|l| l.w_self.nrows()).unwrap_or(0);
    if x0.ncols() != expected {
        return Err(Error::Dimension(format!(
            "{} feature columns, model expects {expected}",
            x0.ncols()
        )));
    }
    check_finite(x0, 0)?;

    let (a_re, a_im, theta) = if state.complex {
        let theta = prop.phase(&state.charge);
        let (re, im) = prop.parts(&state.charge);
        (re, Some(im), Some(theta))
    } else {
        (prop.magnitude.clone(), None, None)
    };

    let mut x_re = x0.clone();
    let mut x_im: Option<Array2<f64>> = None;
    let mut caches = Vec::with_capacity(state.layers.len());
    let mut activations = Vec::with_capacity(state.layers.len());
    for (idx, layer) in state.layers.iter().enumerate() {
        // Y = A X
        let (y_re, y_im) = match (&a_im, &x_im) {
            (Some(ai), Some(xi)) => (
                a_re.dot(&x_re) - ai.dot(xi),
                Some(a_re.dot(xi) + ai.dot(&x_re)),
            ),
            (Some(ai), None) => (a_re.dot(&x_re), Some(ai.dot(&x_re))),
            (None, _) => (a_re.dot(&x_re), None),
        };
        let mut z_re = x_re.dot(&layer.w_self) + y_re.dot(&layer.w_neigh);
        z_re += &layer.bias;
        let mut z_im = y_im.as_ref().map(|yi| {
            let mut z = yi.dot(&layer.w_neigh);
            if let Some(xi) = &x_im {
                z += &xi.dot(&layer.w_self);
            }
            z
        });

        let mut keep = Array2::zeros(z_re.dim());
        match &mut z_im {
            Some(zi) => ndarray::Zip::from(&mut keep)
                .and(&mut z_re)
                .and(zi)
                .for_each(|k, r, i| {
                    if relu_keeps(*r, *i) {
                        *k = 1.0;
                    } else {
                        *r = 0.0;
                        *i = 0.0;
                    }
                }),
            None => ndarray::Zip::from(&mut keep)
                .and(&mut z_re)
                .for_each(|k, r| {
                    if relu_keeps(*r, 0.0) {
                        *k = 1.0;
                    } else {
                        *r = 0.0;
                    }
                }),
        }
        check_finite(&z_re, idx + 1)?;
        if let Some(zi) = &z_im {
            check_finite(zi, idx + 1)?;
        }
        caches.push(LayerCache {
            x_re: std::mem::replace(&mut x_re, z_re),
            x_im: std::mem::replace(&mut x_im, z_im),
            y_re,
            y_im,
            keep,
        });
        activations.push((x_re.clone(), x_im.clone()));
    }

    let unwound = match &x_im {
        Some(xi) if state.complex => {
            concatenate(Axis(1), &[x_re.view(), xi.view()]).expect("same rows")
        }
        None if state.complex => {
            let zeros = Array2::zeros(x_re.dim());
            concatenate(Axis(1), &[x_re.view(), zeros.view()]).expect("same rows")
        }
        _ => x_re.clone(),
    };
    let logits = unwound.dot(&state.head);
    check_finite(&logits, state.layers.len() + 1)?;
    Ok((
        logits,
        ForwardCache {
            a_re,
            a_im,
            theta,
            layers: caches,
            unwound,
            activations,
        },
    ))
}

/// Row-wise softmax.
pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|x| (x - max).exp());
        let s = row.sum();
        row.mapv_inplace(|x| x / s);
    }
    out
}

fn masked_rows(
    labels: &[Option<usize>],
    mask: &[bool],
    n_classes: usize,
) -> Result<Vec<(usize, usize)>> {
    if labels.len() != mask.len() {
        return Err(Error::Dimension("labels and mask differ in length".into()));
    }
    let rows: Vec<(usize, usize)> = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| match labels[i] {
            Some(c) if c < n_classes => Ok((i, c)),
            Some(c) => Err(Error::Invalid(format!(
                "vertex {i} has class {c} >= {n_classes}"
            ))),
            None => Err(Error::Invalid(format!("masked vertex {i} is unlabeled"))),
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::Invalid("mask selects no vertices".into()));
    }
    Ok(rows)
}

/// Mean softmax cross-entropy over the masked vertices plus
/// `weight_decay · ½ Σ ‖W‖²`.
pub fn loss(
    logits: &Array2<f64>,
    labels: &[Option<usize>],
    mask: &[bool],
    state: &ModelState,
    weight_decay: f64,
) -> Result<f64> {
    let rows = masked_rows(labels, mask, logits.ncols())?;
    let mut total = 0.0;
    for &(i, c) in &rows {
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        total += lse - row[c];
    }
    Ok(total / rows.len() as f64 + weight_decay * state.weight_norm_sq())
}

/// Exact gradients of [`loss`] (with `state.config.weight_decay`) for every
/// parameter, including the charge matrix in matrix mode.
pub fn backward(
    state: &ModelState,
    prop: &Propagation,
    cache: &ForwardCache,
    logits: &Array2<f64>,
    labels: &[Option<usize>],
    mask: &[bool],
) -> Result<Gradients> {
    let rows = masked_rows(labels, mask, logits.ncols())?;
    let mut d_logits = Array2::zeros(logits.dim());
    let probs = softmax(logits);
    let scale = 1.0 / rows.len() as f64;
    for &(i, c) in &rows {
        for k in 0..logits.ncols() {
            d_logits[[i, k]] = scale * (probs[[i, k]] - if k == c { 1.0 } else { 0.0 });
        }
    }
    Ok(backward_from_logits(state, prop, cache, &d_logits))
}

/// Backpropagates an arbitrary upstream logit gradient; weight decay terms
/// are added to the weight gradients.
pub fn backward_from_logits(
    state: &ModelState,
    prop: &Propagation,
    cache: &ForwardCache,
    d_logits: &Array2<f64>,
) -> Gradients {
    let wd = state.config.weight_decay;
    let mut grads = Gradients::zeros_like(state);
    grads.head = cache.unwound.t().dot(d_logits) + &state.head * wd;

    let d_unwound = d_logits.dot(&state.head.t());
    let f_last = state.config.hidden;
    let mut d_re = d_unwound.slice(s![.., 0..f_last]).to_owned();
    let mut d_im = state
        .complex
        .then(|| d_unwound.slice(s![.., f_last..]).to_owned());

    let learn_q = state.complex && state.learns_charge();
    let n = prop.n();
    let mut d_a_re = learn_q.then(|| Array2::<f64>::zeros((n, n)));
    let mut d_a_im = learn_q.then(|| Array2::<f64>::zeros((n, n)));

    for (idx, (layer, lc)) in state.layers.iter().zip(&cache.layers).enumerate().rev() {
        let dz_re = &d_re * &lc.keep;
        let dz_im = d_im.as_ref().map(|d| d * &lc.keep);

        let g = &mut grads.layers[idx];
        g.w_self = lc.x_re.t().dot(&dz_re) + &layer.w_self * wd;
        g.w_neigh = lc.y_re.t().dot(&dz_re) + &layer.w_neigh * wd;
        if let (Some(dzi), Some(xi)) = (&dz_im, &lc.x_im) {
            g.w_self += &xi.t().dot(dzi);
        }
        if let (Some(dzi), Some(yi)) = (&dz_im, &lc.y_im) {
            g.w_neigh += &yi.t().dot(dzi);
        }
        g.bias = dz_re.sum_axis(Axis(0));

        let dy_re = dz_re.dot(&layer.w_neigh.t());
        let dy_im = dz_im.as_ref().map(|d| d.dot(&layer.w_neigh.t()));

        if let (Some(dar), Some(dai)) = (&mut d_a_re, &mut d_a_im) {
            let dyi = dy_im.as_ref().expect("complex model");
            *dar += &dy_re.dot(&lc.x_re.t());
            *dai += &dyi.dot(&lc.x_re.t());
            if let Some(xi) = &lc.x_im {
                *dar += &dyi.dot(&xi.t());
                *dai -= &dy_re.dot(&xi.t());
            }
        }

        if idx == 0 {
            break;
        }
        // dX = dZ W_selfᵀ + Aᴴ-style transposes of the two channels
        let a_re_t = cache.a_re.t();
        let mut next_re = dz_re.dot(&layer.w_self.t()) + a_re_t.dot(&dy_re);
        let mut next_im = dz_im.as_ref().map(|d| d.dot(&layer.w_self.t()));
        if let (Some(ai), Some(dyi)) = (&cache.a_im, &dy_im) {
            let ai_t = ai.t();
            next_re += &ai_t.dot(dyi);
            let ni = next_im.get_or_insert_with(|| Array2::zeros(dy_re.dim()));
            *ni += &(a_re_t.dot(dyi) - ai_t.dot(&dy_re));
        }
        d_re = next_re;
        d_im = next_im;
    }

    if let (Some(dar), Some(dai), Some(theta), ChargeParams::Matrix(q)) =
        (&d_a_re, &d_a_im, &cache.theta, &state.charge)
    {
        let gq: Vec<f64> = q
            .pairs()
            .iter()
            .map(|&(u, v)| {
                let d_theta = |a: usize, b: usize| {
                    let m = prop.magnitude[[a, b]];
                    let t = theta[[a, b]];
                    m * (-t.sin() * dar[[a, b]] + t.cos() * dai[[a, b]])
                };
                2.0 * PI * prop.skew[[u, v]] * (d_theta(u, v) - d_theta(v, u))
            })
            .collect();
        grads.charge = Some(gq);
    }
    grads
}

/// Predicted class per vertex.
pub fn predict(logits: &Array2<f64>) -> Vec<usize> {
    logits
        .rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &x)| {
                    if x > best.1 {
                        (k, x)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}
