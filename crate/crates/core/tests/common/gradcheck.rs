//! Central finite-difference checks of the network gradients.

use hypermagnet::magnetic::{ChargeParams, Propagation};
use hypermagnet::network::{backward, forward, loss, ChargeMode, ModelConfig, ModelState};
use ndarray::Array2;
use rand::Rng;

pub const STEP: f64 = 1e-6;

pub struct Instance {
    pub prop: Propagation,
    pub x0: Array2<f64>,
    pub labels: Vec<Option<usize>>,
    pub mask: Vec<bool>,
    pub state: ModelState,
}

pub fn instance(seed: u64, mode: ChargeMode) -> Instance {
    let mut rng = super::rng(seed);
    let n = 12;
    let p = super::random_stochastic(&mut rng, n, 0.35);
    let prop = Propagation::new(&p).unwrap();
    let x0 = super::random_matrix(&mut rng, n, 6);
    let labels = (0..n).map(|_| Some(rng.random_range(0..2))).collect();
    let mut mask: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.7).collect();
    mask[0] = true;
    let config = ModelConfig {
        hidden: 8,
        n_classes: 2,
        weight_decay: 0.01,
        seed,
        charge_mode: mode,
        ..Default::default()
    };
    let mut state = ModelState::init(&config, 6, &prop, true).unwrap();
    for l in &mut state.layers {
        l.bias.mapv_inplace(|_| rng.random_range(-0.2..0.2));
    }
    if let ChargeParams::Matrix(q) = &mut state.charge {
        // spread charges widely so phases are far from zero
        for x in q.values_mut() {
            *x = rng.random_range(-2.0..2.0);
        }
    }
    Instance {
        prop,
        x0,
        labels,
        mask,
        state,
    }
}

pub fn objective(inst: &Instance, state: &ModelState) -> (f64, Vec<Array2<f64>>) {
    let (logits, cache) = forward(state, &inst.prop, &inst.x0).unwrap();
    let value = loss(
        &logits,
        &inst.labels,
        &inst.mask,
        state,
        state.config.weight_decay,
    )
    .unwrap();
    (value, cache.keep_masks().into_iter().cloned().collect())
}

#[derive(Debug, Clone, Copy)]
pub enum Param {
    WSelf(usize),
    WNeigh(usize),
    Bias(usize),
    Head,
    Charge,
}

pub const CLASSES: [Param; 8] = [
    Param::WSelf(0),
    Param::WNeigh(0),
    Param::Bias(0),
    Param::WSelf(1),
    Param::WNeigh(1),
    Param::Bias(1),
    Param::Head,
    Param::Charge,
];

pub fn param_mut(state: &mut ModelState, class: Param) -> &mut [f64] {
    match class {
        Param::WSelf(l) => state.layers[l].w_self.as_slice_mut().unwrap(),
        Param::WNeigh(l) => state.layers[l].w_neigh.as_slice_mut().unwrap(),
        Param::Bias(l) => state.layers[l].bias.as_slice_mut().unwrap(),
        Param::Head => state.head.as_slice_mut().unwrap(),
        Param::Charge => match &mut state.charge {
            ChargeParams::Matrix(q) => q.values_mut(),
            _ => panic!("no charge matrix"),
        },
    }
}

pub fn analytic(g: &hypermagnet::network::Gradients, class: Param) -> &[f64] {
    match class {
        Param::WSelf(l) => g.layers[l].w_self.as_slice().unwrap(),
        Param::WNeigh(l) => g.layers[l].w_neigh.as_slice().unwrap(),
        Param::Bias(l) => g.layers[l].bias.as_slice().unwrap(),
        Param::Head => g.head.as_slice().unwrap(),
        Param::Charge => g.charge.as_deref().unwrap(),
    }
}

/// Worst relative error per parameter class; entries whose perturbation
/// flips an activation are skipped.
pub fn check(inst: &Instance) -> Vec<(Param, f64, usize)> {
    let (logits, cache) = forward(&inst.state, &inst.prop, &inst.x0).unwrap();
    let grads = backward(
        &inst.state,
        &inst.prop,
        &cache,
        &logits,
        &inst.labels,
        &inst.mask,
    )
    .unwrap();
    let (_, base_masks) = objective(inst, &inst.state);
    let mut out = Vec::new();
    for class in CLASSES {
        let len = param_mut(&mut inst.state.clone(), class).len();
        let mut worst = 0.0f64;
        let mut checked = 0;
        for i in 0..len {
            let mut plus = inst.state.clone();
            param_mut(&mut plus, class)[i] += STEP;
            let mut minus = inst.state.clone();
            param_mut(&mut minus, class)[i] -= STEP;
            let (fp, mp) = objective(inst, &plus);
            let (fm, mm) = objective(inst, &minus);
            if mp != base_masks || mm != base_masks {
                continue;
            }
            let fd = (fp - fm) / (2.0 * STEP);
            let an = analytic(&grads, class)[i];
            let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-4);
            worst = worst.max(rel);
            checked += 1;
        }
        out.push((class, worst, checked));
    }
    out
}
