//! Planted generator: reductions, balance, and walk asymmetry.

use hypermagnet::generate::{generate_planted_hypergraph, PlantedConfig};
use hypermagnet::walks::{
    detailed_balance_residual, edvw_transition, stationary_distribution, zhou_transition,
    StationaryOptions,
};

#[test]
fn zero_signal_gives_the_zhou_walk() {
    let cfg = PlantedConfig {
        n: 80,
        edges_per_class: 40,
        direction_signal: 0.0,
        seed: 5,
        ..Default::default()
    };
    let d = generate_planted_hypergraph(&cfg).unwrap();
    let a = edvw_transition(&d.hypergraph, &d.edvw).unwrap();
    let b = zhou_transition(&d.hypergraph).unwrap();
    let diff = (a.values() - b.values())
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(diff <= 1e-12, "{diff}");
}

#[test]
fn default_walk_is_non_reversible() {
    let d = generate_planted_hypergraph(&PlantedConfig::default()).unwrap();
    let p = edvw_transition(&d.hypergraph, &d.edvw).unwrap();
    let pi = stationary_distribution(&p, &StationaryOptions::default()).unwrap();
    let residual = detailed_balance_residual(p.values(), &pi.values);
    let scale = p
        .values()
        .indexed_iter()
        .map(|((i, _), &x)| pi.values[i] * x)
        .fold(0.0f64, f64::max);
    println!("residual {residual:e}, largest flow {scale:e}");
    assert!(residual > 0.01 * scale);
}
