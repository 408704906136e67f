//! Hypergraph learning with non-reversible random walks and magnetic
//! Laplacians.
//!
//! The pipeline turns a hypergraph with edge-dependent vertex weights into a
//! (generally non-reversible) Markov chain, encodes the chain as a complex
//! Hermitian magnetic Laplacian with a learnable charge matrix, and trains a
//! small complex-valued spectral network for node classification. Real
//! graph-reduction baselines are included for comparison.

pub mod baselines;
pub mod edvw;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod hypergraph;
pub mod io;
pub mod magnetic;
pub mod network;
pub mod spectral;
pub mod walks;

pub use edvw::{degree_edvw, knn_hypergraph, tfidf_edvw, DocTermCounts, EdvwMatrix};
pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, IdMap, StarGraph};
pub use magnetic::{ChargeMatrix, ChargeParams, LaplacianForm, MagneticLaplacian, Propagation};
pub use walks::{TransitionMatrix, WalkKind};
