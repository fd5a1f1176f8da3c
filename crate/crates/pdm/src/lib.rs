//! Multiscale partition decoupling for roll call voting data.
//!
//! A roll call matrix records every legislator's vote (+1 yea, -1 nay,
//! 0 absent/present) on every bill of a session. This crate decomposes
//! that matrix into successive layers of structure: each layer clusters
//! legislators on a spectral embedding of their vote-correlation network,
//! summarizes each cluster by a unit "motivation" vector (the normalized
//! mean voting profile), projects the data onto the motivation span, and
//! recurses on the residual until it is indistinguishable from column-
//! shuffled noise.
//!
//! The pipeline is fully unsupervised: the cluster count `k0` comes from
//! an AIC scan over Gaussian-mixture fits of the Fiedler vector, and the
//! embedding dimension `l` from comparing Laplacian eigenvalues against
//! permutation null models. Companion modules estimate the effective
//! dimension of each layer by multidimensional scaling ([`mds`]), find
//! the votes that best separate clusters with AdaBoost ([`boost`]),
//! score sign predictions against baseline models ([`eval`]), and
//! validate the whole approach on synthetic party-loyalty data ([`sim`]).
//!
//! # Quick start
//!
//! ```
//! use pdm::sim::{simulate, SimConfig};
//! use pdm::engine::{decompose, PdmConfig};
//!
//! // Synthetic chamber: strong party loyalty, two parties.
//! let sim = simulate(&SimConfig {
//!     n_members: 40,
//!     n_votes: 120,
//!     alpha: 12.0,
//!     ..SimConfig::default()
//! })
//! .unwrap();
//! let decomp = decompose(&sim.vote_matrix, &PdmConfig::default()).unwrap();
//! assert!(!decomp.layers.is_empty());
//! ```
//!
//! Runnable walkthroughs for every capability live in `examples/`; the
//! `pdm` binary wires the same calls into an `analyze` / `simulate` /
//! `eval` command line.

pub mod boost;
pub mod cluster;
pub mod engine;
pub mod error;
pub mod eval;
pub mod mds;
pub mod report;
pub mod rollcall;
pub mod seed;
pub mod sim;
pub mod spectral;

pub use error::{PdmError, Result};

/// Numerical tolerance for "zero" eigenvalues and orthogonality checks.
pub const EPS_NUM: f64 = 1e-8;
