//! Builds `is-a` concept hierarchies from pattern-extracted text.
//!
//! The pipeline has three stages:
//!
//! 1. [`extract`] matches Hearst-style lexico-syntactic patterns against
//!    POS-tagged sentences and aggregates the hits into a weighted directed
//!    graph of (hyponym, hypernym) pairs.
//! 2. [`train`] embeds that graph on the Lorentz model of hyperbolic space
//!    with entailment cones (Ganea et al. 2018, transported from the Poincaré
//!    ball), optimized by Riemannian SGD.
//! 3. [`eval`] scores the embedding — or one of the [`baselines`] — on
//!    hypernymy detection, direction, graded entailment, and taxonomy
//!    reconstruction benchmarks.
//!
//! [`geometry`] and [`cones`] hold the numerical kernel; [`graph`] owns the
//! edge-weight bookkeeping and its probability/PPMI matrix views.

pub mod baselines;
pub mod cones;
pub mod config;
pub mod eval;
pub mod extract;
pub mod geometry;
pub mod graph;
pub mod guards;
pub mod train;

pub use cones::{ConeParams, PairEnergy};
pub use geometry::{LorentzPoint, PoincarePoint, TangentVector};
