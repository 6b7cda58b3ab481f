//! Preferential and fuzzy semantics for trained networks.
//!
//! This crate builds finite logical models out of trained self-organising
//! maps and multilayer perceptrons, answers strict and defeasible
//! concept-inclusion queries over those models by model checking, extracts
//! weighted conditional knowledge bases from network wiring, and verifies
//! that a network's fuzzy model stays coherent with its extracted knowledge
//! base.
//!
//! The crate is organised around the pipeline:
//!
//! * [`syntax`] — the concept language: AST, parser, renderer, knowledge-base
//!   documents.
//! * [`model`] — preference relations, multipreference models, and
//!   two-valued model checking.
//! * [`fuzzy`] — fuzzy models, t-norm based evaluation, and graded
//!   inclusion checking.
//! * [`som`] — self-organising maps: training, relative distance, and the
//!   preferential model of a trained map.
//! * [`network`] — feedforward and recurrent networks: evaluation and the
//!   two-valued / fuzzy models of a trained network.
//! * [`kb`] — weighted knowledge bases: extraction from networks, weight
//!   computation, induced preferences, and coherence checking.
//! * [`snapshot`] — file formats: map/network/model snapshots and CSV
//!   stimulus data.

pub mod fuzzy;
pub mod kb;
pub mod model;
pub mod network;
pub mod snapshot;
pub mod som;
pub mod syntax;

/// Default absolute tolerance used when comparing membership degrees,
/// weights, and fuzzy thresholds. Two values closer than this are treated
/// as tied.
pub const DEFAULT_EPSILON: f64 = 1e-9;
