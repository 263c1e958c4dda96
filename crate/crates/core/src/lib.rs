//! Curriculum data scheduling for mini-batch gradient training.
//!
//! The crate reorders, paces and weights training samples according to
//! per-sample priority scores, derived either from static per-class prior
//! knowledge or from Monte-Carlo-dropout predictive entropy, and ships an
//! experiment harness that compares the resulting schedules against
//! baseline, anti-curriculum and random controls on controlled digit
//! classification scenarios (limited data, class imbalance, label noise).
//!
//! Modules:
//! - [`nn`] — a from-scratch dense classifier with dropout, weighted
//!   cross-entropy and two optimizers;
//! - [`scoring`] — priority scores and curriculum probabilities;
//! - [`scheduler`] — epoch plans for the reorder / subsets / weights
//!   strategies, including pacing and score decay;
//! - [`data`] — IDX ingestion, deterministic splits and the controlled
//!   corruptions;
//! - [`experiments`] — the run/grid harness, metrics, significance tests
//!   and CSV reporting.

pub mod data;
pub mod error;
pub mod experiments;
pub mod nn;
pub mod rng;
pub mod scheduler;
pub mod scoring;

pub use error::{Error, Result};
