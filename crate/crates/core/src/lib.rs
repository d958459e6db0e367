//! Split conformal prediction for closed-ended multiple-choice question
//! answering.
//!
//! A model is sampled `P` times per question; the share of samples landing on
//! each option gives an empirical answer distribution. This crate calibrates
//! a nonconformity threshold on held-out questions and turns each new
//! question's distribution into a prediction set whose marginal miscoverage
//! is at most a user-chosen `alpha`, assuming exchangeable data.
//!
//! - [`conformal`]: scores, the conformal quantile, prediction sets, bounds.
//! - [`distribution`]: question records and their answer distributions.
//! - [`synthetic`]: exchangeable synthetic data and exact coverage oracles.
//! - [`harness`]: repeated random splits and alpha / split-ratio sweeps.
//! - [`io`]: JSONL and CSV formats.
//! - [`cli`]: the `conformal-mcq` command.
//!
//! ```
//! use conformal_mcq::conformal::*;
//!
//! let cal = CalibrationScores::new(vec![0.10, 0.20, 0.30, 0.40]).unwrap();
//! let tau = conformal_threshold(&cal, RiskLevel::new(0.5).unwrap());
//! assert_eq!(tau, Threshold::Finite(0.30));
//!
//! let dist = ClassDistribution::new(vec![0.75, 0.1, 0.1, 0.05]).unwrap();
//! assert_eq!(prediction_set(&dist, tau).members(), &[0]);
//! ```

pub mod cli;
pub mod conformal;
pub mod distribution;
pub mod error;
pub mod harness;
pub mod io;
pub mod rng;
pub mod synthetic;

pub use error::{Error, Result};
