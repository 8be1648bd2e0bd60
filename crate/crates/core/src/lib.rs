//! Finite-time ruin probabilities for a bidimensional perturbed compound
//! Poisson risk model with constant interest force and correlated Brownian
//! perturbations.
//!
//! The crate has three halves that check each other:
//!
//! * [`risk_process`] and [`ruin_detect`] simulate the discounted surplus
//!   pair and flag the four ruin events (`max`, `min`, `sum`, `and`);
//! * [`asymptotics`] evaluates the large-capital approximations of the same
//!   probabilities, including the tail integrals used when `r > 0`;
//! * [`mc_engine`] estimates the probabilities with reproducible parallel
//!   batches and compares them with the approximations.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod error;
pub mod heavy_tails;
pub mod mc_engine;
pub mod normal;
pub mod quadrature;
pub mod risk_process;
pub mod rng;
pub mod ruin_detect;
pub mod verify;

pub use asymptotics::{AsymptoticResult, CaseId};
pub use error::{Error, Result};
pub use heavy_tails::{mixture_tail, ClaimDistribution, ClassTag};
pub use mc_engine::{Estimate, EstimateSet, McOptions, RuinType, StudyRow};
pub use risk_process::{DiscountedPath, ModelConfig, PremiumMode};
pub use ruin_detect::RuinOutcome;
