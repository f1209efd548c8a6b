//! Group-relative policy optimization for no-reference image quality
//! assessment, reshaped by two extra learning signals:
//!
//! * an uncertainty weight derived from the spread of scores inside each
//!   rollout group, which scales every advantage of that group, and
//! * a perception term that rewards the policy for reacting differently to an
//!   image and a degraded copy of it, kept in check by entropy penalties under
//!   both conditions.
//!
//! The policy is a two-token categorical model (format token, score bin)
//! conditioned on handcrafted image features, so every distribution, KL and
//! entropy in the objective can be enumerated exactly.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod featex;
pub mod grpo;
pub mod imgcore;
pub mod metrics;
pub mod policy;
pub mod reward;
pub mod rng;

pub use error::{Error, Result};
