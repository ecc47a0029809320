//! Entropies, proper scoring rules and their convex-analytic certificates on
//! prediction cones of (denormalised) densities.
//!
//! The three smooth rules (logarithmic, Hyvärinen, quadratic) and the
//! supremum rule are evaluated by deterministic quadrature. Directional
//! derivatives are estimated by difference quotients and compared with the
//! closed forms `p·S(q)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_lab;
pub mod cli;
pub mod convexity;
pub mod densities;
pub mod error;
pub mod pairing;
pub mod rules;

pub use densities::{make_density, ConeSpec, Density, DensityConfig, Field};
pub use error::{Error, Result};
pub use pairing::QuadratureScheme;
pub use rules::ScoringRuleId;

use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of `text`.
pub(crate) fn digest(text: &str) -> String {
    let h = Sha256::digest(text.as_bytes());
    hex::encode(&h[..8])
}
