//! (p,q)-analogue of the Bernstein-Stancu operators.
//!
//! The kernels are generic over [`Scalar`], implemented for `f64`, `f32` and
//! the exact [`Rational`] backend. The aliases below fix the two backends the
//! crate is normally used with.

// Argument checks are written `!(x > 0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod moments;
pub mod operator;
pub mod pq;
pub mod scalar;
pub mod smoothness;
pub mod statconv;
pub mod structure;
pub mod target;

pub use error::{Error, Result};
pub use pq::{OperatorSpec, PQParams, Regime, StancuParams};
pub use scalar::{Mode, Rational, Scalar};
pub use target::{Convexity, TargetFn};

/// Float-mode operator parameters.
pub type Spec = OperatorSpec<f64>;
/// Exact-mode operator parameters.
pub type ExactSpec = OperatorSpec<Rational>;
pub type Fn64 = TargetFn<f64>;
pub type ExactFn = TargetFn<Rational>;

/// Environment variable holding the seed for randomized test drivers.
pub const SEED_ENV: &str = "PQ_STANCU_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Seed from `PQ_STANCU_SEED` (decimal or `0x` hex), else [`DEFAULT_SEED`].
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Err(_) => Ok(DEFAULT_SEED),
        Ok(raw) => {
            let s = raw.trim();
            let parsed = match s.strip_prefix("0x") {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => s.parse(),
            };
            parsed.map_err(|e| Error::Parse(format!("{SEED_ENV}={raw:?}: {e}")))
        }
    }
}
