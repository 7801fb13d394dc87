//! Reference implementations for verification.
//!
//! - [`brute`]: the estimators evaluated straight from their definitions,
//!   in any numeric type (floating point or exact rationals).
//! - [`exact`]: exact expectations under finite distributions.
//! - [`bound`]: exhaustive search for samples attaining the upper bound.
//! - [`sweep`]: randomized checks of bounds and identities.

pub mod bound;
pub mod brute;
pub mod exact;
pub mod sweep;

pub use bound::{bound_search, BoundSearch};
pub use brute::{brute_count_sums, brute_estimators, brute_stats, BruteStats};
pub use exact::{
    decimal_string, enumerate, exact_bias, exact_unbiasedness, exact_unbiasedness_with_budget, fixture,
    Enumeration, ExactExpectation, FiniteDist, FiniteDistPair, DEFAULT_BUDGET, FIXTURES,
};
pub use sweep::{identity_sweep, random_sample, sweep_rng, SampleKind, SweepConfig, SweepReport};
