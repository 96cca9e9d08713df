//! Top-k mining of high-relevance trajectory patterns over anonymized
//! activity trajectories.
//!
//! Anonymized trajectories (per-term bounding rectangles plus activity
//! sets) are encoded onto a uniform grid as weighted location-activity
//! sequences, where each cell's weight is the fraction of the rectangle it
//! covers. A pattern's relevance in a sequence is the best total weight over
//! its matches; the miner returns the `k` patterns of highest summed
//! relevance.
//!
//! All numeric code is generic over [`Scalar`]; [`Exact`] (arbitrary
//! precision rationals) reproduces hand-computed values exactly and
//! [`Float`] is the fast path.

pub mod anonymize;
pub mod error;
pub mod grid;
pub mod io;
pub mod miner;
pub mod model;
pub mod oracle;
pub mod relevance;
pub mod report;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{CellGrid, CellId, Mbr, Rect, Region, WeightedLocationSet};
pub use miner::{mine_topk, MiningConfig, MiningMetrics, MiningOutcome, Variant};
pub use model::{PatternTerm, TrajectoryPattern, WlasDatabase, WlasSequence, WlasTerm};
pub use scalar::Scalar;

/// Arbitrary-precision rational scores.
pub type Exact = num_rational::BigRational;
/// Fixed-width rational scores; overflow panics, so keep inputs small.
pub type SmallExact = num_rational::Ratio<i64>;
pub type Float = f64;

pub type ExactDatabase = WlasDatabase<Exact>;
pub type FloatDatabase = WlasDatabase<Float>;
pub type ExactGrid = CellGrid<Exact>;
pub type FloatGrid = CellGrid<Float>;
pub type ExactOutcome = MiningOutcome<Exact>;
pub type FloatOutcome = MiningOutcome<Float>;
