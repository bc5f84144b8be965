//! Exact truncated series in the chart variables.
//!
//! Three layers, innermost first:
//! - [`TPoly`]: polynomials in the base point `tau` over the rationals;
//! - [`WSeries`]: truncated series in `s = w - 1/4` with `TPoly` coefficients;
//! - [`VSeries`]: truncated series in `v` with `WSeries` coefficients.
//!
//! Every object tracks the order through which it is certified, and
//! arithmetic propagates those orders sharply (valuation-aware products).

pub mod tpoly;
pub mod vseries;
pub mod wseries;

pub use tpoly::TPoly;
pub use vseries::VSeries;
pub use wseries::WSeries;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    /// Inversion needs a leading coefficient that is a nonzero rational
    /// constant.
    #[error("series is not invertible: leading coefficient is not a nonzero constant")]
    NotAUnit,
    /// An operation would produce a negative power of `v` (division by `v`
    /// past the valuation, or the flow derivative applied to a series whose
    /// `v^0` term depends on `w`).
    #[error("operation would produce a negative power of v")]
    NegativePower,
    /// Composition `f(tau + delta)` needs `delta` to vanish at `v = 0`.
    #[error("composition requires the increment to have positive v-valuation")]
    CompositionNeedsValuation,
}
