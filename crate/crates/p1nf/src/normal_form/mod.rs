//! The normal-form conjugation: recurrence solver, independent residual
//! verification, resonance/obstruction analysis, the classical pole-series
//! cross-check, and coefficient-growth diagnostics.

pub mod forcing;
pub mod growth;
pub mod laurent;
pub mod residual;
pub mod solve;

pub use forcing::Forcing;
pub use growth::{norm_and_growth, GrowthReport};
pub use laurent::{painleve_test, CompatibilityReport};
pub use residual::{partial_map_residual, residual_pde};
pub use solve::{
    divisor, indicial_exponents, resonance_residual, solve_normal_form, NormalFormSeries,
    Recurrence, ResonanceReport, SolveParams,
};

use crate::series::{SeriesError, TPoly};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NormalFormError {
    /// The `(k,n) = (6,0)` compatibility value is nonzero: the forcing
    /// admits no power-series conjugation (its pole expansions pick up
    /// logarithms).
    #[error("logarithmic obstruction at k=6: compatibility value {residual} must vanish identically")]
    Obstruction { residual: TPoly },
    #[error("series orders out of range: need K >= 5 and N >= 1, got K={k}, N={n}")]
    BadOrders { k: usize, n: usize },
    #[error("eps must lie in (0, 1/4), got {eps}")]
    BadEps { eps: f64 },
    #[error("series operation failed: {0}")]
    Series(#[from] SeriesError),
}
