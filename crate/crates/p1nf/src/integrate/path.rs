//! Piecewise integration contours in the complex plane.

use num_complex::Complex64;
use thiserror::Error;

/// One contour leg, parametrized by `s` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathSpec {
    Line {
        from: Complex64,
        to: Complex64,
    },
    /// Circular arc `center + radius * exp(i theta)` with `theta` moving
    /// linearly from `from_angle` to `to_angle` (either direction).
    Arc {
        center: Complex64,
        radius: f64,
        from_angle: f64,
        to_angle: f64,
    },
}

impl PathSpec {
    pub fn at(&self, s: f64) -> Complex64 {
        match *self {
            PathSpec::Line { from, to } => from + (to - from) * s,
            PathSpec::Arc { center, radius, from_angle, to_angle } => {
                let th = from_angle + (to_angle - from_angle) * s;
                center + radius * Complex64::new(0.0, th).exp()
            }
        }
    }

    /// `dx/ds`.
    pub fn tangent(&self, s: f64) -> Complex64 {
        match *self {
            PathSpec::Line { from, to } => to - from,
            PathSpec::Arc { center: _, radius, from_angle, to_angle } => {
                let th = from_angle + (to_angle - from_angle) * s;
                radius
                    * (to_angle - from_angle)
                    * Complex64::new(0.0, 1.0)
                    * Complex64::new(0.0, th).exp()
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.at(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.at(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            PathSpec::Line { from, to } => (to - from).norm(),
            PathSpec::Arc { radius, from_angle, to_angle, .. } => {
                radius * (to_angle - from_angle).abs()
            }
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("path has no legs")]
    Empty,
    #[error("leg {index} has zero length")]
    DegenerateLeg { index: usize },
    #[error("leg {index} starts at {got} but the previous leg ends at {want}")]
    Disconnected { index: usize, got: Complex64, want: Complex64 },
}

/// Legs must be non-empty, non-degenerate, and join end-to-start.
pub fn validate_path(legs: &[PathSpec]) -> Result<(), PathError> {
    if legs.is_empty() {
        return Err(PathError::Empty);
    }
    for (i, leg) in legs.iter().enumerate() {
        if leg.length() == 0.0 {
            return Err(PathError::DegenerateLeg { index: i });
        }
        if i > 0 {
            let want = legs[i - 1].end();
            let got = leg.start();
            let scale = 1.0 + want.norm().max(got.norm());
            if (got - want).norm() > 1e-9 * scale {
                return Err(PathError::Disconnected { index: i, got, want });
            }
        }
    }
    Ok(())
}

/// Straight segment.
pub fn line(from: Complex64, to: Complex64) -> PathSpec {
    PathSpec::Line { from, to }
}

/// Closed counterclockwise loop around `center` starting at angle
/// `start_angle`, split into quarter arcs so no leg exceeds a half turn.
pub fn loop_around(center: Complex64, radius: f64, start_angle: f64) -> Vec<PathSpec> {
    let mut legs = Vec::with_capacity(4);
    for q in 0..4 {
        let a = start_angle + std::f64::consts::FRAC_PI_2 * q as f64;
        let b = start_angle + std::f64::consts::FRAC_PI_2 * (q + 1) as f64;
        legs.push(PathSpec::Arc { center, radius, from_angle: a, to_angle: b });
    }
    legs
}
