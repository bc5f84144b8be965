//! Coordinate charts around a double pole and the domains where the
//! conjugating map is used.
//!
//! Near a pole both `y'' = 6y^2 + f(x)` and `u'' = 6u^2` blow up like
//! `(x - p)^{-2}`; the chart
//!
//! `v = -y' / y^2,  w = y^3 / y'^2`
//!
//! regularizes this: a double pole becomes `(v, w) = (0, 1/4)`.  The
//! inverse is `y = 1/(v^2 w)`, `y' = -1/(v^3 w^2)`.  The same formulas
//! serve both planes; only the interpretation of the base variable
//! (`x` or `t`) differs.

mod map;

pub use map::{closure_contained, ClosureCheck, ExactFlow, GammaMap};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("chart singular: y = 0 or y' = 0")]
    Singular,
    #[error("point at infinity (pole locus): v = 0")]
    PoleLocus,
    #[error("outside invertibility region: no convergence in {0} iterations")]
    NoConvergence(usize),
}

/// Solution sample of `y'' = 6y^2 + f(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1Point {
    pub x: Complex64,
    pub y: Complex64,
    pub yp: Complex64,
}

/// Solution sample of the autonomous equation `u'' = 6u^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPoint {
    pub t: Complex64,
    pub u: Complex64,
    pub up: Complex64,
}

/// A point in pole-regularizing coordinates over either plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub base: Complex64,
    pub v: Complex64,
    pub w: Complex64,
}

fn chart_forward(base: Complex64, y: Complex64, yp: Complex64) -> Result<ChartPoint, ChartError> {
    if y == Complex64::new(0.0, 0.0) || yp == Complex64::new(0.0, 0.0) {
        return Err(ChartError::Singular);
    }
    Ok(ChartPoint {
        base,
        v: -yp / (y * y),
        w: y * y * y / (yp * yp),
    })
}

fn chart_backward(c: &ChartPoint) -> Result<(Complex64, Complex64), ChartError> {
    if c.v == Complex64::new(0.0, 0.0) {
        return Err(ChartError::PoleLocus);
    }
    if c.w == Complex64::new(0.0, 0.0) {
        return Err(ChartError::Singular);
    }
    let v2 = c.v * c.v;
    let y = 1.0 / (v2 * c.w);
    let yp = -1.0 / (v2 * c.v * c.w * c.w);
    Ok((y, yp))
}

impl P1Point {
    pub fn to_chart(&self) -> Result<ChartPoint, ChartError> {
        chart_forward(self.x, self.y, self.yp)
    }
}

impl EllipticPoint {
    pub fn to_chart(&self) -> Result<ChartPoint, ChartError> {
        chart_forward(self.t, self.u, self.up)
    }
}

impl ChartPoint {
    pub fn to_p1(&self) -> Result<P1Point, ChartError> {
        let (y, yp) = chart_backward(self)?;
        Ok(P1Point { x: self.base, y, yp })
    }

    pub fn to_elliptic(&self) -> Result<EllipticPoint, ChartError> {
        let (u, up) = chart_backward(self)?;
        Ok(EllipticPoint { t: self.base, u, up })
    }
}

/// Size constants for the outer domain (where the series converges) and
/// the inner domain (where the inverse map is used).
#[derive(Debug, Clone, Copy)]
pub struct RegionParams {
    /// Outer `|v| < 1/R`.
    pub r_big: f64,
    /// Outer `|w - 1/4| < eps`.
    pub eps: f64,
    /// Inner `|base - center| < xi`.
    pub xi: f64,
    /// Inner `|v| < 1/S`.
    pub s_big: f64,
    /// Inner `|w - 1/4| < delta`.
    pub delta: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        RegionParams {
            r_big: 4.0,
            eps: 0.05,
            xi: 0.5,
            s_big: 8.0,
            delta: 0.025,
        }
    }
}

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("eps must lie in (0, 1/4), got {0}")]
    BadEps(f64),
    #[error("region constant out of range: {0}")]
    BadConstant(String),
}

impl RegionParams {
    pub fn new(r_big: f64, eps: f64, xi: f64, s_big: f64, delta: f64) -> Result<Self, RegionError> {
        if !(eps > 0.0 && eps < 0.25) {
            return Err(RegionError::BadEps(eps));
        }
        if r_big < 1.0 || r_big.is_nan() {
            return Err(RegionError::BadConstant(format!("need R >= 1, got {r_big}")));
        }
        if s_big < 1.0 || s_big.is_nan() {
            return Err(RegionError::BadConstant(format!("need S >= 1, got {s_big}")));
        }
        if !(delta > 0.0 && delta < 0.25) {
            return Err(RegionError::BadConstant(format!(
                "need delta in (0, 1/4), got {delta}"
            )));
        }
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(RegionError::BadConstant(format!(
                "need xi in (0, 1], got {xi}"
            )));
        }
        Ok(RegionParams {
            r_big,
            eps,
            xi,
            s_big,
            delta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Series-convergence domain: `|base - center| < 1`, `|v| < 1/R`,
    /// `|w - 1/4| < eps`.
    Outer,
    /// Inversion domain: `|base - center| < xi`, `|v| < 1/S`,
    /// `|w - 1/4| < delta`.
    Inner,
}

/// Membership verdict with signed distances to the three boundaries
/// (positive inside, in the order base / v / w).
#[derive(Debug, Clone, Copy)]
pub struct RegionCheck {
    pub inside: bool,
    pub margins: [f64; 3],
}

pub fn in_region(
    c: &ChartPoint,
    center: Complex64,
    params: &RegionParams,
    which: Region,
) -> RegionCheck {
    let (base_bound, v_bound, w_bound) = match which {
        Region::Outer => (1.0, 1.0 / params.r_big, params.eps),
        Region::Inner => (params.xi, 1.0 / params.s_big, params.delta),
    };
    let margins = [
        base_bound - (c.base - center).norm(),
        v_bound - c.v.norm(),
        w_bound - (c.w - Complex64::new(0.25, 0.0)).norm(),
    ];
    RegionCheck {
        inside: margins.iter().all(|&m| m > 0.0),
        margins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chart_of_unit_point() {
        let p = P1Point {
            x: c(0.0, 0.0),
            y: c(1.0, 0.0),
            yp: c(2.0, 0.0),
        };
        let ch = p.to_chart().unwrap();
        assert_eq!(ch.v, c(-2.0, 0.0));
        assert_eq!(ch.w, c(0.25, 0.0));
        let p2 = P1Point {
            x: c(0.0, 0.0),
            y: c(1.0, 0.0),
            yp: c(-2.0, 0.0),
        };
        let ch2 = p2.to_chart().unwrap();
        assert_eq!(ch2.v, c(2.0, 0.0));
        assert_eq!(ch2.w, c(0.25, 0.0));
    }

    #[test]
    fn pure_double_pole_maps_to_chart_center() {
        // y = (x-p)^{-2}: v = 2(x-p), w = 1/4 exactly.
        let p = c(1.0, 0.5);
        for z in [c(0.1, 0.0), c(0.0, 0.05), c(-0.03, 0.02)] {
            let x = p + z;
            let y = 1.0 / (z * z);
            let yp = -2.0 / (z * z * z);
            let ch = P1Point { x, y, yp }.to_chart().unwrap();
            assert!((ch.v - 2.0 * z).norm() < 1e-13 * z.norm());
            assert!((ch.w - c(0.25, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn roundtrip_both_ways() {
        let pts = [
            (c(1.0, 2.0), c(0.3, -0.4)),
            (c(-0.5, 0.1), c(2.0, 1.0)),
            (c(0.01, 0.0), c(0.0, -3.0)),
        ];
        for (y, yp) in pts {
            let ch = chart_forward(c(0.0, 0.0), y, yp).unwrap();
            let (y2, yp2) = chart_backward(&ch).unwrap();
            assert!((y - y2).norm() <= 1e-13 * y.norm());
            assert!((yp - yp2).norm() <= 1e-13 * yp.norm());
        }
        let ch = ChartPoint {
            base: c(0.0, 0.0),
            v: c(0.2, -0.1),
            w: c(0.3, 0.05),
        };
        let (y, yp) = chart_backward(&ch).unwrap();
        let ch2 = chart_forward(ch.base, y, yp).unwrap();
        assert!((ch.v - ch2.v).norm() < 1e-13);
        assert!((ch.w - ch2.w).norm() < 1e-13);
    }

    #[test]
    fn singular_inputs_are_rejected() {
        assert!(matches!(
            chart_forward(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
            Err(ChartError::Singular)
        ));
        assert!(matches!(
            chart_forward(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            Err(ChartError::Singular)
        ));
        let at_pole = ChartPoint {
            base: c(0.0, 0.0),
            v: c(0.0, 0.0),
            w: c(0.25, 0.0),
        };
        assert!(matches!(at_pole.to_p1(), Err(ChartError::PoleLocus)));
    }

    #[test]
    fn region_membership_is_strict() {
        let params = RegionParams::default();
        let center = c(0.0, 0.0);
        let middle = ChartPoint {
            base: center,
            v: c(0.0, 0.0),
            w: c(0.25, 0.0),
        };
        let chk = in_region(&middle, center, &params, Region::Outer);
        assert!(chk.inside);
        assert!((chk.margins[0] - 1.0).abs() < 1e-15);
        assert!((chk.margins[1] - 0.25).abs() < 1e-15);
        assert!((chk.margins[2] - 0.05).abs() < 1e-15);

        let boundary = ChartPoint {
            base: center,
            v: c(0.25, 0.0),
            w: c(0.25, 0.0),
        };
        assert!(!in_region(&boundary, center, &params, Region::Outer).inside);

        let inner = ChartPoint {
            base: c(0.4, 0.0),
            v: c(0.1, 0.0),
            w: c(0.26, 0.0),
        };
        assert!(in_region(&inner, center, &params, Region::Inner).inside);
        assert!(!in_region(&inner, c(1.0, 0.0), &params, Region::Inner).inside);
    }

    #[test]
    fn region_params_validation() {
        assert!(RegionParams::new(4.0, 0.05, 0.5, 8.0, 0.025).is_ok());
        let e = RegionParams::new(4.0, 0.3, 0.5, 8.0, 0.025).unwrap_err();
        assert!(e.to_string().contains("eps must lie in (0, 1/4)"));
        assert!(RegionParams::new(0.5, 0.05, 0.5, 8.0, 0.025).is_err());
        assert!(RegionParams::new(4.0, 0.05, 0.5, 8.0, 0.3).is_err());
    }
}
