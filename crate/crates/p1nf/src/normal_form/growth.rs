//! Coefficient-size diagnostics for the conjugation series.
//!
//! For each computed `gamma_k(t, s)` we measure
//!
//! `|gamma_k| = sum_j sup_{|s| = eps} |c_{k,j}(s)|`
//!
//! where `gamma_k = sum_j c_{k,j}(s) t^j`.  The sup is approximated by
//! sampling the circle `|s| = eps`.  The series converges on a `v`-disk
//! whose radius shows up as geometric decay of `|gamma_k|`; after the
//! algebraic factor `k^{3/2}` is divided out the ratio of consecutive
//! scaled norms should approach a constant, and a log-linear fit of the
//! scaled norms estimates the prefactor and the radius.

use super::{NormalFormError, NormalFormSeries};
use crate::series::WSeries;
use num_complex::Complex64;

const CIRCLE_SAMPLES: usize = 256;

#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub eps: f64,
    /// `(k, |gamma_k|)` for every computed order.
    pub norms: Vec<(usize, f64)>,
    /// `(k, |gamma_{k+1}| (k+1)^{3/2} / (|gamma_k| k^{3/2}))` for
    /// consecutive orders with nonzero norms.
    pub ratios: Vec<(usize, f64)>,
    /// Least-squares fit `|gamma_k| k^{3/2} ~ prefactor * radius^{-k}`,
    /// absent when fewer than two nonzero norms are available.
    pub fit_prefactor: Option<f64>,
    pub fit_radius: Option<f64>,
}

fn scaled(k: usize, norm: f64) -> f64 {
    norm * (k as f64).powf(1.5)
}

/// `sum_j sup_{|s|=eps} |c_j(s)|` over sampled boundary points.
fn coefficient_norm(g: &WSeries, eps: f64) -> f64 {
    let tdeg = g.coeffs().iter().filter_map(|p| p.degree()).max();
    let tdeg = match tdeg {
        Some(d) => d,
        None => return 0.0,
    };
    // Transpose: c_j(s) = sum_n coeffs[n][j] s^n.
    let ncoef: Vec<Vec<f64>> = (0..=tdeg)
        .map(|j| {
            g.coeffs()
                .iter()
                .map(|p| crate::rat::rat_to_f64(&p.coeff(j)))
                .collect()
        })
        .collect();
    let mut total = 0.0;
    for cj in &ncoef {
        let mut sup: f64 = 0.0;
        for m in 0..CIRCLE_SAMPLES {
            let phi = 2.0 * std::f64::consts::PI * (m as f64) / (CIRCLE_SAMPLES as f64);
            let s = Complex64::from_polar(eps, phi);
            let mut acc = Complex64::new(0.0, 0.0);
            for c in cj.iter().rev() {
                acc = acc * s + Complex64::new(*c, 0.0);
            }
            sup = sup.max(acc.norm());
        }
        total += sup;
    }
    total
}

pub fn norm_and_growth(
    nf: &NormalFormSeries,
    eps: f64,
) -> Result<GrowthReport, NormalFormError> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(NormalFormError::BadEps { eps });
    }
    let norms: Vec<(usize, f64)> = nf
        .gamma_coeffs()
        .iter()
        .map(|(&k, g)| (k, coefficient_norm(g, eps)))
        .collect();

    let mut ratios = Vec::new();
    for w in norms.windows(2) {
        let (k0, n0) = w[0];
        let (k1, n1) = w[1];
        if k1 == k0 + 1 && n0 > 0.0 && n1 > 0.0 {
            ratios.push((k0, scaled(k1, n1) / scaled(k0, n0)));
        }
    }

    // Fit log(scaled_k) = log(prefactor) - k log(radius).
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .filter(|&&(_, n)| n > 0.0)
        .map(|&(k, n)| (k as f64, scaled(k, n).ln()))
        .collect();
    let (fit_prefactor, fit_radius) = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let intercept = (sy - slope * sx) / m;
        (Some(intercept.exp()), Some((-slope).exp()))
    } else {
        (None, None)
    };

    Ok(GrowthReport {
        eps,
        norms,
        ratios,
        fit_prefactor,
        fit_radius,
    })
}
