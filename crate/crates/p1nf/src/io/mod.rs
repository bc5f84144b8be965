//! On-disk formats: exact coefficient files (JSON with rationals as
//! strings), and plain-text trajectory traces and pole catalogs.
//!
//! Coefficient files round-trip exactly; loading rebuilds the companion
//! series from the stored `gamma_k`, so a saved solve and a fresh solve
//! are indistinguishable downstream.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrate::{CrossedPole, Solution};
use crate::normal_form::solve::ResonanceReport;
use crate::normal_form::{Forcing, NormalFormError, NormalFormSeries};
use crate::rat::{format_rat, parse_rat, RatParseError};
use crate::series::{TPoly, WSeries};

pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on `k_order`/`n_order` accepted from files.  Solves this
/// deep are days of CPU, so the cap costs nothing in practice; it guards
/// the companion-series allocation against hostile order fields.
pub const MAX_FILE_ORDER: usize = 64;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad rational '{text}': {source}")]
    Rat {
        text: String,
        source: RatParseError,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
}

/// Serialized conjugation solve.  `gamma` holds, for each order `k`, the
/// `s`-major coefficient table `[n][j]` of `gamma_k`; every entry is an
/// exact rational in `p/q` form.
#[derive(Debug, Serialize, Deserialize)]
pub struct SeriesFile {
    pub schema_version: u32,
    pub forcing: String,
    pub x0: String,
    pub gauge: String,
    pub k_order: usize,
    pub n_order: usize,
    pub resonance: ResonanceDto,
    pub gamma: Vec<GammaEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResonanceDto {
    pub passes: bool,
    /// Coefficients of the compatibility value at the resonant order,
    /// lowest power of `tau` first.
    pub residual: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GammaEntry {
    pub k: usize,
    pub coeffs: Vec<Vec<String>>,
}

fn poly_to_strings(p: &TPoly) -> Vec<String> {
    p.coeffs().iter().map(format_rat).collect()
}

fn strings_to_poly(rows: &[String]) -> Result<TPoly, IoError> {
    let mut coeffs = Vec::with_capacity(rows.len());
    for s in rows {
        coeffs.push(parse_rat(s).map_err(|source| IoError::Rat {
            text: s.clone(),
            source,
        })?);
    }
    Ok(TPoly::new(coeffs))
}

impl SeriesFile {
    pub fn from_series(nf: &NormalFormSeries) -> SeriesFile {
        let gamma = nf
            .gamma_coeffs()
            .iter()
            .map(|(&k, ws)| GammaEntry {
                k,
                coeffs: ws.coeffs().iter().map(poly_to_strings).collect(),
            })
            .collect();
        SeriesFile {
            schema_version: SCHEMA_VERSION,
            forcing: nf.forcing.to_string(),
            x0: format_rat(&nf.x0),
            gauge: format_rat(&nf.gauge),
            k_order: nf.k_order,
            n_order: nf.n_order,
            resonance: ResonanceDto {
                passes: nf.resonance.passes,
                residual: poly_to_strings(&nf.resonance.compatibility_residual),
            },
            gamma,
        }
    }

    /// Validate and rebuild the full series.  The companion series are
    /// re-derived from `gamma_k`, not stored.
    pub fn into_series(self) -> Result<NormalFormSeries, IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IoError::Schema(format!(
                "unsupported schema_version {} (expected {})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        if self.k_order > MAX_FILE_ORDER || self.n_order > MAX_FILE_ORDER {
            return Err(IoError::Schema(format!(
                "orders ({}, {}) exceed the supported maximum {}",
                self.k_order, self.n_order, MAX_FILE_ORDER
            )));
        }
        let forcing = Forcing::parse(&self.forcing)
            .map_err(|e| IoError::Schema(format!("bad forcing '{}': {e}", self.forcing)))?;
        let x0 = parse_rat(&self.x0).map_err(|source| IoError::Rat {
            text: self.x0.clone(),
            source,
        })?;
        let gauge = parse_rat(&self.gauge).map_err(|source| IoError::Rat {
            text: self.gauge.clone(),
            source,
        })?;
        let mut gamma_k: BTreeMap<usize, WSeries> = BTreeMap::new();
        for entry in &self.gamma {
            if entry.k < 5 || entry.k > self.k_order + 1 {
                return Err(IoError::Schema(format!(
                    "gamma order {} outside 5..={}",
                    entry.k,
                    self.k_order + 1
                )));
            }
            if gamma_k.contains_key(&entry.k) {
                return Err(IoError::Schema(format!("duplicate gamma order {}", entry.k)));
            }
            if entry.coeffs.len() > self.n_order + 1 {
                return Err(IoError::Schema(format!(
                    "gamma_{} has {} s-coefficients, more than n_order {} allows",
                    entry.k,
                    entry.coeffs.len(),
                    self.n_order
                )));
            }
            let mut ws = WSeries::zero(self.n_order);
            for (n, row) in entry.coeffs.iter().enumerate() {
                ws.set_coeff(n, strings_to_poly(row)?);
            }
            gamma_k.insert(entry.k, ws);
        }
        let residual = strings_to_poly(&self.resonance.residual)?;
        if self.resonance.passes != residual.is_zero() {
            return Err(IoError::Schema(
                "resonance flag contradicts the stored residual".into(),
            ));
        }
        let report = ResonanceReport::build(self.k_order, self.n_order, residual);
        Ok(NormalFormSeries::from_parts(
            forcing,
            x0,
            gauge,
            self.k_order,
            self.n_order,
            gamma_k,
            report,
        )?)
    }
}

/// Write bytes to `path` through a sibling temp file and a rename, so a
/// crash never leaves a half-written file behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let stem = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{stem}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e.into())
        }
    }
}

pub fn save_series(path: &Path, nf: &NormalFormSeries) -> Result<(), IoError> {
    let file = SeriesFile::from_series(nf);
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn load_series(path: &Path) -> Result<NormalFormSeries, IoError> {
    let text = fs::read_to_string(path)?;
    let file: SeriesFile = serde_json::from_str(&text)?;
    file.into_series()
}

fn push_c64(line: &mut String, z: Complex64) {
    let _ = write!(line, " {:+.17e} {:+.17e}", z.re, z.im);
}

/// Trajectory trace: comment header, then one row per recorded sample
/// with `re(x) im(x) re(y) im(y) re(y') im(y')`.
pub fn render_trace(sol: &Solution, forcing: &Forcing) -> String {
    let mut out = String::new();
    out.push_str("# trajectory trace\n");
    let _ = writeln!(out, "# forcing: {forcing}");
    let _ = writeln!(
        out,
        "# accepted {} rejected {} poles {}",
        sol.accepted,
        sol.rejected,
        sol.poles.len()
    );
    for p in &sol.poles {
        let _ = writeln!(
            out,
            "# pole {:+.17e} {:+.17e} residual {:.3e}",
            p.x.re, p.x.im, p.residual_check
        );
    }
    out.push_str("# columns: re(x) im(x) re(y) im(y) re(yp) im(yp)\n");
    for s in &sol.trace {
        let mut line = String::new();
        push_c64(&mut line, s.x);
        push_c64(&mut line, s.y);
        push_c64(&mut line, s.yp);
        let _ = writeln!(out, "{}", line.trim_start());
    }
    out
}

pub fn write_trace(path: &Path, sol: &Solution, forcing: &Forcing) -> Result<(), IoError> {
    atomic_write(path, render_trace(sol, forcing).as_bytes())
}

/// One catalog line per initial condition, in input order.
pub struct CatalogRow {
    pub index: usize,
    pub y0: Complex64,
    pub yp0: Complex64,
    pub outcome: Result<Vec<CrossedPole>, String>,
}

/// Pole catalog: per-job rows `idx re(y0) im(y0) re(yp0) im(yp0) re(p)
/// im(p) re(K1) im(K1) residual`, one row per crossed pole; failures
/// become comment lines so the data columns stay uniform.
pub fn render_catalog(rows: &[CatalogRow]) -> String {
    let mut out = String::new();
    out.push_str("# pole catalog\n");
    out.push_str(
        "# columns: idx re(y0) im(y0) re(yp0) im(yp0) re(p) im(p) re(K1) im(K1) residual\n",
    );
    for row in rows {
        match &row.outcome {
            Err(msg) => {
                let _ = writeln!(out, "# job {} failed: {}", row.index, msg);
            }
            Ok(poles) if poles.is_empty() => {
                let _ = writeln!(out, "# job {} crossed no poles", row.index);
            }
            Ok(poles) => {
                for p in poles {
                    let mut line = format!("{}", row.index);
                    push_c64(&mut line, row.y0);
                    push_c64(&mut line, row.yp0);
                    push_c64(&mut line, p.x);
                    push_c64(&mut line, p.k1);
                    let _ = write!(line, " {:.3e}", p.residual_check);
                    let _ = writeln!(out, "{line}");
                }
            }
        }
    }
    out
}

pub fn write_catalog(path: &Path, rows: &[CatalogRow]) -> Result<(), IoError> {
    atomic_write(path, render_catalog(rows).as_bytes())
}
