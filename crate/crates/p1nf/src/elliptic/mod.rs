//! Local solution of `u'' = 6u^2` on a disk around a double pole.
//!
//! The equation integrates once to `(u')^2 = 4u^3 + 4K1`, and the
//! substitution `u = 1/Q^2` turns the first-order equation into
//!
//! `(Q')^2 = 1 + K1 Q^6`.
//!
//! Writing `Q(t) = Q1 + (t - t1) + U(t)` and integrating
//!
//! `U(t) = int_{t1}^t K1 Q(s)^6 / (1 + sqrt(1 + K1 Q(s)^6)) ds`
//!
//! makes the right side a contraction in `U` on a small disk, because
//! the integrand is quadratically small in `Q`.  The pole of `u` is the
//! zero of `Q`, exposed by Newton once the fixed point has converged.

pub mod disk;

use crate::charts::ChartPoint;
use disk::{radial_nodes, segment_integral, DiskFn};
use num_complex::Complex64;
use thiserror::Error;

pub use disk::{DEFAULT_N_ANG, DEFAULT_N_RAD};

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("chart singular: u = 0 has no inverse-square-root branch")]
    ZeroU,
    #[error("outside contraction regime: {0}")]
    OutsideContraction(String),
    #[error("no pole in handoff disk")]
    NoPole,
    #[error("fixed-point iteration stalled after {0} sweeps")]
    Stalled(usize),
}

/// `K1 = (u'^2 - 4u^3) / 4`, conserved along solutions of `u'' = 6u^2`.
pub fn first_integral(u: Complex64, up: Complex64) -> Complex64 {
    (up * up - 4.0 * u * u * u) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Principal,
    Flipped,
}

/// `Q = u^{-1/2}` on the chosen branch and `Q' = -u' Q^3 / 2`.
/// The identity `(Q')^2 = 1 + K1 Q^6` then holds by algebra.
pub fn to_q(u: Complex64, up: Complex64, branch: Branch) -> Result<(Complex64, Complex64), EllipticError> {
    if u == Complex64::new(0.0, 0.0) {
        return Err(EllipticError::ZeroU);
    }
    let q = 1.0 / u.sqrt();
    let qp = -up * q * q * q / 2.0;
    Ok(match branch {
        Branch::Principal => (q, qp),
        Branch::Flipped => (-q, -qp),
    })
}

/// Branch whose `Q'` has positive real part, so that the parametrization
/// `Q = Q1 + (t - t1) + U` carries a small correction.
pub fn pick_branch(u: Complex64, up: Complex64) -> Result<Branch, EllipticError> {
    let (_, qp) = to_q(u, up, Branch::Principal)?;
    if qp.re > 0.0 || (qp.re == 0.0 && qp.im > 0.0) {
        Ok(Branch::Principal)
    } else {
        Ok(Branch::Flipped)
    }
}

#[derive(Debug, Clone)]
pub struct EllipticParams {
    /// Handoff scale; the starting disk radius is `8 sqrt(eps1)`.
    pub eps1: f64,
    /// When set, error out if any iterate's sup norm exceeds this ball.
    pub enforce_ball: Option<f64>,
    /// Largest accepted contraction coefficient.
    pub kappa_max: f64,
    /// Largest accepted `|K1| |Q|^6` on the disk (keeps the square root
    /// single-branched).
    pub zmax: f64,
    /// Sweep-to-sweep sup-norm change at which the iteration stops.
    pub fix_tol: f64,
    pub max_sweeps: usize,
    pub n_ang: usize,
    pub n_rad: usize,
}

impl Default for EllipticParams {
    fn default() -> Self {
        EllipticParams {
            eps1: 1e-2,
            enforce_ball: None,
            kappa_max: 0.45,
            zmax: 0.5,
            fix_tol: 1e-14,
            max_sweeps: 80,
            n_ang: DEFAULT_N_ANG,
            n_rad: DEFAULT_N_RAD,
        }
    }
}

/// Converged local data: anchor, branch values, first integral, and the
/// correction `U` on the disk grid.
#[derive(Debug, Clone)]
pub struct EllipticLocal {
    pub t1: Complex64,
    pub q1: Complex64,
    pub q1prime: Complex64,
    pub k1: Complex64,
    grid: DiskFn,
    pub sup_u: f64,
    pub last_delta: f64,
    pub sweeps: usize,
    pub sweep_deltas: Vec<f64>,
}

fn tracked_sqrt(z: Complex64, prev: &mut Complex64) -> Complex64 {
    let s = z.sqrt();
    let s = if (s + *prev).norm() < (s - *prev).norm() { -s } else { s };
    *prev = s;
    s
}

fn integrand(k1: Complex64, q: Complex64, prev: &mut Complex64) -> Complex64 {
    let q2 = q * q;
    let q6 = q2 * q2 * q2;
    let z = 1.0 + k1 * q6;
    let root = tracked_sqrt(z, prev);
    k1 * q6 / (1.0 + root)
}

impl EllipticLocal {
    /// Unconverged local with `U = 0`.
    pub fn fresh(
        t1: Complex64,
        q1: Complex64,
        q1prime: Complex64,
        k1: Complex64,
        radius: f64,
        params: &EllipticParams,
    ) -> EllipticLocal {
        EllipticLocal {
            t1,
            q1,
            q1prime,
            k1,
            grid: DiskFn::zero(t1, radius, params.n_ang, params.n_rad),
            sup_u: 0.0,
            last_delta: f64::INFINITY,
            sweeps: 0,
            sweep_deltas: Vec::new(),
        }
    }

    pub fn radius(&self) -> f64 {
        self.grid.radius
    }

    /// One application of the integral operator at an arbitrary point,
    /// using the grid for the correction inside the integrand.  This is
    /// the preferred evaluation: it removes most of the interpolation
    /// error (the operator contracts it by the factor kappa).
    pub fn correction_at(&self, t: Complex64) -> Complex64 {
        if t == self.t1 {
            return Complex64::new(0.0, 0.0);
        }
        let len = (t - self.t1).norm();
        let panels = (len / (self.grid.radius / 8.0)).ceil().max(1.0) as usize;
        let mut prev = (1.0 + self.k1 * self.q1.powi(6)).sqrt();
        segment_integral(self.t1, t, panels, |s| {
            let q = self.q1 + (s - self.t1) + self.grid.eval(s);
            integrand(self.k1, q, &mut prev)
        })
    }

    pub fn q_at(&self, t: Complex64) -> Complex64 {
        self.q1 + (t - self.t1) + self.correction_at(t)
    }

    /// `Q' = 1 + U'` with `U'(t)` equal to the integrand at `t`.
    pub fn q_prime_at(&self, t: Complex64) -> Complex64 {
        let q = self.q_at(t);
        let mut prev = (1.0 + self.k1 * self.q1.powi(6)).sqrt();
        1.0 + integrand(self.k1, q, &mut prev)
    }

    pub fn u_at(&self, t: Complex64) -> Complex64 {
        let q = self.q_at(t);
        1.0 / (q * q)
    }

    pub fn up_at(&self, t: Complex64) -> Complex64 {
        let q = self.q_at(t);
        let qp = self.q_prime_at(t);
        -2.0 * qp / (q * q * q)
    }
}

/// One sweep of the fixed-point operator over the whole grid.  Nodes on
/// a common ray share cumulative integrals from the center outward.
fn j_sweep(prev_u: &DiskFn, q1: Complex64, k1: Complex64) -> DiskFn {
    let mut out = DiskFn::zero(prev_u.t1, prev_u.radius, prev_u.n_ang, prev_u.n_rad);
    let radii = radial_nodes(prev_u.radius, prev_u.n_rad);
    let base_panel = prev_u.radius / 8.0;
    for a in 0..prev_u.n_ang {
        let phi = 2.0 * std::f64::consts::PI * a as f64 / prev_u.n_ang as f64;
        let dir = Complex64::from_polar(1.0, phi);
        let mut cum = Complex64::new(0.0, 0.0);
        let mut prev_sqrt = (1.0 + k1 * q1.powi(6)).sqrt();
        out.set_value(a, prev_u.n_rad - 1, cum);
        // Ascending radius: j = n_rad-1 is the center, j = 0 the rim.
        for j in (0..prev_u.n_rad - 1).rev() {
            let from = prev_u.t1 + radii[j + 1] * dir;
            let to = prev_u.t1 + radii[j] * dir;
            let panels = ((radii[j] - radii[j + 1]) / base_panel).ceil().max(1.0) as usize;
            cum += segment_integral(from, to, panels, |s| {
                let q = q1 + (s - prev_u.t1) + prev_u.eval(s);
                integrand(k1, q, &mut prev_sqrt)
            });
            out.set_value(a, j, cum);
        }
    }
    out
}

/// Run the fixed-point iteration from the local's current correction
/// until successive sweeps agree to `fix_tol`.
pub fn iterate_j(mut local: EllipticLocal, params: &EllipticParams) -> Result<EllipticLocal, EllipticError> {
    for sweep in 1..=params.max_sweeps {
        let next = j_sweep(&local.grid, local.q1, local.k1);
        let delta = next.max_diff(&local.grid);
        local.grid = next;
        local.sup_u = local.grid.sup();
        local.last_delta = delta;
        local.sweeps = sweep;
        local.sweep_deltas.push(delta);
        if let Some(ball) = params.enforce_ball {
            if local.sup_u > ball {
                return Err(EllipticError::OutsideContraction(format!(
                    "correction norm {:.3e} left the ball {:.3e}",
                    local.sup_u, ball
                )));
            }
        }
        if delta <= params.fix_tol {
            return Ok(local);
        }
    }
    Err(EllipticError::Stalled(params.max_sweeps))
}

/// Disk radius for the contraction: start at `8 sqrt(eps1)` and shrink
/// geometrically until the contraction coefficient and the square-root
/// argument are within bounds, keeping enough room for the pole
/// (which sits at distance about `|Q1|` from the anchor).
fn contraction_radius(q1n: f64, k1n: f64, params: &EllipticParams) -> Result<f64, EllipticError> {
    let mut rho: f64 = 8.0 * params.eps1.sqrt();
    let floor = 1.6 * q1n;
    if rho < floor {
        return Err(EllipticError::OutsideContraction(format!(
            "starting radius {rho:.3e} cannot hold the pole at distance {q1n:.3e}"
        )));
    }
    let admissible = |rho: f64| {
        // Self-consistent headroom for the correction's own size.
        let mut ball = 0.0;
        for _ in 0..3 {
            let qmax = q1n + rho + ball;
            ball = k1n * qmax.powi(7) / 7.0;
        }
        let qmax = q1n + rho + ball;
        let kappa = 3.0 * rho * k1n * qmax.powi(5);
        let z = k1n * qmax.powi(6);
        kappa <= params.kappa_max && z <= params.zmax && ball.is_finite()
    };
    loop {
        if admissible(rho) {
            return Ok(rho);
        }
        rho *= 0.8;
        if rho < floor {
            // Last chance exactly at the floor.
            if admissible(floor) {
                return Ok(floor);
            }
            return Err(EllipticError::OutsideContraction(format!(
                "|K1| = {k1n:.3e} admits no contracting disk holding the pole (|Q1| = {q1n:.3e})"
            )));
        }
    }
}

/// Build and converge a local from `(t1, u1, u1')`: pick the branch with
/// `Re Q' > 0`, choose the disk radius, iterate to the fixed point.
pub fn solve_local(
    t1: Complex64,
    u1: Complex64,
    u1p: Complex64,
    params: &EllipticParams,
) -> Result<EllipticLocal, EllipticError> {
    let branch = pick_branch(u1, u1p)?;
    let (q1, q1p) = to_q(u1, u1p, branch)?;
    let k1 = first_integral(u1, u1p);
    let radius = contraction_radius(q1.norm(), k1.norm(), params)?;
    let local = EllipticLocal::fresh(t1, q1, q1p, k1, radius, params);
    iterate_j(local, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleSource {
    /// Found through the conjugation handoff and the local fixed point.
    Handoff,
    /// Found by direct integration up to very large `|y|`.
    Direct,
}

/// Chart data at the moment of handoff, kept for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct HandoffCharts {
    pub x_plane: ChartPoint,
    pub t_plane: ChartPoint,
}

#[derive(Debug, Clone)]
pub struct PoleRecord {
    pub p: Complex64,
    pub k1: Complex64,
    pub source: PoleSource,
    /// `max |u(t)(t-p)^2 - 1|` over probe points near the pole.
    pub residual_check: f64,
    pub chart_data: Option<HandoffCharts>,
}

/// Newton root of `Q` seeded at `t1 - Q1`, with a Laurent probe.
pub fn locate_pole(local: &EllipticLocal, probe: f64) -> Result<PoleRecord, EllipticError> {
    let mut t = local.t1 - local.q1;
    for _ in 0..30 {
        let q = local.q_at(t);
        let qp = local.q_prime_at(t);
        let step = q / qp;
        t -= step;
        if (t - local.t1).norm() > 1.2 * local.radius() {
            return Err(EllipticError::NoPole);
        }
        if step.norm() <= 1e-15 * (1.0 + t.norm()) {
            break;
        }
    }
    let dist = (t - local.t1).norm();
    if local.q_at(t).norm() > 1e-11 || dist > local.radius() {
        return Err(EllipticError::NoPole);
    }
    let room = local.radius() - dist;
    let off = probe.min(room * 0.5);
    if off <= 0.0 {
        return Err(EllipticError::NoPole);
    }
    let mut residual: f64 = 0.0;
    for a in 0..4 {
        let z = Complex64::from_polar(off, std::f64::consts::FRAC_PI_2 * a as f64 + 0.3);
        let r = (local.u_at(t + z) * z * z - 1.0).norm();
        residual = residual.max(r);
    }
    Ok(PoleRecord {
        p: t,
        k1: local.k1,
        source: PoleSource::Handoff,
        residual_check: residual,
        chart_data: None,
    })
}

/// Max over sample points of `|(Q')^2 - 1 - K1 Q^6|`, with `Q'` taken by
/// contour differentiation of the evaluated `Q` (so the check is not
/// circular through the integrand identity).
pub fn ode_residual_max(local: &EllipticLocal, samples: usize) -> f64 {
    let h = local.radius() / 20.0;
    let m = 16;
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        let t = local.t1 + Complex64::from_polar(0.55 * local.radius(), phi);
        let mut deriv = Complex64::new(0.0, 0.0);
        for j in 0..m {
            let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            let e = Complex64::from_polar(1.0, th);
            deriv += local.q_at(t + h * e) / e;
        }
        deriv /= Complex64::new(m as f64 * h, 0.0);
        let q = local.q_at(t);
        let q6 = q.powi(6);
        worst = worst.max((deriv * deriv - 1.0 - local.k1 * q6).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_integral_examples() {
        assert_eq!(first_integral(c(1.0, 0.0), c(2.0, 0.0)), c(0.0, 0.0));
        assert_eq!(first_integral(c(1.0, 0.0), c(0.0, 0.0)), c(-1.0, 0.0));
        assert_eq!(first_integral(c(100.0, 0.0), c(-2000.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn q_substitution_examples() {
        let (q, qp) = to_q(c(100.0, 0.0), c(-2000.0, 0.0), Branch::Principal).unwrap();
        assert!((q - c(0.1, 0.0)).norm() < 1e-15);
        assert!((qp - c(1.0, 0.0)).norm() < 1e-15);

        let (q2, qp2) = to_q(c(100.0, 0.0), c(2000.0, 0.0), Branch::Principal).unwrap();
        assert!((q2 - c(0.1, 0.0)).norm() < 1e-15);
        assert!((qp2 - c(-1.0, 0.0)).norm() < 1e-15);

        let (qf, qpf) = to_q(c(100.0, 0.0), c(2000.0, 0.0), Branch::Flipped).unwrap();
        assert!((qf + q2).norm() < 1e-15);
        assert!((qpf + qp2).norm() < 1e-15);

        assert!(matches!(
            to_q(c(0.0, 0.0), c(1.0, 0.0), Branch::Principal),
            Err(EllipticError::ZeroU)
        ));
    }

    #[test]
    fn q_substitution_satisfies_first_order_ode() {
        for (u, up) in [
            (c(3.0, 1.0), c(-5.0, 2.0)),
            (c(100.0, -4.0), c(-1990.0, 30.0)),
            (c(0.5, 0.0), c(1.0, 1.0)),
        ] {
            let k1 = first_integral(u, up);
            for branch in [Branch::Principal, Branch::Flipped] {
                let (q, qp) = to_q(u, up, branch).unwrap();
                let res = (qp * qp - 1.0 - k1 * q.powi(6)).norm();
                assert!(res < 1e-12 * (1.0 + k1.norm()), "residual {res}");
            }
        }
    }

    #[test]
    fn zero_k1_pipeline_is_exact() {
        // u = (t - p)^{-2} with p = -0.1: at t1 = 0, u = 100, u' = -2000.
        let params = EllipticParams::default();
        let local = solve_local(c(0.0, 0.0), c(100.0, 0.0), c(-2000.0, 0.0), &params).unwrap();
        assert!(local.k1.norm() < 1e-12);
        assert!(local.sup_u < 1e-15, "sup_u = {}", local.sup_u);
        let rec = locate_pole(&local, 1e-2).unwrap();
        assert!((rec.p - c(-0.1, 0.0)).norm() < 1e-13, "p = {}", rec.p);
        assert!(rec.residual_check < 1e-12);

        // Mirror derivative: branch normalization flips Q, pole mirrors.
        let local2 = solve_local(c(0.0, 0.0), c(100.0, 0.0), c(2000.0, 0.0), &params).unwrap();
        let rec2 = locate_pole(&local2, 1e-2).unwrap();
        assert!((rec2.p - c(0.1, 0.0)).norm() < 1e-13, "p = {}", rec2.p);

        // u is exactly the shifted inverse square on the disk.
        for t in [c(0.05, 0.02), c(-0.02, -0.06), c(0.2, 0.1)] {
            let want = 1.0 / ((t - rec.p) * (t - rec.p));
            let got = local.u_at(t);
            assert!((got - want).norm() <= 1e-12 * want.norm());
        }
    }

    #[test]
    fn moderate_k1_converges_and_solves_the_ode() {
        // u' is off the exact-pole value, so K1 is around 100.
        let params = EllipticParams::default();
        let u1 = c(100.0, 0.0);
        let u1p = c(-2000.1, 0.0);
        let k1 = first_integral(u1, u1p);
        assert!((k1.norm() - 100.0).abs() < 0.1);
        let local = solve_local(c(0.0, 0.0), u1, u1p, &params).unwrap();
        assert!(local.sweeps >= 2);
        assert!(local.last_delta <= params.fix_tol);
        let res = ode_residual_max(&local, 12);
        assert!(res < 1e-12, "ode residual {res}");
    }

    #[test]
    fn contraction_deltas_decay_geometrically() {
        // K1 around 600 needs many sweeps near the regime edge; the
        // observed ratio must stay below 1/2.
        let params = EllipticParams::default();
        let local = solve_local(c(0.0, 0.0), c(100.0, 0.0), c(-2000.6, 0.0), &params).unwrap();
        let d = &local.sweep_deltas;
        assert!(d.len() >= 3, "deltas {d:?}");
        for i in 1..d.len() - 1 {
            // Skip the last delta: it may sit at roundoff level.
            if d[i] > 1e-13 {
                assert!(d[i] / d[i - 1] <= 0.5, "ratio {} at sweep {i}", d[i] / d[i - 1]);
            }
        }
    }

    #[test]
    fn k1_is_conserved_on_the_disk() {
        let params = EllipticParams::default();
        let u1 = c(100.0, 0.0);
        let u1p = c(-2000.05, 0.0);
        let k1 = first_integral(u1, u1p);
        let local = solve_local(c(0.0, 0.0), u1, u1p, &params).unwrap();
        let rec = locate_pole(&local, 1e-2).unwrap();
        // Sample a circle around the pole big enough to avoid the
        // cancellation amplification of u^3 near the pole itself.
        let mut checked = 0;
        let mut drift: f64 = 0.0;
        for i in 0..48 {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / 48.0;
            let t = rec.p + Complex64::from_polar(0.22, phi);
            if (t - local.t1).norm() > 0.9 * local.radius() {
                continue;
            }
            checked += 1;
            let k = first_integral(local.u_at(t), local.up_at(t));
            drift = drift.max((k - k1).norm());
        }
        assert!(checked >= 20, "only {checked} sample points");
        assert!(drift <= 1e-11 * (1.0 + k1.norm()), "drift {drift:.3e}");
    }

    #[test]
    fn laurent_probe_for_nonzero_k1() {
        let params = EllipticParams::default();
        let local = solve_local(c(0.0, 0.0), c(100.0, 0.0), c(-2000.2, 0.0), &params).unwrap();
        let rec = locate_pole(&local, 1e-2).unwrap();
        assert!(rec.residual_check <= 1e-6, "probe residual {:.3e}", rec.residual_check);
    }

    #[test]
    fn huge_k1_is_rejected() {
        let params = EllipticParams::default();
        // u' far from the pole family: K1 of order 1e5.
        let err = solve_local(c(0.0, 0.0), c(100.0, 0.0), c(-2700.0, 0.0), &params).unwrap_err();
        match err {
            EllipticError::OutsideContraction(_) => {}
            other => panic!("expected contraction failure, got {other}"),
        }
    }

    #[test]
    fn ball_enforcement_triggers() {
        let params = EllipticParams {
            enforce_ball: Some(1e-12),
            ..EllipticParams::default()
        };
        let err = solve_local(c(0.0, 0.0), c(100.0, 0.0), c(-2000.1, 0.0), &params).unwrap_err();
        assert!(err.to_string().contains("outside contraction regime"));
    }

    #[test]
    fn against_taylor_marching_oracle() {
        // Independent integration of u'' = 6u^2 by repeated Taylor
        // expansion, stepping away from the pole.
        fn taylor_step(t0: Complex64, u0: Complex64, up0: Complex64, h: Complex64) -> (Complex64, Complex64) {
            let n = 40;
            let mut ccf = vec![Complex64::new(0.0, 0.0); n + 2];
            ccf[0] = u0;
            ccf[1] = up0;
            for m in 0..n {
                let mut conv = Complex64::new(0.0, 0.0);
                for i in 0..=m {
                    conv += ccf[i] * ccf[m - i];
                }
                ccf[m + 2] = 6.0 * conv / ((m + 1) as f64 * (m + 2) as f64);
            }
            let _ = t0;
            let mut u = Complex64::new(0.0, 0.0);
            let mut up = Complex64::new(0.0, 0.0);
            for m in (1..n + 2).rev() {
                up = up * h + ccf[m] * m as f64;
            }
            for m in (0..n + 2).rev() {
                u = u * h + ccf[m];
            }
            (u, up)
        }

        // Moderate K1 on the default grid; larger K1 with a finer grid
        // (the analyticity margin shrinks as K1 grows, so the spectral
        // grid must grow with it).
        let cases = [
            (c(-2000.03, 0.0), EllipticParams::default()),
            (
                c(-2000.3, 0.0),
                EllipticParams {
                    n_ang: 40,
                    n_rad: 16,
                    ..EllipticParams::default()
                },
            ),
        ];
        for (u1p, params) in cases {
            let u1 = c(100.0, 0.0);
            let local = solve_local(c(0.0, 0.0), u1, u1p, &params).unwrap();
            // March outward (away from the pole near -0.1).
            let mut t = c(0.0, 0.0);
            let mut u = u1;
            let mut up = u1p;
            let h = c(0.03, 0.012);
            for _ in 0..6 {
                let (nu, nup) = taylor_step(t, u, up, h);
                t += h;
                u = nu;
                up = nup;
                let diff = (local.u_at(t) - u).norm() / u.norm();
                assert!(diff <= 1e-10, "relative error {diff:.3e} at {t}");
            }
        }
    }
}
