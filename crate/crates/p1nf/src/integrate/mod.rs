//! Path integration of `y'' = 6y^2 + f(x)` in the complex plane, with
//! continuation through movable double poles.
//!
//! Away from poles the solver is an adaptive Dormand-Prince scheme whose
//! step is capped by the local singularity scale.  When `|y|` reaches the
//! handoff threshold the trajectory is converted to pole-regularizing
//! coordinates, pulled back through the conjugation to the autonomous
//! equation `u'' = 6u^2`, solved there on a disk containing the pole, and
//! pushed forward again on the far side.

use num_complex::Complex64;
use thiserror::Error;

use crate::charts::{
    in_region, ChartError, EllipticPoint, GammaMap, P1Point, Region, RegionParams,
};
use crate::elliptic::{
    locate_pole, solve_local, EllipticError, EllipticLocal, EllipticParams, HandoffCharts,
};
use crate::normal_form::solve::{solve_normal_form, SolveParams};
use crate::normal_form::{Forcing, NormalFormError};
use crate::rat::Rat;
use num_traits::Zero;

pub mod path;
pub mod rk;

pub use path::{line, loop_around, validate_path, PathError, PathSpec};
pub use rk::{SpanStats, StepControl};

use rk::{advance, State, StepError, StepOutcome};

/// Largest safe Taylor step at `(x, y, y')`, as a fraction of the
/// distance scale set by the solution's own size: the minimum of
/// `|y|^{-1/2}`, `|y'/2|^{-1/3}` and `|y^2 + f(x)/6|^{-1/4}`.
pub fn taylor_radius(y: Complex64, yp: Complex64, f_at_x: Complex64, fraction: f64) -> f64 {
    let mut r = f64::INFINITY;
    let ay = y.norm();
    if ay > 0.0 {
        r = r.min(ay.powf(-0.5));
    }
    let ap = yp.norm() / 2.0;
    if ap > 0.0 {
        r = r.min(ap.powf(-1.0 / 3.0));
    }
    let acc = (y * y + f_at_x / 6.0).norm();
    if acc > 0.0 {
        r = r.min(acc.powf(-0.25));
    }
    fraction * r
}

#[derive(Debug, Clone)]
pub struct IntegrateParams {
    /// Handoff threshold: the crossing machinery engages at `|y| >= 1/eps1`.
    pub eps1: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Step cap as a fraction of the local singularity scale.
    pub step_fraction: f64,
    /// Conjugation series orders used for crossings.
    pub k_order: usize,
    pub n_order: usize,
    /// Handoff gate: `|v| < 1/handoff_s` and `|w - 1/4| < handoff_eps`.
    pub handoff_s: f64,
    pub handoff_eps: f64,
    /// Abort if `|y|` exceeds `defer_factor/eps1` while still outside the
    /// handoff gate.
    pub defer_factor: f64,
    /// Resume distance from a crossed pole, in units of `sqrt(eps1)`.
    pub exit_factor: f64,
    /// `|y|` at which direct integration calls a pole located.
    pub big_y: f64,
    /// Probe offset for the Laurent residual check at a located pole.
    pub probe_radius: f64,
    pub max_steps: usize,
    pub record_trace: bool,
    pub elliptic: EllipticParams,
}

impl Default for IntegrateParams {
    fn default() -> Self {
        IntegrateParams {
            eps1: 1e-2,
            rtol: 1e-10,
            atol: 1e-12,
            step_fraction: 0.25,
            k_order: 12,
            n_order: 10,
            handoff_s: 4.5,
            handoff_eps: 0.05,
            defer_factor: 4.0,
            exit_factor: 4.0,
            big_y: 1e6,
            probe_radius: 0.01,
            max_steps: 400_000,
            record_trace: false,
            elliptic: EllipticParams::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("step size underflow near x = {x}: singular point with crossing disabled or suppressed")]
    Step { x: Complex64 },
    #[error("step budget exhausted near x = {x}")]
    Exhausted { x: Complex64 },
    #[error("singular approach outside equivalence region near x = {x} (margins {margins:?})")]
    SingularOutsideRegion { x: Complex64, margins: [f64; 3] },
    #[error("handoff inconsistency: {0}")]
    HandoffInconsistency(String),
    #[error("no pole found: {0}")]
    NoPole(String),
}

/// One continuation through a movable double pole.
#[derive(Debug, Clone)]
pub struct CrossedPole {
    /// Pole location; the conjugation fixes the pole locus, so this is
    /// the same point in both planes.
    pub x: Complex64,
    /// Anchor of the autonomous local solve.
    pub t1: Complex64,
    /// First integral `(u'^2 - 4u^3)/4` of the conjugated trajectory.
    pub k1: Complex64,
    /// Where on the path the handoff engaged.
    pub handoff_x: Complex64,
    /// `max |u(t)(t - p)^2 - 1|` over probe points near the pole.
    pub residual_check: f64,
    pub charts: HandoffCharts,
    /// Converged autonomous solution on its disk; still usable for
    /// evaluating the trajectory near the pole.
    pub local: EllipticLocal,
}

#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub x: Complex64,
    pub y: Complex64,
    pub yp: Complex64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x_end: Complex64,
    pub y: Complex64,
    pub yp: Complex64,
    /// Accumulated `int f'(x) y dx` along the integrated legs.
    pub integral: Complex64,
    /// Change of the conserved combination `y'^2/2 - 2y^3 - f(x) y +
    /// int f' y`; only meaningful (and only reported) on pole-free runs.
    pub drift: Option<f64>,
    pub poles: Vec<CrossedPole>,
    pub accepted: usize,
    pub rejected: usize,
    pub trace: Vec<TracePoint>,
}

pub struct Integrator {
    forcing: Forcing,
    params: IntegrateParams,
    map: Option<GammaMap>,
    handoff_gate: RegionParams,
}

enum HaltReason {
    Cross { s_prev: f64, state_prev: State },
    CapFail { margins: [f64; 3] },
}

impl Integrator {
    /// Plain path stepper; pole approaches end in a step-size error.
    pub fn new(forcing: Forcing, params: IntegrateParams) -> Integrator {
        let handoff_gate = Self::gate(&params);
        Integrator { forcing, params, map: None, handoff_gate }
    }

    /// Stepper with pole continuation.  Solves the conjugation to the
    /// requested orders up front; fails if the forcing is obstructed.
    pub fn with_crossing(
        forcing: Forcing,
        params: IntegrateParams,
    ) -> Result<Integrator, IntegrateError> {
        let mut params = params;
        params.elliptic.eps1 = params.eps1;
        let nf = solve_normal_form(&SolveParams {
            forcing: forcing.clone(),
            k_order: params.k_order,
            n_order: params.n_order,
            gauge: Rat::zero(),
            x0: Rat::zero(),
        })?;
        let map = GammaMap::new(&nf);
        let handoff_gate = Self::gate(&params);
        Ok(Integrator { forcing, params, map: Some(map), handoff_gate })
    }

    fn gate(params: &IntegrateParams) -> RegionParams {
        RegionParams::new(params.handoff_s, params.handoff_eps, 0.5, 8.0, 0.025)
            .expect("handoff gate constants out of range")
    }

    pub fn params(&self) -> &IntegrateParams {
        &self.params
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn map(&self) -> Option<&GammaMap> {
        self.map.as_ref()
    }

    fn ctrl(&self) -> StepControl {
        StepControl {
            rtol: self.params.rtol,
            atol: self.params.atol,
            h_init: None,
            max_steps: self.params.max_steps,
        }
    }

    fn rhs_for(&self, leg: PathSpec) -> impl Fn(f64, &State) -> State + '_ {
        move |s, st| {
            let x = leg.at(s);
            let xp = leg.tangent(s);
            let f = self.forcing.eval_c64(x);
            let fp = self.forcing.derivative_c64(x);
            [
                st[1] * xp,
                (6.0 * st[0] * st[0] + f) * xp,
                fp * st[0] * xp,
            ]
        }
    }

    fn cap_for(&self, leg: PathSpec) -> impl FnMut(f64, &State) -> f64 + '_ {
        move |s, st| {
            let x = leg.at(s);
            let f = self.forcing.eval_c64(x);
            taylor_radius(st[0], st[1], f, self.params.step_fraction) / leg.tangent(s).norm()
        }
    }

    /// The conserved combination tracked by the `I` slot.
    fn invariant(&self, x: Complex64, st: &State) -> Complex64 {
        let e = st[1] * st[1] / 2.0 - 2.0 * st[0] * st[0] * st[0]
            - self.forcing.eval_c64(x) * st[0];
        e + st[2]
    }

    /// Integrate from `(y0, y0')` at the start of `legs` to the end,
    /// continuing through any movable poles met on the way (if this
    /// integrator was built `with_crossing`).
    pub fn integrate(
        &self,
        y0: Complex64,
        yp0: Complex64,
        legs: &[PathSpec],
    ) -> Result<Solution, IntegrateError> {
        validate_path(legs)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut state: State = [y0, yp0, zero];
        let q_start = self.invariant(legs[0].start(), &state);

        let threshold = 1.0 / self.params.eps1;
        let give_up = self.params.defer_factor / self.params.eps1;
        let armed = self.map.is_some();

        let mut poles: Vec<CrossedPole> = Vec::new();
        let mut trace: Vec<TracePoint> = Vec::new();
        let mut accepted = 0usize;
        let mut rejected = 0usize;
        if self.params.record_trace {
            trace.push(TracePoint { x: legs[0].start(), y: y0, yp: yp0 });
        }

        let mut li = 0usize;
        let mut s = 0.0f64;
        while li < legs.len() {
            let leg = legs[li];
            let mut halt: Option<HaltReason> = None;
            let record = self.params.record_trace;
            let (s_end, st_end, stats) = {
                let halt_slot = &mut halt;
                let trace_ref = &mut trace;
                let gate = &self.handoff_gate;
                advance(
                    self.rhs_for(leg),
                    s,
                    1.0,
                    state,
                    &self.ctrl(),
                    self.cap_for(leg),
                    move |sp, stp, sn, stn| {
                        if record {
                            trace_ref.push(TracePoint {
                                x: leg.at(sn),
                                y: stn[0],
                                yp: stn[1],
                            });
                        }
                        if !armed {
                            return StepOutcome::Continue;
                        }
                        let a = stn[0].norm();
                        if a < threshold {
                            return StepOutcome::Continue;
                        }
                        let x = leg.at(sn);
                        let in_gate = P1Point { x, y: stn[0], yp: stn[1] }
                            .to_chart()
                            .map(|c| in_region(&c, x, gate, Region::Outer))
                            .ok();
                        match in_gate {
                            Some(rc) if rc.inside => {
                                *halt_slot = Some(HaltReason::Cross {
                                    s_prev: sp,
                                    state_prev: *stp,
                                });
                                StepOutcome::Halt
                            }
                            other => {
                                if a >= give_up {
                                    let margins = other
                                        .map(|rc| rc.margins)
                                        .unwrap_or([f64::NAN; 3]);
                                    *halt_slot = Some(HaltReason::CapFail { margins });
                                    StepOutcome::Halt
                                } else {
                                    StepOutcome::Continue
                                }
                            }
                        }
                    },
                )
                .map_err(|e| self.step_err(e, leg))?
            };
            accepted += stats.accepted;
            rejected += stats.rejected;

            match halt {
                None => {
                    // Leg ran to completion.
                    state = st_end;
                    li += 1;
                    s = 0.0;
                }
                Some(HaltReason::CapFail { margins }) => {
                    return Err(IntegrateError::SingularOutsideRegion {
                        x: leg.at(s_end),
                        margins,
                    });
                }
                Some(HaltReason::Cross { s_prev, state_prev }) => {
                    let (s_star, st_star) = if st_end[0].norm() <= 1.001 * threshold {
                        (s_end, st_end)
                    } else {
                        self.land(leg, s_prev, state_prev, s_end)?
                    };
                    let (pole, resume) = self.cross(legs, li, s_star, st_star)?;
                    poles.push(pole);
                    let (rli, rs, rstate) = resume;
                    if record {
                        let rl = legs[rli.min(legs.len() - 1)];
                        let rx = if rli < legs.len() { rl.at(rs) } else { rl.end() };
                        trace.push(TracePoint { x: rx, y: rstate[0], yp: rstate[1] });
                    }
                    if rli >= legs.len() {
                        // Path ended inside the exit disk; the crossing
                        // already delivered the state at the endpoint.
                        state = rstate;
                        break;
                    }
                    li = rli;
                    s = rs;
                    state = rstate;
                }
            }
        }

        let x_end = legs.last().unwrap().end();
        let drift = if poles.is_empty() {
            Some((self.invariant(x_end, &state) - q_start).norm())
        } else {
            None
        };
        Ok(Solution {
            x_end,
            y: state[0],
            yp: state[1],
            integral: state[2],
            drift,
            poles,
            accepted,
            rejected,
            trace,
        })
    }

    fn step_err(&self, e: StepError, leg: PathSpec) -> IntegrateError {
        match e {
            StepError::StepUnderflow { s } => IntegrateError::Step { x: leg.at(s) },
            StepError::TooManySteps { s } => IntegrateError::Exhausted { x: leg.at(s) },
        }
    }

    /// Bisect within one accepted step to land `|y|` just past the
    /// threshold.  The bracket base `(lo, state_lo)` stays below the
    /// threshold throughout.
    fn land(
        &self,
        leg: PathSpec,
        s_lo: f64,
        state_lo: State,
        s_hi: f64,
    ) -> Result<(f64, State), IntegrateError> {
        let threshold = 1.0 / self.params.eps1;
        let band = 1.001 * threshold;
        let mut lo = s_lo;
        let mut st_lo = state_lo;
        let mut hi = s_hi;
        let ctrl = self.ctrl();
        for _ in 0..80 {
            if hi - lo < 1e-14 {
                let (_, st, _) = advance(
                    self.rhs_for(leg),
                    lo,
                    hi,
                    st_lo,
                    &ctrl,
                    self.cap_for(leg),
                    |_, _, _, _| StepOutcome::Continue,
                )
                .map_err(|e| self.step_err(e, leg))?;
                return Ok((hi, st));
            }
            let mid = 0.5 * (lo + hi);
            let (_, st_mid, _) = advance(
                self.rhs_for(leg),
                lo,
                mid,
                st_lo,
                &ctrl,
                self.cap_for(leg),
                |_, _, _, _| StepOutcome::Continue,
            )
            .map_err(|e| self.step_err(e, leg))?;
            let a = st_mid[0].norm();
            if a < threshold {
                lo = mid;
                st_lo = st_mid;
            } else if a <= band {
                return Ok((mid, st_mid));
            } else {
                hi = mid;
            }
        }
        Err(IntegrateError::HandoffInconsistency(
            "could not land on the handoff band".into(),
        ))
    }

    /// Continue the trajectory through the pole ahead of `(leg li, s_star)`.
    /// Returns the crossing record and the resume position
    /// `(leg index, s, state)`; a leg index past the end means the path
    /// terminated inside the exit disk and the state is final.
    fn cross(
        &self,
        legs: &[PathSpec],
        li: usize,
        s_star: f64,
        st: State,
    ) -> Result<(CrossedPole, (usize, f64, State)), IntegrateError> {
        let map = self.map.as_ref().expect("crossing requires a map");
        let x1 = legs[li].at(s_star);
        let cx = P1Point { x: x1, y: st[0], yp: st[1] }.to_chart()?;
        let ct = map.invert(&cx)?;
        let et = ct.to_elliptic()?;
        let local = solve_local(et.t, et.u, et.up, &self.params.elliptic)?;
        let rec = locate_pole(&local, self.params.probe_radius)?;
        let p = rec.p;

        let r_exit = self.params.exit_factor * self.params.eps1.sqrt();
        let exit = find_exit(legs, li, s_star, p, r_exit);
        let room = local.radius() - (local.t1 - p).norm();
        let z_in = (0.6 * room).min(0.05);
        let (target_x, resume_pos) = match exit {
            Some((lj, s2)) => (legs[lj].at(s2), (lj, s2)),
            None => (legs.last().unwrap().end(), (legs.len(), 0.0)),
        };
        let away = (target_x - p).norm();
        if away < 2.0 * z_in {
            return Err(IntegrateError::HandoffInconsistency(format!(
                "path ends {away:.3e} from the pole at {p}; cannot resume"
            )));
        }
        let dirn = (target_x - p) / away;
        let x_in = p + z_in * dirn;
        let (y_in, yp_in) = state_from_local(map, &local, x_in)?;

        // Radial escape leg, crossing machinery off.
        let seg = line(x_in, target_x);
        let (_, st2, _) = advance(
            self.rhs_for(seg),
            0.0,
            1.0,
            [y_in, yp_in, st[2]],
            &self.ctrl(),
            self.cap_for(seg),
            |_, _, _, _| StepOutcome::Continue,
        )
        .map_err(|e| self.step_err(e, seg))?;
        if st2[0].norm() >= 1.0 / self.params.eps1 {
            return Err(IntegrateError::HandoffInconsistency(format!(
                "state at exit point still large: |y| = {:.3e}",
                st2[0].norm()
            )));
        }

        let pole = CrossedPole {
            x: p,
            t1: local.t1,
            k1: local.k1,
            handoff_x: x1,
            residual_check: rec.residual_check,
            charts: HandoffCharts { x_plane: cx, t_plane: ct },
            local,
        };
        Ok((pole, (resume_pos.0, resume_pos.1, st2)))
    }

    /// Trajectory values near a crossed pole, straight from the
    /// autonomous local solution pushed through the conjugation.
    pub fn y_near_pole(
        &self,
        pole: &CrossedPole,
        x: Complex64,
    ) -> Result<(Complex64, Complex64), IntegrateError> {
        let map = self
            .map
            .as_ref()
            .ok_or_else(|| IntegrateError::HandoffInconsistency("no map".into()))?;
        state_from_local(map, &pole.local, x)
    }

    /// Locate the first pole along a ray by brute force: integrate until
    /// `|y| >= big_y`, then read the pole from the leading Laurent term.
    pub fn brute_force_pole(
        &self,
        x_start: Complex64,
        y0: Complex64,
        yp0: Complex64,
        dir: Complex64,
        max_len: f64,
    ) -> Result<Complex64, IntegrateError> {
        let dirn = dir / dir.norm();
        let leg = line(x_start, x_start + dirn * max_len);
        let big = self.params.big_y;
        let mut found: Option<(Complex64, Complex64, Complex64)> = None;
        let hit = &mut found;
        advance(
            self.rhs_for(leg),
            0.0,
            1.0,
            [y0, yp0, Complex64::new(0.0, 0.0)],
            &self.ctrl(),
            self.cap_for(leg),
            move |_, _, sn, stn| {
                if stn[0].norm() >= big {
                    *hit = Some((leg.at(sn), stn[0], stn[1]));
                    StepOutcome::Halt
                } else {
                    StepOutcome::Continue
                }
            },
        )
        .map_err(|e| self.step_err(e, leg))?;
        match found {
            Some((x, y, yp)) => Ok(x + yp / (2.0 * y * y)),
            None => Err(IntegrateError::NoPole(format!(
                "|y| stayed below {big:.1e} along the ray from {x_start}"
            ))),
        }
    }

    /// Integrate many initial conditions in parallel.  Results come back
    /// in input order.
    pub fn pole_map(&self, jobs: &[PoleJob]) -> Vec<Result<Solution, IntegrateError>> {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|j| self.integrate(j.y0, j.yp0, &j.path))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PoleJob {
    pub y0: Complex64,
    pub yp0: Complex64,
    pub path: Vec<PathSpec>,
}

/// First parameter at or past `(li, s_from)` where the path leaves the
/// disk `|x - p| < r_exit`.
fn find_exit(
    legs: &[PathSpec],
    li: usize,
    s_from: f64,
    p: Complex64,
    r_exit: f64,
) -> Option<(usize, f64)> {
    const SCAN: usize = 800;
    for (lj, leg) in legs.iter().enumerate().skip(li) {
        let s0 = if lj == li { s_from } else { 0.0 };
        for j in 1..=SCAN {
            let s = s0 + (1.0 - s0) * j as f64 / SCAN as f64;
            if (leg.at(s) - p).norm() >= r_exit {
                return Some((lj, s));
            }
        }
    }
    None
}

/// Solve `gamma(t, chart(u(t))) = x` for `t` by fixed point (the map is
/// the identity plus `O(v^4)`), then push the chart forward and undo it.
fn state_from_local(
    map: &GammaMap,
    local: &EllipticLocal,
    x: Complex64,
) -> Result<(Complex64, Complex64), IntegrateError> {
    let mut t = x;
    for _ in 0..50 {
        let u = local.u_at(t);
        let up = local.up_at(t);
        let cp = EllipticPoint { t, u, up }.to_chart()?;
        let img = map.eval(&cp);
        let dx = img.base - x;
        if dx.norm() <= 5e-15 * (1.0 + x.norm()) {
            if (t - local.t1).norm() > local.radius() {
                return Err(IntegrateError::HandoffInconsistency(format!(
                    "evaluation point t = {t} left the local disk"
                )));
            }
            let out = img.to_p1()?;
            return Ok((out.y, out.yp));
        }
        t -= dx;
    }
    Err(IntegrateError::HandoffInconsistency(format!(
        "no parameter with image x = {x} near the local disk"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_to_f64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn taylor_radius_forms() {
        // y = 1, y' = 2, f = 0: all three scales equal one.
        let r = taylor_radius(c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), 0.25);
        assert!((r - 0.25).abs() < 1e-15);
        // All magnitudes zero: no constraint.
        let r = taylor_radius(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 0.25);
        assert!(r.is_infinite());
        // Large y dominates through the quartic root of y^2.
        let r = taylor_radius(c(1e4, 0.0), c(0.0, 0.0), c(0.0, 0.0), 1.0);
        assert!((r - 1e-2).abs() < 1e-9);
    }

    /// Taylor coefficients of the solution at `x0`, marched directly
    /// from the recurrence of `y'' = 6y^2 + f`.
    fn taylor_march(
        forcing: &Forcing,
        x0: Complex64,
        y0: Complex64,
        yp0: Complex64,
        order: usize,
    ) -> Vec<Complex64> {
        let fc: Vec<f64> = forcing.coeffs().iter().map(rat_to_f64).collect();
        // f(x0 + z) coefficients by binomial expansion.
        let mut fz = vec![c(0.0, 0.0); order + 1];
        for (j, &co) in fc.iter().enumerate() {
            let mut term = vec![c(0.0, 0.0); j + 1];
            // (x0 + z)^j
            let mut binom = 1.0f64;
            for (m, slot) in term.iter_mut().enumerate() {
                *slot = c(binom, 0.0) * x0.powi((j - m) as i32);
                binom = binom * (j - m) as f64 / (m + 1) as f64;
            }
            for (m, t) in term.iter().enumerate() {
                if m <= order {
                    fz[m] += co * t;
                }
            }
        }
        let mut a = vec![c(0.0, 0.0); order + 1];
        a[0] = y0;
        a[1] = yp0;
        for n in 0..order - 1 {
            let mut conv = c(0.0, 0.0);
            for i in 0..=n {
                conv += a[i] * a[n - i];
            }
            a[n + 2] = (6.0 * conv + fz[n]) / ((n + 1) as f64 * (n + 2) as f64);
        }
        a
    }

    fn taylor_eval(a: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
        let mut y = c(0.0, 0.0);
        let mut yp = c(0.0, 0.0);
        for (n, &an) in a.iter().enumerate().rev() {
            y = y * z + an;
            if n >= 1 {
                yp = yp * z + an * n as f64;
            }
        }
        (y, yp)
    }

    #[test]
    fn pole_free_segment_matches_taylor_marching() {
        let forcing = Forcing::painleve_one();
        let ig = Integrator::new(forcing.clone(), IntegrateParams {
            rtol: 1e-12,
            atol: 1e-14,
            ..IntegrateParams::default()
        });
        let sol = ig
            .integrate(c(1.0, 0.0), c(0.0, 0.0), &[line(c(0.0, 0.0), c(0.6, 0.0))])
            .unwrap();

        // Independent oracle: march 30-term Taylor steps of size 0.03.
        let mut x = c(0.0, 0.0);
        let mut y = c(1.0, 0.0);
        let mut yp = c(0.0, 0.0);
        for _ in 0..20 {
            let a = taylor_march(&forcing, x, y, yp, 30);
            let h = c(0.03, 0.0);
            let (ny, nyp) = taylor_eval(&a, h);
            x += h;
            y = ny;
            yp = nyp;
        }
        assert!((sol.x_end - x).norm() < 1e-15);
        assert!(
            (sol.y - y).norm() <= 1e-10 * y.norm(),
            "y mismatch: {} vs {}",
            sol.y,
            y
        );
        assert!((sol.yp - yp).norm() <= 1e-9 * yp.norm());
        assert!(sol.drift.unwrap() <= 1e-9);
    }

    #[test]
    fn crossing_a_straight_pole_approach() {
        let ig = Integrator::with_crossing(
            Forcing::painleve_one(),
            IntegrateParams::default(),
        )
        .unwrap();
        // On the leading Laurent ray toward a pole about 0.2 ahead.
        let sol = ig
            .integrate(c(25.0, 0.0), c(250.0, 0.0), &[line(c(0.0, 0.0), c(0.8, 0.0))])
            .unwrap();
        assert_eq!(sol.poles.len(), 1, "expected exactly one crossing");
        let pole = &sol.poles[0];
        assert!(
            pole.x.re > 0.1 && pole.x.re < 0.35 && pole.x.im.abs() < 0.05,
            "pole at {}",
            pole.x
        );
        assert!(pole.residual_check < 1e-6);
        assert!((sol.x_end - c(0.8, 0.0)).norm() < 1e-14);
        assert!(sol.y.norm() < 100.0);
        assert!(sol.drift.is_none());
    }

    #[test]
    fn handoff_pole_agrees_with_brute_force() {
        let ig = Integrator::with_crossing(
            Forcing::painleve_one(),
            IntegrateParams {
                rtol: 1e-12,
                atol: 1e-14,
                ..IntegrateParams::default()
            },
        )
        .unwrap();
        let sol = ig
            .integrate(c(25.0, 0.0), c(250.0, 0.0), &[line(c(0.0, 0.0), c(0.8, 0.0))])
            .unwrap();
        let p_handoff = sol.poles[0].x;
        let p_direct = ig
            .brute_force_pole(c(0.0, 0.0), c(25.0, 0.0), c(250.0, 0.0), c(1.0, 0.0), 0.8)
            .unwrap();
        let gap = (p_handoff - p_direct).norm();
        assert!(gap <= 1e-8, "pole gap {gap:.3e}");
    }

    #[test]
    fn loop_around_a_pole_is_single_valued() {
        let ig = Integrator::with_crossing(
            Forcing::painleve_one(),
            IntegrateParams {
                rtol: 1e-12,
                atol: 1e-14,
                ..IntegrateParams::default()
            },
        )
        .unwrap();
        let sol = ig
            .integrate(c(25.0, 0.0), c(250.0, 0.0), &[line(c(0.0, 0.0), c(0.8, 0.0))])
            .unwrap();
        let p = sol.poles[0].x;
        let x_s = p + c(0.25, 0.0);
        let (y_s, yp_s) = ig.y_near_pole(&sol.poles[0], x_s).unwrap();

        let plain = Integrator::new(
            Forcing::painleve_one(),
            IntegrateParams {
                rtol: 1e-12,
                atol: 1e-14,
                ..IntegrateParams::default()
            },
        );
        let out = plain
            .integrate(y_s, yp_s, &loop_around(p, 0.25, 0.0))
            .unwrap();
        assert!(out.poles.is_empty());
        let dy = (out.y - y_s).norm() / (1.0 + y_s.norm());
        let dyp = (out.yp - yp_s).norm() / (1.0 + yp_s.norm());
        assert!(dy <= 1e-9, "monodromy defect in y: {dy:.3e}");
        assert!(dyp <= 1e-9, "monodromy defect in y': {dyp:.3e}");
        assert!(out.drift.unwrap() <= 1e-8);
    }

    #[test]
    fn plain_integrator_reports_the_singularity() {
        let ig = Integrator::new(Forcing::painleve_one(), IntegrateParams::default());
        let err = ig
            .integrate(c(25.0, 0.0), c(250.0, 0.0), &[line(c(0.0, 0.0), c(0.8, 0.0))])
            .unwrap_err();
        match err {
            IntegrateError::Step { x } => {
                assert!(x.re > 0.1 && x.re < 0.35, "underflow at {x}");
            }
            other => panic!("want step underflow, got {other}"),
        }
    }

    #[test]
    fn obstructed_forcing_cannot_build_a_crossing_integrator() {
        let err = Integrator::with_crossing(
            Forcing::parse("x^2").unwrap(),
            IntegrateParams::default(),
        )
        .err()
        .expect("x^2 is obstructed");
        assert!(matches!(
            err,
            IntegrateError::NormalForm(NormalFormError::Obstruction { .. })
        ));
    }
}
