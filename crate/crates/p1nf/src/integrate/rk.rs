//! Adaptive Dormand-Prince 5(4) stepping for the three-component state
//! `[y, y', I]` along a real parameter.

use num_complex::Complex64;
use thiserror::Error;

pub type State = [Complex64; 3];

// Dormand-Prince tableau; the fifth-order weights are row seven, so the
// last stage evaluates the right-hand side at the accepted point (FSAL).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the fifth- and fourth-order weights; the fifth-order
// weights themselves are the sixth row of `A`.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; `None` derives one from the span and cap.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            max_steps: 400_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Halt,
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("step size underflow at s = {s}")]
    StepUnderflow { s: f64 },
    #[error("step budget exhausted at s = {s}")]
    TooManySteps { s: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SpanStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn add_scaled(y: &State, h: f64, ks: &[State], coef: &[f64]) -> State {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coef) {
        if c == 0.0 {
            continue;
        }
        for i in 0..3 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `dy/ds = rhs(s, y)` from `s0` to `s1` (`s1 > s0`).
///
/// `cap` bounds the step size as a function of the current point;
/// `observer` sees every accepted step and may halt the sweep, in which
/// case the returned parameter is the halt point rather than `s1`.
pub fn advance<F, Cap, Obs>(
    rhs: F,
    s0: f64,
    s1: f64,
    y0: State,
    ctrl: &StepControl,
    mut cap: Cap,
    mut observer: Obs,
) -> Result<(f64, State, SpanStats), StepError>
where
    F: Fn(f64, &State) -> State,
    Cap: FnMut(f64, &State) -> f64,
    Obs: FnMut(f64, &State, f64, &State) -> StepOutcome,
{
    let span = s1 - s0;
    let mut stats = SpanStats::default();
    if span <= 0.0 {
        return Ok((s0, y0, stats));
    }
    let h_floor = span * 1e-13;
    let mut s = s0;
    let mut y = y0;
    let mut k1 = rhs(s, &y);
    let mut h = ctrl
        .h_init
        .unwrap_or(span * 1e-2)
        .min(cap(s, &y))
        .min(span);
    let mut steps = 0usize;

    while s < s1 {
        steps += 1;
        if steps > ctrl.max_steps {
            return Err(StepError::TooManySteps { s });
        }
        h = h.min(cap(s, &y)).min(s1 - s);
        if h < h_floor {
            return Err(StepError::StepUnderflow { s });
        }

        let mut ks = [k1, k1, k1, k1, k1, k1, k1];
        for stage in 1..6 {
            let yi = add_scaled(&y, h, &ks[..stage], &A[stage - 1][..stage]);
            ks[stage] = rhs(s + C[stage] * h, &yi);
        }
        let y_new = add_scaled(&y, h, &ks[..6], &A[5]);
        ks[6] = rhs(s + h, &y_new);

        let mut err: f64 = 0.0;
        for i in 0..3 {
            let mut e = Complex64::new(0.0, 0.0);
            for (k, &c) in ks.iter().zip(&E) {
                e += c * k[i];
            }
            let sc = ctrl.atol + ctrl.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(h * e.norm() / sc);
        }

        if err <= 1.0 {
            stats.accepted += 1;
            let s_prev = s;
            let y_prev = y;
            s += h;
            y = y_new;
            k1 = ks[6];
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
            if observer(s_prev, &y_prev, s, &y) == StepOutcome::Halt {
                return Ok((s, y, stats));
            }
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    // Sanity check; the fifth-order solution should land exactly on s1
    // because of the span clamp above.
    debug_assert!((s - s1).abs() <= span * 1e-12);
    Ok((s1, y, stats))
}
