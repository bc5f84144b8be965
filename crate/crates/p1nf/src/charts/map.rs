//! Numeric evaluation and inversion of the conjugating map, plus the
//! exact-arithmetic residuals of the pushforward property.

use super::{in_region, ChartError, ChartPoint, Region, RegionCheck, RegionParams};
use crate::normal_form::NormalFormSeries;
use crate::rat::{rat_to_f64, rint, CxRat};
use crate::series::{TPoly, VSeries};
use num_complex::Complex64;

/// Coefficients `[s-power][tau-power]` of one `v`-order, as binary64.
struct CPoly {
    c: Vec<Vec<f64>>,
}

impl CPoly {
    fn eval(&self, tau: Complex64, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for sc in self.c.iter().rev() {
            let mut p = Complex64::new(0.0, 0.0);
            for t in sc.iter().rev() {
                p = p * tau + t;
            }
            acc = acc * s + p;
        }
        acc
    }
}

/// Sparse polynomial in `v` with `CPoly` coefficients, ascending powers.
struct CSeries {
    terms: Vec<(usize, CPoly)>,
}

impl CSeries {
    fn compile(vs: &VSeries) -> CSeries {
        let terms = vs
            .iter()
            .map(|(k, ws)| {
                let c = ws
                    .coeffs()
                    .iter()
                    .map(|p| p.coeffs().iter().map(rat_to_f64).collect())
                    .collect();
                (k, CPoly { c })
            })
            .collect();
        CSeries { terms }
    }

    fn eval(&self, tau: Complex64, s: Complex64, v: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut upper: Option<usize> = None;
        for (k, p) in self.terms.iter().rev() {
            if let Some(kk) = upper {
                acc *= v.powi((kk - k) as i32);
            }
            acc += p.eval(tau, s);
            upper = Some(*k);
        }
        match upper {
            Some(kmin) if kmin > 0 => acc * v.powi(kmin as i32),
            _ => acc,
        }
    }
}

struct MapComponent {
    val: CSeries,
    d_t: CSeries,
    d_v: CSeries,
    d_w: CSeries,
}

impl MapComponent {
    fn compile(vs: &VSeries) -> MapComponent {
        MapComponent {
            val: CSeries::compile(vs),
            d_t: CSeries::compile(&vs.derive_t()),
            d_v: CSeries::compile(&vs.derive_v()),
            d_w: CSeries::compile(&vs.derive_w()),
        }
    }
}

/// Compiled binary64 view of the conjugation: forward evaluation, the
/// flow derivative of the base component, and Newton inversion.
pub struct GammaMap {
    x0: Complex64,
    gamma: MapComponent,
    eta: MapComponent,
    theta: MapComponent,
    lgamma: CSeries,
}

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITERS: usize = 25;

impl GammaMap {
    pub fn new(nf: &NormalFormSeries) -> GammaMap {
        GammaMap {
            x0: CxRat::from_rat(nf.x0.clone()).to_c64(),
            gamma: MapComponent::compile(&nf.gamma),
            eta: MapComponent::compile(&nf.eta),
            theta: MapComponent::compile(&nf.theta),
            lgamma: CSeries::compile(&nf.lgamma),
        }
    }

    pub fn x0(&self) -> Complex64 {
        self.x0
    }

    /// Local coordinates of an absolute chart point.
    fn frame(&self, c: &ChartPoint) -> (Complex64, Complex64) {
        (c.base - self.x0, c.w - Complex64::new(0.25, 0.0))
    }

    /// Forward map `(t, v, w) -> (x, v1, w1)`.  The `w1` component uses
    /// the constraint `w1 v1^2 = v^2 w`, which holds exactly for the
    /// conjugation; `theta_direct` evaluates the series instead.
    pub fn eval(&self, c: &ChartPoint) -> ChartPoint {
        if c.v == Complex64::new(0.0, 0.0) {
            return *c;
        }
        let (tau, s) = self.frame(c);
        let x = self.x0 + self.gamma.val.eval(tau, s, c.v);
        let v1 = self.eta.val.eval(tau, s, c.v);
        let w1 = c.v * c.v * c.w / (v1 * v1);
        ChartPoint { base: x, v: v1, w: w1 }
    }

    /// The `w1` component evaluated from its own series.
    pub fn theta_direct(&self, c: &ChartPoint) -> Complex64 {
        let (tau, s) = self.frame(c);
        self.theta.val.eval(tau, s, c.v)
    }

    /// `dx/dt` along the autonomous flow, as a function of `(t, v, w)`.
    pub fn lgamma_at(&self, c: &ChartPoint) -> Complex64 {
        let (tau, s) = self.frame(c);
        self.lgamma.eval(tau, s, c.v)
    }

    /// Newton inversion seeded at the identity.  The Jacobian is
    /// `Id + O(v^4)`, so convergence is immediate throughout the inner
    /// region.
    pub fn invert(&self, target: &ChartPoint) -> Result<ChartPoint, ChartError> {
        if target.v == Complex64::new(0.0, 0.0) {
            return Ok(*target);
        }
        let mut q = *target;
        for _ in 0..NEWTON_MAX_ITERS {
            let img = self.eval(&q);
            let f = [
                img.base - target.base,
                img.v - target.v,
                img.w - target.w,
            ];
            if f.iter().map(|z| z.norm()).fold(0.0, f64::max) <= NEWTON_TOL {
                return Ok(q);
            }
            let (tau, s) = self.frame(&q);
            let j = [
                [
                    self.gamma.d_t.eval(tau, s, q.v) + Complex64::new(1.0, 0.0),
                    self.gamma.d_v.eval(tau, s, q.v),
                    self.gamma.d_w.eval(tau, s, q.v),
                ],
                [
                    self.eta.d_t.eval(tau, s, q.v),
                    self.eta.d_v.eval(tau, s, q.v),
                    self.eta.d_w.eval(tau, s, q.v),
                ],
                [
                    self.theta.d_t.eval(tau, s, q.v),
                    self.theta.d_v.eval(tau, s, q.v),
                    self.theta.d_w.eval(tau, s, q.v),
                ],
            ];
            let step = solve3(j, f).ok_or(ChartError::NoConvergence(NEWTON_MAX_ITERS))?;
            q = ChartPoint {
                base: q.base - step[0],
                v: q.v - step[1],
                w: q.w - step[2],
            };
        }
        // Accept if the last iterate still meets the tolerance.
        let img = self.eval(&q);
        let r = [
            img.base - target.base,
            img.v - target.v,
            img.w - target.w,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
        if r <= NEWTON_TOL {
            Ok(q)
        } else {
            Err(ChartError::NoConvergence(NEWTON_MAX_ITERS))
        }
    }
}

/// Gaussian elimination with partial pivoting on a 3x3 complex system.
fn solve3(mut a: [[Complex64; 3]; 3], mut b: [Complex64; 3]) -> Option<[Complex64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            a[i][col]
                .norm()
                .partial_cmp(&a[j][col].norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].norm() == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let m = a[row][col] / a[col][col];
            let prow = a[col];
            for (k, s) in prow.iter().enumerate().skip(col) {
                a[row][k] -= m * s;
            }
            let s = b[col];
            b[row] -= m * s;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Verdict of the sampled check that the closed inner region lies inside
/// the image of the outer region.
#[derive(Debug, Clone, Copy)]
pub struct ClosureCheck {
    pub contained: bool,
    pub worst_margin: f64,
    pub samples: usize,
}

/// Sample the closed boundary of the inner region (plus interior shells),
/// pull each point back through the map, and check the preimage lies
/// strictly inside the outer region.
pub fn closure_contained(
    map: &GammaMap,
    params: &RegionParams,
    samples: usize,
) -> Result<ClosureCheck, ChartError> {
    let center = map.x0();
    let mut worst = f64::INFINITY;
    let mut contained = true;
    // Deterministic low-discrepancy phases, no shared state with callers.
    let irr = [0.618_033_988_749_894_9, 0.414_213_562_373_095_1, 0.732_050_807_568_877_3];
    for i in 0..samples {
        let ph = |m: f64| 2.0 * std::f64::consts::PI * ((i as f64 + 1.0) * m).fract();
        let r_frac = if i % 4 == 3 { 0.6 } else { 1.0 };
        let target = ChartPoint {
            base: center + params.xi * r_frac * Complex64::from_polar(1.0, ph(irr[0])),
            v: (r_frac / params.s_big) * Complex64::from_polar(1.0, ph(irr[1])),
            w: Complex64::new(0.25, 0.0)
                + params.delta * r_frac * Complex64::from_polar(1.0, ph(irr[2])),
        };
        let pre = map.invert(&target)?;
        let chk: RegionCheck = in_region(&pre, center, params, Region::Outer);
        let m = chk.margins.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        worst = worst.min(m);
        contained &= chk.inside;
    }
    Ok(ClosureCheck {
        contained,
        worst_margin: worst,
        samples,
    })
}

/// Exact-arithmetic evaluator for the pushforward property: along any
/// solution of the autonomous chart flow
///
/// `dv/dt = 2/w - 6,  dw/dt = (12/v)(w - 1/4)`
///
/// the image `(x, v1, w1)` of the map must satisfy the forced chart flow
///
/// `dv1/dx = 2/w1 - 6 - f(x) w1^2 v1^4`
/// `dw1/dx = (12/v1)(w1 - 1/4) + 2 f(x) w1^3 v1^3`
///
/// up to the series truncation order.  `residuals` returns the two
/// defects with `d/dx` eliminated through `dx/dt`; both are
/// `O(v^{K+1})` when the series are solved through order `K`.  All
/// arithmetic is exact so that defects far below binary64 rounding can
/// be measured.
pub struct ExactFlow {
    ftilde: TPoly,
    gamma: ExactComponent,
    eta: ExactComponent,
    theta: ExactComponent,
}

struct ExactComponent {
    val: VSeries,
    d_t: VSeries,
    d_v: VSeries,
    d_w: VSeries,
}

impl ExactComponent {
    fn new(vs: &VSeries) -> ExactComponent {
        ExactComponent {
            val: vs.clone(),
            d_t: vs.derive_t(),
            d_v: vs.derive_v(),
            d_w: vs.derive_w(),
        }
    }

    /// Value and flow derivative at an exact point; `b = 2/w - 6` and
    /// `a = 12 s / v` are the exact flow weights.
    fn value_and_l(&self, tau: &CxRat, s: &CxRat, v: &CxRat, b: &CxRat, a: &CxRat) -> (CxRat, CxRat) {
        let val = self.val.eval_cx(tau, s, v);
        let l = self
            .d_t
            .eval_cx(tau, s, v)
            .add(&b.mul(&self.d_v.eval_cx(tau, s, v)))
            .add(&a.mul(&self.d_w.eval_cx(tau, s, v)));
        (val, l)
    }
}

impl ExactFlow {
    pub fn new(nf: &NormalFormSeries) -> ExactFlow {
        ExactFlow {
            ftilde: nf.forcing.shifted(&nf.x0),
            gamma: ExactComponent::new(&nf.gamma),
            eta: ExactComponent::new(&nf.eta),
            theta: ExactComponent::new(&nf.theta),
        }
    }

    /// Defects of the two forced-flow equations at `(tau, s, v)`,
    /// `v != 0`.
    pub fn residuals(&self, tau: &CxRat, s: &CxRat, v: &CxRat) -> (CxRat, CxRat) {
        assert!(!v.is_zero(), "flow residuals need v != 0");
        let two = CxRat::from_rat(rint(2));
        let six = CxRat::from_rat(rint(6));
        let twelve = CxRat::from_rat(rint(12));
        let quarter = CxRat::from_rat(crate::rat::rat(1, 4));

        let w = quarter.add(s);
        let b = two.div(&w).sub(&six);
        let a = twelve.mul(s).div(v);

        let (g, lg) = self.gamma.value_and_l(tau, s, v, &b, &a);
        let (e, le) = self.eta.value_and_l(tau, s, v, &b, &a);
        let (th, lth) = self.theta.value_and_l(tau, s, v, &b, &a);

        let f_at_x = self.ftilde.eval_cx(&g);
        let e2 = e.mul(&e);
        let e3 = e2.mul(&e);
        let th2 = th.mul(&th);

        // dv1/dx RHS times dx/dt
        let rhs1 = two
            .div(&th)
            .sub(&six)
            .sub(&f_at_x.mul(&th2).mul(&e2).mul(&e2))
            .mul(&lg);
        // dw1/dx RHS times dx/dt
        let rhs2 = twelve
            .mul(&th.sub(&quarter))
            .div(&e)
            .add(&two.mul(&f_at_x).mul(&th2).mul(&th).mul(&e3))
            .mul(&lg);

        (le.sub(&rhs1), lth.sub(&rhs2))
    }
}
