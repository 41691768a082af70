//! Contour formulas for the N -> infinity limit, where the empirical rate
//! distribution is replaced by the weight `x^(alpha-1)` on `[0, M]` or `[0, inf)`.

use num_complex::Complex64;

use super::Observable;
use crate::contour::{auto_contour, Contour, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::numeric::CompensatedComplex;
use crate::quadrature::{NodeSet, PanelPlan};

const PANEL_ORDER: usize = 16;
const CHECK_ORDER: usize = 24;
const CHECK_STRIDE: usize = 7;
const CHECK_TOL: f64 = 1e-9;
const TAIL_TERMS: usize = 60;

/// The weight `x^(alpha-1) dx` on `[0, upper]` (`None` for `[0, inf)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawMeasure {
    pub alpha: f64,
    pub upper: Option<f64>,
}

impl PowerLawMeasure {
    pub fn unit(alpha: f64) -> Self {
        Self { alpha, upper: Some(1.0) }
    }

    pub fn truncated(alpha: f64, m: f64) -> Self {
        Self { alpha, upper: Some(m) }
    }

    pub fn infinite(alpha: f64) -> Self {
        Self { alpha, upper: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {} outside (0,1)", self.alpha)));
        }
        if let Some(m) = self.upper {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidParameter(format!("measure bound {m} must be positive")));
            }
        }
        Ok(())
    }
}

/// `int_M^inf x^(alpha-1)/(z - x) dx` for `|z| < M`.
fn tail_integral(alpha: f64, m: f64, z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut zn = Complex64::new(1.0, 0.0);
    let mut mp = m.powf(alpha - 1.0);
    for n in 0..TAIL_TERMS {
        acc -= zn * mp / (n as f64 + 1.0 - alpha);
        zn *= z;
        mp /= m;
    }
    acc
}

/// Quadrature nodes for the measure, tuned to a contour and an observable.
struct CutRule {
    nodes: NodeSet,
    tail_at: Option<f64>,
}

fn cut_rule(mu: &PowerLawMeasure, c: &Contour, h: &Observable, order: usize, halo_scale: f64) -> CutRule {
    let p = c.params();
    let halo = p.clearance * halo_scale;
    let focus = p.right.min(mu.upper.unwrap_or(f64::INFINITY));
    let mut fine = 0.5 * halo;
    if let Some(s) = h.fine_scale() {
        fine = fine.min(s);
    }
    let reach = c.nodes().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (upper, tail_at) = match mu.upper {
        Some(m) => (m, None),
        None => {
            let m = (4.0 * reach).max(10.0).max(2.0 * h.settles_at());
            (m, Some(m))
        }
    };
    let plan = PanelPlan {
        alpha: mu.alpha,
        upper,
        fine: fine.min(upper),
        halo,
        focus_end: focus,
        breakpoints: h.breakpoints(),
        order,
    };
    CutRule { nodes: plan.build(), tail_at }
}

fn cauchy_pair(rule: &CutRule, fx: &[f64], f_tail: f64, alpha: f64, z: Complex64) -> (Complex64, Complex64) {
    let mut num = CompensatedComplex::new();
    let mut den = CompensatedComplex::new();
    for ((x, w), f) in rule.nodes.x.iter().zip(&rule.nodes.w).zip(fx) {
        let r = *w / (z - *x);
        den.add(r);
        num.add(r * *f);
    }
    let (mut num, mut den) = (num.value(), den.value());
    if let Some(m) = rule.tail_at {
        let t = tail_integral(alpha, m, z);
        den += t;
        num += t * f_tail;
    }
    (num, den)
}

/// `(1/2 pi i) int e^{-t_w z}/z * [int h x^(a-1)/(z-x)] / [int x^(a-1)/(z-x)] dz`.
///
/// A second, finer rule is evaluated on a subset of nodes; disagreement
/// beyond `1e-9` is reported as non-convergence.
pub fn limit_expectation(mu: &PowerLawMeasure, h: &Observable, t_w: f64, c: &Contour) -> Result<f64> {
    limit_expectation_with(mu, h, t_w, c, PANEL_ORDER)
}

pub fn limit_expectation_with(
    mu: &PowerLawMeasure,
    h: &Observable,
    t_w: f64,
    c: &Contour,
    order: usize,
) -> Result<f64> {
    mu.validate()?;
    c.check_encloses(0.0, mu.upper.unwrap_or(0.0))?;
    if c.kind() != crate::contour::ContourKind::GammaInfinity && mu.upper.is_none() {
        return Err(Error::InvalidParameter("an unbounded measure needs a gamma-infinity path".into()));
    }
    let rule = cut_rule(mu, c, h, order, 1.0);
    let check = cut_rule(mu, c, h, CHECK_ORDER, 0.5);
    let fx: Vec<f64> = rule.nodes.x.iter().map(|x| h.eval(*x)).collect();
    let fc: Vec<f64> = check.nodes.x.iter().map(|x| h.eval(*x)).collect();
    let f_tail = h.tail_value();
    let mut total = CompensatedComplex::new();
    for (k, (z, w)) in c.nodes().iter().zip(c.weights()).enumerate() {
        let (num, den) = cauchy_pair(&rule, &fx, f_tail, mu.alpha, *z);
        if k % CHECK_STRIDE == 0 {
            let (n2, d2) = cauchy_pair(&check, &fc, f_tail, mu.alpha, *z);
            let scale = den.norm().max(num.norm());
            if (n2 - num).norm() > CHECK_TOL * scale || (d2 - den).norm() > CHECK_TOL * den.norm() {
                return Err(Error::NoConvergence(format!("cut quadrature at node {z}")));
            }
        }
        total.add(*w * (-t_w * *z).exp() / *z * (num / den));
    }
    Ok(total.value().re)
}

fn default_contour(mu: &PowerLawMeasure, t_w: f64) -> Result<Contour> {
    match mu.upper {
        Some(m) => auto_contour(m, t_w, DEFAULT_EPS),
        None => crate::contour::make_gamma_infinity_with(
            t_w,
            DEFAULT_EPS,
            crate::contour::clearance_for(t_w),
            f64::INFINITY,
        ),
    }
}

/// Limiting two-time correlation `Pi(t, t_w)`.
pub fn pi_limit(alpha: f64, t: f64, t_w: f64) -> Result<f64> {
    let mu = PowerLawMeasure::unit(alpha);
    pi_limit_with(alpha, t, t_w, &default_contour(&mu, t_w)?, PANEL_ORDER)
}

/// [`pi_limit`] on a caller-supplied contour with `x_order` nodes per panel.
pub fn pi_limit_with(alpha: f64, t: f64, t_w: f64, c: &Contour, x_order: usize) -> Result<f64> {
    check_times(t, t_w)?;
    let h = Observable::exp_decay(t)?;
    limit_expectation_with(&PowerLawMeasure::unit(alpha), &h, t_w, c, x_order)
}

/// Limiting occupation expectation `H(s) = lim E_N h(x_N(s))`.
pub fn h_limit(alpha: f64, h: &Observable, s: f64) -> Result<f64> {
    check_times(s, 0.0)?;
    let mu = PowerLawMeasure::unit(alpha);
    limit_expectation(&mu, h, s, &default_contour(&mu, s)?)
}

/// `s^(1-alpha) P(x(s) >= delta)` in the limit.
pub fn deep_trap_decay(alpha: f64, delta: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    let h = Observable::indicator_ge(delta)?;
    Ok(s.powf(1.0 - alpha) * h_limit(alpha, &h, s)?)
}

/// `g_M(t, t_w)`: the limit formula with the weight cut at `M`.
pub fn g_truncated(alpha: f64, m: f64, t: f64, t_w: f64) -> Result<f64> {
    if !(m >= 1.0) {
        return Err(Error::InvalidParameter(format!("M must be >= 1, got {m}")));
    }
    check_times(t, t_w)?;
    let mu = PowerLawMeasure::truncated(alpha, m);
    limit_expectation(&mu, &Observable::exp_decay(t)?, t_w, &default_contour(&mu, t_w)?)
}

/// `g(t, t_w)`: the limit formula with the untruncated weight on `[0, inf)`.
pub fn g_infinite(alpha: f64, t: f64, t_w: f64) -> Result<f64> {
    check_times(t, t_w)?;
    if !(t_w > 0.0) {
        return Err(Error::InvalidParameter("g needs t_w > 0".into()));
    }
    let mu = PowerLawMeasure::infinite(alpha);
    limit_expectation(&mu, &Observable::exp_decay(t)?, t_w, &default_contour(&mu, t_w)?)
}

/// `t^(1-alpha) P(x(t) >= delta)` for the unbounded intensity of the Ppp limit.
pub fn deep_trap_decay_ppp(alpha: f64, delta: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let mu = PowerLawMeasure::infinite(alpha);
    let h = Observable::indicator_ge(delta)?;
    Ok(t.powf(1.0 - alpha) * limit_expectation(&mu, &h, t, &default_contour(&mu, t)?)?)
}

fn check_times(t: f64, t_w: f64) -> Result<()> {
    if t >= 0.0 && t_w >= 0.0 && t.is_finite() && t_w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("times must be finite and >= 0 (t={t}, t_w={t_w})")))
    }
}

/// `int_0^M x^(alpha-1)/(z - x) dx` by its `M/z` series (requires `|z| > M`).
pub fn cauchy_far(alpha: f64, m: f64, z: Complex64) -> Complex64 {
    let mut acc = CompensatedComplex::new();
    let q = m / z;
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 0..400 {
        acc.add(qn / (alpha + n as f64));
        qn *= q;
        if qn.norm() < 1e-18 {
            break;
        }
    }
    acc.value() * m.powf(alpha) / z
}

/// `int_0^inf x^(alpha-1)/(z - x) dx = -pi (-z)^(alpha-1) / sin(pi alpha)`.
pub fn cauchy_infinite(alpha: f64, z: Complex64) -> Complex64 {
    let pi = std::f64::consts::PI;
    -(-z).powf(alpha - 1.0) * (pi / (pi * alpha).sin())
}
