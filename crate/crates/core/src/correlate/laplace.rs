//! Laplace-domain quantities: the aging function A(theta), the transforms
//! of Pi and H, and the deep-trap constants.

use num_complex::Complex64;

use super::Observable;
use crate::error::{Error, Result};
use crate::numeric::{gamma, CompensatedComplex, CompensatedSum};
use crate::quadrature::{gauss_jacobi, NodeSet, PanelPlan};

const A_ORDER: usize = 40;
const HAT_ORDER: usize = 20;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha {alpha} outside (0,1)")))
    }
}

/// `pi / sin(pi alpha) = int_0^inf x^(alpha-1)/(1+x) dx`.
pub fn b_alpha(alpha: f64) -> f64 {
    std::f64::consts::PI / (std::f64::consts::PI * alpha).sin()
}

/// `A(theta) = (sin(pi alpha)/pi) int_{theta/(1+theta)}^1 u^(-alpha) (1-u)^(alpha-1) du`.
pub fn aging_a(alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(theta >= 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be >= 0, got {theta}")));
    }
    if theta == 0.0 {
        return Ok(1.0);
    }
    if theta.is_infinite() {
        return Ok(0.0);
    }
    let a = theta / (1.0 + theta);
    let norm = 1.0 / b_alpha(alpha);
    if a <= 0.5 {
        // complement over [0, a], u^(-alpha) absorbed by the rule
        let rule = gauss_jacobi(A_ORDER, 0.0, -alpha);
        let half = 0.5 * a;
        let mut acc = CompensatedSum::new();
        for (v, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = half * (1.0 + v);
            acc.add(w * (1.0 - u).powf(alpha - 1.0));
        }
        Ok(1.0 - norm * half.powf(1.0 - alpha) * acc.value())
    } else {
        let rule = gauss_jacobi(A_ORDER, alpha - 1.0, 0.0);
        let half = 0.5 * (1.0 - a);
        let mut acc = CompensatedSum::new();
        for (v, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = a + half * (1.0 + v);
            acc.add(w * u.powf(-alpha));
        }
        Ok(norm * half.powf(alpha) * acc.value())
    }
}

/// Laplace transform of the limit variable `Z` of `t x_N(t)`: equals `A(theta)`.
pub fn z_distribution_transform(alpha: f64, theta: f64) -> Result<f64> {
    aging_a(alpha, theta)
}

fn check_omega(omega: Complex64) -> Result<()> {
    if !(omega.re.is_finite() && omega.im.is_finite()) || (omega.im == 0.0 && omega.re <= 0.0) {
        return Err(Error::OnCut(format!("{omega}")));
    }
    Ok(())
}

/// Nodes for `alpha int_0^1 x^(alpha-1) f(x) dx` resolving features at `scale`.
fn hat_rule(alpha: f64, scale: f64, breaks: &[f64]) -> NodeSet {
    let mut plan = PanelPlan::graded(alpha, 1.0, (scale / 8.0).min(0.25)).with_breakpoints(breaks);
    plan.order = HAT_ORDER;
    let mut set = plan.build();
    set.w.iter_mut().for_each(|w| *w *= alpha);
    set
}

/// `Pi_hat(theta, omega) = E_x[ (omega + x theta + x)^-1 / E_y((omega + x theta)/(omega + x theta + y)) ]`.
pub fn pi_hat(alpha: f64, theta: f64, omega: Complex64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_omega(omega)?;
    if !(theta >= 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be >= 0, got {theta}")));
    }
    let rule = hat_rule(alpha, omega.norm() / (1.0 + theta), &[]);
    let mut outer = CompensatedComplex::new();
    for (x, wx) in rule.x.iter().zip(&rule.w) {
        let c = omega + x * theta;
        let mut inner = CompensatedComplex::new();
        for (y, wy) in rule.x.iter().zip(&rule.w) {
            inner.add(c / (c + *y) * *wy);
        }
        outer.add(*wx / ((c + *x) * inner.value()));
    }
    Ok(outer.value())
}

/// `H_hat(omega) = (1/omega) int h x^(a-1)/(omega+x) / int x^(a-1)/(omega+x)` on `[0,1]`.
pub fn h_hat(alpha: f64, h: &Observable, omega: Complex64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_omega(omega)?;
    let rule = hat_rule(alpha, omega.norm(), &h.breakpoints());
    let mut num = CompensatedComplex::new();
    let mut den = CompensatedComplex::new();
    for (x, w) in rule.x.iter().zip(&rule.w) {
        let r = *w / (omega + *x);
        den.add(r);
        num.add(r * h.eval(*x));
    }
    Ok(num.value() / den.value() / omega)
}

/// `B(delta) = int_delta^1 x^(alpha-2) dx / B(alpha)`.
pub fn b_delta(alpha: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside (0,1]")));
    }
    Ok((delta.powf(alpha - 1.0) - 1.0) / (1.0 - alpha) / b_alpha(alpha))
}

/// `c(alpha) = Gamma(alpha)`.
pub fn c_alpha(alpha: f64) -> f64 {
    gamma(alpha)
}

/// `B(delta) / c(alpha)`, the deep-trap decay constant.
pub fn deep_trap_constant(alpha: f64, delta: f64) -> Result<f64> {
    Ok(b_delta(alpha, delta)? / c_alpha(alpha))
}

/// Unbounded-intensity variant: `int_delta^inf x^(alpha-2) dx / B(alpha) / Gamma(alpha)`.
pub fn deep_trap_constant_ppp(alpha: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if delta.is_infinite() {
        return Ok(0.0);
    }
    Ok(delta.powf(alpha - 1.0) / (1.0 - alpha) / b_alpha(alpha) / c_alpha(alpha))
}
