//! Numerical Bromwich inversion along a path that wraps the negative axis,
//! used to check Tauberian asymptotics `G(s) ~ B s^(beta-1) / Gamma(beta)`.
//!
//! Path (counterclockwise around the cut): lower parabolic arc
//! `-u - i u^(1/rho)`, ray at angle `-3pi/4`, circular arc of radius
//! `sqrt(2)/s` through the positive axis, ray at `3pi/4`, upper arc
//! `-u + i u^(1/rho)`, with `rho = min(gamma, beta)/2`.

use num_complex::Complex64;

use super::{h_hat, pi_hat, Observable};
use crate::contour::{Contour, ContourKind, ContourParams, PathBuilder};
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const ARC_PANELS: usize = 8;
const NODE_BUDGET: usize = 1 << 18;
const MAX_PHASE_PER_PANEL: f64 = 2.0;

/// A Laplace transform analytic off `(-inf, 0]`.
pub trait LaplaceTransform: Sync {
    fn eval(&self, omega: Complex64) -> Result<Complex64>;
    /// Decay exponent `gamma` in `|G_hat(omega)| <= c |omega|^-gamma` at infinity.
    fn decay(&self) -> f64;
}

/// `b * omega^(-beta)`.
#[derive(Debug, Clone, Copy)]
pub struct PowerTransform {
    pub b: f64,
    pub beta: f64,
}

impl LaplaceTransform for PowerTransform {
    fn eval(&self, omega: Complex64) -> Result<Complex64> {
        Ok(self.b * omega.powf(-self.beta))
    }
    fn decay(&self) -> f64 {
        self.beta
    }
}

/// `Pi_hat(theta, .)` at fixed `alpha`.
#[derive(Debug, Clone, Copy)]
pub struct PiHatTransform {
    pub alpha: f64,
    pub theta: f64,
}

impl LaplaceTransform for PiHatTransform {
    fn eval(&self, omega: Complex64) -> Result<Complex64> {
        pi_hat(self.alpha, self.theta, omega)
    }
    fn decay(&self) -> f64 {
        1.0
    }
}

/// `H_hat` for an observable at fixed `alpha`.
#[derive(Debug, Clone)]
pub struct HHatTransform {
    pub alpha: f64,
    pub h: Observable,
}

impl LaplaceTransform for HHatTransform {
    fn eval(&self, omega: Complex64) -> Result<Complex64> {
        h_hat(self.alpha, &self.h, omega)
    }
    fn decay(&self) -> f64 {
        1.0
    }
}

/// Inverted value at one `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauberianPoint {
    pub s: f64,
    /// `G(s)`.
    pub g: f64,
    /// `s^(1-beta) G(s)`.
    pub scaled: f64,
}

/// Deformed Bromwich path for time `s` and exponents `gamma`, `beta`.
pub fn bromwich_path(s: f64, gamma: f64, beta: f64) -> Result<Contour> {
    if !(s > 0.0) || !(gamma > 0.0) || !(beta > 0.0) {
        return Err(Error::InvalidParameter("s, gamma and beta must be positive".into()));
    }
    let rho = (gamma.min(beta) / 2.0).min(1.0);
    let log_eps = (1.0 / EPS).ln();
    let r0 = std::f64::consts::SQRT_2 / s.max(1.0);
    let r_cut = (std::f64::consts::SQRT_2 * log_eps / s).min(std::f64::consts::SQRT_2);
    let with_arcs = s < log_eps;
    let u_max = 1.0 + 1.2 * log_eps / s;
    let dir_up = Complex64::from_polar(1.0, 0.75 * std::f64::consts::PI);
    let dir_dn = dir_up.conj();

    let ray_edges = {
        let mut e = vec![r0];
        while *e.last().unwrap() < r_cut {
            let r = *e.last().unwrap();
            e.push((r + r.min(2.0 / s)).min(r_cut));
        }
        e
    };
    let arc_edges: Vec<f64> = {
        let mut e = vec![1.0];
        while *e.last().unwrap() < u_max {
            let u = *e.last().unwrap();
            let dphase = s * (1.0 + u.powf(1.0 / rho - 1.0) / rho);
            e.push((u + MAX_PHASE_PER_PANEL / dphase).min(u_max));
            if e.len() * 16 > NODE_BUDGET {
                return Err(Error::NoConvergence(format!("parabolic arc needs over {NODE_BUDGET} nodes")));
            }
        }
        e
    };
    let rev = |e: &[f64]| -> Vec<f64> { e.iter().rev().copied().collect() };

    let mut b = PathBuilder::default();
    if with_arcs && r_cut >= std::f64::consts::SQRT_2 {
        b.curve(
            &rev(&arc_edges),
            |u| Complex64::new(-u, -u.powf(1.0 / rho)),
            |u| Complex64::new(-1.0, -u.powf(1.0 / rho - 1.0) / rho),
        );
    }
    b.curve(&rev(&ray_edges), |r| dir_dn * r, |_| dir_dn);
    let arc: Vec<f64> = (0..=ARC_PANELS)
        .map(|i| -0.75 * std::f64::consts::PI + 1.5 * std::f64::consts::PI * i as f64 / ARC_PANELS as f64)
        .collect();
    b.curve(&arc, |p| Complex64::from_polar(r0, p), |p| Complex64::i() * Complex64::from_polar(r0, p));
    b.curve(&ray_edges, |r| dir_up * r, |_| dir_up);
    if with_arcs && r_cut >= std::f64::consts::SQRT_2 {
        b.curve(
            &arc_edges,
            |u| Complex64::new(-u, u.powf(1.0 / rho)),
            |u| Complex64::new(-1.0, u.powf(1.0 / rho - 1.0) / rho),
        );
    }
    Ok(Contour::from_parts(
        b.nodes,
        b.weights,
        ContourKind::BromwichDeformed,
        ContourParams { clearance: r0, left: -u_max, right: r0, focus: 0.0, truncation: Some(u_max), nodes: 0 },
    ))
}

/// `G(s)` and `s^(1-beta) G(s)` for every `s` in the grid.
pub fn tauberian_invert(
    transform: &dyn LaplaceTransform,
    beta: f64,
    s_grid: &[f64],
) -> Result<Vec<TauberianPoint>> {
    s_grid
        .iter()
        .map(|&s| {
            let path = bromwich_path(s, transform.decay(), beta)?;
            let mut acc = crate::numeric::CompensatedComplex::new();
            for (z, w) in path.nodes().iter().zip(path.weights()) {
                acc.add(*w * (s * *z).exp() * transform.eval(*z)?);
            }
            let g = acc.value();
            if !g.re.is_finite() || g.im.abs() > 1e-6 * g.re.abs().max(1e-12) {
                return Err(Error::NoConvergence(format!("inversion at s={s} gave {g}")));
            }
            Ok(TauberianPoint { s, g: g.re, scaled: s.powf(1.0 - beta) * g.re })
        })
        .collect()
}

/// Sample `|omega|^gamma |G_hat|` (large `|omega|`) and `|omega|^beta |G_hat|`
/// (small `|omega|`) on the positive axis and the rays at `+-3pi/4`.
pub fn sector_check(transform: &dyn LaplaceTransform, beta: f64) -> Result<(f64, f64)> {
    let gamma = transform.decay();
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    let mut reference = 0.0f64;
    for angle in [0.0, 0.75 * std::f64::consts::PI, -0.75 * std::f64::consts::PI] {
        for k in -3..=3 {
            let r = 10f64.powi(k);
            let v = transform.eval(Complex64::from_polar(r, angle))?.norm();
            if !v.is_finite() {
                return Err(Error::SectorBound(format!("non-finite transform at |omega|={r}, arg={angle}")));
            }
            if k == 0 {
                reference = reference.max(v);
            }
            if r <= 1.0 {
                lo = lo.max(v * r.powf(beta));
            }
            if r >= 1.0 {
                hi = hi.max(v * r.powf(gamma));
            }
        }
    }
    let limit = 1e6 * reference.max(f64::MIN_POSITIVE);
    if lo > limit || hi > limit {
        return Err(Error::SectorBound(format!("bound constants {lo:e}, {hi:e} exceed {limit:e}")));
    }
    Ok((lo, hi))
}
