//! Quadrature-ready integration paths in the complex plane.
//!
//! Weights already contain the path derivative and the `1/(2 pi i)` factor,
//! so `sum_k w_k f(z_k)` approximates `(1/2 pi i) int f(z) dz`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedComplex;
use crate::quadrature::gauss_legendre;

pub const PANEL_ORDER: usize = 16;
pub const NODE_BUDGET: usize = 1 << 16;
const TRUNCATION_SAFETY: f64 = 1.25;
const RADIUS_BUDGET: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    RectangleLoop,
    GammaInfinity,
    BromwichDeformed,
}

/// Geometry of a contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourParams {
    /// Distance kept from the real segment the contour surrounds.
    pub clearance: f64,
    /// Leftmost real part.
    pub left: f64,
    /// Rightmost real part (truncation radius for open paths).
    pub right: f64,
    /// Right end of the real segment where the path hugs the axis.
    pub focus: f64,
    pub truncation: Option<f64>,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct Contour {
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
    kind: ContourKind,
    params: ContourParams,
}

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

/// Builder appending Gauss–Legendre panels along straight segments.
#[derive(Default)]
pub(crate) struct PathBuilder {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

impl PathBuilder {
    pub fn segment(&mut self, a: Complex64, b: Complex64, panels: usize) {
        let rule = gauss_legendre(PANEL_ORDER);
        let panels = panels.max(1);
        for p in 0..panels {
            let pa = a + (b - a) * (p as f64 / panels as f64);
            let pb = a + (b - a) * ((p + 1) as f64 / panels as f64);
            self.panel(pa, pb, &rule);
        }
    }

    fn panel(&mut self, a: Complex64, b: Complex64, rule: &crate::quadrature::Rule) {
        let mid = (a + b) * 0.5;
        let half = (b - a) * 0.5;
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            self.nodes.push(mid + half * *u);
            self.weights.push(half * *w / two_pi_i());
        }
    }

    /// Parametrized curve `z(u)`, `u` in `[u0, u1]`, split at `edges`.
    pub fn curve(&mut self, edges: &[f64], z: impl Fn(f64) -> Complex64, dz: impl Fn(f64) -> Complex64) {
        let rule = gauss_legendre(PANEL_ORDER);
        for e in edges.windows(2) {
            let (c, h) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
            for (u, w) in rule.nodes.iter().zip(&rule.weights) {
                let s = c + h * u;
                self.nodes.push(z(s));
                self.weights.push(dz(s) * (h * w) / two_pi_i());
            }
        }
    }
}

/// Panel cut points along `[0, len]` with width `fine` up to `focus`, then
/// widths growing with the distance beyond `focus`, capped at `coarse`.
fn leg_edges(len: f64, fine: f64, focus: f64, coarse: f64) -> Vec<f64> {
    let mut e = vec![0.0];
    loop {
        let x = *e.last().unwrap();
        if x >= len {
            break;
        }
        let w = if x < focus { fine } else { fine.max((0.5 * (x - focus)).min(coarse)) };
        e.push((x + w).min(len));
    }
    e
}

impl Contour {
    pub(crate) fn from_parts(
        nodes: Vec<Complex64>,
        weights: Vec<Complex64>,
        kind: ContourKind,
        params: ContourParams,
    ) -> Self {
        let params = ContourParams { nodes: nodes.len(), ..params };
        Self { nodes, weights, kind, params }
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn kind(&self) -> ContourKind {
        self.kind
    }

    pub fn params(&self) -> &ContourParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(1/2 pi i) int f` over the path, reduced in node order.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        let mut acc = CompensatedComplex::new();
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(*w * f(*z));
        }
        acc.value()
    }

    /// `(1/2 pi i) int dz/(z - c)`: 1 inside a loop, 0 outside.
    pub fn winding_about(&self, c: Complex64) -> f64 {
        self.integrate(|z| 1.0 / (z - c)).re
    }

    /// Smallest distance from a node to the real segment `[lo, hi]`.
    pub fn distance_to_segment(&self, lo: f64, hi: f64) -> f64 {
        self.nodes
            .iter()
            .map(|z| {
                let dx = if z.re < lo {
                    lo - z.re
                } else if z.re > hi {
                    z.re - hi
                } else {
                    0.0
                };
                dx.hypot(z.im)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Check that the path surrounds the real segment `[lo, hi]`.
    pub fn check_encloses(&self, lo: f64, hi: f64) -> Result<()> {
        let distance = self.distance_to_segment(lo, hi);
        let floor = 1e-12 * hi.abs().max(1.0);
        if distance < floor {
            return Err(Error::ContourTooClose { distance });
        }
        match self.kind {
            ContourKind::RectangleLoop => {
                for c in [lo, hi] {
                    let w = self.winding_about(Complex64::new(c, 0.0));
                    if (w - 1.0).abs() > 1e-6 {
                        return Err(Error::ContourNotEnclosing { winding: w });
                    }
                }
                Ok(())
            }
            _ => {
                if self.params.left < lo {
                    Ok(())
                } else {
                    Err(Error::ContourNotEnclosing { winding: f64::NAN })
                }
            }
        }
    }
}

/// Positively oriented rectangle around `[0, x_max]` at distance `clearance`,
/// `nodes_per_side` Gauss–Legendre nodes on each side.
pub fn make_rectangle(x_max: f64, clearance: f64, nodes_per_side: usize) -> Result<Contour> {
    if !(clearance > 0.0) || !(x_max >= 0.0) || nodes_per_side < PANEL_ORDER {
        return Err(Error::InvalidParameter(
            "rectangle needs clearance > 0, x_max >= 0, nodes_per_side >= 16".into(),
        ));
    }
    let panels = nodes_per_side / PANEL_ORDER;
    let c = clearance;
    let corners = [
        Complex64::new(-c, -c),
        Complex64::new(x_max + c, -c),
        Complex64::new(x_max + c, c),
        Complex64::new(-c, c),
    ];
    let mut b = PathBuilder::default();
    for i in 0..4 {
        b.segment(corners[i], corners[(i + 1) % 4], panels);
    }
    Ok(Contour::from_parts(
        b.nodes,
        b.weights,
        ContourKind::RectangleLoop,
        ContourParams { clearance: c, left: -c, right: x_max + c, focus: x_max, truncation: None, nodes: 0 },
    ))
}

/// Rectangle whose panels are no wider than the clearance.
pub fn make_rectangle_resolved(x_max: f64, clearance: f64) -> Result<Contour> {
    let c = clearance;
    let long = ((x_max + 2.0 * c) / c).ceil() as usize;
    let corners = [
        Complex64::new(-c, -c),
        Complex64::new(x_max + c, -c),
        Complex64::new(x_max + c, c),
        Complex64::new(-c, c),
    ];
    if 2 * (long + 2) * PANEL_ORDER > NODE_BUDGET {
        return Err(Error::TruncationBudget { radius: x_max, budget: RADIUS_BUDGET });
    }
    let mut b = PathBuilder::default();
    for (i, panels) in [long, 2, long, 2].into_iter().enumerate() {
        b.segment(corners[i], corners[(i + 1) % 4], panels);
    }
    Ok(Contour::from_parts(
        b.nodes,
        b.weights,
        ContourKind::RectangleLoop,
        ContourParams { clearance: c, left: -c, right: x_max + c, focus: x_max, truncation: None, nodes: 0 },
    ))
}

/// `ln(1/eps)/t_w`: where `exp(-t_w R)` falls to `eps`.
pub fn truncation_radius(t_w: f64, eps: f64) -> f64 {
    (1.0 / eps).ln() / t_w
}

/// Clearance used for time `t_w`: unit distance unless `exp(t_w)` would
/// swamp the result, then `4/t_w`.
pub fn clearance_for(t_w: f64) -> f64 {
    if t_w > 4.0 {
        4.0 / t_w
    } else {
        1.0
    }
}

/// Truncated open path `{x - i h : x >= -h} + left cap + {x + i h}`,
/// oriented from `R + i h` to `R - i h`, with `h = clearance_for(t_w)`.
pub fn make_gamma_infinity(t_w: f64, eps: f64) -> Result<Contour> {
    make_gamma_infinity_with(t_w, eps, clearance_for(t_w), f64::INFINITY)
}

/// As [`make_gamma_infinity`] with explicit clearance; panels stay
/// `clearance` wide up to `focus` and coarsen beyond it.
pub fn make_gamma_infinity_with(t_w: f64, eps: f64, clearance: f64, focus: f64) -> Result<Contour> {
    if !(t_w > 0.0) {
        return Err(Error::InvalidParameter(format!("t_w must be positive, got {t_w}")));
    }
    if !(eps > 0.0 && eps < 1.0) || !(clearance > 0.0) {
        return Err(Error::InvalidParameter("eps in (0,1) and clearance > 0 required".into()));
    }
    let h = clearance;
    let radius = TRUNCATION_SAFETY * truncation_radius(t_w, eps) + h;
    if radius > RADIUS_BUDGET {
        return Err(Error::TruncationBudget { radius, budget: RADIUS_BUDGET });
    }
    let len = radius + h;
    let edges = leg_edges(len, h, (focus + h).min(len), 10.0 / t_w);
    if 2 * edges.len() * PANEL_ORDER > NODE_BUDGET {
        return Err(Error::TruncationBudget { radius, budget: RADIUS_BUDGET });
    }
    let mut b = PathBuilder::default();
    // upper leg, right to left
    let rev: Vec<f64> = edges.iter().rev().map(|e| len - e).collect();
    b.curve(&rev, |u| Complex64::new(radius - u, h), |_| Complex64::new(-1.0, 0.0));
    // left cap
    b.segment(Complex64::new(-h, h), Complex64::new(-h, -h), 2);
    // lower leg, left to right
    b.curve(&edges, |u| Complex64::new(-h + u, -h), |_| Complex64::new(1.0, 0.0));
    Ok(Contour::from_parts(
        b.nodes,
        b.weights,
        ContourKind::GammaInfinity,
        ContourParams { clearance: h, left: -h, right: radius, focus, truncation: Some(radius), nodes: 0 },
    ))
}

/// Contour suited to integrands carrying `exp(-t_w lambda)` with poles in
/// `[0, x_max]`: a truncated gamma-infinity when the decay sets in before
/// `x_max`, otherwise a resolved rectangle.
pub fn auto_contour(x_max: f64, t_w: f64, eps: f64) -> Result<Contour> {
    let h = clearance_for(t_w);
    if t_w > 0.0 && TRUNCATION_SAFETY * truncation_radius(t_w, eps) + h < x_max + h {
        make_gamma_infinity_with(t_w, eps, h, x_max)
    } else {
        make_rectangle_resolved(x_max, h)
    }
}

/// Default truncation tolerance.
pub const DEFAULT_EPS: f64 = 1e-15;

/// Self-convergent rectangle: double the node count until the integral of
/// `f` changes by less than `rel_tol` (relative) or the node budget is hit.
pub fn converge_rectangle(
    x_max: f64,
    clearance: f64,
    rel_tol: f64,
    f: impl Fn(Complex64) -> Complex64,
) -> Result<(Complex64, Contour)> {
    let mut n = 4 * PANEL_ORDER;
    let mut c = make_rectangle(x_max, clearance, n)?;
    let mut prev = c.integrate(&f);
    while 4 * n <= NODE_BUDGET {
        n *= 2;
        c = make_rectangle(x_max, clearance, n)?;
        let cur = c.integrate(&f);
        if (cur - prev).norm() <= rel_tol * cur.norm().max(f64::MIN_POSITIVE) {
            return Ok((cur, c));
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!("rectangle quadrature at {n} nodes per side")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_calibration() {
        let c = make_rectangle(1.0, 1.0, 2048).unwrap();
        assert!((c.winding_about(Complex64::new(0.5, 0.0)) - 1.0).abs() < 1e-10);
        assert!(c.winding_about(Complex64::new(3.0, 0.0)).abs() < 1e-10);
        assert_eq!(c.kind(), ContourKind::RectangleLoop);
    }

    #[test]
    fn doubling_reduces_calibration_error() {
        let target = Complex64::new(0.95, 0.0);
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| (make_rectangle(1.0, 0.1, n).unwrap().winding_about(target) - 1.0).abs())
            .collect();
        assert!(errs[1] < errs[0] && errs[2] <= errs[1].max(1e-14));
    }

    #[test]
    fn gamma_infinity_radius_and_errors() {
        assert!((truncation_radius(10.0, 1e-12) - 2.763).abs() < 1e-3);
        let g = make_gamma_infinity(10.0, 1e-12).unwrap();
        assert!(g.params().truncation.unwrap() > 2.76);
        assert!(make_gamma_infinity(0.0, 1e-12).is_err());
        assert!(make_gamma_infinity(-1.0, 1e-12).is_err());
        assert!(matches!(make_gamma_infinity(1e-6, 1e-12), Err(Error::TruncationBudget { .. })));
    }

    #[test]
    fn gamma_infinity_integrates_decaying_residue() {
        // (1/2 pi i) int e^{-t z}/(z - a) dz around [0, inf) equals e^{-t a}
        let t = 3.0;
        let g = make_gamma_infinity(t, 1e-15).unwrap();
        for a in [0.0, 0.3, 2.0] {
            let v = g.integrate(|z| (-t * z).exp() / (z - a));
            assert!((v.re - (-t * a).exp()).abs() < 1e-12, "a={a} v={v}");
        }
    }
}
