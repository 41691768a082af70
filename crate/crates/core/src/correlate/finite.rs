//! Finite-N correlation functions: spectral sums and contour quadrature.

use num_complex::Complex64;

use super::Observable;
use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::landscape::Landscape;
use crate::numeric::{CompensatedComplex, CompensatedSum};
use crate::spectral::Spectrum;

const DENOMINATOR_FLOOR: f64 = 1e-12;

/// `nu_t(j)` without the corruption guard (shared by the spectral sums).
fn occupation_raw(s: &Spectrum, t: f64) -> Vec<f64> {
    let n = s.len();
    let decay: Vec<f64> = (0..n).map(|k| s.weights()[k] * (-t * s.eigenvalues()[k]).exp()).collect();
    (0..n)
        .map(|j| {
            let mut acc = CompensatedSum::new();
            for (k, c) in decay.iter().enumerate() {
                acc.add(c / s.shifted(j, k));
            }
            acc.value()
        })
        .collect()
}

/// Escape factor `(N-1)/N` of the holding rates.
pub fn escape_factor(n: usize) -> f64 {
    (n as f64 - 1.0) / n as f64
}

/// `Pi_N(t, t_w) = sum_j nu_{t_w}(j) exp(-(N-1)/N x_j t)`.
pub fn pi_spectral(s: &Spectrum, t: f64, t_w: f64) -> Result<f64> {
    check_times(t, t_w)?;
    let f = escape_factor(s.len());
    let nu = occupation_raw(s, t_w);
    let mut acc = CompensatedSum::new();
    for (j, v) in nu.iter().enumerate() {
        acc.add(v * (-f * s.rates()[j] * t).exp());
    }
    Ok(acc.value())
}

/// `E_N h(x_N(t)) = sum_j nu_t(j) h(x_j)`.
pub fn expectation_h_spectral(s: &Spectrum, h: &Observable, t: f64) -> Result<f64> {
    check_times(t, 0.0)?;
    let nu = occupation_raw(s, t);
    let mut acc = CompensatedSum::new();
    for (j, v) in nu.iter().enumerate() {
        acc.add(v * h.eval(s.rates()[j]));
    }
    Ok(acc.value())
}

fn check_times(t: f64, t_w: f64) -> Result<()> {
    if t >= 0.0 && t_w >= 0.0 && t.is_finite() && t_w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("times must be finite and >= 0 (t={t}, t_w={t_w})")))
    }
}

/// Node-wise sums collected while evaluating a finite contour formula.
#[derive(Debug, Clone, Default)]
pub struct NodeSums {
    /// `scale * sum_j 1/(x_j - z)` per node.
    pub denominator: Vec<Complex64>,
    /// `scale * sum_j 1/|x_j - z|` per node.
    pub abs_sum: Vec<f64>,
}

/// `(1/2 pi i) int e^{-t_w z}/z * [sum f_j/(x_j - z)] / [sum 1/(x_j - z)] dz`.
///
/// `scale` multiplies both sums and is reported back in [`NodeSums`]; the
/// denominator guard applies to `scale * average`.
pub fn finite_contour(
    rates: &[f64],
    f: &[f64],
    t_w: f64,
    c: &Contour,
    scale: f64,
) -> Result<(f64, NodeSums)> {
    c.check_encloses(0.0, *rates.last().unwrap())?;
    let n = rates.len() as f64;
    let mut total = CompensatedComplex::new();
    let mut sums = NodeSums::default();
    for (z, w) in c.nodes().iter().zip(c.weights()) {
        let (zr, zi) = (z.re, z.im);
        let mut num_re = CompensatedSum::new();
        let mut num_im = CompensatedSum::new();
        let mut den_re = CompensatedSum::new();
        let mut den_im = CompensatedSum::new();
        let mut abs = 0.0;
        for (x, fx) in rates.iter().zip(f) {
            let dr = x - zr;
            let inv = 1.0 / (dr * dr + zi * zi);
            let (re, im) = (dr * inv, zi * inv);
            den_re.add(re);
            den_im.add(im);
            num_re.add(fx * re);
            num_im.add(fx * im);
            abs += inv.sqrt();
        }
        let den = Complex64::new(den_re.value(), den_im.value()) * scale;
        let num = Complex64::new(num_re.value(), num_im.value()) * scale;
        if den.norm() / n < DENOMINATOR_FLOOR {
            return Err(Error::SmallDenominator { node: format!("{z}"), value: den.norm() / n });
        }
        sums.denominator.push(den);
        sums.abs_sum.push(abs * scale);
        total.add(*w * (-t_w * *z).exp() / *z * (num / den));
    }
    Ok((total.value().re, sums))
}

/// Contour form of `Pi_N(t, t_w)`.
pub fn pi_contour(l: &Landscape, t: f64, t_w: f64, c: &Contour) -> Result<f64> {
    check_times(t, t_w)?;
    let fac = escape_factor(l.len());
    let f: Vec<f64> = l.rates().iter().map(|x| (-fac * x * t).exp()).collect();
    Ok(finite_contour(l.rates(), &f, t_w, c, 1.0)?.0)
}

/// Contour form of `E_N h(x_N(t))`.
pub fn expectation_h_contour(l: &Landscape, h: &Observable, t: f64, c: &Contour) -> Result<f64> {
    check_times(t, 0.0)?;
    let f: Vec<f64> = l.rates().iter().map(|x| h.eval(*x)).collect();
    Ok(finite_contour(l.rates(), &f, t, c, 1.0)?.0)
}
