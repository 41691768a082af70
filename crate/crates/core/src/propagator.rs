//! Time evolution from the uniform start: spectral sum, dense oracle and
//! resolvent contour integrals.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::landscape::Landscape;
use crate::numeric::{CompensatedComplex, CompensatedSum};
use crate::spectral::Spectrum;

pub const DENSE_BUDGET: usize = 512;
const NEGATIVE_FLOOR: f64 = -1e-8;

/// Occupation probabilities `nu_t(j)` for the uniform initial law.
///
/// Raw values are returned (tiny negative rounding is kept); entries below
/// `-1e-8` are reported as corruption.
pub fn occupation_spectral(s: &Spectrum, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let n = s.len();
    let decay: Vec<f64> = (0..n).map(|k| s.weights()[k] * (-t * s.eigenvalues()[k]).exp()).collect();
    let nu: Vec<f64> = (0..n)
        .map(|j| {
            let mut acc = CompensatedSum::new();
            for (k, c) in decay.iter().enumerate() {
                acc.add(c / s.shifted(j, k));
            }
            acc.value()
        })
        .collect();
    if let Some((site, &value)) = nu.iter().enumerate().find(|(_, v)| **v < NEGATIVE_FLOOR) {
        return Err(Error::NegativeOccupation { site, value });
    }
    Ok(nu)
}

/// Occupation from an arbitrary initial law `nu0` (ascending-rate order).
pub fn occupation_from(s: &Spectrum, nu0: &[f64], t: f64) -> Vec<f64> {
    let n = s.len();
    assert_eq!(nu0.len(), n);
    let coef: Vec<f64> = (0..n)
        .map(|k| {
            let mut acc = CompensatedSum::new();
            for i in 0..n {
                let psi = if k == 0 { 1.0 } else { s.rates()[i] / s.shifted(i, k) };
                acc.add(nu0[i] * psi);
            }
            acc.value() * s.weights()[k] * (-t * s.eigenvalues()[k]).exp()
        })
        .collect();
    (0..n)
        .map(|j| {
            let mut acc = CompensatedSum::new();
            for (k, c) in coef.iter().enumerate() {
                acc.add(c / s.shifted(j, k));
            }
            acc.value()
        })
        .collect()
}

/// Clip raw occupation values to `[0, 1]` for reporting.
pub fn clip_for_report(raw: &[f64]) -> Vec<f64> {
    raw.iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

/// Generator matrix with `(N-1)/N x_i` on the diagonal and `-x_i/N` off it.
pub fn generator_matrix(l: &Landscape) -> DMatrix<f64> {
    let x = l.rates();
    let n = x.len() as f64;
    DMatrix::from_fn(x.len(), x.len(), |i, j| if i == j { (n - 1.0) / n * x[i] } else { -x[i] / n })
}

/// Dense `exp(-t L)` in ascending-rate order.
pub fn expm_oracle(l: &Landscape, t: f64) -> Result<DMatrix<f64>> {
    if l.len() > DENSE_BUDGET {
        return Err(Error::OverBudget { n: l.len(), budget: DENSE_BUDGET });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    Ok(expm(&(generator_matrix(l) * (-t))))
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371_920_351_148_152;
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a / 2f64.powi(s);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * B[13] + &a4 * B[11] + &a2 * B[9]) + &a6 * B[7] + &a4 * B[5] + &a2 * B[3] + &id * B[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * B[12] + &a4 * B[10] + &a2 * B[8]) + &a6 * B[6] + &a4 * B[4] + &a2 * B[2] + &id * B[0];
    let mut r = (&v - &u).lu().solve(&(&v + &u)).expect("Padé denominator is nonsingular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `P(Y(t) = j)` for every site from `(1/2 pi i) int e^{-t z}/((z - x_j) phi(z)) dz`
/// with `phi(z) = sum_k z/(z - x_k)`.
pub fn contour_propagator(l: &Landscape, s: &Spectrum, t: f64, c: &Contour) -> Result<Vec<f64>> {
    let x = l.rates();
    let lam_max = *s.eigenvalues().last().unwrap();
    c.check_encloses(0.0, lam_max)?;
    let mut acc = vec![CompensatedComplex::new(); x.len()];
    for (z, w) in c.nodes().iter().zip(c.weights()) {
        let mut phi = CompensatedComplex::new();
        for &xk in x {
            phi.add(*z / (*z - xk));
        }
        let common = *w * (-t * *z).exp() / phi.value();
        for (j, &xj) in x.iter().enumerate() {
            acc[j].add(common / (*z - xj));
        }
    }
    Ok(acc.iter().map(|a| a.value().re).collect())
}

/// Single-site version of [`contour_propagator`].
pub fn contour_propagator_site(l: &Landscape, s: &Spectrum, t: f64, j: usize, c: &Contour) -> Result<f64> {
    let lam_max = *s.eigenvalues().last().unwrap();
    c.check_encloses(0.0, lam_max)?;
    let x = l.rates();
    let v = c.integrate(|z| {
        let mut phi = CompensatedComplex::new();
        for &xk in x {
            phi.add(z / (z - xk));
        }
        (-t * z).exp() / ((z - x[j]) * phi.value())
    });
    Ok(v.re)
}

/// `exp(-t G)` for a general generator from `(1/2 pi i) int e^{-t z} (z - G)^{-1} dz`.
pub fn resolvent_propagator(g: &DMatrix<f64>, t: f64, c: &Contour) -> DMatrix<f64> {
    let n = g.nrows();
    let gc: DMatrix<Complex64> = g.map(|v| Complex64::new(v, 0.0));
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for (z, w) in c.nodes().iter().zip(c.weights()) {
        let m = DMatrix::<Complex64>::identity(n, n) * *z - &gc;
        let inv = m.lu().try_inverse().expect("contour node off the spectrum");
        out += inv * (*w * (-t * *z).exp());
    }
    out.map(|v| v.re)
}

/// Apply a row vector to a matrix: `(nu^T P)_j`.
pub fn propagate(nu: &[f64], p: &DMatrix<f64>) -> Vec<f64> {
    let v = DVector::from_column_slice(nu);
    (p.transpose() * v).iter().copied().collect()
}

/// Uniform initial law pushed through a dense transition matrix.
pub fn uniform_row_mix(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    propagate(&vec![1.0 / n as f64; n], p)
}
