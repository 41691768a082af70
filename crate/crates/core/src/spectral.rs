//! Exact spectrum of the mean-field trap generator via the secular equation.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::landscape::Landscape;
use crate::numeric::{CompensatedComplex, CompensatedSum};

const MAX_ITER: usize = 200;
const NO_ANCHOR: usize = usize::MAX;

/// Eigenvalues and spectral weights of the generator of a landscape.
///
/// Each nonzero eigenvalue is stored as an offset from the nearer endpoint of
/// its interlacing gap, so differences `x_j - lambda_k` stay accurate even when
/// rates cluster.
#[derive(Debug, Clone)]
pub struct Spectrum {
    rates: Vec<f64>,
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
    anchor: Vec<usize>,
    offset: Vec<f64>,
    tol: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Ascending eigenvalues, the first is exactly 0.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Spectral weights `gamma_k = 1 / phi'(lambda_k)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Rates of the landscape this spectrum was computed from.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `x_j - lambda_k` evaluated without cancellation.
    #[inline]
    pub fn shifted(&self, j: usize, k: usize) -> f64 {
        let a = self.anchor[k];
        if a == NO_ANCHOR {
            self.rates[j]
        } else {
            (self.rates[j] - self.rates[a]) - self.offset[k]
        }
    }

    /// Eigenvector `psi_j = x_j / (x_j - lambda_k)`; all ones for k = 0.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        assert!(k < self.len(), "eigen index out of range");
        if k == 0 {
            return vec![1.0; self.len()];
        }
        (0..self.len()).map(|j| self.rates[j] / self.shifted(j, k)).collect()
    }

    /// Empirical spectral distribution as a sorted sample (each atom mass 1/N).
    pub fn spectral_cdf(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Check interlacing `x_i < lambda_{i+1} < x_{i+1}` and `lambda_1 = 0`.
    pub fn interlaces(&self) -> bool {
        self.eigenvalues[0] == 0.0
            && (1..self.len()).all(|k| {
                self.rates[k - 1] < self.eigenvalues[k] && self.eigenvalues[k] < self.rates[k]
            })
    }
}

/// `phi(lambda) = sum_j lambda / (x_j - lambda)` with compensated summation.
pub fn secular_fn(l: &Landscape, lam: Complex64) -> Result<Complex64> {
    let mut acc = CompensatedComplex::new();
    for &x in l.rates() {
        let d = Complex64::new(x, 0.0) - lam;
        if d.norm() <= 4.0 * f64::EPSILON * x {
            return Err(Error::PoleHit(x));
        }
        acc.add(lam / d);
    }
    Ok(acc.value())
}

/// `g(lambda) = sum_j 1/(x_j - lambda)` at a real point.
pub fn secular_g(rates: &[f64], lam: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &x in rates {
        acc.add(1.0 / (x - lam));
    }
    acc.value()
}

struct GapEval {
    g: f64,
    left: f64,
    left_d: f64,
    right: f64,
    right_d: f64,
}

/// Evaluate the split secular sum at offset `tau` from `rates[origin]`;
/// terms with index `< split` sit left of the root.
fn eval_gap(rates: &[f64], origin: usize, split: usize, tau: f64) -> GapEval {
    let xo = rates[origin];
    let mut left = CompensatedSum::new();
    let mut left_d = 0.0;
    for &x in &rates[..split] {
        let r = 1.0 / ((x - xo) - tau);
        left.add(r);
        left_d += r * r;
    }
    let mut right = CompensatedSum::new();
    let mut right_d = 0.0;
    for &x in &rates[split..] {
        let r = 1.0 / ((x - xo) - tau);
        right.add(r);
        right_d += r * r;
    }
    let (l, r) = (left.value(), right.value());
    GapEval { g: l + r, left: l, left_d, right: r, right_d }
}

/// Root of g in gap `(rates[k-1], rates[k])`, as (anchor, offset).
fn solve_gap(rates: &[f64], k: usize, rel_tol: f64) -> Result<(usize, f64)> {
    let (lo, hi) = (rates[k - 1], rates[k]);
    let width = hi - lo;
    let mid = lo + 0.5 * width;
    if !(lo < mid && mid < hi) {
        return Err(Error::BracketFailure { lo, hi });
    }
    let g_mid = secular_g(rates, mid);
    if g_mid == 0.0 {
        return Ok((k - 1, mid - lo));
    }
    let origin = if g_mid > 0.0 { k - 1 } else { k };
    let xo = rates[origin];
    let d_lo = lo - xo;
    let d_hi = hi - xo;
    let t_mid = mid - xo;
    let (mut a, mut b) = if origin == k - 1 { (d_lo, t_mid) } else { (t_mid, d_hi) };
    let mut tau = t_mid;
    for _ in 0..MAX_ITER {
        let e = eval_gap(rates, origin, k, tau);
        if e.g == 0.0 {
            return Ok((origin, tau));
        }
        if e.g > 0.0 {
            b = tau;
        } else {
            a = tau;
        }
        let dl = d_lo - tau;
        let dh = d_hi - tau;
        let s1 = e.left_d * dl * dl;
        let s2 = e.right_d * dh * dh;
        let c = (e.left - s1 / dl) + (e.right - s2 / dh);
        let eta = rational_step(c, s1, s2, dl, dh, e.g);
        let mut next = tau + eta.unwrap_or(f64::NAN);
        if !(next > a && next < b) {
            next = a + 0.5 * (b - a);
        }
        let step = (next - tau).abs();
        tau = next;
        let scale = tau.abs().max(f64::MIN_POSITIVE);
        if step <= rel_tol * scale || b - a <= 2.0 * f64::EPSILON * scale {
            return Ok((origin, tau));
        }
    }
    Err(Error::NoConvergence(format!("secular root in gap ({lo}, {hi})")))
}

/// Correction `eta` from the two-pole model `c + s1/(dl-eta) + s2/(dh-eta) = 0`.
fn rational_step(c: f64, s1: f64, s2: f64, dl: f64, dh: f64, g: f64) -> Option<f64> {
    let qa = c;
    let qb = -(c * (dl + dh) + s1 + s2);
    let qc = dl * dh * g;
    let inside = |eta: f64| eta.is_finite() && eta > dl && eta < dh;
    if qa == 0.0 {
        let eta = -qc / qb;
        return inside(eta).then_some(eta);
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if !(disc >= 0.0) {
        return None;
    }
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let roots = [q / qa, qc / q];
    roots.into_iter().filter(|r| inside(*r)).min_by(|x, y| x.abs().total_cmp(&y.abs()))
}

/// Below this size the gaps are solved on the calling thread.
const PARALLEL_MIN: usize = 256;

/// Solve the secular equation on every gap.
pub fn eigenvalues(l: &Landscape, rel_tol: f64) -> Result<Spectrum> {
    if rel_tol < 1e-14 {
        return Err(Error::InvalidParameter(format!("rel_tol {rel_tol} below 1e-14")));
    }
    let rates = l.rates().to_vec();
    let n = rates.len();
    let roots: Vec<Result<(usize, f64)>> = if n < PARALLEL_MIN {
        (1..n).map(|k| solve_gap(&rates, k, rel_tol)).collect()
    } else {
        (1..n).into_par_iter().map(|k| solve_gap(&rates, k, rel_tol)).collect()
    };
    let mut anchor = vec![NO_ANCHOR; n];
    let mut offset = vec![0.0; n];
    let mut eigenvalues = vec![0.0; n];
    for (k, r) in (1..n).zip(roots) {
        let (a, tau) = r?;
        let (lo, hi) = (rates[k - 1], rates[k]);
        let mut lam = rates[a] + tau;
        if lam <= lo {
            lam = lo.next_up();
        }
        if lam >= hi {
            lam = hi.next_down();
        }
        if !(lo < lam && lam < hi) {
            return Err(Error::BracketFailure { lo, hi });
        }
        anchor[k] = a;
        offset[k] = tau;
        eigenvalues[k] = lam;
    }
    let mut spec = Spectrum { rates, eigenvalues, weights: Vec::new(), anchor, offset, tol: rel_tol };
    spec.weights = if n < PARALLEL_MIN {
        (0..n).map(|k| weight(&spec, k)).collect()
    } else {
        (0..n).into_par_iter().map(|k| weight(&spec, k)).collect()
    };
    debug_assert!(spec.interlaces());
    Ok(spec)
}

fn weight(s: &Spectrum, k: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for j in 0..s.len() {
        let d = s.shifted(j, k);
        acc.add(s.rates[j] / (d * d));
    }
    1.0 / acc.value()
}

/// Spectral weights `gamma_k = 1 / sum_j x_j/(x_j - lambda_k)^2`.
pub fn spectral_weights(s: &Spectrum) -> Vec<f64> {
    s.weights.clone()
}

/// Dense eigenvalues of the mu-symmetrized generator `diag(x) - sqrt(x) sqrt(x)^T / N`.
pub fn dense_eigenvalues(l: &Landscape) -> Result<Vec<f64>> {
    const BUDGET: usize = 2048;
    let n = l.len();
    if n > BUDGET {
        return Err(Error::OverBudget { n, budget: BUDGET });
    }
    let x = l.rates();
    let nf = n as f64;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let r = -(x[i] * x[j]).sqrt() / nf;
        if i == j {
            x[i] + r
        } else {
            r
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Perturbation-theory diagnostic: average rate over the smallest rate gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationDiagnostic {
    pub avg_rate: f64,
    pub min_gap: f64,
    pub ratio: f64,
}

impl PerturbationDiagnostic {
    pub fn satisfied(&self) -> bool {
        self.ratio <= 1.0
    }
}

pub fn perturbation_diagnostic(l: &Landscape) -> Result<PerturbationDiagnostic> {
    let x = l.rates();
    if x.len() < 2 {
        return Err(Error::InvalidParameter("diagnostic needs N >= 2".into()));
    }
    let avg_rate = crate::numeric::sum(x.iter().copied()) / x.len() as f64;
    let min_gap = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(PerturbationDiagnostic { avg_rate, min_gap, ratio: avg_rate / min_gap })
}

/// Kolmogorov–Smirnov distance between a sorted sample and the CDF `x^alpha` on [0, 1].
pub fn ks_power_law(sorted: &[f64], alpha: f64) -> f64 {
    let n = sorted.len() as f64;
    let cdf = |x: f64| x.clamp(0.0, 1.0).powf(alpha);
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
