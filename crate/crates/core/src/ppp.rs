//! The grand-canonical model: Poisson landscapes under the three time
//! rescalings, and the correlators that go with them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{Contour, ContourKind};
use crate::correlate::{escape_factor, finite_contour, NodeSums};
use crate::error::{Error, Result};
use crate::landscape::{Kind, Landscape};
use crate::mcdyn::{self, TrajectoryStats};
use crate::numeric::CompensatedSum;
use crate::spectral::Spectrum;

pub use crate::correlate::deep_trap_constant_ppp;
pub use crate::correlate::{deep_trap_decay_ppp, g_infinite, g_truncated};

/// Default lower bound on `tau0 e^{-E}` when `tau0` is sent to zero.
pub const DEFAULT_COVERAGE: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    FixedTau0,
    Tau0EqEE,
    Tau0ToZero,
}

impl RegimeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FixedTau0 => "fixed_tau0",
            Self::Tau0EqEE => "tau0_eq_eE",
            Self::Tau0ToZero => "tau0_to_zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub kind: RegimeKind,
    pub tau0: f64,
    pub threshold: f64,
}

impl ScalingRegime {
    pub fn fixed_tau0(tau0: f64, threshold: f64) -> Result<Self> {
        if !(tau0 > 0.0 && tau0.is_finite()) || !threshold.is_finite() {
            return Err(Error::InvalidParameter(format!("need tau0 > 0 and finite threshold, got {tau0}, {threshold}")));
        }
        Ok(Self { kind: RegimeKind::FixedTau0, tau0, threshold })
    }

    /// `tau0 = e^E`, so rates fill `(0, 1]`.
    pub fn tau0_eq_ee(threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::InvalidParameter("threshold must be finite".into()));
        }
        Ok(Self { kind: RegimeKind::Tau0EqEE, tau0: threshold.exp(), threshold })
    }

    /// Small `tau0` with the threshold placed so that `tau0 e^{-E} = coverage`.
    pub fn tau0_to_zero(tau0: f64, coverage: f64) -> Result<Self> {
        if !(tau0 > 0.0 && tau0.is_finite()) || !(coverage >= DEFAULT_COVERAGE) {
            return Err(Error::InvalidParameter(format!(
                "need tau0 > 0 and coverage >= {DEFAULT_COVERAGE}, got {tau0}, {coverage}"
            )));
        }
        Ok(Self { kind: RegimeKind::Tau0ToZero, tau0, threshold: (tau0 / coverage).ln() })
    }

    /// Upper end of the rate support, `tau0 e^{-E}`.
    pub fn coverage(&self) -> f64 {
        self.tau0 * (-self.threshold).exp()
    }

    pub fn sample(&self, alpha: f64, seed: u64) -> Result<Landscape> {
        Landscape::sample_ppp(self.threshold, self.tau0, alpha, seed)
    }
}

fn require_ppp(l: &Landscape) -> Result<f64> {
    match (l.kind(), l.alpha()) {
        (Kind::Ppp, Some(a)) => Ok(a),
        _ => Err(Error::InvalidParameter("a Ppp landscape is required".into())),
    }
}

/// Constants fitted to the node sums along an unbounded contour:
/// `|S(z)| >= c1 |z|^{-2}` and `T(z) <= c2 |z|^{alpha-1} ln(1+|z|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DenominatorFit {
    pub c1: f64,
    pub c2: f64,
    /// Node attaining `c1`.
    pub worst_node: Complex64,
}

/// Smallest admissible `c1` before the fit is declared degenerate.
pub const C1_FLOOR: f64 = 1e-12;

pub fn denominator_fit(alpha: f64, c: &Contour, sums: &NodeSums) -> Result<DenominatorFit> {
    let mut fit = DenominatorFit { c1: f64::INFINITY, c2: 0.0, worst_node: Complex64::new(0.0, 0.0) };
    for ((z, s), t) in c.nodes().iter().zip(&sums.denominator).zip(&sums.abs_sum) {
        let r = z.norm();
        let lower = s.norm() * r * r;
        if lower < fit.c1 {
            fit.c1 = lower;
            fit.worst_node = *z;
        }
        fit.c2 = fit.c2.max(t / (r.powf(alpha - 1.0) * r.ln_1p()));
    }
    if !(fit.c1 >= C1_FLOOR) || !fit.c2.is_finite() {
        return Err(Error::SmallDenominator { node: format!("{}", fit.worst_node), value: fit.c1 });
    }
    Ok(fit)
}

/// `Pi_E(t, t_w)` by contour quadrature, with both sums scaled by `tau0^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiE {
    pub value: f64,
    /// Present when the contour is unbounded.
    pub fit: Option<DenominatorFit>,
}

pub fn pi_e(l: &Landscape, t: f64, t_w: f64, c: &Contour) -> Result<PiE> {
    let alpha = require_ppp(l)?;
    if !(t >= 0.0 && t_w >= 0.0) {
        return Err(Error::InvalidParameter("times must be >= 0".into()));
    }
    let fac = escape_factor(l.len());
    let f: Vec<f64> = l.rates().iter().map(|x| (-fac * x * t).exp()).collect();
    let (value, sums) = finite_contour(l.rates(), &f, t_w, c, l.tau0().powf(alpha))?;
    let fit = match c.kind() {
        ContourKind::GammaInfinity => Some(denominator_fit(alpha, c, &sums)?),
        _ => None,
    };
    Ok(PiE { value, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedTau0Limits {
    /// `tau_j / sum tau`, ascending-rate order.
    pub occupation: Vec<f64>,
    /// `sum tau_j e^{-x_j t} / sum tau`.
    pub pi_inf: f64,
}

pub fn fixed_tau0_limits(l: &Landscape, t: f64) -> Result<FixedTau0Limits> {
    require_ppp(l)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter("t must be >= 0".into()));
    }
    let occupation = l.equilibrium_measure().into_vec();
    let mut acc = CompensatedSum::new();
    for (p, x) in occupation.iter().zip(l.rates()) {
        acc.add(p * (-x * t).exp());
    }
    Ok(FixedTau0Limits { occupation, pi_inf: acc.value() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowMass {
    pub lo: f64,
    pub hi: f64,
    /// `tau0^alpha * #{lambda in (lo, hi]}`; the zero eigenvalue never counts.
    pub mass: f64,
    /// `hi^alpha - lo^alpha`.
    pub target: f64,
}

pub fn rescaled_spectral_measure(l: &Landscape, s: &Spectrum, windows: &[(f64, f64)]) -> Result<Vec<WindowMass>> {
    let alpha = require_ppp(l)?;
    let ev = s.eigenvalues();
    let top = l.max_rate();
    let scale = l.tau0().powf(alpha);
    windows
        .iter()
        .map(|&(lo, hi)| {
            if !(lo >= 0.0 && hi > lo) || hi > top {
                return Err(Error::WindowOutsideSupport { lo, hi, support: top });
            }
            let count = ev.partition_point(|v| *v <= hi) - ev.partition_point(|v| *v <= lo);
            Ok(WindowMass { lo, hi, mass: scale * count as f64, target: hi.powf(alpha) - lo.powf(alpha) })
        })
        .collect()
}

/// Monte Carlo `Pi_E^{(1)}(t, t_w)` on a Ppp landscape.
pub fn pi1_e_estimate(l: &Landscape, delta: f64, t: f64, t_w: f64, n_paths: usize, seed: u64) -> Result<TrajectoryStats> {
    require_ppp(l)?;
    mcdyn::estimate_pi1(l, delta, t, t_w, n_paths, seed)
}
