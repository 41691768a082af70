//! Correlation functions by spectral sums, contour quadrature and their
//! large-N limits, plus Laplace-domain asymptotics.

mod finite;
mod laplace;
mod limit;
mod observable;
pub mod tauberian;

pub use finite::{
    escape_factor, expectation_h_contour, expectation_h_spectral, finite_contour, pi_contour, pi_spectral,
    NodeSums,
};
pub use laplace::{
    aging_a, b_alpha, b_delta, c_alpha, deep_trap_constant, deep_trap_constant_ppp, h_hat, pi_hat,
    z_distribution_transform,
};
pub use limit::{
    cauchy_far, cauchy_infinite, deep_trap_decay, deep_trap_decay_ppp, g_infinite, g_truncated, h_limit,
    limit_expectation, limit_expectation_with, pi_limit, pi_limit_with, PowerLawMeasure,
};
pub use observable::Observable;
pub use tauberian::{tauberian_invert, LaplaceTransform, TauberianPoint};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spectral,
    Contour,
    Limit,
    Mc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Contour => "contour",
            Method::Limit => "limit",
            Method::Mc => "mc",
        }
    }
}

/// `Pi(theta t_w, t_w)` sampled on a theta grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgingCurve {
    pub theta_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub t_w: f64,
    pub method: Method,
    pub stderr: Option<Vec<f64>>,
}

/// Where the values of an [`AgingCurve`] come from.
#[derive(Debug, Clone, Copy)]
pub enum CurveSource<'a> {
    Limit { alpha: f64 },
    Spectral(&'a crate::spectral::Spectrum),
    Contour(&'a crate::landscape::Landscape),
    Mc { landscape: &'a crate::landscape::Landscape, n_paths: usize, seed: u64 },
}

/// `Pi(theta t_w, t_w)` over a strictly increasing positive grid.
pub fn aging_curve(source: CurveSource, theta_grid: &[f64], t_w: f64) -> crate::Result<AgingCurve> {
    use crate::Error;
    if theta_grid.is_empty() || theta_grid[0] < 0.0 || theta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("theta grid must be nonnegative and strictly increasing".into()));
    }
    if !(t_w > 0.0 && t_w.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_w must be positive, got {t_w}")));
    }
    let times: Vec<f64> = theta_grid.iter().map(|th| th * t_w).collect();
    let (method, values, stderr) = match source {
        CurveSource::Limit { alpha } => {
            let v = times.iter().map(|t| pi_limit(alpha, *t, t_w)).collect::<crate::Result<Vec<_>>>()?;
            (Method::Limit, v, None)
        }
        CurveSource::Spectral(s) => {
            let v = times.iter().map(|t| pi_spectral(s, *t, t_w)).collect::<crate::Result<Vec<_>>>()?;
            (Method::Spectral, v, None)
        }
        CurveSource::Contour(l) => {
            let c = crate::contour::auto_contour(l.max_rate(), t_w, crate::contour::DEFAULT_EPS)?;
            let v = times.iter().map(|t| pi_contour(l, *t, t_w, &c)).collect::<crate::Result<Vec<_>>>()?;
            (Method::Contour, v, None)
        }
        CurveSource::Mc { landscape, n_paths, seed } => {
            let g = crate::mcdyn::estimate_correlators(landscape, f64::INFINITY, &times, t_w, n_paths, seed)?;
            let v = g.pi.iter().map(|s| s.estimate).collect();
            let e = g.pi.iter().map(|s| s.stderr).collect();
            (Method::Mc, v, Some(e))
        }
    };
    Ok(AgingCurve { theta_grid: theta_grid.to_vec(), values, t_w, method, stderr })
}
