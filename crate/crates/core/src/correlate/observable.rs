use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function `h` of the rate, used in occupation expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// `1{x >= delta}`.
    IndicatorGe { delta: f64 },
    /// `exp(-rate_scale * x)`; `rate_scale = 0` is the constant 1.
    ExpDecay { rate_scale: f64 },
    /// `1{x = x_value}`; invisible to continuous measures.
    PointMass { x_value: f64 },
    /// Piecewise-linear interpolation, constant beyond the grid.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

impl Observable {
    pub fn indicator_ge(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("indicator threshold {delta} must be positive")));
        }
        Ok(Self::IndicatorGe { delta })
    }

    pub fn exp_decay(rate_scale: f64) -> Result<Self> {
        if !(rate_scale >= 0.0 && rate_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("decay scale {rate_scale} must be >= 0")));
        }
        Ok(Self::ExpDecay { rate_scale })
    }

    pub fn constant_one() -> Self {
        Self::ExpDecay { rate_scale: 0.0 }
    }

    pub fn point_mass(x_value: f64) -> Self {
        Self::PointMass { x_value }
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::InvalidParameter("grid and values must have equal nonzero length".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("tabulated grid must be strictly increasing".into()));
        }
        Ok(Self::Tabulated { grid, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::IndicatorGe { delta } => f64::from(u8::from(x >= *delta)),
            Self::ExpDecay { rate_scale } => {
                if *rate_scale == 0.0 {
                    1.0
                } else {
                    (-rate_scale * x).exp()
                }
            }
            Self::PointMass { x_value } => f64::from(u8::from(x == *x_value)),
            Self::Tabulated { grid, values } => {
                if x <= grid[0] {
                    return values[0];
                }
                let last = grid.len() - 1;
                if x >= grid[last] {
                    return values[last];
                }
                let i = grid.partition_point(|g| *g <= x) - 1;
                let f = (x - grid[i]) / (grid[i + 1] - grid[i]);
                values[i] + f * (values[i + 1] - values[i])
            }
        }
    }

    /// Points where `h` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::IndicatorGe { delta } => vec![*delta],
            Self::Tabulated { grid, .. } => grid.clone(),
            _ => Vec::new(),
        }
    }

    /// Limit of `h(x)` as `x -> infinity`.
    pub fn tail_value(&self) -> f64 {
        match self {
            Self::IndicatorGe { .. } => 1.0,
            Self::ExpDecay { rate_scale } => f64::from(u8::from(*rate_scale == 0.0)),
            Self::PointMass { .. } => 0.0,
            Self::Tabulated { values, .. } => *values.last().unwrap(),
        }
    }

    /// Abscissa beyond which `h` equals its tail value to double precision.
    pub fn settles_at(&self) -> f64 {
        match self {
            Self::IndicatorGe { delta } => *delta,
            Self::ExpDecay { rate_scale } if *rate_scale > 0.0 => 40.0 / rate_scale,
            Self::Tabulated { grid, .. } => *grid.last().unwrap(),
            _ => 0.0,
        }
    }

    /// Length scale of the fastest variation near the origin, if any.
    pub fn fine_scale(&self) -> Option<f64> {
        match self {
            Self::ExpDecay { rate_scale } if *rate_scale > 0.0 => Some(1.0 / rate_scale),
            _ => None,
        }
    }
}
