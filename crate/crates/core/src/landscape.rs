//! Disorder realizations: i.i.d. exponential energies and Poisson point
//! process landscapes.

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::rng::{self, Domain};

const RETRY_BUDGET: usize = 100;
const PPP_MAX_MEAN: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Canonical,
    Ppp,
}

/// A realized energy landscape. Rates are stored in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    kind: Kind,
    alpha: Option<f64>,
    tau0: f64,
    threshold: Option<f64>,
    seed: u64,
    rates: Vec<f64>,
    order: Vec<usize>,
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidParameter("negative probability".into()));
        }
        let total = crate::numeric::sum(entries.iter().copied());
        if (total - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

/// Sort `(rate, original index)` pairs and return indices (in sorted
/// position) of entries that collide with a lower-index twin.
fn collisions(pairs: &mut [(f64, usize)]) -> Vec<usize> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut bad = Vec::new();
    for k in 1..pairs.len() {
        if pairs[k].0 == pairs[k - 1].0 {
            bad.push(pairs[k].1);
        }
    }
    bad
}

impl Landscape {
    /// `n` i.i.d. energies `E ~ Exp(alpha)` with rates `x = exp(-E)`.
    pub fn sample_canonical(n: usize, alpha: f64, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 {
            return Err(Error::EmptyLandscape);
        }
        let draw = |i: usize, attempt: usize| {
            let mut s = rng::stream(seed, Domain::CanonicalRates, i as u64);
            let mut x = 0.0;
            for _ in 0..=attempt {
                x = rng::open_unit(&mut s).powf(1.0 / alpha);
            }
            x
        };
        let rates = Self::distinct_draws(n, draw)?;
        Ok(Self::assemble(Kind::Canonical, Some(alpha), 1.0, None, seed, rates))
    }

    /// Poisson point process above `threshold` with time unit `tau0`.
    pub fn sample_ppp(threshold: f64, tau0: f64, alpha: f64, seed: u64) -> Result<Self> {
        let (mean, upper) = ppp_parameters(threshold, tau0, alpha)?;
        let count = {
            let mut s = rng::stream(seed, Domain::PppCount, 0);
            Poisson::new(mean)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?
                .sample(&mut s) as usize
        };
        if count == 0 {
            return Err(Error::EmptyLandscape);
        }
        let draw = |i: usize, attempt: usize| {
            let mut s = rng::stream(seed, Domain::PppRates, i as u64);
            let mut x = 0.0;
            for _ in 0..=attempt {
                x = upper * rng::open_unit(&mut s).powf(1.0 / alpha);
            }
            x
        };
        let rates = Self::distinct_draws(count, draw)?;
        Ok(Self::assemble(Kind::Ppp, Some(alpha), tau0, Some(threshold), seed, rates))
    }

    /// Poisson point process built in energy order: the k-th deepest point
    /// has `exp(-alpha E_k) = Gamma_k`, a partial sum of unit exponentials.
    /// Realizations for different thresholds with one seed are nested.
    pub fn sample_ppp_nested(threshold: f64, tau0: f64, alpha: f64, seed: u64) -> Result<Self> {
        let (mean, _) = ppp_parameters(threshold, tau0, alpha)?;
        let mut gamma = 0.0;
        let mut rates = Vec::new();
        for k in 0.. {
            let mut s = rng::stream(seed, Domain::PppOrdered, k as u64);
            gamma += -rng::open_unit(&mut s).ln();
            if gamma > mean {
                break;
            }
            rates.push(tau0 * gamma.powf(1.0 / alpha));
        }
        if rates.is_empty() {
            return Err(Error::EmptyLandscape);
        }
        if rates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DuplicateRates("nested sample".into()));
        }
        Ok(Self::assemble(Kind::Ppp, Some(alpha), tau0, Some(threshold), seed, rates))
    }

    /// Deterministic landscape from explicit rates.
    pub fn from_rates(rates: &[f64]) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptyLandscape);
        }
        if let Some(bad) = rates.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::NonPositiveRate(*bad));
        }
        let mut pairs: Vec<(f64, usize)> = rates.iter().copied().zip(0..).collect();
        let bad = collisions(&mut pairs);
        if !bad.is_empty() {
            return Err(Error::DuplicateRates(format!("rate {} repeated", rates[bad[0]])));
        }
        Ok(Self::assemble(Kind::Canonical, None, 1.0, None, 0, rates.to_vec()))
    }

    /// Record `alpha` as metadata.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        self.alpha = Some(alpha);
        Ok(self)
    }

    fn distinct_draws(n: usize, draw: impl Fn(usize, usize) -> f64) -> Result<Vec<f64>> {
        let mut values: Vec<f64> = (0..n).map(|i| draw(i, 0)).collect();
        let mut attempts = vec![0usize; n];
        for _ in 0..=RETRY_BUDGET {
            let mut bad: Vec<usize> = (0..n).filter(|&i| !values[i].is_normal()).collect();
            let mut pairs: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
            bad.extend(collisions(&mut pairs));
            if bad.is_empty() {
                return Ok(values);
            }
            for i in bad {
                attempts[i] += 1;
                values[i] = draw(i, attempts[i]);
            }
        }
        Err(Error::DistinctnessUnattainable(RETRY_BUDGET))
    }

    fn assemble(
        kind: Kind,
        alpha: Option<f64>,
        tau0: f64,
        threshold: Option<f64>,
        seed: u64,
        raw: Vec<f64>,
    ) -> Self {
        let mut pairs: Vec<(f64, usize)> = raw.into_iter().zip(0..).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            kind,
            alpha,
            tau0,
            threshold,
            seed,
            rates: pairs.iter().map(|p| p.0).collect(),
            order: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Rates in ascending order.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Original (generation or input) index of the k-th smallest rate.
    pub fn original_index(&self, k: usize) -> usize {
        self.order[k]
    }

    pub fn max_rate(&self) -> f64 {
        *self.rates.last().unwrap()
    }

    /// Upper end of the rate support: 1 for canonical, `tau0 e^{-E}` for Ppp.
    pub fn support_max(&self) -> f64 {
        match (self.kind, self.threshold) {
            (Kind::Ppp, Some(e)) => ppp_upper(e, self.tau0),
            _ => 1.0,
        }
    }

    /// Energies `E_i = -ln(x_i / tau0)`, ascending-rate order.
    pub fn energies(&self) -> Vec<f64> {
        self.rates.iter().map(|x| -(x / self.tau0).ln()).collect()
    }

    /// Waiting times `tau_i = 1/x_i`, ascending-rate order.
    pub fn waiting_times(&self) -> Vec<f64> {
        self.rates.iter().map(|x| 1.0 / x).collect()
    }

    /// `mu(i) = tau_i / sum_j tau_j`.
    pub fn equilibrium_measure(&self) -> ProbabilityVector {
        let mut total = CompensatedSum::new();
        for x in &self.rates {
            total.add(1.0 / x);
        }
        let z = total.value();
        ProbabilityVector(self.rates.iter().map(|x| 1.0 / x / z).collect())
    }

    pub fn to_json(&self) -> String {
        let mut raw = vec![0.0; self.len()];
        for (k, &i) in self.order.iter().enumerate() {
            raw[i] = self.rates[k];
        }
        let file = LandscapeFile {
            kind: self.kind,
            alpha: self.alpha,
            tau0: self.tau0,
            threshold: self.threshold,
            seed: self.seed,
            rates: raw,
        };
        serde_json::to_string(&file).expect("landscape serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: LandscapeFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let base = Self::from_rates(&f.rates)?;
        if let Some(a) = f.alpha {
            check_alpha(a)?;
        }
        if !(f.tau0 > 0.0) {
            return Err(Error::InvalidParameter("tau0 must be positive".into()));
        }
        Ok(Self {
            kind: f.kind,
            alpha: f.alpha,
            tau0: f.tau0,
            threshold: f.threshold,
            seed: f.seed,
            ..base
        })
    }

    /// One rate per line (first column); a non-numeric first line is a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rates = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let field = line.split(',').next().unwrap_or("").trim();
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) => rates.push(v),
                Err(_) if lineno == 0 => continue,
                Err(_) => return Err(Error::Parse(format!("line {}: {field:?}", lineno + 1))),
            }
        }
        Self::from_rates(&rates)
    }
}

#[derive(Serialize, Deserialize)]
struct LandscapeFile {
    kind: Kind,
    alpha: Option<f64>,
    tau0: f64,
    threshold: Option<f64>,
    seed: u64,
    rates: Vec<f64>,
}

fn ppp_upper(threshold: f64, tau0: f64) -> f64 {
    if tau0 == threshold.exp() {
        1.0
    } else {
        tau0 * (-threshold).exp()
    }
}

/// Poisson mean `e^{-alpha E}` and rate support bound for a Ppp landscape.
fn ppp_parameters(threshold: f64, tau0: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(tau0 > 0.0 && tau0.is_finite()) || !threshold.is_finite() {
        return Err(Error::InvalidParameter("tau0 and threshold must be finite, tau0 > 0".into()));
    }
    let mean = (-alpha * threshold).exp();
    if mean < 1e6f64.ln() {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} leaves Poisson mean {mean}: empty landscape too likely"
        )));
    }
    if mean > PPP_MAX_MEAN {
        return Err(Error::InvalidParameter(format!("Poisson mean {mean} over budget")));
    }
    Ok((mean, ppp_upper(threshold, tau0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rates_validation() {
        assert!(Landscape::from_rates(&[0.2, 0.6]).is_ok());
        assert!(matches!(Landscape::from_rates(&[0.3, 0.3]), Err(Error::DuplicateRates(_))));
        assert!(matches!(Landscape::from_rates(&[-1.0]), Err(Error::NonPositiveRate(_))));
        assert!(matches!(Landscape::from_rates(&[]), Err(Error::EmptyLandscape)));
    }

    #[test]
    fn equilibrium_examples() {
        let l = Landscape::from_rates(&[1.0, 0.25]).unwrap();
        let mu = l.equilibrium_measure();
        // sorted: 0.25 (tau 4), 1.0 (tau 1)
        assert!((mu.entries()[0] - 0.8).abs() < 1e-15);
        assert!((mu.entries()[1] - 0.2).abs() < 1e-15);
        assert_eq!(l.original_index(0), 1);
        let one = Landscape::from_rates(&[0.7]).unwrap();
        assert_eq!(one.equilibrium_measure().entries(), &[1.0]);
        let near = Landscape::from_rates(&[0.5, 0.5 + 1e-12]).unwrap();
        assert!((near.equilibrium_measure().entries()[0] - 0.5).abs() < 1e-11);
    }

    #[test]
    fn canonical_is_deterministic_and_bounded() {
        let a = Landscape::sample_canonical(500, 0.5, 11).unwrap();
        let b = Landscape::sample_canonical(500, 0.5, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.rates().iter().all(|x| *x > 0.0 && *x <= 1.0));
        assert!(a.rates().windows(2).all(|w| w[0] < w[1]));
        let one = Landscape::sample_canonical(1, 0.3, 5).unwrap();
        assert_eq!(one.len(), 1);
        assert!(Landscape::sample_canonical(3, 1.0, 1).is_err());
    }

    #[test]
    fn prefix_extension_is_stable() {
        let small = Landscape::sample_canonical(10, 0.5, 3).unwrap();
        let large = Landscape::sample_canonical(20, 0.5, 3).unwrap();
        for k in 0..small.len() {
            let i = small.original_index(k);
            let pos = (0..large.len()).find(|&m| large.original_index(m) == i).unwrap();
            assert_eq!(small.rates()[k], large.rates()[pos]);
        }
    }

    #[test]
    fn ppp_support_and_errors() {
        let l = Landscape::sample_ppp(-10.0, 1.0, 0.5, 2).unwrap();
        assert!(l.max_rate() <= 10f64.exp());
        let c = Landscape::sample_ppp(-8.0, (-8.0f64).exp(), 0.5, 2).unwrap();
        assert_eq!(c.support_max(), 1.0);
        assert!(c.rates().iter().all(|x| *x <= 1.0));
        assert!(Landscape::sample_ppp(0.0, 1.0, 0.5, 2).is_err());
    }

    #[test]
    fn nested_ppp_prefixes() {
        let a = Landscape::sample_ppp_nested(-8.0, 1.0, 0.5, 9).unwrap();
        let b = Landscape::sample_ppp_nested(-12.0, 1.0, 0.5, 9).unwrap();
        assert!(b.len() > a.len());
        assert_eq!(&b.rates()[..a.len()], a.rates());
        assert!(a.max_rate() <= 8f64.exp());
    }

    #[test]
    fn json_and_csv_round_trip() {
        let l = Landscape::sample_canonical(50, 0.4, 99).unwrap();
        let back = Landscape::from_json(&l.to_json()).unwrap();
        assert_eq!(l, back);
        let csv = "rate\n0.5\n0.25\n0.125\n";
        let c = Landscape::from_csv(csv).unwrap();
        assert_eq!(c.rates(), &[0.125, 0.25, 0.5]);
        assert!(Landscape::from_csv("0.1\nabc\n").is_err());
    }
}
