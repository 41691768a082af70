//! Event-driven Monte Carlo of the trap dynamics.
//!
//! Sites are labelled by their position in the ascending rate order. Each
//! path `p` draws from its own stream `(seed, p)`, so estimators that share a
//! seed see identical paths and their per-path events are nested.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::landscape::Landscape;
use crate::rng::{self, Domain};

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub n_paths: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub extra: Option<Histogram>,
}

impl TrajectoryStats {
    /// Binomial estimate from a success count.
    pub fn binomial(successes: usize, n_paths: usize) -> Self {
        let p = successes as f64 / n_paths as f64;
        Self { n_paths, estimate: p, stderr: (p * (1.0 - p) / n_paths as f64).sqrt(), extra: None }
    }

    /// Mean and standard error of arbitrary per-path values.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = crate::numeric::sum(values.iter().copied()) / n;
        let var = crate::numeric::sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0).max(1.0);
        Self { n_paths: values.len(), estimate: mean, stderr: (var / n).sqrt(), extra: None }
    }

    /// Number of standard errors separating the estimate from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

/// Continuous-time walker on the complete graph.
pub struct Walker<'a> {
    rates: &'a [f64],
    factor: f64,
    rng: ChaCha8Rng,
    pub state: usize,
    pub time: f64,
    pub next_jump: f64,
}

impl<'a> Walker<'a> {
    /// Start at `start` at time 0 (`None`: uniform over sites).
    pub fn new(rates: &'a [f64], mut rng: ChaCha8Rng, start: Option<usize>) -> Self {
        let n = rates.len();
        let state = start.unwrap_or_else(|| rng.random_range(0..n));
        let mut w = Self { rates, factor: (n as f64 - 1.0) / n as f64, rng, state, time: 0.0, next_jump: 0.0 };
        w.next_jump = w.holding();
        w
    }

    #[inline]
    fn holding(&mut self) -> f64 {
        let rate = self.factor * self.rates[self.state];
        if rate == 0.0 {
            f64::INFINITY
        } else {
            let e: f64 = Exp1.sample(&mut self.rng);
            e / rate
        }
    }

    /// Perform the pending jump and return the new state.
    #[inline]
    pub fn jump(&mut self) -> usize {
        let n = self.rates.len();
        let k = self.rng.random_range(0..n - 1);
        self.state = if k >= self.state { k + 1 } else { k };
        self.time = self.next_jump;
        self.next_jump = self.time + self.holding();
        self.state
    }

    /// Advance through all jumps at times `<= t`.
    #[inline]
    pub fn advance_to(&mut self, t: f64) {
        while self.next_jump <= t {
            self.jump();
        }
    }
}

/// Jump times and states of one path; `states[0]` holds from time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub times: Vec<f64>,
    pub states: Vec<usize>,
}

fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    rng::stream(seed, Domain::Paths, index)
}

/// Simulate path `index` of `seed` up to `t_max`.
pub fn simulate_path(l: &Landscape, t_max: f64, seed: u64, index: u64) -> Result<Path> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    let mut w = Walker::new(l.rates(), path_rng(seed, index), None);
    let mut path = Path { times: vec![0.0], states: vec![w.state] };
    while w.next_jump <= t_max {
        let s = w.jump();
        path.times.push(w.time);
        path.states.push(s);
    }
    Ok(path)
}

/// First times (measured from `t_w`) at which the correlator events fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violations {
    /// Any jump.
    pub jump: f64,
    /// A jump landing outside `D = {x >= delta}`.
    pub leave_d: f64,
    /// A jump landing outside `D` and away from the site held at `t_w`.
    pub leave_d_home: f64,
}

/// Index of the first site with rate `>= delta` (sites are sorted).
pub fn deep_cut(l: &Landscape, delta: f64) -> usize {
    l.rates().partition_point(|x| *x < delta)
}

fn violations(w: &mut Walker, t_w: f64, horizon: f64, d0: usize) -> Violations {
    w.advance_to(t_w);
    let home = w.state;
    let mut v = Violations { jump: f64::INFINITY, leave_d: f64::INFINITY, leave_d_home: f64::INFINITY };
    while w.next_jump <= t_w + horizon {
        let off = w.next_jump - t_w;
        let s = w.jump();
        if v.jump.is_infinite() {
            v.jump = off;
        }
        if s < d0 {
            if v.leave_d.is_infinite() {
                v.leave_d = off;
            }
            if s != home {
                v.leave_d_home = off;
                break;
            }
        }
    }
    v
}

/// Per-path violation times for paths `0..n_paths`.
pub fn path_violations(l: &Landscape, delta: f64, t_w: f64, horizon: f64, n_paths: usize, seed: u64) -> Vec<Violations> {
    let d0 = deep_cut(l, delta);
    (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut w = Walker::new(l.rates(), path_rng(seed, p), None);
            violations(&mut w, t_w, horizon, d0)
        })
        .collect()
}

/// Estimates of `Pi`, `Pi1`, `Pi2` on a grid of `t` at one `t_w`, shared paths.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorGrid {
    pub t: Vec<f64>,
    pub pi: Vec<TrajectoryStats>,
    pub pi1: Vec<TrajectoryStats>,
    pub pi2: Vec<TrajectoryStats>,
}

pub fn estimate_correlators(
    l: &Landscape,
    delta: f64,
    t_grid: &[f64],
    t_w: f64,
    n_paths: usize,
    seed: u64,
) -> Result<CorrelatorGrid> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0)) || !(t_w >= 0.0) {
        return Err(Error::InvalidParameter("times must be >= 0".into()));
    }
    let horizon = t_grid.iter().copied().fold(0.0, f64::max);
    let v = path_violations(l, delta, t_w, horizon, n_paths, seed);
    let count = |f: &dyn Fn(&Violations) -> f64, t: f64| v.iter().filter(|x| f(x) > t).count();
    let mut grid = CorrelatorGrid { t: t_grid.to_vec(), pi: vec![], pi1: vec![], pi2: vec![] };
    for &t in t_grid {
        grid.pi.push(TrajectoryStats::binomial(count(&|x| x.jump, t), n_paths));
        grid.pi1.push(TrajectoryStats::binomial(count(&|x| x.leave_d, t), n_paths));
        grid.pi2.push(TrajectoryStats::binomial(count(&|x| x.leave_d_home, t), n_paths));
    }
    Ok(grid)
}

/// Fraction of paths without a jump in `(t_w, t_w + t]`.
pub fn estimate_pi(l: &Landscape, t: f64, t_w: f64, n_paths: usize, seed: u64) -> Result<TrajectoryStats> {
    Ok(estimate_correlators(l, f64::INFINITY, &[t], t_w, n_paths, seed)?.pi.remove(0))
}

/// Fraction of paths whose jumps in `(t_w, t_w + t]` all land in `D`.
pub fn estimate_pi1(l: &Landscape, delta: f64, t: f64, t_w: f64, n_paths: usize, seed: u64) -> Result<TrajectoryStats> {
    check_delta(delta)?;
    Ok(estimate_correlators(l, delta, &[t], t_w, n_paths, seed)?.pi1.remove(0))
}

/// Fraction of paths whose state changes in `(t_w, t_w + t]` all land in
/// `D` or on the site held at `t_w`. With distinct rates a change of state
/// is a change of rate.
pub fn estimate_pi2(l: &Landscape, delta: f64, t: f64, t_w: f64, n_paths: usize, seed: u64) -> Result<TrajectoryStats> {
    check_delta(delta)?;
    Ok(estimate_correlators(l, delta, &[t], t_w, n_paths, seed)?.pi2.remove(0))
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")))
    }
}

/// States held at time `t` by paths `0..n_paths`.
pub fn sample_states(l: &Landscape, t: f64, n_paths: usize, seed: u64) -> Vec<usize> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut w = Walker::new(l.rates(), path_rng(seed, p), None);
            w.advance_to(t);
            w.state
        })
        .collect()
}

/// `Pi` through the renewal shortcut: average of `exp(-(N-1)/N x_j t)` over
/// the states held at `t_w`.
pub fn estimate_pi_conditional(l: &Landscape, t: f64, t_w: f64, n_paths: usize, seed: u64) -> TrajectoryStats {
    let fac = (l.len() as f64 - 1.0) / l.len() as f64;
    let vals: Vec<f64> = sample_states(l, t_w, n_paths, seed)
        .into_iter()
        .map(|j| (-fac * l.rates()[j] * t).exp())
        .collect();
    TrajectoryStats::from_values(&vals)
}

/// Sample of `t x_N(t)` across paths.
#[derive(Debug, Clone, PartialEq)]
pub struct TxDistribution {
    pub t: f64,
    /// `t x_N(t)` per path, in path order.
    pub samples: Vec<f64>,
    /// `estimate` is the empirical `E exp(-t x_N(t))`; `extra` holds the histogram.
    pub stats: TrajectoryStats,
}

impl TxDistribution {
    /// Empirical `E exp(-theta t x_N(t))` with its standard error.
    pub fn laplace(&self, theta: f64) -> TrajectoryStats {
        let v: Vec<f64> = self.samples.iter().map(|z| (-theta * z).exp()).collect();
        TrajectoryStats::from_values(&v)
    }

    /// Empirical `P(t x_N(t) <= z)`.
    pub fn cdf(&self, z: f64) -> TrajectoryStats {
        TrajectoryStats::binomial(self.samples.iter().filter(|s| **s <= z).count(), self.samples.len())
    }

    /// Empirical `P(tau_N(t)/t >= u)` with `tau = 1/x`.
    pub fn tau_ratio_tail(&self, u: f64) -> TrajectoryStats {
        let c = self.samples.iter().filter(|z| 1.0 / **z >= u).count();
        TrajectoryStats::binomial(c, self.samples.len())
    }

    /// Empirical `P(x_N(t) >= delta)`.
    pub fn deep_fraction(&self, delta: f64) -> TrajectoryStats {
        let c = self.samples.iter().filter(|z| **z >= self.t * delta).count();
        TrajectoryStats::binomial(c, self.samples.len())
    }
}

pub fn estimate_tx_distribution(l: &Landscape, t: f64, n_paths: usize, seed: u64, bins: usize) -> Result<TxDistribution> {
    if !(t > 0.0) || n_paths == 0 || bins == 0 {
        return Err(Error::InvalidParameter("need t > 0, n_paths >= 1, bins >= 1".into()));
    }
    let samples: Vec<f64> = sample_states(l, t, n_paths, seed).into_iter().map(|j| t * l.rates()[j]).collect();
    let hist = log_histogram(&samples, bins);
    let mut dist = TxDistribution { t, samples, stats: TrajectoryStats::binomial(0, 1) };
    let mut stats = dist.laplace(1.0);
    stats.extra = Some(hist);
    dist.stats = stats;
    Ok(dist)
}

/// Histogram with geometric bins spanning the sample range.
pub fn log_histogram(samples: &[f64], bins: usize) -> Histogram {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(0.0, f64::max);
    let edges = if hi > lo {
        let mut e = crate::numeric::geomspace(lo, hi, bins + 1);
        e[0] = lo;
        e
    } else {
        vec![lo, lo.next_up()]
    };
    let nb = edges.len() - 1;
    let mut counts = vec![0usize; nb];
    for s in samples {
        let k = edges.partition_point(|e| e <= s).clamp(1, nb) - 1;
        counts[k] += 1;
    }
    let n = samples.len() as f64;
    Histogram { edges, masses: counts.iter().map(|c| *c as f64 / n).collect() }
}

/// Result of comparing confinement to `D` against `exp(-delta u (1 - |D|/N))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalCheck {
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    /// Site (ascending-rate label) attaining the empirical maximum.
    pub start_site: usize,
}

impl SurvivalCheck {
    pub fn holds(&self) -> bool {
        self.empirical <= self.bound + 3.0 * self.stderr
    }
}

/// Largest empirical probability, over sampled starts in `D`, of staying in
/// `D` through `[0, u]`.
pub fn survival_bound_check(l: &Landscape, delta: f64, u: f64, n_paths: usize, seed: u64) -> Result<SurvivalCheck> {
    check_delta(delta)?;
    if !(u >= 0.0) || n_paths == 0 {
        return Err(Error::InvalidParameter("need u >= 0 and n_paths >= 1".into()));
    }
    let n = l.len();
    let d0 = deep_cut(l, delta);
    if d0 == n {
        return Err(Error::InvalidParameter(format!("no site with rate >= {delta}")));
    }
    let size_d = (n - d0) as f64;
    let bound = (-delta * u * (1.0 - size_d / n as f64)).exp();
    let mut starts: Vec<usize> = (d0..n).take(4).collect();
    let mut pick = rng::stream(seed, Domain::Survival, u64::MAX);
    for _ in 0..4 {
        starts.push(pick.random_range(d0..n));
    }
    starts.sort_unstable();
    starts.dedup();
    let mut best = SurvivalCheck { empirical: -1.0, stderr: 0.0, bound, start_site: d0 };
    for &i in &starts {
        let stays = (0..n_paths as u64)
            .into_par_iter()
            .filter(|p| {
                let r = rng::stream(seed, Domain::Survival, ((i as u64) << 32) | p);
                let mut w = Walker::new(l.rates(), r, Some(i));
                while w.next_jump <= u {
                    if w.jump() < d0 {
                        return false;
                    }
                }
                true
            })
            .count();
        let s = TrajectoryStats::binomial(stays, n_paths);
        if s.estimate > best.empirical {
            best = SurvivalCheck { empirical: s.estimate, stderr: s.stderr, bound, start_site: i };
        }
    }
    Ok(best)
}
