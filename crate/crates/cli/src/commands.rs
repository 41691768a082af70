//! Subcommand bodies. Each returns the table to emit.

use num_complex::Complex64;
use trapspectra::contour::{auto_contour, clearance_for, make_gamma_infinity_with};
use trapspectra::correlate::tauberian::{HHatTransform, PiHatTransform, PowerTransform};
use trapspectra::correlate::{
    aging_a, aging_curve, expectation_h_contour, expectation_h_spectral, pi_contour, pi_limit_with, pi_spectral,
    tauberian_invert, AgingCurve, LaplaceTransform, CurveSource, Method as CurveMethod, Observable,
};
use trapspectra::mcdyn::{estimate_correlators, estimate_tx_distribution, sample_states, survival_bound_check, TrajectoryStats};
use trapspectra::ppp::{pi_e, rescaled_spectral_measure, ScalingRegime};
use trapspectra::spectral::{dense_eigenvalues, perturbation_diagnostic};
use trapspectra::{eigenvalues, Error, Landscape};

use crate::config::*;
use crate::table::{Cell, Table};

/// Failure of a subcommand, mapped to an exit code by the caller.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Out = Result<Table, Failure>;

fn grid(s: &str) -> Result<Vec<f64>, Failure> {
    parse_grid(s).map_err(Failure::Usage)
}

fn landscape(a: &LandscapeArgs, seed: u64) -> Result<Landscape, Failure> {
    if let Some(r) = &a.rates {
        let rates = parse_floats(r).map_err(Failure::Usage)?;
        return Ok(Landscape::from_rates(&rates)?.with_alpha(a.alpha)?);
    }
    if let Some(p) = &a.landscape {
        let text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
        return Ok(if text.trim_start().starts_with('{') { Landscape::from_json(&text)? } else { Landscape::from_csv(&text)? });
    }
    Ok(Landscape::sample_canonical(a.n, a.alpha, seed)?)
}

/// Fills defaults that depend on other flags, so the echo is complete.
pub fn resolve(cli: &mut Cli) {
    match &mut cli.command {
        Command::Ppp(p) => {
            let default_e = -(1000f64).ln() / p.alpha;
            match p.regime {
                Regime::Fixed => {
                    p.tau0.get_or_insert(1.0);
                    p.threshold.get_or_insert(default_e);
                }
                Regime::Canonical => {
                    p.threshold.get_or_insert(default_e);
                    p.tau0 = None;
                }
                Regime::Zero => {
                    p.tau0.get_or_insert(1e-6);
                    p.threshold = None;
                }
            }
        }
        Command::Tauberian(t) => {
            t.beta.get_or_insert(match t.transform {
                Transform::Power => 0.5,
                Transform::Pihat => 1.0,
                Transform::Hhat => t.alpha,
            });
        }
        _ => {}
    }
}

pub fn run(cli: &Cli) -> Out {
    let g = &cli.global;
    let seed = g.seed.expect("seed resolved before dispatch");
    match &cli.command {
        Command::Spectrum(a) => spectrum(a, g, seed),
        Command::Aging(a) => aging(a, g, seed),
        Command::Corr(a) => corr(a, g, seed),
        Command::Mc(a) => mc(a, seed),
        Command::Ppp(a) => ppp(a, g, seed),
        Command::Tauberian(a) => tauberian(a),
        Command::Diagnose(a) => diagnose(a, seed),
    }
}

fn spectrum(a: &SpectrumArgs, g: &Global, seed: u64) -> Out {
    let l = landscape(&a.landscape, seed)?;
    let s = eigenvalues(&l, g.tol)?;
    let dense = if a.dense_check { Some(dense_eigenvalues(&l)?) } else { None };
    let mut t = Table::new(if dense.is_some() { &["k", "lambda", "gamma", "lambda_dense"] } else { &["k", "lambda", "gamma"] });
    for (k, (lam, gam)) in s.eigenvalues().iter().zip(s.weights()).enumerate() {
        let mut row = vec![Cell::from(k + 1), Cell::from(*lam), Cell::from(*gam)];
        if let Some(d) = &dense {
            row.push(Cell::from(d[k]));
        }
        t.push(row);
    }
    Ok(t)
}

fn aging(a: &AgingArgs, g: &Global, seed: u64) -> Out {
    let thetas = grid(&a.theta_grid)?;
    let curve = match a.method {
        Method::Limit => {
            if thetas.windows(2).any(|w| w[1] <= w[0]) || thetas.iter().any(|th| !(*th >= 0.0)) {
                return Err(Failure::Usage("theta grid must be nonnegative and strictly increasing".into()));
            }
            if !(a.tw > 0.0 && a.tw.is_finite()) {
                return Err(Failure::Usage(format!("--tw must be positive, got {}", a.tw)));
            }
            let c = make_gamma_infinity_with(a.tw, g.eps, clearance_for(a.tw), f64::INFINITY)?;
            let values = thetas
                .iter()
                .map(|th| pi_limit_with(a.landscape.alpha, th * a.tw, a.tw, &c, g.quad_order))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(AgingCurve { theta_grid: thetas, values, t_w: a.tw, method: CurveMethod::Limit, stderr: None })
        }
        Method::Spectral => {
            let l = landscape(&a.landscape, seed)?;
            let s = eigenvalues(&l, g.tol)?;
            aging_curve(CurveSource::Spectral(&s), &thetas, a.tw)
        }
        Method::Contour => aging_curve(CurveSource::Contour(&landscape(&a.landscape, seed)?), &thetas, a.tw),
        Method::Mc => {
            let l = landscape(&a.landscape, seed)?;
            aging_curve(CurveSource::Mc { landscape: &l, n_paths: a.paths, seed }, &thetas, a.tw)
        }
    }?;
    let mut t = Table::new(&["theta", "value", "stderr", "method", "tw"]);
    for (i, th) in curve.theta_grid.iter().enumerate() {
        let se = curve.stderr.as_ref().map(|e| e[i]);
        t.push(vec![(*th).into(), curve.values[i].into(), se.into(), curve.method.as_str().into(), curve.t_w.into()]);
    }
    Ok(t)
}

fn corr(a: &CorrArgs, g: &Global, seed: u64) -> Out {
    let times = grid(&a.t_grid)?;
    let l = landscape(&a.landscape, seed)?;
    let h = Observable::indicator_ge(a.delta)?;
    let mut t = Table::new(&["t", "value", "stderr", "method", "tw"]);
    let method = match a.method {
        Method::Limit => return Err(Failure::Usage("corr works on a finite landscape; use aging for the limit".into())),
        Method::Spectral => "spectral",
        Method::Contour => "contour",
        Method::Mc => "mc",
    };
    let rows: Vec<(f64, Option<f64>)> = match (a.method, a.quantity) {
        (Method::Spectral, q) => {
            let s = eigenvalues(&l, g.tol)?;
            times
                .iter()
                .map(|x| match q {
                    Quantity::Pi => pi_spectral(&s, *x, a.tw),
                    Quantity::Deep => expectation_h_spectral(&s, &h, *x),
                })
                .map(|r| r.map(|v| (v, None)))
                .collect::<Result<_, _>>()?
        }
        (Method::Contour, Quantity::Pi) => {
            let c = auto_contour(l.max_rate(), a.tw, g.eps)?;
            times.iter().map(|x| pi_contour(&l, *x, a.tw, &c).map(|v| (v, None))).collect::<Result<_, _>>()?
        }
        (Method::Contour, Quantity::Deep) => times
            .iter()
            .map(|x| {
                let c = auto_contour(l.max_rate(), *x, g.eps)?;
                expectation_h_contour(&l, &h, *x, &c).map(|v| (v, None))
            })
            .collect::<Result<_, _>>()?,
        (_, Quantity::Pi) => {
            let grid = estimate_correlators(&l, f64::INFINITY, &times, a.tw, a.paths, seed)?;
            grid.pi.iter().map(|s| (s.estimate, Some(s.stderr))).collect()
        }
        (_, Quantity::Deep) => times
            .iter()
            .map(|x| {
                let states = sample_states(&l, *x, a.paths, seed);
                let s = TrajectoryStats::binomial(states.iter().filter(|j| l.rates()[**j] >= a.delta).count(), states.len());
                (s.estimate, Some(s.stderr))
            })
            .collect(),
    };
    for (x, (v, se)) in times.iter().zip(rows) {
        t.push(vec![(*x).into(), v.into(), se.into(), method.into(), a.tw.into()]);
    }
    Ok(t)
}

fn mc(a: &McArgs, seed: u64) -> Out {
    let l = landscape(&a.landscape, seed)?;
    match a.estimator {
        Estimator::Pi | Estimator::Pi1 | Estimator::Pi2 => {
            let times = grid(&a.t_grid)?;
            let g = estimate_correlators(&l, a.delta, &times, a.tw, a.paths, seed)?;
            let stats = match a.estimator {
                Estimator::Pi => &g.pi,
                Estimator::Pi1 => &g.pi1,
                _ => &g.pi2,
            };
            let mut t = Table::new(&["t", "estimate", "stderr", "n_paths"]);
            for (x, s) in times.iter().zip(stats) {
                t.push(vec![(*x).into(), s.estimate.into(), s.stderr.into(), s.n_paths.into()]);
            }
            Ok(t)
        }
        Estimator::Txdist => {
            let mut t = Table::new(&["t", "bin_lo", "bin_hi", "mass"]);
            for x in grid(&a.t_grid)? {
                let d = estimate_tx_distribution(&l, x, a.paths, seed, a.bins)?;
                let h = d.stats.extra.as_ref().expect("histogram attached");
                for (k, m) in h.masses.iter().enumerate() {
                    t.push(vec![x.into(), h.edges[k].into(), h.edges[k + 1].into(), (*m).into()]);
                }
            }
            Ok(t)
        }
        Estimator::Survival => {
            let mut t = Table::new(&["u", "empirical", "stderr", "bound", "start_site", "holds"]);
            for u in grid(&a.u_grid)? {
                let s = survival_bound_check(&l, a.delta, u, a.paths, seed)?;
                t.push(vec![u.into(), s.empirical.into(), s.stderr.into(), s.bound.into(), s.start_site.into(), s.holds().into()]);
            }
            Ok(t)
        }
    }
}

fn ppp(a: &PppArgs, g: &Global, seed: u64) -> Out {
    let regime = match a.regime {
        Regime::Fixed => ScalingRegime::fixed_tau0(a.tau0.unwrap_or(1.0), a.threshold.unwrap_or_default())?,
        Regime::Canonical => ScalingRegime::tau0_eq_ee(a.threshold.unwrap_or_default())?,
        Regime::Zero => ScalingRegime::tau0_to_zero(a.tau0.unwrap_or(1e-6), a.coverage)?,
    };
    let l = regime.sample(a.alpha, seed)?;
    match a.quantity {
        PppQuantity::Pi => {
            let c = auto_contour(l.max_rate(), a.tw, g.eps)?;
            let mut t = Table::new(&["theta", "value", "target", "c1", "c2", "n_sites", "regime"]);
            for th in grid(&a.theta_grid)? {
                let p = pi_e(&l, th * a.tw, a.tw, &c)?;
                t.push(vec![
                    th.into(),
                    p.value.into(),
                    aging_a(a.alpha, th)?.into(),
                    p.fit.map(|f| f.c1).into(),
                    p.fit.map(|f| f.c2).into(),
                    l.len().into(),
                    regime.kind.as_str().into(),
                ]);
            }
            Ok(t)
        }
        PppQuantity::Windows => {
            let windows = parse_windows(&a.windows).map_err(Failure::Usage)?;
            let s = eigenvalues(&l, g.tol)?;
            let mut t = Table::new(&["lo", "hi", "mass", "target"]);
            for w in rescaled_spectral_measure(&l, &s, &windows)? {
                t.push(vec![w.lo.into(), w.hi.into(), w.mass.into(), w.target.into()]);
            }
            Ok(t)
        }
    }
}

fn tauberian(a: &TauberianArgs) -> Out {
    let beta = a.beta.expect("beta resolved before dispatch");
    let transform: Box<dyn LaplaceTransform> = match a.transform {
        Transform::Power => Box::new(PowerTransform { b: a.b, beta }),
        Transform::Pihat => Box::new(PiHatTransform { alpha: a.alpha, theta: a.theta }),
        Transform::Hhat => Box::new(HHatTransform { alpha: a.alpha, h: Observable::indicator_ge(a.delta)? }),
    };
    if let Some(og) = &a.omega_grid {
        let mut t = Table::new(&["omega", "value", "scaled"]);
        for w in grid(og)? {
            let v = transform.eval(Complex64::new(w, 0.0))?.re;
            t.push(vec![w.into(), v.into(), (w.powf(beta) * v).into()]);
        }
        return Ok(t);
    }
    let mut t = Table::new(&["s", "g", "scaled"]);
    for p in tauberian_invert(transform.as_ref(), beta, &grid(&a.s_grid)?)? {
        t.push(vec![p.s.into(), p.g.into(), p.scaled.into()]);
    }
    Ok(t)
}

fn diagnose(a: &DiagnoseArgs, seed: u64) -> Out {
    let l = landscape(&a.landscape, seed)?;
    let d = perturbation_diagnostic(&l)?;
    let mut t = Table::new(&["n", "avg_rate", "min_gap", "ratio", "satisfied"]);
    t.push(vec![l.len().into(), d.avg_rate.into(), d.min_gap.into(), d.ratio.into(), d.satisfied().into()]);
    Ok(t)
}
