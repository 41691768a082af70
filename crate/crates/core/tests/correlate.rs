use num_complex::Complex64;
use proptest::prelude::*;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use trapspectra::contour::{auto_contour, make_rectangle_resolved, DEFAULT_EPS};
use trapspectra::correlate::tauberian::{sector_check, PiHatTransform, PowerTransform};
use trapspectra::correlate::*;
use trapspectra::propagator::{expm_oracle, uniform_row_mix};
use trapspectra::{eigenvalues, Landscape};

/// `A(theta) = 1 - I_{theta/(1+theta)}(1 - alpha, alpha)`.
fn a_oracle(alpha: f64, theta: f64) -> f64 {
    1.0 - beta_reg(1.0 - alpha, alpha, theta / (1.0 + theta))
}

/// `H_hat` for `1{x >= delta}` at `alpha = 1/2` from the arctangent antiderivative.
fn h_hat_half(delta: f64, w: f64) -> f64 {
    let r = w.sqrt();
    (1.0 - (delta.sqrt() / r).atan() / (1.0 / r).atan()) / w
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn pi_spectral_examples() {
    let l = Landscape::sample_canonical(20, 0.5, 1).unwrap();
    let s = eigenvalues(&l, 1e-14).unwrap();
    assert!((pi_spectral(&s, 0.0, 4.0).unwrap() - 1.0).abs() < 1e-9);
    let one = eigenvalues(&Landscape::from_rates(&[0.4]).unwrap(), 1e-14).unwrap();
    for (t, tw) in [(1.0, 1.0), (50.0, 3.0)] {
        assert!((pi_spectral(&one, t, tw).unwrap() - 1.0).abs() < 1e-15);
    }
    let two = Landscape::from_rates(&[0.2, 0.6]).unwrap();
    let s2 = eigenvalues(&two, 1e-14).unwrap();
    let occ = uniform_row_mix(&expm_oracle(&two, 1.0).unwrap());
    let want = occ[0] * (-0.1f64).exp() + occ[1] * (-0.3f64).exp();
    assert!((pi_spectral(&s2, 1.0, 1.0).unwrap() - want).abs() < 1e-9);
}

#[test]
fn expectation_spectral_examples() {
    let l = Landscape::sample_canonical(8, 0.5, 3).unwrap();
    let s = eigenvalues(&l, 1e-14).unwrap();
    assert!((expectation_h_spectral(&s, &Observable::constant_one(), 2.0).unwrap() - 1.0).abs() < 1e-9);
    let j = 2;
    let late = 1e6 / s.eigenvalues()[1];
    let pm = Observable::point_mass(l.rates()[j]);
    let mu = l.equilibrium_measure();
    assert!((expectation_h_spectral(&s, &pm, late).unwrap() - mu.entries()[j]).abs() < 1e-8);
    let delta = l.rates()[4];
    let ind = Observable::indicator_ge(delta).unwrap();
    for t in [0.5, 5.0] {
        let occ = uniform_row_mix(&expm_oracle(&l, t).unwrap());
        let want: f64 = occ.iter().zip(l.rates()).filter(|(_, x)| **x >= delta).map(|(p, _)| p).sum();
        assert!((expectation_h_spectral(&s, &ind, t).unwrap() - want).abs() < 1e-9);
    }
}

#[test]
fn pi_contour_matches_spectral() {
    for n in [2usize, 16, 256] {
        let l = Landscape::sample_canonical(n, 0.5, 9).unwrap();
        let s = eigenvalues(&l, 1e-14).unwrap();
        for (t, tw) in [(0.0, 1.0), (1.0, 1.0), (3.0, 20.0), (100.0, 50.0)] {
            let c = auto_contour(l.max_rate(), tw, DEFAULT_EPS).unwrap();
            let a = pi_contour(&l, t, tw, &c).unwrap();
            let b = pi_spectral(&s, t, tw).unwrap();
            assert!((a - b).abs() < 1e-6, "n={n} t={t} tw={tw}");
            if t == 0.0 {
                assert!((a - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn pi_contour_is_clearance_independent() {
    let l = Landscape::sample_canonical(64, 0.5, 2).unwrap();
    let wide = make_rectangle_resolved(l.max_rate(), 1.0).unwrap();
    let narrow = make_rectangle_resolved(l.max_rate(), 0.5).unwrap();
    let a = pi_contour(&l, 2.0, 1.5, &wide).unwrap();
    let b = pi_contour(&l, 2.0, 1.5, &narrow).unwrap();
    assert!((a - b).abs() < 1e-6);
}

#[test]
fn expectation_contour_examples() {
    let l = Landscape::sample_canonical(256, 0.5, 12).unwrap();
    let s = eigenvalues(&l, 1e-14).unwrap();
    let c = auto_contour(l.max_rate(), 3.0, DEFAULT_EPS).unwrap();
    let one = Observable::constant_one();
    assert!((expectation_h_contour(&l, &one, 3.0, &c).unwrap() - 1.0).abs() < 1e-6);
    for h in [Observable::indicator_ge(0.3).unwrap(), Observable::exp_decay(2.0).unwrap()] {
        let a = expectation_h_contour(&l, &h, 3.0, &c).unwrap();
        let b = expectation_h_spectral(&s, &h, 3.0).unwrap();
        assert!((a - b).abs() < 1e-6);
    }
    let none = Observable::indicator_ge(1.1).unwrap();
    assert!(expectation_h_contour(&l, &none, 3.0, &c).unwrap().abs() < 1e-6);
}

#[test]
fn aging_a_against_incomplete_beta() {
    for alpha in [0.1, 0.3, 0.5, 0.8, 0.95] {
        assert_eq!(aging_a(alpha, 0.0).unwrap(), 1.0);
        for theta in [1e-3, 0.2, 1.0, 5.0, 100.0] {
            let a = aging_a(alpha, theta).unwrap();
            assert!((a - a_oracle(alpha, theta)).abs() < 1e-10, "alpha={alpha} theta={theta}");
            assert_eq!(z_distribution_transform(alpha, theta).unwrap(), a);
        }
    }
}

#[test]
fn aging_a_arcsine() {
    for theta in [0.1f64, 1.0, 3.0, 40.0] {
        let want = 2.0 / PI * (theta / (1.0 + theta)).sqrt().acos();
        assert!((aging_a(0.5, theta).unwrap() - want).abs() < 1e-12);
    }
    assert!((aging_a(0.5, 1.0).unwrap() - 0.5).abs() < 1e-12);
    let big = aging_a(0.5, 1e6).unwrap();
    assert!(big < 1e-3 && aging_a(0.5, 2e6).unwrap() < big);
}

#[test]
fn pi_limit_examples() {
    assert!((pi_limit(0.5, 0.0, 10.0).unwrap() - 1.0).abs() < 1e-8);
    assert!((pi_limit(0.5, 1e3, 1e3).unwrap() - 0.5).abs() < 0.05);
    // rectangles of different clearance agree
    let x_order = 40;
    let a = pi_limit_with(0.5, 1.0, 1.0, &make_rectangle_resolved(1.0, 1.0).unwrap(), x_order).unwrap();
    let b = pi_limit_with(0.5, 1.0, 1.0, &make_rectangle_resolved(1.0, 0.5).unwrap(), x_order).unwrap();
    assert!((a - b).abs() < 1e-8);
    assert!((a - pi_limit(0.5, 1.0, 1.0).unwrap()).abs() < 1e-8);
}

#[test]
fn pi_limit_close_to_large_finite_n() {
    let (t, tw) = (10.0, 10.0);
    let limit = pi_limit(0.5, t, tw).unwrap();
    for seed in 0..5 {
        let l = Landscape::sample_canonical(100_000, 0.5, seed).unwrap();
        let c = auto_contour(l.max_rate(), tw, DEFAULT_EPS).unwrap();
        let v = pi_contour(&l, t, tw, &c).unwrap();
        assert!((v - limit).abs() < 2e-2, "seed {seed}: {v} vs {limit}");
    }
}

#[test]
fn g_matches_a_and_scales() {
    for alpha in [0.3, 0.5, 0.8] {
        for theta in [0.2, 1.0, 5.0] {
            assert!((g_infinite(alpha, theta, 1.0).unwrap() - a_oracle(alpha, theta)).abs() < 1e-9);
        }
    }
    let base = g_infinite(0.5, 2.0, 1.0).unwrap();
    for (t, tw) in [(20.0, 10.0), (200.0, 100.0)] {
        assert!((g_infinite(0.5, t, tw).unwrap() - base).abs() < 1e-4);
    }
}

#[test]
fn g_truncation_decay() {
    let g = g_infinite(0.5, 1.0, 1.0).unwrap();
    let ms = [2.0, 4.0, 8.0, 16.0, 32.0];
    let errs: Vec<f64> = ms.iter().map(|m| (g_truncated(0.5, *m, 1.0, 1.0).unwrap() - g).abs()).collect();
    assert!(slope(&ms, &errs) <= 0.5 - 1.0 + 0.1, "{errs:?}");
    assert!(g_truncated(0.5, 0.5, 1.0, 1.0).is_err());
}

#[test]
fn g_limit_in_waiting_time() {
    for theta in [0.5, 2.0] {
        let errs: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|s| (g_truncated(0.5, 1.0, theta * s, *s).unwrap() - aging_a(0.5, theta).unwrap()).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }
}

#[test]
fn pi_hat_examples() {
    let w = 1e3;
    let v = pi_hat(0.5, 1.0, real(w)).unwrap();
    assert!((v.re * w - 1.0).abs() < 1e-2);
    for alpha in [0.3, 0.7] {
        // theta = 0 removes the observable: omega Pi_hat = 1
        assert!((pi_hat(alpha, 0.0, real(0.3)).unwrap() * 0.3 - 1.0).norm() < 1e-10);
        for r in [1.0, 10.0, 100.0] {
            for arg in [0.0, 0.75 * PI, -0.75 * PI, 0.5 * PI] {
                let z = Complex64::from_polar(r, arg);
                let v = pi_hat(alpha, 1.0, z).unwrap();
                assert!(v.norm() * r < 3.0, "alpha={alpha} r={r} arg={arg}");
            }
        }
    }
    assert!(pi_hat(0.5, 1.0, real(-1.0)).is_err());
}

#[test]
fn h_hat_examples() {
    let one = Observable::constant_one();
    for w in [real(0.01), Complex64::new(-0.5, 2.0), real(40.0)] {
        let v = h_hat(0.4, &one, w).unwrap();
        assert!((v * w - 1.0).norm() < 1e-12);
    }
    let none = Observable::indicator_ge(1.0).unwrap();
    assert_eq!(h_hat(0.5, &none, real(0.1)).unwrap(), Complex64::new(0.0, 0.0));
    for delta in [0.1, 0.5] {
        let h = Observable::indicator_ge(delta).unwrap();
        for w in [1e-6, 1e-4, 1e-2, 1.0, 10.0] {
            let got = h_hat(0.5, &h, real(w)).unwrap().re;
            let want = h_hat_half(delta, w);
            assert!((got / want - 1.0).abs() < 1e-9, "delta={delta} w={w}");
        }
    }
}

#[test]
fn h_hat_exponent_visible_at_small_omega() {
    // on [1e-4, 1e-1] a competing O(omega) term bends the fit; deeper down
    // the 1 - alpha exponent takes over
    for alpha in [0.3, 0.5, 0.8] {
        let h = Observable::indicator_ge(0.5).unwrap();
        let b = b_delta(alpha, 0.5).unwrap();
        let ws: Vec<f64> = (0..4).map(|k| 10f64.powi(-9 + k)).collect();
        let errs: Vec<f64> = ws.iter().map(|w| (w.powf(alpha) * h_hat(alpha, &h, real(*w)).unwrap().re - b).abs()).collect();
        assert!(slope(&ws, &errs) >= 0.9 * (1.0 - alpha), "alpha={alpha}");
    }
}

#[test]
fn deep_trap_constants() {
    assert_eq!(deep_trap_constant(0.5, 1.0).unwrap(), 0.0);
    let want = 2.0 / PI.powf(1.5);
    assert!((deep_trap_constant(0.5, 0.25).unwrap() - want).abs() < 1e-12);
    assert!((0.35917 - want).abs() < 1e-5);
    for alpha in [0.2, 0.5, 0.9, 0.99] {
        assert!((c_alpha(alpha) - gamma(alpha)).abs() < 1e-12 * gamma(alpha));
        let d = 0.3f64;
        let b = (d.powf(alpha - 1.0) - 1.0) / (1.0 - alpha) * (PI * alpha).sin() / PI;
        assert!((b_delta(alpha, d).unwrap() - b).abs() < 1e-12);
    }
    assert!((c_alpha(0.99) - 1.0).abs() < (c_alpha(0.9) - 1.0).abs());
    assert!((c_alpha(0.99) - 1.0).abs() < 1e-2);
    assert!(deep_trap_constant(0.5, 1.5).is_err());
    assert!(deep_trap_constant(0.5, 0.0).is_err());
}

#[test]
fn deep_trap_decay_examples() {
    let target = deep_trap_constant(0.5, 0.1).unwrap();
    let v = deep_trap_decay(0.5, 0.1, 1e4).unwrap();
    assert!((v / target - 1.0).abs() < 0.1);
    let vals: Vec<f64> = [0.05, 0.1, 0.3, 0.7].iter().map(|d| deep_trap_decay(0.5, *d, 100.0).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    let early = h_limit(0.5, &Observable::indicator_ge(0.1).unwrap(), 1e-3).unwrap();
    let want = 1.0 - 0.1f64.sqrt();
    assert!((early / want - 1.0).abs() < 0.01);
}

#[test]
fn ppp_deep_trap_constant() {
    // numerator integrates to infinity: alpha = 1/2, delta = 1 gives 2/pi^{3/2}
    assert!((deep_trap_constant_ppp(0.5, 1.0).unwrap() - 2.0 / PI.powf(1.5)).abs() < 1e-12);
    let far = deep_trap_constant_ppp(0.5, 1e8).unwrap();
    assert!(far < 1e-4);
    let v = deep_trap_decay_ppp(0.5, 1.0, 1e4).unwrap();
    assert!((v / deep_trap_constant_ppp(0.5, 1.0).unwrap() - 1.0).abs() < 0.1);
}

#[test]
fn tauberian_examples() {
    let inv = PowerTransform { b: 1.0, beta: 1.0 };
    for p in tauberian_invert(&inv, 1.0, &[1.0, 100.0]).unwrap() {
        assert!((p.g - 1.0).abs() < 1e-8);
    }
    let root = PowerTransform { b: 1.0, beta: 0.5 };
    let p = tauberian_invert(&root, 0.5, &[100.0]).unwrap()[0];
    assert!((p.scaled - 1.0 / PI.sqrt()).abs() < 1e-4);
    for beta in [0.4, 0.7, 1.0] {
        let tr = PowerTransform { b: 2.5, beta };
        let p = tauberian_invert(&tr, beta, &[100.0]).unwrap()[0];
        assert!((p.scaled - 2.5 / gamma(beta)).abs() < 1e-3, "beta={beta}");
        assert!(sector_check(&tr, beta).is_ok());
    }
    let ph = PiHatTransform { alpha: 0.5, theta: 1.0 };
    for p in tauberian_invert(&ph, 1.0, &[10.0, 100.0]).unwrap() {
        assert!((p.g - pi_limit(0.5, p.s, p.s).unwrap()).abs() < 1e-3);
    }
}

#[test]
fn aging_curves() {
    let grid = [0.2, 1.0, 5.0];
    let c = aging_curve(CurveSource::Limit { alpha: 0.5 }, &grid, 100.0).unwrap();
    assert_eq!(c.method, Method::Limit);
    let l = Landscape::sample_canonical(300, 0.5, 4).unwrap();
    let s = eigenvalues(&l, 1e-14).unwrap();
    let a = aging_curve(CurveSource::Spectral(&s), &grid, 10.0).unwrap();
    let b = aging_curve(CurveSource::Contour(&l), &grid, 10.0).unwrap();
    let m = aging_curve(CurveSource::Mc { landscape: &l, n_paths: 20_000, seed: 1 }, &grid, 10.0).unwrap();
    for curve in [&c, &a, &b, &m] {
        assert!(curve.values.iter().all(|v| *v >= 0.0 && *v <= 1.0 + 1e-6));
    }
    for i in 0..3 {
        assert!((a.values[i] - b.values[i]).abs() < 1e-6);
        let se = m.stderr.as_ref().unwrap()[i];
        assert!((m.values[i] - a.values[i]).abs() < 4.0 * se);
    }
    assert!(aging_curve(CurveSource::Limit { alpha: 0.5 }, &[1.0, 0.5], 10.0).is_err());
}

#[test]
fn observable_validation() {
    assert!(Observable::indicator_ge(0.0).is_err());
    assert!(Observable::tabulated(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    let t = Observable::tabulated(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
    assert_eq!(t.eval(0.25), 0.5);
    let json = serde_json::to_string(&t).unwrap();
    assert_eq!(serde_json::from_str::<Observable>(&json).unwrap(), t);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aging_a_monotone(alpha in 0.05f64..0.95, a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let (x, y) = (aging_a(alpha, lo).unwrap(), aging_a(alpha, hi).unwrap());
        prop_assert!(y < x);
        prop_assert!(y > 0.0 && x <= 1.0);
    }

    #[test]
    fn pi_spectral_in_unit_interval(seed in any::<u64>(), n in 1usize..100, t in 0.0f64..100.0, tw in 0.0f64..100.0) {
        let l = Landscape::sample_canonical(n, 0.5, seed).unwrap();
        let s = eigenvalues(&l, 1e-14).unwrap();
        let v = pi_spectral(&s, t, tw).unwrap();
        prop_assert!(v > -1e-9 && v < 1.0 + 1e-9);
    }
}
