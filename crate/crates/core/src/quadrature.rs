//! Gauss–Jacobi rules (Golub–Welsch) and graded composite rules for
//! integrals carrying an `x^(alpha-1)` weight at the origin.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::numeric::gamma;

/// Nodes and weights on [-1, 1] for the weight `(1-x)^a (1+x)^b`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type Key = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<Key, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// n-point Gauss–Jacobi rule for `(1-x)^a (1+x)^b`, a, b > -1.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Arc<Rule> {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(golub_welsch(n, a, b));
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

/// n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    gauss_jacobi(n, 0.0, 0.0)
}

fn golub_welsch(n: usize, a: f64, b: f64) -> Rule {
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            let s = 2.0 * kf + ab;
            (b * b - a * a) / (s * (s + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + ab;
            let off2 = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            jac[(k, k + 1)] = off2.sqrt();
            jac[(k + 1, k)] = off2.sqrt();
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Flattened rule: `sum w_i f(x_i)` approximates an integral over the real line.
#[derive(Debug, Clone, Default)]
pub struct NodeSet {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        crate::numeric::sum(self.x.iter().zip(&self.w).map(|(x, w)| w * f(*x)))
    }

    /// Append the Gauss–Legendre image of `[lo, hi]` with the factor `x^(alpha-1)`.
    fn push_panel(&mut self, lo: f64, hi: f64, alpha: f64, order: usize) {
        let rule = gauss_legendre(order);
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = c + h * u;
            self.x.push(x);
            self.w.push(w * h * x.powf(alpha - 1.0));
        }
    }

    /// Append a Gauss–Jacobi panel `[0, hi]` absorbing `x^(alpha-1)` exactly.
    fn push_origin_panel(&mut self, hi: f64, alpha: f64, order: usize) {
        let rule = gauss_jacobi(order, 0.0, alpha - 1.0);
        let scale = (0.5 * hi).powf(alpha);
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            self.x.push(0.5 * hi * (1.0 + u));
            self.w.push(w * scale);
        }
    }
}

/// Panel layout for `int_0^upper x^(alpha-1) f(x) dx`.
///
/// The first panel `[0, fine]` is Gauss–Jacobi; later panels grow
/// geometrically, are capped at `halo/2` while `x < focus_end + halo`, and
/// beyond that grow with the distance from `focus_end`. Panels always break
/// at `breakpoints`.
#[derive(Debug, Clone)]
pub struct PanelPlan {
    pub alpha: f64,
    pub upper: f64,
    pub fine: f64,
    pub halo: f64,
    pub focus_end: f64,
    pub breakpoints: Vec<f64>,
    pub order: usize,
}

impl PanelPlan {
    /// Purely geometric grading from `fine` up to `upper`.
    pub fn graded(alpha: f64, upper: f64, fine: f64) -> Self {
        Self {
            alpha,
            upper,
            fine,
            halo: f64::INFINITY,
            focus_end: 0.0,
            breakpoints: Vec::new(),
            order: 20,
        }
    }

    pub fn with_breakpoints(mut self, bps: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(bps);
        self
    }

    pub fn edges(&self) -> Vec<f64> {
        assert!(self.upper > 0.0 && self.fine > 0.0 && self.halo > 0.0);
        let mut bps: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|b| *b > 0.0 && *b < self.upper)
            .collect();
        bps.push(self.upper);
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let mut edges = vec![0.0, self.fine.min(bps[0])];
        let mut bp = 0;
        loop {
            let x = *edges.last().unwrap();
            if x >= self.upper {
                break;
            }
            while bps[bp] <= x {
                bp += 1;
            }
            let cap = if x < self.focus_end + self.halo {
                0.5 * self.halo
            } else {
                (0.5 * self.halo).max(0.5 * (x - self.focus_end))
            };
            let next = (x + x.min(cap)).min(bps[bp]);
            edges.push(next);
        }
        edges
    }

    pub fn build(&self) -> NodeSet {
        let edges = self.edges();
        let mut set = NodeSet::default();
        set.push_origin_panel(edges[1], self.alpha, self.order);
        for pair in edges[1..].windows(2) {
            set.push_panel(pair[0], pair[1], self.alpha, self.order);
        }
        set
    }
}

/// Composite Gauss–Legendre rule on `[lo, hi]` with `panels` equal panels.
pub fn composite_legendre(lo: f64, hi: f64, panels: usize, order: usize) -> NodeSet {
    let mut set = NodeSet::default();
    let width = (hi - lo) / panels as f64;
    for p in 0..panels {
        let a = lo + width * p as f64;
        let b = if p + 1 == panels { hi } else { a + width };
        set.push_panel(a, b, 1.0, order);
    }
    set
}
