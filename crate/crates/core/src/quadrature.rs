//! Node-doubling quadrature drivers.
//!
//! Two rules are used: the periodic trapezoidal rule (nested, so doubling
//! reuses every previous evaluation) and Gauss-Legendre (rebuilt per level,
//! nodes cached process-wide).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss-Legendre rules above this size are not built; refinement reports
/// non-convergence instead.
pub const MAX_GAUSS_NODES: usize = 1 << 14;

/// Refinement policy for the node-doubling integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub initial_nodes: usize,
    pub max_doublings: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            initial_nodes: 16,
            max_doublings: 16,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_nodes < 8 {
            return Err(Error::Contract(format!(
                "initial_nodes = {} must be at least 8",
                self.initial_nodes
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Contract(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        Ok(())
    }

    fn accepts(&self, diff: f64, value: Complex64) -> bool {
        diff <= self.abs_tol.max(self.rel_tol * value.norm())
    }
}

/// A computed value with its a-posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: Complex64,
    /// Difference between the last two refinement levels (or a standard error).
    pub err_est: f64,
    pub nodes: usize,
}

/// Runs `estimate` at `n₀, 2n₀, 4n₀, …` until two consecutive levels agree.
pub(crate) fn refine<F>(
    cfg: &QuadratureConfig,
    max_nodes: usize,
    mut estimate: F,
) -> Result<Evaluation>
where
    F: FnMut(usize) -> Complex64,
{
    cfg.validate()?;
    let mut nodes = cfg.initial_nodes;
    let mut prev = estimate(nodes);
    let mut err_est = f64::INFINITY;
    for _ in 0..cfg.max_doublings {
        let next = nodes * 2;
        if next > max_nodes {
            break;
        }
        let cur = estimate(next);
        if !(cur.re.is_finite() && cur.im.is_finite()) {
            return Err(Error::Domain(format!(
                "integrand overflows f64 (estimate {cur} at {next} nodes)"
            )));
        }
        err_est = (cur - prev).norm();
        nodes = next;
        prev = cur;
        if cfg.accepts(err_est, cur) {
            return Ok(Evaluation {
                value: cur,
                err_est,
                nodes,
            });
        }
    }
    Err(Error::Convergence {
        message: format!("tolerance not met after {nodes} nodes"),
        best: Evaluation {
            value: prev,
            err_est,
            nodes,
        },
    })
}

/// Mean of a `2π`-periodic function by the nested trapezoidal rule.
pub fn periodic_mean<F>(f: F, cfg: &QuadratureConfig) -> Result<Evaluation>
where
    F: Fn(f64) -> Complex64,
{
    let max_nodes = cfg
        .initial_nodes
        .saturating_mul(1usize << cfg.max_doublings.min(40));
    let mut sum = Complex64::new(0.0, 0.0);
    let mut have = 0usize;
    refine(cfg, max_nodes, |n| {
        if have == 0 {
            let step = 2.0 * PI / n as f64;
            sum = (0..n).map(|j| f(step * j as f64)).sum();
        } else {
            // Midpoints of the previous grid.
            let step = 2.0 * PI / have as f64;
            sum += (0..have)
                .map(|j| f(step * (j as f64 + 0.5)))
                .sum::<Complex64>();
        }
        have = n;
        sum / n as f64
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Tricomi-style initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for k in 0..n.div_ceil(2) {
            let mut x = (PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule of size `n`, built once per process.
    pub fn cached(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&n) {
            return Arc::clone(rule);
        }
        let rule = Arc::new(Self::new(n));
        cache
            .lock()
            .expect("rule cache poisoned")
            .entry(n)
            .or_insert(rule)
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `∫_a^b f(x) dx` with the rule mapped affinely onto `[a, b]`.
    pub fn integrate<F>(&self, a: f64, b: f64, f: F) -> f64
    where
        F: Fn(f64) -> f64,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .pairs()
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
