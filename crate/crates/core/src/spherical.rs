//! K-invariant spherical functions on `S^{1,q}`.
//!
//! The group average `∫_K (kc·x)^ρ dk` depends on `x` only through `x₁`.
//! With `c = (1, u)`, `u` uniform on `S^{q-1}`, and `s = ⟨u, ω⟩`:
//!
//! ```text
//! P_ρ(x₁) = ∫ (x₁ − s√(x₁²−1))^ρ (1−s²)^{(q−3)/2} ds / ∫ (1−s²)^{(q−3)/2} ds
//! ```
//!
//! over `s ∈ [−1, 1]`. Substituting `s = sin φ` turns the endpoint weight into
//! `cos^{q−2} φ`, which is analytic on `[−π/2, π/2]`, and the integral is done
//! by Gauss-Legendre with node doubling. The Laplace integral for `q = 2` is
//! evaluated separately, by the periodic trapezoidal rule in `θ`, so that the
//! two routes can be checked against each other.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::geometry::{dot, hyperboloid_point, isotropic, random_direction};
use crate::harmonics::real_power;
use crate::quadrature::{periodic_mean, refine, GaussLegendre, MAX_GAUSS_NODES};

pub use crate::quadrature::{Evaluation, QuadratureConfig};

/// Largest admissible `x₁`.
pub const X_MAX: f64 = 1e8;

/// Minimum sample count for [`k_average_mc`].
pub const MIN_MC_SAMPLES: usize = 1000;

fn check_x1(x1: f64) -> Result<()> {
    if !(1.0..=X_MAX).contains(&x1) {
        return Err(Error::Domain(format!("x1 = {x1} outside [1, {X_MAX:e}]")));
    }
    Ok(())
}

fn check_q(q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::Domain(format!(
            "q = {q}: the stabilizer K is trivial, need q >= 2"
        )));
    }
    Ok(())
}

/// `√(x²−1)` without forming `x²`.
#[inline]
fn sinh_of(x: f64) -> f64 {
    ((x - 1.0) * (x + 1.0)).sqrt()
}

/// `x − r·s` for `|s| ≤ 1`, `r = √(x²−1)`, with `cs = √(1−s²)` given.
///
/// For `s > 0` the difference is rewritten as `(1 + r²cs²)/(x + r·s)`, which
/// avoids cancellation when `s → 1` and `x` is large.
#[inline]
fn stable_base(x: f64, r: f64, s: f64, cs: f64) -> f64 {
    if s > 0.0 {
        (1.0 + (x - 1.0) * (x + 1.0) * cs * cs) / (x + r * s)
    } else {
        x - r * s
    }
}

/// `P_ρ(x₁) = ∫_K (kc·x)^ρ dk` with probability Haar measure and `c₁ = 1`.
pub fn k_average(rho: Degree, q: usize, x1: f64, cfg: &QuadratureConfig) -> Result<Evaluation> {
    check_q(q)?;
    check_x1(x1)?;
    let r = sinh_of(x1);
    let z = rho.value();
    let power = (q - 2) as i32;
    refine(cfg, MAX_GAUSS_NODES, |n| {
        let rule = GaussLegendre::cached(n);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (xi, w) in rule.pairs() {
            // φ = ξπ/2; cos φ taken as sin((1−|ξ|)π/2) keeps accuracy near ±π/2.
            let cos_phi = ((1.0 - xi.abs()) * FRAC_PI_2).sin();
            let sin_phi = xi.signum() * ((1.0 - xi.abs()) * FRAC_PI_2).cos();
            let weight = w * cos_phi.powi(power);
            let base = stable_base(x1, r, sin_phi, cos_phi);
            num += real_power(base, z) * weight;
            den += weight;
        }
        num / den
    })
}

/// Legendre function `P_ρ(x) = (1/2π)∫₀^{2π} (x + √(x²−1) cos θ)^ρ dθ`, `x ≥ 1`.
pub fn legendre_p(rho: Degree, x: f64, cfg: &QuadratureConfig) -> Result<Evaluation> {
    check_x1(x)?;
    let r = sinh_of(x);
    let z = rho.value();
    periodic_mean(
        |theta| {
            let (sin_t, cos_t) = theta.sin_cos();
            // x + r cos θ = x − r·(−cos θ)
            let base = stable_base(x, r, -cos_t, sin_t.abs());
            real_power(base, z)
        },
        cfg,
    )
}

/// `∫_{−π/2}^{π/2} cos^m φ dφ = B(1/2, (m+1)/2)`, the normalizer of the K-average.
pub fn wallis(m: u32) -> f64 {
    let (mut value, start) = if m.is_multiple_of(2) {
        (std::f64::consts::PI, 2)
    } else {
        (2.0, 3)
    };
    let mut k = start;
    while k <= m {
        value *= (k - 1) as f64 / k as f64;
        k += 2;
    }
    value
}

/// Monte-Carlo estimate of the sphere average, with per-component standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEvaluation {
    pub value: Complex64,
    pub std_err_re: f64,
    pub std_err_im: f64,
    pub samples: usize,
}

impl McEvaluation {
    /// `err_est` is the Euclidean combination of the two standard errors.
    pub fn as_evaluation(&self) -> Evaluation {
        Evaluation {
            value: self.value,
            err_est: self.std_err_re.hypot(self.std_err_im),
            nodes: self.samples,
        }
    }

    /// Largest per-component deviation from `reference`, in standard errors.
    /// Components with zero spread count as 0 if they match exactly.
    pub fn z_score(&self, reference: Complex64) -> f64 {
        let score = |d: f64, se: f64| {
            if d == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                d.abs() / se
            }
        };
        let d = self.value - reference;
        score(d.re, self.std_err_re).max(score(d.im, self.std_err_im))
    }
}

/// Averages `(c(u)·x)^ρ` over `samples` uniform directions `u ∈ S^{q−1}`.
///
/// `x = hyperboloid_point(arccosh x₁, e₁)`. Deterministic for a fixed seed.
pub fn k_average_mc(
    rho: Degree,
    q: usize,
    x1: f64,
    samples: usize,
    seed: u64,
) -> Result<McEvaluation> {
    check_q(q)?;
    check_x1(x1)?;
    if samples < MIN_MC_SAMPLES {
        return Err(Error::Contract(format!(
            "need at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    let mut omega = vec![0.0; q];
    omega[0] = 1.0;
    let x = hyperboloid_point(x1.acosh(), &omega)?;
    let z = rho.value();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Welford accumulators per component.
    let mut mean = Complex64::new(0.0, 0.0);
    let (mut m2_re, mut m2_im) = (0.0, 0.0);
    for k in 1..=samples {
        let c = isotropic(&random_direction(q, &mut rng))?;
        let base = dot(&c, &x)?;
        if !(base > 0.0) {
            return Err(Error::Domain(format!("c·x = {base} at sample {k}")));
        }
        let v = real_power(base, z);
        let delta = v - mean;
        mean += delta / k as f64;
        let delta2 = v - mean;
        m2_re += delta.re * delta2.re;
        m2_im += delta.im * delta2.im;
    }
    let nf = samples as f64;
    let se = |m2: f64| (m2 / (nf - 1.0) / nf).sqrt();
    Ok(McEvaluation {
        value: mean,
        std_err_re: se(m2_re),
        std_err_im: se(m2_im),
        samples,
    })
}
