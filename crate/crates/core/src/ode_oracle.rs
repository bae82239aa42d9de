//! The radial equation of K-invariant spherical harmonics and a
//! quadrature-free series solution.
//!
//! A K-invariant harmonic of degree ρ on `S^{1,q}` depends only on `x₁` and
//! satisfies
//!
//! ```text
//! (1 − x₁²) P'' + (1 − n) x₁ P' + ρ(ρ − 2 + n) P = 0,   n = q + 1.
//! ```
//!
//! Writing `t = x₁ − 1` and `P = Σ a_k t^k` gives, coefficient by coefficient,
//!
//! ```text
//! a_{k+1} = a_k (λ + (1 − n)k − k(k − 1)) / ((k + 1)(2k + n − 1)),   λ = ρ(ρ − 2 + n).
//! ```
//!
//! The exponent-0 solution normalized by `a₀ = 1` is the one that stays
//! regular at `x₁ = 1`; its radius of convergence is 2 (the other singular
//! point is `x₁ = −1`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::harmonics::FdConfig;
use crate::quadrature::Evaluation;

/// Largest series length accepted by [`frobenius_eval`].
pub const MAX_TERMS: usize = 10_000;

/// Degree and ambient dimension of the radial equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeParams {
    rho: Degree,
    n: usize,
}

impl OdeParams {
    pub fn new(rho: Degree, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Contract(format!(
                "radial equation needs n >= 3, got {n}"
            )));
        }
        Ok(Self { rho, n })
    }

    /// Parameters for the hyperboloid `S^{1,q}`, `n = q + 1`.
    pub fn for_q(rho: Degree, q: usize) -> Result<Self> {
        Self::new(rho, q + 1)
    }

    pub fn rho(&self) -> Degree {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `λ = ρ(ρ − 2 + n)`.
    pub fn lambda(&self) -> Complex64 {
        let r = self.rho.value();
        r * (r + (self.n as f64 - 2.0))
    }
}

/// Left-hand side of the radial equation for given values of `P, P', P''`.
pub fn ode_residual(
    p: Complex64,
    dp: Complex64,
    d2p: Complex64,
    x1: f64,
    params: &OdeParams,
) -> Complex64 {
    let nf = params.n as f64;
    d2p * (1.0 - x1 * x1) + dp * ((1.0 - nf) * x1) + params.lambda() * p
}

/// Residual of the radial equation for `f` using Richardson central
/// differences, together with the magnitude scale
/// `|1−x₁²||P''| + |n−1||x₁||P'| + |λ||P|`.
pub fn residual_of_evaluator<F>(
    f: F,
    x1: f64,
    params: &OdeParams,
    cfg: &FdConfig,
) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let h = cfg.h();
    if !(x1 - 2.0 * h > 1.0) {
        return Err(Error::Domain(format!(
            "stencil around x1 = {x1} with h = {h} leaves [1, inf)"
        )));
    }
    let center = f(x1)?;
    let stencil = |step: f64| -> Result<(Complex64, Complex64)> {
        let plus = f(x1 + step)?;
        let minus = f(x1 - step)?;
        let d1 = (plus - minus) / (2.0 * step);
        let d2 = (plus - center * 2.0 + minus) / (step * step);
        Ok((d1, d2))
    };
    let (d1, d2) = stencil(h)?;
    let (d1, d2) = if cfg.richardson() {
        let (f1, f2) = stencil(h / 2.0)?;
        ((f1 * 4.0 - d1) / 3.0, (f2 * 4.0 - d2) / 3.0)
    } else {
        (d1, d2)
    };
    let residual = ode_residual(center, d1, d2, x1, params);
    let scale = (1.0 - x1 * x1).abs() * d2.norm()
        + (params.n as f64 - 1.0) * x1.abs() * d1.norm()
        + params.lambda().norm() * center.norm();
    Ok((residual, scale))
}

/// Roots of the indicial equation `m(m + (n−1)/2 − 1) = 0` at `x₁ = 1`.
pub fn indicial_roots(n: usize) -> (Complex64, Complex64) {
    let nf = n as f64;
    (
        Complex64::new(0.0, 0.0),
        Complex64::new((3.0 - nf) / 2.0, 0.0),
    )
}

/// Denominator `(k+1)(2k+n−1)` of the coefficient recurrence.
pub fn recurrence_denominator(k: usize, n: usize) -> f64 {
    (k as f64 + 1.0) * (2.0 * k as f64 + n as f64 - 1.0)
}

/// Ratio `a_{k+1}/a_k` of consecutive series coefficients.
pub fn recurrence_ratio(k: usize, params: &OdeParams) -> Complex64 {
    let kf = k as f64;
    let nf = params.n as f64;
    (params.lambda() + (1.0 - nf) * kf - kf * (kf - 1.0)) / recurrence_denominator(k, params.n)
}

/// Truncated exponent-0 series around `x₁ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    coeffs: Vec<Complex64>,
    radius_hint: f64,
}

impl SeriesSolution {
    /// First `terms` coefficients `a₀ = 1, a₁, …`.
    pub fn new(params: &OdeParams, terms: usize) -> Self {
        let mut coeffs = Vec::with_capacity(terms);
        let mut a = Complex64::new(1.0, 0.0);
        for k in 0..terms {
            coeffs.push(a);
            a *= recurrence_ratio(k, params);
        }
        Self {
            coeffs,
            radius_hint: 2.0,
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn center(&self) -> f64 {
        1.0
    }

    pub fn radius_hint(&self) -> f64 {
        self.radius_hint
    }

    fn check(&self, x1: f64) -> Result<f64> {
        let t = x1 - 1.0;
        if !(t.abs() < self.radius_hint) {
            return Err(Error::Domain(format!(
                "|x1 - 1| = {} outside the radius of convergence {}",
                t.abs(),
                self.radius_hint
            )));
        }
        Ok(t)
    }

    /// `(P, P', P'')` of the truncated series by Horner's rule.
    pub fn eval_with_derivatives(&self, x1: f64) -> Result<(Complex64, Complex64, Complex64)> {
        let t = self.check(x1)?;
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut dp, mut d2p) = (zero, zero, zero);
        for a in self.coeffs.iter().rev() {
            d2p = d2p * t + dp * 2.0;
            dp = dp * t + p;
            p = p * t + a;
        }
        Ok((p, dp, d2p))
    }

    pub fn eval(&self, x1: f64) -> Result<Complex64> {
        self.eval_with_derivatives(x1).map(|(p, _, _)| p)
    }
}

/// Sums the exponent-0 series at `x₁` until three consecutive terms fall
/// below `trunc_tol·|partial sum|`.
///
/// `err_est` is the geometric tail bound `|last term|·r/(1−r)` with
/// `r = |x₁−1|/2`, the asymptotic term ratio. `nodes` is the number of terms.
pub fn frobenius_eval(
    params: &OdeParams,
    x1: f64,
    terms: usize,
    trunc_tol: f64,
) -> Result<Evaluation> {
    if terms > MAX_TERMS || terms == 0 {
        return Err(Error::Contract(format!(
            "term budget {terms} outside [1, {MAX_TERMS}]"
        )));
    }
    if !(trunc_tol > 0.0) {
        return Err(Error::Contract(format!("truncation tolerance {trunc_tol}")));
    }
    let t = x1 - 1.0;
    if !(t.abs() < 2.0) {
        return Err(Error::Domain(format!(
            "|x1 - 1| = {} outside the radius of convergence 2",
            t.abs()
        )));
    }
    let ratio = t.abs() / 2.0;
    let tail = |term: f64| term * ratio / (1.0 - ratio);

    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut small_run = 0;
    for k in 0..terms {
        sum += term;
        if term.norm() < trunc_tol * sum.norm() {
            small_run += 1;
            if small_run == 3 {
                return Ok(Evaluation {
                    value: sum,
                    err_est: tail(term.norm()),
                    nodes: k + 1,
                });
            }
        } else {
            small_run = 0;
        }
        term *= recurrence_ratio(k, params) * t;
    }
    Err(Error::Convergence {
        message: format!("series not converged after {terms} terms at x1 = {x1}"),
        best: Evaluation {
            value: sum,
            err_est: tail(term.norm()),
            nodes: terms,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn deg(re: f64, im: f64) -> Degree {
        Degree::new(re, im).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn params_require_n_at_least_three() {
        assert!(OdeParams::new(deg(1.0, 0.0), 2).is_err());
        assert_eq!(OdeParams::for_q(deg(1.0, 0.0), 2).unwrap().n(), 3);
    }

    #[test]
    fn residual_examples() {
        for n in 3..7 {
            let p = OdeParams::new(deg(0.0, 0.0), n).unwrap();
            for x in [1.0, 2.0, 7.5] {
                assert_eq!(ode_residual(c(1.0), c(0.0), c(0.0), x, &p), c(0.0));
            }
        }
        let p = OdeParams::new(deg(1.0, 0.0), 3).unwrap();
        for x in [1.0, 1.7, 4.0] {
            assert_eq!(ode_residual(c(x), c(1.0), c(0.0), x, &p), c(0.0));
        }
        let p = OdeParams::new(deg(2.0, 0.0), 3).unwrap();
        let x = 2.0;
        let r = ode_residual(c((3.0 * x * x - 1.0) / 2.0), c(3.0 * x), c(3.0), x, &p);
        assert_eq!(r, c(0.0));
    }

    #[test]
    fn residual_of_evaluator_examples() {
        let cfg = FdConfig::new(1e-3, true).unwrap();
        let p = OdeParams::new(deg(0.0, 0.0), 3).unwrap();
        let (r, _) = residual_of_evaluator(|_| Ok(c(1.0)), 2.0, &p, &cfg).unwrap();
        assert_eq!(r, c(0.0));

        // x² is not the degree-2 solution: residual is exactly 2.
        let p = OdeParams::new(deg(2.0, 0.0), 3).unwrap();
        let (r, scale) = residual_of_evaluator(|x| Ok(c(x * x)), 1.8, &p, &cfg).unwrap();
        assert_abs_diff_eq!(r.re, 2.0, epsilon = 1e-7);
        assert!(scale > 1.0);
    }

    #[test]
    fn residual_of_evaluator_domain() {
        let cfg = FdConfig::new(1e-2, true).unwrap();
        let p = OdeParams::new(deg(1.0, 0.0), 3).unwrap();
        assert!(residual_of_evaluator(|x| Ok(c(x)), 1.015, &p, &cfg)
            .unwrap_err()
            .is_domain());
    }

    #[test]
    fn indicial_examples() {
        assert_eq!(indicial_roots(3), (c(0.0), c(0.0)));
        assert_eq!(indicial_roots(4), (c(0.0), c(-0.5)));
        assert_eq!(indicial_roots(2), (c(0.0), c(0.5)));
    }

    #[test]
    fn recurrence_matches_legendre_form_for_n3() {
        // n = 3: a_{k+1}/a_k = (ρ−k)(ρ+k+1) / (2(k+1)²).
        for rho in [deg(0.3, 0.0), deg(-1.7, 0.4), deg(2.0, 0.0), deg(0.5, 3.0)] {
            let params = OdeParams::new(rho, 3).unwrap();
            let r = rho.value();
            for k in 0..40 {
                let kf = k as f64;
                let expected = (r - kf) * (r + kf + 1.0) / (2.0 * (kf + 1.0).powi(2));
                let got = recurrence_ratio(k, &params);
                assert!((got - expected).norm() <= 1e-14 * (1.0 + expected.norm()));
            }
        }
    }

    #[test]
    fn truncated_series_residual_is_high_order() {
        // Exact derivatives of the K-term polynomial: the residual only
        // contains t^{K-1} and t^K, so it shrinks like |t|^{K-1}.
        let params = OdeParams::new(deg(0.7, -0.4), 4).unwrap();
        let series = SeriesSolution::new(&params, 12);
        let mut last = f64::INFINITY;
        for t in [0.4, 0.2, 0.1] {
            let (p, dp, d2p) = series.eval_with_derivatives(1.0 + t).unwrap();
            let r = ode_residual(p, dp, d2p, 1.0 + t, &params).norm();
            assert!(
                r < last / 500.0 || last.is_infinite(),
                "t={t}: {r} vs {last}"
            );
            last = r;
        }
        let (p, dp, d2p) = series.eval_with_derivatives(1.0).unwrap();
        let r = ode_residual(p, dp, d2p, 1.0, &params);
        assert!(r.norm() <= 1e-14 * params.lambda().norm());
    }

    #[test]
    fn series_examples() {
        let p0 = OdeParams::new(deg(0.0, 0.0), 5).unwrap();
        assert_eq!(frobenius_eval(&p0, 2.3, 100, 1e-16).unwrap().value, c(1.0));

        let p1 = OdeParams::new(deg(1.0, 0.0), 3).unwrap();
        let s = SeriesSolution::new(&p1, 4);
        assert_eq!(s.coeffs(), &[c(1.0), c(1.0), c(0.0), c(0.0)]);
        let ev = frobenius_eval(&p1, 2.5, 100, 1e-16).unwrap();
        assert_eq!(ev.value, c(2.5));

        let p2 = OdeParams::new(deg(2.0, 0.0), 3).unwrap();
        let s = SeriesSolution::new(&p2, 4);
        assert_eq!(s.coeffs(), &[c(1.0), c(3.0), c(1.5), c(0.0)]);
        let ev = frobenius_eval(&p2, 1.5, 100, 1e-16).unwrap();
        assert_eq!(ev.value, c(2.875));
        assert_eq!(ev.err_est, 0.0);
    }

    #[test]
    fn series_domain_and_budget() {
        let p = OdeParams::new(deg(0.5, 0.0), 3).unwrap();
        assert!(frobenius_eval(&p, 3.0, 100, 1e-15).unwrap_err().is_domain());
        assert!(frobenius_eval(&p, -1.5, 100, 1e-15)
            .unwrap_err()
            .is_domain());
        assert!(frobenius_eval(&p, 2.0, MAX_TERMS + 1, 1e-15).is_err());
        assert!(matches!(
            frobenius_eval(&p, 2.9, 10, 1e-15),
            Err(Error::Convergence { .. })
        ));
        assert!(SeriesSolution::new(&p, 5).eval(3.5).is_err());
    }

    #[test]
    fn series_at_center_is_one() {
        let p = OdeParams::new(deg(-2.7, 1.1), 4).unwrap();
        let ev = frobenius_eval(&p, 1.0, 50, 1e-15).unwrap();
        assert_eq!(ev.value, c(1.0));
    }
}
