//! Homogeneous harmonic functions on the positive cone and numeric
//! differential operators of type `(p,q)`.
//!
//! Scalar fields are plain closures `Fn(&PseudoVector) -> Result<Complex64>`,
//! so the same stencils serve plane waves, homogeneous extensions and
//! quadrature-backed spherical functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, norm_sq, PseudoVector};

/// Tolerance on `|x|² = 1` for points handed to the Laplace-Beltrami operator.
pub const HYPERBOLOID_TOL: f64 = 1e-10;

/// Tolerance on `|c|² = 0`, relative to the Euclidean size of `c`.
pub const ISOTROPY_TOL: f64 = 1e-12;

/// `b^ρ = exp(ρ ln b)` for a strictly positive real base.
#[inline]
pub fn real_power(base: f64, rho: Complex64) -> Complex64 {
    (rho * base.ln()).exp()
}

/// The plane-wave harmonic `x ↦ (c·x)^ρ` for isotropic `c` with `c₁ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWave {
    c: PseudoVector,
    rho: Degree,
}

impl PlaneWave {
    pub fn new(c: PseudoVector, rho: Degree) -> Result<Self> {
        let size: f64 = c.coords().iter().map(|a| a * a).sum();
        let ns = norm_sq(&c);
        if ns.abs() > ISOTROPY_TOL * size.max(1.0) {
            return Err(Error::Contract(format!(
                "plane-wave vector must be isotropic, |c|^2 = {ns:e}"
            )));
        }
        if !(c.x1() > 0.0) {
            return Err(Error::Contract(format!(
                "plane-wave vector needs c1 > 0, got {}",
                c.x1()
            )));
        }
        Ok(Self { c, rho })
    }

    pub fn direction(&self) -> &PseudoVector {
        &self.c
    }

    pub fn degree(&self) -> Degree {
        self.rho
    }

    pub fn eval(&self, x: &PseudoVector) -> Result<Complex64> {
        plane_wave_eval(self, x)
    }
}

/// `(c·x)^ρ` with the principal logarithm of the positive real `c·x`.
pub fn plane_wave_eval(f: &PlaneWave, x: &PseudoVector) -> Result<Complex64> {
    let base = dot(&f.c, x)?;
    if !(base > 0.0) {
        return Err(Error::Domain(format!(
            "outside positivity region: c·x = {base}"
        )));
    }
    Ok(real_power(base, f.rho.value()))
}

/// Degree-ρ extension `x ↦ |x|^ρ u(x/|x|)` of a function on the hyperboloid.
pub fn homogeneous_extension<U>(u: U, rho: Degree, x: &PseudoVector) -> Result<Complex64>
where
    U: Fn(&PseudoVector) -> Result<Complex64>,
{
    let r = norm(x)?;
    if !(x.x1() > 0.0) {
        return Err(Error::Domain(format!(
            "x1 = {} <= 0 is not reachable by scaling from the hyperboloid",
            x.x1()
        )));
    }
    let on_sheet = x.scaled(1.0 / r)?;
    let value = u(&on_sheet)?;
    if rho.value() == Complex64::new(0.0, 0.0) {
        Ok(value)
    } else {
        Ok(real_power(r, rho.value()) * value)
    }
}

/// Step control for the finite-difference operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    h: f64,
    richardson: bool,
}

impl FdConfig {
    pub const MIN_STEP: f64 = 1e-6;
    pub const MAX_STEP: f64 = 1e-1;

    pub fn new(h: f64, richardson: bool) -> Result<Self> {
        if !(Self::MIN_STEP..=Self::MAX_STEP).contains(&h) {
            return Err(Error::Contract(format!(
                "fd step {h} outside [{}, {}]",
                Self::MIN_STEP,
                Self::MAX_STEP
            )));
        }
        Ok(Self { h, richardson })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn richardson(&self) -> bool {
        self.richardson
    }
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            h: 1e-4,
            richardson: true,
        }
    }
}

/// One Richardson level for a central stencil with `O(h²)` leading error.
#[inline]
fn extrapolate<T>(coarse: T, fine: T) -> T
where
    T: std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
{
    fine * (4.0 / 3.0) - coarse * (1.0 / 3.0)
}

fn central_first<G>(g: &G, x: &PseudoVector, i: usize, h: f64) -> Result<Complex64>
where
    G: Fn(&PseudoVector) -> Result<Complex64>,
{
    let plus = g(&x.offset(i, h)?)?;
    let minus = g(&x.offset(i, -h)?)?;
    Ok((plus - minus) / (2.0 * h))
}

fn central_second<G>(
    g: &G,
    x: &PseudoVector,
    center: Complex64,
    i: usize,
    h: f64,
) -> Result<Complex64>
where
    G: Fn(&PseudoVector) -> Result<Complex64>,
{
    let plus = g(&x.offset(i, h)?)?;
    let minus = g(&x.offset(i, -h)?)?;
    Ok((plus - center * 2.0 + minus) / (h * h))
}

/// Partial derivative `∂g/∂x_i` by central differences.
pub fn partial<G>(g: &G, x: &PseudoVector, i: usize, cfg: &FdConfig) -> Result<Complex64>
where
    G: Fn(&PseudoVector) -> Result<Complex64>,
{
    let coarse = central_first(g, x, i, cfg.h)?;
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = central_first(g, x, i, cfg.h / 2.0)?;
    Ok(extrapolate(coarse, fine))
}

/// Coordinate gradient `∇g = (∂g/∂x₁, …, ∂g/∂x_n)`.
pub fn numeric_gradient<G>(g: G, x: &PseudoVector, cfg: &FdConfig) -> Result<Vec<Complex64>>
where
    G: Fn(&PseudoVector) -> Result<Complex64>,
{
    (0..x.dim()).map(|i| partial(&g, x, i, cfg)).collect()
}

/// `Σ sign(i)·∂²g/∂x_i²` for an arbitrary sign pattern.
pub(crate) fn laplacian_with_signs<G, S>(
    g: &G,
    x: &PseudoVector,
    cfg: &FdConfig,
    sign: S,
) -> Result<Complex64>
where
    G: Fn(&PseudoVector) -> Result<Complex64>,
    S: Fn(usize) -> f64,
{
    let center = g(x)?;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..x.dim() {
        let coarse = central_second(g, x, center, i, cfg.h)?;
        let d2 = if cfg.richardson {
            let fine = central_second(g, x, center, i, cfg.h / 2.0)?;
            extrapolate(coarse, fine)
        } else {
            coarse
        };
        total += d2 * sign(i);
    }
    Ok(total)
}

/// The flat Laplacian `Δ = |∇|²` of signature `(p,q)`.
pub fn numeric_laplacian<G>(g: G, x: &PseudoVector, cfg: &FdConfig) -> Result<Complex64>
where
    G: Fn(&PseudoVector) -> Result<Complex64>,
{
    let sig = x.signature();
    laplacian_with_signs(&g, x, cfg, |i| sig.sign(i))
}

/// Divergence `∇·F = Σ Q_ii ∂F_i/∂x_i` of a real vector field, the dot taken in
/// the indefinite product.
pub fn numeric_divergence<F>(field: F, x: &PseudoVector, cfg: &FdConfig) -> Result<f64>
where
    F: Fn(&PseudoVector) -> Result<Vec<f64>>,
{
    let n = x.dim();
    let sig = x.signature();
    let component = |i: usize, h: f64| -> Result<f64> {
        let plus = field(&x.offset(i, h)?)?;
        let minus = field(&x.offset(i, -h)?)?;
        if plus.len() != n || minus.len() != n {
            return Err(Error::Contract("vector field has wrong dimension".into()));
        }
        Ok(sig.sign(i) * (plus[i] - minus[i]) / (2.0 * h))
    };
    let mut total = 0.0;
    for i in 0..n {
        let coarse = component(i, cfg.h)?;
        total += if cfg.richardson {
            extrapolate(coarse, component(i, cfg.h / 2.0)?)
        } else {
            coarse
        };
    }
    Ok(total)
}

/// `Δ_S u = Δũ` restricted to the hyperboloid, `ũ(x) = u(x/|x|)`.
pub fn numeric_laplace_beltrami<U>(u: U, x: &PseudoVector, cfg: &FdConfig) -> Result<Complex64>
where
    U: Fn(&PseudoVector) -> Result<Complex64>,
{
    let ns = norm_sq(x);
    if (ns - 1.0).abs() > HYPERBOLOID_TOL || !(x.x1() > 0.0) {
        return Err(Error::Contract(format!(
            "point is not on the hyperboloid: |x|^2 = {ns}, x1 = {}",
            x.x1()
        )));
    }
    let zero = Degree::real(0.0)?;
    numeric_laplacian(|y| homogeneous_extension(&u, zero, y), x, cfg)
}

/// Eigenvalue `−ρ(ρ+n−2)` of `Δ_S` on spherical harmonics of degree ρ.
pub fn eigenvalue(rho: Degree, n: usize) -> Complex64 {
    let r = rho.value();
    -(r * (r + (n as f64 - 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hyperboloid_point, isotropic, sharp, Signature};
    use approx::assert_abs_diff_eq;

    fn sig12() -> Signature {
        Signature::new(1, 2).unwrap()
    }

    fn v(c: &[f64]) -> PseudoVector {
        PseudoVector::new(c.to_vec(), sig12()).unwrap()
    }

    fn wave(u: &[f64], re: f64, im: f64) -> PlaneWave {
        PlaneWave::new(isotropic(u).unwrap(), Degree::new(re, im).unwrap()).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn plane_wave_rejects_non_isotropic() {
        let rho = Degree::real(1.0).unwrap();
        assert!(PlaneWave::new(v(&[1.0, 0.5, 0.0]), rho).is_err());
        assert!(PlaneWave::new(v(&[-1.0, 1.0, 0.0]), rho).is_err());
    }

    #[test]
    fn plane_wave_examples() {
        let f0 = wave(&[1.0, 0.0], 0.0, 0.0);
        assert_eq!(f0.eval(&v(&[3.0, 1.0, 2.0])).unwrap(), c(1.0));

        let f1 = wave(&[1.0, 0.0], 1.0, 0.0);
        assert_abs_diff_eq!(
            f1.eval(&v(&[2.0, 1.0, 0.0])).unwrap().re,
            1.0,
            epsilon = 1e-15
        );

        // base 2 + √3; reference exp((0.5+i) ln(2+√3)) from mpmath at 30 digits.
        let f = wave(&[0.0, -1.0], 0.5, 1.0);
        let x = v(&[2.0, 0.0, 3f64.sqrt()]);
        let got = f.eval(&x).unwrap();
        assert_abs_diff_eq!(got.re, 0.485_128_963_050_507_1, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, 1.869_946_709_609_238_3, epsilon = 1e-14);
    }

    #[test]
    fn plane_wave_outside_region() {
        let f = wave(&[1.0, 0.0], 0.5, 0.0);
        let err = f.eval(&v(&[1.0, 2.0, 0.0])).unwrap_err();
        assert!(err.is_domain());
    }

    #[test]
    fn homogeneous_extension_examples() {
        let f = wave(&[1.0, 0.0], 0.3, 0.0);
        let x = hyperboloid_point(0.7, &[0.6, 0.8]).unwrap();
        let zero = Degree::real(0.0).unwrap();
        let direct = f.eval(&x).unwrap();
        let ext = homogeneous_extension(|y| f.eval(y), zero, &x).unwrap();
        assert_abs_diff_eq!((ext - direct).norm(), 0.0, epsilon = 1e-14);

        let three_e = v(&[3.0, 0.0, 0.0]);
        let two = Degree::real(2.0).unwrap();
        let got = homogeneous_extension(|_| Ok(c(1.0)), two, &three_e).unwrap();
        assert_abs_diff_eq!((got - c(9.0)).norm(), 0.0, epsilon = 1e-13);

        let rho = Degree::new(1.0, 1.0).unwrap();
        let g = PlaneWave::new(isotropic(&[1.0, 0.0]).unwrap(), rho).unwrap();
        let x = hyperboloid_point(1.0, &[1.0, 0.0])
            .unwrap()
            .scaled(2.0)
            .unwrap();
        let ext = homogeneous_extension(|y| g.eval(y), rho, &x).unwrap();
        let direct = g.eval(&x).unwrap();
        assert!((ext - direct).norm() <= 1e-13 * direct.norm());
    }

    #[test]
    fn homogeneous_extension_domain() {
        let zero = Degree::real(0.0).unwrap();
        let light = v(&[1.0, 1.0, 0.0]);
        assert!(homogeneous_extension(|_| Ok(c(1.0)), zero, &light).is_err());
        let lower = v(&[-2.0, 0.0, 0.0]);
        assert!(homogeneous_extension(|_| Ok(c(1.0)), zero, &lower)
            .unwrap_err()
            .is_domain());
    }

    #[test]
    fn fd_config_bounds() {
        assert!(FdConfig::new(1e-7, true).is_err());
        assert!(FdConfig::new(0.2, true).is_err());
        assert!(FdConfig::new(1e-3, false).is_ok());
    }

    #[test]
    fn gradient_examples() {
        let cfg = FdConfig::default();
        let x = v(&[2.0, 1.0, 0.0]);
        let grad = numeric_gradient(|y| Ok(c(y.x1())), &x, &cfg).unwrap();
        for (gi, ei) in grad.iter().zip([1.0, 0.0, 0.0]) {
            assert_abs_diff_eq!((gi - c(ei)).norm(), 0.0, epsilon = 1e-10);
        }

        let grad = numeric_gradient(|y| norm(y).map(c), &x, &cfg).unwrap();
        let s3 = 3f64.sqrt();
        for (gi, ei) in grad.iter().zip([2.0 / s3, -1.0 / s3, 0.0]) {
            assert_abs_diff_eq!((gi - c(ei)).norm(), 0.0, epsilon = 1e-10);
        }

        let grad = numeric_gradient(|y| norm(y).map(|r| c(r.powi(3))), &x, &cfg).unwrap();
        for (gi, ei) in grad.iter().zip([6.0 * s3, -3.0 * s3, 0.0]) {
            assert_abs_diff_eq!((gi - c(ei)).norm(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn laplacian_examples() {
        let cfg = FdConfig::default();
        let x = v(&[1.3, 0.4, -0.2]);
        let l = numeric_laplacian(|y| Ok(c(y.x1() * y.x1())), &x, &cfg).unwrap();
        assert_abs_diff_eq!((l - c(2.0)).norm(), 0.0, epsilon = 1e-6);
        let l = numeric_laplacian(|y| Ok(c(y.coords()[1].powi(2))), &x, &cfg).unwrap();
        assert_abs_diff_eq!((l - c(-2.0)).norm(), 0.0, epsilon = 1e-6);

        let f = wave(&[0.6, -0.8], 1.5, -0.7);
        let cfg = FdConfig::new(1e-2, true).unwrap();
        let x = hyperboloid_point(0.4, &[0.0, 1.0]).unwrap();
        let l = numeric_laplacian(|y| f.eval(y), &x, &cfg).unwrap();
        assert!(l.norm() < 1e-8, "laplacian of plane wave = {l}");
    }

    #[test]
    fn laplacian_without_richardson_is_second_order() {
        let f = wave(&[0.6, 0.8], 2.5, 0.0);
        let x = hyperboloid_point(0.3, &[0.0, 1.0]).unwrap();
        let coarse = FdConfig::new(1e-2, false).unwrap();
        let fine = FdConfig::new(5e-3, false).unwrap();
        let a = numeric_laplacian(|y| f.eval(y), &x, &coarse)
            .unwrap()
            .norm();
        let b = numeric_laplacian(|y| f.eval(y), &x, &fine).unwrap().norm();
        let ratio = a / b;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn divergence_of_sharp_is_dimension() {
        let cfg = FdConfig::default();
        let x = v(&[1.7, 0.3, -0.9]);
        let div = numeric_divergence(|y| Ok(sharp(y).coords().to_vec()), &x, &cfg).unwrap();
        assert_abs_diff_eq!(div, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn laplace_beltrami_examples() {
        let cfg = FdConfig::new(1e-3, true).unwrap();
        let x = hyperboloid_point(0.8, &[0.6, 0.8]).unwrap();
        let lb = numeric_laplace_beltrami(|_| Ok(c(1.0)), &x, &cfg).unwrap();
        assert!(lb.norm() < 1e-9);

        let f = wave(&[1.0, 0.0], 1.0, 0.0);
        let lb = numeric_laplace_beltrami(|y| f.eval(y), &x, &cfg).unwrap();
        let u = f.eval(&x).unwrap();
        assert!((lb + u * 2.0).norm() < 1e-6 * (1.0 + u.norm()));

        let s = 1.0 / 3f64.sqrt();
        let f = wave(&[s, s, s], 0.3, 0.0);
        let x = hyperboloid_point(0.5, &[0.0, 0.6, 0.8]).unwrap();
        let lb = numeric_laplace_beltrami(|y| f.eval(y), &x, &cfg).unwrap();
        let u = f.eval(&x).unwrap();
        assert!((lb + u * (0.3 * 2.3)).norm() < 1e-6 * (1.0 + u.norm()));
    }

    #[test]
    fn laplace_beltrami_requires_hyperboloid() {
        let cfg = FdConfig::default();
        let off = v(&[2.0, 0.0, 0.0]);
        assert!(matches!(
            numeric_laplace_beltrami(|_| Ok(c(1.0)), &off, &cfg),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        for n in 2..7 {
            assert_eq!(eigenvalue(Degree::real(0.0).unwrap(), n), c(0.0));
        }
        assert_eq!(eigenvalue(Degree::real(1.0).unwrap(), 3), c(-2.0));
        let r0 = Degree::new(0.7, 0.2).unwrap();
        let a = eigenvalue(r0, 4);
        let b = eigenvalue(r0.reflected(4), 4);
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
    }
}
