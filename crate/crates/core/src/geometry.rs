//! Indefinite-signature linear algebra on ℝ^{p,q}.
//!
//! The quadratic form is kept as a sign pattern: the first `p` coordinates
//! carry `+1`, the remaining `q` carry `-1`. No matrix is ever stored.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the Euclidean length of unit directions.
pub const UNIT_TOL: f64 = 1e-12;

/// Tolerance on `RᵀR = I` for K-rotations.
pub const ORTHO_TOL: f64 = 1e-10;

/// Largest admissible rapidity for [`hyperboloid_point`]; `cosh` overflows near 710.
pub const MAX_RAPIDITY: f64 = 700.0;

/// Signature `(p, q)` of the form `x₁y₁ + … + x_p y_p − x_{p+1}y_{p+1} − … − x_n y_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    p: usize,
    q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Contract(format!(
                "signature ({p},{q}) needs p >= 1 and q >= 1"
            )));
        }
        Ok(Self { p, q })
    }

    /// The Lorentzian signature `(1, q)` of the hyperboloid `S^{1,q}`.
    pub fn lorentzian(q: usize) -> Result<Self> {
        Self::new(1, q)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Ambient dimension `n = p + q`.
    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// Diagonal entry `Q_ii` of the form (0-based index).
    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        if i < self.p {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// A vector of ℝ^{p,q}: finite coordinates tagged with their signature.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoVector {
    coords: Vec<f64>,
    sig: Signature,
}

impl PseudoVector {
    pub fn new(coords: Vec<f64>, sig: Signature) -> Result<Self> {
        if coords.len() != sig.n() {
            return Err(Error::Contract(format!(
                "{} coordinates supplied for signature {sig}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Contract(format!("non-finite coordinate {bad}")));
        }
        Ok(Self { coords, sig })
    }

    /// The base point `e = (1, 0, …, 0)`.
    pub fn base_point(sig: Signature) -> Self {
        let mut coords = vec![0.0; sig.n()];
        coords[0] = 1.0;
        Self { coords, sig }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// First coordinate `x₁`.
    pub fn x1(&self) -> f64 {
        self.coords[0]
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.coords.iter().map(|c| lambda * c).collect(), self.sig)
    }

    /// `self + delta·e_i`, used by finite-difference stencils.
    pub fn offset(&self, i: usize, delta: f64) -> Result<Self> {
        let mut coords = self.coords.clone();
        coords[i] += delta;
        Self::new(coords, self.sig)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        same_signature(self, other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::new(coords, self.sig)
    }
}

fn same_signature(x: &PseudoVector, y: &PseudoVector) -> Result<()> {
    if x.sig != y.sig {
        return Err(Error::SignatureMismatch(x.sig, y.sig));
    }
    Ok(())
}

/// Indefinite scalar product `xᵗ Q y`.
pub fn dot(x: &PseudoVector, y: &PseudoVector) -> Result<f64> {
    same_signature(x, y)?;
    let p = x.sig.p;
    let plus: f64 = x.coords[..p]
        .iter()
        .zip(&y.coords[..p])
        .map(|(a, b)| a * b)
        .sum();
    let minus: f64 = x.coords[p..]
        .iter()
        .zip(&y.coords[p..])
        .map(|(a, b)| a * b)
        .sum();
    Ok(plus - minus)
}

/// `|x|² = x·x`; may be negative or zero.
pub fn norm_sq(x: &PseudoVector) -> f64 {
    let p = x.sig.p;
    let plus: f64 = x.coords[..p].iter().map(|a| a * a).sum();
    let minus: f64 = x.coords[p..].iter().map(|a| a * a).sum();
    plus - minus
}

/// Positive square root of `|x|²`, defined on the positive cone only.
pub fn norm(x: &PseudoVector) -> Result<f64> {
    let s = norm_sq(x);
    if s > 0.0 {
        Ok(s.sqrt())
    } else {
        Err(Error::Domain(format!("not in positive cone: |x|^2 = {s}")))
    }
}

/// `x^# = Qx`: negates the last `q` coordinates.
pub fn sharp(x: &PseudoVector) -> PseudoVector {
    let sig = x.sig;
    let coords = x
        .coords
        .iter()
        .enumerate()
        .map(|(i, c)| sig.sign(i) * c)
        .collect();
    PseudoVector { coords, sig }
}

fn check_unit(v: &[f64], what: &str) -> Result<()> {
    let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !len.is_finite() || (len - 1.0).abs() > UNIT_TOL {
        return Err(Error::Contract(format!(
            "{what} must have unit Euclidean length, got {len}"
        )));
    }
    Ok(())
}

/// `(cosh t, sinh t·ω)` on the upper sheet `S^{1,q}`.
pub fn hyperboloid_point(t: f64, omega: &[f64]) -> Result<PseudoVector> {
    check_unit(omega, "direction omega")?;
    if !(0.0..=MAX_RAPIDITY).contains(&t) {
        return Err(Error::Domain(format!(
            "rapidity t = {t} outside [0, {MAX_RAPIDITY}]"
        )));
    }
    let sig = Signature::lorentzian(omega.len())?;
    let (c, s) = (t.cosh(), t.sinh());
    let mut coords = Vec::with_capacity(sig.n());
    coords.push(c);
    coords.extend(omega.iter().map(|w| s * w));
    PseudoVector::new(coords, sig)
}

/// Isotropic vector `(1, u)` on the forward light cone, normalized to `c₁ = 1`.
pub fn isotropic(u: &[f64]) -> Result<PseudoVector> {
    check_unit(u, "direction u")?;
    let sig = Signature::lorentzian(u.len())?;
    let mut coords = Vec::with_capacity(sig.n());
    coords.push(1.0);
    coords.extend_from_slice(u);
    PseudoVector::new(coords, sig)
}

/// Applies `k = diag(1, R)` from the stabilizer `K ≅ SO(q)` of `e`.
pub fn k_rotate(x: &PseudoVector, r: &DMatrix<f64>) -> Result<PseudoVector> {
    let sig = x.sig;
    if sig.p != 1 {
        return Err(Error::Contract(format!(
            "K-rotations act on signature (1,q), got {sig}"
        )));
    }
    let q = sig.q;
    if r.nrows() != q || r.ncols() != q {
        return Err(Error::Contract(format!(
            "rotation is {}x{}, expected {q}x{q}",
            r.nrows(),
            r.ncols()
        )));
    }
    let gram = r.transpose() * r;
    let defect = (gram - DMatrix::<f64>::identity(q, q)).amax();
    if !(defect <= ORTHO_TOL) {
        return Err(Error::Contract(format!(
            "rotation is not orthogonal (max |RᵀR - I| = {defect:e})"
        )));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > 1e-8 {
        return Err(Error::Contract(format!("rotation has determinant {det}")));
    }
    let tail = DMatrix::from_column_slice(q, 1, &x.coords[1..]);
    let rotated = r * tail;
    let mut coords = Vec::with_capacity(sig.n());
    coords.push(x.coords[0]);
    coords.extend(rotated.iter().copied());
    PseudoVector::new(coords, sig)
}

/// Uniform direction on the unit sphere `S^{q-1}` (normalized Gaussian).
pub fn random_direction<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len > 1e-8 {
            return v.into_iter().map(|a| a / len).collect();
        }
    }
}

/// Haar-random element of `SO(q)` via QR of a Gaussian matrix.
pub fn random_rotation<R: Rng + ?Sized>(q: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(q, q, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut m = qr.q();
    let r = qr.r();
    for j in 0..q {
        if r[(j, j)] < 0.0 {
            m.column_mut(j).neg_mut();
        }
    }
    if m.determinant() < 0.0 {
        m.column_mut(0).neg_mut();
    }
    m
}
