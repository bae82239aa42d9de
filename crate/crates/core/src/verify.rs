//! Seeded verification suites.
//!
//! Each suite evaluates a family of identities numerically and records, per
//! check, the measured residual next to the bound it is judged against. The
//! bounds live in [`tolerance_table`] and are copied into every report.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::geometry::{
    hyperboloid_point, isotropic, norm, random_direction, PseudoVector, Signature,
};
use crate::harmonics::{
    eigenvalue, homogeneous_extension, laplacian_with_signs, numeric_divergence, numeric_gradient,
    real_power, FdConfig, PlaneWave,
};
use crate::ode_oracle::{frobenius_eval, residual_of_evaluator, OdeParams};
use crate::quadrature::QuadratureConfig;
use crate::spherical::{k_average, k_average_mc, legendre_p};

pub const LEMMA1_POINTS: usize = 20;
pub const LEMMA1_STEP: f64 = 1e-4;
pub const LEMMA1_TOL: f64 = 1e-6;
pub const DIVERGENCE_TOL: f64 = 1e-8;

pub const HARMONICITY_CASES: usize = 50;
/// Relative to `c·x`; see [`harmonicity_scale`].
pub const HARMONICITY_STEP: f64 = 1.5e-2;
pub const HARMONICITY_CONST: f64 = 10.0;
pub const HARMONICITY_MAX_RHO: f64 = 5.0;
pub const HARMONICITY_MAX_RAPIDITY: f64 = 1.0;

pub const EIGEN_STEP: f64 = 1e-3;
pub const EIGEN_TOL: f64 = 1e-5;
pub const EIGEN_POINTS: usize = 5;

pub const ODE_CASES: usize = 12;
pub const ODE_STEP: f64 = 1e-3;
pub const ODE_TOL: f64 = 1e-6;

pub const SERIES_TOL: f64 = 1e-9;
pub const SERIES_TERMS: usize = 10_000;
pub const SERIES_TRUNC: f64 = 1e-17;
pub const MC_SAMPLES: usize = 1_000_000;
pub const MC_SIGMAS: f64 = 4.0;
pub const ROUTE_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Bounds used by the suites, keyed by check family.
pub fn tolerance_table() -> BTreeMap<String, f64> {
    [
        ("lemma1.abs", LEMMA1_TOL),
        ("lemma1.divergence_abs", DIVERGENCE_TOL),
        ("lemma1.fd_step", LEMMA1_STEP),
        ("harmonicity.constant", HARMONICITY_CONST),
        ("harmonicity.fd_step_rel", HARMONICITY_STEP),
        ("eigenvalue.rel_plus_one", EIGEN_TOL),
        ("eigenvalue.fd_step", EIGEN_STEP),
        ("ode.residual_over_scale", ODE_TOL),
        ("ode.fd_step", ODE_STEP),
        ("oracle.series_rel", SERIES_TOL),
        ("oracle.mc_sigmas", MC_SIGMAS),
        ("oracle.route_rel", ROUTE_TOL),
        ("symmetry.rel", SYMMETRY_TOL),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma1,
    Harmonicity,
    Eigenvalue,
    Ode,
    Oracle,
    Symmetry,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 6] = [
        Suite::Lemma1,
        Suite::Harmonicity,
        Suite::Eigenvalue,
        Suite::Ode,
        Suite::Oracle,
        Suite::Symmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Harmonicity => "harmonicity",
            Suite::Eigenvalue => "eigenvalue",
            Suite::Ode => "ode",
            Suite::Oracle => "oracle",
            Suite::Symmetry => "symmetry",
            Suite::All => "all",
        }
    }

    fn salt(self) -> u64 {
        match self {
            Suite::Lemma1 => 0x11,
            Suite::Harmonicity => 0x22,
            Suite::Eigenvalue => 0x33,
            Suite::Ode => 0x44,
            Suite::Oracle => 0x55,
            Suite::Symmetry => 0x66,
            Suite::All => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::INDIVIDUAL
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Contract(format!("unknown suite {s:?}")))
    }
}

/// Deliberate defects for negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// The last diagonal entry of `Q` gets the wrong sign in `x^#` and `Δ`.
    FlipLastSign,
}

impl FromStr for Fault {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flip-last-sign" => Ok(Fault::FlipLastSign),
            other => Err(Error::Contract(format!("unknown fault {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub mc_samples: usize,
}

impl VerifyOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            fault: None,
            mc_samples: MC_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    /// `None` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub bound: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub suite: Suite,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub params: ReportParams,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Recomputes the summary from the records (used after deserializing).
    pub fn is_consistent(&self) -> bool {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        self.summary
            == Summary {
                total: self.checks.len(),
                passed,
                failed: self.checks.len() - passed,
            }
            && self
                .checks
                .iter()
                .all(|c| c.pass == c.residual.is_some_and(|r| r <= c.bound))
    }
}

/// Runs `suite` (every suite for [`Suite::All`]) deterministically from `opts.seed`.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> VerifyReport {
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::INDIVIDUAL.to_vec(),
        one => vec![one],
    };
    let mut checks = Vec::new();
    for s in suites {
        let mut ctx = Ctx {
            rng: ChaCha8Rng::seed_from_u64(opts.seed ^ (s.salt() << 56)),
            fault: opts.fault,
            checks: Vec::new(),
        };
        match s {
            Suite::Lemma1 => lemma1(&mut ctx),
            Suite::Harmonicity => harmonicity(&mut ctx),
            Suite::Eigenvalue => eigenvalue_suite(&mut ctx),
            Suite::Ode => ode(&mut ctx),
            Suite::Oracle => oracle(&mut ctx, opts.mc_samples),
            Suite::Symmetry => symmetry(&mut ctx),
            Suite::All => unreachable!(),
        }
        checks.extend(ctx.checks);
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    VerifyReport {
        params: ReportParams {
            suite,
            seed: opts.seed,
            fault: opts.fault,
            tolerances: tolerance_table(),
        },
        summary: Summary {
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
        },
        checks,
    }
}

struct Ctx {
    rng: ChaCha8Rng,
    fault: Option<Fault>,
    checks: Vec<CheckRecord>,
}

impl Ctx {
    fn record(&mut self, name: &str, inputs: &[(&str, f64)], residual: Result<f64>, bound: f64) {
        let (residual, error) = match residual {
            Ok(r) if r.is_finite() => (Some(r), None),
            Ok(r) => (None, Some(format!("non-finite residual {r}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        self.checks.push(CheckRecord {
            name: name.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            pass: residual.is_some_and(|r| r <= bound),
            residual,
            bound,
            error,
        });
    }

    fn sign(&self, sig: Signature, i: usize) -> f64 {
        match self.fault {
            Some(Fault::FlipLastSign) if i + 1 == sig.n() => -sig.sign(i),
            _ => sig.sign(i),
        }
    }

    fn sharp(&self, x: &PseudoVector) -> Vec<f64> {
        let sig = x.signature();
        x.coords()
            .iter()
            .enumerate()
            .map(|(i, c)| self.sign(sig, i) * c)
            .collect()
    }

    fn laplacian<G>(&self, g: G, x: &PseudoVector, cfg: &FdConfig) -> Result<Complex64>
    where
        G: Fn(&PseudoVector) -> Result<Complex64>,
    {
        let sig = x.signature();
        laplacian_with_signs(&g, x, cfg, |i| self.sign(sig, i))
    }

    fn laplace_beltrami<U>(&self, u: U, x: &PseudoVector, cfg: &FdConfig) -> Result<Complex64>
    where
        U: Fn(&PseudoVector) -> Result<Complex64>,
    {
        let zero = Degree::real(0.0)?;
        self.laplacian(|y| homogeneous_extension(&u, zero, y), x, cfg)
    }

    fn disk(&mut self, radius: f64) -> Degree {
        let r = radius * self.rng.gen::<f64>().sqrt();
        let a = self.rng.gen_range(0.0..std::f64::consts::TAU);
        Degree::new(r * a.cos(), r * a.sin()).expect("finite degree")
    }

    fn hyperboloid(&mut self, q: usize, max_t: f64) -> PseudoVector {
        let t = self.rng.gen_range(0.0..=max_t);
        let omega = random_direction(q, &mut self.rng);
        hyperboloid_point(t, &omega).expect("valid hyperboloid sample")
    }

    /// Random point of the positive cone with `|x|² ≥ 1/4` and `x₁ > 1/5`.
    fn cone_point(&mut self) -> PseudoVector {
        let p = self.rng.gen_range(1..=2);
        let q = self.rng.gen_range(1..=3);
        let sig = Signature::new(p, q).expect("valid signature");
        loop {
            let coords: Vec<f64> = (0..sig.n())
                .map(|_| self.rng.gen_range(-2.0..2.0))
                .collect();
            let x = PseudoVector::new(coords, sig).expect("finite coordinates");
            if crate::geometry::norm_sq(&x) >= 0.25 && x.x1() > 0.2 {
                return x;
            }
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs_diff(a: &[Complex64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn lemma1(ctx: &mut Ctx) {
    let cfg = FdConfig::new(LEMMA1_STEP, true).expect("valid step");
    for k in 0..LEMMA1_POINTS {
        let x = ctx.cone_point();
        let sig = x.signature();
        let base = [
            ("point", k as f64),
            ("p", sig.p() as f64),
            ("q", sig.q() as f64),
        ];
        let r = norm(&x).expect("cone point");
        let sharp = ctx.sharp(&x);

        let res = numeric_gradient(|y| norm(y).map(c), &x, &cfg).map(|g| {
            let expected: Vec<f64> = sharp.iter().map(|s| s / r).collect();
            max_abs_diff(&g, &expected)
        });
        ctx.record("lemma1.grad_norm", &base, res, LEMMA1_TOL);

        let rho = ctx.disk(2.0);
        let res = numeric_gradient(|y| norm(y).map(|ry| real_power(ry, rho.value())), &x, &cfg)
            .map(|g| {
                let factor = rho.value() * real_power(r, rho.value() - 2.0);
                g.iter()
                    .zip(&sharp)
                    .map(|(gi, s)| (gi - factor * s).norm())
                    .fold(0.0, f64::max)
            });
        let mut inputs = base.to_vec();
        inputs.extend([("rho_re", rho.re()), ("rho_im", rho.im())]);
        ctx.record("lemma1.grad_norm_power", &inputs, res, LEMMA1_TOL);

        let sharp_vec = PseudoVector::new(sharp.clone(), sig).expect("finite");
        let res = norm(&sharp_vec).map(|rs| (rs - r).abs());
        ctx.record("lemma1.norm_sharp", &base, res, LEMMA1_TOL);

        // Degree-zero extension of a smooth function of the normalized point.
        let u = |y: &PseudoVector| -> Result<Complex64> {
            let r = norm(y)?;
            let z = y.coords();
            let last = z[z.len() - 1] / r;
            Ok(Complex64::new(
                (0.3 * z[0] / r).exp() * last.cos(),
                z[0] * last / r,
            ))
        };
        let res = numeric_gradient(u, &x, &cfg).map(|g| {
            g.iter()
                .zip(&sharp)
                .enumerate()
                .map(|(i, (gi, s))| gi * (sig.sign(i) * s))
                .sum::<Complex64>()
                .norm()
        });
        ctx.record("lemma1.sharp_dot_grad_extension", &base, res, LEMMA1_TOL);

        let n = sig.n() as f64;
        let field = |y: &PseudoVector| Ok(ctx.sharp(y));
        let res = numeric_divergence(field, &x, &cfg).map(|d| (d - n).abs());
        ctx.record("lemma1.div_sharp", &base, res, DIVERGENCE_TOL);
    }
}

/// `|ρ(ρ−1)|·|c·x|^{Re ρ − 2} + 1`
pub fn harmonicity_scale(rho: Degree, base: f64) -> f64 {
    let z = rho.value();
    (z * (z - 1.0)).norm() * base.powf(z.re - 2.0) + 1.0
}

/// The stencil step is `HARMONICITY_STEP · (c·x)`: the distance to the
/// singular hyperplane `c·x = 0` is the length scale of the plane wave.
fn harmonicity(ctx: &mut Ctx) {
    let h = HARMONICITY_STEP;
    for k in 0..HARMONICITY_CASES {
        let q = [2, 3, 5][k % 3];
        let rho = ctx.disk(HARMONICITY_MAX_RHO);
        let lambda = ctx.rng.gen_range(0.5..=2.0);
        let x = ctx
            .hyperboloid(q, HARMONICITY_MAX_RAPIDITY)
            .scaled(lambda)
            .expect("finite");
        let u = random_direction(q, &mut ctx.rng);
        let wave = PlaneWave::new(isotropic(&u).expect("unit"), rho).expect("isotropic");
        let base = crate::geometry::dot(wave.direction(), &x).expect("same signature");
        let bound = HARMONICITY_CONST * h.powi(4) * harmonicity_scale(rho, base);
        let res = FdConfig::new(h * base, true)
            .and_then(|cfg| ctx.laplacian(|y| wave.eval(y), &x, &cfg))
            .map(|l| l.norm());
        ctx.record(
            "harmonicity.plane_wave",
            &[
                ("q", q as f64),
                ("rho_re", rho.re()),
                ("rho_im", rho.im()),
                ("lambda", lambda),
                ("c_dot_x", base),
            ],
            res,
            bound,
        );
    }
}

fn eigenvalue_suite(ctx: &mut Ctx) {
    let cfg = FdConfig::new(EIGEN_STEP, true).expect("valid step");
    let quad = QuadratureConfig::default();
    for q in [2, 3, 4] {
        let n = q + 1;
        for kind in ["plane_wave", "k_average"] {
            for _ in 0..2 {
                let rho = ctx.disk(3.0);
                let wave = PlaneWave::new(
                    isotropic(&random_direction(q, &mut ctx.rng)).expect("unit"),
                    rho,
                )
                .expect("isotropic");
                let spherical = |y: &PseudoVector| -> Result<Complex64> {
                    // Points of the sheet have x₁ ≥ 1; rounding can dip below by an ulp.
                    k_average(rho, q, y.x1().max(1.0), &quad).map(|e| e.value)
                };
                let u = |y: &PseudoVector| -> Result<Complex64> {
                    if kind == "plane_wave" {
                        wave.eval(y)
                    } else {
                        spherical(y)
                    }
                };
                let lam = eigenvalue(rho, n);
                for _ in 0..EIGEN_POINTS {
                    let x = ctx.hyperboloid(q, 1.5);
                    let res = u(&x).and_then(|ux| {
                        let lb = ctx.laplace_beltrami(u, &x, &cfg)?;
                        Ok((lb - lam * ux).norm() / (1.0 + ux.norm()))
                    });
                    ctx.record(
                        &format!("eigenvalue.{kind}"),
                        &[
                            ("q", q as f64),
                            ("rho_re", rho.re()),
                            ("rho_im", rho.im()),
                            ("x1", x.x1()),
                        ],
                        res,
                        EIGEN_TOL,
                    );
                }
            }
        }
    }
}

fn ode(ctx: &mut Ctx) {
    let cfg = FdConfig::new(ODE_STEP, true).expect("valid step");
    let quad = QuadratureConfig::default();
    let ratio = |r: Result<(Complex64, f64)>| r.map(|(res, scale)| res.norm() / scale);

    for _ in 0..ODE_CASES {
        let rho = ctx.disk(4.0);
        let x = ctx.rng.gen_range(1.1..=10.0);
        let params = OdeParams::new(rho, 3).expect("n = 3");
        let res = ratio(residual_of_evaluator(
            |t| legendre_p(rho, t, &quad).map(|e| e.value),
            x,
            &params,
            &cfg,
        ));
        let inputs = [("rho_re", rho.re()), ("rho_im", rho.im()), ("x", x)];
        ctx.record("ode.legendre_p", &inputs, res, ODE_TOL);
    }
    for q in [3, 4, 6] {
        for _ in 0..3 {
            let rho = ctx.disk(3.0);
            let x = ctx.rng.gen_range(1.1..=6.0);
            let params = OdeParams::for_q(rho, q).expect("n >= 3");
            let res = ratio(residual_of_evaluator(
                |t| k_average(rho, q, t, &quad).map(|e| e.value),
                x,
                &params,
                &cfg,
            ));
            let inputs = [
                ("q", q as f64),
                ("rho_re", rho.re()),
                ("rho_im", rho.im()),
                ("x1", x),
            ];
            ctx.record("ode.k_average", &inputs, res, ODE_TOL);
        }
    }
    for q in [2, 3, 4] {
        let rho = ctx.disk(3.0);
        let x = ctx.rng.gen_range(1.05..=2.5);
        let params = OdeParams::for_q(rho, q).expect("n >= 3");
        let res = ratio(residual_of_evaluator(
            |t| frobenius_eval(&params, t, SERIES_TERMS, SERIES_TRUNC).map(|e| e.value),
            x,
            &params,
            &cfg,
        ));
        let inputs = [
            ("q", q as f64),
            ("rho_re", rho.re()),
            ("rho_im", rho.im()),
            ("x1", x),
        ];
        ctx.record("ode.frobenius", &inputs, res, ODE_TOL);
    }
}

fn oracle(ctx: &mut Ctx, mc_samples: usize) {
    let quad = QuadratureConfig::default();
    let degrees = [(0.5, 0.0), (-0.5, 0.0), (2.0, 0.0), (-2.7, 0.0), (1.0, 1.3)];
    for q in [2, 3, 4] {
        for &(re, im) in &degrees {
            let rho = Degree::new(re, im).expect("finite");
            let params = OdeParams::for_q(rho, q).expect("n >= 3");
            for x in [1.05, 1.5, 2.0, 2.5] {
                let res = (|| {
                    let series = frobenius_eval(&params, x, SERIES_TERMS, SERIES_TRUNC)?;
                    let quadrature = k_average(rho, q, x, &quad)?;
                    Ok(rel_diff(series.value, quadrature.value))
                })();
                ctx.record(
                    "oracle.series_vs_quadrature",
                    &[("q", q as f64), ("rho_re", re), ("rho_im", im), ("x1", x)],
                    res,
                    SERIES_TOL,
                );
            }
        }
    }

    for q in [2, 3, 5] {
        for rho in [Degree::real(1.7).expect("finite"), ctx.disk(2.0)] {
            let x = 2.0;
            let seed = ctx.rng.gen::<u64>();
            let res = (|| {
                let mc = k_average_mc(rho, q, x, mc_samples, seed)?;
                let quadrature = k_average(rho, q, x, &quad)?;
                Ok(mc.z_score(quadrature.value))
            })();
            ctx.record(
                "oracle.mc_vs_quadrature",
                &[
                    ("q", q as f64),
                    ("rho_re", rho.re()),
                    ("rho_im", rho.im()),
                    ("x1", x),
                    ("samples", mc_samples as f64),
                ],
                res,
                MC_SIGMAS,
            );
        }
    }

    for &(re, im) in &[(0.5, 0.0), (-0.5, 0.0), (2.0, 0.0), (1.0, 1.0)] {
        let rho = Degree::new(re, im).expect("finite");
        for x in [1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0] {
            let res = (|| {
                let a = legendre_p(rho, x, &quad)?;
                let b = k_average(rho, 2, x, &quad)?;
                Ok(rel_diff(a.value, b.value))
            })();
            ctx.record(
                "oracle.laplace_vs_k_average",
                &[("rho_re", re), ("rho_im", im), ("x", x)],
                res,
                ROUTE_TOL,
            );
        }
    }
}

fn symmetry(ctx: &mut Ctx) {
    let quad = QuadratureConfig::default();
    for n in [3usize, 4, 5] {
        let q = n - 1;
        for _ in 0..3 {
            let rho = ctx.disk(3.0);
            let partner = rho.reflected(n);
            for x in [1.5, 3.0, 6.0] {
                let res = (|| {
                    let a = k_average(rho, q, x, &quad)?;
                    let b = k_average(partner, q, x, &quad)?;
                    Ok(rel_diff(a.value, b.value))
                })();
                ctx.record(
                    "symmetry.reflected_degree",
                    &[
                        ("n", n as f64),
                        ("rho_re", rho.re()),
                        ("rho_im", rho.im()),
                        ("x1", x),
                    ],
                    res,
                    SYMMETRY_TOL,
                );
            }
        }
    }
}
