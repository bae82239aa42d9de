use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Homogeneity degree ρ, an arbitrary finite complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct Degree(Complex64);

impl Degree {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::try_from(Complex64::new(re, im))
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(re, 0.0)
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    /// The partner degree `2 − n − ρ` sharing the eigenvalue `−ρ(ρ+n−2)`.
    pub fn reflected(self, n: usize) -> Self {
        Degree(Complex64::new(2.0 - n as f64, 0.0) - self.0)
    }
}

impl TryFrom<Complex64> for Degree {
    type Error = Error;

    fn try_from(z: Complex64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(Degree(z))
        } else {
            Err(Error::Contract(format!("degree must be finite, got {z}")))
        }
    }
}

impl From<Degree> for Complex64 {
    fn from(d: Degree) -> Self {
        d.0
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.0.re, self.0.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (and `i`, `-i`). Decimal point is always `.`.
impl FromStr for Degree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Contract(format!("cannot parse complex degree {s:?}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        let parse_real = |r: &str| -> Result<f64> {
            // Rust's float parser accepts "inf"/"nan"; finiteness is enforced below.
            r.parse::<f64>().map_err(|_| bad())
        };
        let Some(body) = t.strip_suffix(['i', 'j']) else {
            return Degree::real(parse_real(&t)?);
        };
        // Split at the last sign that is not a leading sign or an exponent sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| {
            (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
        });
        let (re_part, im_part) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let re = if re_part.is_empty() {
            0.0
        } else {
            parse_real(re_part)?
        };
        let im = match im_part {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => parse_real(other)?,
        };
        Degree::new(re, im)
    }
}
