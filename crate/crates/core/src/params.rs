use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient dimension `n`, signed mean curvature `h` (trace convention) and
/// integration constant `C`.
///
/// One sign convention is used throughout: `h` is signed and the numerator of
/// the phase rate is `R(s) = C + h/(n-1) sin^{n-1}(s)`. The pair `(h, C)` and
/// `(-h, -C)` describe mirror images of the same curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CmcParams {
    pub n: u32,
    pub h: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl CmcParams {
    pub fn new(n: u32, h: f64, c: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParams(format!("n must be at least 3, got {n}")));
        }
        if !h.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParams(format!("h and C must be finite, got h = {h}, C = {c}")));
        }
        Ok(Self { n, h, c })
    }

    /// `(n, -h, -C)`: the mirrored curve.
    pub fn mirrored(&self) -> Self {
        Self { n: self.n, h: -self.h, c: -self.c }
    }

    /// `n - 1` as a float, the exponent of the `sin` term in `R`.
    pub(crate) fn k(&self) -> f64 {
        f64::from(self.n - 1)
    }

    /// `C + h/(n-1)`, the value of `R` at the pole `s = π/2`.
    pub fn pole_value(&self) -> f64 {
        self.c + self.h / self.k()
    }

    /// True when `R` vanishes at the pole: the flower parameter (or the
    /// totally geodesic case when `h = 0`).
    pub fn is_pole_parameter(&self) -> bool {
        let scale = self.c.abs() + (self.h / self.k()).abs();
        self.pole_value().abs() <= 8.0 * f64::EPSILON * scale
    }

    pub fn is_flower(&self) -> bool {
        self.h != 0.0 && self.is_pole_parameter()
    }
}
