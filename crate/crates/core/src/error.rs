use thiserror::Error;

use crate::profile::DelaunayType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no admissible interval for n = {n}, h = {h}, C = {c}")]
    NoAdmissibleInterval { n: u32, h: f64, c: f64 },

    /// `D(s) <= 0`: the profile is not defined at `s`.
    #[error("s = {s} is outside the profile domain (D = {d:e})")]
    Domain { s: f64, d: f64 },

    /// The normal field degenerates where the numerator `R` vanishes.
    #[error("Theta vanishes at s = {s}")]
    ThetaZero { s: f64 },

    #[error("C = {c} outside the band [{lo}, {hi}]")]
    OutOfBand { c: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge (error estimate {err_est:e})")]
    NonConvergent { err_est: f64 },

    #[error("operation not supported for type {0:?}")]
    UnsupportedType(DelaunayType),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("curve is not closed (gap {gap:e})")]
    NotClosed { gap: f64 },

    #[error("mesh point within {dist:e} of the projection pole")]
    PoleCollision { dist: f64 },

    #[error("stencil needs {needed} samples, only {available} available")]
    StencilTooWide { needed: usize, available: usize },

    #[error("target width {target} outside the open range ({lo}, {hi})")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("empty curve")]
    EmptyCurve,

    #[error("parse error: {0}")]
    Parse(String),
}
