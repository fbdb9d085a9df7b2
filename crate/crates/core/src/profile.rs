//! Closed-form profile of the generating curve and the admissible domains.
//!
//! With `L(s) = cos s · sin^{n-2} s`, `R(s) = C + h/(n-1) · sin^{n-1} s` and
//! `D = L² - R²`, the squared azimuthal speed is `Θ = R² / D` and the phase
//! rate is `ds1/ds = R / (cos s · √D)`. The profile exists where `D > 0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CmcParams;
use crate::roots::bisect;
use crate::width::{flower_rate, EPS_POLE};

/// Number of scan points used to bracket the interval endpoints.
pub const SCAN_POINTS: usize = 4096;

/// Relative tolerance on the classification boundaries.
pub const BOUNDARY_RTOL: f64 = 1e-10;

/// `a/b` for the static product `a·S¹ × b·S^{n-2}` of mean curvature `h`.
pub fn equilibrium_ratio(n: u32, h: f64) -> f64 {
    let m = f64::from(n - 2);
    (h + (h * h + 4.0 * m).sqrt()) / (2.0 * m)
}

/// The contact latitude `s_h`, the unique root in `(0, π/2)` of
/// `-tan s + (n-2) cot s = h`.
///
/// `tan s_h` solves `x² + h x - (n-2) = 0`; its positive root is the inverse
/// of the equilibrium ratio, which is the cancellation-free form.
pub fn equilibrium_latitude(n: u32, h: f64) -> f64 {
    1f64.atan2(equilibrium_ratio(n, h))
}

/// `C_h = L(s_h) - h/(n-1) · sin^{n-1}(s_h)`, the constant at which the
/// graphs of `L` and `R` touch.
pub fn contact_constant(n: u32, h: f64) -> f64 {
    let s = equilibrium_latitude(n, h);
    envelope_l(s, n) - h / f64::from(n - 1) * s.sin().powi(n as i32 - 1)
}

pub fn envelope_l(s: f64, n: u32) -> f64 {
    s.cos() * s.sin().powi(n as i32 - 2)
}

pub fn rhs_r(s: f64, c: f64, h: f64, n: u32) -> f64 {
    Profile::from_raw(n, h, c, false).r(s)
}

pub fn denom_d(s: f64, p: &CmcParams) -> f64 {
    Profile::new(p).d(s)
}

/// `dD/ds = 2 L L' - 2 R R'` with `R' = h L`.
pub fn denom_d_derivative(s: f64, p: &CmcParams) -> f64 {
    let prof = Profile::new(p);
    let l = prof.l(s);
    let dl = s.sin().powi(p.n as i32 - 3) * (f64::from(p.n - 2) * s.cos().powi(2) - s.sin().powi(2));
    2.0 * l * dl - 2.0 * prof.r(s) * p.h * l
}

/// `1 - sin^k s` without cancellation near the pole.
pub(crate) fn one_minus_sin_pow(s: f64, k: f64) -> f64 {
    if s <= FRAC_PI_4 {
        1.0 - s.sin().powf(k)
    } else {
        let c = s.cos();
        let ln_sin = (-(c * c) / (1.0 + s.sin())).ln_1p();
        -(k * ln_sin).exp_m1()
    }
}

/// Evaluator for one parameter set. `R` is evaluated in the pole-centred
/// form `(C + h/k) - h/k · (1 - sin^k s)` on the upper half of the range so
/// that both `R` and `D` keep full relative accuracy near `s = π/2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Profile {
    pub n: u32,
    pub h: f64,
    pub c: f64,
    k: f64,
    pole_value: f64,
    pub pole: bool,
}

impl Profile {
    pub fn new(p: &CmcParams) -> Self {
        Self::from_raw(p.n, p.h, p.c, p.is_pole_parameter())
    }

    fn from_raw(n: u32, h: f64, c: f64, pole: bool) -> Self {
        let k = f64::from(n - 1);
        let pole_value = if pole { 0.0 } else { c + h / k };
        Self { n, h, c, k, pole_value, pole }
    }

    pub fn l(&self, s: f64) -> f64 {
        envelope_l(s, self.n)
    }

    pub fn r(&self, s: f64) -> f64 {
        if s <= FRAC_PI_4 {
            self.c + self.h / self.k * s.sin().powf(self.k)
        } else {
            self.pole_value - self.h / self.k * one_minus_sin_pow(s, self.k)
        }
    }

    /// `L - |R|`: positive exactly where `D > 0`.
    pub fn gap(&self, s: f64) -> f64 {
        self.l(s) - self.r(s).abs()
    }

    pub fn d(&self, s: f64) -> f64 {
        let l = self.l(s);
        let r = self.r(s).abs();
        (l - r) * (l + r)
    }

    /// Phase rate, `None` where `D <= 0`.
    pub fn rate(&self, s: f64) -> Option<f64> {
        if self.pole && self.h != 0.0 && FRAC_PI_2 - s < EPS_POLE {
            return Some(-self.h.signum() * flower_rate(s, self.n, self.h.abs()));
        }
        let d = self.d(s);
        if d > 0.0 {
            Some(self.r(s) / (s.cos() * d.sqrt()))
        } else {
            None
        }
    }

    /// Phase rate with the measure-zero rounding failures at the endpoints
    /// mapped to 0, for quadrature.
    pub fn rate_or_zero(&self, s: f64) -> f64 {
        self.rate(s).unwrap_or(0.0)
    }

    /// `(L', L'')`.
    pub fn l_derivs(&self, s: f64) -> (f64, f64) {
        let m = f64::from(self.n - 2);
        let (sn, cs) = s.sin_cos();
        let sm = sn.powi(self.n as i32 - 2);
        let d1 = sn.powi(self.n as i32 - 3) * (m * cs * cs - sn * sn);
        let first = if self.n == 3 { 0.0 } else { m * (m - 1.0) * sn.powi(self.n as i32 - 4) * cs.powi(3) };
        (d1, first - (3.0 * m + 1.0) * sm * cs)
    }

    /// Local model of `L - |R|` at a simple zero bracketed by the float `e`.
    pub fn endpoint_model(&self, e: f64, right: bool) -> EndpointModel {
        let sigma = self.r(e).signum();
        let (l1, l2) = self.l_derivs(e);
        let g1 = l1 - sigma * self.h * self.l(e);
        let g2 = l2 - sigma * self.h * l1;
        let delta = -self.gap(e) / g1;
        let (g1, g2) = if right { (-g1, 0.5 * g2) } else { (g1, 0.5 * g2) };
        EndpointModel { e, delta, g1, g2, right }
    }

    /// `ds1/ds · √d` at distance `d` inside the simple zero described by `m`.
    /// Close to the zero `L - |R|` is taken from the quadratic model, which
    /// avoids the rounding of `s` near the endpoint.
    pub fn scaled_rate_at_zero(&self, m: &EndpointModel, d: f64, threshold: f64) -> f64 {
        let s = m.point(d);
        let r = self.r(s);
        let l = self.l(s);
        let gap_over_d = if d < threshold { m.g1 + m.g2 * d } else { (l - r.abs()) / d };
        if !(gap_over_d > 0.0) {
            return 0.0;
        }
        r / (s.cos() * (gap_over_d * (l + r.abs())).sqrt())
    }
}

/// Simple zero of `D` at `z = e + delta`, with `L - |R| ≈ g1 d + g2 d²` at
/// distance `d` inside the interval.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EndpointModel {
    pub e: f64,
    pub delta: f64,
    pub g1: f64,
    pub g2: f64,
    pub right: bool,
}

impl EndpointModel {
    /// The float nearest to the point at distance `d` inside the zero.
    pub fn point(&self, d: f64) -> f64 {
        if self.right {
            self.e + (self.delta - d)
        } else {
            self.e + (self.delta + d)
        }
    }

    /// Distance from the zero to the float `s`, accurate to rounding in `d`.
    pub fn distance(&self, s: f64) -> f64 {
        let d = if self.right { (self.e - s) + self.delta } else { (s - self.e) - self.delta };
        d.max(0.0)
    }
}

/// `Θ = R² / D`. Exactly 0 where `R = 0`.
pub fn theta(s: f64, p: &CmcParams) -> Result<f64> {
    let prof = Profile::new(p);
    let d = prof.d(s);
    if !(d > 0.0) {
        return Err(Error::Domain { s, d });
    }
    let r = prof.r(s);
    Ok(r * r / d)
}

/// Signed phase rate `ds1/ds = R / (cos s · √D)`. Its sign is the sign of
/// `R`, which realizes the alternating choice across the zero `ŝ` of `R`.
/// For the flower parameter, inputs within [`EPS_POLE`] of the pole go
/// through the regularized [`flower_rate`].
pub fn s1_rate(s: f64, p: &CmcParams) -> Result<f64> {
    let prof = Profile::new(p);
    prof.rate(s).ok_or(Error::Domain { s, d: prof.d(s) })
}

/// The contact data of a given `(n, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalConstants {
    /// Maximizer of `L`, `arctan √(n-2)`.
    pub s0: f64,
    /// Contact latitude for `+h`.
    pub sh: f64,
    /// Contact latitude for `-h`.
    pub sh_neg: f64,
    /// `C_h`.
    pub ch: f64,
    /// `C_{-h}`.
    pub ch_neg: f64,
}

impl CriticalConstants {
    pub fn new(n: u32, h: f64) -> Self {
        Self {
            s0: f64::from(n - 2).sqrt().atan(),
            sh: equilibrium_latitude(n, h),
            sh_neg: equilibrium_latitude(n, -h),
            ch: contact_constant(n, h),
            ch_neg: contact_constant(n, -h),
        }
    }

    /// Absolute tolerance for deciding the classification boundaries.
    pub fn boundary_tol(&self) -> f64 {
        BOUNDARY_RTOL * self.ch.max(self.ch_neg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndpointKind {
    /// Simple zero of `D`: inverse square root singularity of the rate.
    DZero,
    /// `s = 0`, where the `S^{n-2}` factor collapses.
    AxisZero,
    /// `s = π/2`, the point `p = (0, 0, 1)`.
    Pole,
}

/// The maximal open `s`-interval on which `D > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileInterval {
    pub s_lo: f64,
    pub s_hi: f64,
    pub lo_kind: EndpointKind,
    pub hi_kind: EndpointKind,
    /// Interior zero of `R`, where the rate changes sign.
    pub s_hat: Option<f64>,
}

impl ProfileInterval {
    pub fn len(&self) -> f64 {
        self.s_hi - self.s_lo
    }
}

/// Locates the maximal interval of `D > 0`.
///
/// A sign scan of `L - |R|` on [`SCAN_POINTS`] midpoints, augmented by the two
/// contact latitudes (where `L ∓ R` peaks, so that thin bands near contact are
/// not missed), brackets the endpoints; bisection refines them to adjacent
/// floats. The returned endpoint is the outer float, so `D > 0` on the whole
/// open interval.
pub fn profile_interval(p: &CmcParams) -> Result<ProfileInterval> {
    let prof = Profile::new(p);
    let crit = CriticalConstants::new(p.n, p.h);
    let mut grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| (i as f64 + 0.5) / SCAN_POINTS as f64 * FRAC_PI_2)
        .collect();
    grid.push(crit.sh);
    grid.push(crit.sh_neg);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let vals: Vec<f64> = grid.iter().map(|&s| prof.gap(s)).collect();
    let (best, &best_val) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if !(best_val > 0.0) {
        return Err(Error::NoAdmissibleInterval { n: p.n, h: p.h, c: p.c });
    }
    let g = |s: f64| prof.gap(s);

    let mut i = best;
    while i > 0 && vals[i - 1] > 0.0 {
        i -= 1;
    }
    let (s_lo, lo_kind) = if i == 0 {
        if p.c == 0.0 {
            (0.0, EndpointKind::AxisZero)
        } else {
            (bisect(g, grid[0], 0.0).outer, EndpointKind::DZero)
        }
    } else {
        (bisect(g, grid[i], grid[i - 1]).outer, EndpointKind::DZero)
    };

    let mut j = best;
    while j + 1 < grid.len() && vals[j + 1] > 0.0 {
        j += 1;
    }
    let (s_hi, hi_kind) = if j + 1 == grid.len() {
        if prof.pole || g(FRAC_PI_2) > 0.0 {
            (FRAC_PI_2, EndpointKind::Pole)
        } else {
            (bisect(g, grid[j], FRAC_PI_2).outer, EndpointKind::DZero)
        }
    } else {
        (bisect(g, grid[j], grid[j + 1]).outer, EndpointKind::DZero)
    };

    let r_lo = prof.r(s_lo);
    let r_hi = prof.r(s_hi);
    let s_hat = if r_lo != 0.0 && r_hi != 0.0 && (r_lo > 0.0) != (r_hi > 0.0) {
        Some(bisect(|s| prof.r(s), s_lo, s_hi).root)
    } else {
        None
    };
    Ok(ProfileInterval { s_lo, s_hi, lo_kind, hi_kind, s_hat })
}

/// The Delaunay types met when `C` decreases from `C_h` to `-C_{-h}` at fixed
/// `h >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DelaunayType {
    StaticTorus,
    Unduloid,
    SphereUnion,
    Nodoid,
    Flower,
    NegUnduloid,
    NegStaticTorus,
    Geodesic,
}

impl DelaunayType {
    /// Types reached after passing through the flower, whose mean curvature
    /// is `-h` with respect to the fixed normal.
    pub fn is_post_flower(&self) -> bool {
        matches!(self, DelaunayType::Flower | DelaunayType::NegUnduloid | DelaunayType::NegStaticTorus)
    }
}

impl std::fmt::Display for DelaunayType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// Which unit normal the mean curvature is reported against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum NormalConvention {
    /// The normalized construction normal `η̃₀`.
    Fixed,
    /// The normal that varies continuously with `C`; every type then has
    /// mean curvature `h`.
    #[default]
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: DelaunayType,
    pub convention: NormalConvention,
    /// True when the input had `h < 0` and was classified through
    /// `(h, C) -> (-h, -C)`.
    pub mirrored: bool,
    /// Mean curvature under `convention`, for the normalized `|h|`.
    pub mean_curvature: f64,
}

/// Type of `(n, h, C)` under the continuous normal convention.
pub fn classify(p: &CmcParams) -> Result<DelaunayType> {
    classify_with(p, NormalConvention::Continuous).map(|c| c.kind)
}

pub fn classify_with(p: &CmcParams, convention: NormalConvention) -> Result<Classification> {
    let mirrored = p.h < 0.0;
    let q = if mirrored { p.mirrored() } else { *p };
    let (h, c) = (q.h, q.c);
    let crit = CriticalConstants::new(q.n, h);
    let tol = crit.boundary_tol();
    let flower_c = -h / q.k();
    let near = |x: f64| (c - x).abs() <= tol;
    use DelaunayType::*;
    let kind = if near(crit.ch) {
        StaticTorus
    } else if near(-crit.ch_neg) {
        NegStaticTorus
    } else if c > crit.ch || c < -crit.ch_neg {
        return Err(Error::OutOfBand { c, lo: -crit.ch_neg, hi: crit.ch });
    } else if near(0.0) && h == 0.0 {
        Geodesic
    } else if near(0.0) {
        SphereUnion
    } else if c > 0.0 {
        Unduloid
    } else if near(flower_c) {
        Flower
    } else if c > flower_c {
        Nodoid
    } else {
        NegUnduloid
    };
    let mean_curvature = match convention {
        NormalConvention::Fixed if kind.is_post_flower() => -h,
        _ => h,
    };
    Ok(Classification { kind, convention, mirrored, mean_curvature })
}
