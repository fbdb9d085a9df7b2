//! Period width `W = 2 ∫_J ds1/ds ds`, the flower width `β`, the adjusted
//! width `W̃` and the closed-form limits of `W` at the ends of the unduloid
//! band.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CmcParams;
use crate::profile::{
    equilibrium_latitude, equilibrium_ratio, profile_interval, CriticalConstants, EndpointKind, EndpointModel, Profile,
    ProfileInterval,
};
use crate::quadrature::{integrate, Quadrature};

/// Distance from the pole inside which the flower integrand is replaced by
/// its series.
pub const EPS_POLE: f64 = 1e-4;

/// Absolute tolerance requested from the quadrature.
pub const QUAD_TOL: f64 = 1e-12;

/// Error estimate above which a width is reported as non-convergent.
pub const MAX_ERR: f64 = 1e-6;

pub(crate) const MAX_PANELS: usize = 4000;

/// Low part of `π/2`: `π/2 = FRAC_PI_2 + PI_2_LO` to about 33 digits.
const PI_2_LO: f64 = 6.123_233_995_736_766e-17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthResult {
    pub w: f64,
    pub err_est: f64,
    pub endpoints: (EndpointKind, EndpointKind),
}

/// Phase rate of the flower `(n, -h, h/(n-1))` for the positive `h`.
///
/// With `t = π/2 - s`, `R = t² r(t)`, `cos s = t σ(t)` and `L = t λ(t)`, the
/// rate is `r / (σ √(λ² - t² r²))`, which tends to `h/2` at the pole. Inside
/// [`EPS_POLE`] the factors are replaced by their fourth-order series.
pub fn flower_rate(s: f64, n: u32, h: f64) -> f64 {
    let t = (FRAC_PI_2 - s) + PI_2_LO;
    let k = f64::from(n - 1);
    let m = f64::from(n - 2);
    let t2 = t * t;
    let (r, sigma, lambda) = if t < EPS_POLE {
        let t4 = t2 * t2;
        let r = h / 2.0 + h * (1.0 / 12.0 - k / 8.0) * t2;
        let sigma = 1.0 - t2 / 6.0 + t4 / 120.0;
        let cos_m = 1.0 - m * t2 / 2.0 - m * t4 / 12.0 + m * m * t4 / 8.0;
        (r, sigma, sigma * cos_m)
    } else {
        let half = (0.5 * t).sin();
        let ln_cos = (-2.0 * half * half).ln_1p();
        let one_minus = -(k * ln_cos).exp_m1();
        let sigma = t.sin() / t;
        (h / k * one_minus / t2, sigma, sigma * (m * ln_cos).exp())
    };
    let rad = (lambda - t * r) * (lambda + t * r);
    r / (sigma * rad.sqrt())
}

/// Integrals of the phase rate over pieces of the profile interval.
///
/// Each half of the interval is integrated in `u = √d`, `d` the distance to
/// its endpoint. At a simple zero of `D` the distance is measured from the
/// Newton-refined zero and the integrand `2u · ds1/ds` is evaluated without
/// the `1/u` factor, so nothing is lost to rounding of `s` near the endpoint.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PhaseIntegrand {
    pub prof: Profile,
    pub iv: ProfileInterval,
    left: Option<EndpointModel>,
    right: Option<EndpointModel>,
    threshold: f64,
    mid: f64,
}

impl PhaseIntegrand {
    pub fn new(p: &CmcParams) -> Result<Self> {
        let iv = profile_interval(p)?;
        let prof = Profile::new(p);
        let model = |kind, e, right| (kind == EndpointKind::DZero).then(|| prof.endpoint_model(e, right));
        Ok(Self {
            prof,
            iv,
            left: model(iv.lo_kind, iv.s_lo, false),
            right: model(iv.hi_kind, iv.s_hi, true),
            threshold: 1e-6 * iv.len().min(1.0),
            mid: 0.5 * (iv.s_lo + iv.s_hi),
        })
    }

    fn half(&self, u: f64, right: bool) -> f64 {
        let model = if right { self.right } else { self.left };
        match model {
            Some(m) => 2.0 * self.prof.scaled_rate_at_zero(&m, u * u, self.threshold),
            None => {
                let s = if right { self.iv.s_hi - u * u } else { self.iv.s_lo + u * u };
                2.0 * u * self.prof.rate_or_zero(s)
            }
        }
    }

    fn u_of(&self, s: f64, right: bool) -> f64 {
        let model = if right { self.right } else { self.left };
        match model {
            Some(m) => m.distance(s).sqrt(),
            None if right => (self.iv.s_hi - s).max(0.0).sqrt(),
            None => (s - self.iv.s_lo).max(0.0).sqrt(),
        }
    }

    /// `∫_a^b ds1/ds ds` for `s_lo <= a <= b <= s_hi`.
    pub fn integrate(&self, a: f64, b: f64, tol: f64) -> Quadrature {
        if b <= self.mid {
            integrate(|u| self.half(u, false), self.u_of(a, false), self.u_of(b, false), tol, MAX_PANELS)
        } else if a >= self.mid {
            integrate(|u| self.half(u, true), self.u_of(b, true), self.u_of(a, true), tol, MAX_PANELS)
        } else {
            let l = self.integrate(a, self.mid, 0.5 * tol);
            let r = self.integrate(self.mid, b, 0.5 * tol);
            Quadrature { value: l.value + r.value, err_est: l.err_est + r.err_est, panels: l.panels + r.panels }
        }
    }
}

fn finish(q: Quadrature, lo: EndpointKind, hi: EndpointKind) -> Result<WidthResult> {
    if !(q.err_est <= MAX_ERR) || !q.value.is_finite() {
        return Err(Error::NonConvergent { err_est: q.err_est });
    }
    Ok(WidthResult { w: 2.0 * q.value, err_est: 2.0 * q.err_est, endpoints: (lo, hi) })
}

/// `W = 2 ∫ ds1/ds` over the profile interval, with the signed rate.
///
/// The flower parameter is accepted and gives `-β` for `h > 0` in the signed
/// convention.
pub fn width(p: &CmcParams) -> Result<WidthResult> {
    let f = PhaseIntegrand::new(p)?;
    let q = f.integrate(f.iv.s_lo, f.iv.s_hi, QUAD_TOL);
    finish(q, f.iv.lo_kind, f.iv.hi_kind)
}

/// `β = W(-h, h/(n-1))` for `h > 0`.
pub fn flower_width(n: u32, h: f64) -> Result<WidthResult> {
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("flower width needs h > 0, got {h}")));
    }
    width(&CmcParams::new(n, -h, h / f64::from(n - 1))?)
}

/// `2 arctan((n-1)/h)`: the width of the sphere union, the limit of `W` as
/// `C → 0⁺`.
pub fn width_limit_at_zero(n: u32, h: f64) -> f64 {
    2.0 * (f64::from(n - 1) / h).atan()
}

/// Limit of `W` as `C → C_h⁻`, `2π / √(1 + (n-2) cot² s_h)`.
pub fn width_limit_at_contact(n: u32, h: f64) -> f64 {
    let m = f64::from(n - 2);
    let cot = 1.0 / equilibrium_latitude(n, h).tan();
    let first = 2.0 * PI / (1.0 + m * cot * cot).sqrt();
    let root = (h * h + 4.0 * m).sqrt();
    let second = 2.0 * PI / (2.0 + (h * h + h * root) / (2.0 * m)).sqrt();
    debug_assert!(
        (first - second).abs() <= 1e-12 * (1.0 + h * h),
        "closed forms disagree: {first} vs {second}"
    );
    debug_assert!((cot - equilibrium_ratio(n, h)).abs() <= 1e-12 * (1.0 + cot));
    first
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WidthBranch {
    /// `C = C_h`: the contact limit.
    Contact,
    /// `-h/(n-1) < C < C_h`: `W(h, C)`.
    Direct,
    /// `C = -h/(n-1)`: `π - β`, or `π` when `h = 0`.
    Flower,
    /// `-C_{-h} < C < -h/(n-1)`: `2π - W(-h, -C)`.
    Reflected,
    /// `C = -C_{-h}`: `2π` minus the contact limit for `-h`.
    NegContact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustedWidth {
    pub w_tilde: f64,
    pub branch: WidthBranch,
    pub err_est: f64,
}

/// The adjusted width `W̃(h, C)` for `h >= 0`, continuous in `C` on
/// `[-C_{-h}, C_h]`.
pub fn adjusted_width(n: u32, h: f64, c: f64) -> Result<AdjustedWidth> {
    if !(h >= 0.0) {
        return Err(Error::InvalidParams(format!("adjusted width needs h >= 0, got {h}")));
    }
    let p = CmcParams::new(n, h, c)?;
    let crit = CriticalConstants::new(n, h);
    let tol = crit.boundary_tol();
    let flower_c = -h / p.k();
    let exact = |w_tilde, branch| Ok(AdjustedWidth { w_tilde, branch, err_est: 0.0 });
    if (c - crit.ch).abs() <= tol {
        return exact(width_limit_at_contact(n, h), WidthBranch::Contact);
    }
    if (c + crit.ch_neg).abs() <= tol {
        return exact(2.0 * PI - width_limit_at_contact(n, -h), WidthBranch::NegContact);
    }
    if c > crit.ch || c < -crit.ch_neg {
        return Err(Error::OutOfBand { c, lo: -crit.ch_neg, hi: crit.ch });
    }
    if (c - flower_c).abs() <= tol {
        if h == 0.0 {
            return exact(PI, WidthBranch::Flower);
        }
        let beta = flower_width(n, h)?;
        return Ok(AdjustedWidth { w_tilde: PI - beta.w, branch: WidthBranch::Flower, err_est: beta.err_est });
    }
    if c > flower_c {
        let w = width(&p)?;
        Ok(AdjustedWidth { w_tilde: w.w, branch: WidthBranch::Direct, err_est: w.err_est })
    } else {
        let w = width(&p.mirrored())?;
        Ok(AdjustedWidth { w_tilde: 2.0 * PI - w.w, branch: WidthBranch::Reflected, err_est: w.err_est })
    }
}
