//! Independent checks that the generated hypersurfaces have constant mean
//! curvature `h`.
//!
//! The hypersurface is `(cos s · e^{i s1}, sin s · x)` with `x` on the unit
//! `S^{n-2}`. Its principal curvatures are the `S^{n-2}` value, with
//! multiplicity `n - 2`, and the curvature of the generating curve in `S²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CmcParams;
use crate::profile::{classify, equilibrium_latitude, DelaunayType, NormalConvention, Profile};
use crate::quadrature::integrate;
use crate::width::PhaseIntegrand;

/// Residual of the h-CMC equation
/// `-b/a + (n-2) a/b - σ √((1+Θ)/Θ) h + Θ'/(2Θ(1+Θ)) = 0`
/// at `s`, with `a = cos s`, `b = sin s`, `Θ` and `Θ'` from the closed form
/// and `σ = sign R` the orientation of the continuous normal.
pub fn cmc_residual(s: f64, p: &CmcParams) -> Result<f64> {
    let prof = Profile::new(p);
    let d = prof.d(s);
    if !(d > 0.0) {
        return Err(Error::Domain { s, d });
    }
    let r = prof.r(s);
    if r == 0.0 {
        return Err(Error::ThetaZero { s });
    }
    let l = prof.l(s);
    let (dl, _) = prof.l_derivs(s);
    let dr = p.h * l;
    let dd = 2.0 * l * dl - 2.0 * r * dr;
    let theta = r * r / d;
    let theta_dot = (2.0 * r * dr * d - r * r * dd) / (d * d);
    let (b, a) = s.sin_cos();
    let m = f64::from(p.n - 2);
    Ok(-b / a + m * a / b - r.signum() * ((1.0 + theta) / theta).sqrt() * p.h
        + theta_dot / (2.0 * theta * (1.0 + theta)))
}

/// The two principal curvatures `(S^{n-2} value, profile value)` with respect
/// to the continuous normal. `(n-2)·first + second = h`.
pub fn shape_diagonal(s: f64, p: &CmcParams) -> Result<(f64, f64)> {
    let prof = Profile::new(p);
    let d = prof.d(s);
    if !(d > 0.0) {
        return Err(Error::Domain { s, d });
    }
    let r = prof.r(s);
    if r == 0.0 {
        return Err(Error::ThetaZero { s });
    }
    let l = prof.l(s);
    let (dl, _) = prof.l_derivs(s);
    let dr = p.h * l;
    let dd = 2.0 * l * dl - 2.0 * r * dr;
    let (b, a) = s.sin_cos();
    let sq = d.sqrt();
    let rate = r / (a * sq);
    let accel = dr / (a * sq) + r * b / (a * a * sq) - r * dd / (2.0 * a * d * sq);
    let theta = r * r / d;
    let norm = ((1.0 + theta) / theta).sqrt();
    let rate2 = rate * rate;
    let boxed = -a * b * rate2 / (1.0 + theta) + (-2.0 * a * b * rate2 + a * a * rate * accel) / (theta * (1.0 + theta));
    let sigma = r.signum();
    Ok((sigma * (a / b) / norm, sigma * boxed / norm))
}

/// Principal curvatures of the static product at latitude `s_h`:
/// `(cot s_h, -tan s_h)`.
pub fn static_torus_shape(n: u32, h: f64) -> (f64, f64) {
    let s = equilibrium_latitude(n, h);
    (1.0 / s.tan(), -s.tan())
}

/// Samples `(s_j, s1_j)` on a uniform `s` grid together with the phase
/// increments between neighbours, each integrated separately so that
/// differences of `s1` keep full relative accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSamples {
    pub s: Vec<f64>,
    pub s1: Vec<f64>,
    pub inc: Vec<f64>,
}

/// Uniform samples `s_from + j·ds` up to `s_to` inside the profile interval.
pub fn uniform_samples(p: &CmcParams, s_from: f64, s_to: f64, ds: f64) -> Result<PhaseSamples> {
    let pi = PhaseIntegrand::new(p)?;
    if !(pi.iv.s_lo <= s_from && s_from < s_to && s_to <= pi.iv.s_hi && ds > 0.0) {
        return Err(Error::InvalidParams(format!("bad sampling range [{s_from}, {s_to}] step {ds}")));
    }
    let count = ((s_to - s_from) / ds).floor() as usize + 1;
    let s: Vec<f64> = (0..count).map(|j| s_from + j as f64 * ds).collect();
    let prof = pi.prof;
    let inc: Vec<f64> = s
        .windows(2)
        .map(|w| integrate(|x| prof.rate_or_zero(x), w[0], w[1], 1e-20, 64).value)
        .collect();
    let mut s1 = Vec::with_capacity(count);
    s1.push(pi.integrate(pi.iv.s_lo, s_from, 1e-14).value);
    for d in &inc {
        let last = *s1.last().unwrap();
        s1.push(last + d);
    }
    Ok(PhaseSamples { s, s1, inc })
}

/// Uniform samples over the profile interval minus `margin · len` at each
/// end, where the `s` parametrization degenerates.
pub fn profile_samples(p: &CmcParams, ds: f64, margin: f64) -> Result<PhaseSamples> {
    let iv = crate::profile::profile_interval(p)?;
    let pad = margin * iv.len();
    uniform_samples(p, iv.s_lo + pad, iv.s_hi - pad, ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub s: f64,
    pub h_numeric: f64,
    pub h_target: f64,
    /// Closed-form principal curvatures, absent where `Θ = 0`.
    pub shape: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub samples: Vec<CurvatureSample>,
    pub max_abs_err: f64,
    pub stencil: usize,
    /// Samples skipped at each end of the input.
    pub margin: usize,
    pub convention: NormalConvention,
}

impl CurvatureReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_abs_err < tol
    }
}

/// Finite-difference weights for the first and second derivative at 0 on the
/// nodes `x` (Fornberg's recursion).
pub fn fd_weights(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut c = vec![[0.0f64; 3]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0];
    for i in 1..n {
        let mn = i.min(2);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i];
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    (c.iter().map(|w| w[1]).collect(), c.iter().map(|w| w[2]).collect())
}

/// Mean curvature of the sampled hypersurface by finite differences.
///
/// At each interior sample the generating curve is rotated to phase 0 and
/// the chords to its `stencil - 1` neighbours are formed from the phase
/// increments with product-to-sum identities. First and second derivatives
/// come from weights on the actual offsets. With `ν` the unit normal of the
/// curve in `S²`, oriented by the finite-difference phase rate only,
///
/// `H = (n-2) (-ν_z / sin s) + <γ'', ν> / |γ'|²`.
///
/// The static product is handled in closed form.
pub fn mean_curvature_fd(
    samples: &PhaseSamples,
    p: &CmcParams,
    stencil: usize,
    convention: NormalConvention,
) -> Result<CurvatureReport> {
    if stencil != 3 && stencil != 5 {
        return Err(Error::InvalidParams(format!("stencil must be 3 or 5, got {stencil}")));
    }
    let m = samples.s.len();
    if m < stencil {
        return Err(Error::StencilTooWide { needed: stencil, available: m });
    }
    let kind = classify(p)?;
    let half = stencil / 2;
    let nm2 = f64::from(p.n - 2);
    if matches!(kind, DelaunayType::StaticTorus | DelaunayType::NegStaticTorus) {
        let q = if p.h < 0.0 { p.mirrored() } else { *p };
        let hq = if kind == DelaunayType::StaticTorus { q.h } else { -q.h };
        let (k1, k2) = static_torus_shape(q.n, hq);
        let h_numeric = nm2 * k1 + k2;
        let target = hq;
        let out: Vec<CurvatureSample> = samples.s[half..m - half]
            .iter()
            .map(|&s| CurvatureSample { s, h_numeric, h_target: target, shape: Some((k1, k2)) })
            .collect();
        let max_abs_err = (h_numeric - target).abs();
        return Ok(CurvatureReport { samples: out, max_abs_err, stencil, margin: half, convention });
    }
    let prof = Profile::new(p);
    let mut out = Vec::with_capacity(m - 2 * half);
    for i in half..m - half {
        let si = samples.s[i];
        let mut t = Vec::with_capacity(stencil);
        let mut chords = Vec::with_capacity(stencil);
        let mut dphase = Vec::with_capacity(stencil);
        for j in i - half..=i + half {
            let dt = samples.s[j] - si;
            let psi: f64 = if j < i { -samples.inc[j..i].iter().sum::<f64>() } else { samples.inc[i..j].iter().sum() };
            let sj = samples.s[j];
            let (hs, hc) = (0.5 * psi).sin_cos();
            let half_dt = (0.5 * dt).sin();
            let (sm, cm) = (si + 0.5 * dt).sin_cos();
            chords.push([
                -2.0 * sj.cos() * hs * hs - 2.0 * sm * half_dt,
                sj.cos() * 2.0 * hs * hc,
                2.0 * cm * half_dt,
            ]);
            t.push(dt);
            dphase.push(psi);
        }
        let (w1, w2) = fd_weights(&t);
        let mut g1 = [0.0; 3];
        let mut g2 = [0.0; 3];
        let mut rate = 0.0;
        for (k, c) in chords.iter().enumerate() {
            for d in 0..3 {
                g1[d] += w1[k] * c[d];
                g2[d] += w2[k] * c[d];
            }
            rate += w1[k] * dphase[k];
        }
        let (b, a) = si.sin_cos();
        let g = [a, 0.0, b];
        let mut nu = [g[1] * g1[2] - g[2] * g1[1], g[2] * g1[0] - g[0] * g1[2], g[0] * g1[1] - g[1] * g1[0]];
        let len = (nu[0] * nu[0] + nu[1] * nu[1] + nu[2] * nu[2]).sqrt();
        let reference = [a * rate * b, 1.0, -a * rate * a];
        let orient = nu[0] * reference[0] + nu[1] * reference[1] + nu[2] * reference[2];
        let scale = if orient < 0.0 { -1.0 / len } else { 1.0 / len };
        for v in &mut nu {
            *v *= scale;
        }
        let speed2 = g1[0] * g1[0] + g1[1] * g1[1] + g1[2] * g1[2];
        let normal_curv = (g2[0] * nu[0] + g2[1] * nu[1] + g2[2] * nu[2]) / speed2;
        let mut h_numeric = nm2 * (-nu[2] / b) + normal_curv;
        let mut h_target = p.h;
        if convention == NormalConvention::Fixed {
            h_numeric *= rate.signum();
            h_target *= prof.r(si).signum();
        }
        out.push(CurvatureSample { s: si, h_numeric, h_target, shape: shape_diagonal(si, p).ok() });
    }
    let max_abs_err = out.iter().map(|c| (c.h_numeric - c.h_target).abs()).fold(0.0, f64::max);
    Ok(CurvatureReport { samples: out, max_abs_err, stencil, margin: half, convention })
}
