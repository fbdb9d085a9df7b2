//! Closure and embeddedness conditions: the constant `C` of a prescribed
//! width, the intervals of `h` admitting embedded examples, and closed
//! flowers.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{assemble_global_with, closure_gap, closure_test, embedding_test, CLOSURE_TOL};
use crate::error::{Error, Result};
use crate::params::CmcParams;
use crate::profile::{classify, contact_constant, CriticalConstants, DelaunayType};
use crate::rational::{best_rational, reduced, Ratio};
use crate::width::{adjusted_width, flower_width, width, width_limit_at_contact, width_limit_at_zero, WidthResult};

/// Points of the scan of `W(h, ·)` over `[0, C_h]`.
pub const WIDTH_SCAN: usize = 256;

/// Target accuracy of solved widths.
pub const WIDTH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthSolution {
    pub params: CmcParams,
    pub w: f64,
    pub residual: f64,
    /// Every scan segment on which `W - target` changes sign.
    pub brackets: Vec<(f64, f64)>,
}

/// `W(h, C)` on `[0, C_h]`, with the two closed-form limits at the ends.
fn unduloid_width(n: u32, h: f64, c: f64, ch: f64) -> Result<f64> {
    if c <= 0.0 {
        Ok(width_limit_at_zero(n, h))
    } else if c >= ch {
        Ok(width_limit_at_contact(n, h))
    } else {
        Ok(width(&CmcParams::new(n, h, c)?)?.w)
    }
}

/// Finds `C ∈ (0, C_h)` with `W(h, C) = target`, for `h >= 0`.
///
/// `W(h, ·)` is scanned on [`WIDTH_SCAN`] segments; every segment with a sign
/// change is reported and the one with the smallest `C` is refined by
/// bisection until `|W - target| <` [`WIDTH_TOL`].
pub fn solve_width(n: u32, h: f64, target: f64) -> Result<WidthSolution> {
    if !(h >= 0.0) {
        return Err(Error::InvalidParams(format!("solve_width needs h >= 0, got {h}")));
    }
    CmcParams::new(n, h, 0.0)?;
    let lo = width_limit_at_zero(n, h);
    let hi = width_limit_at_contact(n, h);
    if !(target > lo.min(hi) && target < lo.max(hi)) {
        return Err(Error::TargetOutOfRange { target, lo: lo.min(hi), hi: lo.max(hi) });
    }
    let ch = contact_constant(n, h);
    let cs: Vec<f64> = (0..=WIDTH_SCAN).map(|i| ch * i as f64 / WIDTH_SCAN as f64).collect();
    let vals: Vec<f64> = cs
        .par_iter()
        .map(|&c| unduloid_width(n, h, c, ch).map(|w| w - target))
        .collect::<Result<_>>()?;
    let brackets: Vec<(f64, f64)> = (0..WIDTH_SCAN)
        .filter(|&i| (vals[i] <= 0.0) != (vals[i + 1] <= 0.0))
        .map(|i| (cs[i], cs[i + 1]))
        .collect();
    let Some(&(mut a, mut b)) = brackets.first() else {
        return Err(Error::TargetOutOfRange { target, lo: lo.min(hi), hi: lo.max(hi) });
    };
    let fa_neg = unduloid_width(n, h, a, ch)? - target <= 0.0;
    let mut best = (f64::INFINITY, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let r = unduloid_width(n, h, m, ch)? - target;
        if r.abs() < best.0.abs() {
            best = (r, m);
        }
        if r.abs() < WIDTH_TOL {
            break;
        }
        if (r <= 0.0) == fa_neg {
            a = m;
        } else {
            b = m;
        }
    }
    let (residual, c) = best;
    Ok(WidthSolution { params: CmcParams::new(n, h, c)?, w: target + residual, residual: residual.abs(), brackets })
}

/// `(0, √(4(n-2)/3))`: for these `h` the contact limit exceeds `π`, so some
/// unduloid has width `π` and closes embedded after two periods.
pub fn embedded_h_range(n: u32) -> (f64, f64) {
    (0.0, (4.0 * f64::from(n - 2) / 3.0).sqrt())
}

/// `Z(k) = (k(n-1)/π, (k²-2)√((n-2)/(k²-1)))`, or `None` when empty. For
/// `h ∈ Z(k)` the width `2π/k` lies strictly between the two limits.
pub fn z_interval(n: u32, k: u32) -> Option<(f64, f64)> {
    let kf = f64::from(k);
    let lo = kf * f64::from(n - 1) / PI;
    let hi = (kf * kf - 2.0) * (f64::from(n - 2) / (kf * kf - 1.0)).sqrt();
    (lo < hi).then_some((lo, hi))
}

/// Largest `k` considered when chaining the `Z(k)`.
pub const Z_CHAIN_MAX: u32 = 1000;

/// `d₀`: the left end of the tail `∪_{k >= K} Z(k)`, where `K` is the
/// smallest index from which every `Z(k)` up to [`Z_CHAIN_MAX`] is nonempty
/// and overlaps `Z(k+1)`. `None` when the intervals never chain.
pub fn d0(n: u32) -> Option<f64> {
    let mut start = None;
    for k in (3..Z_CHAIN_MAX).rev() {
        let (Some(a), Some(b)) = (z_interval(n, k), z_interval(n, k + 1)) else {
            break;
        };
        if b.0 < a.1 {
            start = Some(a.0);
        } else {
            break;
        }
    }
    start
}

/// Lower bound `1 + ⌊π(h - d₀)/(n-1)⌋` on the number of distinct embedded
/// examples with mean curvature `h`, or 0 for `h <= d₀`.
pub fn count_embedded(n: u32, h: f64) -> u64 {
    match d0(n) {
        Some(d) if h > d => 1 + (PI * (h - d) / f64::from(n - 1)).floor() as u64,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedSolution {
    pub params: CmcParams,
    /// Number of periods assembled.
    pub k: u32,
    pub w_achieved: f64,
    pub residual: f64,
    pub closure_gap: f64,
    pub min_separation: f64,
    pub embedded: bool,
}

/// Solves `W(h, C) = 2π/k`, assembles `k` periods and checks closure and
/// embeddedness.
pub fn solve_embedded(n: u32, h: f64, k: u32, grid_size: usize) -> Result<EmbeddedSolution> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    solve_closed(n, h, 2.0 * PI / f64::from(k), k, grid_size)
}

/// Solves `W(h, C) = target`, assembles `periods` periods and checks closure
/// and embeddedness. With `periods · target ∈ 2πℤ` the curve closes.
pub fn solve_closed(n: u32, h: f64, target: f64, periods: u32, grid_size: usize) -> Result<EmbeddedSolution> {
    if periods == 0 {
        return Err(Error::InvalidParams("at least one period is needed".into()));
    }
    let sol = solve_width(n, h, target)?;
    let curve = assemble_global_with(&sol.params, periods as usize, grid_size)?;
    let gap = closure_gap(&curve);
    let rational = closure_test(&sol.params, 64.max(u64::from(periods)))?;
    let (embedded, min_separation) = if gap < CLOSURE_TOL {
        let rep = embedding_test(&curve)?;
        (rep.embedded && rational.closed, rep.min_separation)
    } else {
        (false, 0.0)
    };
    Ok(EmbeddedSolution {
        params: sol.params,
        k: periods,
        w_achieved: sol.w,
        residual: sol.residual,
        closure_gap: gap,
        min_separation,
        embedded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowerClosure {
    pub h: f64,
    pub beta: f64,
    pub err_est: f64,
    /// `β/π`.
    pub ratio: f64,
    pub rational: Option<Ratio>,
    /// Number of petals of the closed flower.
    pub petals: Option<u64>,
    /// Angle between adjacent petals at the pole, `π - 2β`.
    pub adjacent_angle: f64,
}

/// Petals of a closed flower with `β/π = p/q`: consecutive petals differ by a
/// rotation of `π + β` about the pole, so the flower closes after
/// `2q / gcd(p + q, 2q)` of them.
pub fn petal_count(r: Ratio) -> u64 {
    let r = reduced(r);
    let p = r.p.unsigned_abs();
    let two_q = 2 * r.q;
    let mut a = p + r.q;
    let mut b = two_q;
    while b != 0 {
        (a, b) = (b, a % b);
    }
    two_q / a
}

/// Rationality of `β/π` for the flower of mean curvature `-h`, `h > 0`.
pub fn flower_closure(n: u32, h: f64, max_den: u64) -> Result<FlowerClosure> {
    let b = flower_width(n, h)?;
    let x = b.w / PI;
    let r = best_rational(x, max_den.max(1));
    let closed = (x - r.value()).abs() < b.err_est / PI + 1e-9;
    let rational = closed.then(|| reduced(r));
    Ok(FlowerClosure {
        h,
        beta: b.w,
        err_est: b.err_est,
        ratio: x,
        rational,
        petals: rational.map(petal_count),
        adjacent_angle: PI - 2.0 * b.w,
    })
}

/// Finds `h > 0` with `β(h) = target`, `0 < target < π`, by a scan of
/// `log h` followed by bisection.
pub fn solve_flower_beta(n: u32, target: f64) -> Result<(f64, WidthResult)> {
    if !(target > 0.0 && target < PI) {
        return Err(Error::TargetOutOfRange { target, lo: 0.0, hi: PI });
    }
    let hs: Vec<f64> = (0..=96).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 96.0)).collect();
    let betas: Vec<f64> = hs.par_iter().map(|&h| flower_width(n, h).map(|b| b.w)).collect::<Result<_>>()?;
    let i = (0..hs.len() - 1)
        .find(|&i| (betas[i] - target) * (betas[i + 1] - target) <= 0.0)
        .ok_or(Error::TargetOutOfRange { target, lo: betas[0], hi: betas[hs.len() - 1] })?;
    let (mut a, mut b) = (hs[i], hs[i + 1]);
    let below = betas[i] < target;
    let mut best = flower_width(n, a)?;
    let mut best_h = a;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let r = flower_width(n, m)?;
        if (r.w - target).abs() < (best.w - target).abs() {
            best = r;
            best_h = m;
        }
        if (r.w - target).abs() < 1e-12 {
            break;
        }
        if (r.w < target) == below {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((best_h, best))
}

/// Range of `W̃(h, ·)` over the negative unduloid band
/// `(-C_{-h}, -h/(n-1))`: from `2π` minus the contact limit of `-h` up to
/// `π - β`. The band closes (`W̃ ∈ πℚ`) wherever this range meets `πℚ`.
pub fn negative_unduloid_width_range(n: u32, h: f64) -> Result<(f64, f64)> {
    let lo = 2.0 * PI - width_limit_at_contact(n, -h);
    let hi = if h > 0.0 { PI - flower_width(n, h)?.w } else { PI };
    Ok((lo.min(hi), lo.max(hi)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub kind: Option<DelaunayType>,
    pub w: Option<f64>,
    pub w_tilde: Option<f64>,
    pub err_est: Option<f64>,
}

/// `count` evenly spaced values of `C` across `[-C_{-h}, C_h]` (ends
/// included) with type, `W` and `W̃`, for `h >= 0`. Rows are in grid order.
pub fn sweep(n: u32, h: f64, count: usize) -> Result<Vec<SweepRow>> {
    if !(h >= 0.0) || count < 2 {
        return Err(Error::InvalidParams(format!("sweep needs h >= 0 and at least 2 points, got h = {h}, {count}")));
    }
    let crit = CriticalConstants::new(n, h);
    let (lo, hi) = (-crit.ch_neg, crit.ch);
    let rows = (0..count)
        .into_par_iter()
        .map(|i| {
            let c = if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 };
            let p = CmcParams::new(n, h, c).ok();
            let kind = p.as_ref().and_then(|p| classify(p).ok());
            let w = p.as_ref().and_then(|p| width(p).ok());
            let wt = adjusted_width(n, h, c).ok();
            SweepRow {
                c,
                kind,
                w: w.map(|w| w.w),
                w_tilde: wt.map(|a| a.w_tilde),
                err_est: wt.map(|a| a.err_est),
            }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_range_examples() {
        assert!((embedded_h_range(3).1 - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((embedded_h_range(4).1 - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
        for n in [3, 4, 6] {
            let top = embedded_h_range(n).1;
            for i in 1..20 {
                let h = top * i as f64 / 20.0;
                assert!(width_limit_at_contact(n, h) > PI);
            }
            assert!((width_limit_at_contact(n, top) - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn z_interval_examples() {
        let (a, b) = z_interval(3, 10).unwrap();
        assert!((a - 20.0 / PI).abs() < 1e-14 && (b - 98.0 / 99f64.sqrt()).abs() < 1e-14);
        let (a, b) = z_interval(3, 3).unwrap();
        assert!((a - 6.0 / PI).abs() < 1e-14 && (b - 7.0 / 8f64.sqrt()).abs() < 1e-14);
        assert!(z_interval(10, 500).is_none());
        assert!(z_interval(9, 500).is_some());
    }

    #[test]
    fn z_interval_satisfies_the_width_inequalities() {
        for (n, k) in [(3, 10), (3, 4), (5, 7)] {
            let (a, b) = z_interval(n, k).unwrap();
            let target = 2.0 * PI / f64::from(k);
            for i in 1..10 {
                let h = a + (b - a) * i as f64 / 10.0;
                assert!(width_limit_at_contact(n, h) > target);
                assert!(width_limit_at_zero(n, h) < target);
            }
        }
    }

    #[test]
    fn d0_and_counts() {
        let d = d0(3).unwrap();
        assert!((d - 8.0 / PI).abs() < 1e-14);
        assert!(d0(10).is_none());
        assert_eq!(count_embedded(3, d), 0);
        assert!(count_embedded(3, d + 2.0 / PI * 1.5) >= 2);
        let mut last = 0;
        for i in 1..200 {
            let c = count_embedded(3, d + 0.05 * i as f64);
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn solve_width_round_trip() {
        let sol = solve_width(3, 0.5, PI).unwrap();
        let ch = contact_constant(3, 0.5);
        assert!(sol.params.c > 0.0 && sol.params.c < ch);
        assert!((width(&sol.params).unwrap().w - PI).abs() < 1e-8);
        assert!(!sol.brackets.is_empty());
    }

    #[test]
    fn solve_width_rejects_limits() {
        let hi = width_limit_at_contact(3, 0.5);
        assert!(matches!(solve_width(3, 0.5, hi), Err(Error::TargetOutOfRange { .. })));
        assert!(matches!(solve_width(3, 0.5, 0.1), Err(Error::TargetOutOfRange { .. })));
    }

    #[test]
    fn petal_counts() {
        assert_eq!(petal_count(Ratio { p: 1, q: 3 }), 3);
        assert_eq!(petal_count(Ratio { p: 1, q: 2 }), 4);
        assert_eq!(petal_count(Ratio { p: 2, q: 3 }), 6);
        assert_eq!(petal_count(Ratio { p: 3, q: 5 }), 5);
    }

    #[test]
    fn flower_beta_solve() {
        let (h, b) = solve_flower_beta(3, PI / 3.0).unwrap();
        assert!((b.w - PI / 3.0).abs() < 1e-9);
        let fc = flower_closure(3, h, 64).unwrap();
        assert_eq!(fc.rational.map(|r| (r.p, r.q)), Some((1, 3)));
        assert_eq!(fc.petals, Some(3));
        assert!((fc.adjacent_angle - PI / 3.0).abs() < 1e-8);
    }

    #[test]
    fn flower_tends_to_pi_at_zero() {
        let beta = flower_width(3, 1e-4).unwrap().w;
        assert!(beta > 0.0 && beta < 2e-3);
        let (lo, hi) = negative_unduloid_width_range(3, 0.0).unwrap();
        assert!((hi - PI).abs() < 1e-15 && (lo - (2.0 - 2f64.sqrt()) * PI).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_ordered() {
        let rows = sweep(3, 1.0, 21).unwrap();
        assert_eq!(rows.len(), 21);
        assert!(rows.windows(2).all(|w| w[0].c < w[1].c));
        assert_eq!(rows[0].kind, Some(DelaunayType::NegStaticTorus));
        assert_eq!(rows[20].kind, Some(DelaunayType::StaticTorus));
    }
}
