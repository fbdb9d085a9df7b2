//! Sampled generating curves on `S²` and their global assembly.
//!
//! A point `(s, s1)` is `(cos s cos s1, cos s sin s1, sin s)`. The fundamental
//! piece runs over the profile interval with `s1 = 0` at its left end; the
//! global curve is built from copies of it under the three reflections of the
//! construction: the phase reflection `s1 -> 2c - s1` at an endpoint, the
//! meridian flip used for nodoids and the pole reflection of the flower.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CmcParams;
use crate::profile::{classify, DelaunayType, EndpointKind};
use crate::rational::{best_rational, Ratio};
use crate::width::{adjusted_width, width, PhaseIntegrand};

pub const MIN_GRID: usize = 64;
pub const MAX_GRID: usize = 1_000_000;
pub const DEFAULT_GRID: usize = 2000;

/// Closure gaps below this count as closed.
pub const CLOSURE_TOL: f64 = 1e-6;

const STEP_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub s: f64,
    pub s1: f64,
}

impl CurvePoint {
    pub fn new(s: f64, s1: f64) -> Self {
        Self { s, s1 }
    }

    pub fn xyz(&self) -> [f64; 3] {
        let (sn, cs) = self.s.sin_cos();
        let (sp, cp) = self.s1.sin_cos();
        [cs * cp, cs * sp, sn]
    }
}

/// Sample positions on the profile interval, quadratically clustered at
/// simple zeros of `D` so that the vertical tangencies there are resolved.
pub(crate) fn phase_grid(pi: &PhaseIntegrand, grid_size: usize) -> Vec<f64> {
    let iv = pi.iv;
    let left = iv.lo_kind == EndpointKind::DZero;
    let right = iv.hi_kind == EndpointKind::DZero;
    let last = grid_size - 1;
    (0..grid_size)
        .map(|i| {
            if i == 0 {
                return iv.s_lo;
            }
            if i == last {
                return iv.s_hi;
            }
            let t = i as f64 / last as f64;
            let g = match (left, right) {
                (true, true) => t * t * (3.0 - 2.0 * t),
                (true, false) => t * t,
                (false, true) => t * (2.0 - t),
                (false, false) => t,
            };
            iv.s_lo + iv.len() * g
        })
        .collect()
}

/// Signed and absolute phase increments between consecutive grid points.
fn increments(pi: &PhaseIntegrand, grid: &[f64]) -> Vec<(f64, f64)> {
    let s_hat = pi.iv.s_hat;
    grid.par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            match s_hat {
                Some(x) if a < x && x < b => {
                    let l = pi.integrate(a, x, STEP_TOL).value;
                    let r = pi.integrate(x, b, STEP_TOL).value;
                    (l + r, l.abs() + r.abs())
                }
                _ => {
                    let v = pi.integrate(a, b, STEP_TOL).value;
                    (v, v.abs())
                }
            }
        })
        .collect()
}

fn accumulate(grid: &[f64], inc: impl Iterator<Item = f64>) -> Vec<CurvePoint> {
    let mut out = Vec::with_capacity(grid.len());
    let mut s1 = 0.0;
    out.push(CurvePoint::new(grid[0], 0.0));
    for (&s, d) in grid[1..].iter().zip(inc) {
        s1 += d;
        out.push(CurvePoint::new(s, s1));
    }
    out
}

fn check_grid(grid_size: usize) -> Result<()> {
    if !(MIN_GRID..=MAX_GRID).contains(&grid_size) {
        return Err(Error::InvalidParams(format!(
            "grid size must lie in [{MIN_GRID}, {MAX_GRID}], got {grid_size}"
        )));
    }
    Ok(())
}

/// `s1(s) = ∫_{s_lo}^{s} ds1/ds` on `grid_size` samples of the profile
/// interval. Each step is an adaptive integral, so the last sample carries
/// `W/2` to quadrature accuracy.
pub fn integrate_phase(p: &CmcParams, grid_size: usize) -> Result<Vec<CurvePoint>> {
    check_grid(grid_size)?;
    let pi = PhaseIntegrand::new(p)?;
    let grid = phase_grid(&pi, grid_size);
    let inc = increments(&pi, &grid);
    Ok(accumulate(&grid, inc.into_iter().map(|(d, _)| d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AssemblyStep {
    /// A copy of the fundamental piece with its phase shifted.
    Fundamental { s1_offset: f64 },
    /// `s1 -> 2 axis - s1`, joined at latitude `at_s`.
    PhaseReflection { axis: f64, at_s: f64 },
    /// `s1 -> 2 axis - s1` applied to the sub-arc beyond the zero `at_s` of
    /// `R`, turning the non-negative drawing convention into the nodoid loop.
    MeridianFlip { axis: f64, at_s: f64 },
    /// `s1 -> 2 axis + π - s1`: reflection at the pole `p` across the plane
    /// through `0`, `p` and the limit normal at `p`.
    PoleReflection { axis: f64 },
}

/// How a closed curve closes up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveClosure {
    /// Returns to its first point.
    Loop,
    /// Both ends on `s = 0`, where the `S^{n-2}` factor collapses.
    AxisEnds,
    /// Consecutive petals are rotations about `p`; closes when the total
    /// rotation is a multiple of `2π`.
    Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Join {
    pub index: usize,
    pub at_pole: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratingCurve {
    pub params: CmcParams,
    pub kind: DelaunayType,
    pub samples: Vec<CurvePoint>,
    pub periods: usize,
    pub assembly: Vec<AssemblyStep>,
    pub joins: Vec<Join>,
    /// Phase advance of the fundamental piece: `W/2`, or `β/2` (signed) for
    /// the flower.
    pub half_width: f64,
    pub closure: CurveClosure,
}

impl GeneratingCurve {
    pub fn points3d(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(CurvePoint::xyz).collect()
    }

    /// Phase rotation between consecutive flower petals, `π + 2w`.
    pub fn petal_rotation(&self) -> f64 {
        PI + 2.0 * self.half_width
    }
}

fn push_piece(out: &mut Vec<CurvePoint>, joins: &mut Vec<Join>, piece: impl Iterator<Item = CurvePoint>, at_pole: bool) {
    let mut piece = piece.peekable();
    if !out.is_empty() {
        joins.push(Join { index: out.len() - 1, at_pole });
        piece.next();
    }
    out.extend(piece);
}

/// Global generating curve with the default sampling.
pub fn assemble_global(p: &CmcParams, periods: usize) -> Result<GeneratingCurve> {
    assemble_global_with(p, periods, DEFAULT_GRID)
}

/// Global generating curve from `periods` periods of the fundamental piece
/// (petals for the flower), each piece sampled at `grid_size` points.
///
/// Unduloids and negative unduloids alternate phase reflections at the two
/// endpoints. Nodoids first flip the sub-arc where `R < 0` across the
/// meridian through the zero of `R`, then proceed likewise. The sphere union
/// and the great sphere need one reflection. The flower reflects at the pole.
pub fn assemble_global_with(p: &CmcParams, periods: usize, grid_size: usize) -> Result<GeneratingCurve> {
    if periods == 0 {
        return Err(Error::InvalidParams("periods must be at least 1".into()));
    }
    check_grid(grid_size)?;
    let kind = classify(p)?;
    if matches!(kind, DelaunayType::StaticTorus | DelaunayType::NegStaticTorus) {
        return Err(Error::UnsupportedType(kind));
    }
    let pi = PhaseIntegrand::new(p)?;
    let grid = phase_grid(&pi, grid_size);
    let inc = increments(&pi, &grid);
    let mut assembly = Vec::new();
    let base = match kind {
        DelaunayType::Nodoid => {
            let drawn = accumulate(&grid, inc.iter().map(|&(_, a)| a));
            let s_hat = pi.iv.s_hat.expect("nodoid has an interior zero of R");
            let (flipped, axis) = meridian_flip(&drawn, s_hat, p.h > 0.0, &pi);
            assembly.push(AssemblyStep::MeridianFlip { axis, at_s: s_hat });
            flipped
        }
        _ => accumulate(&grid, inc.iter().map(|&(d, _)| d)),
    };
    let half = base.last().map_or(0.0, |q| q.s1);
    let (s_lo, s_hi) = (pi.iv.s_lo, pi.iv.s_hi);
    let mut samples = Vec::new();
    let mut joins = Vec::new();
    let (closure, periods) = match kind {
        DelaunayType::SphereUnion | DelaunayType::Geodesic => {
            assembly.push(AssemblyStep::Fundamental { s1_offset: 0.0 });
            push_piece(&mut samples, &mut joins, base.iter().copied(), false);
            let back = base.iter().rev();
            if kind == DelaunayType::Geodesic {
                assembly.push(AssemblyStep::PoleReflection { axis: half });
                push_piece(&mut samples, &mut joins, back.map(|q| CurvePoint::new(q.s, 2.0 * half + PI - q.s1)), true);
            } else {
                assembly.push(AssemblyStep::PhaseReflection { axis: half, at_s: s_hi });
                push_piece(&mut samples, &mut joins, back.map(|q| CurvePoint::new(q.s, 2.0 * half - q.s1)), false);
            }
            (CurveClosure::AxisEnds, 1)
        }
        DelaunayType::Flower => {
            assembly.push(AssemblyStep::Fundamental { s1_offset: 0.0 });
            assembly.push(AssemblyStep::PhaseReflection { axis: 0.0, at_s: s_lo });
            let petal: Vec<CurvePoint> = base
                .iter()
                .rev()
                .map(|q| CurvePoint::new(q.s, -q.s1))
                .chain(base.iter().skip(1).copied())
                .collect();
            let rot = PI + 2.0 * half;
            for j in 0..periods {
                if j > 0 {
                    assembly.push(AssemblyStep::PoleReflection { axis: half + (j - 1) as f64 * rot });
                }
                let off = j as f64 * rot;
                push_piece(&mut samples, &mut joins, petal.iter().map(|q| CurvePoint::new(q.s, q.s1 + off)), true);
            }
            (CurveClosure::Rotation, periods)
        }
        _ => {
            for j in 0..2 * periods {
                let m = (j / 2) as f64;
                if j % 2 == 0 {
                    let off = 2.0 * m * half;
                    if j > 0 {
                        assembly.push(AssemblyStep::PhaseReflection { axis: off, at_s: s_lo });
                    }
                    assembly.push(AssemblyStep::Fundamental { s1_offset: off });
                    push_piece(&mut samples, &mut joins, base.iter().map(|q| CurvePoint::new(q.s, q.s1 + off)), false);
                } else {
                    let axis = (2.0 * m + 1.0) * half;
                    assembly.push(AssemblyStep::PhaseReflection { axis, at_s: s_hi });
                    let prev = 2.0 * m * half;
                    let back = base.iter().rev().map(|q| CurvePoint::new(q.s, 2.0 * axis - (q.s1 + prev)));
                    push_piece(&mut samples, &mut joins, back, false);
                }
            }
            (CurveClosure::Loop, periods)
        }
    };
    Ok(GeneratingCurve { params: *p, kind, samples, periods, assembly, joins, half_width: half, closure })
}

/// Flips the part of the drawn (non-negative) piece on the `R < 0` side of
/// `s_hat` across the meridian through the phase at `s_hat`, then shifts the
/// gauge back to `s1 = 0` at the left end. Returns the piece and the axis.
fn meridian_flip(drawn: &[CurvePoint], s_hat: f64, left_negative: bool, pi: &PhaseIntegrand) -> (Vec<CurvePoint>, f64) {
    let i = drawn.partition_point(|q| q.s < s_hat);
    let axis = drawn[i - 1].s1 + pi.integrate(drawn[i - 1].s, s_hat, STEP_TOL).value.abs();
    let flip = |q: &CurvePoint| {
        let negative = if left_negative { q.s < s_hat } else { q.s > s_hat };
        if negative {
            2.0 * axis - q.s1
        } else {
            q.s1
        }
    };
    let shift = -flip(&drawn[0]);
    let out = drawn.iter().map(|q| CurvePoint::new(q.s, flip(q) + shift)).collect();
    (out, axis)
}

/// A closed generating curve of the static torus: the latitude `s_h`,
/// sampled at `m` phases, periodic.
pub fn static_torus_curve(p: &CmcParams, m: usize) -> Result<GeneratingCurve> {
    let kind = classify(p)?;
    let q = if p.h < 0.0 { p.mirrored() } else { *p };
    let s = match kind {
        DelaunayType::StaticTorus => crate::profile::equilibrium_latitude(q.n, q.h),
        DelaunayType::NegStaticTorus => crate::profile::equilibrium_latitude(q.n, -q.h),
        _ => return Err(Error::UnsupportedType(kind)),
    };
    let samples = (0..=m).map(|j| CurvePoint::new(s, 2.0 * PI * j as f64 / m as f64)).collect();
    Ok(GeneratingCurve {
        params: *p,
        kind,
        samples,
        periods: 1,
        assembly: vec![AssemblyStep::Fundamental { s1_offset: 0.0 }],
        joins: Vec::new(),
        half_width: PI,
        closure: CurveClosure::Loop,
    })
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Distance by which the assembled curve fails to close.
pub fn closure_gap(curve: &GeneratingCurve) -> f64 {
    let (Some(first), Some(last)) = (curve.samples.first(), curve.samples.last()) else {
        return f64::INFINITY;
    };
    match curve.closure {
        CurveClosure::AxisEnds => first.s.sin().abs().max(last.s.sin().abs()),
        CurveClosure::Loop => dist(first.xyz(), last.xyz()),
        CurveClosure::Rotation => {
            let total = curve.periods as f64 * curve.petal_rotation();
            let chord = 2.0 * (0.5 * total).sin().abs();
            let reach = curve.samples.iter().map(|q| q.s.cos()).fold(0.0, f64::max);
            chord * reach
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureVerdict {
    pub closed: bool,
    /// `W/π`, or `β/π` for the flower.
    pub ratio: f64,
    pub rational: Option<Ratio>,
    pub err_est: f64,
}

/// Whether the period (or petal) phase is a rational multiple of `π` with
/// denominator at most `max_den`.
///
/// The sphere union closes after one period for every width and the static
/// torus is a closed circle product; both report `closed` without a ratio.
pub fn closure_test(p: &CmcParams, max_den: u64) -> Result<ClosureVerdict> {
    let max_den = max_den.max(1);
    let kind = classify(p)?;
    let (x, err) = match kind {
        DelaunayType::SphereUnion | DelaunayType::StaticTorus | DelaunayType::NegStaticTorus => {
            return Ok(ClosureVerdict { closed: true, ratio: f64::NAN, rational: None, err_est: 0.0 });
        }
        DelaunayType::Geodesic => {
            let q = if p.h < 0.0 { p.mirrored() } else { *p };
            let a = adjusted_width(q.n, q.h, q.c)?;
            (a.w_tilde / PI, a.err_est / PI)
        }
        _ => {
            let w = width(p)?;
            (w.w.abs() / PI, w.err_est / PI)
        }
    };
    let r = best_rational(x, max_den);
    let closed = (x - r.value()).abs() < err + 1e-9;
    Ok(ClosureVerdict { closed, ratio: x, rational: closed.then_some(r), err_est: err })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub embedded: bool,
    pub min_separation: f64,
    pub max_spacing: f64,
}

/// Arclength (in units of the largest sample spacing) below which pairs are
/// treated as neighbours.
pub const NEIGHBOUR_WINDOW: f64 = 32.0;

/// Minimum chordal distance between sample pairs that are not neighbours
/// along the curve. Pairs closer than [`NEIGHBOUR_WINDOW`] spacings in
/// arclength are skipped, cyclically for curves that return to their start.
/// Quadratic in the number of samples.
pub fn embedding_test(curve: &GeneratingCurve) -> Result<EmbeddingReport> {
    let gap = closure_gap(curve);
    if !(gap < CLOSURE_TOL) {
        return Err(Error::NotClosed { gap });
    }
    let mut pts = curve.points3d();
    let cyclic = curve.closure != CurveClosure::AxisEnds;
    if cyclic && pts.len() > 1 {
        pts.pop();
    }
    let m = pts.len();
    let mut arc = Vec::with_capacity(m);
    let mut acc = 0.0;
    let mut max_spacing: f64 = 0.0;
    arc.push(0.0);
    for w in pts.windows(2) {
        let d = dist(w[0], w[1]);
        max_spacing = max_spacing.max(d);
        acc += d;
        arc.push(acc);
    }
    let total = if cyclic {
        let d = dist(pts[m - 1], pts[0]);
        max_spacing = max_spacing.max(d);
        acc + d
    } else {
        f64::INFINITY
    };
    let window = NEIGHBOUR_WINDOW * max_spacing;
    let min_separation = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in i + 1..m {
                let along = arc[j] - arc[i];
                if along < window || total - along < window {
                    continue;
                }
                best = best.min(dist(pts[i], pts[j]));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(EmbeddingReport { embedded: min_separation > 10.0 * max_spacing, min_separation, max_spacing })
}

/// Curvature of the circle through three planar points.
fn menger(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let (vx, vy) = (c[0] - b[0], c[1] - b[1]);
    let (wx, wy) = (c[0] - a[0], c[1] - a[1]);
    let cross = ux * vy - uy * vx;
    2.0 * cross / ((ux * ux + uy * uy) * (vx * vx + vy * vy) * (wx * wx + wy * wy)).sqrt()
}

/// Signed discrete curvature of the planar picture of the curve at samples
/// `join - 1`, `join` and `join + 1`. Away from the pole the picture is the
/// `(s1, s)` plane; at the pole it is the view from above,
/// `(π/2 - s)(cos s1, sin s1)`.
pub fn join_curvature(curve: &GeneratingCurve, join: &Join) -> [f64; 3] {
    let chart = |q: &CurvePoint, base: f64| {
        if join.at_pole {
            let rho = std::f64::consts::FRAC_PI_2 - q.s;
            let (sn, cs) = (q.s1 - base).sin_cos();
            [rho * cs, rho * sn]
        } else {
            [q.s1 - base, q.s]
        }
    };
    let j = join.index;
    let base = curve.samples[j].s1;
    let k = |i: usize| {
        let q = &curve.samples;
        menger(chart(&q[i - 1], base), chart(&q[i], base), chart(&q[i + 1], base))
    };
    [k(j - 1), k(j), k(j + 1)]
}

/// Largest jump of [`join_curvature`] over all joins.
pub fn max_join_curvature_jump(curve: &GeneratingCurve) -> f64 {
    curve
        .joins
        .iter()
        .filter(|jn| jn.index >= 2 && jn.index + 2 < curve.samples.len())
        .map(|jn| {
            let [a, b, c] = join_curvature(curve, jn);
            (a - b).abs().max((c - b).abs())
        })
        .fold(0.0, f64::max)
}

/// Curvature of the flower at the pole from a fit of `ρ(s1)`, `ρ = π/2 - s`,
/// on the petal samples with `ρ < rho_max`. The polar curvature
/// `(ρ² + 2ρ'² - ρρ'') / (ρ² + ρ'²)^{3/2}` reduces to `2/|ρ'|` at `ρ = 0`.
pub fn petal_curvature_at_pole(curve: &GeneratingCurve, rho_max: f64) -> Result<f64> {
    if curve.kind != DelaunayType::Flower {
        return Err(Error::UnsupportedType(curve.kind));
    }
    let pole = curve.joins.first().map_or(curve.samples.len() - 1, |j| j.index);
    let theta0 = curve.samples[pole].s1;
    // Approach to the pole along the end of the first petal.
    let pts: Vec<(f64, f64)> = curve.samples[..pole]
        .iter()
        .rev()
        .map(|q| (q.s1 - theta0, std::f64::consts::FRAC_PI_2 - q.s))
        .take_while(|&(_, rho)| rho < rho_max)
        .collect();
    if pts.len() < 4 {
        return Err(Error::StencilTooWide { needed: 4, available: pts.len() });
    }
    // Least squares ρ = c1 x + c2 x² + c3 x³ through the pole.
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(x, rho) in &pts {
        let row = [x, x * x, x * x * x];
        for r in 0..3 {
            atb[r] += row[r] * rho;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let slope = solve3(ata, atb)[0];
    Ok(2.0 / slope.abs())
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut v = b[row];
        for k in row + 1..3 {
            v -= a[row][k] * x[k];
        }
        x[row] = v / a[row][row];
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

/// One exported sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub s: f64,
    pub s1: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<&CurvePoint> for CurveRecord {
    fn from(q: &CurvePoint) -> Self {
        let [x, y, z] = q.xyz();
        Self { s: q.s, s1: q.s1, x, y, z }
    }
}

pub const CSV_HEADER: &str = "s,s1,x,y,z";

/// Serializes the samples with 17 significant digits.
pub fn export_curve(samples: &[CurvePoint], format: ExportFormat) -> Result<String> {
    if samples.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let mut out = String::new();
    let recs = samples.iter().map(CurveRecord::from);
    match format {
        ExportFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in recs {
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.s, r.s1, r.x, r.y, r.z);
            }
        }
        ExportFormat::Json => {
            out.push('[');
            for (i, r) in recs.enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "\n  {{\"s\": {:.16e}, \"s1\": {:.16e}, \"x\": {:.16e}, \"y\": {:.16e}, \"z\": {:.16e}}}",
                    r.s, r.s1, r.x, r.y, r.z
                );
            }
            out.push_str("\n]\n");
        }
    }
    Ok(out)
}

/// Parses the output of [`export_curve`].
pub fn read_curve(text: &str, format: ExportFormat) -> Result<Vec<CurveRecord>> {
    let recs: Vec<CurveRecord> = match format {
        ExportFormat::Json => serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?,
        ExportFormat::Csv => {
            let mut lines = text.lines();
            if lines.next().map(str::trim) != Some(CSV_HEADER) {
                return Err(Error::Parse("missing CSV header".into()));
            }
            lines
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    let v: Vec<f64> = l
                        .split(',')
                        .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{e}: {l}"))))
                        .collect::<Result<_>>()?;
                    match v[..] {
                        [s, s1, x, y, z] => Ok(CurveRecord { s, s1, x, y, z }),
                        _ => Err(Error::Parse(format!("expected 5 fields: {l}"))),
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    if recs.is_empty() {
        return Err(Error::EmptyCurve);
    }
    Ok(recs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{contact_constant, profile_interval, s1_rate};
    use crate::width::{flower_width, width_limit_at_zero};
    use std::f64::consts::FRAC_PI_2;

    fn params(n: u32, h: f64, c: f64) -> CmcParams {
        CmcParams::new(n, h, c).unwrap()
    }

    fn unduloid() -> CmcParams {
        params(3, 1.0, 0.5 * contact_constant(3, 1.0))
    }

    #[test]
    fn geodesic_phase_is_constant() {
        let pts = integrate_phase(&params(3, 0.0, 0.0), 128).unwrap();
        assert!(pts.iter().all(|q| q.s1 == 0.0));
        assert_eq!(pts[0].s, 0.0);
        assert_eq!(pts[127].s, FRAC_PI_2);
    }

    #[test]
    fn total_phase_is_half_width() {
        for p in [unduloid(), params(4, 1.0, -0.1), params(3, 2.0, 0.0), params(3, -1.0, 0.5), params(5, 0.5, -0.3)] {
            let pts = integrate_phase(&p, 500).unwrap();
            let w = width(&p).unwrap().w;
            assert!((pts.last().unwrap().s1 - w / 2.0).abs() < 1e-8, "{p:?}");
        }
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(integrate_phase(&unduloid(), 10).is_err());
        assert!(integrate_phase(&params(3, 1.0, 0.4), 100).is_err());
    }

    #[test]
    fn trapezoid_consistency() {
        let p = unduloid();
        let pts = integrate_phase(&p, 4000).unwrap();
        let n = pts.len();
        for w in pts[n / 4..3 * n / 4].windows(2) {
            let ds = w[1].s - w[0].s;
            let mid = 0.5 * (s1_rate(w[0].s, &p).unwrap() + s1_rate(w[1].s, &p).unwrap());
            assert!((w[1].s1 - w[0].s1 - mid * ds).abs() < 100.0 * ds.powi(3));
        }
    }

    #[test]
    fn sphere_union_closes_in_one_period() {
        let p = params(3, 1.0, 0.0);
        assert!(s1_rate(1e-6, &p).unwrap().abs() < 1e-5);
        let c = assemble_global(&p, 1).unwrap();
        assert_eq!(c.closure, CurveClosure::AxisEnds);
        assert!(closure_gap(&c) < 1e-8);
        let top = c.samples.iter().map(|q| q.s).fold(0.0, f64::max);
        assert!((top - 2f64.atan()).abs() < 1e-12);
        let total = c.samples.last().unwrap().s1;
        assert!((total - width_limit_at_zero(3, 1.0)).abs() < 1e-10);
        assert!(embedding_test(&c).unwrap().embedded);
    }

    #[test]
    fn unduloid_goes_up_and_down() {
        let c = assemble_global_with(&unduloid(), 2, 200).unwrap();
        let mut pattern = Vec::new();
        for w in c.samples.windows(2) {
            let up = w[1].s > w[0].s;
            if pattern.last() != Some(&up) {
                pattern.push(up);
            }
            assert!(w[1].s1 >= w[0].s1);
        }
        assert_eq!(pattern, vec![true, false, true, false]);
        assert_eq!(c.joins.len(), 3);
        let w = width(&unduloid()).unwrap().w;
        assert!((c.samples.last().unwrap().s1 - 2.0 * w).abs() < 4.0 * 1e-8);
        assert!(matches!(c.assembly[1], AssemblyStep::PhaseReflection { .. }));
    }

    #[test]
    fn nodoid_flip_matches_signed_integration() {
        for p in [params(3, 1.0, -0.2), params(4, -2.0, 0.3)] {
            let c = assemble_global_with(&p, 1, 600).unwrap();
            assert!(matches!(c.assembly[0], AssemblyStep::MeridianFlip { .. }));
            let signed = integrate_phase(&p, 600).unwrap();
            for (a, b) in signed.iter().zip(&c.samples) {
                assert_eq!(a.s, b.s);
                assert!((a.s1 - b.s1).abs() < 1e-12, "{} vs {}", a.s1, b.s1);
            }
            // The loop: the phase goes back before moving on.
            let s1: Vec<f64> = signed.iter().map(|q| q.s1).collect();
            assert!(s1.windows(2).any(|w| w[1] < w[0]) && s1.windows(2).any(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn static_torus_is_not_assembled() {
        let p = params(3, 1.0, contact_constant(3, 1.0));
        assert!(matches!(assemble_global(&p, 1), Err(Error::UnsupportedType(DelaunayType::StaticTorus))));
        let c = static_torus_curve(&p, 64).unwrap();
        assert!(closure_gap(&c) < 1e-12);
    }

    fn flower(h: f64, petals: usize) -> GeneratingCurve {
        assemble_global(&params(3, h, -h / 2.0), petals).unwrap()
    }

    #[test]
    fn flower_petals_rotate_by_two_beta() {
        let h = 1.0;
        let c = flower(h, 3);
        let beta = flower_width(3, h).unwrap().w;
        assert!((2.0 * c.half_width.abs() - beta).abs() < 1e-8);
        let len = (c.samples.len() - 1) / 3;
        let rot = 2.0 * beta * c.half_width.signum();
        let (sn, cs) = rot.sin_cos();
        for i in 0..=len {
            let [x, y, z] = c.samples[i].xyz();
            let q = c.samples[i + 2 * len].xyz();
            let r = [cs * x - sn * y, sn * x + cs * y, z];
            assert!(dist(q, r) < 1e-8, "{i}: {}", dist(q, r));
        }
        assert_eq!(c.joins.iter().filter(|j| j.at_pole).count(), 2);
    }

    #[test]
    fn flower_meets_pole_along_meridian() {
        let c = flower(1.0, 2);
        let pole = c.joins[0].index;
        assert_eq!(c.samples[pole].s, FRAC_PI_2);
        let (a, b) = (c.samples[pole - 1], c.samples[pole]);
        let rho = FRAC_PI_2 - a.s;
        // Tangent against the meridian direction in the view from above.
        let angle = (rho * (b.s1 - a.s1)).abs().atan2(rho - (FRAC_PI_2 - b.s));
        assert!(angle < 1e-3, "angle {angle}");
    }

    #[test]
    fn petal_curvature_is_h() {
        for h in [0.5, 1.0, 2.0] {
            let k = petal_curvature_at_pole(&flower(h, 1), 0.05).unwrap();
            assert!((k - h).abs() < 1e-2, "h={h}: {k}");
        }
    }

    #[test]
    fn points_on_unit_sphere() {
        for c in [flower(1.0, 2), assemble_global(&unduloid(), 2).unwrap(), assemble_global(&params(3, 0.0, 0.0), 1).unwrap()] {
            for q in c.points3d() {
                let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn joins_are_curvature_continuous() {
        let cases = [unduloid(), params(3, 1.0, 0.0), params(3, 1.0, -0.2), params(3, 1.0, -0.5), params(3, 1.0, -0.7), params(3, 0.0, 0.0)];
        for p in cases {
            let c = assemble_global(&p, 2).unwrap();
            assert!(!c.joins.is_empty());
            let jump = max_join_curvature_jump(&c);
            assert!(jump < 1e-3, "{:?}: {jump}", c.kind);
        }
    }

    #[test]
    fn geodesic_is_a_great_circle_through_the_pole() {
        let c = assemble_global(&params(3, 0.0, 0.0), 1).unwrap();
        assert!(matches!(c.assembly[1], AssemblyStep::PoleReflection { .. }));
        assert!(closure_gap(&c) < 1e-15);
        assert_eq!(c.samples.last().unwrap().s1, PI);
        let v = closure_test(&params(3, 0.0, 0.0), 64).unwrap();
        assert!(v.closed);
        assert_eq!(v.rational.map(|r| (r.p, r.q)), Some((1, 1)));
    }

    #[test]
    fn closure_verdicts() {
        assert!(closure_test(&params(3, 1.0, 0.0), 64).unwrap().closed);
        assert!(closure_test(&params(3, 1.0, contact_constant(3, 1.0)), 64).unwrap().closed);
        let v = closure_test(&unduloid(), 64).unwrap();
        assert!(v.ratio > 0.0);
        assert_eq!(v.closed, v.rational.is_some());
    }

    #[test]
    fn open_curve_is_not_tested_for_embedding() {
        let c = assemble_global_with(&unduloid(), 1, 200).unwrap();
        assert!(matches!(embedding_test(&c), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn export_round_trip() {
        let c = assemble_global_with(&unduloid(), 1, 100).unwrap();
        for fmt in [ExportFormat::Csv, ExportFormat::Json] {
            let text = export_curve(&c.samples, fmt).unwrap();
            let back = read_curve(&text, fmt).unwrap();
            assert_eq!(back.len(), c.samples.len());
            for (r, q) in back.iter().zip(&c.samples) {
                assert_eq!(r.s.to_bits(), q.s.to_bits());
                assert_eq!(r.s1.to_bits(), q.s1.to_bits());
                assert_eq!(*r, CurveRecord::from(q));
            }
        }
        let csv = export_curve(&c.samples, ExportFormat::Csv).unwrap();
        assert_eq!(csv.lines().next(), Some("s,s1,x,y,z"));
        assert!(matches!(export_curve(&[], ExportFormat::Csv), Err(Error::EmptyCurve)));
        assert!(matches!("obj".parse::<ExportFormat>(), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn grid_clusters_only_at_zeros_of_d() {
        let p = params(3, 1.0, 0.0);
        let pi = PhaseIntegrand::new(&p).unwrap();
        let g = phase_grid(&pi, 101);
        let iv = profile_interval(&p).unwrap();
        assert!((g[1] - iv.s_lo - 0.0199 * iv.len()).abs() < 1e-15);
        assert!(iv.s_hi - g[99] < 1e-3 * iv.len());
    }
}
