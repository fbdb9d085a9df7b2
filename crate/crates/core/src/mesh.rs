//! Surfaces of revolution in `S³` from a generating curve, stereographic
//! projection to `ℝ³`, and OBJ export.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::curves::{closure_gap, CurveClosure, GeneratingCurve, CLOSURE_TOL};
use crate::error::{Error, Result};

/// Default projection pole.
pub const DEFAULT_POLE: [f64; 4] = [0.0, 0.0, 0.0, -1.0];

/// Rings with `|sin s|` below this collapse to a point.
pub const DEGENERATE_RING: f64 = 1e-12;

/// Minimum distance of a mesh point from the projection pole.
pub const POLE_TOL: f64 = 1e-9;

/// A surface mesh: the points on `S³`, their stereographic images and the
/// faces (quads, or triangles next to collapsed rings), 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub points4: Vec<[f64; 4]>,
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
}

impl SurfaceMesh {
    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashSet::new();
        for f in &self.faces {
            for i in 0..f.len() {
                let (a, b) = (f[i], f[(i + 1) % f.len()]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }
}

/// `(cos s cos s₁, cos s sin s₁, sin s cos φ, sin s sin φ)`.
pub fn surface_point(s: f64, s1: f64, phi: f64) -> [f64; 4] {
    let (ss, cs) = s.sin_cos();
    let (s1s, s1c) = s1.sin_cos();
    let (ps, pc) = phi.sin_cos();
    [cs * s1c, cs * s1s, ss * pc, ss * ps]
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Stereographic projection of `S³` from a unit pole onto its orthogonal
/// hyperplane, in an orthonormal basis of that hyperplane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stereographic {
    pole: [f64; 4],
    basis: [[f64; 4]; 3],
}

impl Stereographic {
    pub fn new(pole: [f64; 4]) -> Result<Self> {
        let norm = dot(&pole, &pole).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidParams(format!("projection pole {pole:?} has no direction")));
        }
        let pole = pole.map(|x| x / norm);
        // Gram-Schmidt on the standard basis, skipping the axis closest to the pole.
        let skip = (0..4).max_by(|&i, &j| pole[i].abs().total_cmp(&pole[j].abs())).unwrap_or(3);
        let mut basis = [[0.0; 4]; 3];
        let mut frame = vec![pole];
        for (slot, axis) in (0..4).filter(|&i| i != skip).enumerate() {
            let mut v = [0.0; 4];
            v[axis] = 1.0;
            for u in &frame {
                let c = dot(&v, u);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= c * ui;
                }
            }
            let len = dot(&v, &v).sqrt();
            let v = v.map(|x| x / len);
            basis[slot] = v;
            frame.push(v);
        }
        Ok(Self { pole, basis })
    }

    pub fn pole(&self) -> [f64; 4] {
        self.pole
    }

    pub fn project(&self, x: &[f64; 4]) -> Result<[f64; 3]> {
        let dist = x.iter().zip(&self.pole).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dist < POLE_TOL {
            return Err(Error::PoleCollision { dist });
        }
        let denom = 1.0 - dot(x, &self.pole);
        Ok(self.basis.map(|e| dot(x, &e) / denom))
    }
}

/// The surface swept by `curve` with `azimuthal` steps in `φ`, projected
/// from `pole`. Closed curves are wrapped; rings on `s = 0` collapse to a
/// single vertex joined by triangle fans.
pub fn mesh(curve: &GeneratingCurve, azimuthal: usize, pole: [f64; 4]) -> Result<SurfaceMesh> {
    if azimuthal < 3 {
        return Err(Error::InvalidParams(format!("azimuthal resolution must be at least 3, got {azimuthal}")));
    }
    let proj = Stereographic::new(pole)?;
    let mut rows = curve.samples.as_slice();
    if rows.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let wrap = curve.closure != CurveClosure::AxisEnds && rows.len() > 2 && closure_gap(curve) < CLOSURE_TOL;
    if wrap {
        rows = &rows[..rows.len() - 1];
    }

    // Vertex indices of each ring.
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(rows.len());
    let mut points4 = Vec::new();
    for q in rows {
        let start = points4.len();
        if q.s.sin().abs() < DEGENERATE_RING {
            points4.push(surface_point(q.s, q.s1, 0.0));
        } else {
            points4.extend((0..azimuthal).map(|j| surface_point(q.s, q.s1, 2.0 * PI * j as f64 / azimuthal as f64)));
        }
        rings.push((start..points4.len()).collect());
    }
    let vertices = points4.par_iter().map(|x| proj.project(x)).collect::<Result<Vec<_>>>()?;

    let mut faces = Vec::new();
    let pairs = rings.len() - 1 + usize::from(wrap);
    for i in 0..pairs {
        let (a, b) = (&rings[i], &rings[(i + 1) % rings.len()]);
        match (a.len(), b.len()) {
            (1, 1) => {}
            (1, _) => faces.extend((0..azimuthal).map(|j| vec![a[0], b[j], b[(j + 1) % azimuthal]])),
            (_, 1) => faces.extend((0..azimuthal).map(|j| vec![a[j], b[0], a[(j + 1) % azimuthal]])),
            _ => faces.extend((0..azimuthal).map(|j| {
                let j1 = (j + 1) % azimuthal;
                vec![a[j], b[j], b[j1], a[j1]]
            })),
        }
    }
    Ok(SurfaceMesh { points4, vertices, faces })
}

/// Wavefront OBJ text: `v` lines at 17 significant digits, 1-based `f` lines.
/// Export is limited to `n = 3`, where the swept sphere is the circle `φ`.
pub fn export_obj(curve: &GeneratingCurve, m: &SurfaceMesh) -> Result<String> {
    if curve.params.n != 3 {
        return Err(Error::InvalidParams(format!("OBJ export needs n = 3, got n = {}", curve.params.n)));
    }
    let mut out = String::with_capacity(64 * m.vertices.len());
    for v in &m.vertices {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]);
    }
    for f in &m.faces {
        out.push('f');
        for i in f {
            let _ = write!(out, " {}", i + 1);
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{assemble_global_with, static_torus_curve};
    use crate::params::CmcParams;
    use crate::profile::{contact_constant, equilibrium_ratio, DelaunayType};

    fn norm4(x: &[f64; 4]) -> f64 {
        dot(x, x).sqrt()
    }

    #[test]
    fn torus_radii_ratio() {
        let h = 0.7;
        let p = CmcParams::new(3, h, contact_constant(3, h)).unwrap();
        let curve = static_torus_curve(&p, 48).unwrap();
        let m = mesh(&curve, 32, DEFAULT_POLE).unwrap();
        assert_eq!(m.points4.len(), 48 * 32);
        for x in &m.points4 {
            let r1 = x[0].hypot(x[1]);
            let r2 = x[2].hypot(x[3]);
            assert!((r1 / r2 - equilibrium_ratio(3, h)).abs() < 1e-12);
        }
        assert_eq!(m.euler_characteristic(), 0);
    }

    #[test]
    fn projected_torus_is_a_torus_of_revolution() {
        // From the default pole the circles of the first factor are horizontal
        // and centred on the third axis.
        let p = CmcParams::new(3, 0.0, contact_constant(3, 0.0)).unwrap();
        let curve = static_torus_curve(&p, 40).unwrap();
        let m = mesh(&curve, 40, DEFAULT_POLE).unwrap();
        let s = PI / 4.0;
        let (big, small) = (1.0 / s.cos(), s.tan());
        for v in &m.vertices {
            let r = v[0].hypot(v[1]);
            let d = ((r - big).powi(2) + v[2].powi(2)).sqrt();
            assert!((d - small).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn sphere_union_is_a_sphere() {
        let p = CmcParams::new(3, 1.0, 0.0).unwrap();
        let curve = assemble_global_with(&p, 1, 200).unwrap();
        assert_eq!(curve.kind, DelaunayType::SphereUnion);
        let m = mesh(&curve, 24, DEFAULT_POLE).unwrap();
        assert_eq!(m.euler_characteristic(), 2);
        for x in &m.points4 {
            assert!((norm4(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unduloid_points_on_unit_sphere() {
        let p = CmcParams::new(3, 1.0, 0.5 * contact_constant(3, 1.0)).unwrap();
        let curve = assemble_global_with(&p, 3, 200).unwrap();
        let m = mesh(&curve, 16, DEFAULT_POLE).unwrap();
        assert!(m.points4.iter().all(|x| (norm4(x) - 1.0).abs() < 1e-12));
        assert!(m.vertices.iter().all(|v| v.iter().all(|c| c.is_finite())));
    }

    #[test]
    fn projection_from_other_poles() {
        let proj = Stereographic::new([1.0, 1.0, 0.0, 0.0]).unwrap();
        let pole = proj.pole();
        assert!(matches!(proj.project(&pole), Err(Error::PoleCollision { .. })));
        // The antipode maps to the origin and the equator to the unit sphere.
        let anti = pole.map(|x| -x);
        assert!(proj.project(&anti).unwrap().iter().all(|c| c.abs() < 1e-15));
        let eq = [0.0, 0.0, 0.6, 0.8];
        let y = proj.project(&eq).unwrap();
        assert!(((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn obj_layout() {
        let p = CmcParams::new(3, 0.0, contact_constant(3, 0.0)).unwrap();
        let curve = static_torus_curve(&p, 8).unwrap();
        let m = mesh(&curve, 6, DEFAULT_POLE).unwrap();
        let obj = export_obj(&curve, &m).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 48);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 48);
        let v: Vec<f64> = obj.lines().next().unwrap().split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect();
        assert_eq!(v.as_slice(), m.vertices[0].as_slice());
        let p4 = CmcParams::new(4, 0.0, contact_constant(4, 0.0)).unwrap();
        let c4 = static_torus_curve(&p4, 8).unwrap();
        let m4 = mesh(&c4, 6, DEFAULT_POLE).unwrap();
        assert!(export_obj(&c4, &m4).is_err());
    }
}
