//! Rotational constant mean curvature (Delaunay) hypersurfaces in the round
//! sphere `S^n`.
//!
//! A hypersurface is generated by rotating a curve
//! `γ(s) = (cos s · e^{i s1(s)}, sin s)` on `S^2` through an `S^{n-2}` factor.
//! Its phase rate `ds1/ds` is known in closed form in terms of the ambient
//! dimension `n`, the (unnormalized) mean curvature `h` and an integration
//! constant `C`; everything else in this crate is built on top of that:
//!
//! * [`profile`]: the closed-form profile, critical constants, admissible
//!   intervals and the type taxonomy,
//! * [`width`]: period widths by singular-endpoint quadrature and their limits,
//! * [`curves`]: phase integration, global assembly by reflections, closure
//!   and embeddedness checks, curve export,
//! * [`mesh`]: immersion meshes in `S^3` and stereographic OBJ export,
//! * [`oracle`]: independent mean curvature verification,
//! * [`solver`]: closure/embeddedness root solving and the `Z(k)` intervals.

pub mod curves;
pub mod error;
pub mod mesh;
pub mod oracle;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod rational;
pub mod roots;
pub mod solver;
pub mod width;

pub use error::{Error, Result};
pub use params::CmcParams;
pub use profile::{CriticalConstants, DelaunayType, EndpointKind, NormalConvention, ProfileInterval};
