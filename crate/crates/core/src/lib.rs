//! Anisotropic liquid-drop energies `E_γ(F) = P_f(F) + γ V(F)` for planar
//! convex sets.
//!
//! The geometry and anisotropy layers are generic over [`Real`] (`f32` or
//! `f64`). The Riesz, variation and minimization layers work in `f64`.

pub mod acceptance;
pub mod anisotropy;
pub mod cli;
pub mod dropsolve;
pub mod error;
pub mod geometry;
pub mod minimize;
pub mod quad;
pub mod riesz;
pub mod scalar;
pub mod variations;
pub mod vec2;

pub use anisotropy::SurfaceTension;
pub use error::{Error, Result};
pub use geometry::{wulff_shape, BoundaryCurve, ConvexPolygon};
pub use scalar::Real;
pub use vec2::Vec2;

pub type Polygon = ConvexPolygon<f64>;
pub type Tension = SurfaceTension<f64>;
pub type Vec2d = Vec2<f64>;
