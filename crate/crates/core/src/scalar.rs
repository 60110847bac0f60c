//! Scalar abstraction for the geometry and anisotropy layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point types the exact-geometry code is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute slack used by geometric predicates at unit scale.
    const GEOM_EPS: f64;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn geom_eps() -> Self {
        Self::lit(Self::GEOM_EPS)
    }
}

impl Real for f32 {
    const GEOM_EPS: f64 = 1e-6;
}

impl Real for f64 {
    const GEOM_EPS: f64 = 1e-12;
}
