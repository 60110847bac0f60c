//! Exact convex-polygon geometry, smooth boundary curves and normal graphs.

mod curve;
mod graph;
mod polygon;

pub use curve::{BoundaryCurve, Bumped, Circle, CurveNode, Ellipse, RoundedPolygon, SmoothBoundary, WulffBoundary};
pub use graph::{lemma_graph_bounds, normal_graph, LemmaReport, NormalGraph, Target};
pub use polygon::ConvexPolygon;

use crate::anisotropy::SurfaceTension;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec2::Vec2;

/// Default number of support directions for smooth Wulff shapes.
pub const DEFAULT_WULFF_DIRECTIONS: usize = 720;

/// Wulff shape `{x : x·ν ≤ f(ν) for all ν}`.
///
/// Crystalline tensions (possibly stretched) give the exact hull of their
/// generators and ignore `n_directions`. Smooth tensions give the
/// circumscribed polygon cut out by `n_directions` equispaced support lines;
/// its edges lie on support lines, so `P_f = 2|K|` holds for it exactly.
pub fn wulff_shape<T: Real>(
    tension: &SurfaceTension<T>,
    n_directions: usize,
) -> Result<ConvexPolygon<T>> {
    tension.validate()?;
    if let Some(gens) = tension.crystalline_generators() {
        return ConvexPolygon::convex_hull(&gens);
    }
    if n_directions < 3 {
        return Err(Error::Domain("smooth Wulff shape needs at least 3 directions".into()));
    }
    let step = T::TAU() / T::from_usize(n_directions).unwrap();
    let support: Vec<(Vec2<T>, T)> = (0..n_directions)
        .map(|k| {
            let nu = Vec2::polar(step * T::from_usize(k).unwrap());
            (nu, tension.value(nu))
        })
        .collect();
    // The shape lies in the disk of radius max f over the circle; start from
    // a square that certainly contains it.
    let r = support.iter().fold(T::zero(), |m, (_, h)| m.max(*h)) * T::lit(4.0);
    let mut poly = ConvexPolygon::rectangle(r, r)?;
    for (nu, h) in support {
        poly = poly
            .clip_halfplane(nu, h)
            .ok_or_else(|| Error::Geometry("Wulff construction collapsed".into()))?;
    }
    Ok(poly)
}

/// Smooth Wulff shape with direction count doubled from the default until
/// the area changes by less than `1e-8` (relative).
pub fn wulff_shape_converged<T: Real>(tension: &SurfaceTension<T>) -> Result<ConvexPolygon<T>> {
    let mut n = DEFAULT_WULFF_DIRECTIONS;
    let mut poly = wulff_shape(tension, n)?;
    if !tension.is_smooth() {
        return Ok(poly);
    }
    loop {
        n *= 2;
        let next = wulff_shape(tension, n)?;
        let (a0, a1) = (poly.area(), next.area());
        poly = next;
        if (a0 - a1).abs() <= T::lit(1e-8) * a1 || n >= 1 << 16 {
            return Ok(poly);
        }
    }
}

/// Symmetric-difference areas measuring how far `Wulff(f_a)` is from the two
/// candidate stretches of `Wulff(f)`: `(x, y) ↦ (a x, y/a)` (first entry) and
/// `(x, y) ↦ (x/a, a y)` (second entry), relative to the Wulff area.
pub fn stretch_convention_defect<T: Real>(
    tension: &SurfaceTension<T>,
    a: T,
    n_directions: usize,
) -> Result<(T, T)> {
    let k = wulff_shape(tension, n_directions)?;
    let ka = wulff_shape(&tension.stretch(a)?, n_directions)?;
    let matched = k.stretch(a.recip())?;
    let reflected = k.stretch(a)?;
    let area = ka.area();
    Ok((
        ka.sym_diff_area(&matched, false) / area,
        ka.sym_diff_area(&reflected, false) / area,
    ))
}
