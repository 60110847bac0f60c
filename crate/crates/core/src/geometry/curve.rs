use serde::{Deserialize, Serialize};

use crate::anisotropy::SurfaceTension;
use crate::error::{domain, Error, Result};
use crate::geometry::ConvexPolygon;
use crate::quad::kronrod15;
use crate::vec2::Vec2;

type V = Vec2<f64>;

/// A closed, counter-clockwise, C² curve parametrized over `[0, 2π)`.
///
/// `d1` and `d2` default to central differences of `point`; implementors
/// with closed forms override them.
pub trait SmoothBoundary {
    fn point(&self, t: f64) -> V;

    fn d1(&self, t: f64) -> V {
        let h = 1e-5;
        (self.point(t + h) - self.point(t - h)) / (2.0 * h)
    }

    fn d2(&self, t: f64) -> V {
        let h = 1e-4;
        (self.point(t + h) - self.point(t) * 2.0 + self.point(t - h)) / (h * h)
    }

    fn outward_normal(&self, t: f64) -> V {
        let d = self.d1(t);
        V::new(d.y, -d.x).normalized()
    }

    fn curvature(&self, t: f64) -> f64 {
        let (d1, d2) = (self.d1(t), self.d2(t));
        d1.cross(d2) / d1.norm().powi(3)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Circle {
    pub center: V,
    pub radius: f64,
}

impl SmoothBoundary for Circle {
    fn point(&self, t: f64) -> V {
        self.center + V::polar(t) * self.radius
    }
    fn d1(&self, t: f64) -> V {
        V::polar(t).perp() * self.radius
    }
    fn d2(&self, t: f64) -> V {
        -V::polar(t) * self.radius
    }
}

/// Axis-aligned ellipse with semi-axes `a` (along x) and `b`.
#[derive(Clone, Copy, Debug)]
pub struct Ellipse {
    pub center: V,
    pub a: f64,
    pub b: f64,
}

impl Ellipse {
    /// Where the normal ray `x + tν` meets the ellipse `{|M(x−c)| = 1}`,
    /// returned as the root `t` of smallest magnitude. Used as an
    /// independent ray-casting oracle.
    pub fn ray_hit(&self, origin: V, dir: V) -> Option<f64> {
        let p = origin - self.center;
        let (ia, ib) = (self.a.recip(), self.b.recip());
        let (px, py, dx, dy) = (p.x * ia, p.y * ib, dir.x * ia, dir.y * ib);
        let qa = dx * dx + dy * dy;
        let qb = 2.0 * (px * dx + py * dy);
        let qc = px * px + py * py - 1.0;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        let q = -0.5 * (qb + if qb >= 0.0 { s } else { -s });
        if q == 0.0 {
            return Some(0.0);
        }
        let (r1, r2) = (q / qa, qc / q);
        Some(if r1.abs() < r2.abs() { r1 } else { r2 })
    }
}

impl SmoothBoundary for Ellipse {
    fn point(&self, t: f64) -> V {
        self.center + V::new(self.a * t.cos(), self.b * t.sin())
    }
    fn d1(&self, t: f64) -> V {
        V::new(-self.a * t.sin(), self.b * t.cos())
    }
    fn d2(&self, t: f64) -> V {
        V::new(-self.a * t.cos(), -self.b * t.sin())
    }
}

/// Boundary of the Wulff shape of a smooth tension, `θ ↦ s·∇f(ν(θ))`.
#[derive(Clone, Debug)]
pub struct WulffBoundary {
    pub tension: SurfaceTension<f64>,
    pub scale: f64,
}

impl WulffBoundary {
    pub fn new(tension: SurfaceTension<f64>, scale: f64) -> Result<Self> {
        if !tension.is_smooth() {
            return Err(Error::Unsupported(
                "crystalline Wulff shapes have no smooth boundary".into(),
            ));
        }
        if !(scale > 0.0) {
            return Err(domain("Wulff boundary scale must be positive"));
        }
        Ok(Self { tension, scale })
    }
}

impl SmoothBoundary for WulffBoundary {
    fn point(&self, t: f64) -> V {
        self.tension.gradient(V::polar(t)) * self.scale
    }
}

/// A base boundary pushed outward along its normal by a compactly supported
/// `amplitude · cos⁴(π(t − t0)/(2w))` bump on `|t − t0| < w`.
#[derive(Clone, Debug)]
pub struct Bumped<B> {
    pub base: B,
    pub t0: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl<B: SmoothBoundary> Bumped<B> {
    pub fn offset(&self, t: f64) -> f64 {
        let tau = std::f64::consts::TAU;
        let mut d = (t - self.t0).rem_euclid(tau);
        if d > 0.5 * tau {
            d -= tau;
        }
        if d.abs() >= self.half_width {
            return 0.0;
        }
        let c = (std::f64::consts::FRAC_PI_2 * d / self.half_width).cos();
        self.amplitude * c.powi(4)
    }
}

impl<B: SmoothBoundary> SmoothBoundary for Bumped<B> {
    fn point(&self, t: f64) -> V {
        self.base.point(t) + self.base.outward_normal(t) * self.offset(t)
    }
}

/// A convex polygon with every corner rounded by a circular arc of radius
/// `radius`: the outer parallel body of the polygon shrunk by `radius`.
/// Parametrized proportionally to arclength.
#[derive(Clone, Debug)]
pub struct RoundedPolygon {
    /// `(start, unit direction, length)` of each straight piece, followed by
    /// the arc around the next corner.
    pieces: Vec<(V, V, f64, V, f64)>,
    radius: f64,
    length: f64,
}

impl RoundedPolygon {
    pub fn new(poly: &ConvexPolygon<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(domain("rounding radius must be positive"));
        }
        let verts = poly.vertices();
        let n = verts.len();
        // Inner parallel polygon: offset each edge line inward by `radius`.
        let mut inner = poly.clone();
        for (a, b) in poly.edges() {
            let e = b - a;
            let nu = V::new(e.y, -e.x).normalized();
            inner = inner
                .clip_halfplane(nu, nu.dot(a) - radius)
                .ok_or_else(|| Error::Geometry("rounding radius too large for polygon".into()))?;
        }
        if inner.len() != n {
            return Err(Error::Geometry("rounding radius removes polygon edges".into()));
        }
        let iv = inner.vertices();
        // Match inner vertices to the original corners by nearest point.
        let shift = (0..n)
            .min_by(|&i, &j| {
                (iv[i] - verts[0]).norm().partial_cmp(&(iv[j] - verts[0]).norm()).unwrap()
            })
            .unwrap();
        let corner = |k: usize| iv[(k + shift) % n];
        let mut pieces = Vec::with_capacity(n);
        let mut length = 0.0;
        for k in 0..n {
            let (a, b) = (verts[k], verts[(k + 1) % n]);
            let e = b - a;
            let dir = e.normalized();
            let nu = V::new(dir.y, -dir.x);
            let start = corner(k) + nu * radius;
            let seg = (corner((k + 1) % n) - corner(k)).norm();
            let next_dir = (verts[(k + 2) % n] - b).normalized();
            let turn = dir.cross(next_dir).atan2(dir.dot(next_dir));
            pieces.push((start, dir, seg, corner((k + 1) % n), turn));
            length += seg + radius * turn;
        }
        Ok(Self {
            pieces,
            radius,
            length,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Position, outward normal and curvature at arclength `s`.
    fn locate(&self, s: f64) -> (V, V, f64) {
        let mut s = s.rem_euclid(self.length);
        for &(start, dir, seg, center, turn) in &self.pieces {
            if s <= seg {
                return (start + dir * s, V::new(dir.y, -dir.x), 0.0);
            }
            s -= seg;
            let arc = self.radius * turn;
            if s <= arc {
                let phi = V::new(dir.y, -dir.x).angle() + s / self.radius;
                let nu = V::polar(phi);
                return (center + nu * self.radius, nu, 1.0 / self.radius);
            }
            s -= arc;
        }
        let (start, dir, ..) = self.pieces[0];
        (start, V::new(dir.y, -dir.x), 0.0)
    }
}

impl SmoothBoundary for RoundedPolygon {
    fn point(&self, t: f64) -> V {
        self.locate(t / std::f64::consts::TAU * self.length).0
    }
    fn d1(&self, t: f64) -> V {
        let (_, nu, _) = self.locate(t / std::f64::consts::TAU * self.length);
        nu.perp() * (self.length / std::f64::consts::TAU)
    }
    fn d2(&self, t: f64) -> V {
        let (_, nu, k) = self.locate(t / std::f64::consts::TAU * self.length);
        let speed = self.length / std::f64::consts::TAU;
        -nu * (k * speed * speed)
    }
    fn outward_normal(&self, t: f64) -> V {
        self.locate(t / std::f64::consts::TAU * self.length).1
    }
    fn curvature(&self, t: f64) -> f64 {
        self.locate(t / std::f64::consts::TAU * self.length).2
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveNode {
    pub position: V,
    pub normal: V,
    pub curvature: f64,
}

/// A closed curve sampled at nodes uniformly spaced in arclength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveJson", into = "CurveJson")]
pub struct BoundaryCurve {
    nodes: Vec<CurveNode>,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    vertices: Vec<V>,
    normals: Vec<V>,
    curvatures: Vec<f64>,
    length: f64,
}

impl From<BoundaryCurve> for CurveJson {
    fn from(c: BoundaryCurve) -> Self {
        Self {
            vertices: c.nodes.iter().map(|n| n.position).collect(),
            normals: c.nodes.iter().map(|n| n.normal).collect(),
            curvatures: c.nodes.iter().map(|n| n.curvature).collect(),
            length: c.length,
        }
    }
}

impl TryFrom<CurveJson> for BoundaryCurve {
    type Error = Error;
    fn try_from(j: CurveJson) -> Result<Self> {
        if j.vertices.len() != j.normals.len() || j.vertices.len() != j.curvatures.len() {
            return Err(domain("curve arrays have different lengths"));
        }
        let nodes = j
            .vertices
            .into_iter()
            .zip(j.normals)
            .zip(j.curvatures)
            .map(|((position, normal), curvature)| CurveNode {
                position,
                normal,
                curvature,
            })
            .collect();
        Self::from_nodes(nodes, j.length)
    }
}

impl BoundaryCurve {
    pub fn from_nodes(nodes: Vec<CurveNode>, length: f64) -> Result<Self> {
        if nodes.len() < 8 {
            return Err(domain("boundary curve needs at least 8 nodes"));
        }
        if !(length > 0.0) {
            return Err(domain("boundary curve length must be positive"));
        }
        if nodes.iter().any(|n| (n.normal.norm() - 1.0).abs() > 1e-10) {
            return Err(domain("curve normals must have unit length"));
        }
        Ok(Self { nodes, length })
    }

    /// Samples `n` nodes uniformly in arclength. Node 0 sits at `t = 0`.
    pub fn sample<B: SmoothBoundary + ?Sized>(shape: &B, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(domain("boundary curve needs at least 8 nodes"));
        }
        let tau = std::f64::consts::TAU;
        let panels = 8 * n;
        let dt = tau / panels as f64;
        let speed = |t: f64| shape.d1(t).norm();
        let mut cum = Vec::with_capacity(panels + 1);
        cum.push(0.0);
        for j in 0..panels {
            let a = j as f64 * dt;
            let s = cum[j] + kronrod15(speed, a, a + dt);
            cum.push(s);
        }
        let length = cum[panels];
        let mut nodes = Vec::with_capacity(n);
        for k in 0..n {
            let target = length * k as f64 / n as f64;
            let j = match cum.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
                Ok(j) => j.min(panels - 1),
                Err(j) => j - 1,
            };
            let t0 = j as f64 * dt;
            let mut t = t0 + (target - cum[j]) / speed(t0).max(1e-300);
            for _ in 0..30 {
                let s = cum[j] + kronrod15(speed, t0, t);
                let step = (s - target) / speed(t);
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            nodes.push(CurveNode {
                position: shape.point(t),
                normal: shape.outward_normal(t),
                curvature: shape.curvature(t),
            });
        }
        Ok(Self { nodes, length })
    }

    pub fn nodes(&self) -> &[CurveNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Arclength spacing between consecutive nodes.
    pub fn spacing(&self) -> f64 {
        self.length / self.nodes.len() as f64
    }

    pub fn max_curvature(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, n| m.max(n.curvature.abs()))
    }

    /// `Σ κ Δs`, equal to `2π` for a simple closed convex curve.
    pub fn total_curvature(&self) -> f64 {
        self.nodes.iter().map(|n| n.curvature).sum::<f64>() * self.spacing()
    }

    /// `∫ f(ν) ds` by the periodic trapezoid rule.
    pub fn anisotropic_perimeter(&self, tension: &SurfaceTension<f64>) -> f64 {
        self.nodes.iter().map(|n| tension.value(n.normal)).sum::<f64>() * self.spacing()
    }

    /// Diameter of the node cloud.
    pub fn diameter(&self) -> f64 {
        let mut d2: f64 = 0.0;
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                d2 = d2.max((b.position - a.position).norm_sq());
            }
        }
        d2.sqrt()
    }

    /// The inscribed polygon through the nodes.
    pub fn to_polygon(&self) -> Result<ConvexPolygon<f64>> {
        ConvexPolygon::new(self.nodes.iter().map(|n| n.position).collect())
    }

    /// Unit tangent (counter-clockwise) at node `i`.
    pub fn tangent(&self, i: usize) -> V {
        self.nodes[i].normal.perp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn circle_sampling() {
        let c = BoundaryCurve::sample(
            &Circle {
                center: V::new(1.0, -2.0),
                radius: 0.7,
            },
            256,
        )
        .unwrap();
        assert_relative_eq!(c.length(), TAU * 0.7, max_relative = 1e-13);
        for n in c.nodes() {
            assert_abs_diff_eq!(n.curvature, 1.0 / 0.7, epsilon = 1e-12);
            assert_abs_diff_eq!(n.normal.norm(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(c.total_curvature(), TAU, epsilon = 1e-10);
    }

    #[test]
    fn ellipse_nodes_are_uniform_in_arclength() {
        let e = Ellipse {
            center: V::zero(),
            a: 2.0,
            b: 1.0,
        };
        let c = BoundaryCurve::sample(&e, 512).unwrap();
        // Complete elliptic integral value for the (2, 1) ellipse.
        assert_relative_eq!(c.length(), 9.688_448_220_547_675, max_relative = 1e-12);
        let h = c.spacing();
        for w in c.nodes().windows(2) {
            let chord = (w[1].position - w[0].position).norm();
            // Chord is shorter than arc by at most h³κ²/24.
            assert!(chord <= h + 1e-12 && chord >= h - h.powi(3) * 4.0 / 24.0 - 1e-12);
        }
        assert_abs_diff_eq!(c.total_curvature(), TAU, epsilon = 1e-3);
        assert_abs_diff_eq!(c.nodes()[0].curvature, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn wulff_boundary_matches_ellipse() {
        let f = SurfaceTension::quadratic([[4.0, 0.0], [0.0, 1.0]]).unwrap();
        let w = BoundaryCurve::sample(&WulffBoundary::new(f.clone(), 1.0).unwrap(), 256).unwrap();
        assert_relative_eq!(w.length(), 9.688_448_220_547_675, max_relative = 1e-9);
        for n in w.nodes() {
            let p = n.position;
            assert_abs_diff_eq!((p.x / 2.0).powi(2) + p.y * p.y, 1.0, epsilon = 1e-12);
            // Curvature of the Wulff shape is the reciprocal tangential Hessian.
            let ftt = f.tangential_second_derivative(n.normal).unwrap();
            assert_relative_eq!(n.curvature, 1.0 / ftt, max_relative = 1e-5);
        }
        // Wulff identity on the curve.
        let poly = w.to_polygon().unwrap();
        assert_relative_eq!(w.anisotropic_perimeter(&f), 2.0 * 2.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(poly.area(), 2.0 * PI, max_relative = 1e-3);
        assert!(WulffBoundary::new(SurfaceTension::rectangular(1.5).unwrap(), 1.0).is_err());
    }

    #[test]
    fn rounded_square() {
        let sq = ConvexPolygon::rectangle(2.0, 2.0).unwrap();
        let r = RoundedPolygon::new(&sq, 0.1).unwrap();
        assert_relative_eq!(r.length(), 4.0 * 1.8 + TAU * 0.1, max_relative = 1e-12);
        let c = BoundaryCurve::sample(&r, 1000).unwrap();
        assert_relative_eq!(c.length(), r.length(), max_relative = 1e-9);
        // Curvature jumps at the arc joins, so the discrete sum is only
        // accurate to about one node per join.
        assert_abs_diff_eq!(c.total_curvature(), TAU, epsilon = 8.0 * c.spacing() * 10.0);
        for n in c.nodes() {
            let p = n.position;
            assert!(p.x.abs() <= 1.0 + 1e-12 && p.y.abs() <= 1.0 + 1e-12);
        }
        assert!(RoundedPolygon::new(&sq, 1.5).is_err());
    }

    #[test]
    fn bump_is_local() {
        let e = Ellipse {
            center: V::zero(),
            a: 2.0,
            b: 1.0,
        };
        let b = Bumped {
            base: e,
            t0: 0.0,
            half_width: 0.2,
            amplitude: 0.004,
        };
        assert_abs_diff_eq!(b.point(0.0).x, 2.004, epsilon = 1e-15);
        assert_eq!(b.point(1.0), e.point(1.0));
        assert_eq!(b.offset(TAU - 0.3), 0.0);
        assert!(b.offset(TAU - 0.1) > 0.0);
    }

    #[test]
    fn json_shape() {
        let c = BoundaryCurve::sample(
            &Circle {
                center: V::zero(),
                radius: 1.0,
            },
            16,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["vertices"].as_array().unwrap().len(), 16);
        assert_eq!(v["normals"].as_array().unwrap().len(), 16);
        assert_eq!(v["curvatures"].as_array().unwrap().len(), 16);
        let back: BoundaryCurve = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
