use serde::{Deserialize, Serialize};

use crate::anisotropy::{dihedral_images, SurfaceTension};
use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::vec2::Vec2;

/// A convex polygon with counter-clockwise vertices and no redundant
/// (coincident or collinear) vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
#[serde(try_from = "RawPolygon<T>")]
pub struct ConvexPolygon<T> {
    vertices: Vec<Vec2<T>>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
struct RawPolygon<T> {
    vertices: Vec<Vec2<T>>,
}

impl<T: Real> TryFrom<RawPolygon<T>> for ConvexPolygon<T> {
    type Error = Error;
    fn try_from(raw: RawPolygon<T>) -> Result<Self> {
        Self::new(raw.vertices)
    }
}

impl<T: Real> ConvexPolygon<T> {
    /// Validates a counter-clockwise convex vertex list. Coincident vertices
    /// are merged and collinear ones dropped before the checks.
    pub fn new(vertices: Vec<Vec2<T>>) -> Result<Self> {
        let tol = Self::tolerance(&vertices);
        let vertices = simplify(vertices, tol);
        if vertices.len() < 3 {
            return Err(Error::Geometry(
                "polygon needs at least 3 non-collinear vertices".into(),
            ));
        }
        let n = vertices.len();
        for i in 0..n {
            let e0 = vertices[(i + 1) % n] - vertices[i];
            let e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            if e0.cross(e1) < -tol {
                return Err(Error::Geometry(
                    "vertices are not in convex counter-clockwise order".into(),
                ));
            }
        }
        let poly = Self { vertices };
        if !(poly.area() > tol) {
            return Err(Error::Geometry("polygon has no interior".into()));
        }
        // Turning number one rules out self-overlapping convex-looking loops.
        let mut turn = T::zero();
        for i in 0..n {
            let e0 = poly.vertices[(i + 1) % n] - poly.vertices[i];
            let e1 = poly.vertices[(i + 2) % n] - poly.vertices[(i + 1) % n];
            turn = turn + e0.cross(e1).atan2(e0.dot(e1));
        }
        if (turn - T::TAU()).abs() > T::lit(1e-3) {
            return Err(Error::Geometry("polygon winds more than once".into()));
        }
        Ok(poly)
    }

    /// Convex hull of a point cloud (monotone chain).
    pub fn convex_hull(points: &[Vec2<T>]) -> Result<Self> {
        let mut pts: Vec<Vec2<T>> = points.to_vec();
        if pts.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::Geometry("non-finite hull input".into()));
        }
        pts.sort_by(|a, b| {
            a.x.partial_cmp(&b.x)
                .unwrap()
                .then(a.y.partial_cmp(&b.y).unwrap())
        });
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::Geometry("hull needs at least 3 distinct points".into()));
        }
        let mut hull: Vec<Vec2<T>> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &Vec2<T>>> = if pass == 0 {
                Box::new(pts.iter())
            } else {
                Box::new(pts.iter().rev())
            };
            for &p in iter {
                while hull.len() >= start + 2 {
                    let a = hull[hull.len() - 2];
                    let b = hull[hull.len() - 1];
                    if (b - a).cross(p - a) <= T::zero() {
                        hull.pop();
                    } else {
                        break;
                    }
                }
                hull.push(p);
            }
            hull.pop();
        }
        Self::new(hull)
    }

    /// Axis-aligned rectangle `[-w/2, w/2] × [-h/2, h/2]`.
    pub fn rectangle(width: T, height: T) -> Result<Self> {
        let (x, y) = (width * T::lit(0.5), height * T::lit(0.5));
        Self::new(vec![
            Vec2::new(x, -y),
            Vec2::new(x, y),
            Vec2::new(-x, y),
            Vec2::new(-x, -y),
        ])
    }

    /// Regular `n`-gon inscribed in the circle of radius `r` about the
    /// origin, with a vertex at angle `phase`.
    pub fn regular(n: usize, r: T, phase: T) -> Result<Self> {
        if n < 3 {
            return Err(domain("regular polygon needs n >= 3"));
        }
        let step = T::TAU() / T::from_usize(n).unwrap();
        Self::new(
            (0..n)
                .map(|k| Vec2::polar(phase + step * T::from_usize(k).unwrap()) * r)
                .collect(),
        )
    }

    /// Builds a polygon without revalidating; the caller guarantees the
    /// invariants (used for images under orientation-preserving affine maps).
    fn from_trusted(vertices: Vec<Vec2<T>>) -> Self {
        Self { vertices }
    }

    fn tolerance(vertices: &[Vec2<T>]) -> T {
        let scale = vertices
            .iter()
            .fold(T::zero(), |m, v| m.max(v.x.abs()).max(v.y.abs()));
        T::geom_eps() * (scale * scale).max(T::one())
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs in counter-clockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2<T>, Vec2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area.
    pub fn area(&self) -> T {
        let o = self.vertices[0];
        let mut twice = T::zero();
        for (a, b) in self.edges() {
            twice = twice + (a - o).cross(b - o);
        }
        twice * T::lit(0.5)
    }

    pub fn area_and_barycenter(&self) -> (T, Vec2<T>) {
        let o = self.vertices[0];
        let mut twice = T::zero();
        let mut moment = Vec2::zero();
        for (a, b) in self.edges() {
            let (pa, pb) = (a - o, b - o);
            let c = pa.cross(pb);
            twice = twice + c;
            moment += (pa + pb) * c;
        }
        let area = twice * T::lit(0.5);
        (area, o + moment / (T::lit(3.0) * twice))
    }

    pub fn barycenter(&self) -> Vec2<T> {
        self.area_and_barycenter().1
    }

    pub fn perimeter(&self) -> T {
        self.edges().fold(T::zero(), |s, (a, b)| s + (b - a).norm())
    }

    /// `Σ |edge| · f(outward normal)`.
    pub fn anisotropic_perimeter(&self, tension: &SurfaceTension<T>) -> T {
        self.edges().fold(T::zero(), |s, (a, b)| {
            let e = b - a;
            // Outward normal times |e|; f is one-homogeneous.
            s + tension.value(Vec2::new(e.y, -e.x))
        })
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> T {
        let mut d2 = T::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d2 = d2.max((*b - *a).norm_sq());
            }
        }
        d2.sqrt()
    }

    pub fn translate(&self, v: Vec2<T>) -> Self {
        Self::from_trusted(self.vertices.iter().map(|p| *p + v).collect())
    }

    /// Uniform scaling about the origin.
    pub fn scale(&self, s: T) -> Result<Self> {
        if !(s > T::zero()) {
            return Err(domain("scale factor must be positive"));
        }
        Ok(Self::from_trusted(self.vertices.iter().map(|p| *p * s).collect()))
    }

    /// Rescales about the barycenter and recenters at the origin so the
    /// result has the given area.
    pub fn normalized(&self, area: T) -> Result<Self> {
        let (a, c) = self.area_and_barycenter();
        self.translate(-c).scale((area / a).sqrt())
    }

    /// `(x, y) ↦ (x/a, a·y)`, the area-preserving stretch.
    pub fn stretch(&self, a: T) -> Result<Self> {
        if !(a > T::zero() && a.is_finite()) {
            return Err(domain("stretch factor must be positive"));
        }
        let ai = a.recip();
        Ok(Self::from_trusted(
            self.vertices.iter().map(|p| p.scale_xy(ai, a)).collect(),
        ))
    }

    /// Image under a linear map with positive determinant.
    pub fn linear_map(&self, m: [[T; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if !(det > T::zero()) {
            return Err(domain("linear map must preserve orientation"));
        }
        Ok(Self::from_trusted(
            self.vertices
                .iter()
                .map(|p| Vec2::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y))
                .collect(),
        ))
    }

    /// Quarter-turn rotation about the origin.
    pub fn rotate90(&self) -> Self {
        Self::from_trusted(self.vertices.iter().map(|p| p.perp()).collect())
    }

    /// True when `p` lies in the closed polygon, with absolute slack `tol`
    /// measured as distance to the edge lines.
    pub fn contains(&self, p: Vec2<T>, tol: T) -> bool {
        self.edges().all(|(a, b)| {
            let e = b - a;
            e.cross(p - a) >= -tol * e.norm()
        })
    }

    /// Keeps the part on the side `x·normal <= offset`.
    pub fn clip_halfplane(&self, normal: Vec2<T>, offset: T) -> Option<Self> {
        clip_points(&self.vertices, normal, offset)
            .and_then(|pts| Self::cleaned(pts, Self::tolerance(&self.vertices)))
    }

    /// Intersection of two convex polygons by successive half-plane clipping
    /// of `self` against the edges of `other`. `None` when the interiors are
    /// disjoint.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let tol = Self::tolerance(&self.vertices).max(Self::tolerance(&other.vertices));
        let mut pts = self.vertices.clone();
        for (a, b) in other.edges() {
            let e = b - a;
            let normal = Vec2::new(e.y, -e.x);
            pts = clip_points(&pts, normal, normal.dot(a))?;
        }
        Self::cleaned(pts, tol)
    }

    fn cleaned(pts: Vec<Vec2<T>>, tol: T) -> Option<Self> {
        let pts = simplify(pts, tol);
        if pts.len() < 3 {
            return None;
        }
        let poly = Self::from_trusted(pts);
        (poly.area() > tol).then_some(poly)
    }

    /// `|A ∩ B|`, zero when disjoint.
    pub fn intersection_area(&self, other: &Self) -> T {
        self.intersect(other).map_or(T::zero(), |p| p.area())
    }

    /// `|A △ B| = |A| + |B| − 2|A ∩ B|`. With `align`, both sets are first
    /// translated to a common barycenter.
    pub fn sym_diff_area(&self, other: &Self, align: bool) -> T {
        let (a, b) = if align {
            (self.translate(-self.barycenter()), other.translate(-other.barycenter()))
        } else {
            (self.clone(), other.clone())
        };
        let d = a.area() + b.area() - T::lit(2.0) * a.intersection_area(&b);
        d.max(T::zero())
    }

    /// Set covariance `C(z) = |P ∩ (P − z)|`.
    pub fn covariance(&self, z: Vec2<T>) -> T {
        self.intersection_area(&self.translate(-z))
    }

    /// Whether the polygon is invariant under the symmetries of the square
    /// about its barycenter, up to a symmetric difference of `tol·|P|`.
    pub fn is_dihedral_symmetric(&self, tol: T) -> bool {
        let centered = self.translate(-self.barycenter());
        let area = centered.area();
        let images = |f: usize| -> Result<Self> {
            let pts: Vec<Vec2<T>> = centered.vertices.iter().map(|p| dihedral_images(*p)[f]).collect();
            // Reflections reverse orientation.
            let pts = if matches!(f, 1 | 2 | 4 | 7) {
                pts.into_iter().rev().collect()
            } else {
                pts
            };
            Self::new(pts)
        };
        (1..8).all(|f| match images(f) {
            Ok(img) => centered.sym_diff_area(&img, false) <= tol * area,
            Err(_) => false,
        })
    }

    pub fn cast<U: Real>(&self) -> ConvexPolygon<U> {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|v| v.cast()).collect(),
        }
    }
}

/// Sutherland–Hodgman step against `x·normal <= offset`.
fn clip_points<T: Real>(pts: &[Vec2<T>], normal: Vec2<T>, offset: T) -> Option<Vec<Vec2<T>>> {
    if pts.is_empty() {
        return None;
    }
    let mut out = Vec::with_capacity(pts.len() + 2);
    let side = |p: Vec2<T>| p.dot(normal) - offset;
    let n = pts.len();
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let (sp, sq) = (side(p), side(q));
        if sp <= T::zero() {
            out.push(p);
        }
        if (sp < T::zero() && sq > T::zero()) || (sp > T::zero() && sq < T::zero()) {
            let t = sp / (sp - sq);
            out.push(p + (q - p) * t);
        }
    }
    (out.len() >= 3).then_some(out)
}

/// Merges vertices closer than `tol` and drops collinear ones.
fn simplify<T: Real>(mut pts: Vec<Vec2<T>>, tol: T) -> Vec<Vec2<T>> {
    loop {
        let n = pts.len();
        if n < 3 {
            return pts;
        }
        let mut keep = Vec::with_capacity(n);
        let mut changed = false;
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let cur = pts[i];
            let next = pts[(i + 1) % n];
            if (cur - prev).norm() <= tol {
                changed = true;
                continue;
            }
            let (e0, e1) = (cur - prev, next - cur);
            if e0.cross(e1).abs() <= tol && e0.dot(e1) > T::zero() {
                changed = true;
                continue;
            }
            keep.push(cur);
        }
        pts = keep;
        if !changed {
            return pts;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type P = ConvexPolygon<f64>;
    type V = Vec2<f64>;

    fn unit_square() -> P {
        P::rectangle(1.0, 1.0).unwrap()
    }

    fn random_hull(rng: &mut ChaCha8Rng) -> P {
        let n = rng.gen_range(3..20);
        let pts: Vec<V> = (0..n.max(5))
            .map(|_| V::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        P::convex_hull(&pts).unwrap()
    }

    #[test]
    fn area_barycenter_examples() {
        let (a, c) = unit_square().area_and_barycenter();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.norm(), 0.0, epsilon = 1e-15);
        let r = P::rectangle(1.5, 2.0 / 3.0).unwrap();
        assert_abs_diff_eq!(r.area(), 1.0, epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_hull(&mut rng);
        let (a0, c0) = p.area_and_barycenter();
        let (a1, c1) = p.translate(V::new(2.0, 3.0)).area_and_barycenter();
        assert_abs_diff_eq!(a0, a1, epsilon = 1e-12);
        assert_abs_diff_eq!(c1.x - c0.x, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c1.y - c0.y, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_polygons() {
        let cw = vec![V::new(0.0, 0.0), V::new(0.0, 1.0), V::new(1.0, 1.0), V::new(1.0, 0.0)];
        assert!(P::new(cw).is_err());
        assert!(P::new(vec![V::new(0.0, 0.0), V::new(1.0, 0.0)]).is_err());
        let flat = vec![V::new(0.0, 0.0), V::new(1.0, 0.0), V::new(2.0, 0.0)];
        assert!(P::new(flat).is_err());
        let nonconvex = vec![
            V::new(0.0, 0.0),
            V::new(2.0, 0.0),
            V::new(1.0, 0.2),
            V::new(2.0, 2.0),
            V::new(0.0, 2.0),
        ];
        assert!(P::new(nonconvex).is_err());
    }

    #[test]
    fn drops_collinear_and_duplicate_vertices() {
        let p = P::new(vec![
            V::new(0.0, 0.0),
            V::new(0.5, 0.0),
            V::new(1.0, 0.0),
            V::new(1.0, 1.0),
            V::new(1.0, 1.0),
            V::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn perimeter_examples() {
        let e = SurfaceTension::<f64>::euclidean();
        assert_abs_diff_eq!(unit_square().anisotropic_perimeter(&e), 4.0, epsilon = 1e-15);
        let f = SurfaceTension::rectangular(1.5).unwrap();
        let b = 1.5;
        let s = P::rectangle(b, 1.0 / b).unwrap();
        assert_abs_diff_eq!(s.anisotropic_perimeter(&f), 2.0, epsilon = 1e-14);
        for b in [0.8, 1.2, 2.5] {
            let s = P::rectangle(b, 1.0 / b).unwrap();
            assert_abs_diff_eq!(s.anisotropic_perimeter(&f), 1.5 / b + b / 1.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn stretch_examples() {
        let s = unit_square().stretch(2.0).unwrap();
        let xs: Vec<f64> = s.vertices().iter().map(|v| v.x.abs()).collect();
        let ys: Vec<f64> = s.vertices().iter().map(|v| v.y.abs()).collect();
        assert!(xs.iter().all(|x| (x - 0.25).abs() < 1e-15));
        assert!(ys.iter().all(|y| (y - 1.0).abs() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let p = random_hull(&mut rng);
            let a: f64 = rng.gen_range(0.2..5.0);
            let q = p.stretch(a).unwrap();
            assert_relative_eq!(q.area(), p.area(), max_relative = 1e-12);
            let back = q.stretch(1.0 / a).unwrap();
            for (u, v) in back.vertices().iter().zip(p.vertices()) {
                assert_abs_diff_eq!((*u - *v).norm(), 0.0, epsilon = 1e-12);
            }
        }
        let c = P::regular(8, 1.0, 0.3).unwrap().stretch(1.7).unwrap().barycenter();
        assert_abs_diff_eq!(c.norm(), 0.0, epsilon = 1e-14);
        assert!(unit_square().stretch(0.0).is_err());
    }

    #[test]
    fn intersection_examples() {
        let s = unit_square();
        assert_abs_diff_eq!(s.intersect(&s).unwrap().area(), 1.0, epsilon = 1e-14);
        let shifted = s.translate(V::new(0.5, 0.0));
        assert_abs_diff_eq!(s.intersect(&shifted).unwrap().area(), 0.5, epsilon = 1e-14);
        assert!(s.intersect(&s.translate(V::new(3.0, 0.0))).is_none());
        // Touching along an edge has empty interior.
        assert!(s.intersect(&s.translate(V::new(1.0, 0.0))).is_none());
    }

    #[test]
    fn sym_diff_examples() {
        let s = unit_square();
        assert_abs_diff_eq!(s.sym_diff_area(&s, false), 0.0, epsilon = 1e-14);
        let shifted = s.translate(V::new(0.5, 0.0));
        assert_abs_diff_eq!(s.sym_diff_area(&shifted, false), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.sym_diff_area(&shifted, true), 0.0, epsilon = 1e-14);
        for (b, a0) in [(1.4, 1.5), (1.6, 1.5), (1.0, 2.0)] {
            let rb = P::rectangle(b, 1.0 / b).unwrap();
            let ra = P::rectangle(a0, 1.0 / a0).unwrap();
            let expect = 2.0 * (b - a0).abs() / f64::max(b, a0);
            assert_abs_diff_eq!(rb.sym_diff_area(&ra, true), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn covariance_examples() {
        let s = unit_square();
        assert_abs_diff_eq!(s.covariance(V::new(0.5, 0.0)), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.covariance(V::new(0.5, 0.5)), 0.25, epsilon = 1e-14);
        assert_eq!(s.covariance(V::new(1.5, 0.0)), 0.0);
        assert_abs_diff_eq!(s.covariance(V::zero()), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hull_of_square_corners_and_interior_points() {
        let pts = [
            V::new(0.0, 0.0),
            V::new(1.0, 0.0),
            V::new(0.5, 0.5),
            V::new(1.0, 1.0),
            V::new(0.0, 1.0),
            V::new(0.5, 0.0),
        ];
        let h = P::convex_hull(&pts).unwrap();
        assert_eq!(h.len(), 4);
        assert_abs_diff_eq!(h.area(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dihedral_polygons() {
        assert!(unit_square().is_dihedral_symmetric(1e-12));
        assert!(P::regular(8, 1.0, 0.0).unwrap().is_dihedral_symmetric(1e-12));
        assert!(!P::rectangle(1.5, 1.0 / 1.5).unwrap().is_dihedral_symmetric(1e-6));
    }

    #[test]
    fn json_round_trip() {
        let s = unit_square();
        let txt = serde_json::to_string(&s).unwrap();
        assert!(txt.starts_with("{\"vertices\":[["));
        let back: P = serde_json::from_str(&txt).unwrap();
        assert_eq!(back, s);
        let bad: std::result::Result<P, _> =
            serde_json::from_str(r#"{"vertices":[[0,0],[0,1],[1,1],[1,0]]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn f32_geometry() {
        let s = ConvexPolygon::<f32>::rectangle(2.0, 0.5).unwrap();
        assert_eq!(s.area(), 1.0f32);
        let c = s.covariance(Vec2::new(1.0f32, 0.0));
        assert!((c - 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn covariance_properties(seed in 0u64..1000, zx in -2.0f64..2.0, zy in -2.0f64..2.0, t in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_hull(&mut rng);
            let z = V::new(zx, zy);
            let c = p.covariance(z);
            prop_assert!((c - p.covariance(-z)).abs() <= 1e-12);
            prop_assert!(c <= p.area() + 1e-12);
            // Non-increasing along rays.
            prop_assert!(p.covariance(z * t) >= c - 1e-12);
            if z.norm() >= p.diameter() {
                prop_assert_eq!(c, 0.0);
            }
        }

        #[test]
        fn intersection_is_symmetric(s1 in 0u64..500, s2 in 0u64..500) {
            let a = random_hull(&mut ChaCha8Rng::seed_from_u64(s1));
            let b = random_hull(&mut ChaCha8Rng::seed_from_u64(s2 + 1000));
            let ab = a.intersection_area(&b);
            prop_assert!((ab - b.intersection_area(&a)).abs() <= 1e-12);
            prop_assert!(ab <= a.area().min(b.area()) + 1e-12);
        }
    }
}
