use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, ConvexPolygon};
use crate::vec2::Vec2;

type V = Vec2<f64>;

/// A convex shape that normal rays are cast against.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Polygon(&'a ConvexPolygon<f64>),
    /// Sampled smooth curve, interpolated by cubic Hermite segments through
    /// the nodes and their tangents.
    Curve(&'a BoundaryCurve),
}

impl Target<'_> {
    /// Signed distance `t` along `dir` from `origin` to the point where the
    /// line leaves the target. `None` if the line misses it.
    pub fn exit_along(&self, origin: V, dir: V) -> Result<Option<f64>> {
        match self {
            Target::Polygon(p) => Ok(exit_polygon(p.vertices(), origin, dir).map(|(t, _)| t)),
            Target::Curve(c) => exit_curve(c, origin, dir),
        }
    }
}

/// Exit parameter and the index of the edge it lies on.
fn exit_polygon(verts: &[V], origin: V, dir: V) -> Option<(f64, usize)> {
    let n = verts.len();
    let side = dir.perp();
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let (a, b) = (verts[i], verts[(i + 1) % n]);
        let e = b - a;
        // Outward edge normal must face along `dir` for an exit point.
        if V::new(e.y, -e.x).dot(dir) <= 0.0 {
            continue;
        }
        let (da, db) = ((a - origin).dot(side), (b - origin).dot(side));
        if da * db > 0.0 {
            continue;
        }
        let s = if da == db { 0.0 } else { da / (da - db) };
        let hit = a + e * s;
        let t = (hit - origin).dot(dir);
        if best.map_or(true, |(bt, _)| t > bt) {
            best = Some((t, i));
        }
    }
    best
}

fn hermite(p0: V, m0: V, p1: V, m1: V, s: f64) -> (V, V) {
    let s2 = s * s;
    let s3 = s2 * s;
    let pos = p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + m0 * (s3 - 2.0 * s2 + s)
        + p1 * (-2.0 * s3 + 3.0 * s2)
        + m1 * (s3 - s2);
    let vel = p0 * (6.0 * s2 - 6.0 * s)
        + m0 * (3.0 * s2 - 4.0 * s + 1.0)
        + p1 * (-6.0 * s2 + 6.0 * s)
        + m1 * (3.0 * s2 - 2.0 * s);
    (pos, vel)
}

fn exit_curve(c: &BoundaryCurve, origin: V, dir: V) -> Result<Option<f64>> {
    let nodes = c.nodes();
    let n = nodes.len();
    let pts: Vec<V> = nodes.iter().map(|n| n.position).collect();
    let Some((_, seg)) = exit_polygon(&pts, origin, dir) else {
        return Ok(None);
    };
    let side = dir.perp();
    let h = c.spacing();
    // The Hermite curve may cross a neighbouring chord's span; try the
    // polygon segment first, then its neighbours.
    for k in [seg, (seg + n - 1) % n, (seg + 1) % n] {
        let (a, b) = (&nodes[k], &nodes[(k + 1) % n]);
        let (m0, m1) = (a.normal.perp() * h, b.normal.perp() * h);
        let g = |s: f64| {
            let (p, v) = hermite(a.position, m0, b.position, m1, s);
            ((p - origin).dot(side), v.dot(side), p)
        };
        let (g0, g1) = (g(0.0).0, g(1.0).0);
        if g0 * g1 > 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut s = if g0 == g1 { 0.0 } else { g0 / (g0 - g1) };
        for _ in 0..100 {
            let (gs, dgs, _) = g(s);
            if gs == 0.0 {
                break;
            }
            if (gs > 0.0) == (g0 > 0.0) {
                lo = s;
            } else {
                hi = s;
            }
            let mut next = s - gs / dgs;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() < 1e-15 {
                s = next;
                break;
            }
            s = next;
        }
        let p = g(s).2;
        return Ok(Some((p - origin).dot(dir)));
    }
    Err(Error::NotAGraph(
        "normal ray does not meet the interpolated target curve".into(),
    ))
}

/// Target boundary written as `x + ψ(x) ν(x)` over the base curve.
#[derive(Clone, Debug, Serialize)]
pub struct NormalGraph {
    #[serde(skip)]
    pub base: BoundaryCurve,
    pub psi: Vec<f64>,
    pub dpsi_ds: Vec<f64>,
}

impl NormalGraph {
    pub fn c0(&self) -> f64 {
        self.psi.iter().fold(0.0f64, |m, p| m.max(p.abs()))
    }

    /// `‖ψ‖_{C⁰} + ‖dψ/ds‖_{C⁰}`.
    pub fn c1(&self) -> f64 {
        self.c0() + self.dpsi_ds.iter().fold(0.0f64, |m, p| m.max(p.abs()))
    }

    pub fn reconstruct(&self) -> Vec<V> {
        self.base
            .nodes()
            .iter()
            .zip(&self.psi)
            .map(|(n, &p)| n.position + n.normal * p)
            .collect()
    }

    /// `|E △ F| = ∫ |ψ + κψ²/2| ds`, exact for a normal graph up to the
    /// periodic trapezoid rule.
    pub fn sym_diff(&self) -> f64 {
        self.base
            .nodes()
            .iter()
            .zip(&self.psi)
            .map(|(n, &p)| (p + 0.5 * n.curvature * p * p).abs())
            .sum::<f64>()
            * self.base.spacing()
    }
}

/// Casts every outward normal ray of `base` against `target`.
pub fn normal_graph(base: &BoundaryCurve, target: Target<'_>) -> Result<NormalGraph> {
    let kmax = base.max_curvature();
    let reach = if kmax > 0.0 { 1.0 / kmax } else { f64::INFINITY };
    let mut psi = Vec::with_capacity(base.len());
    for (i, node) in base.nodes().iter().enumerate() {
        let t = target
            .exit_along(node.position, node.normal)?
            .ok_or_else(|| Error::NotAGraph(format!("normal ray at node {i} misses the target")))?;
        if t.abs() >= reach {
            return Err(Error::NotAGraph(format!(
                "offset {t:e} at node {i} exceeds the embedding radius {reach:e}"
            )));
        }
        psi.push(t);
    }
    let n = psi.len();
    let h = base.spacing();
    let dpsi_ds = (0..n)
        .map(|i| (psi[(i + 1) % n] - psi[(i + n - 1) % n]) / (2.0 * h))
        .collect();
    Ok(NormalGraph {
        base: base.clone(),
        psi,
        dpsi_ds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub sym_diff: f64,
    pub psi_c0: f64,
    pub psi_c1: f64,
    pub kappa_max: f64,
    pub perimeter: f64,
    pub c_kappa: f64,
    pub c_e: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// `|E△F| ≤ ‖ψ‖₀ (1 + ‖ψ‖₀ κ_max) H¹(∂E)`.
    pub lhs_ok: bool,
    /// The same bound without the curvature Jacobian factor.
    pub raw_lhs_ok: bool,
    /// `‖ψ‖_{C¹} ≤ C |E△F|^{1/3}`.
    pub rhs_ok: bool,
    /// `‖ψ‖_{C¹} / |E△F|^{1/3}`, zero when both vanish.
    pub ratio: f64,
}

/// Both graph-distance inequalities for a convex target over a smooth base.
///
/// Constants: `c_κ = 2 κ_max`; `c_E` is the area of a normal patch of
/// half-width `w = min(0.1 diam, 0.5/κ_max)`, taken as `(2w)²`.
pub fn lemma_graph_bounds(base: &BoundaryCurve, target: Target<'_>) -> Result<LemmaReport> {
    let g = normal_graph(base, target)?;
    let kappa_max = base.max_curvature();
    let perimeter = base.length();
    let sym_diff = g.sym_diff();
    let (psi_c0, psi_c1) = (g.c0(), g.c1());
    let c_kappa = 2.0 * kappa_max;
    let w = (0.1 * base.diameter()).min(0.5 / kappa_max);
    let c_e = 4.0 * w * w;
    // n = 2, ω₁ = 2.
    let c = (1.0 + perimeter) * (4.0 * c_kappa.powi(4) * 3.0 / (c_e * 2.0)).cbrt();
    let slack = 1e-12 * perimeter;
    let lhs_ok = sym_diff <= psi_c0 * (1.0 + psi_c0 * kappa_max) * perimeter + slack;
    let raw_lhs_ok = sym_diff <= psi_c0 * perimeter + slack;
    let root = sym_diff.cbrt();
    let rhs_ok = psi_c1 <= c * root + 1e-12;
    let ratio = if psi_c1 == 0.0 { 0.0 } else { psi_c1 / root };
    Ok(LemmaReport {
        sym_diff,
        psi_c0,
        psi_c1,
        kappa_max,
        perimeter,
        c_kappa,
        c_e,
        c,
        lhs_ok,
        raw_lhs_ok,
        rhs_ok,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bumped, Circle, Ellipse};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn circle(r: f64, n: usize) -> BoundaryCurve {
        BoundaryCurve::sample(
            &Circle {
                center: V::zero(),
                radius: r,
            },
            n,
        )
        .unwrap()
    }

    #[test]
    fn identical_shapes() {
        let c = circle(1.0, 256);
        let g = normal_graph(&c, Target::Curve(&c)).unwrap();
        assert!(g.c1() < 1e-12);
        let r = lemma_graph_bounds(&c, Target::Curve(&c)).unwrap();
        assert!(r.lhs_ok && r.rhs_ok && r.raw_lhs_ok);
        assert!(r.sym_diff < 1e-12);
    }

    #[test]
    fn concentric_circles() {
        let (r, t) = (1.0, 0.01);
        let base = circle(r, 512);
        let target = circle(r + t, 512);
        let g = normal_graph(&base, Target::Curve(&target)).unwrap();
        for (&p, &d) in g.psi.iter().zip(&g.dpsi_ds) {
            assert_abs_diff_eq!(p, t, epsilon = 1e-10);
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-8);
        }
        for p in g.reconstruct() {
            assert_abs_diff_eq!(p.norm(), r + t, epsilon = 1e-10);
        }
        let rep = lemma_graph_bounds(&base, Target::Curve(&target)).unwrap();
        assert_abs_diff_eq!(rep.sym_diff, 2.0 * PI * r * t + PI * t * t, epsilon = 1e-12);
        assert!(rep.lhs_ok);
        // The uncorrected identity undercounts the annulus.
        assert!(!rep.raw_lhs_ok);
    }

    #[test]
    fn polygon_target_reconstructs_on_boundary() {
        let base = circle(1.0, 128);
        let sq = ConvexPolygon::rectangle(2.1, 2.1).unwrap();
        let g = normal_graph(&base, Target::Polygon(&sq)).unwrap();
        for p in g.reconstruct() {
            assert_abs_diff_eq!(p.x.abs().max(p.y.abs()), 1.05, epsilon = 1e-12);
        }
    }

    #[test]
    fn dilated_ellipse_against_exact_ray_cast() {
        let e = Ellipse {
            center: V::zero(),
            a: 2.0,
            b: 1.0,
        };
        let d = Ellipse {
            center: V::zero(),
            a: 2.02,
            b: 1.01,
        };
        let base = BoundaryCurve::sample(&e, 1024).unwrap();
        let target = BoundaryCurve::sample(&d, 1024).unwrap();
        let g = normal_graph(&base, Target::Curve(&target)).unwrap();
        for (node, &p) in base.nodes().iter().zip(&g.psi) {
            let exact = d.ray_hit(node.position, node.normal).unwrap();
            assert_abs_diff_eq!(p, exact, epsilon = 1e-8);
            // First-order support-function increment; the second-order term
            // is of size 1e-4 · |x|² κ.
            let first = 0.01 * node.position.dot(node.normal);
            assert_abs_diff_eq!(p, first, epsilon = 2e-4);
        }
    }

    #[test]
    fn shrinking_target_is_negative_offset() {
        let base = circle(1.0, 256);
        let target = circle(0.9, 256);
        let g = normal_graph(&base, Target::Curve(&target)).unwrap();
        assert!(g.psi.iter().all(|&p| (p + 0.1).abs() < 1e-10));
    }

    #[test]
    fn far_target_is_not_a_graph() {
        let base = circle(1.0, 64);
        let far = ConvexPolygon::rectangle(1.0, 1.0).unwrap().translate(V::new(10.0, 0.0));
        assert!(matches!(
            normal_graph(&base, Target::Polygon(&far)),
            Err(Error::NotAGraph(_))
        ));
    }

    #[test]
    fn bump_family_ratio_is_bounded() {
        let e = Ellipse {
            center: V::zero(),
            a: 2.0,
            b: 1.0,
        };
        let base = BoundaryCurve::sample(&e, 2048).unwrap();
        let mut ratios = Vec::new();
        for delta in [0.2, 0.1, 0.05] {
            let bumped = Bumped {
                base: e,
                t0: 0.0,
                half_width: delta,
                amplitude: 0.1 * delta * delta,
            };
            let target = BoundaryCurve::sample(&bumped, 2048).unwrap();
            let r = lemma_graph_bounds(&base, Target::Curve(&target)).unwrap();
            assert!(r.lhs_ok && r.rhs_ok, "{r:?}");
            ratios.push(r.ratio);
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
        assert!(hi / lo < 1.5, "{ratios:?}");
    }
}
