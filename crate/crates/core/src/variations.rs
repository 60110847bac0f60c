//! Variation coefficients along the stretch family `K_a = diag(a, 1/a) K`.

use serde::{Deserialize, Serialize};

use crate::anisotropy::SurfaceTension;
use crate::error::{domain, Error, Result};
use crate::geometry::{wulff_shape_converged, BoundaryCurve, ConvexPolygon};
use crate::quad::{integrate, Tolerance};
use crate::riesz::{angular_breakpoints, check_alpha, chord_power, riesz_energy, riesz_potential, weighted_chord_integral, RieszSpec};

type Poly = ConvexPolygon<f64>;
type Tension = SurfaceTension<f64>;

/// Relative quadrature tolerance used inside finite-difference stencils.
pub const STENCIL_QUAD_TOL: f64 = 1e-13;

/// A unit-area base set `K` with a fixed tension and Riesz exponent.
/// `member(a)` maps `(x, y) ↦ (a x, y/a)`, so that the Wulff shape of the
/// stretched tension `f.stretch(a)` is `member(a)` of the Wulff shape of `f`.
#[derive(Clone, Debug)]
pub struct StretchFamily {
    base: Poly,
    tension: Tension,
    alpha: f64,
    quad_tol: f64,
}

impl StretchFamily {
    /// Rescales `base` to unit area about its barycenter.
    pub fn new(base: &Poly, tension: Tension, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        tension.validate()?;
        Ok(Self {
            base: base.normalized(1.0)?,
            tension,
            alpha,
            quad_tol: STENCIL_QUAD_TOL,
        })
    }

    /// Box family: unit square base with the rectangular crystalline tension
    /// whose Wulff shape is the width-`a0` member.
    pub fn box_family(a0: f64, alpha: f64) -> Result<Self> {
        Self::new(&ConvexPolygon::rectangle(1.0, 1.0)?, SurfaceTension::rectangular(a0)?, alpha)
    }

    /// Family through the Wulff shape of `tension`: `a0 = √(width/height)`
    /// of its bounding box and `K` the Wulff shape stretched back by `a0`.
    /// Returns the family and `a0`.
    pub fn from_tension(tension: &Tension, alpha: f64) -> Result<(Self, f64)> {
        let wulff = wulff_shape_converged(tension)?;
        let (lo, hi) = bbox(&wulff);
        let a0 = ((hi.0 - lo.0) / (hi.1 - lo.1)).sqrt();
        let base = wulff.stretch(a0)?;
        Ok((Self::new(&base, tension.clone(), alpha)?, a0))
    }

    pub fn with_quad_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(domain("quadrature tolerance must be positive"));
        }
        self.quad_tol = tol;
        Ok(self)
    }

    pub fn base(&self) -> &Poly {
        &self.base
    }

    pub fn tension(&self) -> &Tension {
        &self.tension
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn riesz_spec(&self) -> RieszSpec {
        RieszSpec {
            alpha: self.alpha,
            quad_tol: self.quad_tol,
            mc_samples: 0,
            mc_seed: 0,
        }
    }

    pub fn member(&self, a: f64) -> Result<Poly> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(domain("stretch parameter must be positive"));
        }
        self.base.stretch(a.recip())
    }

    pub fn perimeter(&self, a: f64) -> Result<f64> {
        Ok(self.member(a)?.anisotropic_perimeter(&self.tension))
    }

    pub fn riesz(&self, a: f64) -> Result<f64> {
        riesz_energy(&self.member(a)?, &self.riesz_spec())
    }

    pub fn energy(&self, a: f64, gamma: f64) -> Result<f64> {
        let p = self.perimeter(a)?;
        if gamma == 0.0 {
            return Ok(p);
        }
        Ok(p + gamma * self.riesz(a)?)
    }
}

fn bbox(p: &Poly) -> ((f64, f64), (f64, f64)) {
    p.vertices().iter().fold(
        ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), v| ((lo.0.min(v.x), lo.1.min(v.y)), (hi.0.max(v.x), hi.1.max(v.y))),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationCoefficients {
    /// `d²/da² P_f(K_a)` at `a0`.
    pub mu1: f64,
    /// `d/da V(K_a)` at `a0`.
    pub mu2: f64,
    /// `d²/da² V(K_a)` at `a0`.
    pub mu3: f64,
    pub a0: f64,
}

/// Central differences with one Richardson level, step `h`.
pub fn stretch_derivatives(family: &StretchFamily, a0: f64, h: f64) -> Result<VariationCoefficients> {
    if !(a0 > 0.0) {
        return Err(domain("a0 must be positive"));
    }
    if !(h > 0.0 && h < 0.1 * a0) {
        return Err(domain("finite-difference step must lie in (0, 0.1 a0)"));
    }
    let stencil = |g: &dyn Fn(f64) -> Result<f64>| -> Result<(f64, f64)> {
        let g0 = g(a0)?;
        let d = |h: f64| -> Result<(f64, f64)> {
            let (gp, gm) = (g(a0 + h)?, g(a0 - h)?);
            Ok(((gp - gm) / (2.0 * h), (gp - 2.0 * g0 + gm) / (h * h)))
        };
        let (d1h, d2h) = d(h)?;
        let (d1f, d2f) = d(0.5 * h)?;
        Ok(((4.0 * d1f - d1h) / 3.0, (4.0 * d2f - d2h) / 3.0))
    };
    let (_, mu1) = stencil(&|a| family.perimeter(a))?;
    let (mu2, mu3) = stencil(&|a| family.riesz(a))?;
    Ok(VariationCoefficients { mu1, mu2, mu3, a0 })
}

/// Default finite-difference step `1e-3·a0`.
pub fn default_step(a0: f64) -> f64 {
    1e-3 * a0
}

fn reduction(alpha: f64) -> f64 {
    1.0 / ((2.0 - alpha) * (3.0 - alpha))
}

/// `−(α/a0) ∫ C_S(z) (z₁² − z₂²) |z|^{−2−α} dz` for the shape `S` itself
/// (no normalization); with `S = K_{a0}` this is `μ₂(K_{a0})`.
pub fn mu2_of_shape(shape: &Poly, a0: f64, alpha: f64, rel_tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let w = weighted_chord_integral(shape, 3.0 - alpha, |t| (2.0 * t).cos(), rel_tol)?;
    Ok(-alpha / a0 * reduction(alpha) * w)
}

/// `μ₂(K_{a0})` by the covariance integral formula.
pub fn mu2_integral(family: &StretchFamily, a0: f64) -> Result<f64> {
    mu2_of_shape(&family.member(a0)?, a0, family.alpha, family.quad_tol)
}

fn dmu2_weighted(family: &StretchFamily, quartic_coeff: f64) -> Result<f64> {
    let a = family.alpha;
    if !family.base.is_dihedral_symmetric(1e-9) {
        return Err(domain("dμ₂/da at a = 1 needs a base with the symmetries of the square"));
    }
    let w = weighted_chord_integral(
        &family.base,
        3.0 - a,
        |t| {
            let (c2, s2) = (t.cos().powi(2), t.sin().powi(2));
            quartic_coeff * (c2 * c2 + s2 * s2) + (4.0 + a) * c2 * s2
        },
        family.quad_tol,
    )?;
    Ok(-2.0 * a * reduction(a) * w)
}

/// `dμ₂(K_a)/da` at `a = 1`:
/// `−2α ∫ C_K(z) [−(α/2)(z₁⁴ + z₂⁴) + (4+α) z₁² z₂²] |z|^{−4−α} dz`.
///
/// Differentiating `μ₂` under the integral gives the coefficient `−α/2` on
/// the quartic terms; see [`dmu2_da_at_one_as_printed`] for the variant with
/// `−α`.
pub fn dmu2_da_at_one(family: &StretchFamily) -> Result<f64> {
    dmu2_weighted(family, -0.5 * family.alpha)
}

/// The same integral with coefficient `−α` on `z₁⁴ + z₂⁴`. Kept for
/// comparison against finite differences; it does not match them.
pub fn dmu2_da_at_one_as_printed(family: &StretchFamily) -> Result<f64> {
    dmu2_weighted(family, -family.alpha)
}

/// Bounds `(lo, hi)` on `μ₂(K_{a0})` for any convex `K` with the symmetries
/// of the square whose boundary passes through `(2p, 0)`, from
/// `[−p, p]² ⊂ K ⊂ [−2p, 2p]²`:
///
/// `lo = −(α/a0)(I_x − 2^{α−4} I_y)`, `hi = −(α/a0)(2^{α−4} I_x − I_y)`,
///
/// with `I_x`, `I_y` the `a0² Δx²` and `a0^{−2} Δy²` integrals over the
/// large square.
pub fn mu2_squeeze_bounds(p: f64, a0: f64, alpha: f64) -> Result<(f64, f64)> {
    mu2_squeeze_bounds_tol(p, a0, alpha, STENCIL_QUAD_TOL)
}

pub fn mu2_squeeze_bounds_tol(p: f64, a0: f64, alpha: f64, rel_tol: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(p > 0.0 && a0 > 0.0) {
        return Err(domain("p and a0 must be positive"));
    }
    let big = ConvexPolygon::rectangle(4.0 * p, 4.0 * p)?.stretch(a0.recip())?;
    let q = 3.0 - alpha;
    let ix = weighted_chord_integral(&big, q, |t| t.cos().powi(2), rel_tol)? * reduction(alpha);
    let iy = weighted_chord_integral(&big, q, |t| t.sin().powi(2), rel_tol)? * reduction(alpha);
    let k = 2f64.powf(alpha - 4.0);
    let lo = -alpha / a0 * (ix - k * iy);
    let hi = -alpha / a0 * (k * ix - iy);
    Ok((lo, hi))
}

/// `I = ∫ C_K(z) |z₁|^{−α} dz = ∫_K∫_K |x₁ − x₂|^{−α}`, finite for `α < 1`.
pub fn marginal_integral(shape: &Poly, alpha: f64, rel_tol: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Unsupported(format!(
            "the marginal integral diverges for alpha = {alpha} >= 1"
        )));
    }
    let pi = std::f64::consts::PI;
    let half = 0.5 * pi;
    let p = 3.0 - alpha;
    let g = |t: f64| chord_power(shape, t, p);
    let mut bps = angular_breakpoints(shape);
    bps.retain(|&b| (b - half).abs() > 1e-12);
    bps.push(half);
    bps.sort_by(f64::total_cmp);
    let k = bps.iter().position(|&b| b == half).unwrap();
    let (left, right) = (bps[k - 1], bps[k + 1]);
    let tol = Tolerance::relative(rel_tol);
    // Regular panels away from θ = π/2.
    let mut total = 0.0;
    for w in bps.windows(2) {
        if w[0] == left || w[1] == right {
            continue;
        }
        total += integrate(|t| t.cos().abs().powf(-alpha) * g(t), w, tol)?.value;
    }
    // Next to π/2 put d = D u^q with q = 2/(1−α): the |sin d|^{−α} weight
    // times the Jacobian becomes bounded and vanishing at u = 0.
    let q = 2.0 / (1.0 - alpha);
    for (span, sign) in [(half - left, -1.0), (right - half, 1.0)] {
        let f = |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let d = span * u.powf(q);
            let jac = span * q * u.powf(q - 1.0);
            d.sin().powf(-alpha) * jac * g(half + sign * d)
        };
        total += integrate(f, &[0.0, 1.0], tol)?.value;
    }
    Ok(2.0 * total * reduction(alpha))
}

/// `μ₂(K_{a0}) / (−α a0^{−(1+α)} I)` for each `a0`; tends to one as `a0 → ∞`.
pub fn mu2_asymptotic(family: &StretchFamily, a0_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    let alpha = family.alpha;
    if alpha >= 1.0 {
        return Err(Error::Unsupported(format!(
            "large-a0 asymptotics need alpha < 1, got {alpha}"
        )));
    }
    if a0_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("a0 list must be increasing"));
    }
    let i = marginal_integral(&family.base, alpha, family.quad_tol.max(1e-12))?;
    a0_list
        .iter()
        .map(|&a0| {
            let mu2 = mu2_integral(family, a0)?;
            Ok((a0, mu2 / (-alpha * a0.powf(-(1.0 + alpha)) * i)))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElReport {
    /// Anisotropic curvature at each node.
    pub h_f: Vec<f64>,
    /// Riesz potential at each node.
    pub v: Vec<f64>,
    pub gamma: f64,
    /// Mean of `H^f + γ v`.
    pub lambda_hat: f64,
    pub residual_std: f64,
}

impl ElReport {
    /// `residual_std / lambda_hat`.
    pub fn nonconstancy(&self) -> f64 {
        self.residual_std / self.lambda_hat.abs()
    }
}

/// Samples `H^f + γ v` along a smooth boundary. `H^f` is the arclength
/// derivative of the tangential component of `∇f(ν)`; `v` is evaluated on
/// `shape`, which should be the polygon through the curve nodes.
pub fn el_residual(
    curve: &BoundaryCurve,
    tension: &Tension,
    shape: &Poly,
    gamma: f64,
    alpha: f64,
) -> Result<ElReport> {
    if !tension.is_smooth() {
        return Err(Error::Unsupported(
            "crystalline tensions have no classical anisotropic curvature".into(),
        ));
    }
    check_alpha(alpha)?;
    if gamma < 0.0 {
        return Err(domain("gamma must be non-negative"));
    }
    let nodes = curve.nodes();
    let n = nodes.len();
    let ds = curve.spacing();
    let grads: Vec<_> = nodes.iter().map(|nd| tension.gradient(nd.normal)).collect();
    let h_f: Vec<f64> = (0..n)
        .map(|i| {
            let d = grads[(i + 1) % n] - grads[(i + n - 1) % n];
            curve.tangent(i).dot(d) / (2.0 * ds)
        })
        .collect();
    let v = if gamma > 0.0 {
        nodes
            .iter()
            .map(|nd| riesz_potential(shape, nd.position, alpha))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![0.0; n]
    };
    let lhs: Vec<f64> = h_f.iter().zip(&v).map(|(h, v)| h + gamma * v).collect();
    let lambda_hat = lhs.iter().sum::<f64>() / n as f64;
    let var = lhs.iter().map(|x| (x - lambda_hat).powi(2)).sum::<f64>() / n as f64;
    Ok(ElReport {
        h_f,
        v,
        gamma,
        lambda_hat,
        residual_std: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{wulff_shape, Circle, WulffBoundary};
    use crate::vec2::Vec2;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn square() -> Poly {
        ConvexPolygon::rectangle(1.0, 1.0).unwrap()
    }

    fn octagon() -> Poly {
        ConvexPolygon::regular(8, 1.0, 0.0).unwrap()
    }

    #[test]
    fn members_have_unit_area_and_match_wulff() {
        let fam = StretchFamily::box_family(1.5, 1.0).unwrap();
        for a in [0.5, 1.0, 1.5, 3.0] {
            assert_relative_eq!(fam.member(a).unwrap().area(), 1.0, max_relative = 1e-14);
        }
        let k = wulff_shape(fam.tension(), 0).unwrap();
        assert!(fam.member(1.5).unwrap().sym_diff_area(&k, false) < 1e-14);
        let (auto, a0) = StretchFamily::from_tension(fam.tension(), 1.0).unwrap();
        assert_relative_eq!(a0, 1.5, max_relative = 1e-14);
        assert!(auto.base().sym_diff_area(&square(), false) < 1e-14);
    }

    #[test]
    fn box_family_mu1() {
        let fam = StretchFamily::box_family(1.5, 1.0).unwrap();
        let c = stretch_derivatives(&fam, 1.5, default_step(1.5)).unwrap();
        assert_abs_diff_eq!(c.mu1, 8.0 / 9.0, epsilon = 1e-6);
        assert!(c.mu2 < 0.0);
    }

    #[test]
    fn mu2_vanishes_on_symmetric_sets() {
        for base in [square(), octagon(), ConvexPolygon::regular(720, 1.0, 0.0).unwrap()] {
            let fam = StretchFamily::new(&base, SurfaceTension::euclidean(), 1.0).unwrap();
            assert!(mu2_integral(&fam, 1.0).unwrap().abs() < 1e-8);
            let fd = stretch_derivatives(&fam, 1.0, 1e-3).unwrap();
            assert!(fd.mu2.abs() < 1e-7, "{}", fd.mu2);
        }
    }

    #[test]
    fn formula_matches_finite_differences() {
        let quartic = SurfaceTension::quartic(0.5).unwrap();
        let cases: Vec<(StretchFamily, f64)> = vec![
            (StretchFamily::box_family(1.5, 1.0).unwrap(), 1.5),
            (StretchFamily::box_family(1.5, 0.5).unwrap(), 1.5),
            (StretchFamily::new(&square(), quartic.clone(), 1.5).unwrap(), 1.2),
            (StretchFamily::new(&octagon(), quartic, 1.0).unwrap(), 1.3),
            (
                StretchFamily::new(&ConvexPolygon::regular(5, 1.0, 0.3).unwrap(), SurfaceTension::euclidean(), 0.7)
                    .unwrap(),
                0.8,
            ),
        ];
        for (fam, a0) in cases {
            let fd = stretch_derivatives(&fam, a0, default_step(a0)).unwrap().mu2;
            let exact = mu2_integral(&fam, a0).unwrap();
            assert!((fd - exact).abs() <= 1e-6f64.max(1e-4 * exact.abs()), "{fd} vs {exact}");
        }
    }

    #[test]
    fn dmu2_matches_finite_differences() {
        let fam = StretchFamily::new(&square(), SurfaceTension::euclidean(), 1.0).unwrap();
        let d = dmu2_da_at_one(&fam).unwrap();
        let fd = |h: f64| (mu2_integral(&fam, 1.0 + h).unwrap() - mu2_integral(&fam, 1.0 - h).unwrap()) / (2.0 * h);
        let rich = (4.0 * fd(5e-4) - fd(1e-3)) / 3.0;
        assert_relative_eq!(d, rich, max_relative = 1e-4);
        assert!(d <= 0.0);
        let printed = dmu2_da_at_one_as_printed(&fam).unwrap();
        assert!((printed - rich).abs() > 1e-2 * rich.abs());
        let rotated = StretchFamily::new(&square().rotate90(), SurfaceTension::euclidean(), 1.0).unwrap();
        assert_abs_diff_eq!(dmu2_da_at_one(&rotated).unwrap(), d, epsilon = 1e-10);
        let skew = StretchFamily::new(&ConvexPolygon::rectangle(2.0, 1.0).unwrap(), SurfaceTension::euclidean(), 1.0)
            .unwrap();
        assert!(dmu2_da_at_one(&skew).is_err());
    }

    #[test]
    fn squeeze_bounds_hold() {
        let p = 0.25;
        for a0 in [1.2, 1.5, 2.0] {
            for alpha in [0.5, 1.0] {
                let (lo, hi) = mu2_squeeze_bounds(p, a0, alpha).unwrap();
                assert!(lo <= hi);
                let oct = ConvexPolygon::regular(8, 2.0 * p, 0.0).unwrap();
                let mu2 = mu2_of_shape(&oct.stretch(a0.recip()).unwrap(), a0, alpha, 1e-12).unwrap();
                assert!(lo <= mu2 && mu2 <= hi, "{lo} {mu2} {hi}");
            }
        }
        let big = ConvexPolygon::rectangle(1.0, 1.0).unwrap().stretch(1.0 / 1.5).unwrap();
        let mu2 = mu2_of_shape(&big, 1.5, 1.0, 1e-12).unwrap();
        assert!(mu2 <= mu2_squeeze_bounds(0.25, 1.5, 1.0).unwrap().1);
    }

    #[test]
    fn marginal_integral_of_square() {
        for alpha in [0.2, 0.5, 0.8] {
            let i = marginal_integral(&square(), alpha, 1e-11).unwrap();
            assert_relative_eq!(i, 2.0 / ((1.0 - alpha) * (2.0 - alpha)), max_relative = 1e-8);
        }
        assert!(matches!(marginal_integral(&square(), 1.5, 1e-8), Err(Error::Unsupported(_))));
    }

    #[test]
    fn asymptotic_ratio() {
        let fam = StretchFamily::new(&square(), SurfaceTension::euclidean(), 0.5).unwrap();
        let r = mu2_asymptotic(&fam, &[4.0, 8.0, 16.0]).unwrap();
        assert!((r[2].1 - 1.0).abs() <= 0.1, "{r:?}");
        let d: Vec<f64> = r.iter().map(|(_, x)| (x - 1.0).abs()).collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{r:?}");
        let bad = StretchFamily::new(&square(), SurfaceTension::euclidean(), 1.5).unwrap();
        assert!(matches!(mu2_asymptotic(&bad, &[4.0]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn energy_is_symmetric_under_inversion() {
        for f in [SurfaceTension::euclidean(), SurfaceTension::quartic(0.3).unwrap()] {
            let k = wulff_shape(&f, 720).unwrap();
            let fam = StretchFamily::new(&k, f, 1.0).unwrap();
            let (e1, e2) = (fam.energy(1.3, 0.1).unwrap(), fam.energy(1.0 / 1.3, 0.1).unwrap());
            assert_relative_eq!(e1, e2, max_relative = 1e-10);
        }
    }

    #[test]
    fn el_disk_and_wulff_ellipse() {
        let r = PI.powf(-0.5);
        let disk = BoundaryCurve::sample(&Circle { center: Vec2::zero(), radius: r }, 512).unwrap();
        let shape = disk.to_polygon().unwrap();
        let rep = el_residual(&disk, &SurfaceTension::euclidean(), &shape, 0.1, 1.0).unwrap();
        assert!(rep.nonconstancy() <= 1e-4);

        let f = SurfaceTension::quadratic([[4.0, 0.0], [0.0, 1.0]]).unwrap();
        let ell = BoundaryCurve::sample(&WulffBoundary::new(f.clone(), 1.0).unwrap(), 512).unwrap();
        let shape = ell.to_polygon().unwrap();
        let rep0 = el_residual(&ell, &f, &shape, 0.0, 1.0).unwrap();
        for h in &rep0.h_f {
            assert_abs_diff_eq!(*h, 1.0, epsilon = 1e-3);
        }
        let rep = el_residual(&ell, &f, &shape, 0.1, 1.0).unwrap();
        assert!(rep.nonconstancy() >= 0.01, "{}", rep.nonconstancy());
        assert!(el_residual(&ell, &SurfaceTension::rectangular(1.5).unwrap(), &shape, 0.1, 1.0).is_err());
    }

    #[test]
    fn coefficients_round_trip_json() {
        let c = VariationCoefficients { mu1: 0.5, mu2: -0.25, mu3: 1.0, a0: 1.5 };
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"mu1\""));
        assert_eq!(serde_json::from_str::<VariationCoefficients>(&s).unwrap(), c);
    }
}
