//! Riesz interaction energy `V(F) = ∫_F∫_F |x−y|^{−α}`, the Riesz potential
//! and a seeded Monte Carlo oracle.
//!
//! The energy is reduced through the set covariance
//! `C(z) = |F ∩ (F − z)| = ∫ (ℓ_θ(s) − r)₊ ds` for `z = r(cos θ, sin θ)`,
//! where `ℓ_θ(s)` is the length of the chord of `F` in direction `θ` at
//! offset `s`. Integrating in `r` first gives
//!
//! `V = 1/((2−α)(3−α)) ∫₀^{2π} ∫ ℓ_θ(s)^{3−α} ds dθ`,
//!
//! and for polygons `ℓ_θ` is piecewise linear in `s`, so the inner integral
//! is closed form. Only the smooth angular integral is done numerically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::ConvexPolygon;
use crate::quad::{integrate, Tolerance};
use crate::vec2::Vec2;

type V = Vec2<f64>;

/// Riesz exponent and numerical settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszSpec {
    pub alpha: f64,
    /// Relative tolerance of the angular quadrature.
    pub quad_tol: f64,
    pub mc_samples: usize,
    pub mc_seed: u64,
}

impl RieszSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        let spec = Self {
            alpha,
            quad_tol: 1e-7,
            mc_samples: 1_000_000,
            mc_seed: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_quad_tol(mut self, tol: f64) -> Result<Self> {
        self.quad_tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mc(mut self, samples: usize, seed: u64) -> Self {
        self.mc_samples = samples;
        self.mc_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.quad_tol > 0.0) {
            return Err(domain("quadrature tolerance must be positive"));
        }
        Ok(())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(domain(format!("alpha = {alpha} is outside (0, 2)")))
    }
}

/// `∫ ℓ_θ(s)^p ds` over all chords of `poly` parallel to `(cos θ, sin θ)`.
/// Exact up to roundoff; O(n) per direction.
pub fn chord_power(poly: &ConvexPolygon<f64>, theta: f64, p: f64) -> f64 {
    let u = V::polar(theta);
    let nrm = u.perp();
    let verts = poly.vertices();
    let n = verts.len();
    let st: Vec<(f64, f64)> = verts.iter().map(|v| (v.dot(nrm), v.dot(u))).collect();
    let imin = (0..n).min_by(|&i, &j| st[i].0.total_cmp(&st[j].0)).unwrap();
    let imax = (0..n).max_by(|&i, &j| st[i].0.total_cmp(&st[j].0)).unwrap();
    let scale = st.iter().fold(0.0f64, |m, &(s, t)| m.max(s.abs()).max(t.abs()));
    let eps = 1e-14 * scale.max(f64::MIN_POSITIVE);

    // Two s-monotone chains from the lowest to the highest vertex. Edges with
    // no extent in s only occur at the two ends; keep the innermost point.
    let chain = |step: usize| {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(n);
        let mut i = imin;
        loop {
            let p = st[i];
            match out.last() {
                None => out.push(p),
                Some(&(s, _)) if p.0 > s + eps => out.push(p),
                _ if out.len() == 1 => out[0] = p,
                _ => {}
            }
            if i == imax {
                break;
            }
            i = (i + step) % n;
        }
        out
    };
    let a = chain(n - 1);
    let b = chain(1);
    if a.len() < 2 || b.len() < 2 {
        return 0.0;
    }
    let interp = |c: &[(f64, f64)], k: usize, s: f64| {
        let (s0, t0) = c[k];
        let (s1, t1) = c[k + 1];
        let w = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        t0 + w * (t1 - t0)
    };
    let s_end = a[a.len() - 1].0.min(b[b.len() - 1].0);
    let (mut i, mut j) = (0, 0);
    let mut s = a[0].0.max(b[0].0);
    let mut l0 = (interp(&a, 0, s) - interp(&b, 0, s)).abs();
    let mut total = 0.0;
    while s < s_end {
        while i + 2 < a.len() && a[i + 1].0 <= s {
            i += 1;
        }
        while j + 2 < b.len() && b[j + 1].0 <= s {
            j += 1;
        }
        let next = a[i + 1].0.min(b[j + 1].0).min(s_end);
        if next <= s {
            break;
        }
        let l1 = (interp(&a, i, next) - interp(&b, j, next)).abs();
        total += linear_power(l0, l1, next - s, p);
        s = next;
        l0 = l1;
    }
    total
}

/// `∫₀^w ℓ(s)^p ds` for `ℓ` linear from `l0` to `l1`.
fn linear_power(l0: f64, l1: f64, w: f64, p: f64) -> f64 {
    let m = 0.5 * (l0 + l1);
    if m <= 0.0 {
        return 0.0;
    }
    let d = l1 - l0;
    let e = d / m;
    if e.abs() < 1e-4 {
        w * m.powf(p) * (1.0 + p * (p - 1.0) * e * e / 24.0)
    } else {
        w * (l1.powf(p + 1.0) - l0.powf(p + 1.0)) / ((p + 1.0) * d)
    }
}

/// Directions in `[0, π]` where the chord structure of `poly` changes:
/// edge directions, plus every vertex-pair direction for small polygons.
pub fn angular_breakpoints(poly: &ConvexPolygon<f64>) -> Vec<f64> {
    let verts = poly.vertices();
    let n = verts.len();
    let pi = std::f64::consts::PI;
    let mut dirs = vec![0.0, pi];
    let mut push = |d: V| {
        let a = d.angle().rem_euclid(pi);
        dirs.push(a);
    };
    if n <= 16 {
        for i in 0..n {
            for j in i + 1..n {
                push(verts[j] - verts[i]);
            }
        }
    } else {
        for (a, b) in poly.edges() {
            push(b - a);
        }
    }
    dirs.sort_by(f64::total_cmp);
    dirs.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    dirs
}

/// `∫₀^{2π} w(θ) ∫ ℓ_θ(s)^p ds dθ` for a π-periodic weight `w`.
pub fn weighted_chord_integral<W: Fn(f64) -> f64>(
    poly: &ConvexPolygon<f64>,
    p: f64,
    weight: W,
    rel_tol: f64,
) -> Result<f64> {
    let bps = angular_breakpoints(poly);
    let r = integrate(|t| weight(t) * chord_power(poly, t, p), &bps, Tolerance::relative(rel_tol))?;
    Ok(2.0 * r.value)
}

/// `V(F)` by the exact chord reduction and adaptive angular quadrature.
pub fn riesz_energy(shape: &ConvexPolygon<f64>, spec: &RieszSpec) -> Result<f64> {
    spec.validate()?;
    let a = spec.alpha;
    let g = weighted_chord_integral(shape, 3.0 - a, |_| 1.0, spec.quad_tol)?;
    Ok(g / ((2.0 - a) * (3.0 - a)))
}

/// `V(F) = ∫₀^{2π} ∫₀^{R} C(r e_θ) r^{1−α} dr dθ` with the covariance computed
/// by polygon clipping. Independent of the chord reduction and much slower;
/// `r = R w^{2/(2−α)}` removes the weight singularity at `r = 0`.
pub fn riesz_energy_by_covariance(shape: &ConvexPolygon<f64>, spec: &RieszSpec) -> Result<f64> {
    spec.validate()?;
    let a = spec.alpha;
    let q = 2.0 / (2.0 - a);
    let tol = Tolerance::relative(spec.quad_tol);
    let verts = shape.vertices();
    let mut failure = None;
    let outer = |theta: f64| {
        let u = V::polar(theta);
        let (lo, hi) = verts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v.dot(u)), h.max(v.dot(u))));
        let reach = hi - lo;
        let inner = |w: f64| shape.covariance(u * (reach * w.powf(q))) * q * reach.powf(2.0 - a) * w;
        // The covariance has kinks along the ray; start from several panels
        // so the first error estimates cannot all miss them.
        let panels: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
        match integrate(inner, &panels, tol) {
            Ok(r) => r.value,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let r = integrate(outer, &angular_breakpoints(shape), tol);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * r?.value)
}

const MC_BLOCK: usize = 1 << 16;

/// Monte Carlo estimate of `V(F)` and its standard error from uniformly
/// sampled point pairs. Each block of samples draws from its own stream of
/// a seeded counter-based generator, so the result does not depend on how
/// blocks are scheduled.
pub fn riesz_energy_mc(shape: &ConvexPolygon<f64>, spec: &RieszSpec) -> Result<(f64, f64)> {
    check_alpha(spec.alpha)?;
    if spec.mc_samples < 10_000 {
        return Err(domain("Monte Carlo oracle needs at least 1e4 samples"));
    }
    let verts = shape.vertices();
    let (mut lo, mut hi) = (verts[0], verts[0]);
    for v in verts {
        lo = V::new(lo.x.min(v.x), lo.y.min(v.y));
        hi = V::new(hi.x.max(v.x), hi.y.max(v.y));
    }
    let tol = 0.0;
    let n = spec.mc_samples;
    let blocks = n.div_ceil(MC_BLOCK);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.mc_seed);
            rng.set_stream(b as u64);
            let mut draw = || loop {
                let p = V::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
                if shape.contains(p, tol) {
                    return p;
                }
            };
            let count = MC_BLOCK.min(n - b * MC_BLOCK);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let (x, y) = (draw(), draw());
                let k = (x - y).norm().powf(-spec.alpha);
                if k.is_finite() {
                    s1 += k;
                    s2 += k * k;
                }
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let nf = n as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let area = shape.area();
    Ok((mean * area * area, (var / nf).sqrt() * area * area))
}

/// `v_F(x) = ∫_F |x−y|^{−α} dy = (2−α)^{−1} ∫₀^{2π} R(θ; x)^{2−α} dθ`, with
/// `R` the distance from `x` to the boundary in direction `θ`.
pub fn riesz_potential(shape: &ConvexPolygon<f64>, x: V, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let scale = shape.diameter();
    if !shape.contains(x, 1e-12 * scale) {
        return Err(Error::Unsupported(
            "Riesz potential is only evaluated in the closed set".into(),
        ));
    }
    let p = 2.0 - alpha;
    let mut total = 0.0;
    for (a, b) in shape.edges() {
        let e = b - a;
        let nu = V::new(e.y, -e.x).normalized();
        let d = nu.dot(a - x);
        if d <= 1e-14 * scale {
            continue;
        }
        let phi = nu.angle();
        let t0 = (a - x).angle() - phi;
        let t1 = (b - x).angle() - phi;
        // Both endpoint angles lie in (−π/2, π/2) relative to the normal.
        let wrap = |t: f64| (t + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        let (t0, t1) = (wrap(t0), wrap(t1));
        let r = integrate(
            |t: f64| (d / t.cos()).powf(p),
            &[t0, t1],
            Tolerance::relative(1e-13),
        )?;
        total += r.value;
    }
    Ok(total / p)
}

/// `c_{2,α} = 4 π^{α/2} / (2 − α)`.
pub fn lipschitz_constant(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(4.0 * std::f64::consts::PI.powf(0.5 * alpha) / (2.0 - alpha))
}

/// `v_{B_r}(0)` for the disk of unit area, the supremum of `v_F` over unit-area sets.
pub fn potential_sup_bound(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2.0 * std::f64::consts::PI.powf(0.5 * alpha) / (2.0 - alpha))
}

/// `γ = m^{(3−α)/2}`.
pub fn mass_to_gamma(m: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(m > 0.0) {
        return Err(domain("mass must be positive"));
    }
    Ok(m.powf(0.5 * (3.0 - alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn square() -> ConvexPolygon<f64> {
        ConvexPolygon::rectangle(1.0, 1.0).unwrap()
    }

    fn spec(a: f64) -> RieszSpec {
        RieszSpec::new(a).unwrap().with_quad_tol(1e-11).unwrap()
    }

    #[test]
    fn chord_power_of_square() {
        // Horizontal chords of the unit square all have length 1.
        assert_relative_eq!(chord_power(&square(), 0.0, 2.5), 1.0, max_relative = 1e-14);
        // Diagonal direction: chords form a tent of height √2 over width √2.
        let exact = 2.0 * (SQRT_2 / 2.0) * SQRT_2.powf(2.5) / 3.5;
        assert_relative_eq!(chord_power(&square(), PI / 4.0, 2.5), exact, max_relative = 1e-13);
        // p = 1 is the area for every direction.
        let hex = ConvexPolygon::regular(6, 1.3, 0.2).unwrap();
        for k in 0..50 {
            let t = k as f64 * 0.1237;
            assert_relative_eq!(chord_power(&hex, t, 1.0), hex.area(), max_relative = 1e-13);
        }
    }

    #[test]
    fn linear_power_branches_agree() {
        let (l0, w, p): (f64, f64, f64) = (0.7, 0.3, 2.2);
        for d in [1e-3, 1e-5, 1e-7] {
            let direct = w * ((l0 + d).powf(p + 1.0) - l0.powf(p + 1.0)) / ((p + 1.0) * d);
            assert_relative_eq!(linear_power(l0, l0 + d, w, p), direct, max_relative = 1e-8);
        }
    }

    #[test]
    fn unit_disk() {
        let disk = ConvexPolygon::regular(720, 1.0, 0.0).unwrap();
        let v = riesz_energy(&disk, &RieszSpec::new(1.0).unwrap()).unwrap();
        assert_relative_eq!(v, 16.0 * PI / 3.0, max_relative = 1e-3);
    }

    #[test]
    fn vanishing_alpha_gives_squared_area() {
        let v = riesz_energy(&square(), &RieszSpec::new(1e-6).unwrap()).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn square_alpha_one_closed_form() {
        // ∫∫ over the unit square of 1/|x−y|:
        // 4/3 (1 − √2) + 4 ln(1 + √2).
        let exact = 4.0 / 3.0 * (1.0 - SQRT_2) + 4.0 * (1.0 + SQRT_2).ln();
        let v = riesz_energy(&square(), &spec(1.0)).unwrap();
        assert_relative_eq!(v, exact, max_relative = 1e-11);
    }

    #[test]
    fn covariance_route_agrees() {
        for (shape, a) in [
            (square(), 1.0),
            (ConvexPolygon::regular(5, 0.8, 0.3).unwrap(), 0.5),
            (ConvexPolygon::rectangle(2.0, 0.4).unwrap(), 1.5),
        ] {
            let s = RieszSpec::new(a).unwrap().with_quad_tol(1e-9).unwrap();
            let v1 = riesz_energy(&shape, &s).unwrap();
            let v2 = riesz_energy_by_covariance(&shape, &s).unwrap();
            assert_relative_eq!(v1, v2, max_relative = 1e-7);
        }
    }

    #[test]
    fn monte_carlo_agrees_and_is_deterministic() {
        let s = RieszSpec::new(1.0).unwrap().with_mc(400_000, 7);
        let (m1, e1) = riesz_energy_mc(&square(), &s).unwrap();
        let (m2, e2) = riesz_energy_mc(&square(), &s).unwrap();
        assert_eq!(m1.to_bits(), m2.to_bits());
        assert_eq!(e1.to_bits(), e2.to_bits());
        let v = riesz_energy(&square(), &s).unwrap();
        assert!((m1 - v).abs() <= 4.0 * e1, "{m1} vs {v} ± {e1}");
        let moved = square().translate(V::new(3.0, -1.0));
        let (m3, e3) = riesz_energy_mc(&moved, &s).unwrap();
        assert!((m3 - m1).abs() <= 3.0 * (e1 * e1 + e3 * e3).sqrt());
        assert!(riesz_energy_mc(&square(), &s.with_mc(10, 0)).is_err());
    }

    #[test]
    fn invariances() {
        let p = ConvexPolygon::new(vec![
            V::new(0.0, 0.0),
            V::new(1.2, 0.1),
            V::new(1.0, 0.9),
            V::new(0.2, 0.7),
        ])
        .unwrap();
        let s = spec(1.3);
        let v = riesz_energy(&p, &s).unwrap();
        assert_relative_eq!(riesz_energy(&p.translate(V::new(5.0, 2.0)), &s).unwrap(), v, max_relative = 1e-10);
        assert_relative_eq!(riesz_energy(&p.rotate90(), &s).unwrap(), v, max_relative = 1e-10);
        for lam in [0.5, 2.0] {
            let scaled = riesz_energy(&p.scale(lam).unwrap(), &s).unwrap();
            assert_relative_eq!(scaled, lam.powf(4.0 - 1.3) * v, max_relative = 1e-10);
        }
    }

    #[test]
    fn potential_of_disk_center() {
        let disk = ConvexPolygon::regular(2000, 1.0, 0.0).unwrap();
        assert_relative_eq!(riesz_potential(&disk, V::zero(), 1.0).unwrap(), 2.0 * PI, max_relative = 1e-5);
        for (r, a) in [(0.5f64, 0.5), (2.0, 1.5)] {
            let d = ConvexPolygon::regular(2000, r, 0.0).unwrap();
            let exact = 2.0 * PI * r.powf(2.0 - a) / (2.0 - a);
            assert_relative_eq!(riesz_potential(&d, V::zero(), a).unwrap(), exact, max_relative = 1e-5);
        }
    }

    #[test]
    fn potential_matches_closed_form_at_square_corner() {
        // From a corner of the unit square with α = 1:
        // ∫₀^{π/2} R dθ = 2 ln(1 + √2).
        let sq = ConvexPolygon::rectangle(1.0, 1.0).unwrap().translate(V::new(0.5, 0.5));
        assert_relative_eq!(
            riesz_potential(&sq, V::zero(), 1.0).unwrap(),
            2.0 * (1.0 + SQRT_2).ln(),
            max_relative = 1e-12
        );
        assert!(matches!(riesz_potential(&sq, V::new(2.0, 0.0), 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn energy_is_integral_of_potential() {
        for (shape, a) in [(square(), 1.0), (ConvexPolygon::regular(5, 0.7, 0.1).unwrap(), 0.6)] {
            let c = shape.barycenter();
            let verts = shape.vertices().to_vec();
            let mut angles: Vec<f64> = verts.iter().map(|v| (*v - c).angle().rem_euclid(2.0 * PI)).collect();
            angles.extend([0.0, 2.0 * PI]);
            angles.sort_by(f64::total_cmp);
            let tol = Tolerance::relative(1e-8);
            let outer = |t: f64| {
                let u = V::polar(t);
                let reach = shape
                    .edges()
                    .filter_map(|(p, q)| {
                        let e = q - p;
                        let nu = V::new(e.y, -e.x);
                        let den = nu.dot(u);
                        (den > 0.0).then(|| nu.dot(p - c) / den)
                    })
                    .fold(f64::INFINITY, f64::min);
                integrate(|r| riesz_potential(&shape, c + u * r, a).unwrap() * r, &[0.0, reach], tol)
                    .unwrap()
                    .value
            };
            let total = integrate(outer, &angles, tol).unwrap().value;
            let v = riesz_energy(&shape, &spec(a)).unwrap();
            assert_relative_eq!(total, v, max_relative = 1e-4);
        }
    }

    #[test]
    fn sup_bound_on_boundary() {
        let bound = potential_sup_bound(1.0).unwrap();
        assert_relative_eq!(bound, 2.0 * PI.sqrt(), max_relative = 1e-15);
        for shape in [
            square(),
            ConvexPolygon::regular(3, 1.0, 0.0).unwrap().normalized(1.0).unwrap(),
            ConvexPolygon::rectangle(4.0, 0.25).unwrap(),
        ] {
            for k in 0..32 {
                let t = k as f64 / 32.0;
                let verts = shape.vertices();
                let i = (t * verts.len() as f64) as usize;
                let frac = t * verts.len() as f64 - i as f64;
                let x = verts[i] + (verts[(i + 1) % verts.len()] - verts[i]) * frac;
                assert!(riesz_potential(&shape, x, 1.0).unwrap() <= bound + 1e-6);
            }
        }
    }

    #[test]
    fn constants() {
        assert_relative_eq!(lipschitz_constant(1.0).unwrap(), 4.0 * PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(lipschitz_constant(0.5).unwrap(), 8.0 / 3.0 * PI.powf(0.25), max_relative = 1e-15);
        assert!(lipschitz_constant(1.9).unwrap() > lipschitz_constant(1.5).unwrap());
        assert!(lipschitz_constant(2.0).is_err());
        assert_eq!(mass_to_gamma(1.0, 0.3).unwrap(), 1.0);
        assert_abs_diff_eq!(mass_to_gamma(3.7, 1.0).unwrap(), 3.7, epsilon = 1e-15);
        assert_relative_eq!(mass_to_gamma(2.0, 0.5).unwrap(), 2f64.powf(1.25), max_relative = 1e-15);
        assert!(mass_to_gamma(0.0, 1.0).is_err());
        assert!(RieszSpec::new(2.5).is_err());
        assert!(RieszSpec::new(0.0).is_err());
    }

    fn random_polygon() -> impl Strategy<Value = ConvexPolygon<f64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..10).prop_filter_map("degenerate", |pts| {
            let pts: Vec<V> = pts.into_iter().map(|(x, y)| V::new(x, y)).collect();
            let p = ConvexPolygon::convex_hull(&pts).ok()?;
            (p.area() > 0.05).then_some(p)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn lipschitz_bound(e in random_polygon(), f in random_polygon(), a in prop::sample::select(vec![0.5, 1.0, 1.5])) {
            let shrink = |p: ConvexPolygon<f64>| if p.area() > 1.0 { p.normalized(1.0).unwrap() } else { p };
            let (e, f) = (shrink(e), shrink(f));
            let s = RieszSpec::new(a).unwrap();
            let dv = (riesz_energy(&e, &s).unwrap() - riesz_energy(&f, &s).unwrap()).abs();
            prop_assert!(dv <= lipschitz_constant(a).unwrap() * e.sym_diff_area(&f, false) + 1e-6);
        }

        #[test]
        fn energy_is_positive_and_below_disk_bound(p in random_polygon()) {
            let s = RieszSpec::new(1.0).unwrap();
            let v = riesz_energy(&p, &s).unwrap();
            // V(F) ≤ |F| sup v_F ≤ |F|^{(4−α)/2} v_{B}(0).
            prop_assert!(v > 0.0);
            prop_assert!(v <= p.area().powf(1.5) * potential_sup_bound(1.0).unwrap() * (1.0 + 1e-6));
        }
    }
}
