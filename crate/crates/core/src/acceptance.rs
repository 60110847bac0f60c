//! End-to-end acceptance checks, shared by the `acceptance` test target and
//! the `verify` CLI command.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::anisotropy::SurfaceTension;
use crate::dropsolve::{log_space, lower_bound_constant, minimize_stretch, predicted_minimizer, sweep_gamma, SweepConfig};
use crate::error::Result;
use crate::geometry::{
    lemma_graph_bounds, wulff_shape, wulff_shape_converged, BoundaryCurve, Bumped, Circle, ConvexPolygon, Ellipse,
    Target, WulffBoundary,
};
use crate::riesz::{lipschitz_constant, potential_sup_bound, riesz_energy, riesz_energy_mc, riesz_potential, RieszSpec};
use crate::variations::{
    default_step, dmu2_da_at_one, el_residual, mu2_asymptotic, mu2_integral, mu2_of_shape, mu2_squeeze_bounds,
    stretch_derivatives, StretchFamily,
};
use crate::vec2::Vec2;

type Poly = ConvexPolygon<f64>;
type V = Vec2<f64>;

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} [{:>2}] {}: {}", self.id, self.name, self.detail)
    }
}

pub const CRITERIA: [&str; 12] = [
    "Riesz energy against closed form and Monte Carlo",
    "Wulff identities and isoperimetric inequality",
    "symmetry nulls",
    "mu2 formula against finite differences",
    "minimizer drift",
    "energy expansion",
    "scaling laws",
    "mu2 squeeze bounds",
    "mu2 asymptotics",
    "Lipschitz and potential bounds",
    "normal-graph lemma",
    "Euler-Lagrange dichotomy",
];

type Check = fn() -> Result<(bool, String)>;

const CHECKS: [Check; 12] = [
    riesz_oracles,
    wulff_identities,
    symmetry_nulls,
    formula_vs_fd,
    minimizer_drift,
    energy_expansion,
    scaling_laws,
    squeeze_bounds,
    asymptotics,
    lipschitz_bounds,
    graph_lemma,
    euler_lagrange,
];

/// Runs criterion `id` (1-based). Numeric errors count as failures.
pub fn run(id: usize) -> Outcome {
    assert!((1..=12).contains(&id), "criteria are numbered 1 to 12");
    let (passed, detail) = match CHECKS[id - 1]() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome {
        id,
        name: CRITERIA[id - 1],
        passed,
        detail,
    }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=12).map(run).collect()
}

fn random_polygon(rng: &mut ChaCha8Rng) -> Poly {
    loop {
        let n = rng.gen_range(3..10);
        let pts: Vec<V> = (0..n)
            .map(|_| V::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if let Ok(p) = ConvexPolygon::convex_hull(&pts) {
            if p.area() > 0.05 {
                return p;
            }
        }
    }
}

fn square() -> Poly {
    ConvexPolygon::rectangle(1.0, 1.0).expect("unit square")
}

fn box_family() -> Result<StretchFamily> {
    StretchFamily::box_family(1.5, 1.0)
}

fn riesz_oracles() -> Result<(bool, String)> {
    let t = Instant::now();
    let disk = ConvexPolygon::regular(720, 1.0, 0.0)?;
    let v = riesz_energy(&disk, &RieszSpec::new(1.0)?)?;
    let disk_err = (v / (16.0 * PI / 3.0) - 1.0).abs();
    let mut ok = disk_err <= 1e-3;
    let mut detail = format!("disk rel err {disk_err:.2e}");
    for alpha in [0.5, 1.0, 1.5] {
        let spec = RieszSpec::new(alpha)?.with_quad_tol(1e-10)?.with_mc(10_000_000, 0);
        let v = riesz_energy(&square(), &spec)?;
        let (m, se) = riesz_energy_mc(&square(), &spec)?;
        let z = (v - m) / se;
        ok &= z.abs() <= 3.0;
        detail += &format!("; square alpha={alpha}: z={z:+.2}");
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    Ok((ok, format!("{detail}; {secs:.1}s")))
}

fn wulff_identities() -> Result<(bool, String)> {
    let hexagon: Vec<V> = (0..6).map(|k| V::polar(k as f64 * PI / 3.0 + 0.2) * (1.0 + 0.1 * k as f64)).collect();
    let crystalline = [SurfaceTension::rectangular(1.5)?, SurfaceTension::crystalline(hexagon)?];
    let mut crys_err = 0.0f64;
    for f in &crystalline {
        let k = wulff_shape(f, 0)?;
        crys_err = crys_err.max((k.anisotropic_perimeter(f) - 2.0 * k.area()).abs());
    }
    let smooth = [
        SurfaceTension::quadratic([[4.0, 0.0], [0.0, 1.0]])?,
        SurfaceTension::quadratic([[2.0, 0.5], [0.5, 1.0]])?,
        SurfaceTension::quartic(0.5)?,
    ];
    let mut smooth_err = 0.0f64;
    for f in &smooth {
        let k = wulff_shape(f, 720)?;
        smooth_err = smooth_err.max((k.anisotropic_perimeter(f) / (2.0 * k.area()) - 1.0f64).abs());
    }
    let tensions: Vec<SurfaceTension<f64>> = crystalline.iter().chain(&smooth).cloned().collect();
    let areas: Vec<f64> = tensions
        .iter()
        .map(|f| Ok(if f.is_smooth() { wulff_shape_converged(f)? } else { wulff_shape(f, 0)? }.area()))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut slack = f64::INFINITY;
    for i in 0..50 {
        let e = random_polygon(&mut rng);
        let j = i % tensions.len();
        slack = slack.min(e.anisotropic_perimeter(&tensions[j]) - 2.0 * (areas[j] * e.area()).sqrt());
    }
    let ok = crys_err <= 1e-9 && smooth_err <= 1e-5 && slack >= -1e-9;
    Ok((
        ok,
        format!("crystalline |P-2A| {crys_err:.1e}, smooth rel {smooth_err:.1e}, min isoperimetric slack {slack:.3e}"),
    ))
}

fn symmetry_nulls() -> Result<(bool, String)> {
    let mut worst_mu2 = 0.0f64;
    for base in [square(), ConvexPolygon::regular(720, 1.0, 0.0)?, ConvexPolygon::regular(8, 1.0, 0.0)?] {
        let fam = StretchFamily::new(&base, SurfaceTension::euclidean(), 1.0)?;
        worst_mu2 = worst_mu2
            .max(mu2_integral(&fam, 1.0)?.abs())
            .max(stretch_derivatives(&fam, 1.0, 1e-3)?.mu2.abs());
    }
    let octagon: Vec<V> = (0..8).map(|k| V::polar(k as f64 * PI / 4.0)).collect();
    let tensions = [
        SurfaceTension::euclidean(),
        SurfaceTension::quartic(0.3)?,
        SurfaceTension::rectangular(1.0)?,
        SurfaceTension::crystalline(octagon)?,
    ];
    let mut worst_inv = 0.0f64;
    for f in tensions {
        let k = wulff_shape(&f, 720)?;
        let fam = StretchFamily::new(&k, f, 1.0)?;
        let (e1, e2) = (fam.energy(1.3, 0.1)?, fam.energy(1.0 / 1.3, 0.1)?);
        worst_inv = worst_inv.max((e1 / e2 - 1.0).abs());
    }
    Ok((
        worst_mu2 <= 1e-7 && worst_inv <= 1e-5,
        format!("max |mu2| {worst_mu2:.1e}; max inversion rel diff {worst_inv:.1e}"),
    ))
}

fn formula_vs_fd() -> Result<(bool, String)> {
    let quartic = SurfaceTension::quartic(0.5)?;
    let octagon = ConvexPolygon::regular(8, 1.0, 0.0)?;
    let cases = [
        (StretchFamily::box_family(1.5, 1.0)?, 1.5),
        (StretchFamily::box_family(1.5, 0.5)?, 1.5),
        (StretchFamily::new(&square(), quartic.clone(), 1.5)?, 1.2),
        (StretchFamily::new(&octagon, quartic, 1.0)?, 1.3),
        (
            StretchFamily::new(&ConvexPolygon::regular(5, 1.0, 0.3)?, SurfaceTension::euclidean(), 0.7)?,
            0.8,
        ),
    ];
    let mut ok = true;
    let mut worst = 0.0f64;
    for (fam, a0) in &cases {
        let fd = stretch_derivatives(fam, *a0, default_step(*a0))?.mu2;
        let exact = mu2_integral(fam, *a0)?;
        let tol = 1e-6f64.max(1e-4 * exact.abs());
        ok &= (fd - exact).abs() <= tol;
        worst = worst.max((fd - exact).abs() / tol);
    }
    let mut worst_d = 0.0f64;
    for (base, alpha) in [(square(), 1.0), (square(), 0.5), (octagon, 1.0)] {
        let fam = StretchFamily::new(&base, SurfaceTension::euclidean(), alpha)?;
        let d = dmu2_da_at_one(&fam)?;
        let fd = |h: f64| -> Result<f64> { Ok((mu2_integral(&fam, 1.0 + h)? - mu2_integral(&fam, 1.0 - h)?) / (2.0 * h)) };
        let rich = (4.0 * fd(5e-4)? - fd(1e-3)?) / 3.0;
        worst_d = worst_d.max((d / rich - 1.0).abs());
    }
    ok &= worst_d <= 1e-4;
    Ok((
        ok,
        format!("mu2 worst |fd-formula|/tol {worst:.2e}; dmu2/da worst rel err {worst_d:.2e}"),
    ))
}

fn minimizer_drift() -> Result<(bool, String)> {
    let fam = box_family()?;
    let a0 = 1.5;
    let target = -mu2_integral(&fam, a0)? * a0 * a0 / 2.0;
    let config = SweepConfig::new(fam, a0, vec![1e-2, 1e-3, 1e-4])?;
    let errs: Vec<f64> = config
        .gammas
        .iter()
        .map(|&g| Ok(((minimize_stretch(&config, g)?.0 - a0) / g / target - 1.0).abs()))
        .collect::<Result<_>>()?;
    let ok = errs[1] <= 0.05 && errs[2] < errs[1] && errs[1] < errs[0];
    Ok((
        ok,
        format!("rel err of (a*-a0)/gamma at gamma=1e-2,1e-3,1e-4: {:.2e}, {:.2e}, {:.2e}", errs[0], errs[1], errs[2]),
    ))
}

fn energy_expansion() -> Result<(bool, String)> {
    let a0 = 1.5;
    let config = SweepConfig::new(box_family()?, a0, log_space(1e-1, 1e-4, 7)?)?;
    let report = sweep_gamma(&config)?;
    let coeffs = report.coefficients.expect("sweep computes coefficients");
    let lead = (coeffs.mu2 * a0 / 2.0).powi(2);
    let last = report.rows.last().expect("non-empty sweep");
    let lead_err = (last.deficit / (last.gamma * last.gamma) / lead - 1.0).abs();
    let mut ok = lead_err <= 0.05;
    let mut sign_ok = true;
    for g in [1e-2, 1e-3] {
        let (_, e) = minimize_stretch(&config, g)?;
        let deficit = config.family.energy(a0, g)? - e;
        let pred = predicted_minimizer(a0, g, &coeffs)?;
        let third_pred = pred.deficit_pred - lead * g * g;
        sign_ok &= (deficit - lead * g * g).signum() == third_pred.signum();
        if g == 1e-3 {
            let r = pred.deficit_pred / deficit;
            ok &= (0.95..=1.05).contains(&r);
        }
    }
    ok &= sign_ok;
    let lb = lower_bound_constant(&coeffs)?;
    let min_ratio = report
        .rows
        .iter()
        .map(|r| r.deficit / (lb * r.gamma * r.gamma))
        .fold(f64::INFINITY, f64::min);
    ok &= min_ratio >= 0.9;
    Ok((
        ok,
        format!(
            "deficit/gamma^2 rel err {lead_err:.2e} at gamma={:.0e}; cubic sign {}; min deficit/(C gamma^2) {min_ratio:.2}",
            last.gamma,
            if sign_ok { "matches" } else { "differs" }
        ),
    ))
}

fn scaling_laws() -> Result<(bool, String)> {
    let config = SweepConfig::new(box_family()?, 1.5, log_space(1e-1, 1e-4, 8)?)?;
    let report = sweep_gamma(&config)?;
    let (s1, s2) = (
        report.slope_symdiff.map_or(f64::NAN, |s| s.slope),
        report.slope_deficit.map_or(f64::NAN, |s| s.slope),
    );
    Ok((
        (s1 - 1.0).abs() <= 0.05 && (s2 - 2.0).abs() <= 0.05,
        format!("slopes: sym diff {s1:.4}, deficit {s2:.4}"),
    ))
}

fn squeeze_bounds() -> Result<(bool, String)> {
    let mut ok = true;
    let mut margin = f64::INFINITY;
    for p in [0.25, 0.5] {
        let oct = ConvexPolygon::regular(8, 2.0 * p, 0.0)?;
        for a0 in [1.2, 1.5, 2.0] {
            for alpha in [0.5, 1.0] {
                let (lo, hi) = mu2_squeeze_bounds(p, a0, alpha)?;
                let mu2 = mu2_of_shape(&oct.stretch(1.0 / a0)?, a0, alpha, 1e-12)?;
                ok &= lo <= mu2 && mu2 <= hi;
                margin = margin.min((mu2 - lo).min(hi - mu2));
            }
        }
    }
    Ok((ok, format!("12 cases, smallest margin {margin:.3e}")))
}

fn asymptotics() -> Result<(bool, String)> {
    let fam = StretchFamily::new(&square(), SurfaceTension::euclidean(), 0.5)?;
    let r = mu2_asymptotic(&fam, &[4.0, 8.0, 16.0])?;
    let d: Vec<f64> = r.iter().map(|(_, x)| (x - 1.0).abs()).collect();
    let ok = d[2] <= 0.1 && d[0] > d[1] && d[1] > d[2];
    Ok((
        ok,
        format!("ratios at a0=4,8,16: {:.4}, {:.4}, {:.4}", r[0].1, r[1].1, r[2].1),
    ))
}

fn lipschitz_bounds() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let shrink = |p: Poly| -> Result<Poly> { if p.area() > 1.0 { p.normalized(1.0) } else { Ok(p) } };
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for alpha in [0.5, 1.0, 1.5] {
        let spec = RieszSpec::new(alpha)?.with_quad_tol(1e-10)?;
        let c = lipschitz_constant(alpha)?;
        for _ in 0..20 {
            let e = shrink(random_polygon(&mut rng))?;
            let f = shrink(random_polygon(&mut rng))?;
            let dv = (riesz_energy(&e, &spec)? - riesz_energy(&f, &spec)?).abs();
            let excess = dv - c * e.sym_diff_area(&f, false);
            ok &= excess <= 1e-6;
            worst = worst.max(excess);
        }
    }
    let bound = potential_sup_bound(1.0)?;
    let mut sup = 0.0f64;
    for _ in 0..10 {
        let p = random_polygon(&mut rng).normalized(1.0)?;
        let mut pts: Vec<V> = p.vertices().to_vec();
        pts.extend(p.edges().map(|(a, b)| (a + b) * 0.5));
        pts.push(p.barycenter());
        for x in pts {
            sup = sup.max(riesz_potential(&p, x, 1.0)?);
        }
    }
    let disk = ConvexPolygon::regular(720, 1.0, 0.0)?.normalized(1.0)?;
    let center = riesz_potential(&disk, V::zero(), 1.0)?;
    ok &= sup <= bound + 1e-6 && center <= bound + 1e-6;
    Ok((
        ok,
        format!(
            "60 pairs, max |dV| - c|E^F| = {worst:.3e}; potential sup {sup:.4} (disk centre {center:.6}) vs bound {bound:.6}"
        ),
    ))
}

fn graph_lemma() -> Result<(bool, String)> {
    let circle = |r: f64, n: usize| BoundaryCurve::sample(&Circle { center: V::zero(), radius: r }, n);
    let ellipse = |a: f64, b: f64| Ellipse { center: V::zero(), a, b };
    let mut lhs = true;
    let mut pairs = 0;
    let unit = circle(1.0, 256)?;
    let mut check = |base: &BoundaryCurve, target: Target<'_>| -> Result<()> {
        lhs &= lemma_graph_bounds(base, target)?.lhs_ok;
        pairs += 1;
        Ok(())
    };
    check(&unit, Target::Curve(&unit))?;
    check(&circle(1.0, 512)?, Target::Curve(&circle(1.01, 512)?))?;
    check(&unit, Target::Curve(&circle(0.9, 256)?))?;
    check(&unit, Target::Polygon(&ConvexPolygon::rectangle(2.1, 2.1)?))?;
    check(&unit, Target::Polygon(&ConvexPolygon::regular(12, 1.05, 0.1)?))?;
    check(
        &BoundaryCurve::sample(&ellipse(2.0, 1.0), 1024)?,
        Target::Curve(&BoundaryCurve::sample(&ellipse(2.02, 1.01), 1024)?),
    )?;
    let e = ellipse(2.0, 1.0);
    let base = BoundaryCurve::sample(&e, 2048)?;
    let mut rhs = true;
    let mut ratios = Vec::new();
    let mut c = 0.0;
    for delta in [0.2, 0.1, 0.05] {
        let bumped = Bumped { base: e, t0: 0.0, half_width: delta, amplitude: 0.1 * delta * delta };
        let target = BoundaryCurve::sample(&bumped, 2048)?;
        let r = lemma_graph_bounds(&base, Target::Curve(&target))?;
        lhs &= r.lhs_ok;
        pairs += 1;
        rhs &= r.rhs_ok;
        ratios.push(r.ratio);
        c = r.c;
    }
    Ok((
        lhs && rhs,
        format!(
            "first inequality on {pairs} pairs: {}; C1/|E^F|^(1/3) on bumps {:.3}, {:.3}, {:.3} vs C = {c:.3e}",
            if lhs { "holds" } else { "fails" },
            ratios[0],
            ratios[1],
            ratios[2]
        ),
    ))
}

fn euler_lagrange() -> Result<(bool, String)> {
    let r = PI.powf(-0.5);
    let disk = BoundaryCurve::sample(&Circle { center: V::zero(), radius: r }, 512)?;
    let disk_ratio = el_residual(&disk, &SurfaceTension::euclidean(), &disk.to_polygon()?, 0.1, 1.0)?.nonconstancy();
    let f = SurfaceTension::quadratic([[4.0, 0.0], [0.0, 1.0]])?;
    let ell = BoundaryCurve::sample(&WulffBoundary::new(f.clone(), 1.0)?, 512)?;
    let ell_ratio = el_residual(&ell, &f, &ell.to_polygon()?, 0.1, 1.0)?.nonconstancy();
    Ok((
        disk_ratio <= 1e-4 && ell_ratio >= 0.01,
        format!("nonconstancy: disk {disk_ratio:.2e}, ellipse Wulff shape {ell_ratio:.3e}"),
    ))
}
