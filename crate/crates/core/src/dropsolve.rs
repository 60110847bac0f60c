//! Minimization of `E_γ` over the stretch family and γ-sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anisotropy::SurfaceTension;
use crate::error::{domain, Error, Result};
use crate::geometry::ConvexPolygon;
use crate::minimize::brent;
use crate::riesz::{riesz_energy, RieszSpec};
use crate::variations::{default_step, mu2_integral, stretch_derivatives, StretchFamily, VariationCoefficients};

/// `P_f(F) + γ V(F)`.
pub fn total_energy(
    shape: &ConvexPolygon<f64>,
    tension: &SurfaceTension<f64>,
    gamma: f64,
    spec: &RieszSpec,
) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(domain("gamma must be non-negative"));
    }
    let p = shape.anisotropic_perimeter(tension);
    if gamma == 0.0 {
        return Ok(p);
    }
    Ok(p + gamma * riesz_energy(shape, spec)?)
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub family: StretchFamily,
    pub a0: f64,
    /// Sorted descending on construction.
    pub gammas: Vec<f64>,
    pub bracket: (f64, f64),
    pub tol_a: f64,
}

impl SweepConfig {
    /// Default bracket: on the side of `a = 1` that contains `a0`, so the
    /// mirror member `1/a0` of a symmetric family stays outside.
    pub fn new(family: StretchFamily, a0: f64, mut gammas: Vec<f64>) -> Result<Self> {
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(domain("a0 must be positive"));
        }
        if gammas.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(domain("gammas must be non-negative"));
        }
        gammas.sort_by(|a, b| b.total_cmp(a));
        let bracket = if a0 > 1.0 {
            ((0.5 * a0).max(1.0), 2.0 * a0)
        } else if a0 < 1.0 {
            (0.5 * a0, (2.0 * a0).min(1.0))
        } else {
            (0.5, 2.0)
        };
        Ok(Self {
            family,
            a0,
            gammas,
            bracket,
            tol_a: 1e-10,
        })
    }

    pub fn with_bracket(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 < lo && lo < self.a0 && self.a0 < hi) {
            return Err(Error::Bracket(format!("[{lo}, {hi}] does not contain a0 = {}", self.a0)));
        }
        self.bracket = (lo, hi);
        Ok(self)
    }
}

/// Best member of the family for `gamma`: Brent's method on the bracket,
/// polished by Newton steps on a Richardson-extrapolated derivative.
/// Never returns an energy above the one at `a0`.
pub fn minimize_stretch(config: &SweepConfig, gamma: f64) -> Result<(f64, f64)> {
    if !(gamma >= 0.0) {
        return Err(domain("gamma must be non-negative"));
    }
    let fam = &config.family;
    let e = |a: f64| fam.energy(a, gamma);
    let (lo, hi) = config.bracket;
    let m = brent(e, lo, hi, config.tol_a)?;
    let (mut a, mut ea) = (m.x, m.fx);
    for _ in 0..3 {
        let h = 1e-3 * a;
        let d = |h: f64| -> Result<(f64, f64)> {
            let (ep, em) = (e(a + h)?, e(a - h)?);
            Ok(((ep - em) / (2.0 * h), (ep - 2.0 * ea + em) / (h * h)))
        };
        let (d1h, d2h) = d(h)?;
        let (d1f, d2f) = d(0.5 * h)?;
        let (g, c) = ((4.0 * d1f - d1h) / 3.0, (4.0 * d2f - d2h) / 3.0);
        if !(c > 0.0) {
            break;
        }
        let step = -g / c;
        let next = a + step;
        if !(next > lo && next < hi) || step.abs() > 0.1 * h {
            break;
        }
        let en = e(next)?;
        if en > ea + 4.0 * f64::EPSILON * ea.abs() {
            break;
        }
        a = next;
        ea = en;
        if step.abs() <= 1e-14 * a {
            break;
        }
    }
    let e0 = e(config.a0)?;
    if ea > e0 {
        return Ok((config.a0, e0));
    }
    Ok((a, ea))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub a_pred: f64,
    pub deficit_pred: f64,
    /// Upper bound on the γ range of the rectangle characterization; `None`
    /// when its denominator is not positive.
    pub gamma_star_bound: Option<f64>,
}

fn check_coeffs(c: &VariationCoefficients) -> Result<()> {
    if ![c.mu1, c.mu2, c.mu3, c.a0].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidExpansion("non-finite coefficient".into()));
    }
    if !(c.mu1 > 0.0) {
        return Err(Error::InvalidExpansion(format!("mu1 = {} is not positive", c.mu1)));
    }
    Ok(())
}

/// Closed-form minimizer location, energy deficit to third order and the
/// γ threshold bound.
pub fn predicted_minimizer(a0: f64, gamma: f64, c: &VariationCoefficients) -> Result<Prediction> {
    check_coeffs(c)?;
    if !(a0 > 0.0) || !(gamma >= 0.0) {
        return Err(domain("a0 must be positive and gamma non-negative"));
    }
    let (m2, m3) = (c.mu2, c.mu3);
    let h = m2 * a0 / 2.0;
    let a_pred = a0 - m2 * a0 * a0 * gamma / 2.0;
    let deficit_pred = h * h * gamma * gamma - (h.powi(3) + m2 * m2 * m3 * a0.powi(4) / 8.0) * gamma.powi(3);
    let den = (m2 * a0).powi(3) + m2 * m2 * m3 * a0.powi(4);
    let gamma_star_bound = (den > 0.0).then(|| 2.0 * (m2 * a0).powi(2) / den);
    Ok(Prediction {
        a_pred,
        deficit_pred,
        gamma_star_bound,
    })
}

/// `μ₂² / (8 μ₁)`.
pub fn lower_bound_constant(c: &VariationCoefficients) -> Result<f64> {
    check_coeffs(c)?;
    Ok(c.mu2 * c.mu2 / (8.0 * c.mu1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub a_star: f64,
    #[serde(rename = "E_star")]
    pub e_star: f64,
    #[serde(rename = "E_wulff")]
    pub e_wulff: f64,
    pub sym_diff: f64,
    pub deficit: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub points: usize,
    /// Whether the largest-x point was dropped as pre-asymptotic.
    pub dropped_largest: bool,
}

/// Least-squares line through `(ln x, ln y)` over points with positive `y`.
/// With four or more points, the largest-`x` point is dropped when its
/// residual against the fit of the other points exceeds three times that
/// fit's RMS.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let fit = |p: &[(f64, f64)]| -> Option<(f64, f64, f64)> {
        let n = p.len() as f64;
        if p.len() < 2 {
            return None;
        }
        let (mx, my) = (p.iter().map(|q| q.0).sum::<f64>() / n, p.iter().map(|q| q.1).sum::<f64>() / n);
        let sxx: f64 = p.iter().map(|q| (q.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let sxy: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let slope = sxy / sxx;
        let icpt = my - slope * mx;
        let rms = (p.iter().map(|q| (q.1 - icpt - slope * q.0).powi(2)).sum::<f64>() / n).sqrt();
        Some((slope, icpt, rms))
    };
    let (slope, intercept, rms) = fit(&pts)?;
    if pts.len() >= 4 {
        let k = (0..pts.len()).max_by(|&i, &j| pts[i].0.total_cmp(&pts[j].0))?;
        let rest: Vec<(f64, f64)> = pts.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, p)| *p).collect();
        let (rs, ri, rr) = fit(&rest)?;
        let resid = (pts[k].1 - ri - rs * pts[k].0).abs();
        if resid > 3.0 * rr + 1e-9 {
            return Some(SlopeFit {
                slope: rs,
                intercept: ri,
                rms: rr,
                points: rest.len(),
                dropped_largest: true,
            });
        }
    }
    Some(SlopeFit {
        slope,
        intercept,
        rms,
        points: pts.len(),
        dropped_largest: false,
    })
}

/// Closed-form limits the sweep ratios are compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedRatios {
    /// `−μ₂ a0² / 2`.
    pub a_shift_over_gamma: f64,
    /// `(μ₂ a0 / 2)²`.
    pub deficit_over_gamma2: f64,
    /// `|μ₂| a0`, the small-γ limit of `2|a* − a0| / a0` over γ.
    pub symdiff_over_gamma: f64,
    /// `μ₂² / (8 μ₁)`.
    pub lower_bound_constant: f64,
    pub gamma_star_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub a0: f64,
    pub alpha: f64,
    /// "rectangle family" when the family is the box family, whose best
    /// member is the global minimizer; "upper-bound construction"
    /// otherwise, in which case the deficit is that of the construction.
    pub construction: String,
    /// `mu1`, `mu3` by finite differences, `mu2` by the integral formula.
    pub coefficients: Option<VariationCoefficients>,
    pub predicted: Option<PredictedRatios>,
    /// Sorted by γ descending.
    pub rows: Vec<SweepRow>,
    pub slope_symdiff: Option<SlopeFit>,
    pub slope_deficit: Option<SlopeFit>,
    pub symdiff_over_gamma: Option<f64>,
    pub deficit_over_gamma2: Option<f64>,
    pub a_shift_over_gamma: Option<f64>,
    /// γ values where `a ↦ E_γ(K_a)` is not locally convex at `a0`.
    pub nonconvex_gammas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

pub const CSV_COLUMNS: [&str; 6] = ["gamma", "a_star", "E_star", "E_wulff", "sym_diff", "deficit"];

impl ExperimentReport {
    /// Rows as CSV with 17 significant digits.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for r in &self.rows {
            let rec = [r.gamma, r.a_star, r.e_star, r.e_wulff, r.sym_diff, r.deficit].map(|x| format!("{x:.16e}"));
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn is_box_family(fam: &StretchFamily) -> bool {
    let Some(gens) = fam.tension().crystalline_generators() else {
        return false;
    };
    let rect = fam.base().vertices().len() == 4
        && fam.base().edges().all(|(a, b)| {
            let e = b - a;
            e.x.abs() < 1e-12 * e.norm() || e.y.abs() < 1e-12 * e.norm()
        });
    rect && gens.len() == 4 && gens.iter().all(|g| g.x != 0.0 && g.y != 0.0)
}

fn sweep_row(config: &SweepConfig, gamma: f64) -> Result<(SweepRow, bool)> {
    let fam = &config.family;
    let a0 = config.a0;
    let (a_star, e_star) = minimize_stretch(config, gamma)?;
    let e_wulff = fam.energy(a0, gamma)?;
    let sym_diff = fam.member(a_star)?.sym_diff_area(&fam.member(a0)?, true);
    let h = 1e-3 * a0;
    let curv = fam.energy(a0 + h, gamma)? + fam.energy(a0 - h, gamma)? - 2.0 * e_wulff;
    Ok((
        SweepRow {
            gamma,
            a_star,
            e_star,
            e_wulff,
            sym_diff,
            deficit: (e_wulff - e_star).max(0.0),
        },
        curv <= 0.0,
    ))
}

/// Minimizes over the family for every γ and fits the scaling laws.
///
/// Numeric failures do not discard finished work: the returned report then
/// carries the rows that succeeded and an `error` message, and the error is
/// returned alongside it.
pub fn sweep_gamma_partial(config: &SweepConfig) -> (ExperimentReport, Option<Error>) {
    let fam = &config.family;
    let a0 = config.a0;
    let mut report = ExperimentReport {
        a0,
        alpha: fam.alpha(),
        construction: if is_box_family(fam) {
            "rectangle family".into()
        } else {
            "upper-bound construction".into()
        },
        coefficients: None,
        predicted: None,
        rows: Vec::new(),
        slope_symdiff: None,
        slope_deficit: None,
        symdiff_over_gamma: None,
        deficit_over_gamma2: None,
        a_shift_over_gamma: None,
        nonconvex_gammas: Vec::new(),
        error: None,
    };
    let mut first_err = None;
    let coeffs = stretch_derivatives(fam, a0, default_step(a0)).and_then(|mut c| {
        c.mu2 = mu2_integral(fam, a0)?;
        Ok(c)
    });
    match coeffs {
        Ok(c) => {
            report.coefficients = Some(c);
            if let (Ok(p), Ok(lb)) = (predicted_minimizer(a0, 0.0, &c), lower_bound_constant(&c)) {
                report.predicted = Some(PredictedRatios {
                    a_shift_over_gamma: -c.mu2 * a0 * a0 / 2.0,
                    deficit_over_gamma2: (c.mu2 * a0 / 2.0).powi(2),
                    symdiff_over_gamma: c.mu2.abs() * a0,
                    lower_bound_constant: lb,
                    gamma_star_bound: p.gamma_star_bound,
                });
            }
        }
        Err(e) => first_err = Some(e),
    }
    let results: Vec<Result<(SweepRow, bool)>> =
        config.gammas.par_iter().map(|&g| sweep_row(config, g)).collect();
    for r in results {
        match r {
            Ok((row, nonconvex)) => {
                if nonconvex {
                    report.nonconvex_gammas.push(row.gamma);
                }
                report.rows.push(row);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let gs: Vec<f64> = report.rows.iter().map(|r| r.gamma).collect();
    let sd: Vec<f64> = report.rows.iter().map(|r| r.sym_diff).collect();
    let df: Vec<f64> = report.rows.iter().map(|r| r.deficit).collect();
    report.slope_symdiff = loglog_slope(&gs, &sd);
    report.slope_deficit = loglog_slope(&gs, &df);
    if let Some(last) = report.rows.iter().rev().find(|r| r.gamma > 0.0) {
        let g = last.gamma;
        report.symdiff_over_gamma = Some(last.sym_diff / g);
        report.deficit_over_gamma2 = Some(last.deficit / (g * g));
        report.a_shift_over_gamma = Some((last.a_star - a0) / g);
    }
    report.error = first_err.as_ref().map(|e| e.to_string());
    (report, first_err)
}

/// As [`sweep_gamma_partial`], failing on the first numeric error.
pub fn sweep_gamma(config: &SweepConfig) -> Result<ExperimentReport> {
    let positive: Vec<f64> = config.gammas.iter().copied().filter(|g| *g > 0.0).collect();
    if positive.len() < 4 {
        return Err(domain("a sweep needs at least four positive gamma values"));
    }
    let (lo, hi) = positive.iter().fold((f64::INFINITY, 0.0f64), |(l, h), g| (l.min(*g), h.max(*g)));
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(domain("sweep gammas must span at least two decades"));
    }
    match sweep_gamma_partial(config) {
        (report, None) => Ok(report),
        (_, Some(e)) => Err(e),
    }
}

/// `n` values log-spaced from `start` to `stop` inclusive.
pub fn log_space(start: f64, stop: f64, n: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) || n < 2 {
        return Err(domain("log spacing needs positive endpoints and n >= 2"));
    }
    let (l0, l1) = (start.ln(), stop.ln());
    Ok((0..n)
        .map(|k| {
            if k == 0 {
                start
            } else if k == n - 1 {
                stop
            } else {
                (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}
