//! Surface tensions: one-homogeneous convex integrands on the plane.
//!
//! Four families are supported. Crystalline tensions are maxima of finitely
//! many linear forms, `f(ν) = max_i x_i·ν`, whose Wulff shape is the convex
//! hull of the generators. The two smooth families are the quadratic norms
//! `√(ν·Mν)` and a regularized quartic
//! `((1−β)|ν|⁴ + β(ν₁⁴+ν₂⁴))^{1/4}`, which is smooth, uniformly elliptic and
//! invariant under the symmetries of the square for every `β ∈ (0,1)`. It is
//! the stock example of a non-Euclidean smooth tension used throughout the
//! stretch-family experiments. Finally any tension can be stretched,
//! `f_a(ν) = f(aν₁, ν₂/a)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::vec2::Vec2;

/// Relative tie tolerance when selecting active crystalline generators.
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub enum SurfaceTension<T> {
    Crystalline {
        generators: Vec<Vec2<T>>,
    },
    #[serde(rename = "quadratic")]
    QuadraticForm {
        #[serde(rename = "M")]
        m: [[T; 2]; 2],
    },
    #[serde(rename = "quartic")]
    RegularizedQuartic { beta: T },
    Stretched {
        a: T,
        base: Box<SurfaceTension<T>>,
    },
}

impl<T: Real> SurfaceTension<T> {
    pub fn crystalline(generators: Vec<Vec2<T>>) -> Result<Self> {
        let t = Self::Crystalline { generators };
        t.validate()?;
        Ok(t)
    }

    pub fn quadratic(m: [[T; 2]; 2]) -> Result<Self> {
        let t = Self::QuadraticForm { m };
        t.validate()?;
        Ok(t)
    }

    pub fn quartic(beta: T) -> Result<Self> {
        let t = Self::RegularizedQuartic { beta };
        t.validate()?;
        Ok(t)
    }

    /// The Euclidean norm, written as the identity quadratic form.
    pub fn euclidean() -> Self {
        Self::QuadraticForm {
            m: [[T::one(), T::zero()], [T::zero(), T::one()]],
        }
    }

    /// `½(a₀|ν₁| + a₀⁻¹|ν₂|)`, whose Wulff shape is the unit-area rectangle of
    /// width `a₀`.
    pub fn rectangular(a0: T) -> Result<Self> {
        if !(a0 > T::zero()) {
            return Err(domain("rectangular tension needs a0 > 0"));
        }
        let half = T::lit(0.5);
        let (gx, gy) = (a0 * half, half / a0);
        Self::crystalline(vec![
            Vec2::new(gx, gy),
            Vec2::new(-gx, gy),
            Vec2::new(-gx, -gy),
            Vec2::new(gx, -gy),
        ])
    }

    /// Checks the structural invariants of every variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Crystalline { generators } => {
                if generators.is_empty() {
                    return Err(domain("crystalline tension needs at least one generator"));
                }
                if generators.iter().any(|g| !(g.x.is_finite() && g.y.is_finite())) {
                    return Err(domain("non-finite crystalline generator"));
                }
                // Nonempty interior of the hull: f must be positive on the circle.
                let n = 64;
                for k in 0..n {
                    let nu = Vec2::polar(T::lit(std::f64::consts::TAU * (k as f64 + 0.25) / n as f64));
                    if !(self.value(nu) > T::zero()) {
                        return Err(domain(
                            "crystalline generators do not surround the origin with nonempty interior",
                        ));
                    }
                }
                Ok(())
            }
            Self::QuadraticForm { m } => {
                if (m[0][1] - m[1][0]).abs() > T::lit(1e-12) * (m[0][1].abs() + T::one()) {
                    return Err(domain("quadratic form matrix must be symmetric"));
                }
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if !(m[0][0] > T::zero() && det > T::zero()) {
                    return Err(domain("quadratic form matrix must be positive definite"));
                }
                Ok(())
            }
            Self::RegularizedQuartic { beta } => {
                if !(*beta > T::zero() && *beta < T::one()) {
                    return Err(domain("quartic beta must lie in (0,1)"));
                }
                Ok(())
            }
            Self::Stretched { a, base } => {
                if !(*a > T::zero() && a.is_finite()) {
                    return Err(domain("stretch factor must be positive"));
                }
                base.validate()
            }
        }
    }

    /// Smooth tensions have a classical gradient and Hessian away from 0.
    pub fn is_smooth(&self) -> bool {
        match self {
            Self::Crystalline { .. } => false,
            Self::QuadraticForm { .. } | Self::RegularizedQuartic { .. } => true,
            Self::Stretched { base, .. } => base.is_smooth(),
        }
    }

    /// Generators of the underlying polytope for crystalline tensions, with
    /// any stretch wrappers applied.
    pub fn crystalline_generators(&self) -> Option<Vec<Vec2<T>>> {
        match self {
            Self::Crystalline { generators } => Some(generators.clone()),
            Self::Stretched { a, base } => base
                .crystalline_generators()
                .map(|g| g.into_iter().map(|p| p.scale_xy(*a, a.recip())).collect()),
            _ => None,
        }
    }

    pub fn eval(&self, nu: Vec2<T>) -> Result<T> {
        if nu.is_zero() {
            return Err(domain("surface tension evaluated at the zero vector"));
        }
        Ok(self.value(nu))
    }

    /// Evaluation without the zero check; `nu` must be nonzero.
    pub(crate) fn value(&self, nu: Vec2<T>) -> T {
        match self {
            Self::Crystalline { generators } => generators
                .iter()
                .map(|g| g.dot(nu))
                .fold(T::neg_infinity(), T::max),
            Self::QuadraticForm { m } => quad_form(m, nu).sqrt(),
            Self::RegularizedQuartic { beta } => quartic_poly(*beta, nu).sqrt().sqrt(),
            Self::Stretched { a, base } => base.value(nu.scale_xy(*a, a.recip())),
        }
    }

    /// Gradient for smooth variants; for crystalline tensions the average of
    /// the generators attaining the maximum within a relative tie tolerance.
    pub fn grad(&self, nu: Vec2<T>) -> Result<Vec2<T>> {
        if nu.is_zero() {
            return Err(domain("surface tension gradient at the zero vector"));
        }
        Ok(self.gradient(nu))
    }

    pub(crate) fn gradient(&self, nu: Vec2<T>) -> Vec2<T> {
        match self {
            Self::Crystalline { generators } => {
                let best = self.value(nu);
                let tol = T::lit(TIE_TOL) * best.abs().max(T::min_positive_value());
                let mut sum = Vec2::zero();
                let mut count = T::zero();
                for g in generators {
                    if g.dot(nu) >= best - tol {
                        sum += *g;
                        count = count + T::one();
                    }
                }
                sum / count
            }
            Self::QuadraticForm { m } => {
                let mv = Vec2::new(m[0][0] * nu.x + m[0][1] * nu.y, m[1][0] * nu.x + m[1][1] * nu.y);
                mv / quad_form(m, nu).sqrt()
            }
            Self::RegularizedQuartic { beta } => {
                let q = quartic_poly(*beta, nu);
                let r2 = nu.norm_sq();
                let one_m = T::one() - *beta;
                let v = Vec2::new(
                    one_m * r2 * nu.x + *beta * nu.x.powi(3),
                    one_m * r2 * nu.y + *beta * nu.y.powi(3),
                );
                v / q.powf(T::lit(0.75))
            }
            Self::Stretched { a, base } => {
                let ai = a.recip();
                base.gradient(nu.scale_xy(*a, ai)).scale_xy(*a, ai)
            }
        }
    }

    /// `d²/dt² f(ν + tτ)` at `t = 0` with `τ ⊥ ν`, `|τ| = |ν|`, by central
    /// differences with one Richardson level.
    pub fn tangential_second_derivative(&self, nu: Vec2<T>) -> Result<T> {
        if !self.is_smooth() {
            return Err(Error::Unsupported(
                "tangential Hessian of a crystalline tension".into(),
            ));
        }
        if nu.is_zero() {
            return Err(domain("tangential Hessian at the zero vector"));
        }
        let nu = nu.normalized();
        let tau = nu.perp();
        let h = T::lit(1e-4).max(T::epsilon().powf(T::lit(0.25)) * T::lit(0.5));
        let f0 = self.value(nu);
        let second = |h: T| {
            (self.value(nu + tau * h) - f0 - f0 + self.value(nu - tau * h)) / (h * h)
        };
        let coarse = second(h);
        let fine = second(h * T::lit(0.5));
        Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
    }

    /// Minimum and maximum tangential second derivative over `n_samples`
    /// equispaced unit directions.
    pub fn ellipticity_bounds(&self, n_samples: usize) -> Result<(T, T)> {
        if !self.is_smooth() {
            return Err(Error::Unsupported(
                "ellipticity bounds of a crystalline tension".into(),
            ));
        }
        if n_samples < 16 {
            return Err(domain("ellipticity bounds need at least 16 samples"));
        }
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for k in 0..n_samples {
            let theta = T::lit(std::f64::consts::TAU * k as f64 / n_samples as f64);
            let d = self.tangential_second_derivative(Vec2::polar(theta))?;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        Ok((lo, hi))
    }

    /// `f_a(ν) = f(aν₁, ν₂/a)`.
    pub fn stretch(&self, a: T) -> Result<Self> {
        if !(a > T::zero() && a.is_finite()) {
            return Err(domain("stretch factor must be positive"));
        }
        Ok(Self::Stretched {
            a,
            base: Box::new(self.clone()),
        })
    }

    /// Invariance under the eight symmetries of the square, tested on 64
    /// directions with relative tolerance `tol`.
    pub fn is_dihedral_symmetric(&self, tol: T) -> bool {
        let n = 64;
        (0..n).all(|k| {
            let nu: Vec2<T> =
                Vec2::polar(T::lit(std::f64::consts::TAU * (k as f64 + 0.137) / n as f64));
            let f = self.value(nu);
            dihedral_images(nu)
                .into_iter()
                .all(|img| (self.value(img) - f).abs() <= tol * f)
        })
    }
}

/// The orbit of `v` under the dihedral group of the square.
pub fn dihedral_images<T: Real>(v: Vec2<T>) -> [Vec2<T>; 8] {
    let (x, y) = (v.x, v.y);
    [
        Vec2::new(x, y),
        Vec2::new(-x, y),
        Vec2::new(x, -y),
        Vec2::new(-x, -y),
        Vec2::new(y, x),
        Vec2::new(-y, x),
        Vec2::new(y, -x),
        Vec2::new(-y, -x),
    ]
}

fn quad_form<T: Real>(m: &[[T; 2]; 2], v: Vec2<T>) -> T {
    m[0][0] * v.x * v.x + (m[0][1] + m[1][0]) * v.x * v.y + m[1][1] * v.y * v.y
}

fn quartic_poly<T: Real>(beta: T, v: Vec2<T>) -> T {
    let r2 = v.norm_sq();
    (T::one() - beta) * r2 * r2 + beta * (v.x.powi(4) + v.y.powi(4))
}
