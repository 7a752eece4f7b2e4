//! Free-space fundamental solution of the 2D modified Helmholtz operator.
//!
//! The sign follows `(Δ - μ²) G⁰ = δ`, i.e. `G⁰(r) = -K0(μ r) / 2π`. The
//! renormalised Green function is `G - G⁰`, so flipping this sign would
//! silently flip every force.

pub mod bessel;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vec2::Vec2;

pub use bessel::{bessel_k, k0, k0_k1, k1, k2};

/// Below this separation the kernel is treated as evaluated at coincidence.
pub const COINCIDENCE_CUTOFF: f64 = 1e-14;

/// Spectral parameter μ = sqrt(q² + m²); always strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpectralParameter(f64);

impl SpectralParameter {
    pub fn new(mu: f64) -> Result<Self> {
        if mu > 0.0 && mu.is_finite() {
            Ok(Self(mu))
        } else {
            Err(Error::Domain(format!("spectral parameter must be finite and > 0, got {mu}")))
        }
    }

    /// μ(q) = sqrt(q² + m²) for spectral variable `q` and field mass `mass`.
    pub fn from_spectral(q: f64, mass: f64) -> Result<Self> {
        Self::new(q.hypot(mass))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Radial profile of G⁰ and its first two r-derivatives at r > 0.
#[derive(Debug, Clone, Copy)]
pub struct Radial {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

#[inline]
pub fn g0_radial(mu: f64, r: f64) -> Radial {
    let z = mu * r;
    let (k0, k1) = k0_k1(z);
    let c = 1.0 / (2.0 * PI);
    Radial {
        value: -k0 * c,
        d1: mu * k1 * c,
        d2: -mu * mu * (k0 + k1 / z) * c,
    }
}

/// G⁰(μ, x, y) = -K0(μ|x - y|) / 2π.
pub fn g0(mu: SpectralParameter, x: Vec2, y: Vec2) -> Result<f64> {
    let r = (x - y).norm();
    if r < COINCIDENCE_CUTOFF {
        return Err(Error::Coincident { distance: r });
    }
    Ok(-k0(mu.get() * r) / (2.0 * PI))
}

/// Value and derivatives of G⁰ at a pair of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G0Derivs {
    pub value: f64,
    pub grad_x: [f64; 2],
    pub grad_y: [f64; 2],
    /// `mixed[i][j] = ∂x_i ∂y_j G⁰(μ, x, y)`.
    pub mixed: [[f64; 2]; 2],
}

pub fn g0_derivs(mu: SpectralParameter, x: Vec2, y: Vec2) -> Result<G0Derivs> {
    let d = x - y;
    let r = d.norm();
    if r < COINCIDENCE_CUTOFF {
        return Err(Error::Coincident { distance: r });
    }
    let rad = g0_radial(mu.get(), r);
    let e = [d.x / r, d.y / r];
    let grad_x = [rad.d1 * e[0], rad.d1 * e[1]];
    let mut mixed = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let hess = rad.d2 * e[i] * e[j] + rad.d1 / r * (delta - e[i] * e[j]);
            mixed[i][j] = -hess;
        }
    }
    Ok(G0Derivs {
        value: rad.value,
        grad_x,
        grad_y: [-grad_x[0], -grad_x[1]],
        mixed,
    })
}

/// A renormalised Green function and its mixed derivatives at coincidence:
/// `d[i][j] = ∂x_i ∂y_j G_ren(x, y)` evaluated at `y = x`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MixedGreen {
    pub value: f64,
    pub d: [[f64; 2]; 2],
}

/// Anything able to produce `G_ren` and its coincident mixed derivatives at
/// interior points for one fixed spectral parameter.
pub trait MixedGreenSource {
    fn mixed_many(&self, points: &[Vec2]) -> Result<Vec<MixedGreen>>;

    fn mixed_at(&self, x: Vec2) -> Result<MixedGreen> {
        Ok(self.mixed_many(&[x])?[0])
    }

    /// Amplification of rounding errors in the evaluation; 1 for closed
    /// forms.
    fn rounding_amplification(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mu(m: f64) -> SpectralParameter {
        SpectralParameter::new(m).unwrap()
    }

    #[test]
    fn value_at_unit_separation() {
        let v = g0(mu(1.0), Vec2::new(0.0, 0.0), Vec2::new(0.6, 0.8)).unwrap();
        assert!((v + 0.067_008_120_5).abs() < 1e-10, "{v}");
    }

    #[test]
    fn coincidence_rejected() {
        let p = Vec2::new(0.3, 0.3);
        assert!(matches!(g0(mu(1.0), p, p), Err(Error::Coincident { .. })));
        assert!(g0_derivs(mu(1.0), p, p).is_err());
        assert!(SpectralParameter::new(0.0).is_err());
        assert!(SpectralParameter::from_spectral(0.0, 0.0).is_err());
    }

    fn fd_laplacian_residual(m: f64, x: Vec2, y: Vec2, h: f64) -> f64 {
        let f = |p: Vec2| g0(mu(m), x, p).unwrap();
        let lap = (f(y + Vec2::new(h, 0.0)) + f(y - Vec2::new(h, 0.0)) + f(y + Vec2::new(0.0, h))
            + f(y - Vec2::new(0.0, h))
            - 4.0 * f(y))
            / (h * h);
        lap - m * m * f(y)
    }

    #[test]
    fn pde_residual_by_finite_differences() {
        let x = Vec2::new(0.1, -0.2);
        let y = x + Vec2::new(0.3, 0.4);
        assert!(fd_laplacian_residual(2.0, x, y, 1e-3).abs() < 1e-5);
        for &r in &[0.1, 0.5, 1.0, 5.0] {
            for &m in &[0.1, 1.0, 10.0] {
                let y = x + Vec2::new(r * 0.8, r * 0.6);
                let h = 1e-3 * r.min(1.0 / m);
                let rad = g0_radial(m, r);
                let scale = (m * m * rad.value.abs()).max(rad.d2.abs());
                let res = fd_laplacian_residual(m, x, y, h);
                assert!(res.abs() <= 1e-4 * scale, "r={r} mu={m} res={res}");
            }
        }
    }

    #[test]
    fn mixed_derivatives_match_finite_differences() {
        let x = Vec2::new(0.2, 0.1);
        let y = x + Vec2::new(0.7 * 0.6, -0.7 * 0.8);
        let d = g0_derivs(mu(1.0), x, y).unwrap();
        let h = 1e-4;
        let unit = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let f = |a: Vec2, b: Vec2| g0(mu(1.0), a, b).unwrap();
        for i in 0..2 {
            let gx = (f(x + unit[i] * h, y) - f(x - unit[i] * h, y)) / (2.0 * h);
            let gy = (f(x, y + unit[i] * h) - f(x, y - unit[i] * h)) / (2.0 * h);
            assert!((gx - d.grad_x[i]).abs() < 1e-6);
            assert!((gy - d.grad_y[i]).abs() < 1e-6);
            for j in 0..2 {
                let fd = (f(x + unit[i] * h, y + unit[j] * h) - f(x + unit[i] * h, y - unit[j] * h)
                    - f(x - unit[i] * h, y + unit[j] * h)
                    + f(x - unit[i] * h, y - unit[j] * h))
                    / (4.0 * h * h);
                assert!((fd - d.mixed[i][j]).abs() < 1e-6, "({i},{j}) fd {fd} vs {}", d.mixed[i][j]);
            }
        }
    }

    #[test]
    fn mixed_trace_is_pde_combination() {
        // Away from coincidence Δ_x G⁰ = μ² G⁰, and ∂x_i ∂y_i = -∂x_i ∂x_i.
        let m = 1.5;
        let x = Vec2::new(0.0, 0.0);
        let y = Vec2::new(0.9, 0.0);
        let d = g0_derivs(mu(m), x, y).unwrap();
        let trace = d.mixed[0][0] + d.mixed[1][1];
        assert!((trace + m * m * d.value).abs() < 1e-6);
    }

    #[test]
    fn monotone_decay() {
        let x = Vec2::new(0.0, 0.0);
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let r = 0.1 * k as f64;
            let v = g0(mu(1.0), x, Vec2::new(r, 0.0)).unwrap().abs();
            assert!(v < prev);
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let v = g0(mu(0.25 * k as f64), x, Vec2::new(0.5, 0.0)).unwrap().abs();
            assert!(v < prev);
            prev = v;
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_translation_invariant(
            ax in -3.0..3.0f64, ay in -3.0..3.0f64,
            bx in -3.0..3.0f64, by in -3.0..3.0f64,
            m in 0.1..10.0f64,
        ) {
            let a = Vec2::new(ax, ay);
            let b = Vec2::new(bx, by);
            prop_assume!((a - b).norm() > 1e-3);
            let ab = g0(mu(m), a, b).unwrap();
            let ba = g0(mu(m), b, a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-14 * ab.abs().max(1e-300));
            let d = g0_derivs(mu(m), a, b).unwrap();
            let swapped = g0_derivs(mu(m), b, a).unwrap();
            for i in 0..2 {
                prop_assert_eq!(d.grad_x[i] + d.grad_y[i], 0.0);
                for j in 0..2 {
                    let diff = d.mixed[i][j] - swapped.mixed[j][i];
                    prop_assert!(diff.abs() <= 1e-12 * d.mixed[i][j].abs().max(1e-300));
                }
            }
        }
    }
}
