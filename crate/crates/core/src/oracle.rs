//! Closed-form and image-series references for flat Dirichlet plates.
//!
//! These share the kernel module with the solver but none of its discrete
//! machinery, so they can validate it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::{g0_derivs, MixedGreen, MixedGreenSource, SpectralParameter};
use crate::stress::{Dimensionality, OperatorProvider};
use crate::vec2::Vec2;

pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// Relative size below which further image terms are dropped.
pub const IMAGE_SERIES_TOLERANCE: f64 = 1e-12;
const MAX_IMAGES: usize = 10_000_000;

/// A single Dirichlet wall `x = wall`, vacuum on `x > wall`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub wall: f64,
}

impl HalfPlane {
    fn mirror(&self, y: Vec2) -> Vec2 {
        Vec2::new(2.0 * self.wall - y.x, y.y)
    }

    fn check(&self, p: Vec2) -> Result<()> {
        if p.x < self.wall {
            return Err(Error::Domain(format!(
                "point ({}, {}) lies behind the wall x = {}",
                p.x, p.y, self.wall
            )));
        }
        Ok(())
    }

    /// G_ren(x, y) = +K0(μ|x - y*|) / 2π.
    pub fn gren(&self, mu: SpectralParameter, x: Vec2, y: Vec2) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(-g0_derivs(mu, x, self.mirror(y))?.value)
    }

    pub fn gren_mixed(&self, mu: SpectralParameter, x: Vec2) -> Result<MixedGreen> {
        self.check(x)?;
        let d = g0_derivs(mu, x, self.mirror(x))?;
        Ok(reflected_term(&d, -1.0))
    }
}

/// Contribution `sign · G⁰(x, R y)` of an image reflected in a line of
/// constant `x`, differentiated in `y` through the reflection.
fn reflected_term(d: &crate::kernel::G0Derivs, sign: f64) -> MixedGreen {
    MixedGreen {
        value: sign * d.value,
        d: [
            [-sign * d.mixed[0][0], sign * d.mixed[0][1]],
            [-sign * d.mixed[1][0], sign * d.mixed[1][1]],
        ],
    }
}

fn translated_term(d: &crate::kernel::G0Derivs) -> MixedGreen {
    MixedGreen { value: d.value, d: d.mixed }
}

fn accumulate(acc: &mut MixedGreen, t: &MixedGreen) -> f64 {
    acc.value += t.value;
    let mut size = t.value.abs();
    for i in 0..2 {
        for j in 0..2 {
            acc.d[i][j] += t.d[i][j];
            size = size.max(t.d[i][j].abs());
        }
    }
    size
}

fn magnitude(g: &MixedGreen) -> f64 {
    g.d.iter().flatten().fold(g.value.abs(), |m, v| m.max(v.abs()))
}

/// Two parallel Dirichlet walls at `x = lower` and `x = lower + gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelPlates {
    pub lower: f64,
    pub gap: f64,
}

impl ParallelPlates {
    pub fn new(lower: f64, gap: f64) -> Result<Self> {
        if !(gap > 0.0) {
            return Err(Error::Domain(format!("gap must be > 0, got {gap}")));
        }
        Ok(Self { lower, gap })
    }

    fn check(&self, p: Vec2) -> Result<()> {
        if !(p.x > self.lower && p.x < self.lower + self.gap) {
            return Err(Error::Domain(format!("point ({}, {}) is not between the plates", p.x, p.y)));
        }
        Ok(())
    }

    /// Image series for G_ren(x, y) together with the mixed derivatives in
    /// the pair (x, y); `y` is differentiated through each image map.
    fn series(&self, mu: SpectralParameter, x: Vec2, y: Vec2) -> Result<MixedGreen> {
        self.check(x)?;
        self.check(y)?;
        let l = self.gap;
        let translate = |n: i64| Vec2::new(y.x + 2.0 * n as f64 * l, y.y);
        let reflect = |n: i64| Vec2::new(2.0 * self.lower - y.x + 2.0 * n as f64 * l, y.y);
        let mut acc = MixedGreen::default();
        accumulate(&mut acc, &reflected_term(&g0_derivs(mu, x, reflect(0))?, -1.0));
        // Images beyond this index decay monotonically, so a small term
        // bounds the remainder.
        let monotone_from = (1.0 / (mu.get() * l)).ceil() as usize + 1;
        for n in 1..=MAX_IMAGES {
            let n = n as i64;
            let mut size = 0.0f64;
            for m in [n, -n] {
                size = size.max(accumulate(&mut acc, &translated_term(&g0_derivs(mu, x, translate(m))?)));
                size = size.max(accumulate(&mut acc, &reflected_term(&g0_derivs(mu, x, reflect(m))?, -1.0)));
            }
            if n as usize >= monotone_from && size <= IMAGE_SERIES_TOLERANCE * magnitude(&acc) {
                return Ok(acc);
            }
            if size == 0.0 && n as usize >= monotone_from {
                return Ok(acc);
            }
        }
        Err(Error::NonConvergent {
            what: "parallel-plate image series".into(),
            achieved: magnitude(&acc),
        })
    }

    pub fn gren(&self, mu: SpectralParameter, x: Vec2, y: Vec2) -> Result<f64> {
        Ok(self.series(mu, x, y)?.value)
    }

    pub fn gren_mixed(&self, mu: SpectralParameter, x: Vec2) -> Result<MixedGreen> {
        self.series(mu, x, x)
    }
}

/// Image-series operator at fixed μ, usable wherever a solver operator is.
#[derive(Debug, Clone, Copy)]
pub struct ImageSeries {
    pub plates: ParallelPlates,
    pub mu: SpectralParameter,
}

impl MixedGreenSource for ImageSeries {
    fn mixed_many(&self, points: &[Vec2]) -> Result<Vec<MixedGreen>> {
        points.iter().map(|&p| self.plates.gren_mixed(self.mu, p)).collect()
    }
}

impl OperatorProvider for ParallelPlates {
    type Operator = ImageSeries;

    fn operator(&self, mu: SpectralParameter) -> Result<ImageSeries> {
        Ok(ImageSeries { plates: *self, mu })
    }

    fn distance_to_plates(&self, p: Vec2) -> f64 {
        (p.x - self.lower).min(self.lower + self.gap - p.x)
    }
}

/// Casimir force between flat Dirichlet plates at distance `gap` for a
/// massless field: per unit length in 2D, per unit area in 3D. Negative
/// values mean attraction.
pub fn flat_plate_force(dim: Dimensionality, gap: f64, mass: f64) -> Result<f64> {
    if mass != 0.0 {
        return Err(Error::Domain(format!(
            "closed-form flat-plate force is only available for m = 0, got {mass}"
        )));
    }
    if !(gap > 0.0) {
        return Err(Error::Domain(format!("gap must be > 0, got {gap}")));
    }
    Ok(match dim {
        Dimensionality::Two => -ZETA_3 / (8.0 * PI * gap.powi(3)),
        Dimensionality::Three => -PI * PI / (480.0 * gap.powi(4)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu(m: f64) -> SpectralParameter {
        SpectralParameter::new(m).unwrap()
    }

    #[test]
    fn halfplane_reference_value() {
        let hp = HalfPlane { wall: 0.0 };
        let v = hp.gren(mu(1.0), Vec2::new(0.3, 0.0), Vec2::new(0.4, 0.0)).unwrap();
        assert!((v - 0.105_125_000_7).abs() < 1e-10, "{v}");
        let w = hp.gren(mu(1.0), Vec2::new(0.4, 0.0), Vec2::new(0.3, 0.0)).unwrap();
        assert_eq!(v, w);
        assert!(hp.gren(mu(1.0), Vec2::new(-0.1, 0.0), Vec2::new(0.3, 0.0)).is_err());
    }

    #[test]
    fn halfplane_dirichlet_condition() {
        let hp = HalfPlane { wall: 0.0 };
        let x = Vec2::new(0.7, 0.2);
        let xi = Vec2::new(0.0, -0.4);
        let g = hp.gren(mu(2.0), x, xi).unwrap();
        let g0 = crate::kernel::g0(mu(2.0), x, xi).unwrap();
        assert_eq!(g, -g0);
    }

    #[test]
    fn halfplane_mixed_matches_finite_differences() {
        let hp = HalfPlane { wall: 0.0 };
        let x = Vec2::new(0.3, 0.0);
        let m = hp.gren_mixed(mu(1.0), x).unwrap();
        let h = 1e-4;
        let e = [Vec2::new(h, 0.0), Vec2::new(0.0, h)];
        let f = |a: Vec2, b: Vec2| hp.gren(mu(1.0), a, b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let fd = (f(x + e[i], x + e[j]) - f(x + e[i], x - e[j]) - f(x - e[i], x + e[j])
                    + f(x - e[i], x - e[j]))
                    / (4.0 * h * h);
                assert!((fd - m.d[i][j]).abs() < 1e-5 * m.d[0][0].abs(), "{i}{j}: {fd} vs {}", m.d[i][j]);
            }
        }
    }

    #[test]
    fn parallel_series_self_converged_and_symmetric() {
        let pp = ParallelPlates::new(0.0, 1.0).unwrap();
        let x = Vec2::new(0.5, 0.0);
        let v = pp.gren(mu(1.0), x, x).unwrap();
        // Brute force with a fixed, generous image count.
        let mut brute = 0.0;
        for n in -60i64..=60 {
            let t = Vec2::new(x.x + 2.0 * n as f64, x.y);
            let r = Vec2::new(-x.x + 2.0 * n as f64, x.y);
            if n != 0 {
                brute += crate::kernel::g0(mu(1.0), x, t).unwrap();
            }
            brute -= crate::kernel::g0(mu(1.0), x, r).unwrap();
        }
        assert!((v - brute).abs() < 1e-10 * brute.abs(), "{v} vs {brute}");
        let a = pp.gren(mu(1.0), Vec2::new(0.3, 0.1), Vec2::new(0.6, -0.2)).unwrap();
        let b = pp.gren(mu(1.0), Vec2::new(0.7, 0.1), Vec2::new(0.4, -0.2)).unwrap();
        assert!((a - b).abs() < 1e-13);
        let c = pp.gren(mu(1.0), Vec2::new(0.6, -0.2), Vec2::new(0.3, 0.1)).unwrap();
        assert!((a - c).abs() < 1e-13);
    }

    #[test]
    fn distant_second_plate_reduces_to_halfplane() {
        let pp = ParallelPlates::new(0.0, 50.0).unwrap();
        let hp = HalfPlane { wall: 0.0 };
        let x = Vec2::new(0.3, 0.0);
        let y = Vec2::new(0.4, 0.1);
        let a = pp.gren(mu(1.0), x, y).unwrap();
        let b = hp.gren(mu(1.0), x, y).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn parallel_mixed_matches_finite_differences() {
        let pp = ParallelPlates::new(-0.2, 1.3).unwrap();
        let x = Vec2::new(0.2, 0.7);
        let m = pp.gren_mixed(mu(0.8), x).unwrap();
        let h = 1e-4;
        let e = [Vec2::new(h, 0.0), Vec2::new(0.0, h)];
        let f = |a: Vec2, b: Vec2| pp.gren(mu(0.8), a, b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let fd = (f(x + e[i], x + e[j]) - f(x + e[i], x - e[j]) - f(x - e[i], x + e[j])
                    + f(x - e[i], x - e[j]))
                    / (4.0 * h * h);
                assert!((fd - m.d[i][j]).abs() < 1e-5, "{i}{j}: {fd} vs {}", m.d[i][j]);
            }
        }
        // No lateral variation: the off-diagonal entries vanish.
        assert!(m.d[0][1].abs() < 1e-14 && m.d[1][0].abs() < 1e-14);
    }

    #[test]
    fn small_mu_series_converges() {
        let pp = ParallelPlates::new(0.0, 1.0).unwrap();
        let m = pp.gren_mixed(mu(1e-3), Vec2::new(0.5, 0.0)).unwrap();
        assert!(m.value.is_finite() && m.d[0][0].is_finite());
    }

    #[test]
    fn flat_plate_closed_forms() {
        let f2 = flat_plate_force(Dimensionality::Two, 1.0, 0.0).unwrap();
        let f3 = flat_plate_force(Dimensionality::Three, 1.0, 0.0).unwrap();
        assert!((f2 + 0.047_828_324_5).abs() < 1e-10);
        assert!((f3 + 0.020_561_675_8).abs() < 1e-10);
        let r2 = flat_plate_force(Dimensionality::Two, 2.0, 0.0).unwrap() / f2;
        let r3 = flat_plate_force(Dimensionality::Three, 2.0, 0.0).unwrap() / f3;
        assert!((r2 - 0.125).abs() < 1e-15 && (r3 - 0.0625).abs() < 1e-15);
        assert!(flat_plate_force(Dimensionality::Two, 1.0, 0.5).is_err());
    }
}
