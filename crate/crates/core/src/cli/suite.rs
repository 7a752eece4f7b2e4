//! Oracle checks run by `casimir validate`.

use std::sync::Arc;

use crate::bem::{assemble, GreenOperator};
use crate::error::Result;
use crate::force::{period_forces, Component, ErrorMode, ForcePath, PeriodForces, SolverConfig};
use crate::geometry::{assemble_scene, mesh_scene, PlateGeometry, RackGeometry};
use crate::kernel::{MixedGreen, MixedGreenSource, SpectralParameter};
use crate::oracle::{flat_plate_force, ParallelPlates};
use crate::stress::Dimensionality;
use crate::vec2::Vec2;

use super::config::RunConfig;
use super::output::fmt9;

pub const FLAT_TOLERANCE_2D: f64 = 2e-2;
pub const FLAT_TOLERANCE_3D: f64 = 3e-2;
pub const IMAGE_TOLERANCE: f64 = 1e-3;
/// Spread between integration lines allowed, in units of the error estimate.
pub const PATH_SPREAD_FACTOR: f64 = 3.0;
pub const PATH_FRACTIONS: [f64; 3] = [0.4, 0.5, 0.6];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {}: {}", self.name, self.detail)
    }
}

fn gap_of(geom: &PlateGeometry) -> f64 {
    match geom {
        PlateGeometry::Rack(g) => g.gap,
        PlateGeometry::Explicit(e) => e.gap,
    }
}

fn failed(name: String, e: impl std::fmt::Display) -> Check {
    Check { name, passed: false, detail: e.to_string() }
}

/// Flat plates at the configured gap and numerics against the closed form.
pub fn flat_plate_checks(config: &RunConfig) -> Vec<Check> {
    let gap = gap_of(&config.geometry);
    let geom: PlateGeometry = RackGeometry::flat(gap).into();
    let mut cfg = SolverConfig { mass: 0.0, numerics: config.numerics };
    cfg.numerics.error_mode = ErrorMode::QuadratureOnly;
    let run = period_forces(&geom, &cfg, None);
    config
        .physics
        .dimensionality
        .iter()
        .map(|&dim| {
            let name = format!("flat plates {}", dim.label());
            let tol = match dim {
                Dimensionality::Two => FLAT_TOLERANCE_2D,
                Dimensionality::Three => FLAT_TOLERANCE_3D,
            };
            let forces = match &run {
                Ok(f) => f,
                Err(e) => return failed(name, e),
            };
            let want = match flat_plate_force(dim, gap, 0.0) {
                Ok(w) => w,
                Err(e) => return failed(name, e),
            };
            let got = forces.get(dim, Component::Normal).value / geom.period();
            let dev = ((got - want) / want).abs();
            Check {
                name,
                passed: dev <= tol,
                detail: format!(
                    "F/a = {}, closed form {}, relative deviation {:.2e} (tolerance {tol:.0e})",
                    fmt9(got),
                    fmt9(want),
                    dev
                ),
            }
        })
        .collect()
}

fn worst_relative(got: &MixedGreen, want: &MixedGreen) -> f64 {
    let scale = want.d.iter().flatten().fold(want.value.abs(), |m, v| m.max(v.abs()));
    let mut dev = (got.value - want.value).abs();
    for i in 0..2 {
        for j in 0..2 {
            dev = dev.max((got.d[i][j] - want.d[i][j]).abs());
        }
    }
    dev / scale
}

/// Solver Green function between flat plates against the image series.
pub fn image_check(config: &RunConfig) -> Check {
    let name = "image series".to_string();
    let gap = gap_of(&config.geometry);
    let run = || -> Result<f64> {
        let geom: PlateGeometry = RackGeometry::flat(gap).into();
        let scene = assemble_scene(&geom, config.numerics.periods_realized)?;
        let mesh = Arc::new(mesh_scene(&scene, config.numerics.element_size)?);
        let (lo, hi) = scene.gap_band();
        let plates = ParallelPlates::new(lo, hi - lo)?;
        let y = 0.5 * geom.period();
        let mut worst = 0.0f64;
        for q in [0.5 / gap, 2.0 / gap] {
            let mu = SpectralParameter::from_spectral(q, config.physics.mass)?;
            let op: GreenOperator = assemble(mesh.clone(), mu, config.numerics.basis_degree)?;
            for f in [0.3, 0.5] {
                let x = Vec2::new(lo + f * (hi - lo), y);
                worst = worst.max(worst_relative(&op.mixed_at(x)?, &plates.gren_mixed(mu, x)?));
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(dev) => Check {
            name,
            passed: dev <= IMAGE_TOLERANCE,
            detail: format!(
                "G_ren and mixed derivatives, worst relative deviation {dev:.2e} (tolerance {IMAGE_TOLERANCE:.0e})"
            ),
        },
        Err(e) => failed(name, e),
    }
}

/// Largest pairwise difference and the largest error estimate over runs
/// along different lines.
pub fn spread(runs: &[PeriodForces], dim: Dimensionality, comp: Component) -> (f64, f64) {
    let mut spread = 0.0f64;
    let mut err = 0.0f64;
    for a in runs {
        let fa = a.get(dim, comp);
        err = err.max(fa.error);
        for b in runs {
            spread = spread.max((fa.value - b.get(dim, comp).value).abs());
        }
    }
    (spread, err)
}

/// Force on lines at 40, 50 and 60 % of the gap band of the configured
/// geometry.
pub fn path_checks(config: &RunConfig) -> Vec<Check> {
    let mut cfg = config.solver();
    cfg.numerics.error_mode = ErrorMode::Full;
    let geom = &config.geometry;
    let runs = (|| -> Result<Vec<PeriodForces>> {
        let scene = assemble_scene(geom, cfg.numerics.periods_realized)?;
        let (lo, hi) = scene.gap_band();
        PATH_FRACTIONS
            .iter()
            .map(|f| {
                let path = ForcePath { x0: lo + f * (hi - lo), y0: config.path.y0, period: geom.period() };
                period_forces(geom, &cfg, Some(path))
            })
            .collect()
    })();
    let mut out = Vec::new();
    for &dim in &config.physics.dimensionality {
        for comp in Component::ALL {
            let name = format!("path independence {} {}", dim.label(), comp.label());
            match &runs {
                Ok(runs) => {
                    let (s, e) = spread(runs, dim, comp);
                    out.push(Check {
                        name,
                        passed: s <= PATH_SPREAD_FACTOR * e,
                        detail: format!(
                            "spread {} vs {PATH_SPREAD_FACTOR} x error estimate {}",
                            fmt9(s),
                            fmt9(e)
                        ),
                    });
                }
                Err(e) => out.push(failed(name, e)),
            }
        }
    }
    out
}

pub fn run_all(config: &RunConfig) -> Vec<Check> {
    let mut checks = flat_plate_checks(config);
    checks.push(image_check(config));
    checks.extend(path_checks(config));
    checks
}
