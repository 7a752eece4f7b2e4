//! Force per period: the stress integrated along a lateral line that spans
//! one period inside the gap, plus sweep drivers and error estimation.
//!
//! All four results (normal and tangential, 2D and 3D) come from one pass
//! over the spectral nodes: the dimensionalities differ only in the q
//! weight and the components only in which mixed derivatives are combined.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::bem::{BasisDegree, BemProvider};
use crate::error::{Error, Result};
use crate::geometry::{assemble_scene_centered, mesh_scene, refine, BoundaryMesh, PlateGeometry, Scene};
use crate::kernel::{MixedGreenSource, SpectralParameter};
use crate::quadrature::composite_nodes;
use crate::stress::{component_scale, integrands, integrate_spectral, weighted, Dimensionality, OperatorProvider, SpectralIntegral, SpectralQuadrature};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// x-component of the force on the upper plate; negative is attraction.
    Normal,
    /// y-component of the force on the upper plate.
    Tangential,
}

impl Component {
    pub const ALL: [Component; 2] = [Component::Normal, Component::Tangential];

    pub fn label(self) -> &'static str {
        match self {
            Component::Normal => "normal",
            Component::Tangential => "tangential",
        }
    }

    fn index(self) -> usize {
        match self {
            Component::Normal => 0,
            Component::Tangential => 1,
        }
    }
}

fn slot(dim: Dimensionality, comp: Component) -> usize {
    let d = match dim {
        Dimensionality::Two => 0,
        Dimensionality::Three => 1,
    };
    2 * d + comp.index()
}

/// The lateral line `{(x0, y0 + w) : w ∈ [0, a]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ForcePath {
    pub x0: f64,
    pub y0: f64,
    pub period: f64,
}

impl ForcePath {
    /// Middle of the transverse gap band, starting at `y0`.
    pub fn centered(scene: &Scene, y0: f64) -> Self {
        let (lo, hi) = scene.gap_band();
        Self { x0: 0.5 * (lo + hi), y0, period: scene.period() }
    }

    /// Line at fraction `f` of the gap band (0 = lower plate, 1 = upper).
    pub fn at_fraction(scene: &Scene, fraction: f64, y0: f64) -> Self {
        let (lo, hi) = scene.gap_band();
        Self { x0: lo + fraction * (hi - lo), y0, period: scene.period() }
    }

    /// Distance from the line to the nearest plate.
    pub fn clearance(&self, scene: &Scene) -> f64 {
        let (lo, hi) = scene.gap_band();
        (self.x0 - lo).min(hi - self.x0)
    }

    fn validate(&self, scene: &Scene, mesh: &BoundaryMesh) -> Result<()> {
        let (lo, hi) = scene.gap_band();
        if !(self.x0 > lo && self.x0 < hi) {
            return Err(Error::PathOutsideGap {
                x0: self.x0,
                reason: format!("the gap band is ({lo}, {hi})"),
            });
        }
        let clearance = self.clearance(scene);
        let h = mesh.max_element_length();
        if clearance < h {
            return Err(Error::PathOutsideGap {
                x0: self.x0,
                reason: format!("clearance {clearance} is below one element length {h}"),
            });
        }
        Ok(())
    }
}

/// Composite Gauss rule along the line, refined per q node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct LineQuadrature {
    pub panels: usize,
    pub points_per_panel: usize,
    /// Accept when fine and half-panel results agree to this relative level.
    pub rel_tol: f64,
    pub max_doublings: usize,
}

impl Default for LineQuadrature {
    fn default() -> Self {
        Self { panels: 8, points_per_panel: 8, rel_tol: 1e-3, max_doublings: 2 }
    }
}

impl LineQuadrature {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 2 || self.panels % 2 != 0 || self.points_per_panel == 0 || self.points_per_panel > 32 {
            return Err(Error::Config(format!(
                "line quadrature needs an even panel count >= 2 and 1..=32 points per panel (got {} x {})",
                self.panels, self.points_per_panel
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config("line rel_tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// Quadrature errors plus mesh-refinement and truncation re-runs.
    #[default]
    Full,
    /// Quadrature errors only; no re-runs.
    QuadratureOnly,
}

/// Discretisation and quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Target boundary element length.
    pub element_size: f64,
    pub basis_degree: BasisDegree,
    /// Odd number of periods realised on each plate.
    pub periods_realized: usize,
    pub spectral: SpectralQuadrature,
    pub line: LineQuadrature,
    pub error_mode: ErrorMode,
    pub refinement_factor: usize,
    /// Periods added for the truncation re-run.
    pub extra_periods: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            element_size: 0.1,
            basis_degree: BasisDegree::Quadratic,
            periods_realized: 5,
            spectral: SpectralQuadrature::default(),
            line: LineQuadrature::default(),
            error_mode: ErrorMode::Full,
            refinement_factor: 2,
            extra_periods: 2,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        if !(self.element_size > 0.0) {
            return Err(Error::Config("element_size must be > 0".into()));
        }
        if self.periods_realized < 3 || self.periods_realized % 2 == 0 {
            return Err(Error::Config(format!(
                "periods_realized must be odd and >= 3, got {}",
                self.periods_realized
            )));
        }
        if self.refinement_factor < 2 {
            return Err(Error::Config("refinement_factor must be >= 2".into()));
        }
        if self.extra_periods % 2 != 0 || self.extra_periods == 0 {
            return Err(Error::Config("extra_periods must be even and > 0".into()));
        }
        self.spectral.validate()?;
        self.line.validate()
    }
}

/// Field mass plus numerics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub mass: f64,
    pub numerics: Numerics,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { mass: 0.0, numerics: Numerics::default() }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::Config(format!("mass must be finite and >= 0, got {}", self.mass)));
        }
        self.numerics.validate()
    }
}

/// Absolute error contributions of one force value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorBreakdown {
    pub mesh: f64,
    pub line: f64,
    pub spectral: f64,
    pub truncation: f64,
    /// Condition estimate times machine epsilon, relative to the force
    /// scale of the dimensionality.
    pub roundoff: f64,
}

impl ErrorBreakdown {
    pub fn total(&self) -> f64 {
        self.mesh.max(self.line).max(self.spectral).max(self.truncation).max(self.roundoff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceValue {
    pub value: f64,
    pub error: f64,
    pub breakdown: ErrorBreakdown,
}

/// Forces per period for one geometry and path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodForces {
    pub shift: f64,
    pub path: ForcePath,
    /// Indexed by `2 · dim + component`.
    values: [ForceValue; 4],
    pub elements: usize,
    pub q_nodes: usize,
    pub q_max: f64,
}

impl PeriodForces {
    pub fn get(&self, dim: Dimensionality, comp: Component) -> ForceValue {
        self.values[slot(dim, comp)]
    }

    /// Error relative to the magnitude of the normal force of the same
    /// dimensionality.
    pub fn relative_error(&self, dim: Dimensionality, comp: Component) -> f64 {
        self.get(dim, comp).error / self.get(dim, Component::Normal).value.abs()
    }
}

/// Line rule: nodes `(w, weight)` for `panels` panels over one period.
fn line_nodes(path: &ForcePath, panels: usize, points: usize) -> Vec<(f64, f64)> {
    composite_nodes(path.y0, path.y0 + path.period, panels, points)
}

fn line_integral(
    op: &impl MixedGreenSource,
    mu: SpectralParameter,
    path: &ForcePath,
    rule: &[(f64, f64)],
) -> Result<[f64; 2]> {
    let points: Vec<Vec2> = rule.iter().map(|&(w, _)| Vec2::new(path.x0, w)).collect();
    let g = op.mixed_many(&points)?;
    let mut out = [0.0; 2];
    for (gk, &(_, wk)) in g.iter().zip(rule) {
        let (i11, i12) = integrands(gk, mu);
        out[0] += wk * i11;
        out[1] += wk * i12;
    }
    Ok(out)
}

/// Line integrals at one q node with per-node panel doubling. Returns the
/// accepted integrals, their change against the half-panel rule, and the
/// panel count used.
fn adaptive_line(
    op: &impl MixedGreenSource,
    mu: SpectralParameter,
    path: &ForcePath,
    line: &LineQuadrature,
) -> Result<([f64; 2], [f64; 2], usize)> {
    let mut coarse = line_integral(op, mu, path, &line_nodes(path, line.panels / 2, line.points_per_panel))?;
    let mut panels = line.panels;
    loop {
        let fine = line_integral(op, mu, path, &line_nodes(path, panels, line.points_per_panel))?;
        let delta = [(fine[0] - coarse[0]).abs(), (fine[1] - coarse[1]).abs()];
        let scale = fine[0].abs() + fine[1].abs();
        let doublings = (panels / line.panels).trailing_zeros() as usize;
        if delta[0].max(delta[1]) <= line.rel_tol * scale || doublings >= line.max_doublings {
            return Ok((fine, delta, panels));
        }
        coarse = fine;
        panels *= 2;
    }
}

struct Prepared {
    scene: Scene,
    mesh: BoundaryMesh,
    path: ForcePath,
}

fn prepare(geom: &PlateGeometry, numerics: &Numerics, periods: usize, path: Option<ForcePath>) -> Result<Prepared> {
    let y0 = path.map_or(0.0, |p| p.y0);
    let scene = assemble_scene_centered(geom, periods, y0 + 0.5 * geom.period())?;
    let mesh = mesh_scene(&scene, numerics.element_size)?;
    let path = path.unwrap_or_else(|| ForcePath::centered(&scene, y0));
    if (path.period - scene.period()).abs() > 1e-12 * scene.period() {
        return Err(Error::Precondition(format!(
            "path period {} differs from the geometry period {}",
            path.period,
            scene.period()
        )));
    }
    path.validate(&scene, &mesh)?;
    Ok(Prepared { scene, mesh, path })
}

/// Build the scene and mesh and validate the path without solving anything.
pub fn check_setup(geom: &PlateGeometry, numerics: &Numerics, path: Option<ForcePath>) -> Result<()> {
    numerics.validate()?;
    geom.validate()?;
    prepare(geom, numerics, numerics.periods_realized, path).map(|_| ())
}

struct BaseRun {
    integral: SpectralIntegral,
    panels: HashMap<u64, usize>,
    amplification: f64,
}

/// Base run: adaptive q-integration of the line integrals, with the line
/// panels settled on at each q node and the worst rounding amplification.
fn base_run<P: OperatorProvider>(
    provider: &P,
    path: ForcePath,
    separation: f64,
    decay: f64,
    cfg: &SolverConfig,
) -> Result<BaseRun> {
    let line = cfg.numerics.line;
    let panels_used = Mutex::new(HashMap::new());
    let amplification = Mutex::new(1.0f64);
    let eval = |qs: &[f64]| -> Result<Vec<Vec<f64>>> {
        qs.par_iter()
            .map(|&q| {
                let mu = SpectralParameter::from_spectral(q, cfg.mass)?;
                let op = provider.operator(mu)?;
                let (fine, delta, panels) = adaptive_line(&op, mu, &path, &line)?;
                panels_used.lock().unwrap().insert(q.to_bits(), panels);
                let mut amp = amplification.lock().unwrap();
                *amp = amp.max(op.rounding_amplification());
                drop(amp);
                let mut v = weighted(fine[0], fine[1], mu).to_vec();
                v.extend(weighted(delta[0], delta[1], mu).iter().map(|x| x.abs()));
                Ok(v)
            })
            .collect()
    };
    let scale = |v: &[f64]| {
        let mut s = component_scale(&v[..4]);
        s.extend([0.0; 4]);
        s
    };
    let integral = integrate_spectral(
        &cfg.numerics.spectral,
        cfg.numerics.spectral.q_max_factor / separation,
        decay,
        scale,
        eval,
    )?;
    Ok(BaseRun {
        integral,
        panels: panels_used.into_inner().unwrap(),
        amplification: amplification.into_inner().unwrap(),
    })
}

fn quadrature_breakdown(run: &BaseRun) -> [ErrorBreakdown; 4] {
    let v = &run.integral.value;
    std::array::from_fn(|k| {
        let d = k / 2;
        let scale = v[2 * d].abs() + v[2 * d + 1].abs();
        ErrorBreakdown {
            spectral: run.integral.total_error(k),
            line: v[4 + k],
            roundoff: run.amplification * f64::EPSILON * scale,
            ..Default::default()
        }
    })
}

fn assemble_values(integral: &SpectralIntegral, breakdown: [ErrorBreakdown; 4]) -> Result<[ForceValue; 4]> {
    if !integral.converged {
        let worst = (0..4).map(|k| breakdown[k].spectral).fold(0.0, f64::max);
        return Err(Error::NonConvergent { what: "spectral quadrature".into(), achieved: worst });
    }
    Ok(std::array::from_fn(|k| ForceValue {
        value: integral.value[k],
        error: breakdown[k].total(),
        breakdown: breakdown[k],
    }))
}

/// Forces across `path` for any Green-function provider, with quadrature
/// error estimates only. `separation` is the minimum plate distance and
/// `clearance` a lower bound on the distance from the path to the plates.
pub fn path_forces<P: OperatorProvider>(
    provider: &P,
    path: ForcePath,
    separation: f64,
    clearance: f64,
    cfg: &SolverConfig,
) -> Result<[ForceValue; 4]> {
    cfg.validate()?;
    let run = base_run(provider, path, separation, clearance, cfg)?;
    assemble_values(&run.integral, quadrature_breakdown(&run))
}

/// Re-evaluate the 7-point Gauss companion of a base run on a different
/// mesh, with the line panels the base run settled on.
fn replay<P: OperatorProvider>(
    provider: &P,
    path: &ForcePath,
    cfg: &SolverConfig,
    nodes: &[(f64, f64)],
    panels: &HashMap<u64, usize>,
) -> Result<[f64; 4]> {
    let line = cfg.numerics.line;
    let parts: Vec<[f64; 4]> = nodes
        .par_iter()
        .map(|&(q, wq)| {
            let mu = SpectralParameter::from_spectral(q, cfg.mass)?;
            let op = provider.operator(mu)?;
            let n = panels.get(&q.to_bits()).copied().unwrap_or(line.panels);
            let l = line_integral(&op, mu, path, &line_nodes(path, n, line.points_per_panel))?;
            Ok(weighted(l[0], l[1], mu).map(|v| wq * v))
        })
        .collect::<Result<_>>()?;
    let mut total = [0.0; 4];
    for p in parts {
        for k in 0..4 {
            total[k] += p[k];
        }
    }
    Ok(total)
}

/// All force components in both dimensionalities for one geometry.
pub fn period_forces(geom: &PlateGeometry, cfg: &SolverConfig, path: Option<ForcePath>) -> Result<PeriodForces> {
    cfg.validate()?;
    let numerics = &cfg.numerics;
    let prepared = prepare(geom, numerics, numerics.periods_realized, path)?;
    let provider = BemProvider::new(prepared.mesh.clone(), numerics.basis_degree);
    let run = base_run(
        &provider,
        prepared.path,
        prepared.scene.min_separation(),
        prepared.path.clearance(&prepared.scene),
        cfg,
    )?;

    let mut breakdown = quadrature_breakdown(&run);
    let (integral, panels) = (&run.integral, &run.panels);
    if numerics.error_mode == ErrorMode::Full && integral.converged {
        let nodes = integral.gauss_nodes();
        let fine = BemProvider::new(refine(&prepared.mesh, numerics.refinement_factor)?, numerics.basis_degree);
        let refined = replay(&fine, &prepared.path, cfg, &nodes, panels)?;
        let wider = prepare(
            geom,
            numerics,
            numerics.periods_realized + numerics.extra_periods,
            Some(prepared.path),
        )?;
        let wide = BemProvider::new(wider.mesh, numerics.basis_degree);
        let truncated = replay(&wide, &prepared.path, cfg, &nodes, panels)?;
        for k in 0..4 {
            breakdown[k].mesh = (refined[k] - integral.gauss[k]).abs();
            breakdown[k].truncation = (truncated[k] - integral.gauss[k]).abs();
        }
    }
    let values = assemble_values(integral, breakdown)?;
    Ok(PeriodForces {
        shift: prepared.scene.shift,
        path: prepared.path,
        values,
        elements: prepared.mesh.len(),
        q_nodes: integral.evaluations,
        q_max: integral.q_max,
    })
}

/// One component in one dimensionality: `(F, error_estimate)`.
pub fn force_per_period(
    geom: &PlateGeometry,
    cfg: &SolverConfig,
    dim: Dimensionality,
    comp: Component,
    path: Option<ForcePath>,
) -> Result<(f64, f64)> {
    let f = period_forces(geom, cfg, path)?.get(dim, comp);
    Ok((f.value, f.error))
}

/// `|F(refined) - F(base)| / |F(refined)|`, maximised with the truncation
/// delta from a run with more realised periods.
pub fn estimate_error(
    geom: &PlateGeometry,
    cfg: &SolverConfig,
    dim: Dimensionality,
    comp: Component,
    path: Option<ForcePath>,
    refinement_factor: usize,
) -> Result<f64> {
    let mut cfg = *cfg;
    cfg.numerics.error_mode = ErrorMode::Full;
    cfg.numerics.refinement_factor = refinement_factor;
    let f = period_forces(geom, &cfg, path)?.get(dim, comp);
    Ok(f.breakdown.mesh.max(f.breakdown.truncation) / f.value.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSpread {
    /// Max pairwise `|F_i - F_j| / max |F|`.
    pub spread: f64,
    /// Largest relative error estimate among the runs.
    pub max_relative_error: f64,
    pub forces: Vec<ForceValue>,
}

/// Spread of the force across integration lines at the given `x0` values.
pub fn x0_independence(
    geom: &PlateGeometry,
    cfg: &SolverConfig,
    dim: Dimensionality,
    comp: Component,
    x0_list: &[f64],
) -> Result<PathSpread> {
    let period = geom.period();
    let forces: Vec<ForceValue> = x0_list
        .iter()
        .map(|&x0| {
            let path = ForcePath { x0, y0: 0.0, period };
            Ok(period_forces(geom, cfg, Some(path))?.get(dim, comp))
        })
        .collect::<Result<_>>()?;
    let scale = forces.iter().map(|f| f.value.abs()).fold(0.0, f64::max);
    let mut spread = 0.0f64;
    for a in &forces {
        for b in &forces {
            spread = spread.max((a.value - b.value).abs() / scale);
        }
    }
    let max_relative_error = forces.iter().map(|f| f.error / scale).fold(0.0, f64::max);
    Ok(PathSpread { spread, max_relative_error, forces })
}

/// `n` evenly spaced shifts `k a / n`, `k = 0..n`.
pub fn shift_grid(period: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * period / n as f64).collect()
}

/// Forces at every shift; outputs keep the order of `shifts`.
pub fn sweep_shift(
    geom: &PlateGeometry,
    shifts: &[f64],
    cfg: &SolverConfig,
) -> Vec<Result<PeriodForces>> {
    shifts
        .par_iter()
        .map(|&s| period_forces(&geom.with_shift(s), cfg, None))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    PerPeriod,
    PerLength,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub force: f64,
    pub error_estimate: f64,
}

/// One component of a shift sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceCurve {
    pub v: f64,
    pub dimensionality: Dimensionality,
    pub component: Component,
    pub normalization: Normalization,
    pub samples: Vec<CurveSample>,
}

impl ForceCurve {
    pub fn from_sweep(
        v: f64,
        period: f64,
        results: &[PeriodForces],
        dim: Dimensionality,
        comp: Component,
        normalization: Normalization,
    ) -> Self {
        let div = match normalization {
            Normalization::PerPeriod => 1.0,
            Normalization::PerLength => period,
        };
        let mut samples: Vec<CurveSample> = results
            .iter()
            .map(|r| {
                let f = r.get(dim, comp);
                CurveSample { s: r.shift, force: f.value / div, error_estimate: f.error / div }
            })
            .collect();
        samples.sort_by(|a, b| a.s.total_cmp(&b.s));
        Self { v, dimensionality: dim, component: comp, normalization, samples }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.force.abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RackGeometry;

    fn quick() -> SolverConfig {
        let mut cfg = SolverConfig::default();
        cfg.numerics.element_size = 0.2;
        cfg.numerics.periods_realized = 3;
        cfg.numerics.error_mode = ErrorMode::QuadratureOnly;
        cfg.numerics.basis_degree = BasisDegree::Constant;
        cfg
    }

    #[test]
    fn path_validation() {
        let g: PlateGeometry = RackGeometry::reference(0.5).into();
        let cfg = quick();
        let bad = ForcePath { x0: 0.45, y0: 0.0, period: 2.0 };
        assert!(matches!(period_forces(&g, &cfg, Some(bad)), Err(Error::PathOutsideGap { .. })));
        let touching = ForcePath { x0: 0.55, y0: 0.0, period: 2.0 };
        assert!(matches!(period_forces(&g, &cfg, Some(touching)), Err(Error::PathOutsideGap { .. })));
        let wrong_period = ForcePath { x0: 1.0, y0: 0.0, period: 1.0 };
        assert!(period_forces(&g, &cfg, Some(wrong_period)).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = quick();
        cfg.numerics.periods_realized = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = quick();
        cfg.numerics.line.panels = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = quick();
        cfg.mass = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn line_rule_refines_and_records_panels() {
        let line = LineQuadrature::default();
        let path = ForcePath { x0: 0.5, y0: 0.0, period: 2.0 };
        let nodes = line_nodes(&path, line.panels, line.points_per_panel);
        assert_eq!(nodes.len(), 64);
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn grid_and_curve_ordering() {
        let grid = shift_grid(2.0, 4);
        assert_eq!(grid, vec![0.0, 0.5, 1.0, 1.5]);
    }

    proptest::proptest! {
        #[test]
        fn shift_grid_is_uniform_within_one_period(a in 0.1f64..10.0, n in 1usize..64) {
            let grid = shift_grid(a, n);
            proptest::prop_assert_eq!(grid.len(), n);
            proptest::prop_assert_eq!(grid[0], 0.0);
            for w in grid.windows(2) {
                proptest::prop_assert!((w[1] - w[0] - a / n as f64).abs() <= 1e-12 * a);
            }
            proptest::prop_assert!(*grid.last().unwrap() < a);
        }
    }
}
