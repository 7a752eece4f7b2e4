//! Renormalised stress components from spectral integrals of `G_ren`.
//!
//! For each spectral parameter μ the solver delivers `G_ren` and its mixed
//! derivatives; the integrands are
//!
//! ```text
//! i11 = ½ D11 - ½ D22 - ½ μ² G_ren,     i12 = ½ D12
//! ```
//!
//! and the stress is `T = -w(q) ∫ i dq` with `w = 1/π` in two dimensions and
//! `w = μ/2π` in three. The leading minus sign converts from the Green
//! function of `Δ - μ²` (which is negative definite) to the field correlator;
//! with it, flat plates attract.

use std::f64::consts::PI;

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{MixedGreen, MixedGreenSource, SpectralParameter};
use crate::quadrature::kronrod15;
use crate::vec2::Vec2;

/// Converts integrals of the `Δ - μ²` Green function to physical stress.
pub const PHYSICAL_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
pub enum Dimensionality {
    #[serde(rename = "2d", alias = "2D")]
    Two,
    #[serde(rename = "3d", alias = "3D")]
    Three,
}

impl Dimensionality {
    pub const ALL: [Dimensionality; 2] = [Dimensionality::Two, Dimensionality::Three];

    /// Spectral weight multiplying the integrand at `μ(q)`.
    pub fn weight(self, mu: f64) -> f64 {
        match self {
            Dimensionality::Two => 1.0 / PI,
            Dimensionality::Three => mu / (2.0 * PI),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dimensionality::Two => "2d",
            Dimensionality::Three => "3d",
        }
    }

    fn index(self) -> usize {
        match self {
            Dimensionality::Two => 0,
            Dimensionality::Three => 1,
        }
    }
}

/// `(i11, i12)` from a coincident mixed-derivative sample.
///
/// The shear entry is symmetrised: `¼ (D12 + D21)` equals `½ D12` for an
/// exactly symmetric `G_ren` and removes the collocation asymmetry otherwise.
pub fn integrands(g: &MixedGreen, mu: SpectralParameter) -> (f64, f64) {
    let m2 = mu.get() * mu.get();
    let i11 = 0.5 * g.d[0][0] - 0.5 * g.d[1][1] - 0.5 * m2 * g.value;
    let i12 = 0.25 * (g.d[0][1] + g.d[1][0]);
    (i11, i12)
}

pub fn t_integrand<S: MixedGreenSource + ?Sized>(
    op: &S,
    x: Vec2,
    mu: SpectralParameter,
) -> Result<(f64, f64)> {
    Ok(integrands(&op.mixed_at(x)?, mu))
}

/// Builds the Green operator for one spectral parameter.
pub trait OperatorProvider: Sync {
    type Operator: MixedGreenSource;

    fn operator(&self, mu: SpectralParameter) -> Result<Self::Operator>;

    /// Distance from `p` to the nearest plate; sets the decay rate of the
    /// integrand in q.
    fn distance_to_plates(&self, p: Vec2) -> f64;
}

/// Controls for the adaptive q-integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralQuadrature {
    /// Initial graded 15-point panels on `[0, Q_max]`.
    pub initial_panels: usize,
    /// Panel budget, bisections and range extensions included.
    pub max_panels: usize,
    /// Target relative accuracy of each integral.
    pub rel_tol: f64,
    /// Tail bound beyond `Q_max`, relative to the integral.
    pub truncation_threshold: f64,
    /// `Q_max = q_max_factor / gap`.
    pub q_max_factor: f64,
}

impl Default for SpectralQuadrature {
    fn default() -> Self {
        Self {
            initial_panels: 3,
            max_panels: 12,
            rel_tol: 1e-4,
            truncation_threshold: 1e-5,
            q_max_factor: 16.0,
        }
    }
}

impl SpectralQuadrature {
    pub fn validate(&self) -> Result<()> {
        if self.initial_panels < 2 || self.max_panels < self.initial_panels {
            return Err(Error::Config(format!(
                "q panels: need 2 <= initial_panels ({}) <= max_panels ({})",
                self.initial_panels, self.max_panels
            )));
        }
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("truncation_threshold", self.truncation_threshold),
            ("q_max_factor", self.q_max_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// One 15-point panel of a vector-valued q-integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub kronrod: Vec<f64>,
    pub gauss: Vec<f64>,
    /// Integrand at the right-most node.
    pub last: Vec<f64>,
}

impl Panel {
    fn nodes(lo: f64, hi: f64) -> [(f64, f64, Option<f64>); 15] {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        kronrod15::nodes().map(|(t, wk, wg)| (c + h * t, h * wk, wg.map(|w| h * w)))
    }

    fn build(lo: f64, hi: f64, values: &[Vec<f64>]) -> Self {
        let n = values[0].len();
        let mut kronrod = vec![0.0; n];
        let mut gauss = vec![0.0; n];
        for ((_, wk, wg), v) in Self::nodes(lo, hi).iter().zip(values) {
            for c in 0..n {
                kronrod[c] += wk * v[c];
                if let Some(w) = wg {
                    gauss[c] += w * v[c];
                }
            }
        }
        Self { lo, hi, kronrod, gauss, last: values[14].clone() }
    }

    fn error(&self, c: usize) -> f64 {
        (self.kronrod[c] - self.gauss[c]).abs()
    }

    /// Gauss nodes of this panel with their weights.
    pub fn gauss_nodes(&self) -> Vec<(f64, f64)> {
        Self::nodes(self.lo, self.hi)
            .iter()
            .filter_map(|&(q, _, wg)| wg.map(|w| (q, w)))
            .collect()
    }
}

/// Result of [`integrate_spectral`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralIntegral {
    pub value: Vec<f64>,
    /// The 7-point Gauss companion of `value` on the same panels.
    pub gauss: Vec<f64>,
    /// Sum over panels of `|Kronrod - Gauss|`.
    pub error: Vec<f64>,
    /// Exponential bound on the integral beyond `q_max`.
    pub tail: Vec<f64>,
    pub q_max: f64,
    pub panels: Vec<Panel>,
    pub converged: bool,
    pub evaluations: usize,
}

impl SpectralIntegral {
    /// Gauss nodes of all panels, for replaying the integral with a
    /// perturbed integrand.
    pub fn gauss_nodes(&self) -> Vec<(f64, f64)> {
        self.panels.iter().flat_map(Panel::gauss_nodes).collect()
    }

    /// Quadrature plus tail error of component `c`.
    pub fn total_error(&self, c: usize) -> f64 {
        self.error[c] + self.tail[c]
    }
}

/// Adaptive Gauss-Kronrod integration of a vector-valued function over
/// `[0, ∞)`, truncated at `q_max` (extended while the tail bound is too
/// large).
///
/// `f` receives a batch of nodes and returns one vector per node. `scale`
/// maps the running totals to per-component reference magnitudes used for
/// the relative tolerances; a zero scale disables the check for that
/// component. `decay` is the rate `d` in the bound `|f(q)| ≲ e^{-2 d q}`.
pub fn integrate_spectral<F, S>(
    cfg: &SpectralQuadrature,
    q_max: f64,
    decay: f64,
    scale: S,
    f: F,
) -> Result<SpectralIntegral>
where
    F: Fn(&[f64]) -> Result<Vec<Vec<f64>>>,
    S: Fn(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    if !(q_max > 0.0 && decay > 0.0) {
        return Err(Error::Precondition(format!(
            "q_max ({q_max}) and decay ({decay}) must be > 0"
        )));
    }
    let mut evaluations = 0usize;
    let mut eval_panels = |bounds: &[(f64, f64)]| -> Result<Vec<Panel>> {
        let nodes: Vec<f64> = bounds
            .iter()
            .flat_map(|&(lo, hi)| Panel::nodes(lo, hi).map(|n| n.0))
            .collect();
        let values = f(&nodes)?;
        evaluations += nodes.len();
        Ok(bounds
            .iter()
            .enumerate()
            .map(|(k, &(lo, hi))| Panel::build(lo, hi, &values[15 * k..15 * (k + 1)]))
            .collect())
    };

    let n0 = cfg.initial_panels;
    let mut edges = vec![0.0];
    edges.extend((1..=n0).map(|k| q_max * 4f64.powi(k as i32 - n0 as i32)));
    let bounds: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let mut panels = eval_panels(&bounds)?;
    let mut q_max = q_max;

    loop {
        let ncomp = panels[0].kronrod.len();
        let sum = |g: &dyn Fn(&Panel) -> f64| panels.iter().map(g).sum::<f64>();
        let value: Vec<f64> = (0..ncomp).map(|c| sum(&|p| p.kronrod[c])).collect();
        let gauss: Vec<f64> = (0..ncomp).map(|c| sum(&|p| p.gauss[c])).collect();
        let error: Vec<f64> = (0..ncomp).map(|c| sum(&|p| p.error(c))).collect();
        let last_panel = panels.iter().max_by(|a, b| a.hi.total_cmp(&b.hi)).unwrap();
        let q_last = Panel::nodes(last_panel.lo, last_panel.hi)[14].0;
        let damp = (-2.0 * decay * (q_max - q_last)).exp() / (2.0 * decay);
        let tail: Vec<f64> = last_panel.last.iter().map(|v| v.abs() * damp).collect();
        let sc = scale(&value);

        let checked = |c: &usize| sc[*c] > 0.0;
        let err_ok = (0..ncomp).filter(checked).all(|c| error[c] <= cfg.rel_tol * sc[c]);
        let tail_ok = (0..ncomp).filter(checked).all(|c| tail[c] <= cfg.truncation_threshold * sc[c]);
        let room = cfg.max_panels.saturating_sub(panels.len());
        if (err_ok && tail_ok) || room == 0 {
            return Ok(SpectralIntegral {
                value,
                gauss,
                error,
                tail,
                q_max,
                panels,
                converged: err_ok && tail_ok,
                evaluations,
            });
        }
        if !tail_ok {
            let new = eval_panels(&[(q_max, 2.0 * q_max)])?;
            panels.extend(new);
            q_max *= 2.0;
            continue;
        }
        // Bisect the panels carrying more than their share of the error.
        let share = |p: &Panel| {
            (0..ncomp)
                .map(|c| {
                    let tol = cfg.rel_tol * sc[c];
                    if tol > 0.0 {
                        p.error(c) / tol
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max)
        };
        let mut ranked: Vec<(usize, f64)> = panels.iter().map(share).enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let fair = 1.0 / panels.len() as f64;
        let mut split: Vec<usize> = ranked
            .iter()
            .take_while(|(_, e)| *e > fair)
            .map(|(i, _)| *i)
            .take(room)
            .collect();
        if split.is_empty() {
            split.push(ranked[0].0);
        }
        split.sort_unstable();
        let mut bounds = Vec::with_capacity(2 * split.len());
        for &i in &split {
            let p = &panels[i];
            let mid = 0.5 * (p.lo + p.hi);
            bounds.push((p.lo, mid));
            bounds.push((mid, p.hi));
        }
        let new = eval_panels(&bounds)?;
        for &i in split.iter().rev() {
            panels.remove(i);
        }
        panels.extend(new);
        panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    }
}

/// Physics and q-quadrature settings for point stress evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressConfig {
    pub dimensionality: Dimensionality,
    pub mass: f64,
    pub quadrature: SpectralQuadrature,
}

impl StressConfig {
    pub fn new(dimensionality: Dimensionality, mass: f64) -> Self {
        Self { dimensionality, mass, quadrature: SpectralQuadrature::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::Config(format!("mass must be finite and >= 0, got {}", self.mass)));
        }
        self.quadrature.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressSample {
    pub point: Vec2,
    pub t11: f64,
    pub t12: f64,
    pub quadrature_error_estimate: f64,
}

/// Weighted, signed integrand vector `[T11_2d, T12_2d, T11_3d, T12_3d]`
/// density at one q node from the raw integrands.
pub fn weighted(i11: f64, i12: f64, mu: SpectralParameter) -> [f64; 4] {
    let mut out = [0.0; 4];
    for dim in Dimensionality::ALL {
        let w = PHYSICAL_SIGN * dim.weight(mu.get());
        out[2 * dim.index()] = w * i11;
        out[2 * dim.index() + 1] = w * i12;
    }
    out
}

/// Per-dimension reference magnitude `|T11| + |T12|` for a vector laid out
/// as in [`weighted`].
pub(crate) fn component_scale(v: &[f64]) -> Vec<f64> {
    let s2 = v[0].abs() + v[1].abs();
    let s3 = v[2].abs() + v[3].abs();
    vec![s2, s2, s3, s3]
}

/// Both stress components in both dimensionalities at one point.
pub fn stress_components<P: OperatorProvider>(
    provider: &P,
    x: Vec2,
    mass: f64,
    quad: &SpectralQuadrature,
    gap: f64,
) -> Result<SpectralIntegral> {
    let decay = provider.distance_to_plates(x);
    if !(decay > 0.0) {
        return Err(Error::Precondition(format!("point ({}, {}) is not inside the gap", x.x, x.y)));
    }
    let eval = |qs: &[f64]| -> Result<Vec<Vec<f64>>> {
        qs.par_iter()
            .map(|&q| {
                let mu = SpectralParameter::from_spectral(q, mass)?;
                let (i11, i12) = t_integrand(&provider.operator(mu)?, x, mu)?;
                Ok(weighted(i11, i12, mu).to_vec())
            })
            .collect()
    };
    integrate_spectral(quad, quad.q_max_factor / gap, decay, component_scale, eval)
}

/// `T11` and `T12` at `x` for the configured dimensionality.
///
/// `gap` sets the q-range `Q_max = q_max_factor / gap`; use the minimum
/// plate separation.
pub fn stress_at<P: OperatorProvider>(
    provider: &P,
    x: Vec2,
    cfg: &StressConfig,
    gap: f64,
) -> Result<StressSample> {
    cfg.validate()?;
    let r = stress_components(provider, x, cfg.mass, &cfg.quadrature, gap)?;
    let k = 2 * cfg.dimensionality.index();
    let err = r.total_error(k).max(r.total_error(k + 1));
    if !r.converged {
        return Err(Error::NonConvergent { what: "spectral quadrature".into(), achieved: err });
    }
    Ok(StressSample { point: x, t11: r.value[k], t12: r.value[k + 1], quadrature_error_estimate: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ParallelPlates;
    use crate::quadrature::composite_nodes;

    #[test]
    fn weights_reproduce_exponential_integrals() {
        let cfg = SpectralQuadrature { rel_tol: 1e-13, truncation_threshold: 1e-13, max_panels: 64, ..Default::default() };
        for &m in &[0.0, 0.7] {
            let r = integrate_spectral(
                &cfg,
                16.0,
                0.5,
                |v| v.iter().map(|x| x.abs()).collect(),
                |qs| {
                    Ok(qs
                        .iter()
                        .map(|&q| {
                            let mu = q.hypot(m);
                            vec![
                                Dimensionality::Two.weight(mu) * (-q).exp(),
                                Dimensionality::Three.weight(mu) * (-q).exp(),
                            ]
                        })
                        .collect())
                },
            )
            .unwrap();
            assert!(r.converged);
            assert!((r.value[0] - 1.0 / PI).abs() < 1e-10);
            // Brute force for the 3D weight.
            let brute: f64 = composite_nodes(0.0, 80.0, 400, 16)
                .iter()
                .map(|&(q, w)| w * q.hypot(m) * (-q).exp() / (2.0 * PI))
                .sum();
            assert!((r.value[1] - brute).abs() < 1e-10, "{} vs {brute}", r.value[1]);
        }
    }

    #[test]
    fn tail_extension_and_budget() {
        let cfg = SpectralQuadrature { truncation_threshold: 1e-12, max_panels: 40, ..Default::default() };
        // Slow decay relative to the initial range forces extensions.
        let r = integrate_spectral(&cfg, 2.0, 0.5, |v| v.to_vec(), |qs| {
            Ok(qs.iter().map(|&q| vec![(-q).exp()]).collect())
        })
        .unwrap();
        assert!(r.q_max > 2.0 && r.converged);
        assert!((r.value[0] - 1.0).abs() < 1e-10);

        let tight = SpectralQuadrature { max_panels: 3, rel_tol: 1e-15, ..Default::default() };
        let r = integrate_spectral(&tight, 16.0, 0.5, |v| v.to_vec(), |qs| {
            Ok(qs.iter().map(|&q| vec![q.sqrt() * (-q).exp()]).collect())
        })
        .unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn flat_mid_gap_shear_vanishes_and_mass_suppresses() {
        let plates = ParallelPlates::new(0.0, 1.0).unwrap();
        let x = Vec2::new(0.5, 0.3);
        let m0 = stress_at(&plates, x, &StressConfig::new(Dimensionality::Two, 0.0), 1.0).unwrap();
        assert!(m0.t12.abs() <= 1e-6 * m0.t11.abs());
        assert!(m0.t11 < 0.0);
        let m1 = stress_at(&plates, x, &StressConfig::new(Dimensionality::Two, 1.0), 1.0).unwrap();
        assert!(m1.t11.abs() < m0.t11.abs());
    }

    #[test]
    fn flat_stress_matches_closed_form_through_image_series() {
        let plates = ParallelPlates::new(0.0, 1.0).unwrap();
        for dim in Dimensionality::ALL {
            let s = stress_at(&plates, Vec2::new(0.37, 0.0), &StressConfig::new(dim, 0.0), 1.0).unwrap();
            let want = crate::oracle::flat_plate_force(dim, 1.0, 0.0).unwrap();
            assert!(((s.t11 - want) / want).abs() < 1e-3, "{dim:?}: {} vs {want}", s.t11);
        }
    }

    #[test]
    fn integrand_decays_by_q_twelve() {
        let plates = ParallelPlates::new(0.0, 1.0).unwrap();
        let mu = SpectralParameter::new(12.0).unwrap();
        let op = plates.operator(mu).unwrap();
        let (i11, i12) = t_integrand(&op, Vec2::new(0.5, 0.0), mu).unwrap();
        assert!(i11.abs() < 1e-8 && i12.abs() < 1e-8, "{i11}");
    }

    #[test]
    fn three_d_differs_only_by_weight() {
        let plates = ParallelPlates::new(0.0, 1.0).unwrap();
        let x = Vec2::new(0.5, 0.0);
        let r = stress_components(&plates, x, 0.0, &SpectralQuadrature::default(), 1.0).unwrap();
        // Re-weight the 2D integrand node by node on the same panels.
        let mut three = 0.0;
        for p in &r.panels {
            for (q, w, _) in Panel::nodes(p.lo, p.hi) {
                let mu = SpectralParameter::new(q).unwrap();
                let (i11, _) = t_integrand(&plates.operator(mu).unwrap(), x, mu).unwrap();
                three += w * PHYSICAL_SIGN * Dimensionality::Three.weight(q) * i11;
            }
        }
        assert!((three - r.value[2]).abs() <= 1e-13 * three.abs());
    }
}
