use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::force::{check_setup, shift_grid, Component, ForcePath, Numerics, SolverConfig};
use crate::geometry::{canonical_shift, ExplicitProfile, PlateGeometry, RackGeometry};
use crate::stress::Dimensionality;

/// One JSON document describing a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Rack parameters (`a, u, v, s, l, H, tilt_rule`) or an explicit
    /// profile (`vertices, period, gap, shift`).
    #[serde(deserialize_with = "geometry_block")]
    pub geometry: PlateGeometry,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub path: PathSpec,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: RackGeometry::reference(0.5).into(),
            physics: Physics::default(),
            numerics: Numerics::default(),
            path: PathSpec::default(),
            sweep: None,
            output: Output::default(),
        }
    }
}

/// Pick the geometry variant by its keys so that errors name the right
/// fields instead of "no variant matched".
fn geometry_block<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<PlateGeometry, D::Error> {
    let value = serde_json::Value::deserialize(d)?;
    let explicit = value.get("vertices").is_some();
    let parsed = if explicit {
        serde_json::from_value::<ExplicitProfile>(value).map(PlateGeometry::Explicit)
    } else {
        serde_json::from_value::<RackGeometry>(value).map(PlateGeometry::Rack)
    };
    parsed.map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    /// Dimensionalities to report.
    pub dimensionality: Vec<Dimensionality>,
    /// Field mass `m`; `μ = sqrt(q² + m²)`.
    pub mass: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self { dimensionality: Dimensionality::ALL.to_vec(), mass: 0.0 }
    }
}

/// Integration line; `x0` defaults to the middle of the gap band.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct PathSpec {
    pub x0: Option<f64>,
    pub y0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum ShiftGrid {
    /// `count` evenly spaced shifts `k a / count`.
    Count { count: usize },
    /// Explicit shifts, strictly increasing within `[0, a)`.
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub s_grid: ShiftGrid,
    /// Valley lengths to sweep; rack geometry only. Defaults to the
    /// geometry's own `v`.
    #[serde(default)]
    pub v_list: Option<Vec<f64>>,
    #[serde(default = "all_components")]
    pub components: Vec<Component>,
}

fn all_components() -> Vec<Component> {
    Component::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    /// Directory for CSV and SVG files; `--out` overrides it.
    pub dir: PathBuf,
    /// Write one SVG chart next to each CSV.
    pub svg: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), svg: true }
    }
}

/// One geometry of a sweep, with the `v` it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub v: Option<f64>,
    pub geometry: PlateGeometry,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { mass: self.physics.mass, numerics: self.numerics }
    }

    pub fn force_path(&self) -> Option<ForcePath> {
        self.path.x0.map(|x0| ForcePath { x0, y0: self.path.y0, period: self.geometry.period() })
    }

    pub fn shifts(&self) -> Result<Vec<f64>> {
        let a = self.geometry.period();
        let Some(sweep) = &self.sweep else {
            return Ok(vec![canonical_shift(self.geometry.shift(), a)]);
        };
        match &sweep.s_grid {
            ShiftGrid::Count { count } => {
                if *count == 0 {
                    return Err(Error::Config("s_grid count must be >= 1".into()));
                }
                Ok(shift_grid(a, *count))
            }
            ShiftGrid::Values { values } => {
                if values.is_empty() {
                    return Err(Error::Config("s_grid values must not be empty".into()));
                }
                for w in values.windows(2) {
                    if !(w[1] > w[0]) {
                        return Err(Error::Config("s_grid values must be strictly increasing".into()));
                    }
                }
                if values.iter().any(|&s| !(0.0..a).contains(&s)) {
                    return Err(Error::Config(format!("s_grid values must lie in [0, {a})")));
                }
                Ok(values.clone())
            }
        }
    }

    /// Geometries of the sweep in output order.
    pub fn members(&self) -> Result<Vec<Member>> {
        let list = self.sweep.as_ref().and_then(|s| s.v_list.clone());
        match (&self.geometry, list) {
            (PlateGeometry::Rack(g), Some(vs)) => {
                if vs.is_empty() {
                    return Err(Error::Config("v_list must not be empty".into()));
                }
                Ok(vs.iter().map(|&v| Member { v: Some(v), geometry: g.with_valley(v).into() }).collect())
            }
            (PlateGeometry::Rack(g), None) => Ok(vec![Member { v: Some(g.valley_length), geometry: (*g).into() }]),
            (PlateGeometry::Explicit(_), Some(_)) => {
                Err(Error::Config("v_list applies to rack geometry only".into()))
            }
            (PlateGeometry::Explicit(_), None) => Ok(vec![Member { v: None, geometry: self.geometry.clone() }]),
        }
    }

    pub fn components(&self) -> Vec<Component> {
        self.sweep.as_ref().map_or_else(all_components, |s| s.components.clone())
    }

    /// Every precondition a run would hit, checked up front without solving.
    pub fn validate(&self) -> Result<()> {
        self.solver().validate()?;
        if self.physics.dimensionality.is_empty() {
            return Err(Error::Config("physics.dimensionality must not be empty".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.components.is_empty() {
                return Err(Error::Config("sweep.components must not be empty".into()));
            }
        }
        if let Some(x0) = self.path.x0 {
            if !x0.is_finite() {
                return Err(Error::Config("path.x0 must be finite".into()));
            }
        }
        let shifts = self.shifts()?;
        for member in self.members()? {
            for &s in &shifts {
                check_setup(&member.geometry.with_shift(s), &self.numerics, self.force_path())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_rack_config_uses_defaults() {
        let c = RunConfig::from_json(r#"{"geometry": {"a": 2, "u": 0.5, "v": 0.4, "l": 1}}"#).unwrap();
        let PlateGeometry::Rack(g) = &c.geometry else { panic!() };
        assert_eq!(g.tooth_height, 0.5);
        assert_eq!(c.physics.dimensionality.len(), 2);
        assert_eq!(c.numerics, Numerics::default());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::from_json(r#"{"geometry": {"a": 2, "u": 0.5, "v": 0.4, "l": 1, "w": 3}}"#).unwrap_err();
        assert!(e.to_string().contains('w'), "{e}");
        assert!(RunConfig::from_json(r#"{"geometry": {"a": 2, "u": 0.5, "v": 0.4, "l": 1}, "extra": 1}"#).is_err());
        assert!(RunConfig::from_json(
            r#"{"geometry": {"a": 2, "u": 0.5, "v": 0.4, "l": 1}, "numerics": {"element_sise": 0.1}}"#
        )
        .is_err());
    }

    #[test]
    fn explicit_geometry_and_v_list_conflict() {
        let text = r#"{
            "geometry": {"vertices": [[0, 0], [0.3, 0.5], [0.3, 1.0], [0, 1.5], [0, 2]], "period": 2, "gap": 1},
            "sweep": {"s_grid": {"count": 4}, "v_list": [0.5]}
        }"#;
        let c = RunConfig::from_json(text).unwrap();
        assert!(matches!(c.geometry, PlateGeometry::Explicit(_)));
        assert!(c.members().is_err());
    }

    #[test]
    fn shift_grids() {
        let mut c = RunConfig::default();
        c.sweep = Some(Sweep { s_grid: ShiftGrid::Count { count: 4 }, v_list: None, components: all_components() });
        assert_eq!(c.shifts().unwrap(), vec![0.0, 0.5, 1.0, 1.5]);
        c.sweep.as_mut().unwrap().s_grid = ShiftGrid::Values { values: vec![0.0, 2.0] };
        assert!(c.shifts().is_err());
        c.sweep.as_mut().unwrap().s_grid = ShiftGrid::Values { values: vec![0.5, 0.25] };
        assert!(c.shifts().is_err());
    }

    #[test]
    fn preflight_catches_geometry_and_mesh_errors() {
        let zero_gap = RunConfig::from_json(r#"{"geometry": {"a": 2, "u": 0.5, "v": 0.4, "l": 0}}"#).unwrap();
        assert!(matches!(zero_gap.validate(), Err(Error::Geometry(_))));
        let coarse = RunConfig::from_json(
            r#"{"geometry": {"a": 2, "u": 0.5, "v": 0.4, "l": 1}, "numerics": {"element_size": 0.6}}"#,
        )
        .unwrap();
        let e = coarse.validate().unwrap_err();
        assert!(e.to_string().contains("shortest profile edge"), "{e}");
    }
}
