//! Rack-gear plate profiles, two-plate scenes and boundary meshes.
//!
//! Coordinates follow [`Vec2`]: `x` is transverse (the plates are stacked
//! along `x`), `y` is the lateral direction of periodicity. The lower plate
//! occupies `x` below its profile, the upper plate `x` above its profile.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec2::{segment_distance, Vec2};

/// Maps the edge lengths (u, v) to the common tilt angle of the face and
/// valley edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum TiltRule {
    /// sin θ = (u - v) / u
    #[default]
    SineRatio,
    /// tan θ = (u - v) / u
    TangentRatio,
    /// θ = 0 regardless of v
    Level,
}

impl TiltRule {
    pub fn angle(self, face: f64, valley: f64) -> Result<f64> {
        let ratio = (face - valley) / face;
        match self {
            TiltRule::SineRatio => {
                if ratio.abs() >= 1.0 {
                    return Err(Error::Geometry(format!(
                        "sine tilt rule needs |u - v| < u (u = {face}, v = {valley})"
                    )));
                }
                Ok(ratio.asin())
            }
            TiltRule::TangentRatio => Ok(ratio.atan()),
            TiltRule::Level => Ok(0.0),
        }
    }
}

/// Parameters of the rack-gear family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RackGeometry {
    /// Profile period `a`.
    #[serde(alias = "a")]
    pub period: f64,
    /// Length `u` of the face edge (tooth top).
    #[serde(alias = "u")]
    pub face_length: f64,
    /// Length `v` of the valley edge; `v < u` tilts face and valley.
    #[serde(alias = "v")]
    pub valley_length: f64,
    /// Lateral shift `s` of the upper plate.
    #[serde(alias = "s", default)]
    pub shift: f64,
    /// Perpendicular distance `l` between the facing face edges at zero shift.
    #[serde(alias = "l")]
    pub gap: f64,
    /// Tooth height `H`: vertical offset between face and valley centres.
    #[serde(alias = "H", default = "default_tooth_height")]
    pub tooth_height: f64,
    #[serde(default)]
    pub tilt_rule: TiltRule,
}

fn default_tooth_height() -> f64 {
    0.5
}

impl RackGeometry {
    /// a = 2, u = 0.5, l = 1, H = 0.5 with the given valley length, s = 0.
    pub fn reference(valley_length: f64) -> Self {
        Self {
            period: 2.0,
            face_length: 0.5,
            valley_length,
            shift: 0.0,
            gap: 1.0,
            tooth_height: 0.5,
            tilt_rule: TiltRule::SineRatio,
        }
    }

    /// Two flat parallel plates at distance `gap` (H = 0, u = v).
    pub fn flat(gap: f64) -> Self {
        Self {
            period: 2.0,
            face_length: 0.5,
            valley_length: 0.5,
            shift: 0.0,
            gap,
            tooth_height: 0.0,
            tilt_rule: TiltRule::SineRatio,
        }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_valley(mut self, valley_length: f64) -> Self {
        self.valley_length = valley_length;
        self
    }

    pub fn canonical_shift(&self) -> f64 {
        canonical_shift(self.shift, self.period)
    }

    pub fn tilt_angle(&self) -> Result<f64> {
        self.tilt_rule.angle(self.face_length, self.valley_length)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("period a", self.period),
            ("face length u", self.face_length),
            ("valley length v", self.valley_length),
            ("gap l", self.gap),
        ];
        for (name, value) in named {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Geometry(format!("{name} must be finite and > 0, got {value}")));
            }
        }
        if !(self.tooth_height >= 0.0 && self.tooth_height.is_finite()) {
            return Err(Error::Geometry(format!(
                "tooth height H must be >= 0, got {}",
                self.tooth_height
            )));
        }
        if !self.shift.is_finite() {
            return Err(Error::Geometry("shift s must be finite".into()));
        }
        if self.face_length + self.valley_length >= self.period {
            return Err(Error::Geometry(format!(
                "flank closure impossible: u + v = {} >= a = {}",
                self.face_length + self.valley_length,
                self.period
            )));
        }
        self.tilt_angle()?;
        Ok(())
    }
}

pub fn canonical_shift(shift: f64, period: f64) -> f64 {
    let s = shift.rem_euclid(period);
    if s >= period {
        0.0
    } else {
        s
    }
}

/// One period of a piecewise-linear plate surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    /// `n + 1` vertices; the last equals the first shifted by `(0, period)`.
    pub vertices: Vec<Vec2>,
    pub period: f64,
}

impl Profile {
    pub fn new(vertices: Vec<Vec2>, period: f64) -> Result<Self> {
        let p = Self { vertices, period };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.vertices;
        if v.len() < 3 {
            return Err(Error::Geometry("a profile needs at least two edges".into()));
        }
        if !(self.period > 0.0) {
            return Err(Error::Geometry("profile period must be > 0".into()));
        }
        let first = v[0];
        let last = v[v.len() - 1];
        let closure = last - first;
        let tol = 1e-12 * self.period.max(1.0);
        if closure.x.abs() > tol || (closure.y - self.period).abs() > tol {
            return Err(Error::Geometry(format!(
                "profile does not close periodically: last - first = ({}, {})",
                closure.x, closure.y
            )));
        }
        for (i, w) in v.windows(2).enumerate() {
            if (w[1] - w[0]).norm() <= tol {
                return Err(Error::Geometry(format!("vertices {i} and {} coincide", i + 1)));
            }
            if w[1].y < w[0].y - tol {
                return Err(Error::Geometry(format!(
                    "edge {i} runs backwards in y; profiles must not overhang"
                )));
            }
        }
        // Simplicity of the periodic extension: compare edges of this period
        // with all non-adjacent edges of this and the neighbouring periods.
        let edges = self.edges();
        let n = edges.len();
        for i in 0..n {
            for k in -1i32..=1 {
                let off = Vec2::new(0.0, k as f64 * self.period);
                for j in 0..n {
                    let gi = i as i64;
                    let gj = j as i64 + k as i64 * n as i64;
                    if (gi - gj).abs() <= 1 {
                        continue;
                    }
                    let (a0, a1) = edges[i];
                    let (b0, b1) = edges[j];
                    if segment_distance(a0, a1, b0 + off, b1 + off) <= tol {
                        return Err(Error::Geometry(format!("profile edges {i} and {j} intersect")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn edges(&self) -> Vec<(Vec2, Vec2)> {
        self.vertices.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).collect()
    }

    pub fn shortest_edge(&self) -> f64 {
        self.edge_lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn arc_length(&self) -> f64 {
        self.edge_lengths().iter().sum()
    }

    pub fn max_x(&self) -> f64 {
        self.vertices.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_x(&self) -> f64 {
        self.vertices.iter().map(|p| p.x).fold(f64::INFINITY, f64::min)
    }

    /// Point reflection through `center`.
    pub fn point_reflected(&self, center: Vec2) -> Profile {
        let mut vertices: Vec<Vec2> = self.vertices.iter().map(|&p| center * 2.0 - p).collect();
        vertices.reverse();
        Profile { vertices, period: self.period }
    }

    pub fn translated(&self, by: Vec2) -> Profile {
        Profile {
            vertices: self.vertices.iter().map(|&p| p + by).collect(),
            period: self.period,
        }
    }

    /// Mirror image `y -> 2 y_axis - y`, re-ordered by increasing `y`.
    pub fn mirrored(&self, y_axis: f64) -> Profile {
        let mut vertices: Vec<Vec2> =
            self.vertices.iter().map(|&p| Vec2::new(p.x, 2.0 * y_axis - p.y)).collect();
        vertices.reverse();
        Profile { vertices, period: self.period }
    }
}

/// The four-edge rack profile: face, descending flank, valley, ascending flank.
///
/// The face centre sits at `(H, 0)`, the valley centre at height 0, both
/// edges tilted by the same θ; the flanks share the remaining lateral run.
pub fn build_rack_profile(geom: &RackGeometry) -> Result<Profile> {
    geom.validate()?;
    let theta = geom.tilt_angle()?;
    let (sin, cos) = theta.sin_cos();
    let u = geom.face_length;
    let v = geom.valley_length;
    let run = 0.5 * (geom.period - (u + v) * cos);
    if run <= 0.0 {
        return Err(Error::Geometry(format!(
            "flanks would need a non-positive lateral run ({run}); u + v too long for a = {}",
            geom.period
        )));
    }
    let h = geom.tooth_height;
    let f0 = Vec2::new(h - 0.5 * u * sin, -0.5 * u * cos);
    let f1 = Vec2::new(h + 0.5 * u * sin, 0.5 * u * cos);
    let v0 = Vec2::new(-0.5 * v * sin, f1.y + run);
    let v1 = Vec2::new(0.5 * v * sin, v0.y + v * cos);
    let end = f0 + Vec2::new(0.0, geom.period);
    Profile::new(vec![f0, f1, v0, v1, end], geom.period)
}

/// A profile given vertex by vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExplicitProfile {
    /// `[x, y]` pairs for one period, closing with `first + [0, period]`.
    pub vertices: Vec<[f64; 2]>,
    pub period: f64,
    /// Clearance between the lower plate's highest and the upper plate's
    /// lowest point.
    pub gap: f64,
    #[serde(default)]
    pub shift: f64,
}

/// Either a member of the rack family or an explicit vertex list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum PlateGeometry {
    Rack(RackGeometry),
    Explicit(ExplicitProfile),
}

impl From<RackGeometry> for PlateGeometry {
    fn from(g: RackGeometry) -> Self {
        PlateGeometry::Rack(g)
    }
}

impl PlateGeometry {
    pub fn period(&self) -> f64 {
        match self {
            PlateGeometry::Rack(g) => g.period,
            PlateGeometry::Explicit(e) => e.period,
        }
    }

    pub fn shift(&self) -> f64 {
        match self {
            PlateGeometry::Rack(g) => g.shift,
            PlateGeometry::Explicit(e) => e.shift,
        }
    }

    pub fn with_shift(&self, shift: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            PlateGeometry::Rack(g) => g.shift = shift,
            PlateGeometry::Explicit(e) => e.shift = shift,
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.lower_profile().map(|_| ())
    }

    pub fn lower_profile(&self) -> Result<Profile> {
        match self {
            PlateGeometry::Rack(g) => build_rack_profile(g),
            PlateGeometry::Explicit(e) => {
                if !(e.gap > 0.0) {
                    return Err(Error::Geometry(format!("gap must be > 0, got {}", e.gap)));
                }
                Profile::new(e.vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect(), e.period)
            }
        }
    }

    /// Centre of the point reflection that maps the lower profile onto the
    /// upper one at zero shift.
    pub fn reflection_center(&self) -> Result<Vec2> {
        match self {
            PlateGeometry::Rack(g) => {
                let theta = g.tilt_angle()?;
                Ok(Vec2::new(g.tooth_height + 0.5 * g.gap / theta.cos(), 0.0))
            }
            PlateGeometry::Explicit(e) => {
                let p = self.lower_profile()?;
                Ok(Vec2::new(p.max_x() + 0.5 * e.gap, 0.0))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plate {
    Lower,
    Upper,
}

/// The two plates realised over a finite lateral window.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub lower: Profile,
    /// Upper profile: point reflection of `lower`, shifted by `shift`.
    pub upper: Profile,
    pub shift: f64,
    pub periods_realized: usize,
    /// Lateral window `[lo, hi]` both plates are clipped to.
    pub window: (f64, f64),
    /// Realised polylines, each ordered by increasing `y`.
    pub lower_curve: Vec<Vec2>,
    pub upper_curve: Vec<Vec2>,
}

pub fn assemble_scene(geom: &PlateGeometry, periods_realized: usize) -> Result<Scene> {
    assemble_scene_centered(geom, periods_realized, 0.5 * geom.period())
}

/// Scene whose lateral window of `periods_realized` periods is centred on
/// `center_y`.
pub fn assemble_scene_centered(
    geom: &PlateGeometry,
    periods_realized: usize,
    center_y: f64,
) -> Result<Scene> {
    if periods_realized < 3 || periods_realized % 2 == 0 {
        return Err(Error::Precondition(format!(
            "periods_realized must be odd and >= 3, got {periods_realized}"
        )));
    }
    let lower = geom.lower_profile()?;
    let period = lower.period;
    let shift = canonical_shift(geom.shift(), period);
    let center = geom.reflection_center()?;
    let upper = lower.point_reflected(center).translated(Vec2::new(0.0, shift));
    let half = 0.5 * periods_realized as f64 * period;
    let window = (center_y - half, center_y + half);
    let lower_curve = realize(&lower, window);
    let upper_curve = realize(&upper, window);
    let scene = Scene {
        lower,
        upper,
        shift,
        periods_realized,
        window,
        lower_curve,
        upper_curve,
    };
    let separation = scene.min_separation();
    if separation <= 0.0 {
        return Err(Error::PlateIntersection { shift, separation });
    }
    Ok(scene)
}

/// Periodic extension of `profile` clipped to the lateral `window`.
fn realize(profile: &Profile, window: (f64, f64)) -> Vec<Vec2> {
    let period = profile.period;
    let base = &profile.vertices[..profile.vertices.len() - 1];
    let y0 = profile.vertices[0].y;
    let k_lo = ((window.0 - y0) / period).floor() as i64 - 1;
    let k_hi = ((window.1 - y0) / period).ceil() as i64 + 1;
    let mut unbounded = Vec::new();
    for k in k_lo..=k_hi {
        let off = Vec2::new(0.0, k as f64 * period);
        unbounded.extend(base.iter().map(|&p| p + off));
    }
    unbounded.push(profile.vertices[profile.vertices.len() - 1] + Vec2::new(0.0, k_hi as f64 * period));

    let mut out: Vec<Vec2> = Vec::new();
    for w in unbounded.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q.y <= window.0 || p.y >= window.1 {
            continue;
        }
        let clip = |t: f64| p + (q - p) * t;
        let start = if p.y < window.0 { clip((window.0 - p.y) / (q.y - p.y)) } else { p };
        let end = if q.y > window.1 { clip((window.1 - p.y) / (q.y - p.y)) } else { q };
        if out.last().map_or(true, |&l: &Vec2| (l - start).norm() > 0.0) {
            out.push(start);
        }
        out.push(end);
    }
    out
}

impl Scene {
    pub fn curve(&self, plate: Plate) -> &[Vec2] {
        match plate {
            Plate::Lower => &self.lower_curve,
            Plate::Upper => &self.upper_curve,
        }
    }

    pub fn period(&self) -> f64 {
        self.lower.period
    }

    /// Minimum distance between the two realised plates.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in self.lower_curve.windows(2) {
            for b in self.upper_curve.windows(2) {
                best = best.min(segment_distance(a[0], a[1], b[0], b[1]));
            }
        }
        best
    }

    /// Transverse band `(lower max x, upper min x)` in which straight
    /// lateral integration lines fit.
    pub fn gap_band(&self) -> (f64, f64) {
        (self.lower.max_x(), self.upper.min_x())
    }

    /// Minimum distance from a point to either plate.
    pub fn distance_to_plates(&self, p: Vec2) -> f64 {
        self.lower_curve
            .windows(2)
            .chain(self.upper_curve.windows(2))
            .map(|w| p.distance_to_segment(w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A straight boundary element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub start: Vec2,
    pub end: Vec2,
    pub midpoint: Vec2,
    /// Unit tangent from `start` to `end`.
    pub tangent: Vec2,
    /// Unit normal pointing into the vacuum gap.
    pub normal: Vec2,
    pub length: f64,
    pub plate: Plate,
    pub prev: Option<usize>,
    pub next: Option<usize>,
}

impl Element {
    fn new(start: Vec2, end: Vec2, plate: Plate) -> Self {
        let d = end - start;
        let length = d.norm();
        let tangent = d * (1.0 / length);
        let normal = match plate {
            Plate::Lower => Vec2::new(tangent.y, -tangent.x),
            Plate::Upper => Vec2::new(-tangent.y, tangent.x),
        };
        Self {
            start,
            end,
            midpoint: (start + end) * 0.5,
            tangent,
            normal,
            length,
            plate,
            prev: None,
            next: None,
        }
    }

    /// Point at signed arc length `t` from the midpoint.
    #[inline]
    pub fn at(&self, t: f64) -> Vec2 {
        self.midpoint + self.tangent * t
    }
}

/// Discretised plate boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub elements: Vec<Element>,
    pub target_size: f64,
}

impl BoundaryMesh {
    /// Mesh arbitrary open polylines; every edge is split into
    /// `ceil(len / target)` equal elements.
    pub fn from_curves(curves: &[(Vec<Vec2>, Plate)], target: f64) -> Result<Self> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::Precondition(format!("target element size must be > 0, got {target}")));
        }
        let mut elements: Vec<Element> = Vec::new();
        for (points, plate) in curves {
            let first = elements.len();
            for w in points.windows(2) {
                let len = (w[1] - w[0]).norm();
                if len == 0.0 {
                    continue;
                }
                let n = (len / target * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                for k in 0..n {
                    let a = w[0] + (w[1] - w[0]) * (k as f64 / n as f64);
                    let b = if k + 1 == n { w[1] } else { w[0] + (w[1] - w[0]) * ((k + 1) as f64 / n as f64) };
                    elements.push(Element::new(a, b, *plate));
                }
            }
            let last = elements.len();
            for i in first..last {
                elements[i].prev = (i > first).then(|| i - 1);
                elements[i].next = (i + 1 < last).then(|| i + 1);
            }
        }
        Ok(Self { elements, target_size: target })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.elements.iter().map(|e| e.length).sum()
    }

    pub fn max_element_length(&self) -> f64 {
        self.elements.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// True when elements `i` and `j` are consecutive on one straight run.
    pub fn collinear(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.elements[i], &self.elements[j]);
        a.tangent.dot(b.tangent) > 1.0 - 1e-12
    }

    /// Neighbours usable for a smooth interpolation stencil around `i`.
    pub fn smooth_neighbors(&self, i: usize) -> Option<(usize, usize)> {
        let e = &self.elements[i];
        let (p, n) = (e.prev?, e.next?);
        (self.collinear(p, i) && self.collinear(i, n)).then_some((p, n))
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.elements
            .iter()
            .map(|e| p.distance_to_segment(e.start, e.end))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Mesh both plates of a scene.
///
/// Clipped end pieces shorter than half the target size are dropped so that
/// every element length lies in (target/2, target].
pub fn mesh_scene(scene: &Scene, target: f64) -> Result<BoundaryMesh> {
    let shortest = scene.lower.shortest_edge();
    if !(target > 0.0) || target >= shortest {
        return Err(Error::Precondition(format!(
            "target element size {target} must be > 0 and below the shortest profile edge {shortest}"
        )));
    }
    let trim = |curve: &[Vec2]| -> Vec<Vec2> {
        let mut c = curve.to_vec();
        if c.len() > 2 && (c[1] - c[0]).norm() < 0.5 * target {
            c.remove(0);
        }
        let n = c.len();
        if n > 2 && (c[n - 1] - c[n - 2]).norm() < 0.5 * target {
            c.pop();
        }
        c
    };
    BoundaryMesh::from_curves(
        &[(trim(&scene.lower_curve), Plate::Lower), (trim(&scene.upper_curve), Plate::Upper)],
        target,
    )
}

/// Split every element into `factor` equal parts.
pub fn refine(mesh: &BoundaryMesh, factor: usize) -> Result<BoundaryMesh> {
    if factor < 2 {
        return Err(Error::Precondition(format!("refinement factor must be >= 2, got {factor}")));
    }
    let mut elements = Vec::with_capacity(mesh.len() * factor);
    for old in &mesh.elements {
        for k in 0..factor {
            let a = old.start + (old.end - old.start) * (k as f64 / factor as f64);
            let b = if k + 1 == factor {
                old.end
            } else {
                old.start + (old.end - old.start) * ((k + 1) as f64 / factor as f64)
            };
            let mut e = Element::new(a, b, old.plate);
            e.tangent = old.tangent;
            e.normal = old.normal;
            elements.push(e);
        }
    }
    for (i, old) in mesh.elements.iter().enumerate() {
        for k in 0..factor {
            let idx = i * factor + k;
            elements[idx].prev = if k > 0 { Some(idx - 1) } else { old.prev.map(|p| p * factor + factor - 1) };
            elements[idx].next = if k + 1 < factor { Some(idx + 1) } else { old.next.map(|n| n * factor) };
        }
    }
    Ok(BoundaryMesh { elements, target_size: mesh.target_size / factor as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rack(v: f64, h: f64) -> RackGeometry {
        RackGeometry { tooth_height: h, ..RackGeometry::reference(v) }
    }

    #[test]
    fn zero_slope_profile_is_level_and_symmetric() {
        let p = build_rack_profile(&rack(0.5, 0.5)).unwrap();
        let v = &p.vertices;
        assert_eq!(v[0].x, v[1].x);
        assert_eq!(v[2].x, v[3].x);
        // Mirror about the tooth centre y = 0 maps the profile onto itself.
        assert!(same_periodic_vertices(&p, &p.mirrored(0.0)));
    }

    fn same_periodic_vertices(a: &Profile, b: &Profile) -> bool {
        let n = a.vertices.len() - 1;
        n == b.vertices.len() - 1
            && a.vertices[..n].iter().all(|p| {
                b.vertices[..n].iter().any(|q| {
                    let dy = p.y - q.y;
                    let k = (dy / a.period).round();
                    (p.x - q.x).abs() < 1e-12 && (dy - k * a.period).abs() < 1e-12
                })
            })
    }

    #[test]
    fn sloped_profile_tilt_and_parallel_edges() {
        let g = rack(0.3, 0.5);
        let theta = g.tilt_angle().unwrap();
        assert!((theta - 0.4f64.asin()).abs() < 1e-15);
        assert!((theta - 0.411_516_846).abs() < 1e-9);
        let p = build_rack_profile(&g).unwrap();
        let face = (p.vertices[1] - p.vertices[0]).normalized();
        let valley = (p.vertices[3] - p.vertices[2]).normalized();
        assert!(face.cross(valley).abs() < 1e-14);
        let lens = p.edge_lengths();
        assert!((lens[0] - 0.5).abs() < 1e-14);
        assert!((lens[2] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn overlong_edges_rejected() {
        let g = rack(1.6, 0.5);
        match build_rack_profile(&g) {
            Err(Error::Geometry(msg)) => assert!(msg.contains("u + v"), "{msg}"),
            other => panic!("expected geometry error, got {other:?}"),
        }
        let bad_gap = RackGeometry { gap: 0.0, ..rack(0.5, 0.5) };
        assert!(bad_gap.validate().is_err());
        let bad_h = RackGeometry { tooth_height: -0.1, ..rack(0.5, 0.5) };
        assert!(bad_h.validate().is_err());
    }

    #[test]
    fn profile_closure_and_simplicity_checked() {
        let open = Profile::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(0.5, 1.0), Vec2::new(0.1, 2.0)],
            2.0,
        );
        assert!(open.is_err());
        let dup = Profile::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.0), Vec2::new(0.0, 2.0)],
            2.0,
        );
        assert!(dup.is_err());
        let overhang = Profile::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(0.5, 1.5), Vec2::new(0.7, 1.0), Vec2::new(0.0, 2.0)],
            2.0,
        );
        assert!(overhang.is_err());
    }

    #[test]
    fn upper_face_at_distance_gap_for_zero_shift() {
        for &v in &[0.5, 0.4, 0.3] {
            let g: PlateGeometry = rack(v, 0.5).into();
            let scene = assemble_scene(&g, 3).unwrap();
            let lf = (scene.lower.vertices[0], scene.lower.vertices[1]);
            // The upper profile's face edge is the image of the lower face.
            let n = scene.upper.vertices.len();
            let uf = (scene.upper.vertices[n - 2], scene.upper.vertices[n - 1]);
            let dir = (lf.1 - lf.0).normalized();
            let udir = (uf.1 - uf.0).normalized();
            assert!(dir.cross(udir).abs() < 1e-14);
            let perp = (uf.0 - lf.0).cross(dir).abs();
            assert!((perp - 1.0).abs() < 1e-12, "v={v}: {perp}");
        }
    }

    #[test]
    fn zero_slope_scene_mirror_symmetric() {
        let g: PlateGeometry = rack(0.5, 0.5).into();
        let scene = assemble_scene(&g, 5).unwrap();
        let axis = 0.5 * (scene.window.0 + scene.window.1);
        for curve in [&scene.lower_curve, &scene.upper_curve] {
            let mirrored: Vec<Vec2> =
                curve.iter().rev().map(|p| Vec2::new(p.x, 2.0 * axis - p.y)).collect();
            for (a, b) in curve.iter().zip(&mirrored) {
                assert!((*a - *b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sloped_scene_not_mirror_symmetric() {
        let g: PlateGeometry = rack(0.3, 0.5).into();
        let scene = assemble_scene(&g, 5).unwrap();
        let axis = 0.5 * (scene.window.0 + scene.window.1);
        let mirrored: Vec<Vec2> =
            scene.lower_curve.iter().rev().map(|p| Vec2::new(p.x, 2.0 * axis - p.y)).collect();
        let max_dev = scene
            .lower_curve
            .iter()
            .zip(&mirrored)
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max);
        assert!(max_dev > 0.05);
    }

    #[test]
    fn zero_slope_scene_matches_mirror_of_opposite_shift() {
        let g = rack(0.5, 0.5);
        let a = assemble_scene(&g.with_shift(0.3).into(), 5).unwrap();
        let b = assemble_scene(&g.with_shift(-0.3).into(), 5).unwrap();
        // Mirror b about the window centre, which is also a tooth symmetry axis.
        let axis = 0.5 * (b.window.0 + b.window.1);
        assert!(same_periodic_vertices(&a.upper, &b.upper.mirrored(axis)));
        assert!(!same_periodic_vertices(&a.upper, &b.upper));
    }

    #[test]
    fn shift_reduced_modulo_period() {
        let g = rack(0.3, 0.5);
        let s0 = assemble_scene(&g.with_shift(0.0).into(), 5).unwrap();
        let s2 = assemble_scene(&g.with_shift(2.0).into(), 5).unwrap();
        assert_eq!(s0.upper_curve.len(), s2.upper_curve.len());
        for (a, b) in s0.upper_curve.iter().zip(&s2.upper_curve) {
            assert!((*a - *b).norm() < 1e-12);
        }
        assert_eq!(canonical_shift(-0.5, 2.0), 1.5);
    }

    #[test]
    fn reference_geometries_keep_plates_apart() {
        for &v in &[0.3, 0.4, 0.5] {
            for k in 0..40 {
                let s = k as f64 * 0.05;
                let scene = assemble_scene(&rack(v, 0.5).with_shift(s).into(), 3).unwrap();
                assert!(scene.min_separation() > 0.1, "v={v} s={s}");
            }
        }
    }

    #[test]
    fn intersecting_plates_reported() {
        // Strongly tilted faces at a small gap: the tooth corners collide
        // once the upper plate slides.
        let g = RackGeometry { gap: 0.1, ..RackGeometry::reference(0.3) };
        assert!(assemble_scene(&g.into(), 3).is_ok());
        let hits = (1..40)
            .filter(|k| {
                matches!(
                    assemble_scene(&g.with_shift(0.05 * *k as f64).into(), 3),
                    Err(Error::PlateIntersection { .. })
                )
            })
            .count();
        assert!(hits > 0);
        assert!(assemble_scene(&g.into(), 4).is_err());
    }

    #[test]
    fn flat_segment_uniform_subdivision() {
        let mesh = BoundaryMesh::from_curves(
            &[(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)], Plate::Lower)],
            0.25,
        )
        .unwrap();
        assert_eq!(mesh.len(), 4);
        for (i, e) in mesh.elements.iter().enumerate() {
            assert!((e.length - 0.25).abs() < 1e-15);
            assert_eq!(e.normal, Vec2::new(1.0, 0.0));
            if i > 0 {
                assert!(mesh.collinear(i - 1, i));
            }
        }
        assert_eq!(mesh.smooth_neighbors(1), Some((0, 2)));
        assert_eq!(mesh.smooth_neighbors(0), None);
    }

    #[test]
    fn scene_mesh_counts_and_corners() {
        let g: PlateGeometry = rack(0.5, 0.5).into();
        let scene = assemble_scene(&g, 3).unwrap();
        let mesh = mesh_scene(&scene, 0.1).unwrap();
        let arc = scene.lower.arc_length();
        let per_period_elements = mesh.elements.iter().filter(|e| {
            e.plate == Plate::Lower && e.midpoint.y >= scene.lower.vertices[0].y && e.midpoint.y < scene.lower.vertices[4].y
        }).count();
        assert!(per_period_elements as f64 >= arc / 0.1);
        for corner in &scene.lower.vertices {
            assert!(mesh.elements.iter().any(|e| (e.start - *corner).norm() < 1e-12));
        }
        for e in &mesh.elements {
            assert!(e.length <= 0.1 + 1e-12 && e.length > 0.05, "{}", e.length);
            let into_gap = match e.plate {
                Plate::Lower => e.normal.x >= 0.0,
                Plate::Upper => e.normal.x <= 0.0,
            };
            assert!(into_gap);
        }
        assert!(mesh_scene(&scene, 0.6).is_err());
    }

    #[test]
    fn refine_preserves_geometry() {
        let g: PlateGeometry = rack(0.3, 0.5).into();
        let scene = assemble_scene(&g, 3).unwrap();
        let mesh = mesh_scene(&scene, 0.1).unwrap();
        let r2 = refine(&mesh, 2).unwrap();
        assert_eq!(r2.len(), 2 * mesh.len());
        assert!((r2.total_length() - mesh.total_length()).abs() < 1e-12 * mesh.total_length());
        let r22 = refine(&r2, 2).unwrap();
        let r4 = refine(&mesh, 4).unwrap();
        for (a, b) in r22.elements.iter().zip(&r4.elements) {
            assert!((a.start - b.start).norm() < 1e-14 && (a.end - b.end).norm() < 1e-14);
            assert_eq!((a.prev, a.next), (b.prev, b.next));
        }
        for old in &mesh.elements {
            assert!(r4.elements.iter().any(|e| e.start == old.start));
        }
        assert!(refine(&mesh, 1).is_err());
    }

    fn neighbors_consistent(mesh: &BoundaryMesh) -> bool {
        mesh.elements.iter().enumerate().all(|(i, e)| {
            e.next.map_or(true, |n| mesh.elements[n].prev == Some(i))
                && e.prev.map_or(true, |p| mesh.elements[p].next == Some(i))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn periodicity_and_refinement_invariants(
            v in 0.3..0.5f64,
            s in 0.0..2.0f64,
            factor in 2usize..4,
        ) {
            let g = rack(v, 0.5);
            let a = assemble_scene(&g.with_shift(s).into(), 3).unwrap();
            let b = assemble_scene(&g.with_shift(s + 2.0).into(), 3).unwrap();
            prop_assert_eq!(a.upper_curve.len(), b.upper_curve.len());
            for (p, q) in a.upper_curve.iter().zip(&b.upper_curve) {
                prop_assert!((*p - *q).norm() < 1e-9);
            }
            let mesh = mesh_scene(&a, 0.1).unwrap();
            prop_assert!(neighbors_consistent(&mesh));
            let fine = refine(&mesh, factor).unwrap();
            prop_assert!(neighbors_consistent(&fine));
            let rel = (fine.total_length() - mesh.total_length()).abs() / mesh.total_length();
            prop_assert!(rel < 1e-12);
        }
    }
}
