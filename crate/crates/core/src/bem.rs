//! Single-layer boundary-element solver for the renormalised Green function.
//!
//! `G_ren(x, ·)` is represented as a single-layer potential with density
//! `σ` on the plates,
//!
//! ```text
//! G_ren(x, y) = Σ_e ∫_e σ(ξ) Φ(|y - ξ|) dξ,     Φ(r) = K0(μ r) / 2π,
//! ```
//!
//! collocated at element midpoints against the Dirichlet data
//! `G_ren(x, ξ) = -G⁰(x, ξ) = Φ(|x - ξ|)`. The density on each element is a
//! polynomial through its own coefficient and those of its neighbours.
//! Writing `b(x)` for the collocation data and `k(y)` for the potential of
//! unit coefficients, `G_ren(x, y) = k(y)ᵀ A⁻¹ b(x)`, so mixed derivatives
//! need only `∂b` and `∂k`, both analytic.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, LU, Dyn};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, Element};
use crate::kernel::{k0_k1, MixedGreen, MixedGreenSource, SpectralParameter};
use crate::quadrature::{gauss, k0_power_moment};
use crate::stress::OperatorProvider;
use crate::vec2::Vec2;

/// Above this estimated 1-norm condition number an operator is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

const INV_2PI: f64 = 0.5 / PI;
const GAUSS_ORDER: usize = 8;

/// Polynomial degree of the density reconstruction on each element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(try_from = "u8", into = "u8")]
pub enum BasisDegree {
    Constant,
    Linear,
    #[default]
    Quadratic,
}

impl BasisDegree {
    pub fn as_u8(self) -> u8 {
        match self {
            BasisDegree::Constant => 0,
            BasisDegree::Linear => 1,
            BasisDegree::Quadratic => 2,
        }
    }
}

impl TryFrom<u8> for BasisDegree {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(BasisDegree::Constant),
            1 => Ok(BasisDegree::Linear),
            2 => Ok(BasisDegree::Quadratic),
            _ => Err(format!("basis degree must be 0, 1 or 2, got {v}")),
        }
    }
}

impl From<BasisDegree> for u8 {
    fn from(d: BasisDegree) -> u8 {
        d.as_u8()
    }
}

/// Density on one element as `Σ_j σ_j (c0 + c1 t + c2 t²)`, `t` the arc
/// length from the element midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub entries: Vec<(usize, [f64; 3])>,
    pub degree: usize,
}

pub fn build_stencils(mesh: &BoundaryMesh, degree: BasisDegree) -> Vec<Stencil> {
    (0..mesh.len())
        .map(|e| {
            let constant = Stencil { entries: vec![(e, [1.0, 0.0, 0.0])], degree: 0 };
            if degree == BasisDegree::Constant {
                return constant;
            }
            let Some((p, n)) = mesh.smooth_neighbors(e) else {
                return constant;
            };
            let h = mesh.elements[e].length;
            let tm = -0.5 * (mesh.elements[p].length + h);
            let tp = 0.5 * (h + mesh.elements[n].length);
            match degree {
                BasisDegree::Linear => {
                    let s = 1.0 / (tp - tm);
                    Stencil {
                        entries: vec![(p, [0.0, -s, 0.0]), (e, [1.0, 0.0, 0.0]), (n, [0.0, s, 0.0])],
                        degree: 1,
                    }
                }
                _ => {
                    let dp = tm * (tm - tp);
                    let de = tm * tp;
                    let dn = tp * (tp - tm);
                    Stencil {
                        entries: vec![
                            (p, [0.0, -tp / dp, 1.0 / dp]),
                            (e, [1.0, -(tm + tp) / de, 1.0 / de]),
                            (n, [0.0, -tm / dn, 1.0 / dn]),
                        ],
                        degree: 2,
                    }
                }
            }
        })
        .collect()
}

/// Moments `∫ t^p Φ(|y - ξ(t)|) dt` over one element and their
/// y-gradients.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub value: [f64; 3],
    pub grad: [[f64; 3]; 2],
}

/// Gauss rule `(panels, order)` for a point at `distance` from an element.
///
/// The integrand's nearest complex singularity sits at the point, so an
/// n-point rule errs like `ρ^{-2n}` with `ρ ≈ 4 · distance / length`. Close
/// points get 8-point rules on sub-panels at least four half-lengths away;
/// far points need fewer nodes for the same ~1e-11 relative accuracy.
fn rule_for(distance: f64, length: f64) -> (usize, usize) {
    let ratio = distance / length;
    if ratio >= 40.0 {
        (1, 2)
    } else if ratio >= 12.0 {
        (1, 3)
    } else if ratio >= 8.0 {
        (1, 4)
    } else if ratio >= 2.0 {
        (1, GAUSS_ORDER)
    } else {
        ((2.0 / ratio.max(0.02)).ceil() as usize, GAUSS_ORDER)
    }
}

/// Moments up to `degree` at a point off the element (no gradient).
fn moments_off(mu: f64, e: &Element, y: Vec2, degree: usize, (panels, order): (usize, usize)) -> [f64; 3] {
    let rule = gauss(order);
    let half = 0.5 * e.length;
    let width = e.length / panels as f64;
    let mut m = [0.0; 3];
    for k in 0..panels {
        let lo = -half + width * k as f64;
        for (t, w) in rule.mapped(lo, lo + width) {
            let r = (y - e.at(t)).norm();
            let phi = w * k0_k1(mu * r).0 * INV_2PI;
            m[0] += phi;
            if degree >= 1 {
                m[1] += phi * t;
                if degree >= 2 {
                    m[2] += phi * t * t;
                }
            }
        }
    }
    m
}

/// Moments and gradients at a point off the element.
fn moments_grad(mu: f64, e: &Element, y: Vec2, degree: usize, (panels, order): (usize, usize)) -> Moments {
    let rule = gauss(order);
    let half = 0.5 * e.length;
    let width = e.length / panels as f64;
    let mut out = Moments::default();
    for k in 0..panels {
        let lo = -half + width * k as f64;
        for (t, w) in rule.mapped(lo, lo + width) {
            let d = y - e.at(t);
            let r = d.norm();
            let (k0, k1) = k0_k1(mu * r);
            let phi = w * k0 * INV_2PI;
            // ∇_y Φ = -μ K1 (y - ξ) / (2π r)
            let g = -w * mu * k1 * INV_2PI / r;
            let gx = g * d.x;
            let gy = g * d.y;
            let mut tp = 1.0;
            for p in 0..=degree {
                out.value[p] += phi * tp;
                out.grad[0][p] += gx * tp;
                out.grad[1][p] += gy * tp;
                tp *= t;
            }
        }
    }
    out
}

/// Moments for a node at the element's own midpoint (log-singular).
fn moments_self(mu: f64, e: &Element, degree: usize) -> [f64; 3] {
    let c = 0.5 * e.length;
    let mut m = [0.0; 3];
    m[0] = 2.0 * k0_power_moment(mu, c, 0) * INV_2PI;
    if degree >= 2 {
        m[2] = 2.0 * k0_power_moment(mu, c, 2) * INV_2PI;
    }
    m
}

/// Factorised collocation system at one spectral parameter.
pub struct GreenOperator {
    mu: SpectralParameter,
    mesh: Arc<BoundaryMesh>,
    stencils: Vec<Stencil>,
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    condition_estimate: f64,
}

impl std::fmt::Debug for GreenOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenOperator")
            .field("mu", &self.mu.get())
            .field("dimension", &self.dimension())
            .field("condition_estimate", &self.condition_estimate)
            .finish()
    }
}

/// Assemble and factorise the collocation matrix.
pub fn assemble(
    mesh: Arc<BoundaryMesh>,
    mu: SpectralParameter,
    degree: BasisDegree,
) -> Result<GreenOperator> {
    if mesh.is_empty() {
        return Err(Error::Precondition("empty boundary mesh".into()));
    }
    let n = mesh.len();
    let stencils = build_stencils(&mesh, degree);
    let m = mu.get();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (e, el) in mesh.elements.iter().enumerate() {
        let st = &stencils[e];
        for c in 0..n {
            let node = mesh.elements[c].midpoint;
            let mom = if c == e {
                moments_self(m, el, st.degree)
            } else {
                let d = node.distance_to_segment(el.start, el.end);
                moments_off(m, el, node, st.degree, rule_for(d, el.length))
            };
            for (j, coef) in &st.entries {
                a[(c, *j)] += coef[0] * mom[0] + coef[1] * mom[1] + coef[2] * mom[2];
            }
        }
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let diag_max = (0..n).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
    if let Some(pivot) = (0..n).find(|&i| !(u[(i, i)].abs() > 1e-300 * diag_max.max(1e-300))) {
        return Err(Error::SingularMatrix { pivot });
    }
    let mut op = GreenOperator { mu, mesh, stencils, matrix: a, lu, condition_estimate: 0.0 };
    op.condition_estimate = op.estimate_condition();
    if !(op.condition_estimate <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { estimate: op.condition_estimate });
    }
    Ok(op)
}

impl GreenOperator {
    pub fn mu(&self) -> SpectralParameter {
        self.mu
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn stencils(&self) -> &[Stencil] {
        &self.stencils
    }

    /// Estimated 1-norm condition number (Hager's method).
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    fn solve_transposed(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        // P A = L U  =>  Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, x = P⁻¹ w.
        let z = self.lu.u().tr_solve_upper_triangular(b)?;
        let mut w = self.lu.l().tr_solve_lower_triangular(&z)?;
        self.lu.p().inv_permute_rows(&mut w);
        Some(w)
    }

    fn estimate_condition(&self) -> f64 {
        let n = self.dimension();
        let norm_a = (0..n)
            .map(|j| self.matrix.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut estimate = 0.0;
        for _ in 0..5 {
            let Some(y) = self.lu.solve(&x) else { return f64::INFINITY };
            estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let Some(z) = self.solve_transposed(&xi) else { return f64::INFINITY };
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if zmax <= z.dot(&x) {
                break;
            }
            x = DVector::zeros(n);
            x[jmax] = 1.0;
        }
        norm_a * estimate
    }

    fn check_point(&self, x: Vec2) -> Result<()> {
        for el in &self.mesh.elements {
            let d = x.distance_to_segment(el.start, el.end);
            if d < el.length {
                return Err(Error::SourceTooClose { x: x.x, y: x.y, distance: d, element: el.length });
            }
        }
        Ok(())
    }

    /// Collocation data `b_c(x) = Φ(|x - node_c|)`.
    pub fn rhs(&self, x: Vec2) -> DVector<f64> {
        let m = self.mu.get();
        DVector::from_iterator(
            self.dimension(),
            self.mesh.elements.iter().map(|e| k0_k1(m * (x - e.midpoint).norm()).0 * INV_2PI),
        )
    }

    /// Density coefficients for the source point `x`.
    pub fn solve_density(&self, x: Vec2) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let b = self.rhs(x);
        let sigma = self.lu.solve(&b).ok_or(Error::SingularMatrix { pivot: 0 })?;
        let residual = (&self.matrix * &sigma - &b).amax();
        if residual > 1e-10 * b.amax() {
            return Err(Error::NonConvergent { what: "collocation solve".into(), achieved: residual });
        }
        Ok(sigma.iter().copied().collect())
    }

    /// `|A σ - b|_∞ / |b|_∞` for a density obtained from [`Self::solve_density`].
    pub fn relative_residual(&self, x: Vec2, sigma: &[f64]) -> f64 {
        let b = self.rhs(x);
        let s = DVector::from_column_slice(sigma);
        (&self.matrix * s - &b).amax() / b.amax()
    }

    /// Per-element polynomial coefficients of a density.
    fn element_coefficients(&self, sigma: impl Fn(usize) -> f64) -> Vec<[f64; 3]> {
        self.stencils
            .iter()
            .map(|st| {
                let mut c = [0.0; 3];
                for (j, coef) in &st.entries {
                    let s = sigma(*j);
                    c[0] += s * coef[0];
                    c[1] += s * coef[1];
                    c[2] += s * coef[2];
                }
                c
            })
            .collect()
    }

    /// Single-layer potential of `sigma` and its gradient at `y`.
    pub fn potential(&self, sigma: &[f64], y: Vec2) -> Result<(f64, [f64; 2])> {
        self.check_point(y)?;
        let coeffs = self.element_coefficients(|j| sigma[j]);
        let m = self.mu.get();
        let mut value = 0.0;
        let mut grad = [0.0; 2];
        for (e, el) in self.mesh.elements.iter().enumerate() {
            let deg = self.stencils[e].degree;
            let d = y.distance_to_segment(el.start, el.end);
            let mom = moments_grad(m, el, y, deg, rule_for(d, el.length));
            for p in 0..=deg {
                value += coeffs[e][p] * mom.value[p];
                grad[0] += coeffs[e][p] * mom.grad[0][p];
                grad[1] += coeffs[e][p] * mom.grad[1][p];
            }
        }
        Ok((value, grad))
    }

    /// Potential on a plate point (no distance restriction); used to replay
    /// the boundary condition between collocation nodes.
    pub fn boundary_value(&self, sigma: &[f64], xi: Vec2) -> f64 {
        let coeffs = self.element_coefficients(|j| sigma[j]);
        let m = self.mu.get();
        let mut value = 0.0;
        for (e, el) in self.mesh.elements.iter().enumerate() {
            let deg = self.stencils[e].degree;
            let d = xi.distance_to_segment(el.start, el.end);
            let mom = if d < 1e-12 * el.length {
                // On the element: split at the foot point and use the
                // log-singular moments of both sides.
                let t0 = (xi - el.midpoint).dot(el.tangent);
                let half = 0.5 * el.length;
                let mut mm = [0.0; 3];
                for (a, b) in [(-half - t0, 0.0), (0.0, half - t0)] {
                    let len = (b - a).abs();
                    if len <= 0.0 {
                        continue;
                    }
                    // moments in s = t - t0 over [a, b] (one end at 0)
                    let sign = if a < 0.0 { -1.0 } else { 1.0 };
                    let s0 = k0_power_moment(m, len, 0) * INV_2PI;
                    let s1 = sign * k0_power_moment(m, len, 1) * INV_2PI;
                    let s2 = k0_power_moment(m, len, 2) * INV_2PI;
                    // t^p = (s + t0)^p
                    mm[0] += s0;
                    mm[1] += s1 + t0 * s0;
                    mm[2] += s2 + 2.0 * t0 * s1 + t0 * t0 * s0;
                }
                mm
            } else {
                moments_off(m, el, xi, deg, rule_for(d, el.length))
            };
            for p in 0..=deg {
                value += coeffs[e][p] * mom[p];
            }
        }
        value
    }

    /// `G_ren(x, y)` from the density of source `x`.
    pub fn eval_gren(&self, x: Vec2, y: Vec2) -> Result<f64> {
        let sigma = self.solve_density(x)?;
        Ok(self.potential(&sigma, y)?.0)
    }

    /// `G_ren(x, x)` and `D_ij = ∂x_i ∂y_j G_ren(x, y)|_{y=x}`.
    pub fn eval_gren_mixed(&self, x: Vec2) -> Result<MixedGreen> {
        Ok(self.eval_gren_mixed_many(&[x])?[0])
    }

    /// Batched [`Self::eval_gren_mixed`]: one triangular solve with
    /// `3 · points.len()` right-hand sides.
    pub fn eval_gren_mixed_many(&self, points: &[Vec2]) -> Result<Vec<MixedGreen>> {
        for &x in points {
            self.check_point(x)?;
        }
        let n = self.dimension();
        let m = self.mu.get();
        let mut rhs = DMatrix::<f64>::zeros(n, 3 * points.len());
        for (k, &x) in points.iter().enumerate() {
            for (c, el) in self.mesh.elements.iter().enumerate() {
                let d = x - el.midpoint;
                let r = d.norm();
                let (k0, k1) = k0_k1(m * r);
                rhs[(c, 3 * k)] = k0 * INV_2PI;
                // ∂x_i Φ(|x - node|) = -μ K1 (x - node)_i / (2π r)
                let g = -m * k1 * INV_2PI / r;
                rhs[(c, 3 * k + 1)] = g * d.x;
                rhs[(c, 3 * k + 2)] = g * d.y;
            }
        }
        let sol = self.lu.solve(&rhs).ok_or(Error::SingularMatrix { pivot: 0 })?;
        let mut out = Vec::with_capacity(points.len());
        for (k, &x) in points.iter().enumerate() {
            let coeffs: [Vec<[f64; 3]>; 3] =
                std::array::from_fn(|col| self.element_coefficients(|j| sol[(j, 3 * k + col)]));
            let mut g = MixedGreen::default();
            for (e, el) in self.mesh.elements.iter().enumerate() {
                let deg = self.stencils[e].degree;
                let dist = x.distance_to_segment(el.start, el.end);
                let mom = moments_grad(m, el, x, deg, rule_for(dist, el.length));
                for p in 0..=deg {
                    g.value += coeffs[0][e][p] * mom.value[p];
                    for i in 0..2 {
                        for j in 0..2 {
                            g.d[i][j] += coeffs[1 + i][e][p] * mom.grad[j][p];
                        }
                    }
                }
            }
            out.push(g);
        }
        Ok(out)
    }
}

impl MixedGreenSource for GreenOperator {
    fn mixed_many(&self, points: &[Vec2]) -> Result<Vec<MixedGreen>> {
        self.eval_gren_mixed_many(points)
    }

    fn rounding_amplification(&self) -> f64 {
        self.condition_estimate
    }
}

/// Assembles boundary-element operators for a fixed mesh.
#[derive(Debug, Clone)]
pub struct BemProvider {
    pub mesh: Arc<BoundaryMesh>,
    pub degree: BasisDegree,
}

impl BemProvider {
    pub fn new(mesh: BoundaryMesh, degree: BasisDegree) -> Self {
        Self { mesh: Arc::new(mesh), degree }
    }
}

impl OperatorProvider for BemProvider {
    type Operator = GreenOperator;

    fn operator(&self, mu: SpectralParameter) -> Result<GreenOperator> {
        assemble(self.mesh.clone(), mu, self.degree)
    }

    fn distance_to_plates(&self, p: Vec2) -> f64 {
        self.mesh.distance_to(p)
    }
}
