//! Quadrature rules shared by the boundary-element assembly and the spectral
//! and line integrations.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::kernel::bessel::EULER_GAMMA;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// n-point rule; nodes by Newton iteration on P_n from the Chebyshev guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            dp = if d != 0.0 { d } else { dp };
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&t, &w)| (c + h * t, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(t, w)| w * f(t)).sum()
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Cached rules for the orders used in assembly.
pub fn gauss(n: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=32).map(|k| GaussLegendre::new(k.max(1))).collect());
    &rules[n]
}

/// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
pub mod kronrod15 {
    pub const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    pub const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    pub const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];

    /// The 15 nodes on [-1, 1] in ascending order, with their Kronrod
    /// weights and (where the node is a Gauss node) the Gauss weight.
    pub fn nodes() -> [(f64, f64, Option<f64>); 15] {
        let mut out = [(0.0, 0.0, None); 15];
        for k in 0..7 {
            let gauss = if k % 2 == 1 { Some(WG[k / 2]) } else { None };
            out[k] = (-XGK[k], WGK[k], gauss);
            out[14 - k] = (XGK[k], WGK[k], gauss);
        }
        out[7] = (0.0, WGK[7], Some(WG[3]));
        out
    }
}

/// Composite Gauss-Legendre rule with `panels` equal panels on [a, b].
pub fn composite_nodes(a: f64, b: f64, panels: usize, points: usize) -> Vec<(f64, f64)> {
    let rule = gauss(points);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + h * p as f64;
            rule.mapped(lo, lo + h).collect::<Vec<_>>()
        })
        .collect()
}

/// ∫₀^c t^p K0(μ t) dt for p ∈ {0, 1, 2}: log-singular moments needed when a
/// collocation node sits at the midpoint of its own element.
///
/// Near the origin the ascending series of K0 is integrated term by term
/// (exact), beyond `8/μ` the integrand is smooth and Gauss-Legendre is used.
pub fn k0_power_moment(mu: f64, c: f64, p: u32) -> f64 {
    let split = (8.0 / mu).min(c);
    let mut total = k0_moment_series(mu, split, p);
    if split < c {
        let n_panels = (((c - split) * mu) / 4.0).ceil().max(1.0) as usize;
        for (t, w) in composite_nodes(split, c, n_panels, 16) {
            total += w * t.powi(p as i32) * crate::kernel::k0(mu * t);
        }
    }
    total
}

fn k0_moment_series(mu: f64, c: f64, p: u32) -> f64 {
    // K0(μt) = Σ_k (μ²t²/4)^k / (k!)² [ψ(k+1) - ln(μ t / 2)]
    let log_c = c.ln();
    let log_half_mu = (0.5 * mu).ln();
    let quarter_mu2 = 0.25 * mu * mu;
    let mut coef = 1.0; // (μ²/4)^k / (k!)²
    let mut psi = -EULER_GAMMA;
    let mut total = 0.0;
    for k in 0..200usize {
        let n1 = (p as usize + 2 * k + 1) as f64;
        let cpow = c.powf(n1);
        // ∫₀^c t^n (ψ - ln(μ/2) - ln t) dt = c^{n+1}/(n+1) (ψ - ln(μ/2) - ln c + 1/(n+1))
        let term = coef * cpow / n1 * (psi - log_half_mu - log_c + 1.0 / n1);
        total += term;
        if k > 2 && term.abs() < 1e-17 * total.abs() {
            break;
        }
        let kf = (k + 1) as f64;
        coef *= quarter_mu2 / (kf * kf);
        psi += 1.0 / kf;
    }
    total
}
