//! Modified Bessel functions of the second kind, orders 0, 1 and 2.
//!
//! Small arguments (`x <= 2`) use the ascending series. For larger arguments
//! the scaled functions `√x eˣ K_n(x)` are smooth in `4/x`; they are tabulated
//! once as Chebyshev series, with coefficients sampled from Steed's continued
//! fraction (ratio K1/K0 plus the Thompson-Barnett normalisation sum). Both
//! paths are accurate to a few ulps, well inside the 1e-10 relative target.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_SWITCH: f64 = 2.0;
const MAX_ITER: usize = 10_000;

/// K_order(x) for order 0, 1 or 2.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("bessel_k requires x > 0, got {x}")));
    }
    match order {
        0 => Ok(k0(x)),
        1 => Ok(k1(x)),
        2 => Ok(k2(x)),
        _ => Err(Error::Domain(format!("bessel_k order {order} not supported"))),
    }
}

#[inline]
pub fn k0(x: f64) -> f64 {
    k0_k1(x).0
}

#[inline]
pub fn k1(x: f64) -> f64 {
    k0_k1(x).1
}

#[inline]
pub fn k2(x: f64) -> f64 {
    let (k0, k1) = k0_k1(x);
    k0 + 2.0 * k1 / x
}

/// (K0(x), K1(x)) evaluated together; callers needing a kernel and its
/// gradient always want both.
pub fn k0_k1(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    if x <= SERIES_SWITCH {
        series(x)
    } else if x > 745.0 {
        (0.0, 0.0)
    } else {
        let (a, b) = scaled_large(x);
        let e = (-x).exp() / x.sqrt();
        (a * e, b * e)
    }
}

const CHEB_NODES: usize = 64;
const CHEB_TERMS: usize = 26;

struct ChebTable {
    k0: Vec<f64>,
    k1: Vec<f64>,
}

/// `(√x eˣ K0(x), √x eˣ K1(x))` for `x >= 2`, Chebyshev in `s = 4/x - 1`.
fn scaled_large(x: f64) -> (f64, f64) {
    static TABLE: OnceLock<ChebTable> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let n = CHEB_NODES;
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|j| {
                let s = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
                let x = 4.0 / (s + 1.0);
                steed_scaled(x)
            })
            .collect();
        let coeffs = |f: &dyn Fn(&(f64, f64)) -> f64| -> Vec<f64> {
            let mut c: Vec<f64> = (0..n)
                .map(|k| {
                    let sum: f64 = samples
                        .iter()
                        .enumerate()
                        .map(|(j, v)| {
                            f(v) * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos()
                        })
                        .sum();
                    2.0 * sum / n as f64
                })
                .collect();
            c[0] *= 0.5;
            // Beyond this order the coefficients sit at the sampling noise.
            c.truncate(CHEB_TERMS);
            c
        };
        ChebTable { k0: coeffs(&|v| v.0), k1: coeffs(&|v| v.1) }
    });
    let s = 4.0 / x - 1.0;
    (clenshaw(&t.k0, s), clenshaw(&t.k1, s))
}

fn clenshaw(c: &[f64], s: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * s * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    s * b1 - b2 + c[0]
}

fn series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let log_half = (0.5 * x).ln();

    // K0 = -ln(x/2) I0 + sum psi(k+1) t^k / (k!)^2
    let mut term = 1.0;
    let mut psi = -EULER_GAMMA;
    let mut i0 = 0.0;
    let mut psi_sum = 0.0;
    // K1 partial sums share the same t^k / (k! (k+1)!) structure.
    let mut term1 = 1.0;
    let mut i1_sum = 0.0;
    let mut k1_sum = 0.0;
    let mut k = 0usize;
    loop {
        i0 += term;
        psi_sum += psi * term;
        let psi_next = psi + 1.0 / (k as f64 + 1.0);
        i1_sum += term1;
        k1_sum += (psi + psi_next) * term1;
        if term < 1e-18 * i0 && k > 2 {
            break;
        }
        k += 1;
        let kf = k as f64;
        term *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        psi = psi_next;
    }
    let k0 = -log_half * i0 + psi_sum;
    let i1 = 0.5 * x * i1_sum;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * k1_sum;
    (k0, k1)
}

#[cfg(test)]
fn steed(x: f64) -> (f64, f64) {
    let (a, b) = steed_scaled(x);
    let e = (-x).exp() / x.sqrt();
    (a * e, b * e)
}

/// `(√x eˣ K0(x), √x eˣ K1(x))` by Steed's method.
fn steed_scaled(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            break;
        }
    }
    h *= a1;
    let k0 = (0.5 * std::f64::consts::PI).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}
