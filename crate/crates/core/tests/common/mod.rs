//! Independent reference implementations shared by the integration tests.
//! They rely on `statrs` for the incomplete gamma function so that nothing
//! here reuses the crate's own kernels.
#![allow(dead_code)]

use statrs::function::gamma::{gamma_lr, gamma_ur};

/// `|a − b| / max(|a|, |b|, 1e-8)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

/// Plain central difference.
pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Sixth-order Richardson extrapolation of central differences.
pub fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d1 = central(&f, x, h);
    let d2 = central(&f, x, h / 2.0);
    let d3 = central(&f, x, h / 4.0);
    let e1 = (4.0 * d2 - d1) / 3.0;
    let e2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * e2 - e1) / 15.0
}

/// `P(r, z)` from statrs, defined as 0 at `z = 0`.
pub fn p_ref(r: f64, z: f64) -> f64 {
    if z == 0.0 { 0.0 } else { gamma_lr(r, z) }
}

/// `Q(r, z)` from statrs, defined as 1 at `z = 0`.
pub fn q_ref(r: f64, z: f64) -> f64 {
    if z == 0.0 { 1.0 } else { gamma_ur(r, z) }
}

/// Mass of the standard GGM below `−v` for `v ≥ 0`.
pub fn tail_ref(beta: f64, v: f64) -> f64 {
    0.5 * q_ref(1.0 / beta, v.abs().powf(beta))
}

/// Standard GGM CDF at `u`.
pub fn cdf_ref(beta: f64, u: f64) -> f64 {
    if u <= 0.0 { tail_ref(beta, -u) } else { 1.0 - tail_ref(beta, u) }
}

/// Standard GGM mass of `[a, b]`, computed from tails on each side.
pub fn bin_mass_ref(beta: f64, a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        tail_ref(beta, a) - tail_ref(beta, b)
    } else if b <= 0.0 {
        tail_ref(beta, -b) - tail_ref(beta, -a)
    } else {
        1.0 - tail_ref(beta, -a) - tail_ref(beta, b)
    }
}
