use crate::error::{domain, Error, Result};

use super::RdCurve;

/// Least-squares cubic in a centered and scaled abscissa.
struct Cubic {
    coef: [f64; 4],
    center: f64,
    scale: f64,
}

impl Cubic {
    fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len() as f64;
        let center = x.iter().sum::<f64>() / n;
        let scale = x.iter().map(|v| (v - center).abs()).fold(0.0, f64::max);
        if !(scale > 0.0) {
            return Err(Error::Degenerate("all qualities are equal".into()));
        }
        // Normal equations for the monomials 1, t, t², t³.
        let mut a = [[0.0; 5]; 4];
        for (&xi, &yi) in x.iter().zip(y) {
            let t = (xi - center) / scale;
            let pows = [1.0, t, t * t, t * t * t];
            for r in 0..4 {
                for c in 0..4 {
                    a[r][c] += pows[r] * pows[c];
                }
                a[r][4] += pows[r] * yi;
            }
        }
        let coef = solve4(a).ok_or_else(|| {
            Error::Degenerate("rate-quality points do not determine a cubic".into())
        })?;
        Ok(Self { coef, center, scale })
    }

    /// Definite integral over `[lo, hi]` in the original abscissa.
    fn integral(&self, lo: f64, hi: f64) -> f64 {
        let prim = |x: f64| {
            let t = (x - self.center) / self.scale;
            let c = &self.coef;
            self.scale * t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * c[3] / 4.0)))
        };
        prim(hi) - prim(lo)
    }
}

/// Gaussian elimination with partial pivoting on an augmented 4×5 system.
fn solve4(mut a: [[f64; 5]; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let tail: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][4] - tail) / a[row][row];
    }
    Some(x)
}

fn log_rate_vs_quality(curve: &RdCurve) -> Result<(Vec<f64>, Vec<f64>)> {
    if curve.points.len() < 4 {
        return Err(domain(format!(
            "curve '{}' has {} points, BD-rate needs at least 4",
            curve.label,
            curve.points.len()
        )));
    }
    let mut q = Vec::with_capacity(curve.points.len());
    let mut r = Vec::with_capacity(curve.points.len());
    for p in &curve.points {
        if !(p.rate > 0.0 && p.mse > 0.0) {
            return Err(Error::Degenerate(format!(
                "curve '{}' has a point with rate {} and mse {}",
                curve.label, p.rate, p.mse
            )));
        }
        q.push(p.quality());
        r.push(p.rate.ln());
    }
    Ok((q, r))
}

/// Bjøntegaard delta rate in percent: average log-rate difference of
/// `test` against `anchor` over their common quality range, each curve
/// modelled by a least-squares cubic. Negative values mean `test` needs
/// less rate.
pub fn bd_rate(anchor: &RdCurve, test: &RdCurve) -> Result<f64> {
    let (qa, ra) = log_rate_vs_quality(anchor)?;
    let (qt, rt) = log_rate_vs_quality(test)?;
    let span = |q: &[f64]| {
        (
            q.iter().copied().fold(f64::INFINITY, f64::min),
            q.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let (a_lo, a_hi) = span(&qa);
    let (t_lo, t_hi) = span(&qt);
    let lo = a_lo.max(t_lo);
    let hi = a_hi.min(t_hi);
    if !(hi > lo) {
        return Err(Error::InsufficientOverlap(format!(
            "quality ranges [{a_lo:.3}, {a_hi:.3}] and [{t_lo:.3}, {t_hi:.3}] do not overlap"
        )));
    }
    let fa = Cubic::fit(&qa, &ra)?;
    let ft = Cubic::fit(&qt, &rt)?;
    let avg = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
    Ok((avg.exp() - 1.0) * 100.0)
}
