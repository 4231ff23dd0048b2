use ggm_core::bounds::compute_bound;
use ggm_core::model::{mismatch, noisy_rate, rounded_rate};
use ggm_core::{Error, GgmParams};
use rayon::prelude::*;
use serde::Serialize;

use super::axis;
use crate::args::{BoundArgs, MismatchArgs};
use crate::error::CliResult;
use crate::io::emit_csv;

#[derive(Serialize)]
struct MismatchRow {
    beta: f64,
    alpha: f64,
    mu: f64,
    zero_center: bool,
    noisy: f64,
    rounded: f64,
    /// Relative mismatch; NaN when the rounded rate is below 1e-12 bits.
    delta: f64,
    /// Set when delta exceeds 1 and a heatmap would clip it.
    clipped: bool,
}

pub fn mismatch_grid(a: &MismatchArgs) -> CliResult<()> {
    let betas = axis("beta", a.beta_range, a.beta_count, false)?;
    let alphas = axis("alpha", a.alpha_range, a.alpha_count, true)?;
    let mut cells = Vec::with_capacity(a.mu.len() * betas.len() * alphas.len());
    for &mu in &a.mu {
        for &beta in &betas {
            for &alpha in &alphas {
                cells.push(GgmParams::new(mu, alpha, beta)?);
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|p| -> CliResult<MismatchRow> {
            let (noisy, rounded, delta) = match mismatch(p, a.zero_center) {
                Ok(c) => (c.noisy, c.rounded, c.delta),
                Err(Error::Degenerate(_)) => (noisy_rate(p, a.zero_center)?, rounded_rate(p, a.zero_center), f64::NAN),
                Err(e) => return Err(e.into()),
            };
            Ok(MismatchRow {
                beta: p.beta(),
                alpha: p.alpha(),
                mu: p.mu(),
                zero_center: a.zero_center,
                noisy,
                rounded,
                delta,
                clipped: delta > 1.0,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    emit_csv(a.out.as_deref(), &rows)
}

#[derive(Serialize)]
struct BoundRow {
    beta: f64,
    alpha_bound: f64,
}

pub fn bound_curve(a: &BoundArgs) -> CliResult<()> {
    let rows = axis("beta", a.beta_range, a.count, false)?
        .into_par_iter()
        .map(|beta| Ok(BoundRow { beta, alpha_bound: compute_bound(beta)? }))
        .collect::<CliResult<Vec<_>>>()?;
    emit_csv(a.out.as_deref(), &rows)
}
