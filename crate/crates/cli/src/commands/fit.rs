use ggm_core::fit::{
    discrete_grid_fit_hist, mle_fit, pdf_fit, FitResult, GridSpec, MagnitudeHistogram, MuMode,
};
use serde::Serialize;

use super::axis;
use crate::args::{FitArgs, FitMode, MuChoice};
use crate::error::{invalid, CliResult};
use crate::io::{emit_csv, emit_json, read_reals, SCHEMA_VERSION};

#[derive(Serialize)]
struct FitOutput<'a> {
    schema_version: u32,
    samples: usize,
    #[serde(flatten)]
    result: &'a FitResult,
}

#[derive(Serialize)]
struct GridRow {
    beta: f64,
    alpha: f64,
    bits: f64,
}

pub fn fit(a: &FitArgs) -> CliResult<()> {
    let samples = read_reals(&a.samples)?;
    if samples.is_empty() {
        return Err(invalid(format!("{} holds no samples", a.samples.display())));
    }
    let mu_mode = match a.mu_mode {
        MuChoice::Zero => MuMode::FixedZero,
        MuChoice::Mean => MuMode::SampleMean,
    };
    let result = match a.mode {
        FitMode::Mle => mle_fit(&samples, mu_mode)?,
        FitMode::R2 => pdf_fit(&samples, mu_mode, a.bins)?,
        FitMode::Grid => {
            let residuals = samples
                .iter()
                .map(|&y| {
                    (y.fract() == 0.0 && y.abs() < 9e15)
                        .then_some(y as i64)
                        .ok_or_else(|| invalid(format!("grid mode needs integer residuals, got {y}")))
                })
                .collect::<CliResult<Vec<i64>>>()?;
            if a.beta_count < 2 || a.alpha_count < 2 {
                return Err(invalid("grid mode needs at least 2 values per axis"));
            }
            let spec = GridSpec::new(
                axis("beta", a.beta_range, a.beta_count, false)?,
                axis("alpha", a.alpha_range, a.alpha_count, true)?,
            )?;
            let hist = MagnitudeHistogram::from_samples(&residuals)?;
            let (result, grid) = discrete_grid_fit_hist(&hist, &spec);
            if let Some(path) = &a.grid_out {
                let rows: Vec<GridRow> = grid
                    .beta_values
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &beta)| {
                        let row = &grid.avg_bits[i];
                        grid.alpha_values
                            .iter()
                            .zip(row)
                            .map(move |(&alpha, &bits)| GridRow { beta, alpha, bits })
                    })
                    .collect();
                emit_csv(Some(path), &rows)?;
            }
            result
        }
    };
    emit_json(
        a.out.as_deref(),
        &FitOutput {
            schema_version: SCHEMA_VERSION,
            samples: samples.len(),
            result: &result,
        },
    )
}
