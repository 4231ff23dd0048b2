use ggm_core::sim::{bd_rate, run_rd_both, ModelKind, RdCurve, Source2dSpec};
use serde::Serialize;

use super::axis;
use crate::args::{RdArgs, SourceName};
use crate::error::{invalid, CliError, CliResult};
use crate::io::{emit_csv, emit_json, read_text, SCHEMA_VERSION};

#[derive(Serialize)]
struct CurveRow<'a> {
    model: &'a str,
    rate: f64,
    mse: f64,
    quality: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    source: String,
    samples: usize,
    seed: u64,
    steps: &'a [f64],
    /// GGM relative to GM; negative means GGM saves rate.
    bd_rate_percent: f64,
    curves: &'a [RdCurve],
}

pub fn rd_sim(a: &RdArgs) -> CliResult<()> {
    let (name, spec) = match (&a.source, &a.spec_file) {
        (Some(s), _) => {
            let spec = match s {
                SourceName::X1 => Source2dSpec::x1(),
                SourceName::X2 => Source2dSpec::x2(),
                SourceName::X3 => Source2dSpec::x3(),
            };
            (format!("{s:?}").to_lowercase(), spec)
        }
        (None, Some(path)) => {
            let spec: Source2dSpec = serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Json {
                path: path.clone(),
                source,
            })?;
            (path.display().to_string(), spec)
        }
        (None, None) => return Err(invalid("either --source or --spec-file is required")),
    };
    if a.samples == 0 {
        return Err(invalid("--samples must be at least 1"));
    }
    if a.steps < 4 {
        return Err(invalid("BD-rate needs at least 4 quantizer steps"));
    }
    let mut steps = axis("step", a.step_range, a.steps, true)?;
    steps.reverse();
    let curves = run_rd_both(&spec, &steps, a.samples, a.seed, &[ModelKind::Gm, ModelKind::Ggm])?;
    let bd = bd_rate(&curves[0], &curves[1])?;

    if let Some(path) = &a.curves {
        let rows: Vec<CurveRow> = curves
            .iter()
            .flat_map(|c| {
                c.points.iter().map(|p| CurveRow {
                    model: &c.label,
                    rate: p.rate,
                    mse: p.mse,
                    quality: p.quality(),
                })
            })
            .collect();
        emit_csv(Some(path), &rows)?;
    }
    emit_json(
        a.summary.as_deref(),
        &Summary {
            schema_version: SCHEMA_VERSION,
            source: name,
            samples: a.samples,
            seed: a.seed,
            steps: &steps,
            bd_rate_percent: bd,
            curves: &curves,
        },
    )
}
