use ggm_core::bounds::{BoundTable, DEFAULT_KNOTS};
use ggm_core::lut::{build_lut, decode as decode_stream, encode as encode_stream, stream_estimated_bits};
use ggm_core::lut::{Bitstream, LutConfig, LutGrid, ParamStream};
use serde::Serialize;

use crate::args::{DecodeArgs, EncodeArgs, LutArgs};
use crate::error::{invalid, io_at, CliResult};
use crate::io::{emit_json, read_bytes, read_params, read_symbols, write_symbols, SCHEMA_VERSION};

#[derive(Serialize)]
struct LutSummary {
    schema_version: u32,
    beta_samples: usize,
    alpha_samples: usize,
    tables: usize,
    bytes: usize,
    bound_applied: bool,
    fingerprint: String,
}

pub fn lut(a: &LutArgs) -> CliResult<()> {
    if a.beta_samples == 0 || a.alpha_samples < 2 {
        return Err(invalid("a LUT grid needs at least 1 shape and 2 scale samples"));
    }
    if a.beta_samples > u16::MAX as usize || a.alpha_samples > u16::MAX as usize {
        return Err(invalid("sample counts must fit in 16 bits"));
    }
    let config = LutConfig {
        beta_count: a.beta_samples,
        alpha_count: a.alpha_samples,
        beta_range: (a.beta_range.0, a.beta_range.1),
        alpha_range: (a.alpha_range.0, a.alpha_range.1),
    };
    let bound = if a.no_bound { None } else { Some(BoundTable::build(DEFAULT_KNOTS)?) };
    let grid = build_lut(&config, bound.as_ref())?;
    let bytes = grid.to_bytes();
    std::fs::write(&a.grid_out, &bytes).map_err(io_at(&a.grid_out))?;
    emit_json(
        None,
        &LutSummary {
            schema_version: SCHEMA_VERSION,
            beta_samples: a.beta_samples,
            alpha_samples: a.alpha_samples,
            tables: grid.table_count(),
            bytes: bytes.len(),
            bound_applied: grid.bound_applied(),
            fingerprint: format!("{:016x}", grid.fingerprint()),
        },
    )
}

fn load_grid(path: &std::path::Path) -> CliResult<LutGrid> {
    Ok(LutGrid::from_bytes(&read_bytes(path)?)?)
}

#[derive(Serialize)]
struct EncodeReport {
    schema_version: u32,
    symbols: usize,
    escaped: usize,
    bytes: usize,
    actual_bits: u64,
    estimated_bits: f64,
    bits_per_symbol: f64,
}

pub fn encode(a: &EncodeArgs) -> CliResult<()> {
    let grid = load_grid(&a.grid)?;
    let params = read_params(&a.params_file)?;
    let symbols = read_symbols(&a.symbols)?;
    let pstream = ParamStream::quantize(&params, &grid);
    let bits = encode_stream(&symbols, &pstream, &grid)?;
    let estimated = stream_estimated_bits(&symbols, &pstream, &grid)?;
    let escaped = symbols
        .iter()
        .zip(&pstream.indices)
        .filter(|(&s, &(b, a))| grid.table(b as usize, a as usize).slot_of(s).is_none())
        .count();
    let bytes = bits.to_bytes();
    std::fs::write(&a.out, &bytes).map_err(io_at(&a.out))?;
    emit_json(
        None,
        &EncodeReport {
            schema_version: SCHEMA_VERSION,
            symbols: symbols.len(),
            escaped,
            bytes: bytes.len(),
            actual_bits: 8 * bytes.len() as u64,
            estimated_bits: estimated,
            bits_per_symbol: if symbols.is_empty() { 0.0 } else { 8.0 * bytes.len() as f64 / symbols.len() as f64 },
        },
    )
}

pub fn decode(a: &DecodeArgs) -> CliResult<()> {
    let grid = load_grid(&a.grid)?;
    let params = read_params(&a.params_file)?;
    let bits = Bitstream::from_bytes(&read_bytes(&a.input)?)?;
    let pstream = ParamStream::quantize(&params, &grid);
    let symbols = decode_stream(&bits, &pstream, &grid)?;
    write_symbols(a.out.as_deref(), &symbols)
}
