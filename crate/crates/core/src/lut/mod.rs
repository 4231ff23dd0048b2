//! Table-driven entropy coding of zero-centered residuals.
//!
//! A [`LutGrid`] holds one integer CDF per sampled `(β, α)` pair. Each
//! symbol is coded with the table its parameters quantize to; symbols
//! outside a table's support take the escape slot and are then written to
//! a raw bit section as a sign bit plus an Exp-Golomb magnitude.

mod grid;
mod range_coder;
mod table;

use std::path::Path;

pub use grid::{
    build_lut, sample_alpha_log, sample_beta_linear, LutConfig, LutGrid, DEFAULT_ALPHA_COUNT,
    DEFAULT_ALPHA_RANGE, DEFAULT_BETA_COUNT, DEFAULT_BETA_RANGE, GAUSSIAN_ALPHA_RANGE,
};
pub use range_coder::{exp_golomb_len, BitReader, BitWriter, RangeDecoder, RangeEncoder};
pub use table::{CdfTable, MAX_HALF_WIDTH, MAX_SLOTS, PRECISION_BITS, TOTAL_FREQ};

use crate::error::{domain, Error, Result};
use crate::model::GgmParams;
use table::take;

const MAGIC: &[u8; 4] = b"GGM1";
pub const BITSTREAM_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 8 + 8 + 8;

/// Per-symbol table indices and locations, shared by encoder and decoder.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStream {
    pub indices: Vec<(u16, u16)>,
    pub mus: Vec<f64>,
}

impl ParamStream {
    /// Quantizes each parameter triple to its nearest grid table.
    pub fn quantize(params: &[GgmParams], grid: &LutGrid) -> Self {
        let indices = params
            .iter()
            .map(|p| {
                let (b, a) = grid.quantize_params(p);
                (b as u16, a as u16)
            })
            .collect();
        Self {
            indices,
            mus: params.iter().map(|p| p.mu()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn check(&self, grid: &LutGrid, symbols: usize) -> Result<()> {
        if self.indices.len() != symbols {
            return Err(Error::LengthMismatch {
                what: "symbols vs parameter stream",
                left: symbols,
                right: self.indices.len(),
            });
        }
        if !self.mus.is_empty() && self.mus.len() != self.indices.len() {
            return Err(Error::LengthMismatch {
                what: "indices vs locations",
                left: self.indices.len(),
                right: self.mus.len(),
            });
        }
        let (n, m) = (grid.beta_samples().len(), grid.alpha_samples().len());
        if let Some(&(b, a)) = self
            .indices
            .iter()
            .find(|&&(b, a)| b as usize >= n || a as usize >= m)
        {
            return Err(domain(format!("table index ({b}, {a}) outside a {n}x{m} grid")));
        }
        Ok(())
    }

    fn table<'g>(&self, grid: &'g LutGrid, i: usize) -> &'g CdfTable {
        let (b, a) = self.indices[i];
        grid.table(b as usize, a as usize)
    }
}

/// Coded symbols plus the header needed to validate a decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    pub symbol_count: u64,
    /// Fingerprint of the grid the stream was coded with.
    pub grid_fingerprint: u64,
    pub payload: Vec<u8>,
    pub bypass: Vec<u8>,
}

impl Bitstream {
    pub fn len_bytes(&self) -> usize {
        HEADER_LEN + self.payload.len() + self.bypass.len()
    }

    /// `"GGM1" | version | count u64 | grid fingerprint u64 | payload length
    /// u64 | payload | bypass`, little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len_bytes());
        out.extend_from_slice(MAGIC);
        out.push(BITSTREAM_VERSION);
        out.extend_from_slice(&self.symbol_count.to_le_bytes());
        out.extend_from_slice(&self.grid_fingerprint.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.bypass);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        if &take::<4>(bytes, &mut pos)? != MAGIC {
            return Err(Error::Corruption("not a GGM1 bitstream".into()));
        }
        let version = take::<1>(bytes, &mut pos)?[0];
        if version != BITSTREAM_VERSION {
            return Err(Error::Corruption(format!("unsupported bitstream version {version}")));
        }
        let symbol_count = u64::from_le_bytes(take::<8>(bytes, &mut pos)?);
        let grid_fingerprint = u64::from_le_bytes(take::<8>(bytes, &mut pos)?);
        let payload_len = u64::from_le_bytes(take::<8>(bytes, &mut pos)?);
        let rest = &bytes[pos..];
        if payload_len > rest.len() as u64 {
            return Err(Error::Corruption(format!(
                "payload of {payload_len} bytes announced, {} present",
                rest.len()
            )));
        }
        let (payload, bypass) = rest.split_at(payload_len as usize);
        Ok(Self {
            symbol_count,
            grid_fingerprint,
            payload: payload.to_vec(),
            bypass: bypass.to_vec(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Range-codes `symbols`, each with the table selected by `pstream`.
pub fn encode(symbols: &[i64], pstream: &ParamStream, grid: &LutGrid) -> Result<Bitstream> {
    pstream.check(grid, symbols.len())?;
    let mut enc = RangeEncoder::new();
    let mut bypass = BitWriter::default();
    for (i, &s) in symbols.iter().enumerate() {
        let table = pstream.table(grid, i);
        match table.slot_of(s) {
            Some(slot) => {
                let (start, size) = table.range(slot);
                enc.encode(start, size);
            }
            None => {
                let (start, size) = table.range(table.escape_slot());
                enc.encode(start, size);
                bypass.push(s < 0);
                bypass.push_exp_golomb(s.unsigned_abs() - table.half_width() as u64 - 1);
            }
        }
    }
    Ok(Bitstream {
        symbol_count: symbols.len() as u64,
        grid_fingerprint: grid.fingerprint(),
        payload: enc.finish(),
        bypass: bypass.finish(),
    })
}

/// Inverse of [`encode`] given the same parameter stream and grid.
pub fn decode(bits: &Bitstream, pstream: &ParamStream, grid: &LutGrid) -> Result<Vec<i64>> {
    if bits.grid_fingerprint != grid.fingerprint() {
        return Err(Error::Corruption(format!(
            "bitstream was coded with grid {:016x}, decoder has {:016x}",
            bits.grid_fingerprint,
            grid.fingerprint()
        )));
    }
    let count = usize::try_from(bits.symbol_count)
        .map_err(|_| Error::Corruption("symbol count exceeds address space".into()))?;
    if count != pstream.len() {
        return Err(Error::LengthMismatch {
            what: "bitstream symbols vs parameter stream",
            left: count,
            right: pstream.len(),
        });
    }
    pstream.check(grid, count)?;
    let mut dec = RangeDecoder::new(&bits.payload)?;
    let mut raw = BitReader::new(&bits.bypass);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let table = pstream.table(grid, i);
        let slot = table.find(dec.target()?);
        let (start, size) = table.range(slot);
        dec.consume(start, size)?;
        if slot == table.escape_slot() {
            let negative = raw.bit()?;
            let excess = raw.exp_golomb()?;
            let mag = excess
                .checked_add(table.half_width() as u64 + 1)
                .filter(|&m| m <= i64::MAX as u64 + negative as u64)
                .ok_or_else(|| Error::Corruption("escaped magnitude out of range".into()))?;
            out.push(if negative {
                (mag as i128).wrapping_neg() as i64
            } else {
                mag as i64
            });
        } else {
            out.push(table.symbol_of(slot));
        }
    }
    if !dec.exhausted() {
        return Err(Error::Corruption("payload has unread bytes".into()));
    }
    if raw.bits_read().div_ceil(8) != bits.bypass.len() {
        return Err(Error::Corruption("bypass section has unread bytes".into()));
    }
    Ok(out)
}

/// Ideal code length in bits under the quantized tables, counting escaped
/// symbols' raw bits.
pub fn stream_estimated_bits(symbols: &[i64], pstream: &ParamStream, grid: &LutGrid) -> Result<f64> {
    pstream.check(grid, symbols.len())?;
    let mut bits = 0.0;
    for (i, &s) in symbols.iter().enumerate() {
        let table = pstream.table(grid, i);
        let slot = table.slot_of(s).unwrap_or(table.escape_slot());
        bits -= table.prob(slot).log2();
        if slot == table.escape_slot() {
            bits += 1.0 + exp_golomb_len(s.unsigned_abs() - table.half_width() as u64 - 1) as f64;
        }
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_grid() -> LutGrid {
        build_lut(&LutConfig::new(4, 12), None).unwrap()
    }

    fn random_stream(grid: &LutGrid, n: usize, seed: u64) -> (Vec<i64>, ParamStream) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nb = grid.beta_samples().len() as u16;
        let na = grid.alpha_samples().len() as u16;
        let indices: Vec<(u16, u16)> = (0..n)
            .map(|_| (rng.random_range(0..nb), rng.random_range(0..na)))
            .collect();
        let symbols = indices
            .iter()
            .map(|&(b, a)| {
                let t = grid.table(b as usize, a as usize);
                let slot = t.find(rng.random_range(0..TOTAL_FREQ));
                if slot == t.escape_slot() {
                    let k = t.half_width() as i64 + 1 + rng.random_range(0..1000);
                    if rng.random() { k } else { -k }
                } else {
                    t.symbol_of(slot)
                }
            })
            .collect();
        (symbols, ParamStream { indices, mus: vec![] })
    }

    #[test]
    fn empty_stream() {
        let grid = small_grid();
        let bits = encode(&[], &ParamStream::default(), &grid).unwrap();
        assert_eq!(bits.symbol_count, 0);
        let parsed = Bitstream::from_bytes(&bits.to_bytes()).unwrap();
        assert_eq!(decode(&parsed, &ParamStream::default(), &grid).unwrap(), Vec::<i64>::new());
    }

    #[test]
    fn round_trip_with_escapes() {
        let grid = small_grid();
        let (mut symbols, mut ps) = random_stream(&grid, 20_000, 7);
        symbols.extend([1_000_000, -1_000_000, i64::MAX, i64::MIN]);
        ps.indices.extend([(0, 0), (3, 11), (1, 5), (2, 2)]);
        let bits = encode(&symbols, &ps, &grid).unwrap();
        let parsed = Bitstream::from_bytes(&bits.to_bytes()).unwrap();
        assert_eq!(decode(&parsed, &ps, &grid).unwrap(), symbols);
    }

    #[test]
    fn length_and_index_checks() {
        let grid = small_grid();
        let ps = ParamStream { indices: vec![(0, 0)], mus: vec![] };
        assert!(matches!(encode(&[1, 2], &ps, &grid), Err(Error::LengthMismatch { .. })));
        let bad = ParamStream { indices: vec![(9, 0)], mus: vec![] };
        assert!(matches!(encode(&[1], &bad, &grid), Err(Error::Domain(_))));
    }

    #[test]
    fn corruption_is_reported() {
        let grid = small_grid();
        let (symbols, ps) = random_stream(&grid, 5000, 3);
        let bytes = encode(&symbols, &ps, &grid).unwrap().to_bytes();
        assert!(matches!(Bitstream::from_bytes(&bytes[..bytes.len() / 2]), Err(Error::Corruption(_))));

        let other = build_lut(&LutConfig::new(4, 13), None).unwrap();
        let parsed = Bitstream::from_bytes(&bytes).unwrap();
        let other_ps = ParamStream { indices: ps.indices.clone(), mus: vec![] };
        assert!(matches!(decode(&parsed, &other_ps, &other), Err(Error::Corruption(_))));

        let mut wrong_version = bytes.clone();
        wrong_version[4] = 2;
        assert!(matches!(Bitstream::from_bytes(&wrong_version), Err(Error::Corruption(_))));
    }

    #[test]
    fn estimated_bits_track_actual_size() {
        let grid = small_grid();
        let (symbols, ps) = random_stream(&grid, 100_000, 11);
        let est = stream_estimated_bits(&symbols, &ps, &grid).unwrap();
        let actual = 8.0 * encode(&symbols, &ps, &grid).unwrap().len_bytes() as f64;
        assert!(actual <= est * 1.01 + 512.0, "{actual} vs {est}");
    }
}
