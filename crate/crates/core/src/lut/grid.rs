use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::table::{take, CdfTable};
use crate::bounds::{apply_bound, BoundTable};
use crate::error::{domain, Error, Result};
use crate::model::{GgmParams, Shape, BETA_MAX, BETA_MIN};

const MAGIC: &[u8; 4] = b"GLUT";
const VERSION: u8 = 1;
const FLAG_BOUND: u8 = 1;

pub const DEFAULT_BETA_COUNT: usize = 20;
pub const DEFAULT_ALPHA_COUNT: usize = 160;
pub const DEFAULT_BETA_RANGE: (f64, f64) = (0.5, 3.0);
pub const DEFAULT_ALPHA_RANGE: (f64, f64) = (0.01, 60.0);
/// Scale range of the single-shape Gaussian grid.
pub const GAUSSIAN_ALPHA_RANGE: (f64, f64) = (0.11, 60.0);

/// `m` values `exp(ln lo + i (ln hi − ln lo)/(m − 1))`, endpoints exact.
pub fn sample_alpha_log(m: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if m < 2 || !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(domain(format!(
            "log sampling needs m >= 2 and 0 < lo < hi, got m={m}, [{lo}, {hi}]"
        )));
    }
    let (l, h) = (lo.ln(), hi.ln());
    let step = (h - l) / (m - 1) as f64;
    Ok((0..m)
        .map(|i| match i {
            0 => lo,
            i if i == m - 1 => hi,
            i => (l + step * i as f64).exp(),
        })
        .collect())
}

/// `n` linear samples on `[lo, hi]`; a single sample sits at the midpoint.
pub fn sample_beta_linear(n: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if n == 0 || !(BETA_MIN <= lo && lo <= hi && hi <= BETA_MAX) || (n > 1 && lo == hi) {
        return Err(domain(format!(
            "linear shape sampling needs n >= 1 and 0.5 <= lo <= hi <= 4 (lo < hi when n > 1), got n={n}, [{lo}, {hi}]"
        )));
    }
    if n == 1 {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

/// Sampling layout of a [`LutGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LutConfig {
    pub beta_count: usize,
    pub alpha_count: usize,
    pub beta_range: (f64, f64),
    pub alpha_range: (f64, f64),
}

impl Default for LutConfig {
    fn default() -> Self {
        Self {
            beta_count: DEFAULT_BETA_COUNT,
            alpha_count: DEFAULT_ALPHA_COUNT,
            beta_range: DEFAULT_BETA_RANGE,
            alpha_range: DEFAULT_ALPHA_RANGE,
        }
    }
}

impl LutConfig {
    pub fn new(beta_count: usize, alpha_count: usize) -> Self {
        Self {
            beta_count,
            alpha_count,
            ..Self::default()
        }
    }

    /// One shape `beta` and `alpha_count` scales.
    pub fn single_beta(beta: f64, alpha_count: usize) -> Self {
        Self {
            beta_count: 1,
            alpha_count,
            beta_range: (beta, beta),
            alpha_range: DEFAULT_ALPHA_RANGE,
        }
    }

    /// Gaussian-only grid: `β = 2`, scales on `[0.11, 60]`.
    pub fn gaussian(alpha_count: usize) -> Self {
        Self {
            alpha_range: GAUSSIAN_ALPHA_RANGE,
            ..Self::single_beta(2.0, alpha_count)
        }
    }

    pub fn table_count(&self) -> usize {
        self.beta_count * self.alpha_count
    }
}

/// A `(β, α)` sampling lattice with one [`CdfTable`] per point.
#[derive(Debug, Clone, PartialEq)]
pub struct LutGrid {
    config: LutConfig,
    bound_applied: bool,
    beta_samples: Vec<f64>,
    alpha_samples: Vec<f64>,
    log_alpha: Vec<f64>,
    /// Row-major: `tables[i * M + j]` pairs shape `i` with scale `j`.
    tables: Vec<CdfTable>,
    fingerprint: u64,
}

/// Builds every table of the lattice. With a bound table, scales at or
/// below the shape's bound are raised to it before quantizing, matching
/// the parameters a bounded model can produce.
pub fn build_lut(config: &LutConfig, bound: Option<&BoundTable>) -> Result<LutGrid> {
    let beta_samples = sample_beta_linear(config.beta_count, config.beta_range.0, config.beta_range.1)?;
    let alpha_samples = sample_alpha_log(config.alpha_count, config.alpha_range.0, config.alpha_range.1)?;
    let tables: Vec<CdfTable> = beta_samples
        .par_iter()
        .flat_map_iter(|&beta| {
            let shape = Shape::new(beta);
            alpha_samples.iter().map(move |&alpha| {
                let alpha = match bound {
                    Some(b) => {
                        let p = GgmParams::new(0.0, alpha, beta).expect("sampled parameters are valid");
                        apply_bound(&p, b).params.alpha()
                    }
                    None => alpha,
                };
                CdfTable::from_shape(&shape, alpha)
            })
        })
        .collect();
    let mut grid = LutGrid {
        config: *config,
        bound_applied: bound.is_some(),
        beta_samples,
        log_alpha: alpha_samples.iter().map(|a| a.ln()).collect(),
        alpha_samples,
        tables,
        fingerprint: 0,
    };
    grid.fingerprint = fingerprint(&grid.to_bytes());
    Ok(grid)
}

fn fingerprint(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn nearest_linear(samples: &[f64], x: f64) -> usize {
    nearest(samples.len(), |i| samples[i], x)
}

/// Index of the sample closest to `x`, ties to the lower index, ends clamped.
fn nearest(n: usize, at: impl Fn(usize) -> f64, x: f64) -> usize {
    if n == 1 || x <= at(0) {
        return 0;
    }
    if x >= at(n - 1) {
        return n - 1;
    }
    let (mut lo, mut hi) = (0, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if at(mid) <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (at(lo), at(hi));
    let frac = (x - a) / (b - a);
    if frac <= 0.5 + 1e-9 {
        lo
    } else {
        hi
    }
}

impl LutGrid {
    pub fn config(&self) -> &LutConfig {
        &self.config
    }

    pub fn bound_applied(&self) -> bool {
        self.bound_applied
    }

    pub fn beta_samples(&self) -> &[f64] {
        &self.beta_samples
    }

    pub fn alpha_samples(&self) -> &[f64] {
        &self.alpha_samples
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    pub fn tables(&self) -> &[CdfTable] {
        &self.tables
    }

    /// First eight bytes of the SHA-256 of the serialized grid.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn table(&self, beta_index: usize, alpha_index: usize) -> &CdfTable {
        &self.tables[beta_index * self.alpha_samples.len() + alpha_index]
    }

    /// Nearest shape sample by linear distance and nearest scale sample by
    /// log distance; ties go to the lower index, out-of-range values clamp.
    pub fn quantize_params(&self, params: &GgmParams) -> (usize, usize) {
        let bi = nearest_linear(&self.beta_samples, params.beta());
        let logs = &self.log_alpha;
        let ai = nearest(logs.len(), |i| logs[i], params.alpha().ln());
        (bi, ai)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let slots: usize = self.tables.iter().map(|t| t.slots()).sum();
        let mut out = Vec::with_capacity(46 + 4 * self.tables.len() + 2 * slots);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(self.config.beta_count as u16).to_le_bytes());
        out.extend_from_slice(&(self.config.alpha_count as u16).to_le_bytes());
        for v in [
            self.config.beta_range.0,
            self.config.beta_range.1,
            self.config.alpha_range.0,
            self.config.alpha_range.1,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(if self.bound_applied { FLAG_BOUND } else { 0 });
        for t in &self.tables {
            t.write(&mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        if &take::<4>(bytes, &mut pos)? != MAGIC {
            return Err(Error::Corruption("not a LUT grid file".into()));
        }
        let version = take::<1>(bytes, &mut pos)?[0];
        if version != VERSION {
            return Err(Error::Corruption(format!("unsupported LUT grid version {version}")));
        }
        let n = u16::from_le_bytes(take::<2>(bytes, &mut pos)?) as usize;
        let m = u16::from_le_bytes(take::<2>(bytes, &mut pos)?) as usize;
        let mut ranges = [0.0; 4];
        for r in &mut ranges {
            *r = f64::from_le_bytes(take::<8>(bytes, &mut pos)?);
        }
        let flags = take::<1>(bytes, &mut pos)?[0];
        let config = LutConfig {
            beta_count: n,
            alpha_count: m,
            beta_range: (ranges[0], ranges[1]),
            alpha_range: (ranges[2], ranges[3]),
        };
        let beta_samples = sample_beta_linear(n, ranges[0], ranges[1])
            .map_err(|e| Error::Corruption(format!("bad grid header: {e}")))?;
        let alpha_samples = sample_alpha_log(m, ranges[2], ranges[3])
            .map_err(|e| Error::Corruption(format!("bad grid header: {e}")))?;
        let mut tables = Vec::with_capacity(n * m);
        for _ in 0..n * m {
            tables.push(CdfTable::read(bytes, &mut pos)?);
        }
        if pos != bytes.len() {
            return Err(Error::Corruption(format!(
                "{} trailing bytes after the last table",
                bytes.len() - pos
            )));
        }
        Ok(Self {
            config,
            bound_applied: flags & FLAG_BOUND != 0,
            beta_samples,
            log_alpha: alpha_samples.iter().map(|a| a.ln()).collect(),
            alpha_samples,
            tables,
            fingerprint: fingerprint(bytes),
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
