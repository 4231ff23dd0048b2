//! Fitting GGM parameters to data.
//!
//! Integer residuals are fitted by minimizing the average code length over a
//! `(β, α)` lattice, optionally refined by zooming in on the best cell.
//! Real-valued samples are fitted by maximum likelihood using the closed-form
//! profile of `α` for each `β`, and scored with a histogram `r²`.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{GgmParams, Shape, BETA_MAX, BETA_MIN, LOG_FLOOR};
use crate::special::ln_gamma_unchecked;

/// Counts of `|k|` for zero-centered integer residuals. The zero-center
/// PMF is even in `k`, so magnitudes are all that matters for code length.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeHistogram {
    counts: Vec<(u64, u64)>,
    total: u64,
}

impl MagnitudeHistogram {
    pub fn from_samples(samples: &[i64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("no residual samples".into()));
        }
        let mut map = BTreeMap::new();
        for &k in samples {
            *map.entry(k.unsigned_abs()).or_insert(0u64) += 1;
        }
        Ok(Self {
            counts: map.into_iter().collect(),
            total: samples.len() as u64,
        })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_magnitude(&self) -> u64 {
        self.counts.last().map(|&(m, _)| m).unwrap_or(0)
    }
}

/// Mean code length and the number of samples whose mass hit the log floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AvgBits {
    pub bits: f64,
    pub floored: u64,
}

fn code_length(p: f64, complement: f64) -> (f64, bool) {
    if p > 0.5 {
        (-(-complement).ln_1p() / LN_2, false)
    } else {
        (-p.max(LOG_FLOOR).log2(), p <= LOG_FLOOR)
    }
}

fn avg_bits_shape(hist: &MagnitudeHistogram, shape: &Shape, alpha: f64) -> AvgBits {
    let mut bits = 0.0;
    let mut floored = 0;
    for &(m, count) in &hist.counts {
        let m = m as f64;
        let (p, c) = if m == 0.0 {
            let e = shape.edge(0.5 / alpha);
            (e.p, e.q)
        } else {
            shape.bin_mass((m - 0.5) / alpha, (m + 0.5) / alpha)
        };
        let (len, hit) = code_length(p, c);
        bits += count as f64 * len;
        if hit {
            floored += count;
        }
    }
    AvgBits {
        bits: bits / hist.total as f64,
        floored,
    }
}

/// Mean of `−log₂ pmf_zero_center(params, k)` over the residuals.
pub fn avg_bits(samples: &[i64], params: &GgmParams) -> Result<AvgBits> {
    let hist = MagnitudeHistogram::from_samples(samples)?;
    Ok(avg_bits_hist(&hist, params))
}

pub fn avg_bits_hist(hist: &MagnitudeHistogram, params: &GgmParams) -> AvgBits {
    avg_bits_shape(hist, &Shape::new(params.beta()), params.alpha())
}

/// The `(β, α)` lattice searched by [`discrete_grid_fit`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub beta_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
}

impl GridSpec {
    pub fn new(beta_values: Vec<f64>, alpha_values: Vec<f64>) -> Result<Self> {
        if beta_values.is_empty() || alpha_values.is_empty() {
            return Err(domain("grid axes must be nonempty"));
        }
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&beta_values) || !sorted(&alpha_values) {
            return Err(domain("grid axes must be strictly increasing"));
        }
        if beta_values[0] < BETA_MIN || beta_values[beta_values.len() - 1] > BETA_MAX {
            return Err(domain("grid shapes must lie in [0.5, 4]"));
        }
        if !(alpha_values[0] > 0.0 && alpha_values.iter().all(|a| a.is_finite())) {
            return Err(domain("grid scales must be positive and finite"));
        }
        Ok(Self {
            beta_values,
            alpha_values,
        })
    }

    /// `nb` linear shapes on `[b_lo, b_hi]` times `na` log-spaced scales on
    /// `[a_lo, a_hi]`; a single point on an axis takes the lower end.
    pub fn lattice(nb: usize, (b_lo, b_hi): (f64, f64), na: usize, (a_lo, a_hi): (f64, f64)) -> Result<Self> {
        if nb == 0 || na == 0 || !(a_lo > 0.0) {
            return Err(domain("lattice needs at least one point per axis and a positive scale range"));
        }
        Self::new(linspace(b_lo, b_hi, nb), logspace(a_lo, a_hi, na))
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

pub(crate) fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    linspace(l, h, n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                x.exp()
            }
        })
        .collect()
}

/// Average bits at every lattice point; `avg_bits[i][j]` pairs
/// `beta_values[i]` with `alpha_values[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitGrid {
    pub beta_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub avg_bits: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    DiscreteGrid,
    Mle,
    PdfR2,
}

/// Fitted parameters. `objective` is the average bits per sample for
/// [`FitMethod::DiscreteGrid`], the mean log-likelihood per sample (nats)
/// for [`FitMethod::Mle`] and `r²` for [`FitMethod::PdfR2`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub params: GgmParams,
    pub objective: f64,
    pub method: FitMethod,
}

pub fn evaluate_grid(hist: &MagnitudeHistogram, spec: &GridSpec) -> FitGrid {
    let avg_bits = spec
        .beta_values
        .par_iter()
        .map(|&beta| {
            let shape = Shape::new(beta);
            spec.alpha_values
                .iter()
                .map(|&alpha| avg_bits_shape(hist, &shape, alpha).bits)
                .collect()
        })
        .collect();
    FitGrid {
        beta_values: spec.beta_values.clone(),
        alpha_values: spec.alpha_values.clone(),
        avg_bits,
    }
}

impl FitGrid {
    /// Index of the minimum, ties going to the smaller shape, then the
    /// smaller scale.
    pub fn argmin(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_bits = f64::INFINITY;
        for (i, row) in self.avg_bits.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                if b < best_bits {
                    best_bits = b;
                    best = (i, j);
                }
            }
        }
        best
    }

    fn result_at(&self, (i, j): (usize, usize)) -> FitResult {
        FitResult {
            params: GgmParams::new(0.0, self.alpha_values[j], self.beta_values[i])
                .expect("grid values were validated"),
            objective: self.avg_bits[i][j],
            method: FitMethod::DiscreteGrid,
        }
    }
}

/// Lattice point with the lowest average bits.
pub fn discrete_grid_fit(samples: &[i64], spec: &GridSpec) -> Result<FitResult> {
    let hist = MagnitudeHistogram::from_samples(samples)?;
    Ok(discrete_grid_fit_hist(&hist, spec).0)
}

pub fn discrete_grid_fit_hist(hist: &MagnitudeHistogram, spec: &GridSpec) -> (FitResult, FitGrid) {
    let grid = evaluate_grid(hist, spec);
    (grid.result_at(grid.argmin()), grid)
}

/// Grid fit followed by `rounds` zooms: each round lays a `points × points`
/// lattice across the neighbours of the current best cell (linear in `β`,
/// logarithmic in `α`). The returned point is never worse than the
/// initial lattice optimum.
pub fn refine_grid_fit(
    hist: &MagnitudeHistogram,
    spec: &GridSpec,
    rounds: usize,
    points: usize,
) -> Result<FitResult> {
    let (mut best, grid) = discrete_grid_fit_hist(hist, spec);
    let (i, j) = grid.argmin();
    let neighbours = |v: &[f64], idx: usize| (v[idx.saturating_sub(1)], v[(idx + 1).min(v.len() - 1)]);
    let (mut b_span, mut a_span) = (
        neighbours(&spec.beta_values, i),
        neighbours(&spec.alpha_values, j),
    );
    for _ in 0..rounds {
        let nb = if b_span.0 < b_span.1 { points } else { 1 };
        let na = if a_span.0 < a_span.1 { points } else { 1 };
        let zoom = GridSpec::lattice(nb, b_span, na, a_span)?;
        let (cand, g) = discrete_grid_fit_hist(hist, &zoom);
        if cand.objective < best.objective {
            best = cand;
        }
        let (i, j) = g.argmin();
        b_span = neighbours(&zoom.beta_values, i);
        a_span = neighbours(&zoom.alpha_values, j);
    }
    Ok(best)
}

/// How the location is chosen for continuous fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    FixedZero,
    SampleMean,
}

/// Deviations `|y − μ|` divided by their maximum, plus that maximum.
struct Deviations {
    scaled: Vec<f64>,
    max: f64,
    mu: f64,
}

impl Deviations {
    fn new(samples: &[f64], mu_mode: MuMode) -> Result<Self> {
        if samples.len() < 10 {
            return Err(domain(format!("maximum-likelihood fit needs at least 10 samples, got {}", samples.len())));
        }
        if samples.iter().any(|y| !y.is_finite()) {
            return Err(domain("samples must be finite"));
        }
        let first = samples[0];
        if samples.iter().all(|&y| y == first) {
            return Err(Error::Degenerate("all samples are equal".into()));
        }
        let mu = match mu_mode {
            MuMode::FixedZero => 0.0,
            MuMode::SampleMean => samples.iter().sum::<f64>() / samples.len() as f64,
        };
        let max = samples.iter().map(|y| (y - mu).abs()).fold(0.0, f64::max);
        Ok(Self {
            scaled: samples.iter().map(|y| (y - mu).abs() / max).collect(),
            max,
            mu,
        })
    }

    /// `α̂(β) = ((β/n) Σ|y − μ|^β)^{1/β}`.
    fn alpha_hat(&self, beta: f64) -> f64 {
        let n = self.scaled.len() as f64;
        let s: f64 = self.scaled.iter().map(|d| d.powf(beta)).sum();
        self.max * (beta * s / n).powf(1.0 / beta)
    }

    /// Mean log-likelihood at `(β, α̂(β))`.
    fn profile(&self, beta: f64) -> (f64, f64) {
        let alpha = self.alpha_hat(beta);
        let ll = (beta / 2.0).ln() - ln_gamma_unchecked(1.0 / beta) - alpha.ln() - 1.0 / beta;
        (ll, alpha)
    }
}

/// Mean log-likelihood per sample of `params`.
pub fn mean_log_likelihood(samples: &[f64], params: &GgmParams) -> f64 {
    let b = params.beta();
    let norm = (b / 2.0).ln() - ln_gamma_unchecked(1.0 / b) - params.alpha().ln();
    let s: f64 = samples
        .iter()
        .map(|y| ((y - params.mu()).abs() / params.alpha()).powf(b))
        .sum();
    norm - s / samples.len() as f64
}

const MLE_SCAN: usize = 36;
const GOLDEN_TOL: f64 = 1e-4;

/// Maximum-likelihood fit with `β` searched over `[0.5, 4]`.
pub fn mle_fit(samples: &[f64], mu_mode: MuMode) -> Result<FitResult> {
    let dev = Deviations::new(samples, mu_mode)?;
    let betas = linspace(BETA_MIN, BETA_MAX, MLE_SCAN);
    let scan: Vec<f64> = betas.iter().map(|&b| dev.profile(b).0).collect();
    let best = (0..MLE_SCAN)
        .max_by(|&a, &b| scan[a].total_cmp(&scan[b]).then(b.cmp(&a)))
        .expect("scan is nonempty");
    let lo = betas[best.saturating_sub(1)];
    let hi = betas[(best + 1).min(MLE_SCAN - 1)];
    let inner = golden_max(|b| dev.profile(b).0, lo, hi, GOLDEN_TOL);

    let mut beta = inner;
    let mut ll = dev.profile(inner).0;
    for end in [BETA_MIN, BETA_MAX] {
        let v = dev.profile(end).0;
        if v > ll {
            beta = end;
            ll = v;
        }
    }
    let alpha = dev.alpha_hat(beta);
    Ok(FitResult {
        params: GgmParams::new(dev.mu, alpha, beta)?,
        objective: ll,
        method: FitMethod::Mle,
    })
}

/// Maximum-likelihood scale for a fixed shape, e.g. `β = 2` for a Gaussian fit.
pub fn mle_fit_fixed_beta(samples: &[f64], mu_mode: MuMode, beta: f64) -> Result<FitResult> {
    let dev = Deviations::new(samples, mu_mode)?;
    GgmParams::new(0.0, 1.0, beta)?;
    let (ll, alpha) = dev.profile(beta);
    Ok(FitResult {
        params: GgmParams::new(dev.mu, alpha, beta)?,
        objective: ll,
        method: FitMethod::Mle,
    })
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub const MIN_BINS: usize = 8;
pub const MAX_BINS: usize = 512;

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Freedman–Diaconis bin count over the sample range, clipped to `[8, 512]`.
pub fn freedman_diaconis_bins(samples: &[f64]) -> usize {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[sorted.len() - 1] - sorted[0];
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
    if !(width > 0.0) || !(range > 0.0) {
        return MIN_BINS;
    }
    ((range / width).ceil() as usize).clamp(MIN_BINS, MAX_BINS)
}

/// Coefficient of determination between a density-normalized histogram of
/// `samples` and the model density at the bin centers. `bins = None` picks
/// the Freedman–Diaconis count.
pub fn r_squared(samples: &[f64], params: &GgmParams, bins: Option<usize>) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples to score".into()));
    }
    if samples.iter().any(|y| !y.is_finite()) {
        return Err(domain("samples must be finite"));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Err(Error::Degenerate("sample range is a single point".into()));
    }
    let bins = match bins {
        Some(b) if b < MIN_BINS => {
            return Err(domain(format!("r² needs at least {MIN_BINS} bins, got {b}")))
        }
        Some(b) => b,
        None => freedman_diaconis_bins(samples),
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &y in samples {
        let idx = (((y - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = samples.len() as f64;
    let heights: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let mean = heights.iter().sum::<f64>() / bins as f64;
    let shape = Shape::new(params.beta());
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (i, &h) in heights.iter().enumerate() {
        let center = lo + (i as f64 + 0.5) * width;
        let model = shape.pdf((center - params.mu()) / params.alpha()) / params.alpha();
        ss_res += (h - model).powi(2);
        ss_tot += (h - mean).powi(2);
    }
    if ss_tot == 0.0 {
        return Err(Error::Degenerate("histogram is flat".into()));
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// Maximum-likelihood fit scored by `r²`.
pub fn pdf_fit(samples: &[f64], mu_mode: MuMode, bins: Option<usize>) -> Result<FitResult> {
    let mle = mle_fit(samples, mu_mode)?;
    Ok(FitResult {
        params: mle.params,
        objective: r_squared(samples, &mle.params, bins)?,
        method: FitMethod::PdfR2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avg_bits_of_certain_symbol() {
        let p = GgmParams::new(0.0, 1e-3, 2.0).unwrap();
        let b = avg_bits(&[0; 100], &p).unwrap();
        assert!(b.bits < 1e-12 && b.bits >= 0.0);
        assert!(matches!(avg_bits(&[], &p), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn floored_samples_are_counted() {
        let p = GgmParams::new(0.0, 0.01, 2.0).unwrap();
        let b = avg_bits(&[0, 0, 9, -9], &p).unwrap();
        assert_eq!(b.floored, 2);
        assert!(b.bits.is_finite());
    }

    #[test]
    fn degenerate_data_breaks_ties_toward_small_shape_then_scale() {
        let spec = GridSpec::new(vec![0.5, 1.0, 2.0], vec![0.001, 0.002, 1.0]).unwrap();
        let r = discrete_grid_fit(&[0; 50], &spec).unwrap();
        // Every small-scale point codes 0 in ~0 bits; the first encountered wins.
        assert!(r.objective < 1e-12);
        assert_eq!(r.params.alpha(), 0.001);
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(vec![2.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(GridSpec::new(vec![0.4, 1.0], vec![1.0, 2.0]).is_err());
        assert!(GridSpec::new(vec![1.0, 2.0], vec![0.0, 2.0]).is_err());
        assert!(GridSpec::new(vec![], vec![1.0]).is_err());
    }

    #[test]
    fn spacing_helpers() {
        assert_eq!(linspace(0.5, 4.0, 2), vec![0.5, 4.0]);
        let l = logspace(0.01, 60.0, 5);
        assert_eq!((l[0], l[4]), (0.01, 60.0));
        assert!((l[2] - (0.01f64 * 60.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mle_rejects_bad_input() {
        assert!(mle_fit(&[1.0; 5], MuMode::FixedZero).is_err());
        assert!(matches!(mle_fit(&[1.0; 20], MuMode::FixedZero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn two_point_data_pushes_shape_to_the_top() {
        let s: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.5 } else { -1.5 }).collect();
        let r = mle_fit(&s, MuMode::FixedZero).unwrap();
        assert_eq!(r.params.beta(), BETA_MAX);
    }

    #[test]
    fn r_squared_errors() {
        let p = GgmParams::new(0.0, 1.0, 2.0).unwrap();
        assert!(matches!(r_squared(&[1.0; 10], &p, None), Err(Error::Degenerate(_))));
        assert!(r_squared(&[0.0, 1.0], &p, Some(4)).is_err());
        assert!(matches!(r_squared(&[], &p, None), Err(Error::EmptyInput(_))));
    }
}
