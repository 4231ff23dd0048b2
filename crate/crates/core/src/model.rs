//! The generalized Gaussian model `N_β(μ, α^β)`: density, CDF, quantized
//! probability masses, discrete and noisy rates, and parameter derivatives.
//!
//! Everything here reduces to the standard form `u = (y − μ)/α` and the
//! shape-only quantities collected in [`Shape`]. Masses of bins that lie
//! entirely on one side of the mode are computed from upper incomplete
//! gamma tails so that they keep relative precision far from the center.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::special::{digamma_unchecked, dp_dr_unchecked, gamma_pq, ln_gamma_unchecked};

pub const BETA_MIN: f64 = 0.5;
pub const BETA_MAX: f64 = 4.0;

/// Support truncation: stop once the two-sided tail drops below this.
pub const TAIL_EPS: f64 = 1e-12;
/// Tail cut for entropy sums; tighter than [`TAIL_EPS`] because a dropped
/// tail of mass `t` carries about `t·log₂(1/t)` bits.
const RATE_TAIL_EPS: f64 = 1e-17;
/// Hard cap on the half-width of a truncated support.
pub const MAX_HALF_SUPPORT: i64 = 1_000_000;
/// Floor applied to probabilities inside logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

/// Location `mu`, scale `alpha > 0` and shape `beta ∈ [0.5, 4]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GgmParams {
    mu: f64,
    alpha: f64,
    beta: f64,
}

impl GgmParams {
    pub fn new(mu: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(domain(format!("mu must be finite, got {mu}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(domain(format!("alpha must be finite and > 0, got {alpha}")));
        }
        if !(BETA_MIN..=BETA_MAX).contains(&beta) {
            return Err(domain(format!("beta must lie in [0.5, 4], got {beta}")));
        }
        Ok(Self { mu, alpha, beta })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        Self::new(mu, self.alpha, self.beta)
    }
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.mu, alpha, self.beta)
    }
    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.mu, self.alpha, beta)
    }

    fn standardize(&self, y: f64) -> f64 {
        (y - self.mu) / self.alpha
    }
}

/// Shape-only constants of the standard density `β/(2Γ(1/β)) e^{-|u|^β}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shape {
    pub beta: f64,
    pub r: f64,
    pub ln_gamma_r: f64,
    pub psi_r: f64,
    pub peak: f64,
}

/// `P` and `Q` of `(1/β, |e|^β)` for one bin edge `e`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Edge {
    pub u: f64,
    pub p: f64,
    pub q: f64,
}

impl Shape {
    pub fn new(beta: f64) -> Self {
        let r = 1.0 / beta;
        let ln_gamma_r = ln_gamma_unchecked(r);
        Self {
            beta,
            r,
            ln_gamma_r,
            psi_r: digamma_unchecked(r),
            peak: beta / 2.0 * (-ln_gamma_r).exp(),
        }
    }

    pub fn pdf(&self, u: f64) -> f64 {
        self.peak * (-u.abs().powf(self.beta)).exp()
    }

    pub fn edge(&self, u: f64) -> Edge {
        if u.is_infinite() {
            return Edge { u, p: 1.0, q: 0.0 };
        }
        let (p, q, _) = gamma_pq(self.r, u.abs().powf(self.beta), self.ln_gamma_r);
        Edge { u, p, q }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        let e = self.edge(u);
        if u < 0.0 {
            0.5 * e.q
        } else {
            1.0 - 0.5 * e.q
        }
    }

    /// Mass of `[lo, hi]` and its complement `1 − mass`, both accurate.
    pub fn mass(&self, lo: &Edge, hi: &Edge) -> (f64, f64) {
        if lo.u >= 0.0 || hi.u <= 0.0 {
            let (near, far) = if lo.u >= 0.0 { (lo, hi) } else { (hi, lo) };
            let m = if near.q < 0.5 {
                0.5 * (near.q - far.q)
            } else {
                0.5 * (far.p - near.p)
            };
            let m = m.max(0.0);
            (m, 1.0 - m)
        } else {
            (0.5 * (lo.p + hi.p), 0.5 * (lo.q + hi.q))
        }
    }

    pub fn bin_mass(&self, lo: f64, hi: f64) -> (f64, f64) {
        self.mass(&self.edge(lo), &self.edge(hi))
    }

    /// `∂c_β(u)/∂β` at fixed standardized `u`; zero at `u = 0`.
    pub fn dcdf_dbeta(&self, u: f64) -> f64 {
        if u == 0.0 || u.is_infinite() {
            return 0.0;
        }
        let a = u.abs();
        let z = a.powf(self.beta);
        let dp = dp_dr_unchecked(self.r, z, self.ln_gamma_r, self.psi_r).value;
        let dz_term = (self.r * z.ln() - z - self.ln_gamma_r).exp() * a.ln();
        u.signum() * 0.5 * (-dp / (self.beta * self.beta) + dz_term)
    }
}

/// `−p log₂ p`, using the complement when `p` is close to one.
pub(crate) fn entropy_term(p: f64, complement: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else if p > 0.5 {
        -p * (-complement).ln_1p() / LN_2
    } else {
        -p * p.max(LOG_FLOOR).log2()
    }
}

fn shape_of(params: &GgmParams) -> Shape {
    Shape::new(params.beta)
}

/// Probability density at `y`.
pub fn pdf(params: &GgmParams, y: f64) -> f64 {
    shape_of(params).pdf(params.standardize(y)) / params.alpha
}

/// Cumulative distribution `½ + sgn(u)/2 · P(1/β, |u|^β)`.
pub fn cdf(params: &GgmParams, y: f64) -> f64 {
    shape_of(params).cdf(params.standardize(y))
}

/// Mass of the zero-centered bin of residual `k = ⌊y − μ⌉`.
pub fn pmf_zero_center(params: &GgmParams, k: i64) -> f64 {
    let s = shape_of(params);
    let k = k as f64;
    s.bin_mass((k - 0.5) / params.alpha, (k + 0.5) / params.alpha).0
}

/// Mass of integer bin `k` under plain rounding `ŷ = ⌊y⌉`.
pub fn pmf_integer_grid(params: &GgmParams, k: i64) -> f64 {
    let s = shape_of(params);
    let k = k as f64;
    s.bin_mass(
        params.standardize(k - 0.5),
        params.standardize(k + 0.5),
    )
    .0
}

/// Probability masses over a truncated integer support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedPmf {
    /// Symbol of `probs[0]`.
    pub offset: i64,
    pub probs: Vec<f64>,
    /// Mass outside the listed support.
    pub tail_mass: f64,
    #[serde(skip)]
    complements: Vec<f64>,
}

impl QuantizedPmf {
    /// Residual masses for zero-center quantization, symmetric around 0.
    pub fn zero_center(params: &GgmParams) -> Self {
        let s = shape_of(params);
        let alpha = params.alpha;
        let mut edge = s.edge(0.5 / alpha);
        let center = (edge.p, edge.q);
        let mut half = vec![center];
        let mut k = 0i64;
        while edge.q >= TAIL_EPS && k < MAX_HALF_SUPPORT {
            k += 1;
            let next = s.edge((k as f64 + 0.5) / alpha);
            half.push(s.mass(&edge, &next));
            edge = next;
        }
        let mut probs = Vec::with_capacity(2 * half.len() - 1);
        let mut complements = Vec::with_capacity(2 * half.len() - 1);
        for &(m, c) in half.iter().rev().chain(half.iter().skip(1)) {
            probs.push(m);
            complements.push(c);
        }
        Self {
            offset: -k,
            probs,
            tail_mass: edge.q,
            complements,
        }
    }

    /// Masses of absolute integer symbols under plain rounding, centered on
    /// `round(μ)`.
    pub fn integer_grid(params: &GgmParams) -> Self {
        Self::integer_grid_to(params, TAIL_EPS)
    }

    fn integer_grid_to(params: &GgmParams, tail_eps: f64) -> Self {
        let s = shape_of(params);
        let m = params.mu.round();
        let shift = params.mu - m;
        let std = |x: f64| (x - shift) / params.alpha;

        // Upward from the central bin.
        let lo0 = s.edge(std(-0.5));
        let mut hi = s.edge(std(0.5));
        let mut up = vec![s.mass(&lo0, &hi)];
        let mut i = 0i64;
        while hi.q >= tail_eps && i < MAX_HALF_SUPPORT {
            i += 1;
            let next = s.edge(std(i as f64 + 0.5));
            up.push(s.mass(&hi, &next));
            hi = next;
        }
        let mut lo = lo0;
        let mut down = Vec::new();
        let mut j = 0i64;
        while lo.q >= tail_eps && j < MAX_HALF_SUPPORT {
            j += 1;
            let next = s.edge(std(-(j as f64) - 0.5));
            down.push(s.mass(&next, &lo));
            lo = next;
        }
        let mut probs = Vec::with_capacity(up.len() + down.len());
        let mut complements = Vec::with_capacity(up.len() + down.len());
        for &(p, c) in down.iter().rev().chain(up.iter()) {
            probs.push(p);
            complements.push(c);
        }
        Self {
            offset: m as i64 - j,
            probs,
            tail_mass: 0.5 * (hi.q + lo.q),
            complements,
        }
    }

    pub fn prob(&self, k: i64) -> f64 {
        let idx = k - self.offset;
        if idx < 0 || idx as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[idx as usize]
        }
    }

    /// Discrete entropy `−Σ p log₂ p` of the listed masses.
    pub fn entropy_bits(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.complements)
            .map(|(&p, &c)| entropy_term(p, c))
            .sum()
    }
}

/// Entropy of the rounded variable with the model as the coding distribution.
pub fn rounded_rate(params: &GgmParams, zero_center: bool) -> f64 {
    if zero_center {
        // Symmetric support: sum one side and double it.
        let s = shape_of(params);
        let alpha = params.alpha;
        let mut edge = s.edge(0.5 / alpha);
        let mut total = entropy_term(edge.p, edge.q);
        let mut side = 0.0;
        let mut k = 0i64;
        while edge.q >= RATE_TAIL_EPS && k < MAX_HALF_SUPPORT {
            k += 1;
            let next = s.edge((k as f64 + 0.5) / alpha);
            let (m, c) = s.mass(&edge, &next);
            side += entropy_term(m, c);
            edge = next;
        }
        total += 2.0 * side;
        total
    } else {
        QuantizedPmf::integer_grid_to(params, RATE_TAIL_EPS).entropy_bits()
    }
}

const NOISY_ABS_TOL: f64 = 1e-9;
const NOISY_MAX_PANELS: usize = 2000;

/// Differential entropy (bits) of `Y + U`, `U ~ U(−½, ½)`.
///
/// The density of `Y + U` at `t` is the model mass of `[t − ½, t + ½]`, so
/// the result does not depend on `μ`; the `zero_center` flag is accepted for
/// symmetry with [`rounded_rate`] and has no effect.
pub fn noisy_rate(params: &GgmParams, _zero_center: bool) -> Result<f64> {
    let s = shape_of(params);
    let alpha = params.alpha;
    let reach = alpha * 40f64.powf(1.0 / s.beta);
    let end = 0.5 + reach;
    let integrand = |t: f64| {
        let (m, c) = s.bin_mass((t - 0.5) / alpha, (t + 0.5) / alpha);
        entropy_term(m, c)
    };
    let mut points = vec![0.0, 0.5, end];
    let mut step = alpha / 8.0;
    while step < reach {
        for p in [0.5 - step, 0.5 + step] {
            if p > 0.0 && p < end {
                points.push(p);
            }
        }
        step *= 2.0;
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let q = quad::integrate(integrand, &points, 0.5 * NOISY_ABS_TOL, NOISY_MAX_PANELS)?;
    Ok(2.0 * q.value)
}

/// Noisy and rounded rate of one parameter point plus their relative gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchCell {
    pub beta: f64,
    pub alpha: f64,
    pub mu: f64,
    pub zero_center: bool,
    pub noisy: f64,
    pub rounded: f64,
    /// `(noisy − rounded) / rounded`.
    pub delta: f64,
}

pub fn mismatch(params: &GgmParams, zero_center: bool) -> Result<MismatchCell> {
    let rounded = rounded_rate(params, zero_center);
    if rounded <= 1e-12 {
        return Err(Error::Degenerate(format!(
            "rounded rate {rounded:e} bits is too small for a relative mismatch"
        )));
    }
    let noisy = noisy_rate(params, zero_center)?;
    Ok(MismatchCell {
        beta: params.beta,
        alpha: params.alpha,
        mu: params.mu,
        zero_center,
        noisy,
        rounded,
        delta: (noisy - rounded) / rounded,
    })
}

/// `(∂c/∂y, ∂c/∂β)` at `y`; errors when `|u| ≤ 1e-6` where the `ln|u|`
/// factor of the shape derivative is singular.
pub fn cdf_grad(params: &GgmParams, y: f64) -> Result<(f64, f64)> {
    let u = params.standardize(y);
    if u.abs() <= 1e-6 {
        return Err(Error::Singularity(u.abs()));
    }
    let s = shape_of(params);
    Ok((s.pdf(u) / params.alpha, s.dcdf_dbeta(u)))
}

/// Partials of `−log₂ q` with respect to the model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RateGradient {
    pub d_mu: f64,
    pub d_alpha: f64,
    pub d_beta: f64,
}

/// Gradient of `−log₂ pmf_zero_center(params, k)`.
///
/// The coded value `ŷ = k + μ` is held fixed while differentiating, so
/// `d_mu` measures how the bin mass of that reconstruction responds to a
/// shift of the mean.
pub fn rate_grad(params: &GgmParams, k: i64) -> Result<RateGradient> {
    let s = shape_of(params);
    let alpha = params.alpha;
    let a = (k as f64 - 0.5) / alpha;
    let b = (k as f64 + 0.5) / alpha;
    let (q, _) = s.bin_mass(a, b);
    if q <= LOG_FLOOR {
        return Err(Error::Underflow { symbol: k });
    }
    let fa = s.pdf(a);
    let fb = s.pdf(b);
    let dq_dmu = -(fb - fa) / alpha;
    let dq_dalpha = -(fb * b - fa * a) / alpha;
    let dq_dbeta = s.dcdf_dbeta(b) - s.dcdf_dbeta(a);
    let scale = -1.0 / (q * LN_2);
    Ok(RateGradient {
        d_mu: scale * dq_dmu,
        d_alpha: scale * dq_dalpha,
        d_beta: scale * dq_dbeta,
    })
}

/// Expected gradient of the cross-entropy `E_true[−log₂ q_model(k)]` over
/// zero-centered residuals drawn from `truth`, taken with respect to the
/// model parameters.
pub fn expected_rate_grad(truth: &GgmParams, model: &GgmParams) -> Result<RateGradient> {
    let pmf = QuantizedPmf::zero_center(truth);
    let mut acc = RateGradient::default();
    for (i, &p) in pmf.probs.iter().enumerate() {
        if p < 1e-15 {
            continue;
        }
        let g = rate_grad(model, pmf.offset + i as i64)?;
        acc.d_mu += p * g.d_mu;
        acc.d_alpha += p * g.d_alpha;
        acc.d_beta += p * g.d_beta;
    }
    Ok(acc)
}

/// Draws `n` samples with `|Y − μ| = α G^{1/β}`, `G ~ Gamma(1/β, 1)`, and a
/// fair random sign.
pub fn sample<R: Rng + ?Sized>(params: &GgmParams, n: usize, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(1.0 / params.beta, 1.0).expect("shape 1/beta is positive");
    let inv_beta = 1.0 / params.beta;
    (0..n)
        .map(|_| {
            let mag = params.alpha * gamma.sample(rng).powf(inv_beta);
            if rng.random::<bool>() {
                params.mu + mag
            } else {
                params.mu - mag
            }
        })
        .collect()
}
