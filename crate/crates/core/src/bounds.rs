//! Shape-dependent lower bound on the scale parameter and the gradient
//! rules applied while the scale sits on that bound.
//!
//! The bound `α_β` is the largest scale whose central quantization bin
//! still holds at least `1 − 10⁻⁵` of the mass. It is tabulated on a fixed
//! set of shape knots and interpolated linearly in between.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{GgmParams, RateGradient, Shape, BETA_MAX, BETA_MIN};

/// Minimum central-bin mass that defines the bound.
pub const CENTRAL_MASS: f64 = 1.0 - 1e-5;
const OUTSIDE_MASS: f64 = 1e-5;
pub const DEFAULT_KNOTS: usize = 64;

fn outside_central_bin(shape: &Shape, alpha: f64) -> f64 {
    shape.edge(0.5 / alpha).q
}

/// True when the central bin `[−½, ½]` holds more than `1 − 10⁻⁵` of the mass.
pub fn central_bin_dominates(beta: f64, alpha: f64) -> bool {
    outside_central_bin(&Shape::new(beta), alpha) < OUTSIDE_MASS
}

/// Largest `α` for which the central bin holds more than `1 − 10⁻⁵` of the
/// mass, located by bisection to well below `1e-7`.
pub fn compute_bound(beta: f64) -> Result<f64> {
    if !(BETA_MIN..=BETA_MAX).contains(&beta) {
        return Err(domain(format!("beta must lie in [0.5, 4], got {beta}")));
    }
    let shape = Shape::new(beta);
    // Outside mass grows with alpha; lo satisfies the predicate, hi does not.
    let (mut lo, mut hi) = (1e-6, 1.0);
    debug_assert!(outside_central_bin(&shape, lo) < OUTSIDE_MASS);
    debug_assert!(outside_central_bin(&shape, hi) >= OUTSIDE_MASS);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if outside_central_bin(&shape, mid) < OUTSIDE_MASS {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Bound values at linearly spaced shape knots over `[0.5, 4]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTable {
    beta_knots: Vec<f64>,
    alpha_bounds: Vec<f64>,
}

impl BoundTable {
    pub fn build(knots: usize) -> Result<Self> {
        if knots < 16 {
            return Err(domain(format!("bound table needs at least 16 knots, got {knots}")));
        }
        let step = (BETA_MAX - BETA_MIN) / (knots - 1) as f64;
        let beta_knots: Vec<f64> = (0..knots)
            .map(|i| {
                if i == knots - 1 {
                    BETA_MAX
                } else {
                    BETA_MIN + step * i as f64
                }
            })
            .collect();
        let alpha_bounds = beta_knots
            .iter()
            .map(|&b| compute_bound(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            beta_knots,
            alpha_bounds,
        })
    }

    pub fn beta_knots(&self) -> &[f64] {
        &self.beta_knots
    }

    pub fn alpha_bounds(&self) -> &[f64] {
        &self.alpha_bounds
    }

    /// Piecewise-linear interpolation; shapes outside the knot range take
    /// the nearest end value.
    pub fn bound_at(&self, beta: f64) -> f64 {
        let knots = &self.beta_knots;
        let n = knots.len();
        if beta <= knots[0] {
            return self.alpha_bounds[0];
        }
        if beta >= knots[n - 1] {
            return self.alpha_bounds[n - 1];
        }
        let i = knots.partition_point(|&k| k <= beta) - 1;
        let t = (beta - knots[i]) / (knots[i + 1] - knots[i]);
        self.alpha_bounds[i] + t * (self.alpha_bounds[i + 1] - self.alpha_bounds[i])
    }

    pub fn is_clamped(&self, params: &GgmParams) -> bool {
        params.alpha() <= self.bound_at(params.beta())
    }
}

/// Parameters after the scale bound has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundedParams {
    pub params: GgmParams,
    pub alpha_was_clamped: bool,
}

/// Raises `alpha` to the bound when it is at or below it.
pub fn apply_bound(params: &GgmParams, table: &BoundTable) -> BoundedParams {
    let bound = table.bound_at(params.beta());
    if params.alpha() <= bound {
        BoundedParams {
            params: params
                .with_alpha(bound)
                .expect("tabulated bounds are positive and finite"),
            alpha_was_clamped: true,
        }
    } else {
        BoundedParams {
            params: *params,
            alpha_was_clamped: false,
        }
    }
}

/// In the clamped region only a non-positive scale gradient passes, so
/// descent can lift `alpha` off the bound but never push it further below.
pub fn clamped_grad(params: &GgmParams, table: &BoundTable, upstream: RateGradient) -> RateGradient {
    if !table.is_clamped(params) {
        return upstream;
    }
    RateGradient {
        d_alpha: if upstream.d_alpha <= 0.0 { upstream.d_alpha } else { 0.0 },
        ..upstream
    }
}

/// [`clamped_grad`] plus, in the clamped region, dropping a non-positive
/// shape gradient. `d_mu` passes through unchanged.
pub fn rectified_grad(
    params: &GgmParams,
    table: &BoundTable,
    upstream: RateGradient,
) -> RateGradient {
    let g = clamped_grad(params, table, upstream);
    if !table.is_clamped(params) {
        return g;
    }
    RateGradient {
        d_beta: if upstream.d_beta > 0.0 { upstream.d_beta } else { 0.0 },
        ..g
    }
}
