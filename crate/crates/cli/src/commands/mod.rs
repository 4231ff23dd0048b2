mod codec;
mod fit;
mod rates;
mod rd;

pub use codec::{decode, encode, lut};
pub use fit::fit;
pub use rates::{bound_curve, mismatch_grid};
pub use rd::rd_sim;

use crate::args::Range;
use crate::error::{invalid, CliResult};

/// `n` points over `r`, log-spaced when `log`; a single point sits at `r.0`.
fn axis(name: &str, r: Range, n: usize, log: bool) -> CliResult<Vec<f64>> {
    if n == 0 {
        return Err(invalid(format!("{name} count must be at least 1")));
    }
    if log && r.0 <= 0.0 {
        return Err(invalid(format!("{name} range must be positive for log spacing")));
    }
    if n > 1 && r.0 == r.1 {
        return Err(invalid(format!("{name} range is a single point but {n} samples were requested")));
    }
    let (lo, hi) = if log { (r.0.ln(), r.1.ln()) } else { (r.0, r.1) };
    Ok((0..n)
        .map(|i| match i {
            0 => r.0,
            i if i == n - 1 => r.1,
            i => {
                let v = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                if log { v.exp() } else { v }
            }
        })
        .collect())
}
