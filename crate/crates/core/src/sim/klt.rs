use crate::error::{domain, Result};

pub type Mat2 = [[f64; 2]; 2];

fn check_spd(m: &Mat2) -> Result<()> {
    let [[a, b], [b2, c]] = *m;
    let finite = m.iter().flatten().all(|v| v.is_finite());
    let symmetric = (b - b2).abs() <= 1e-12 * (1.0 + b.abs());
    if !finite || !symmetric || a <= 0.0 || c <= 0.0 || a * c - b * b <= 0.0 {
        return Err(domain(format!("matrix {m:?} is not symmetric positive definite")));
    }
    Ok(())
}

/// Eigenvalues of a symmetric positive-definite 2×2 matrix, largest first.
pub fn eigenvalues(m: &Mat2) -> Result<[f64; 2]> {
    check_spd(m)?;
    let [[a, b], [_, c]] = *m;
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    // The product form keeps the small eigenvalue accurate.
    let big = mean + radius;
    Ok([big, (a * c - b * b) / big])
}

/// Karhunen–Loève transform: rows are unit eigenvectors ordered by
/// descending eigenvalue, each with its first nonzero entry positive.
pub fn klt(cov: &Mat2) -> Result<Mat2> {
    check_spd(cov)?;
    let [[a, b], [_, c]] = *cov;
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = theta.sin_cos();
    let mut rows = [[co, s], [-s, co]];
    for row in &mut rows {
        let lead = if row[0] != 0.0 { row[0] } else { row[1] };
        if lead < 0.0 {
            row[0] = -row[0];
            row[1] = -row[1];
        }
    }
    Ok(rows)
}

pub fn apply(t: &Mat2, x: [f64; 2]) -> [f64; 2] {
    [
        t[0][0] * x[0] + t[0][1] * x[1],
        t[1][0] * x[0] + t[1][1] * x[1],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_covariance() {
        let sigma = [[4.0, 1.0], [1.0, 1.0]];
        let [l1, l2] = eigenvalues(&sigma).unwrap();
        assert!((l1 - (5.0 + 13f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!((l2 - (5.0 - 13f64.sqrt()) / 2.0).abs() < 1e-14);
        let t = klt(&sigma).unwrap();
        for (row, l) in t.iter().zip([l1, l2]) {
            let mv = apply(&sigma, *row);
            assert!((mv[0] - l * row[0]).abs() < 1e-13 && (mv[1] - l * row[1]).abs() < 1e-13);
            assert!(row[0] > 0.0 || (row[0] == 0.0 && row[1] > 0.0));
        }
    }

    #[test]
    fn identity_maps_to_identity() {
        assert_eq!(klt(&[[1.0, 0.0], [0.0, 1.0]]).unwrap(), [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn swapped_axes_keep_sign_convention() {
        let t = klt(&[[1.0, 0.0], [0.0, 3.0]]).unwrap();
        assert!((t[0][0]).abs() < 1e-15 && (t[0][1] - 1.0).abs() < 1e-15);
        assert!((t[1][0] - 1.0).abs() < 1e-15 && t[1][1].abs() < 1e-15);
    }

    #[test]
    fn rejects_non_spd() {
        assert!(klt(&[[1.0, 2.0], [2.0, 1.0]]).is_err());
        assert!(klt(&[[1.0, 0.5], [0.4, 1.0]]).is_err());
        assert!(klt(&[[-1.0, 0.0], [0.0, 1.0]]).is_err());
    }
}
