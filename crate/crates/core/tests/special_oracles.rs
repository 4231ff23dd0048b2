mod common;

use common::{logspace, p_ref, q_ref, rel_err};
use ggm_core::special::{dp_dr, erf, reg_lower_gamma, reg_upper_gamma, GammaArgs};
use proptest::prelude::*;

fn p(r: f64, z: f64) -> f64 {
    reg_lower_gamma(GammaArgs::new(r, z).unwrap()).unwrap()
}

#[test]
fn lower_gamma_matches_reference_library() {
    for r in logspace(0.25, 2.0, 30) {
        for z in std::iter::once(0.0).chain(logspace(1e-6, 50.0, 60)) {
            let got = p(r, z);
            let want = p_ref(r, z);
            assert!((got - want).abs() < 1e-12, "P({r}, {z}) = {got}, reference {want}");
        }
    }
}

#[test]
fn upper_gamma_keeps_relative_precision_in_the_tail() {
    for r in [0.25, 0.5, 1.0, 2.0] {
        for z in [5.0, 20.0, 50.0, 200.0] {
            let got = reg_upper_gamma(GammaArgs::new(r, z).unwrap()).unwrap();
            let want = q_ref(r, z);
            assert!((got - want).abs() <= 1e-12 * want, "Q({r}, {z}) = {got:e} vs {want:e}");
        }
    }
}

#[test]
fn half_shape_is_the_error_function() {
    for z in common::linspace(0.0, 40.0, 801) {
        assert!((p(0.5, z) - erf(z.sqrt())).abs() < 1e-12, "z = {z}");
    }
}

#[test]
fn shape_derivative_matches_finite_differences() {
    let mut checked = 0;
    for r in logspace(0.25, 2.1, 40) {
        for z in logspace(1e-4, 50.0, 40) {
            let got = dp_dr(GammaArgs::new(r, z).unwrap());
            assert!(got.converged, "no convergence at ({r}, {z})");
            let h = 1e-5 * r.max(1.0);
            // Difference whichever of P, Q is small so roundoff stays relative.
            let want = if p_ref(r, z) < 0.5 {
                common::central(|s| p_ref(s, z), r, h)
            } else {
                -common::central(|s| q_ref(s, z), r, h)
            };
            if want.abs() > 1e-10 {
                checked += 1;
                let e = (got.value - want).abs() / want.abs();
                assert!(e < 1e-5, "dP/dr({r}, {z}) = {:e}, fd {want:e}, rel {e:e}", got.value);
            }
        }
    }
    assert!(checked > 1200, "only {checked} grid points were above the magnitude floor");
}

#[test]
fn shape_derivative_references() {
    // 30-digit references.
    for (r, z, want) in [
        (1.0, 1.0, -0.431_729_710_634_898_7),
        (0.5, 4.0, -0.016_565_975_346_630_366),
    ] {
        let got = dp_dr(GammaArgs::new(r, z).unwrap()).value;
        assert!(rel_err(got, want) < 1e-10);
    }
}

proptest! {
    #[test]
    fn lower_gamma_is_a_probability(r in 0.05f64..20.0, z in 0.0f64..500.0) {
        let v = p(r, z);
        prop_assert!((0.0..=1.0).contains(&v));
        let q = reg_upper_gamma(GammaArgs::new(r, z).unwrap()).unwrap();
        prop_assert!((v + q - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lower_gamma_increases_in_z(r in 0.25f64..4.0, z in 1e-3f64..30.0, dz in 1e-3f64..1.0) {
        prop_assert!(p(r, z + dz) > p(r, z));
    }

    #[test]
    fn lower_gamma_decreases_in_r(r in 0.25f64..4.0, z in 1e-3f64..30.0) {
        prop_assert!(dp_dr(GammaArgs::new(r, z).unwrap()).value <= 0.0);
    }
}
