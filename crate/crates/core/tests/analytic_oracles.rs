//! Analytic quantities against high-precision reference values and their
//! structural identities.

use num_complex::Complex64;
use proptest::prelude::*;
use spikelab_core::analytic::{
    count_split, e_sigma, fluctuation_target, g_sc, g_sc_derivative, g_sc_real, l_sigma, mean_inverse_square,
    rho, sigma_theta, v_theta, z_sigma, DeformationSpec, EntryLaw, Field, LawKind,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

// Reference values computed with 30-digit arithmetic at sigma = 1, z = 1 + i.
const G_REF: (f64, f64) = (0.257_065_864_121_677_15, -0.529_085_513_635_746_1);
const Q_REF: (f64, f64) = (-0.215_567_759_497_108_44, -0.175_788_792_127_071_46);
const E_SPIKE2_COMPLEX: (f64, f64) = (-0.641_635_596_978_996_3, -0.780_480_740_409_828_3);
const L_SPIKE2_COMPLEX: (f64, f64) = (-0.428_903_156_155_685_36, 0.210_500_077_984_779_46);
const L_REAL_NO_SPIKE: (f64, f64) = (-0.104_321_724_187_910_04, 0.080_110_516_314_981_5);
const L_REAL_SPIKE2: (f64, f64) = (-0.533_224_880_343_595_4, 0.290_610_594_299_760_94);

#[test]
fn resolvent_quantities_match_reference_values() {
    let z = c(1.0, 1.0);
    let gauss = EntryLaw::gaussian(1.0).unwrap();
    let spike = DeformationSpec::diagonal(&[(2.0, 1)]).unwrap();
    assert!(close(g_sc(z, 1.0).unwrap(), c(G_REF.0, G_REF.1), 1e-15));
    assert!(close(mean_inverse_square(z, 1.0).unwrap(), c(Q_REF.0, Q_REF.1), 1e-12));
    let e = e_sigma(z, Some(&spike), &gauss, Field::Complex).unwrap();
    assert!(close(e, c(E_SPIKE2_COMPLEX.0, E_SPIKE2_COMPLEX.1), 1e-13));
    let l = l_sigma(z, Some(&spike), &gauss, Field::Complex).unwrap();
    assert!(close(l, c(L_SPIKE2_COMPLEX.0, L_SPIKE2_COMPLEX.1), 1e-12));
    let l = l_sigma(z, None, &gauss, Field::Real).unwrap();
    assert!(close(l, c(L_REAL_NO_SPIKE.0, L_REAL_NO_SPIKE.1), 1e-12));
    let l = l_sigma(z, Some(&spike), &gauss, Field::Real).unwrap();
    assert!(close(l, c(L_REAL_SPIKE2.0, L_REAL_SPIKE2.1), 1e-12));
}

#[test]
fn correction_sign_agrees_with_rank_one_determinant() {
    // Complex Gaussian, one spike: the exact 1/N term of the spiked trace is
    // -theta g'/(1 - theta g), an independent route to L.
    let gauss = EntryLaw::gaussian(1.0).unwrap();
    for (theta, z) in [(2.0, c(1.0, 1.0)), (0.5, c(-0.3, 0.7)), (-3.0, c(2.5, 0.6))] {
        let spike = DeformationSpec::diagonal(&[(theta, 1)]).unwrap();
        let g = g_sc(z, 1.0).unwrap();
        let direct = -theta * g_sc_derivative(z, 1.0).unwrap() / (1.0 - theta * g);
        let l = l_sigma(z, Some(&spike), &gauss, Field::Complex).unwrap();
        assert!(close(l, direct, 1e-11), "theta = {theta}: {l} vs {direct}");
    }
}

#[test]
fn rademacher_target_reference_values() {
    let rad = EntryLaw::rademacher(1.0).unwrap();
    let t = fluctuation_target(&rad, 2.0, Field::Real).unwrap();
    assert!((t.scale_c - 0.75).abs() < 1e-15);
    assert!((t.gaussian_variance - 1.0 / 6.0).abs() < 1e-15);
    assert!((t.variance() - 1.21875).abs() < 1e-14);
    // 0.5 Phi((0.4/0.75 - sqrt2) sqrt6) + 0.5 Phi((0.4/0.75 + sqrt2) sqrt6)
    assert!((t.cdf(0.4) - 0.507_737_193_745_488).abs() < 1e-9);
}

fn upper_half_plane() -> impl Strategy<Value = Complex64> {
    (-6.0..6.0f64, 1e-3..6.0f64).prop_map(|(x, y)| c(x, y))
}

fn law_strategy() -> impl Strategy<Value = EntryLaw> {
    (0usize..3, 0.3..3.0f64).prop_map(|(k, s)| match k {
        0 => EntryLaw::gaussian(s).unwrap(),
        1 => EntryLaw::rademacher(s).unwrap(),
        _ => EntryLaw::uniform(s).unwrap(),
    })
}

proptest! {
    #[test]
    fn stieltjes_solves_its_quadratic(z in upper_half_plane(), sigma in 0.2..3.0f64) {
        let g = g_sc(z, sigma).unwrap();
        let residual = (sigma * sigma * g * g - z * g + 1.0).norm();
        prop_assert!(residual <= 1e-12 * (1.0 + z.norm()));
        // Herglotz branch and the a-priori bound |g| <= 1/Im z
        prop_assert!(g.im < 0.0);
        prop_assert!(g.norm() <= 1.0 / z.im + 1e-12);
        prop_assert!(g.norm() <= 1.0 / sigma + 1e-12);
    }

    #[test]
    fn inverse_round_trip(z in upper_half_plane(), sigma in 0.2..3.0f64) {
        let g = g_sc(z, sigma).unwrap();
        prop_assert!((z_sigma(g, sigma).unwrap() - z).norm() <= 1e-10 * (1.0 + z.norm()));
    }

    #[test]
    fn outlier_location_inverts_stieltjes(sigma in 0.2..3.0f64, ratio in 1.001..20.0f64, sign in prop::bool::ANY) {
        let theta = if sign { ratio * sigma } else { -ratio * sigma };
        let r = rho(theta, sigma).unwrap();
        prop_assert!(r.abs() > 2.0 * sigma);
        prop_assert!((1.0 / g_sc_real(r, sigma).unwrap() - theta).abs() <= 1e-10 * theta.abs());
        let s = sigma_theta(theta, sigma).unwrap();
        prop_assert!(s > 0.0 && s < sigma);
    }

    #[test]
    fn fluctuation_variance_is_positive(law in law_strategy(), ratio in 1.001..20.0f64, complex in prop::bool::ANY) {
        let field = if complex { Field::Complex } else { Field::Real };
        let theta = ratio * law.sigma();
        let v = v_theta(&law, theta, field).unwrap();
        prop_assert!(v > 0.0);
        // Gaussian entries: the target collapses to N(0, (t/2) sigma_theta^2)
        if matches!(law.kind(), LawKind::Gaussian) {
            let t = fluctuation_target(&law, theta, field).unwrap();
            let s = sigma_theta(theta, law.sigma()).unwrap();
            prop_assert!((t.variance() - field.t() / 2.0 * s * s).abs() <= 1e-12 * (1.0 + s * s));
        }
    }

    #[test]
    fn target_cdf_is_monotone_and_symmetric(law in law_strategy(), ratio in 1.05..6.0f64, complex in prop::bool::ANY) {
        let field = if complex { Field::Complex } else { Field::Real };
        let t = fluctuation_target(&law, ratio * law.sigma(), field).unwrap();
        let sd = t.variance().sqrt();
        let mut prev = 0.0;
        for k in -40..=40 {
            let x = 0.15 * k as f64 * sd;
            let f = t.cdf(x);
            prop_assert!(f >= prev - 1e-12 && (0.0..=1.0 + 1e-12).contains(&f));
            prop_assert!((f + t.cdf(-x) - 1.0).abs() <= 1e-9);
            prev = f;
        }
    }

    #[test]
    fn split_count_grows_as_the_cut_moves_down(b in 0.0..4.0f64, width in 0.01..2.0f64) {
        let spec = DeformationSpec::diagonal(&[(3.0, 2), (0.5, 1), (-2.5, 1)]).unwrap();
        let upper = count_split(b, b + width, &spec, 1000);
        let lower = count_split(b - width, b, &spec, 1000);
        if let (Ok(u), Ok(l)) = (upper, lower) {
            prop_assert!(u <= l);
        }
    }
}
