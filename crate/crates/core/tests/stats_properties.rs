use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spikelab_core::analytic::{fluctuation_target, EntryLaw, Field};
use spikelab_core::stats::{
    ks_pvalue, ks_stat, normal_cdf, semicircle_quantile, wasserstein1_semicircle, wasserstein1_semicircle_on_grid,
    EmpiricalSample,
};

fn sample_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0..4.0f64, 1..200)
}

proptest! {
    #[test]
    fn ks_is_invariant_under_monotone_maps(values in sample_strategy()) {
        let base = EmpiricalSample::new(values.clone()).unwrap();
        let mapped = EmpiricalSample::new(values.iter().map(|x| x.exp()).collect()).unwrap();
        let d0 = ks_stat(&base, normal_cdf);
        let d1 = ks_stat(&mapped, |y: f64| normal_cdf(y.ln()));
        prop_assert!((d0 - d1).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&d0));
    }

    #[test]
    fn ks_pvalue_decreases_in_distance_and_size(d in 0.0..1.0f64, step in 0.0..0.2f64, n in 1usize..5000) {
        let p = ks_pvalue(d, n);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(ks_pvalue((d + step).min(1.0), n) <= p + 1e-12);
        prop_assert!(ks_pvalue(d, n + 100) <= p + 1e-12);
    }

    #[test]
    fn w1_ignores_duplicating_every_point(values in sample_strategy(), m in 1usize..300) {
        let once = EmpiricalSample::new(values.clone()).unwrap();
        let twice = EmpiricalSample::new(values.iter().flat_map(|&x| [x, x]).collect()).unwrap();
        let a = wasserstein1_semicircle_on_grid(&once, 1.0, m).unwrap();
        let b = wasserstein1_semicircle_on_grid(&twice, 1.0, m).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn semicircle_quantiles_are_monotone(p in 0.001..0.999f64, dp in 0.0..0.001f64, sigma in 0.2..3.0f64) {
        let q0 = semicircle_quantile(p, sigma).unwrap();
        let q1 = semicircle_quantile(p + dp, sigma).unwrap();
        prop_assert!(q0 <= q1 + 1e-12);
        prop_assert!(q0.abs() <= 2.0 * sigma);
        prop_assert!((q0 + semicircle_quantile(1.0 - p, sigma).unwrap()).abs() <= 1e-10 * sigma);
    }
}

#[test]
fn exact_semicircle_quantiles_have_small_w1() {
    let n = 2000;
    let q: Vec<f64> = (1..=n)
        .map(|k| semicircle_quantile((k as f64 - 0.5) / n as f64, 1.0).unwrap())
        .collect();
    let w = wasserstein1_semicircle(&EmpiricalSample::new(q).unwrap(), 1.0).unwrap();
    assert!(w < 1e-12);
}

#[test]
fn target_cdf_matches_direct_simulation() {
    // 1e5 draws from c (W11 + N(0, v)) against the analytic CDF
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (law, field) in [
        (EntryLaw::rademacher(1.0).unwrap(), Field::Real),
        (EntryLaw::uniform(0.7).unwrap(), Field::Real),
        (EntryLaw::rademacher(1.0).unwrap(), Field::Complex),
    ] {
        let t = fluctuation_target(&law, 2.0 * law.sigma(), field).unwrap();
        let draws: Vec<f64> = (0..100_000).map(|_| t.sample(&mut rng)).collect();
        let d = ks_stat(&EmpiricalSample::new(draws).unwrap(), |x| t.cdf(x));
        assert!(d < 0.01, "{law:?} {field:?}: {d}");
    }
}
