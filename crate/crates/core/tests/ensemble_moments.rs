//! Entry moments of sampled matrices against the model's normalization.

use spikelab_core::analytic::{DeformationSpec, EntryLaw, Field};
use spikelab_core::ensemble::{sample_wigner, EnsembleConfig};
use spikelab_core::matrix::SelfAdjoint;
use spikelab_core::stats::summarize;

const N: usize = 200;

fn undeformed(field: Field, law: EntryLaw) -> SelfAdjoint {
    let cfg = EnsembleConfig::new(field, N, law, None, 31).unwrap();
    sample_wigner(&cfg, 0).unwrap().matrix
}

#[test]
fn real_entries_have_the_stated_variances() {
    let SelfAdjoint::Real(m) = undeformed(Field::Real, EntryLaw::gaussian(1.0).unwrap()) else {
        unreachable!()
    };
    let scale = N as f64;
    let off: Vec<f64> = (0..N).flat_map(|i| (i + 1..N).map(move |j| (i, j))).map(|(i, j)| m[(i, j)] * scale.sqrt()).collect();
    let diag: Vec<f64> = (0..N).map(|i| m[(i, i)] * scale.sqrt()).collect();
    let s_off = summarize(&off).unwrap();
    let s_diag = summarize(&diag).unwrap();
    // 19900 off-diagonal draws: SE of the variance is about 0.01
    assert!((s_off.variance - 1.0).abs() < 0.05, "{}", s_off.variance);
    assert!(s_off.mean.abs() < 0.03);
    // 200 diagonal draws of variance 2: SE about 0.2
    assert!((s_diag.variance - 2.0).abs() < 0.6, "{}", s_diag.variance);
}

#[test]
fn complex_entries_are_circular() {
    let SelfAdjoint::Complex(m) = undeformed(Field::Complex, EntryLaw::gaussian(1.0).unwrap()) else {
        unreachable!()
    };
    let scale = (N as f64).sqrt();
    let pairs: Vec<(f64, f64)> = (0..N)
        .flat_map(|i| (i + 1..N).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)].re * scale, m[(i, j)].im * scale))
        .collect();
    let re: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let im: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (sr, si) = (summarize(&re).unwrap(), summarize(&im).unwrap());
    assert!((sr.variance - 0.5).abs() < 0.03 && (si.variance - 0.5).abs() < 0.03);
    let cross = pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / pairs.len() as f64;
    assert!(cross.abs() < 0.02, "{cross}");
    assert!((0..N).all(|i| m[(i, i)].im == 0.0));
}

#[test]
fn rademacher_entries_take_two_values() {
    let SelfAdjoint::Real(m) = undeformed(Field::Real, EntryLaw::rademacher(1.5).unwrap()) else {
        unreachable!()
    };
    let unit = 1.5 / (N as f64).sqrt();
    for i in 0..N {
        for j in i + 1..N {
            assert!((m[(i, j)].abs() - unit).abs() < 1e-15);
        }
    }
}

#[test]
fn deformation_shifts_only_the_expected_entries() {
    let law = EntryLaw::rademacher(1.0).unwrap();
    let spec = DeformationSpec::diagonal(&[(3.0, 1), (-1.0, 2)]).unwrap();
    let plain = EnsembleConfig::new(Field::Real, 50, law.clone(), None, 4).unwrap();
    let spiked = EnsembleConfig::new(Field::Real, 50, law, Some(spec), 4).unwrap();
    let (SelfAdjoint::Real(a), SelfAdjoint::Real(b)) = (
        sample_wigner(&plain, 3).unwrap().matrix,
        sample_wigner(&spiked, 3).unwrap().matrix,
    ) else {
        unreachable!()
    };
    for i in 0..50 {
        for j in 0..50 {
            let shift = b[(i, j)] - a[(i, j)];
            let expected = match (i == j, i) {
                (true, 0) => 3.0,
                (true, 48) | (true, 49) => -1.0,
                _ => 0.0,
            };
            assert!((shift - expected).abs() < 1e-14, "({i}, {j}): {shift}");
        }
    }
}

#[test]
fn replications_are_independent_streams() {
    let cfg = EnsembleConfig::new(Field::Real, 40, EntryLaw::gaussian(1.0).unwrap(), None, 8).unwrap();
    let a = sample_wigner(&cfg, 0).unwrap();
    let b = sample_wigner(&cfg, 1).unwrap();
    assert_ne!(a.derived_seed, b.derived_seed);
    assert_ne!(a.matrix, b.matrix);
    assert_eq!(sample_wigner(&cfg, 1).unwrap().matrix, b.matrix);
}
