use levy_entropy::montecarlo::{
    fractional_moment_empirical, fractional_moment_integral, ks_test, sample_increments, MarginalCdf,
};
use levy_entropy::process_model::{nominal_bg_index, stable_limit_gamma};
use levy_entropy::ProcessSpec;
use proptest::prelude::*;

const P_MIN: f64 = 1e-3;

fn ks_against_marginal(spec: &ProcessSpec, t: f64, seed: u64) -> f64 {
    let batch = sample_increments(spec, t, 100_000, seed).unwrap();
    let cdf = MarginalCdf::new(spec, t).unwrap();
    ks_test(&batch.values, |x| cdf.eval(x)).p_value
}

#[test]
fn draws_follow_the_marginal_law() {
    let cases = [
        (ProcessSpec::wiener(1.0, 0.0).unwrap(), 0.5),
        (ProcessSpec::wiener(2.0, 1.0).unwrap(), 2.0),
        (ProcessSpec::gamma(1.0, 1.0).unwrap(), 0.3),
        (ProcessSpec::gamma(2.0, 3.0).unwrap(), 1.0),
        (ProcessSpec::laplace(1.0).unwrap(), 1.0),
        (ProcessSpec::laplace(2.0).unwrap(), 0.4),
        (ProcessSpec::sas(1.0, 1.0).unwrap(), 1.0),
        (ProcessSpec::sas(0.6, 1.0).unwrap(), 0.5),
        (ProcessSpec::sas(1.5, 2.0).unwrap(), 0.1),
    ];
    for (seed, (spec, t)) in cases.iter().enumerate() {
        let p = ks_against_marginal(spec, *t, seed as u64 + 100);
        assert!(p > P_MIN, "{spec} at t={t}: p = {p}");
    }
}

#[test]
fn sum_of_two_increments_has_the_doubled_law() {
    let cases = [
        (ProcessSpec::wiener(1.0, 0.5).unwrap(), 0.25),
        (ProcessSpec::gamma(1.0, 1.0).unwrap(), 0.2),
        (ProcessSpec::laplace(1.0).unwrap(), 0.5),
        (ProcessSpec::sas(1.0, 1.0).unwrap(), 0.5),
        (ProcessSpec::sas(1.3, 1.0).unwrap(), 0.05),
    ];
    for (spec, t) in cases {
        let a = sample_increments(&spec, t, 100_000, 1).unwrap();
        let b = sample_increments(&spec, t, 100_000, 2).unwrap();
        let sums: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect();
        let cdf = MarginalCdf::new(&spec, 2.0 * t).unwrap();
        let p = ks_test(&sums, |x| cdf.eval(x)).p_value;
        assert!(p > P_MIN, "{spec}: p = {p}");
    }
}

#[test]
fn a_wrong_law_is_rejected() {
    let spec = ProcessSpec::sas(1.0, 1.0).unwrap();
    let batch = sample_increments(&spec, 1.0, 100_000, 7).unwrap();
    let wrong = MarginalCdf::new(&spec, 1.1).unwrap();
    assert!(ks_test(&batch.values, |x| wrong.eval(x)).p_value < 1e-6);
}

#[test]
fn fractional_moments_are_bounded_uniformly_in_time() {
    for spec in [
        ProcessSpec::sas(1.5, 1.0).unwrap(),
        ProcessSpec::sas(0.5, 1.0).unwrap(),
        ProcessSpec::wiener(1.0, 0.0).unwrap(),
    ] {
        let beta = nominal_bg_index(&spec);
        assert!(stable_limit_gamma(&spec).is_some());
        let q = beta.min(1.0) / 2.0;
        let ts = [1.0, 0.1, 0.01, 0.001];
        let empirical = ts
            .iter()
            .map(|&t| fractional_moment_empirical(&spec, t, beta, q, 5).unwrap().value)
            .fold(f64::MIN, f64::max);
        let integral =
            ts.iter().map(|&t| fractional_moment_integral(&spec, t, beta, q).unwrap()).fold(f64::MIN, f64::max);
        assert!(empirical <= 1.05 * integral, "{spec}: {empirical} vs {integral}");
    }
}

fn sampleable() -> impl Strategy<Value = ProcessSpec> {
    prop_oneof![
        (0.1f64..3.0, -1.0f64..1.0).prop_map(|(s, m)| ProcessSpec::wiener(s, m).unwrap()),
        (0.2f64..=2.0, 0.2f64..3.0).prop_map(|(a, g)| ProcessSpec::sas(a, g).unwrap()),
        (0.2f64..3.0, 0.2f64..3.0).prop_map(|(th, tau)| ProcessSpec::gamma(th, tau).unwrap()),
        (0.2f64..3.0).prop_map(|s| ProcessSpec::laplace(s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn batches_depend_only_on_inputs(spec in sampleable(), t in 0.01f64..3.0, count in 1usize..40_000, seed in any::<u64>()) {
        let a = sample_increments(&spec, t, count, seed).unwrap();
        let b = sample_increments(&spec, t, count, seed).unwrap();
        prop_assert_eq!(a.values.len(), count);
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.values.iter().all(|x| x.is_finite()));
        // a shorter batch is a prefix of a longer one
        let c = sample_increments(&spec, t, count / 2, seed).unwrap();
        prop_assert!(c.values.iter().zip(&a.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
