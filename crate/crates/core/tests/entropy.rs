use levy_entropy::entropy::{discrete_entropy, marginal_entropy, quantized_law};
use levy_entropy::experiments::{entropy_monotonicity, inequality_suite, monotone_grid, Status, Tolerances};
use levy_entropy::ProcessSpec;
use proptest::prelude::*;

/// A spec and the same process scaled by `a`.
fn scalable() -> impl Strategy<Value = (ProcessSpec, ProcessSpec, f64)> {
    let a = prop_oneof![Just(2.0), Just(10.0)];
    prop_oneof![
        (0.5f64..=2.0, 0.5f64..2.0, a.clone()).prop_map(|(alpha, g, a)| (
            ProcessSpec::sas(alpha, g).unwrap(),
            ProcessSpec::sas(alpha, g * f64::powf(a, alpha)).unwrap(),
            a
        )),
        (0.5f64..2.0, a.clone()).prop_map(|(s, a)| (
            ProcessSpec::wiener(s, 0.0).unwrap(),
            ProcessSpec::wiener(s * a * a, 0.0).unwrap(),
            a
        )),
        (0.5f64..2.0, a).prop_map(|(s, a)| (ProcessSpec::laplace(s).unwrap(), ProcessSpec::laplace(s * a).unwrap(), a)),
    ]
}

fn quantizable() -> impl Strategy<Value = (ProcessSpec, f64)> {
    prop_oneof![
        (0.3f64..3.0, 0.05f64..2.0).prop_map(|(s, t)| (ProcessSpec::wiener(s, 0.0).unwrap(), t)),
        (0.5f64..=2.0, 0.05f64..1.0).prop_map(|(a, t)| (ProcessSpec::sas(a, 1.0).unwrap(), t)),
        (0.5f64..2.0, 0.05f64..2.0).prop_map(|(tau, t)| (ProcessSpec::gamma(1.0, tau).unwrap(), t)),
        (0.5f64..2.0, 0.1f64..2.0).prop_map(|(s, t)| (ProcessSpec::laplace(s).unwrap(), t)),
        (0.6f64..1.6, 0.1f64..1.0).prop_map(|(a, t)| (ProcessSpec::tempered_stable(a, 1.0, 1.0, 1.0).unwrap(), t)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn entropy_shifts_by_log_scale((x, ax, a) in scalable(), t in 0.05f64..1.0) {
        let h = marginal_entropy(&x, t).unwrap().value;
        let ha = marginal_entropy(&ax, t).unwrap().value;
        prop_assert!((ha - h - a.ln()).abs() <= 2e-4, "{x} t={t} a={a}: {ha} vs {h} + log a");
    }

    #[test]
    fn renyi_sandwich((spec, t) in quantizable(), k in 1u32..=10) {
        let m = 1 << k;
        let h1 = discrete_entropy(&quantized_law(&spec, t, 1).unwrap());
        let hm = discrete_entropy(&quantized_law(&spec, t, m).unwrap());
        let eps = 1e-9;
        prop_assert!(h1 >= -eps);
        prop_assert!(hm >= h1 - eps, "{spec} t={t} m={m}: {hm} < {h1}");
        prop_assert!(hm <= h1 + (m as f64).ln() + eps, "{spec} t={t} m={m}: {hm} > {h1} + log m");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn process_entropy_chains((spec, _) in quantizable()) {
        let grid = [1, 2, 4, 8];
        let r = inequality_suite(&spec, &grid, &grid, &Tolerances::default()).unwrap();
        prop_assert_eq!(r.status, Status::Pass, "{:?}", r.metrics);
    }

    #[test]
    fn entropy_grows_with_time((spec, _) in quantizable()) {
        let r = entropy_monotonicity(&spec, &monotone_grid(), &Tolerances::default()).unwrap();
        prop_assert_eq!(r.status, Status::Pass, "{:?}", r.metrics);
    }
}
