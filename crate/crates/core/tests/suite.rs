//! The property suite holds on generated instances of every profile.

use proptest::prelude::*;

use krein_calculus::harness::{generate, run_suite, Profile};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_property_holds(seed in 0u64..1_000_000, n in 1usize..=8, profile in 0usize..3) {
        let instance = generate(seed, n, Profile::ALL[profile]);
        let report = run_suite(&instance);
        let failures: Vec<_> = report.failures().map(|p| (&p.name, p.residual)).collect();
        prop_assert!(failures.is_empty(), "{}: {:?}", instance.label, failures);
    }

    #[test]
    fn reports_are_reproducible(seed in 0u64..1_000_000, n in 1usize..=6, profile in 0usize..3) {
        let instance = generate(seed, n, Profile::ALL[profile]);
        let (first, second) = (run_suite(&instance), run_suite(&instance));
        prop_assert_eq!(&first.instance, &second.instance);
        prop_assert_eq!(&first.properties, &second.properties);
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), n in 1usize..=12, profile in 0usize..3) {
        let profile = Profile::ALL[profile];
        prop_assert_eq!(generate(seed, n, profile).to_json(), generate(seed, n, profile).to_json());
    }
}
