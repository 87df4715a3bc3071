use lipbound_harness::properties::{property_names, property_suite, SuiteOptions};

#[test]
fn default_seed_passes() {
    let out = property_suite(&SuiteOptions::default(), None);
    assert_eq!(out.len(), property_names().len());
    for o in &out {
        assert!(o.passed(), "{}: {:?}", o.name, o.witness);
    }
}

#[test]
fn ten_seeds_have_no_flaky_property() {
    for seed in 1..=10 {
        let opts = SuiteOptions {
            seed,
            ..Default::default()
        };
        for o in property_suite(&opts, None) {
            assert!(o.passed(), "seed {seed}, {}: {:?}", o.name, o.witness);
        }
    }
}

#[test]
fn same_seed_same_outcome() {
    let opts = SuiteOptions {
        seed: 42,
        draw_scale: 0.1,
        broken_young: true,
    };
    assert_eq!(property_suite(&opts, Some("field")), property_suite(&opts, Some("field")));
}

#[test]
fn non_monotone_b_fails_with_witness() {
    let opts = SuiteOptions {
        broken_young: true,
        ..Default::default()
    };
    let out = property_suite(&opts, Some("field.monotonicity"));
    assert!(out[0].failures > 0);
    let w = out[0].witness.as_deref().unwrap();
    assert!(w.contains("xi=") && w.contains("eta="), "{w}");
}
