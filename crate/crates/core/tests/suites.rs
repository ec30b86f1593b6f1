use kernellab_core::verify::{run_suite, SUITES};

fn check(name: &str) {
    let r = run_suite(name, 0).unwrap();
    assert!(r.is_consistent());
    let bad: Vec<_> = r.cases.iter().filter(|c| !c.pass).collect();
    assert!(bad.is_empty(), "{name}: {bad:#?}");
    let ids: Vec<&str> = r.cases.iter().map(|c| c.id.as_str()).collect();
    assert!(ids.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn mehler_suite() {
    check("mehler");
}

#[test]
fn small_q_suite() {
    check("isometry-q");
}

#[test]
fn big_q_suite() {
    check("isometry-Q");
}

#[test]
fn psd_suite() {
    check("psd");
}

#[test]
fn anova_suite() {
    check("anova");
}

#[test]
fn domain_suite() {
    check("domains");
}

#[test]
fn consistency_suite() {
    check("series-consistency");
}

#[test]
fn bounds_suite() {
    check("bounds");
}

#[test]
fn every_suite_is_listed() {
    assert_eq!(SUITES.len(), 8);
    assert!(run_suite("unknown", 0).is_err());
}

#[test]
fn reports_are_reproducible() {
    let a = run_suite("isometry-q", 3).unwrap();
    let b = run_suite("isometry-q", 3).unwrap();
    let digests = |r: &kernellab_core::report::VerificationReport| {
        r.cases
            .iter()
            .map(|c| (c.id.clone(), c.inputs_digest.clone(), c.residual))
            .collect::<Vec<_>>()
    };
    assert_eq!(digests(&a), digests(&b));
}
