use hcschwartz::{
    budgeted_domain, convolve, generate_ball, run_suite, sobolev_norm, Error, GroupFunction,
    GroupPresentation, RunConfig, TestCorpus,
};
use std::sync::Arc;

#[test]
fn ball_sizes_of_free_group() {
    let ball = generate_ball(&GroupPresentation::sanov(), 4).unwrap();
    let sizes: Vec<usize> = (0..=4).map(|r| ball.prefix_len(r)).collect();
    // 1 + 4 (3^r - 1) / 2
    assert_eq!(sizes, vec![1, 5, 17, 53, 161]);
}

#[test]
fn convolution_with_delta_is_translation() {
    let ball = Arc::new(generate_ball(&GroupPresentation::sl2z(), 4).unwrap());
    let corpus = TestCorpus::generate(&ball, 3, 9, true).unwrap();
    let e = GroupFunction::delta(&ball, 0).unwrap();
    for f in &corpus.functions {
        let g = convolve(&e, f, &ball).unwrap();
        assert!((sobolev_norm(&g, 2.0).unwrap() - sobolev_norm(f, 2.0).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn budget_lowers_truncation() {
    let ball = Arc::new(generate_ball(&GroupPresentation::sanov(), 3).unwrap());
    let f = GroupFunction::sphere_indicator(&ball, 3);
    let wide = budgeted_domain(&f, 8, usize::MAX).unwrap().unwrap();
    assert_eq!(wide.radius(), 8);
    let tight = budgeted_domain(&f, 8, 2_000_000).unwrap().unwrap();
    assert!(tight.radius() < 8 && tight.radius() >= 3);
    assert!(budgeted_domain(&f, 8, 10).unwrap().is_none());
}

#[test]
fn small_suite_passes_and_is_reproducible() {
    let cfg = RunConfig::from_text(
        "group = sl2z\nradius = 5\nR = 6\nsamples = 40\npairs = 6\ndeterministic = true\n\
         suite = radial-identity, cauchy-schwarz, stability, convolution-bound\n",
    )
    .unwrap();
    let a = run_suite(&cfg).unwrap();
    for r in &a.reports {
        assert!(r.passed, "{}: {:?}", r.statement_id, r.residuals);
    }
    let b = run_suite(&cfg).unwrap();
    assert_eq!(a.reports, b.reports);
    assert_eq!(a.config_hash, b.config_hash);
}

#[test]
fn suite_rejects_divergent_exponent() {
    let cfg = RunConfig::from_text("d = 1.5").unwrap();
    assert!(matches!(
        run_suite(&cfg),
        Err(Error::DivergentExponent { .. })
    ));
}
