use hcschwartz::{
    cartan_decompose, cartan_projection, harish_chandra_xi, length, random_element,
    subadditivity_check, AdaptiveXi, BoundaryGrid, GroupElement, XiEvaluator, XiMethod,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn element(n: usize, max_log: f64, seed: u64) -> GroupElement {
    random_element(n, max_log, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cartan_reconstructs(n in 2usize..=4, seed: u64, max_log in 0.0..5.0f64) {
        let g = element(n, max_log, seed);
        let t = cartan_decompose(&g).unwrap();
        let err = (t.reconstruct().matrix() - g.matrix()).norm() / g.matrix().norm();
        prop_assert!(err < 1e-9, "error {err}");
        prop_assert!(t.k1.is_orthogonal(1e-10) && t.k2.is_orthogonal(1e-10));
        let h = t.h.values();
        prop_assert!(h.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(h.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn length_is_a_pseudo_metric(n in 2usize..=3, a: u64, b: u64) {
        let (g, h) = (element(n, 3.0, a), element(n, 3.0, b));
        let tol = 1e-9 * (1.0 + length(&g).unwrap() + length(&h).unwrap());
        prop_assert!((length(&g).unwrap() - length(&g.inverse()).unwrap()).abs() < tol);
        prop_assert!(subadditivity_check(&g, &h).unwrap() > -tol);
    }

    #[test]
    fn projection_is_bi_invariant(seed: u64) {
        let g = element(2, 3.0, seed);
        let k = GroupElement::rotation(seed as f64 * 1e-3);
        let a = cartan_projection(&g).unwrap();
        let b = cartan_projection(&(&(&k * &g) * &k.transpose())).unwrap();
        prop_assert!((a.values()[0] - b.values()[0]).abs() < 1e-9);
    }
}

#[test]
fn xi_backends_agree_with_agm() {
    let grid = BoundaryGrid::new(2, 4096).unwrap();
    for t in [0.0_f64, 0.7, 2.5, 5.0] {
        // Xi(a_t) = 1 / AGM(1, cosh(t/2)) for SL(2,R).
        let (mut a, mut b) = (1.0_f64, (0.5 * t).cosh());
        for _ in 0..40 {
            (a, b) = (0.5 * (a + b), (a * b).sqrt());
        }
        let exact = 1.0 / a;
        let g = GroupElement::exp_diagonal(&[0.5 * t, -0.5 * t]);
        for m in [XiMethod::Boundary, XiMethod::Iwasawa] {
            let v = harish_chandra_xi(&g, m, &grid).unwrap();
            assert!(
                (v / exact - 1.0).abs() < 1e-9,
                "{m:?} t={t}: {v} vs {exact}"
            );
        }
        let v = AdaptiveXi::default().at_element(&g).unwrap();
        assert!((v / exact - 1.0).abs() < 1e-12, "adaptive t={t}");
    }
}

#[test]
fn xi_sl3_is_normalized_and_symmetric() {
    let grid = BoundaryGrid::new(3, 24).unwrap();
    let e = GroupElement::identity(3);
    assert!((harish_chandra_xi(&e, XiMethod::Boundary, &grid).unwrap() - 1.0).abs() < 1e-10);
    let g = element(3, 1.0, 5);
    let a = harish_chandra_xi(&g, XiMethod::Boundary, &grid).unwrap();
    let b = harish_chandra_xi(&g.inverse(), XiMethod::Boundary, &grid).unwrap();
    assert!(a < 1.0 && (a - b).abs() / a < 1e-3, "{a} vs {b}");
}

#[test]
fn rejects_non_unimodular_input() {
    assert!(GroupElement::parse("2,0;0,1").is_err());
    assert!(GroupElement::parse("1,2;3").is_err());
}
