//! Homogenization to M × R: homogeneity, the generalized complex conditions
//! and their agreement with integrability on M.

use gcbundle::gcs::{check_almost, check_integrable};
use gcbundle::hitchin::{gcs_from_hitchin, HitchinPair};
use gcbundle::homog::{check_gc, check_homogeneity, check_symplectization, dehomogenize, homogenize, GcTriple};
use gcbundle::atiyah::EndoDL;
use gcbundle::sample;
use gcbundle::{Chart, KForm, Polyvector, TangentEndo};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn verdicts_agree_in_dimension_one(seed: u64) {
        let mut r = rng(seed);
        let c = Chart::new(&["x"]).unwrap();
        let t = sample::almost_triple(&mut r, &c);
        prop_assume!(check_almost(&t).passed());
        let g = homogenize(&t);
        prop_assert!(check_homogeneity(&g).passed());
        prop_assert_eq!(check_gc(&g).passed(), check_integrable(&t).unwrap().passed());
        prop_assert_eq!(dehomogenize(&g).unwrap(), t);
    }

    #[test]
    fn symplectization_of_contact_forms(seed: u64) {
        let mut r = rng(seed);
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        let omega = sample::contact_atiyah(&mut r, &c);
        let theta = omega.comp1().unwrap().clone();
        let t = gcs_from_hitchin(&HitchinPair::new(omega, EndoDL::zero(&c)).unwrap()).unwrap();
        let g = homogenize(&t);
        prop_assert!(check_symplectization(&g, &theta).passed());
        prop_assert!(check_homogeneity(&g).passed());
    }
}

#[test]
fn verdicts_agree_in_dimension_three() {
    let mut r = rng(17);
    let c = Chart::new(&["x", "y", "z"]).unwrap();
    let mut seen = [0usize; 2];
    for _ in 0..4 {
        let t = sample::almost_triple(&mut r, &c);
        if !check_almost(&t).passed() {
            continue;
        }
        let g = homogenize(&t);
        let on_m = check_integrable(&t).unwrap().passed();
        assert_eq!(check_homogeneity(&g).passed() && check_gc(&g).passed(), on_m);
        seen[on_m as usize] += 1;
    }
    assert!(seen[1] > 0);
}

#[test]
fn inhomogeneous_data_is_rejected() {
    let base = Chart::new(&["x"]).unwrap();
    let c = Chart::new(&["x", "r"]).unwrap();
    let sigma = KForm::from_components(&c, 2, [(vec![0, 1], gcbundle::parse_expr("r^2").unwrap())]).unwrap();
    let g = GcTriple::new(&base, TangentEndo::zero(&c), Polyvector::zero(&c, 2), sigma).unwrap();
    assert!(!check_homogeneity(&g).passed());
    assert!(matches!(dehomogenize(&g), Err(gcbundle::Error::NotHomogeneous)));
}
