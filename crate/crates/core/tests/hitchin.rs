//! Contact forms as Atiyah 2-forms and the contact-Hitchin correspondence.

use gcbundle::atiyah::{AtiyahForm, EndoDL, ValueKind};
use gcbundle::gcs::{check_almost, check_integrable};
use gcbundle::hitchin::{
    check_hitchin_pair, contact_to_atiyah, gcs_from_hitchin, hitchin_from_gcs, inverse_residual, invert_atiyah2,
    omega_of_jacobi, round_trip_triple, HitchinPair,
};
use gcbundle::imgroupoid::decompose_atiyah;
use gcbundle::sample;
use gcbundle::{parse_expr, Chart, KForm, Matrix, RationalExpr};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn e(s: &str) -> RationalExpr {
    parse_expr(s).unwrap()
}

fn r3() -> Chart {
    Chart::new(&["x", "y", "z"]).unwrap()
}

#[test]
fn standard_contact_form() {
    let c = r3();
    let theta = KForm::one_form(&c, vec![e("-y"), e("0"), e("1")]).unwrap();
    let ca = contact_to_atiyah(&theta).unwrap();
    let dxdy = KForm::from_components(&c, 2, [(vec![0, 1], e("1"))]).unwrap();
    assert_eq!(ca.omega, AtiyahForm::new(ValueKind::Line, dxdy, Some(theta.clone())).unwrap());
    assert!(ca.nondegenerate);
    assert!(ca.omega.d().is_zero());
    let (mu0, mu1) = decompose_atiyah(&ca.omega).unwrap();
    assert!(mu0.is_zero());
    assert_eq!(mu1, Some(theta));
}

#[test]
fn degenerate_forms_are_flagged() {
    let c = r3();
    let ca = contact_to_atiyah(&KForm::dx(&c, 2)).unwrap();
    assert!(!ca.nondegenerate);
    assert!(invert_atiyah2(&ca.omega).is_err());
    assert!(contact_to_atiyah(&KForm::zero(&c, 2)).is_err());
    let p = HitchinPair::new(ca.omega, EndoDL::zero(&c)).unwrap();
    assert!(!check_hitchin_pair(&p).passed());
    assert!(matches!(gcs_from_hitchin(&p), Err(gcbundle::Error::NotHitchin)));
}

#[test]
fn inverse_is_two_sided() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for c in [Chart::new(&["x"]).unwrap(), r3()] {
        for _ in 0..4 {
            let omega = sample::contact_atiyah(&mut rng, &c);
            let j = invert_atiyah2(&omega).unwrap();
            assert!(inverse_residual(&omega, &j).unwrap().passed());
            assert_eq!(omega_of_jacobi(&j).unwrap(), omega);
        }
    }
}

#[test]
fn non_symmetric_phi_breaks_the_pair() {
    let c = r3();
    let omega = contact_to_atiyah(&sample::standard_contact_form(&c)).unwrap().omega;
    let phi = Matrix::from_fn(4, 4, |i, j| if i == 0 && j == 1 { e("1") } else { e("0") });
    let p = HitchinPair::new(omega, EndoDL::from_matrix(&c, phi).unwrap()).unwrap();
    let set = check_hitchin_pair(&p);
    assert!(!set.get("hitchin.symmetric").unwrap().passed());
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn round_trips(seed: u64, big: bool) {
        let mut r = rng(seed);
        let c = if big { r3() } else { Chart::new(&["x"]).unwrap() };
        let p = sample::hitchin_pair(&mut r, &c);
        prop_assert!(check_hitchin_pair(&p).passed());
        let t = gcs_from_hitchin(&p).unwrap();
        prop_assert!(check_almost(&t).passed());
        prop_assert_eq!(hitchin_from_gcs(&t).unwrap(), p);
        prop_assert!(round_trip_triple(&t).unwrap());
        if !big {
            prop_assert!(check_integrable(&t).unwrap().passed());
        }
    }
}
