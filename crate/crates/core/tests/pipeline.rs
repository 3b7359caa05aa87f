use horolab::curve_engine::{
    calibrate, default_battery, discrepancy, translate_curve, AnalyticCurve, EmpiricalMeasure,
    TranslateOptions,
};
use horolab::degenerate::{curve_visual_image, fit_min_subsphere, SAMPLED_TOLERANCE};
use horolab::group::{GroupElement, Model};
use horolab::lattice::{haar_sample, in_fundamental_domain, LatticeTag};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translates_land_in_the_fundamental_domain(
        a in -2.0f64..2.0, b in 0.3f64..3.0, c in -2.0f64..2.0, t in 0.0f64..9.0, picard in any::<bool>(),
    ) {
        let (lattice, coeffs) = if picard {
            (LatticeTag::Picard, vec![vec![a, b], vec![0.0, c, 1.0]])
        } else {
            (LatticeTag::Modular, vec![vec![a, b, c]])
        };
        let curve = AnalyticCurve::new((0.0, 1.0), coeffs).unwrap();
        let base = GroupElement::identity(lattice.model());
        let m = translate_curve(&curve, &base, lattice, t, 300, 5, &TranslateOptions::default()).unwrap();
        prop_assert_eq!(m.len(), 300);
        prop_assert!((m.total_weight() - 1.0).abs() < 1e-12);
        for s in &m.samples {
            prop_assert!(in_fundamental_domain(lattice, s.point.base()));
            let v = s.point.frame().direction.as_vector();
            prop_assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn haar_measure_has_no_discrepancy_against_itself() {
    for lattice in [LatticeTag::Modular, LatticeTag::Picard] {
        let haar = haar_sample(lattice, 20_000, 3, 50.0).unwrap();
        let mut battery = default_battery(lattice);
        calibrate(&mut battery, &haar).unwrap();
        let r = discrepancy(&EmpiricalMeasure::from_haar(&haar).unwrap(), &battery).unwrap();
        assert!(r.max_defect < 1e-12, "{lattice}: {}", r.max_defect);
    }
}

#[test]
fn visual_images_separate_generic_and_planar_curves() {
    let planar = AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0], vec![0.0, 2.0]]).unwrap();
    let generic = AnalyticCurve::new((0.0, 1.0), vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap();
    let planar_fit =
        fit_min_subsphere(&curve_visual_image(&planar, Model::Complex, 400).unwrap(), SAMPLED_TOLERANCE).unwrap();
    let generic_fit =
        fit_min_subsphere(&curve_visual_image(&generic, Model::Complex, 400).unwrap(), SAMPLED_TOLERANCE).unwrap();
    assert!(!planar_fit.is_full());
    assert!(generic_fit.is_full());
}
