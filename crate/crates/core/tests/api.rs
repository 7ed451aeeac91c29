use std::f64::consts::PI;

use gjms_core::*;
use proptest::prelude::*;

fn d(n: usize, k: usize) -> DimPair {
    DimPair::new(n, k).unwrap()
}

#[test]
fn chart_kernel_of_a_quotient_is_the_transported_round_kernel() {
    let g = lens_group(5, &[1, 2]).unwrap();
    let dims = d(3, 1);
    let frame = ChartFrame::new(sample_sphere_points(4, 1, 3).remove(0));
    let flat = FlatChartGreen::new(&g, dims, frame.clone()).unwrap();
    let pulled = ChartPullback { kernel: GreenKernel::space_form(g, dims), frame };
    let w = chart_transport_factor(dims);
    for (x, y) in [([0.1, 0.2, -0.3], [0.4, -0.1, 0.0]), ([1.5, 0.0, 0.2], [-0.7, 0.3, 0.9])] {
        let a = flat.eval(&x, &y).unwrap();
        let b = conformal_transport_green(&pulled, &w, &x, &y).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs(), "{a} vs {b}");
    }
}

#[test]
fn rp3_pipeline() {
    let g: SpaceFormGroup = "L(2;1,1)".parse::<LensSpec>().unwrap().group().unwrap();
    assert!(validate_group(&g).ok());
    let xi = SpherePoint::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
    let a = mass_closed_form(&g, &xi, d(3, 1)).unwrap();
    assert!((a.value - 1.0 / (8.0 * PI)).abs() < 1e-15);
    let lim = mass_via_limit(&g, &xi, d(3, 1), &space_forms::DEFAULT_LIMIT_RADII).unwrap();
    assert!((lim.value - a.value).abs() < 1e-10 * a.value);
    assert_eq!(lim.method, MassMethod::LimitExtraction);
    let hj = hj_scalar_curvature(&g, &xi).unwrap();
    assert!((hj / (384.0 * PI * PI) - 1.0).abs() < 1e-6);
}

#[test]
fn errors_are_reported_not_panicked() {
    assert!(matches!(DimPair::new(4, 2), Err(GjmsError::InvalidDims { .. })));
    assert!(matches!(lens_group(6, &[1, 3]), Err(GjmsError::NonFreeAction(_))));
    let p = SpherePoint::basis(4, 0);
    assert!(matches!(green_sphere(d(3, 1), &p, &p), Err(GjmsError::Singularity { .. })));
    assert!(matches!(
        mass_closed_form(&lens_group(2, &[1, 1, 1, 1]).unwrap(), &SpherePoint::basis(8, 0), d(7, 1)),
        Err(GjmsError::InvalidDims { .. })
    ));
    assert!(matches!(ChartFrame::new(p.clone()).to_chart(&p.antipode()), Err(GjmsError::ChartPole)));
}

#[test]
fn curvature_of_the_round_chart() {
    let round = ScalarField::round_chart(5);
    let pack = conformal_curvature(&round, &[0.1, 0.0, -0.2, 0.05, 0.1], 5).unwrap();
    assert!((pack.scal - 20.0).abs() < 1e-6, "{pack:?}");
    // P₁ on the round sphere of dimension 5 acts on constants by n(n−2)/4
    let one = ScalarField::constant(1.0);
    let p1 = paneitz_apply(1, &round, &one, &[0.0; 5], 5).unwrap();
    assert!((p1 - 15.0 / 4.0).abs() < 1e-6, "{p1}");
}

proptest! {
    #[test]
    fn lens_spec_round_trips(p in 1u64..40, q in proptest::collection::vec(-20i64..20, 1..4)) {
        let s = LensSpec { p, q };
        prop_assert_eq!(s.to_string().parse::<LensSpec>().unwrap(), s);
    }

    #[test]
    fn mass_is_group_invariant_in_dimension_five(seed in 0u64..500) {
        let g = lens_group(3, &[1, 1, 2]).unwrap();
        let xi = sample_sphere_points(6, 1, seed).remove(0);
        let a = mass_closed_form(&g, &xi, d(5, 2)).unwrap().value;
        prop_assert!(a > 0.0);
        for h in g.elements() {
            let b = mass_closed_form(&g, &xi.transformed(h), d(5, 2)).unwrap().value;
            prop_assert!((a - b).abs() < 1e-13 * a);
        }
    }
}
