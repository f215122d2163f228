use conelim::bounds::{calibrate_a3, key_cor_scale, rescaled_to_constant, AssumptionWitness};
use conelim::metric::distance;
use conelim::probes::{
    axis_segment_length, eps_isometry_check, fit_axis_growth, pole_test_at_origin, NO_AXIS_GEODESIC,
};
use conelim::{MetricDescriptor, Point3, SolverConfig};

#[test]
fn self_check_passes() {
    let cfg = SolverConfig::default();
    for desc in [MetricDescriptor::Euclidean, MetricDescriptor::d_st(0.0, 1.0, 2.0)] {
        let r = eps_isometry_check(&desc, &desc, 1.0, 0.05, 10, 1, &cfg).unwrap();
        assert!(r.passed && r.distortion_observed == 0.0 && r.surjectivity_defect == 0.0, "{r:?}");
    }
    assert!(eps_isometry_check(&MetricDescriptor::Euclidean, &MetricDescriptor::Euclidean, 0.1, 0.2, 4, 1, &cfg).is_err());
}

#[test]
fn flat_and_cone_are_far_apart() {
    let cfg = SolverConfig::default();
    let cone = MetricDescriptor::InverseRadial { theta: 1.0 };
    let r = eps_isometry_check(&MetricDescriptor::Euclidean, &cone, 1.0, 0.05, 20, 2, &cfg).unwrap();
    assert!(!r.passed && r.distortion_observed > 0.5, "{r:?}");
}

#[test]
fn identity_is_isometry_at_recipe_delta() {
    // Radius R and δ from the constant-limit witness, with the universal constant set to 1.
    let (s, theta, alpha, r) = (1e20, 1.0, 2.0, 1.0);
    let c_alpha = calibrate_a3(alpha, theta, 2.0, &[4.0, 8.0, 16.0, 32.0]).unwrap();
    let probe = AssumptionWitness::constant_limit(s, f64::INFINITY, theta, alpha, 1.0, c_alpha).unwrap();
    let ledger = probe.ledger().unwrap();
    let big_r = ledger.rho(ledger.u_of_r(r) + 2.0) + 1.0;
    let w = AssumptionWitness::constant_limit(s, f64::INFINITY, theta, alpha, big_r, c_alpha).unwrap();
    assert!(w.epsilon <= 1.0);
    let delta = key_cor_scale(&w);
    assert!(delta < r, "{delta}");
    let a = rescaled_to_constant(s, f64::INFINITY, theta, alpha).unwrap();
    let res = eps_isometry_check(&a, &MetricDescriptor::Euclidean, r, delta, 20, 3, &SolverConfig::default()).unwrap();
    assert!(res.passed, "{res:?} at delta {delta}");
}

#[test]
fn axis_lengths_diverge() {
    let deltas = [1e-1, 1e-2, 1e-3, 1e-4];
    for alpha in [1.5, 2.0, 3.0] {
        let rows = axis_segment_length(alpha, 0.4, 0.6, &deltas, 1e-9).unwrap();
        assert!(rows.windows(2).all(|w| w[1].1 > w[0].1), "alpha {alpha}: {rows:?}");
    }
    let rows = axis_segment_length(2.0, 0.4, 0.6, &deltas, 1e-9).unwrap();
    let fit = fit_axis_growth(&rows).unwrap();
    assert!(fit.slope > 0.0 && fit.r_squared >= 0.95, "{fit:?}");
    assert!(axis_segment_length(2.0, 0.6, 0.4, &deltas, 1e-9).is_err());
    assert!(axis_segment_length(2.0, 0.4, 0.6, &[1e-3, 1e-2], 1e-9).is_err());
}

#[test]
fn origin_is_not_a_pole() {
    let desc = MetricDescriptor::d_st(0.0, f64::INFINITY, 2.0);
    let p = Point3::new(1.0, 0.0, 0.0);
    let d_list = [1e-1, 1e-2, 1e-3, 1e-4];
    let cfg = SolverConfig::default();
    let res = pole_test_at_origin(&desc, p, &d_list, &cfg).unwrap();
    assert!(res.detour_distance.is_finite());
    assert!(res.straight_lengths.windows(2).all(|w| w[1].1 > w[0].1), "{res:?}");
    assert_eq!(res.verdict, NO_AXIS_GEODESIC);
    // Projecting the witness's final excursion onto the slab boundary shortens it.
    let (ex, proj) = (res.excursion_length.unwrap(), res.projected_length.unwrap());
    assert!(proj < ex, "{proj} >= {ex}");

    let finer = pole_test_at_origin(&desc, p, &d_list, &cfg.refined()).unwrap();
    assert_eq!(finer.verdict, res.verdict);

    // An off-axis point at the same norm is no farther.
    let off = distance(&desc, Point3::ORIGIN, Point3::new(0.0, 1.0, 0.0), &cfg).unwrap().value;
    assert!(off <= res.detour_distance, "{off} > {}", res.detour_distance);

    assert!(pole_test_at_origin(&desc, Point3::new(1.0, 0.1, 0.0), &d_list, &cfg).is_err());
    assert!(pole_test_at_origin(&MetricDescriptor::Euclidean, p, &d_list, &cfg).is_err());
}
