use conelim::bounds::{
    a3_trend, calibrate_a3, check_a3for_psi, check_a3for_psi2, check_c0c1, check_conv1, check_fiberdiam,
    check_key_cor, check_lower1, c0c1_tightness, fiberdiam_bound, rescaled_to_constant, rescaled_to_radial,
    sup_distortion, AssumptionWitness, C0C1Variant,
};
use conelim::potential::{KSeq, LatticeSpec, RescaleParams};
use conelim::{MetricDescriptor, SolverConfig};

fn ratio10() -> (LatticeSpec, RescaleParams) {
    let spec = LatticeSpec::new(2.0, KSeq::Geometric { k0: 1.0, beta: 10.0 }).unwrap();
    (spec, RescaleParams::new(1e-4, 1.0).unwrap())
}

#[test]
fn conv1_holds_on_krd() {
    let (spec, rp) = ratio10();
    let mut margins = Vec::new();
    for d in [0.1, 0.5, 1.0] {
        let r = check_conv1(&spec, &rp, 4.0, d, 200, 7).unwrap();
        assert_eq!(r.samples, 200);
        assert!(r.passed(), "D={d}: {}", r.worst_margin);
        margins.push(r.rows[0].rhs);
    }
    // rhs = 2/(ND) shrinks with D.
    assert!(margins.windows(2).all(|w| w[1] < w[0]));
    assert!(check_conv1(&spec, &rp, 0.5, 0.1, 10, 7).is_err());
}

#[test]
fn lower1_estimates() {
    let (spec, rp) = ratio10();
    let reports = check_lower1(&spec, &rp, 4.0, 0.5, 200, 3).unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r.bound_id.as_str()).collect();
    assert_eq!(ids, ["est1", "est2", "est3", "est4", "est5"]);
    for r in &reports {
        assert!(r.passed() || r.vacuous, "{} margin {}", r.bound_id, r.worst_margin);
    }
    assert!(reports[2].passed());
}

#[test]
fn lower1_est2_vacuous_when_sum_too_small() {
    // One short block near the origin at a large scale: ΣA < 2(a/P)^{1/(1+α)}.
    let spec = LatticeSpec::new(2.0, KSeq::Explicit(vec![1.0, 2.0])).unwrap();
    let rp = RescaleParams::new(1.0, 1.0).unwrap();
    let reports = check_lower1(&spec, &rp, 2.0, 0.5, 20, 1).unwrap();
    assert!(reports[1].vacuous, "{:?}", reports[1].notes);
}

#[test]
fn a3_calibrated_over_sweep() {
    let sweep = [4.0, 8.0, 16.0, 32.0];
    let c = calibrate_a3(2.0, 1.0, 2.0, &sweep).unwrap();
    assert!(c > 0.0 && c < 1.0, "{c}");
    for s in [4.0, 8.0, 16.0] {
        let r = check_a3for_psi(s, f64::INFINITY, 1.0, 2.0, 2.0, c, 200, 11).unwrap();
        assert!(r.passed(), "S={s}: {}", r.worst_margin);
    }
    assert!(check_a3for_psi(8.0, 8.0, 1.0, 2.0, 2.0, c, 10, 1).is_err());
    // Gate θS^α√(S^{1−α}) ≥ 2R fails for small S.
    assert!(check_a3for_psi(1.0, f64::INFINITY, 1.0, 2.0, 2.0, c, 10, 1).unwrap().vacuous);
}

#[test]
fn a3_decay_rate() {
    let t = a3_trend(2.0, 1.0, 2.0, &[4.0, 8.0, 16.0, 32.0]).unwrap();
    assert!(t.ys.windows(2).all(|w| w[1] <= 0.5 * w[0]), "{:?}", t.ys);
    let p = t.exponent.unwrap();
    // −(α+1)/2 within a factor of 2.
    assert!((-3.0..=-0.75).contains(&p), "{p}");
}

#[test]
fn a3_radial_estimate() {
    let r = check_a3for_psi2(0.0, 0.1, 1.0, 2.0, 2.0, 0.5, 200, 5).unwrap();
    assert!(r.passed(), "{}", r.worst_margin);
    let mut sups = Vec::new();
    for w in [1e-1f64, 1e-2, 1e-3] {
        let t = w.cbrt();
        sups.push(check_a3for_psi2(0.0, t, 1.0, 2.0, 2.0, 0.5, 100, 5).unwrap().sup_lhs());
    }
    assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
}

#[test]
fn c0c1_variants() {
    let plain = check_c0c1(0.0, 1.0, 1.0, 2.0, C0C1Variant::Plain, 200, 2).unwrap();
    assert!(plain.passed() && plain.worst_margin > 0.0, "{}", plain.worst_margin);
    let prime = check_c0c1(8.0, f64::INFINITY, 1.0, 2.0, C0C1Variant::Prime, 200, 2).unwrap();
    assert!(prime.passed(), "{}", prime.worst_margin);
    let gated = check_c0c1(1.0, 2.0, 1.0, 2.0, C0C1Variant::Prime, 10, 2).unwrap();
    assert!(gated.vacuous && gated.samples == 0 && gated.worst_margin.is_nan());
}

#[test]
fn c0c1_transverse_margin_trend() {
    let rows = c0c1_tightness(0.0, 1.0, 1.0, 2.0, 0.5, &[0.01, 0.1, 1.0, 10.0, 100.0]).unwrap();
    assert!(rows.iter().all(|r| r.1 > 0.0), "{rows:?}");
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1), "{rows:?}");
    assert!(rows.last().unwrap().1 < 1e-4);
}

#[test]
fn key_cor_identity_pair() {
    let desc = MetricDescriptor::d_st(0.0, 1.0, 2.0);
    let base = AssumptionWitness { epsilon: 1e-6, c0: 1.0, c1: 1.0, kappa: 0.0, m: 1.0, r: 1.0 };
    let u = 1.0;
    let r = base.ledger().unwrap().rho(u + 2.0) + 2.0;
    let w = AssumptionWitness { r, ..base };
    let rep = check_key_cor(&desc, &desc, &w, 1.0, u, 10, 1, &SolverConfig::default()).unwrap();
    assert_eq!(rep.sup_lhs(), 0.0);
    assert!(rep.passed());
    let short = AssumptionWitness { r: 1.0, ..base };
    assert!(check_key_cor(&desc, &desc, &short, 1.0, u, 10, 1, &SolverConfig::default()).is_err());
}

#[test]
fn distortion_falls_along_constant_limit() {
    let cfg = SolverConfig::default();
    let mut sups = Vec::new();
    for s in [2.0, 4.0, 8.0] {
        let a = rescaled_to_constant(s, f64::INFINITY, 1.0, 2.0).unwrap();
        sups.push(sup_distortion(&a, &MetricDescriptor::Euclidean, 2.0, 10, 4, &cfg).unwrap());
    }
    assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
}

#[test]
fn distortion_falls_along_radial_limit() {
    let cfg = SolverConfig::default();
    let mut sups = Vec::new();
    for w in [1e-1f64, 1e-2] {
        let a = rescaled_to_radial(0.0, w.cbrt(), 1.0, 2.0).unwrap();
        let b = MetricDescriptor::InverseRadial { theta: 1.0 };
        sups.push(sup_distortion(&a, &b, 2.0, 10, 4, &cfg).unwrap());
    }
    assert!(sups[1] < sups[0], "{sups:?}");
}

#[test]
fn fiber_estimate() {
    let (spec, rp) = ratio10();
    let rep = check_fiberdiam(&spec, &rp, 2.0, 12).unwrap();
    assert!(rep.passed() && rep.samples > 0, "{}", rep.worst_margin);
    // Affine in r with the same prefactor.
    let b = |r: f64| fiberdiam_bound(&spec, &rp, r).unwrap().unwrap();
    let (b0, b2, b4) = (b(0.0), b(2.0), b(4.0));
    assert!(((b4 - b2) - (b2 - b0)).abs() < 1e-12 * b4 && b4 > b2);
    let mut prev = f64::INFINITY;
    for a in [1e-4, 1e-6, 1e-8] {
        let v = fiberdiam_bound(&spec, &RescaleParams::new(a, 1.0).unwrap(), 2.0).unwrap().unwrap();
        assert!(v < prev);
        prev = v;
    }
    assert!(prev < 1e-2);
}
