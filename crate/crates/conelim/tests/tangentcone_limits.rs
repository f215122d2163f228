use conelim::bounds::fiberdiam_bound;
use conelim::error::Error;
use conelim::potential::{KSeq, LatticeSpec};
use conelim::tangentcone::{
    classify_limit, limit_invariants, ln_k, rescale_params, table1, table1_matches, verify_convergence,
    ConvergenceOptions, Family, LimitDescriptor, LimitInvariants, LimitThresholds, LimitValue, SequenceRule,
    WindowBlock,
};
use conelim::SolverConfig;

fn supergeo(beta: f64) -> LatticeSpec {
    LatticeSpec::new(2.0, KSeq::SuperGeometric { k0: 1.0, beta }).unwrap()
}

/// `K_{2n} = 2^{(n+1)²}`, `K_{2n+1} = 2K_{2n}`: gaps grow, blocks keep ratio 2.
fn ratio_two_blocks() -> LatticeSpec {
    let ks = (0..15).flat_map(|n| {
        let k = 2f64.powi((n + 1) * (n + 1));
        [k, 2.0 * k]
    });
    LatticeSpec::new(2.0, KSeq::Explicit(ks.collect())).unwrap()
}

/// `a_i = θ_i^{−1}K_{2i+1}^{−2}K_{2i+2}^{1−α}` with `θ_i = β^{ci}`, `i = 1..=m`.
fn gap_rule(spec: &LatticeSpec, beta: f64, c: f64, m: usize) -> SequenceRule {
    let alpha = spec.alpha;
    let a = (1..=m)
        .map(|i| {
            let ln_theta = c * i as f64 * beta.ln();
            (-ln_theta - 2.0 * ln_k(spec, 2 * i + 1).unwrap() + (1.0 - alpha) * ln_k(spec, 2 * i + 2).unwrap()).exp()
        })
        .collect();
    SequenceRule::ExplicitList { a, n: (1..=m).collect() }
}

fn classify(spec: &LatticeSpec, rule: &SequenceRule, horizon: usize, th: &LimitThresholds) -> LimitDescriptor {
    let inv = limit_invariants(spec, rule, horizon, th).unwrap();
    classify_limit(&inv, spec).unwrap()
}

#[test]
fn pin_lower_on_fast_lattice() {
    let spec = supergeo(2.0);
    let inv = limit_invariants(&spec, &SequenceRule::PinLower(1.0), 10, &LimitThresholds::default()).unwrap();
    assert_eq!((inv.l1, inv.l2), (LimitValue::Finite(1.0), LimitValue::Infinite));
    let lim = classify_limit(&inv, &spec).unwrap();
    assert_eq!(lim, LimitDescriptor::Dst { s: 1.0, t: f64::INFINITY, alpha: 2.0 });
    assert_eq!(lim.name(), "d_1^inf");
}

#[test]
fn pin_upper_on_fast_lattice() {
    let spec = supergeo(2.0);
    let lim = classify(&spec, &SequenceRule::PinUpper(1.0), 10, &LimitThresholds::default());
    assert_eq!(lim.name(), "d_0^1");
}

#[test]
fn theta_recipe() {
    let spec = supergeo(2.0);
    let inv = limit_invariants(&spec, &SequenceRule::Theta(1.0), 20, &LimitThresholds::default()).unwrap();
    assert_eq!((inv.l1, inv.l2), (LimitValue::Zero, LimitValue::Zero));
    let LimitValue::Finite(l3) = inv.l3.unwrap() else { panic!("{inv:?}") };
    assert!((l3 - 1.0).abs() < 1e-9);
    assert_eq!(classify_limit(&inv, &spec).unwrap(), LimitDescriptor::Affine { c: 1.0, theta: 1.0 });
}

#[test]
fn gap_cases_from_explicit_scales() {
    // Scales this small leave f64 range well before the default thresholds are reached.
    let th = LimitThresholds { zero: 1e-3, infinity: 1e3, agree: 0.01 };
    let spec = supergeo(10.0);
    assert_eq!(classify(&spec, &gap_rule(&spec, 10.0, 2.0, 4), 4, &th), LimitDescriptor::Euclidean);
    assert_eq!(classify(&spec, &gap_rule(&spec, 10.0, -2.0, 4), 4, &th), LimitDescriptor::InverseRadial);
}

fn gap_invariants(l3: LimitValue) -> LimitInvariants {
    let z = Some(LimitValue::Zero);
    let inf = Some(LimitValue::Infinite);
    LimitInvariants {
        l1: LimitValue::Zero,
        l2: LimitValue::Zero,
        l3: Some(l3),
        window: vec![
            WindowBlock { offset: -1, lower: z, upper: z },
            WindowBlock { offset: 0, lower: z, upper: z },
            WindowBlock { offset: 1, lower: inf, upper: inf },
            WindowBlock { offset: 2, lower: inf, upper: inf },
        ],
        alpha: 2.0,
    }
}

#[test]
fn gap_case_dispatch() {
    let spec = supergeo(2.0);
    assert_eq!(classify_limit(&gap_invariants(LimitValue::Infinite), &spec).unwrap(), LimitDescriptor::Euclidean);
    assert_eq!(classify_limit(&gap_invariants(LimitValue::Zero), &spec).unwrap(), LimitDescriptor::InverseRadial);
    let lim = classify_limit(&gap_invariants(LimitValue::Finite(0.5)), &spec).unwrap();
    assert_eq!(lim, LimitDescriptor::Affine { c: 1.0, theta: 2.0 });
    let mut inv = gap_invariants(LimitValue::Zero);
    inv.l3 = None;
    assert!(matches!(classify_limit(&inv, &spec), Err(Error::Inconclusive(_))));
}

#[test]
fn two_visible_blocks_give_union() {
    let spec = supergeo(2.0);
    let f = |v: f64| Some(LimitValue::Finite(v));
    let inv = LimitInvariants {
        l1: LimitValue::Finite(1.0),
        l2: LimitValue::Finite(2.0),
        l3: None,
        window: vec![
            WindowBlock { offset: -1, lower: Some(LimitValue::Zero), upper: Some(LimitValue::Zero) },
            WindowBlock { offset: 0, lower: f(1.0), upper: f(2.0) },
            WindowBlock { offset: 1, lower: f(3.0), upper: f(4.0) },
            WindowBlock { offset: 2, lower: Some(LimitValue::Infinite), upper: Some(LimitValue::Infinite) },
        ],
        alpha: 2.0,
    };
    let lim = classify_limit(&inv, &spec).unwrap();
    assert_eq!(lim.name(), "d_I I=(1,2)u(3,4)");
}

#[test]
fn ratio_two_lattice() {
    let lim = classify(&ratio_two_blocks(), &SequenceRule::PinLower(1.0), 12, &LimitThresholds::default());
    let LimitDescriptor::Dst { s, t, .. } = lim else { panic!("{lim:?}") };
    assert!((s - 1.0).abs() < 1e-12 && (t - 2.0).abs() < 1e-12);
    assert_eq!(lim.name(), "d_1^2");
}

#[test]
fn non_decreasing_scales_are_inconclusive() {
    let spec = supergeo(2.0);
    let rule = SequenceRule::ExplicitList { a: vec![0.1; 6], n: (1..=6).collect() };
    assert!(matches!(limit_invariants(&spec, &rule, 6, &LimitThresholds::default()), Err(Error::Inconclusive(_))));
}

#[test]
fn table_rows() {
    let rows = table1(2.0).unwrap();
    assert!(table1_matches(&rows));
    let row = |f: Family| rows.iter().find(|r| r.metric == f).unwrap();
    assert_eq!((row(Family::DST).at_zero, row(Family::DST).at_infinity), (Family::H0, Family::InverseRadial));
    assert_eq!((row(Family::D0Inf).at_zero, row(Family::D0Inf).at_infinity), (Family::D0Inf, Family::D0Inf));
    assert_eq!((row(Family::Affine).at_zero, row(Family::Affine).at_infinity), (Family::InverseRadial, Family::H0));
    assert!(table1(1.0).is_err());
}

#[test]
fn pin_lower_converges() {
    let spec = supergeo(2.0);
    let rule = SequenceRule::PinLower(1.0);
    let lim = classify(&spec, &rule, 10, &LimitThresholds::default());
    let cfg = SolverConfig { refinement_rounds: 4, grid_resolution: 1.0 / 8.0, ..Default::default() };
    let opts = ConvergenceOptions { npairs: 6, nstraddle: 2, cells: 8, seed: 3 };
    let r = 2.0;
    let recs = verify_convergence(&spec, &rule, &lim, r, &[1, 2], &cfg, &opts).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs[1].distortion + recs[1].fiber_sup < recs[0].distortion + recs[0].fiber_sup, "{recs:?}");
    for (rec, i) in recs.iter().zip([1, 2]) {
        let (rp, _) = rescale_params(&spec, &rule, i, &lim).unwrap();
        let bound = fiberdiam_bound(&spec, &rp, r).unwrap().unwrap();
        assert!(rec.fiber_sup / std::f64::consts::PI <= bound, "{rec:?} vs {bound}");
    }
}
