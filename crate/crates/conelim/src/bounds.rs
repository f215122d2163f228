//! Sampled checks of the quantitative estimates: lattice sum versus block
//! integrals, lower and upper bounds on the potentials, closeness of the
//! dilated potentials to their limits, and the distance and fiber estimates.
//!
//! Each check returns a [`BoundReport`] whose rows carry `lhs ≤ rhs` with
//! evaluator errors already folded in (lhs raised, rhs lowered).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, precondition, Error, Result};
use crate::fit::power_law_exponent;
use crate::geom::{ConstantsLedger, Point3};
use crate::metric::{distance_field, pair_distortion, MetricDescriptor, SolverConfig};
use crate::potential::{a_st, phi_a, phi_blocks, phi_st, sum_a, LatticeSpec, RescaleParams};
use crate::sampling::{sample_ball, sample_krd, sample_pairs, seeded_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSample {
    pub point: Point3,
    pub point2: Option<Point3>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
}

impl BoundSample {
    pub fn new(point: Point3, lhs: f64, rhs: f64) -> Self {
        BoundSample { point, point2: None, lhs, rhs, margin: rhs - lhs }
    }

    pub fn pair(x: Point3, y: Point3, lhs: f64, rhs: f64) -> Self {
        BoundSample { point: x, point2: Some(y), lhs, rhs, margin: rhs - lhs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: String,
    pub samples: usize,
    /// Minimum of `rhs − lhs`; NaN for vacuous reports.
    pub worst_margin: f64,
    pub worst_point: Point3,
    pub worst_point2: Option<Point3>,
    pub notes: String,
    /// The precondition of the estimate failed; nothing was checked.
    pub vacuous: bool,
    pub rows: Vec<BoundSample>,
}

impl BoundReport {
    pub fn from_rows(bound_id: &str, rows: Vec<BoundSample>, notes: impl Into<String>) -> Result<Self> {
        // NaN margins count as failures.
        let key = |r: &BoundSample| if r.margin.is_nan() { f64::NEG_INFINITY } else { r.margin };
        let mut worst: Option<&BoundSample> = None;
        for r in &rows {
            if worst.is_none_or(|w| key(r) < key(w)) {
                worst = Some(r);
            }
        }
        let Some(w) = worst else {
            return Err(Error::EmptySample(format!("{bound_id}: no samples")));
        };
        let worst_margin = key(w);
        let (worst_point, worst_point2) = (w.point, w.point2);
        Ok(BoundReport {
            bound_id: bound_id.to_string(),
            samples: rows.len(),
            worst_margin,
            worst_point,
            worst_point2,
            notes: notes.into(),
            vacuous: false,
            rows,
        })
    }

    pub fn vacuous(bound_id: &str, notes: impl Into<String>) -> Self {
        BoundReport {
            bound_id: bound_id.to_string(),
            samples: 0,
            worst_margin: f64::NAN,
            worst_point: Point3::ORIGIN,
            worst_point2: None,
            notes: notes.into(),
            vacuous: true,
            rows: Vec::new(),
        }
    }

    /// Non-vacuous with every margin nonnegative.
    pub fn passed(&self) -> bool {
        !self.vacuous && self.worst_margin >= 0.0
    }

    /// Non-vacuous with some negative margin.
    pub fn failed(&self) -> bool {
        !self.vacuous && !(self.worst_margin >= 0.0)
    }

    /// Largest `lhs` over the rows.
    pub fn sup_lhs(&self) -> f64 {
        self.rows.iter().map(|r| r.lhs).fold(0.0, f64::max)
    }
}

/// Instantiation of the standing assumptions for a pair `(Φ, Φ_∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionWitness {
    pub epsilon: f64,
    pub c0: f64,
    pub c1: f64,
    pub kappa: f64,
    pub m: f64,
    pub r: f64,
}

impl AssumptionWitness {
    pub fn validate(&self) -> Result<()> {
        let w = self;
        if w.epsilon > 0.0 && w.c0 > 0.0 && w.c1 > 0.0 && w.m > 0.0 && w.r > 0.0 && w.kappa >= 0.0 {
            Ok(())
        } else {
            domain("witness constants must be positive (kappa >= 0)")
        }
    }

    pub fn ledger(&self) -> Result<ConstantsLedger> {
        ConstantsLedger::new(self.c0, self.c1, self.kappa, self.m, self.epsilon)
    }

    /// Constants for `Φ_{S′,P}^{T′}` against `1/(θ²(α−1))` with
    /// `P^{1/(1+α)} = θ√(S^{1−α} − T^{1−α})`.
    pub fn constant_limit(s: f64, t: f64, theta: f64, alpha: f64, r: f64, c_alpha: f64) -> Result<Self> {
        let g = gap_gauge(s, t, theta, alpha)?;
        Ok(AssumptionWitness {
            epsilon: c_alpha * r / (theta.powi(3) * s.powf(alpha) * g),
            c0: 1.0 / (2.0 * theta * theta * (alpha - 1.0)),
            c1: (1.0 / (alpha - 1.0)).max(0.5 * c_alpha) / (theta * theta),
            kappa: 1.0,
            m: 1.0,
            r,
        })
    }

    /// Constants for `Φ_{S′,P}^{T′}` against `1/(θ|ζ|)` with `P^{1/(1+α)} = θ(T − S)`.
    pub fn radial_limit(s: f64, t: f64, theta: f64, alpha: f64, r: f64) -> Result<Self> {
        check_finite_interval(s, t)?;
        let w = t.powf(alpha) * (t - s);
        Ok(AssumptionWitness {
            epsilon: (1.0 + theta * w) * w,
            c0: 1.0 / (theta * (1.0 + theta * w)),
            c1: 2.0 / theta,
            kappa: 0.0,
            m: 3.0,
            r,
        })
    }
}

fn check_interval(s: f64, t: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() && t > s {
        Ok(())
    } else {
        domain(format!("need 0 <= S < T, got S={s}, T={t}"))
    }
}

fn check_finite_interval(s: f64, t: f64) -> Result<()> {
    check_interval(s, t)?;
    if t.is_finite() {
        Ok(())
    } else {
        domain("T must be finite")
    }
}

/// `√(S^{1−α} − T^{1−α})`.
fn gap_gauge(s: f64, t: f64, theta: f64, alpha: f64) -> Result<f64> {
    check_interval(s, t)?;
    if !(alpha > 1.0 && theta > 0.0) {
        return domain("need alpha > 1 and theta > 0");
    }
    if s == 0.0 {
        return domain("S must be positive for the constant-limit dilation");
    }
    Ok((s.powf(1.0 - alpha) - t.powf(1.0 - alpha)).sqrt())
}

/// `(S′, T′, P)` with `c = P^{1/(1+α)}`, `S′ = S/c`, `T′ = T/c`.
fn dilate(s: f64, t: f64, c: f64, alpha: f64) -> (f64, f64, f64) {
    (s / c, t / c, c.powf(1.0 + alpha))
}

/// Dilated `d_S^T` with `P^{1/(1+α)} = θ√(S^{1−α} − T^{1−α})`; tends to the
/// constant `1/(θ²(α−1))` as `S^α√(S^{1−α} − T^{1−α}) → ∞`.
pub fn rescaled_to_constant(s: f64, t: f64, theta: f64, alpha: f64) -> Result<MetricDescriptor> {
    let c = theta * gap_gauge(s, t, theta, alpha)?;
    let (s, t, p) = dilate(s, t, c, alpha);
    Ok(MetricDescriptor::PotentialST { s, t, p, alpha })
}

/// Dilated `d_S^T` with `P^{1/(1+α)} = θ(T − S)`; tends to `1/(θ|ζ|)` as
/// `T^α(T − S) → 0`.
pub fn rescaled_to_radial(s: f64, t: f64, theta: f64, alpha: f64) -> Result<MetricDescriptor> {
    check_finite_interval(s, t)?;
    if !(alpha > 1.0 && theta > 0.0) {
        return domain("need alpha > 1 and theta > 0");
    }
    let (s, t, p) = dilate(s, t, theta * (t - s), alpha);
    Ok(MetricDescriptor::PotentialST { s, t, p, alpha })
}

fn phi_of(desc: &MetricDescriptor, z: Point3, tol: f64) -> Result<crate::potential::EvalResult> {
    crate::metric::conformal_factor(desc, z, tol)
}

fn collect<T: Send>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

fn check_krd_params(r: f64, d: f64) -> Result<()> {
    if r >= 1.0 && 1.0 >= d && d > 0.0 {
        Ok(())
    } else {
        precondition(format!("need R >= 1 >= D > 0, got R={r}, D={d}"))
    }
}

/// `|Φ_a − Σ_n Φ_{S_n,P}^{T_n}| ≤ 2/(ND)` on `K(R,D)`.
pub fn check_conv1(
    spec: &LatticeSpec,
    rp: &RescaleParams,
    r: f64,
    d: f64,
    nsamples: usize,
    seed: u64,
) -> Result<BoundReport> {
    check_krd_params(r, d)?;
    let pts = sample_krd(r, d, nsamples, &mut seeded_rng("conv1", seed))?;
    let rhs = 2.0 / (rp.n(spec.alpha) * d);
    let tol = 1e-4 * rhs;
    let rows = collect(
        pts.par_iter()
            .map(|&z| {
                let pa = phi_a(spec, rp, z, tol)?;
                let pb = phi_blocks(spec, rp, z, tol, 1e-3 * rhs)?;
                let lhs = (pa.value - pb.value).abs() + pa.error_bound + pb.error_bound;
                Ok(BoundSample::new(z, lhs, rhs))
            })
            .collect(),
    )?;
    BoundReport::from_rows("conv1", rows, format!("R={r} D={d} rhs=2/(ND)={rhs:.6e}"))
}

fn min_one_over(z: Point3) -> f64 {
    (1.0 / z.norm()).min(1.0)
}

/// The five block estimates, one report each (`est1` … `est5`).
pub fn check_lower1(
    spec: &LatticeSpec,
    rp: &RescaleParams,
    r: f64,
    d: f64,
    nsamples: usize,
    seed: u64,
) -> Result<Vec<BoundReport>> {
    check_krd_params(r, d)?;
    let alpha = spec.alpha;
    let p = rp.p;
    let pts = sample_krd(r, d, nsamples, &mut seeded_rng("lower1", seed))?;
    let blocks: Vec<(f64, f64)> = (0..3).map_while(|n| rp.block(spec, n)).collect();
    let tol = 1e-10;
    let tail_tol = 1e-10;

    // est1 on the first blocks.
    let a_blocks: Vec<f64> = collect(blocks.iter().map(|&(s, t)| a_st(s, t, p, alpha)).collect())?;
    let rows1 = collect(
        pts.par_iter()
            .map(|&z| {
                let mut out = Vec::new();
                for (&(s, t), &a) in blocks.iter().zip(&a_blocks) {
                    let phi = phi_st(s, t, p, alpha, z, tol)?;
                    out.push(BoundSample::new(z, a * min_one_over(z), phi.lower()));
                }
                Ok(out)
            })
            .collect(),
    )?;
    let est1 = BoundReport::from_rows(
        "est1",
        rows1.into_iter().flatten().collect(),
        format!("blocks n=0..{}; lhs=A_n min(1/|z|,1), rhs=Phi_n", blocks.len()),
    )?;

    // est2, with ΣA raised by its truncation tail.
    let sum = sum_a(spec, rp, tail_tol)? + tail_tol;
    let a_prime = sum - 2.0 * (rp.a / p).powf(1.0 / (1.0 + alpha));
    let est2 = if a_prime <= 0.0 {
        BoundReport::vacuous("est2", format!("sum A - 2(a/P)^(1/(1+alpha)) = {a_prime:.6e} <= 0"))
    } else {
        let rows = collect(
            pts.par_iter()
                .map(|&z| Ok(BoundSample::new(z, a_prime * min_one_over(z), phi_a(spec, rp, z, tol)?.lower())))
                .collect(),
        )?;
        BoundReport::from_rows("est2", rows, format!("A'={a_prime:.9e}"))?
    };

    // est3.
    let k3 = p.powf(-1.0 / alpha) * alpha * 2f64.powf(1.0 / alpha) / (alpha - 1.0);
    let rows3 = collect(
        pts.par_iter()
            .map(|&z| {
                let sum = phi_blocks(spec, rp, z, tol, tail_tol)?;
                let rhs = k3 * z.norm().powf(1.0 / alpha) / z.zc_norm();
                Ok(BoundSample::new(z, sum.upper(), rhs))
            })
            .collect(),
    )?;
    let est3 = BoundReport::from_rows("est3", rows3, "lhs=sum_n Phi_n")?;

    // est4 from the first qualifying block.
    let rows4 = collect(
        pts.par_iter()
            .map(|&z| {
                let floor = (2.0 * z.norm() / p).powf(1.0 / alpha);
                let Some(n0) = (0..64).find(|&n| rp.block(spec, n).is_some_and(|(s, _)| s >= floor && s > 0.0))
                else {
                    return Ok(None);
                };
                let (s0, _) = rp.block(spec, n0).unwrap();
                let total = phi_blocks(spec, rp, z, tol, tail_tol)?;
                let mut head = crate::potential::EvalResult::exact(0.0);
                for n in 0..n0 {
                    let (s, t) = rp.block(spec, n).unwrap();
                    head = head.add(phi_st(s, t, p, alpha, z, tol)?);
                }
                let lhs = total.value - head.value + total.error_bound + head.error_bound;
                let rhs = 2.0 * s0.powf(1.0 - alpha) / (p * (alpha - 1.0));
                Ok(Some(BoundSample::new(z, lhs, rhs)))
            })
            .collect(),
    )?;
    let rows4: Vec<BoundSample> = rows4.into_iter().flatten().collect();
    let est4 = if rows4.is_empty() {
        BoundReport::vacuous("est4", "no sample has a block with S_n0 >= (2|z|/P)^(1/alpha)")
    } else {
        BoundReport::from_rows("est4", rows4, "smallest qualifying n0 per sample")?
    };

    // est5 for n0 = 0, 1, 2.
    let rows5 = collect(
        pts.par_iter()
            .map(|&z| {
                let mut out = Vec::new();
                let mut acc = crate::potential::EvalResult::exact(0.0);
                for &(s, t) in &blocks {
                    acc = acc.add(phi_st(s, t, p, alpha, z, tol)?);
                    out.push(BoundSample::new(z, acc.upper(), t / d));
                }
                Ok(out)
            })
            .collect(),
    )?;
    let est5 =
        BoundReport::from_rows("est5", rows5.into_iter().flatten().collect(), format!("n0=0..{}", blocks.len()))?;
    Ok(vec![est1, est2, est3, est4, est5])
}

/// Deterministic probe set in `B(R)`: the axis points `(±R,0,0)`, the origin
/// and Fibonacci spheres at radii `R/4, R/2, R`.
pub fn ball_probe_points(r: f64) -> Vec<Point3> {
    let mut out = vec![Point3::new(r, 0.0, 0.0), Point3::new(-r, 0.0, 0.0), Point3::ORIGIN];
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let n = 48;
    for rad in [0.25 * r, 0.5 * r, r] {
        for i in 0..n {
            let c = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = (1.0 - c * c).sqrt();
            let phi = golden * i as f64;
            out.push(Point3::new(rad * c, rad * s * phi.cos(), rad * s * phi.sin()));
        }
    }
    out
}

fn a3_rows(
    s: f64,
    t: f64,
    theta: f64,
    alpha: f64,
    pts: &[Point3],
) -> Result<(Vec<(Point3, f64)>, f64)> {
    let desc = rescaled_to_constant(s, t, theta, alpha)?;
    let limit = 1.0 / (theta * theta * (alpha - 1.0));
    let scale = theta.powi(3) * s.powf(alpha) * gap_gauge(s, t, theta, alpha)?;
    let lhs = collect(
        pts.par_iter()
            .map(|&z| {
                let phi = phi_of(&desc, z, 1e-12)?;
                Ok((z, (phi.value - limit).abs() + phi.error_bound))
            })
            .collect(),
    )?;
    Ok((lhs, scale))
}

/// Smallest `C` with `|Φ − 1/(θ²(α−1))| ≤ C R/(θ³S^α√(S^{1−α} − T^{1−α}))`
/// on [`ball_probe_points`], maximized over the sweep `s_list` (`T = ∞`).
pub fn calibrate_a3(alpha: f64, theta: f64, r: f64, s_list: &[f64]) -> Result<f64> {
    let pts = ball_probe_points(r);
    let mut c: f64 = 0.0;
    for &s in s_list {
        let (rows, scale) = a3_rows(s, f64::INFINITY, theta, alpha, &pts)?;
        for (_, lhs) in rows {
            c = c.max(lhs * scale / r);
        }
    }
    Ok(c)
}

/// `|Φ_{S′,P}^{T′} − 1/(θ²(α−1))| ≤ C_α R/(θ³S^α√(S^{1−α} − T^{1−α}))` on
/// `B(R)`, gated on `θS^α√(S^{1−α} − T^{1−α}) ≥ 2R`.
#[allow(clippy::too_many_arguments)]
pub fn check_a3for_psi(
    s: f64,
    t: f64,
    theta: f64,
    alpha: f64,
    r: f64,
    c_alpha: f64,
    nsamples: usize,
    seed: u64,
) -> Result<BoundReport> {
    let g = gap_gauge(s, t, theta, alpha)?;
    let gate = theta * s.powf(alpha) * g;
    if !(r >= 1.0) || gate < 2.0 * r {
        return Ok(BoundReport::vacuous(
            "a3forPsi",
            format!("theta S^alpha sqrt(S^(1-alpha)-T^(1-alpha)) = {gate:.6e} < 2R = {}", 2.0 * r),
        ));
    }
    let mut pts = vec![Point3::new(r, 0.0, 0.0), Point3::new(-r, 0.0, 0.0)];
    pts.extend(sample_ball(r, nsamples.saturating_sub(2), &mut seeded_rng("a3forPsi", seed)));
    let (rows, scale) = a3_rows(s, t, theta, alpha, &pts)?;
    let rhs = c_alpha * r / scale;
    let rows = rows.into_iter().map(|(z, lhs)| BoundSample::new(z, lhs, rhs)).collect();
    BoundReport::from_rows("a3forPsi", rows, format!("S={s} T={t} theta={theta} C_alpha={c_alpha:.6e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Log-log slope of `ys` against `xs`.
    pub exponent: Option<f64>,
}

impl Trend {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let exponent = power_law_exponent(&xs, &ys);
        Trend { xs, ys, exponent }
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] < w[0])
    }
}

/// Sup of `|Φ_{S′,P}^{∞} − 1/(θ²(α−1))|` over [`ball_probe_points`] along `s_list`.
pub fn a3_trend(alpha: f64, theta: f64, r: f64, s_list: &[f64]) -> Result<Trend> {
    let pts = ball_probe_points(r);
    let mut ys = Vec::new();
    for &s in s_list {
        let (rows, _) = a3_rows(s, f64::INFINITY, theta, alpha, &pts)?;
        ys.push(rows.iter().map(|x| x.1).fold(0.0, f64::max));
    }
    Ok(Trend::new(s_list.to_vec(), ys))
}

/// Both estimates of `|Φ_{S′,P}^{T′} − 1/(θ|ζ|)|` on `K(R,D)` for the
/// dilation `P^{1/(1+α)} = θ(T − S)`; rhs is the smaller of the two.
#[allow(clippy::too_many_arguments)]
pub fn check_a3for_psi2(
    s: f64,
    t: f64,
    theta: f64,
    alpha: f64,
    r: f64,
    d: f64,
    nsamples: usize,
    seed: u64,
) -> Result<BoundReport> {
    let desc = rescaled_to_radial(s, t, theta, alpha)?;
    if !(r > 0.0 && d > 0.0 && r >= d) {
        return precondition(format!("need R >= D > 0, got R={r}, D={d}"));
    }
    let w = t.powf(alpha) * (t - s);
    let rhs = (2.0 / (theta * d)).min((1.0 + theta * w) * w / d.powi(3));
    let pts = sample_krd(r, d, nsamples, &mut seeded_rng("a3forPsi2", seed))?;
    let rows = collect(
        pts.par_iter()
            .map(|&z| {
                let phi = phi_of(&desc, z, 1e-12)?;
                let lhs = (phi.value - 1.0 / (theta * z.norm())).abs() + phi.error_bound;
                Ok(BoundSample::new(z, lhs, rhs))
            })
            .collect(),
    )?;
    BoundReport::from_rows(
        "a3forPsi2",
        rows,
        format!("S={s} T={t} theta={theta} T^a(T-S)={w:.6e} rhs={rhs:.6e}"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum C0C1Variant {
    /// `P^{1/(1+α)} = θ√(S^{1−α} − T^{1−α})`: `A ≥ 1/(2θ²(α−1))`, `Φ ≤ 2|ζ|/(θ²(α−1)|ζ_C|)` on `B(R)`.
    Prime,
    /// `P^{1/(1+α)} = θ(T − S)`: `A ≥ 1/(θ(1 + θT^α(T−S)))`, `Φ ≤ 1/(θ|ζ_C|)`.
    Plain,
}

/// Lower bound on `A_{S′,P}^{T′}` (first row, at the origin) and upper bound
/// on `Φ_{S′,P}^{T′}` on samples. For `Prime` the sample ball has the largest
/// radius the gate allows, `R = θS^α√(S^{1−α} − T^{1−α})/2`; for `Plain` it is `B(2)`.
pub fn check_c0c1(
    s: f64,
    t: f64,
    theta: f64,
    alpha: f64,
    variant: C0C1Variant,
    nsamples: usize,
    seed: u64,
) -> Result<BoundReport> {
    let id = match variant {
        C0C1Variant::Prime => "C0C1prime",
        C0C1Variant::Plain => "C0C1",
    };
    let (desc, a_bound, radius) = match variant {
        C0C1Variant::Prime => {
            let gate = theta * s.powf(alpha) * gap_gauge(s, t, theta, alpha)?;
            let r = 0.5 * gate;
            if r < 1.0 {
                return Ok(BoundReport::vacuous(id, format!("gate/2 = {r:.6e} < 1")));
            }
            (rescaled_to_constant(s, t, theta, alpha)?, 1.0 / (2.0 * theta * theta * (alpha - 1.0)), r)
        }
        C0C1Variant::Plain => {
            let w = t.powf(alpha) * (t - s);
            (rescaled_to_radial(s, t, theta, alpha)?, 1.0 / (theta * (1.0 + theta * w)), 2.0)
        }
    };
    let MetricDescriptor::PotentialST { s: s1, t: t1, p, .. } = desc else { unreachable!() };
    let a = a_st(s1, t1, p, alpha)?;
    let mut rows = vec![BoundSample::new(Point3::ORIGIN, a_bound, a * (1.0 - 1e-10))];
    let pts = sample_ball(radius, nsamples, &mut seeded_rng(id, seed));
    let phi_rows = collect(
        pts.par_iter()
            .map(|&z| {
                let phi = phi_of(&desc, z, 1e-12)?;
                let rhs = match variant {
                    C0C1Variant::Prime => 2.0 * z.norm() / (theta * theta * (alpha - 1.0) * z.zc_norm()),
                    C0C1Variant::Plain => 1.0 / (theta * z.zc_norm()),
                };
                Ok(BoundSample::new(z, phi.upper(), rhs))
            })
            .collect(),
    )?;
    rows.extend(phi_rows);
    BoundReport::from_rows(id, rows, format!("A={a:.12e} radius={radius:.6e}"))
}

/// Relative margin `1 − θ|ζ_C|Φ` of the plain transverse bound along
/// `ζ = (ζ_R, r, 0)` for each `r` in `zc_list`.
pub fn c0c1_tightness(s: f64, t: f64, theta: f64, alpha: f64, zr: f64, zc_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    let desc = rescaled_to_radial(s, t, theta, alpha)?;
    zc_list
        .iter()
        .map(|&c| {
            let phi = phi_of(&desc, Point3::new(zr, c, 0.0), 1e-13)?;
            Ok((c, 1.0 - theta * c * phi.value))
        })
        .collect()
}

/// The distortion bound `C(1+√C₁)(1+C₀^{−1/2})R^{1+κ/2}ε^{1/(2(1+m))}` without `C`.
pub fn key_cor_scale(w: &AssumptionWitness) -> f64 {
    (1.0 + w.c1.sqrt()) * (1.0 + w.c0.powf(-0.5)) * w.r.powf(1.0 + 0.5 * w.kappa) * w.epsilon.powf(0.5 / (1.0 + w.m))
}

fn distortion_rows(
    desc_a: &MetricDescriptor,
    desc_b: &MetricDescriptor,
    pairs: &[(Point3, Point3)],
    cfg: &SolverConfig,
) -> Result<Vec<(Point3, Point3, f64)>> {
    collect(
        pairs
            .par_iter()
            .map(|&(x, y)| Ok((x, y, pair_distortion(desc_a, desc_b, x, y, cfg)?.distortion)))
            .collect(),
    )
}

/// `|d_A − d_B| ≤ C(1+√C₁)(1+C₀^{−1/2})R^{1+κ/2}ε^{1/(2(1+m))}` on pairs in `B(u)`.
#[allow(clippy::too_many_arguments)]
pub fn check_key_cor(
    desc_a: &MetricDescriptor,
    desc_b: &MetricDescriptor,
    witness: &AssumptionWitness,
    c: f64,
    u: f64,
    npairs: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<BoundReport> {
    witness.validate()?;
    let ledger = witness.ledger()?;
    let need = ledger.rho(u + 2.0) + 1.0;
    if need > witness.r {
        return precondition(format!("rho(u+2)+1 = {need:.6e} exceeds R = {}", witness.r));
    }
    if witness.epsilon > 1.0 {
        return precondition(format!("epsilon = {} exceeds 1", witness.epsilon));
    }
    let rhs = c * key_cor_scale(witness);
    let pairs = sample_pairs(u, npairs, npairs / 10, &mut seeded_rng("key_cor", seed));
    let rows = distortion_rows(desc_a, desc_b, &pairs, cfg)?
        .into_iter()
        .map(|(x, y, lhs)| BoundSample::pair(x, y, lhs, rhs))
        .collect();
    BoundReport::from_rows("key_cor", rows, format!("C={c:.6e} eps={:.6e} R={:.6e}", witness.epsilon, witness.r))
}

/// Sup of the sampled distortion `|d_A − d_B|` over pairs in `B(u)` (a tenth
/// of them straddling the axis).
pub fn sup_distortion(
    desc_a: &MetricDescriptor,
    desc_b: &MetricDescriptor,
    u: f64,
    npairs: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let pairs = sample_pairs(u, npairs, (npairs / 10).max(1).min(npairs), &mut seeded_rng("distortion", seed));
    Ok(distortion_rows(desc_a, desc_b, &pairs, cfg)?.into_iter().map(|r| r.2).fold(0.0, f64::max))
}

/// `A′ = Σ_n A_{S_n,P}^{T_n} − 2(a/P)^{1/(1+α)}`.
pub fn a_prime(spec: &LatticeSpec, rp: &RescaleParams) -> Result<f64> {
    Ok(sum_a(spec, rp, 1e-12)? - 2.0 * (rp.a / rp.p).powf(1.0 / (1.0 + spec.alpha)))
}

/// The fiber estimate `(a/P)^{1/(1+α)}/√A′·(1 + r/(2√A′))`; `None` when `A′ ≤ 0`.
pub fn fiberdiam_bound(spec: &LatticeSpec, rp: &RescaleParams, r: f64) -> Result<Option<f64>> {
    let ap = a_prime(spec, rp)?;
    if ap <= 0.0 {
        return Ok(None);
    }
    let pre = (rp.a / rp.p).powf(1.0 / (1.0 + spec.alpha));
    Ok(Some(pre / ap.sqrt() * (1.0 + r / (2.0 * ap.sqrt()))))
}

/// Grid nodes of the metric ball `B_{d_a}(0, r)` together with
/// `1/(N√Φ_a)` at each. The grid covers the Euclidean ball of radius
/// `(1 + r/(2√A′))²`, which contains the metric ball.
pub fn metric_ball_fiber_values(
    spec: &LatticeSpec,
    rp: &RescaleParams,
    r: f64,
    cells: usize,
) -> Result<Vec<(Point3, f64)>> {
    let ap = a_prime(spec, rp)?;
    if ap <= 0.0 {
        return precondition(format!("A' = {ap:.6e} <= 0"));
    }
    if !(r > 0.0) || cells < 2 {
        return domain("need r > 0 and at least 2 cells");
    }
    let u = (1.0 + r / (2.0 * ap.sqrt())).powi(2);
    let desc = MetricDescriptor::RescaledLattice { spec: spec.clone(), rp: *rp };
    let h = u / cells as f64;
    let lo = Point3::new(-u, -u, -u);
    let hi = Point3::new(u, u, u);
    let field = distance_field(&desc, &[Point3::ORIGIN], lo, hi, h, 1e-8, None)?;
    let members: Vec<Point3> = field.nodes().filter(|(p, v)| *v <= r && p.norm() <= u).map(|(p, _)| p).collect();
    let n = rp.n(spec.alpha);
    collect(
        members
            .par_iter()
            .map(|&p| {
                let phi = phi_a(spec, rp, p, 1e-10)?;
                let v = if phi.is_infinite() { 0.0 } else { 1.0 / (n * phi.lower().max(f64::MIN_POSITIVE).sqrt()) };
                Ok((p, v))
            })
            .collect(),
    )
}

/// `sup_{B_{d_a}(0,r)} 1/(N√Φ_a)` against the fiber estimate, on grid nodes
/// of the metric ball; vacuous when `A′ ≤ 0`.
pub fn check_fiberdiam(spec: &LatticeSpec, rp: &RescaleParams, r: f64, cells: usize) -> Result<BoundReport> {
    let Some(rhs) = fiberdiam_bound(spec, rp, r)? else {
        return Ok(BoundReport::vacuous("fiberdiam", "sum A - 2(a/P)^(1/(1+alpha)) <= 0"));
    };
    let vals = metric_ball_fiber_values(spec, rp, r, cells)?;
    let rows = vals.into_iter().map(|(p, v)| BoundSample::new(p, v, rhs)).collect();
    BoundReport::from_rows("fiberdiam", rows, format!("r={r} bound={rhs:.6e}; lhs=1/(N sqrt(Phi_a))"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilations_match_closed_forms() {
        // α = 2, θ = 1, T = ∞: P = S^{−3/2}, S′ = S^{3/2}.
        let MetricDescriptor::PotentialST { s, t, p, .. } = rescaled_to_constant(4.0, f64::INFINITY, 1.0, 2.0).unwrap()
        else {
            panic!()
        };
        assert!((p - 0.125).abs() < 1e-12 && (s - 8.0).abs() < 1e-12 && t.is_infinite());
        // S = 0: P = T³, T′ = 1.
        let MetricDescriptor::PotentialST { s, t, p, .. } = rescaled_to_radial(0.0, 0.5, 1.0, 2.0).unwrap() else {
            panic!()
        };
        assert!(s == 0.0 && (t - 1.0).abs() < 1e-12 && (p - 0.125).abs() < 1e-12);
        assert!(rescaled_to_radial(0.5, 0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn worst_row_and_vacuous() {
        let rows = vec![
            BoundSample::new(Point3::ORIGIN, 1.0, 2.0),
            BoundSample::new(Point3::new(1.0, 0.0, 0.0), 3.0, 2.5),
        ];
        let r = BoundReport::from_rows("x", rows, "").unwrap();
        assert_eq!(r.worst_margin, -0.5);
        assert!(r.failed() && !r.passed());
        let v = BoundReport::vacuous("x", "gate");
        assert!(!v.passed() && !v.failed());
        assert!(matches!(BoundReport::from_rows("x", vec![], ""), Err(Error::EmptySample(_))));
    }
}
