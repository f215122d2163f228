//! Gromov–Hausdorff style comparisons and geometric probes: `(r, ε)`-isometry
//! checks of the identity map, divergence of lengths along the pole line,
//! the non-pole test at the origin of `d_0^∞`, and the cone distance of
//! `(θ/|ζ|)h₀`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fit::{linear_fit, LineFit};
use crate::geom::{Point3, Polyline};
use crate::metric::{distance, distance_field, pair_distortion, path_length, project_path, DistanceField};
use crate::metric::{MetricDescriptor, SolverConfig};
use crate::sampling::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsometryCheckResult {
    pub r: f64,
    pub epsilon: f64,
    pub passed: bool,
    /// Sup of `|d_A(x,y) − d_B(x,y)|` over sampled pairs of `B_{d_A}(0,r)`.
    pub distortion_observed: f64,
    /// Sup over net points of `B_{d_B}(0, r−ε)` of their `d_B`-distance to `B_{d_A}(0,r)`.
    pub surjectivity_defect: f64,
    pub pairs: usize,
    pub net_points: usize,
}

/// Smallest grid distance on the faces of the box.
fn boundary_min(field: &DistanceField, u: f64) -> f64 {
    let h = field.spacing();
    field
        .nodes()
        .filter(|(p, _)| p.to_array().iter().any(|c| c.abs() > u - 0.5 * h))
        .map(|(_, v)| v)
        .fold(f64::INFINITY, f64::min)
}

/// Grid cells per half-width of the search box.
const MIN_CELLS: f64 = 16.0;
const MAX_DOUBLINGS: usize = 10;

/// Checks the identity map of R³ as an `(r, ε)`-isometry from `(R³, d_A, 0)`
/// to `(R³, d_B, 0)`. Both balls are read off grid distance fields on a box
/// `[−u, u]³` that is doubled until its faces lie outside them and then halved
/// while they still do; the net for the covering condition is the grid itself,
/// with mesh `u/16`.
pub fn eps_isometry_check(
    desc_a: &MetricDescriptor,
    desc_b: &MetricDescriptor,
    r: f64,
    epsilon: f64,
    nsamples: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<IsometryCheckResult> {
    if !(r > epsilon && epsilon > 0.0) {
        return domain(format!("need r > epsilon > 0, got r = {r}, epsilon = {epsilon}"));
    }
    desc_a.validate()?;
    desc_b.validate()?;
    let tol = cfg.quadrature_tol;
    let fields = |u: f64| -> Result<Option<(DistanceField, DistanceField, f64)>> {
        let h = u / MIN_CELLS;
        let lo = Point3::new(-u, -u, -u);
        let hi = Point3::new(u, u, u);
        let fa = distance_field(desc_a, &[Point3::ORIGIN], lo, hi, h, tol, None)?;
        let fb = distance_field(desc_b, &[Point3::ORIGIN], lo, hi, h, tol, None)?;
        let fits = boundary_min(&fa, u) > r && boundary_min(&fb, u) > r - epsilon;
        Ok(fits.then_some((fa, fb, h)))
    };
    let mut u = r;
    let mut found = None;
    for _ in 0..=MAX_DOUBLINGS {
        if let Some(f) = fields(u)? {
            found = Some(f);
            break;
        }
        u *= 2.0;
    }
    let Some(mut found) = found else {
        return Err(Error::Inconclusive(format!("metric balls of radius {r} exceed the search box")));
    };
    // Shrink while both balls still fit, so the mesh resolves small balls.
    for _ in 0..MAX_DOUBLINGS {
        match fields(0.5 * u)? {
            Some(f) => {
                found = f;
                u *= 0.5;
            }
            None => break,
        }
    }
    let (fa, fb, h) = found;
    let members: Vec<Point3> = fa.nodes().filter(|(_, v)| *v < r).map(|(p, _)| p).collect();
    let net: Vec<Point3> = fb.nodes().filter(|(_, v)| *v < r - epsilon).map(|(p, _)| p).collect();

    let mut rng = seeded_rng("isometry", seed);
    let mut pairs: Vec<(Point3, Point3)> = Vec::with_capacity(nsamples);
    if members.len() >= 2 {
        while pairs.len() < nsamples {
            // A quarter of the pairs start at the base point.
            let x = if pairs.len() < nsamples / 4 {
                Point3::ORIGIN
            } else {
                members[rng.gen_range(0..members.len())]
            };
            let y = members[rng.gen_range(0..members.len())];
            if x != y {
                pairs.push((x, y));
            }
        }
    }
    let d: Vec<Result<f64>> =
        pairs.par_iter().map(|&(x, y)| Ok(pair_distortion(desc_a, desc_b, x, y, cfg)?.distortion)).collect();
    let distortion_observed = d.into_iter().collect::<Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);

    let surjectivity_defect = if net.is_empty() {
        0.0
    } else if members.is_empty() {
        f64::INFINITY
    } else {
        let lo = Point3::new(-u, -u, -u);
        let hi = Point3::new(u, u, u);
        let to_image = distance_field(desc_b, &members, lo, hi, h, tol, None)?;
        net.iter().map(|&p| to_image.nearest_value(p)).fold(0.0, f64::max)
    };
    Ok(IsometryCheckResult {
        r,
        epsilon,
        passed: distortion_observed < epsilon && surjectivity_defect < epsilon,
        distortion_observed,
        surjectivity_defect,
        pairs: pairs.len(),
        net_points: net.len(),
    })
}

/// `Φ_0^∞` with `P = 1`.
fn half_line(alpha: f64) -> MetricDescriptor {
    MetricDescriptor::d_st(0.0, f64::INFINITY, alpha)
}

/// Lengths of the segments `t ↦ (t, δ, 0)`, `t ∈ [t0, t1]`, under `d_0^∞`.
pub fn axis_segment_length(alpha: f64, t0: f64, t1: f64, deltas: &[f64], tol: f64) -> Result<Vec<(f64, f64)>> {
    if !(0.0 < t0 && t0 <= t1) {
        return domain("need 0 < t0 <= t1");
    }
    if deltas.iter().any(|d| !(*d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return domain("deltas must be positive and decreasing");
    }
    let desc = half_line(alpha);
    desc.validate()?;
    deltas
        .par_iter()
        .map(|&d| {
            if t0 == t1 {
                return Ok((d, 0.0));
            }
            let seg = Polyline::from_vertices(vec![Point3::new(t0, d, 0.0), Point3::new(t1, d, 0.0)])?;
            Ok((d, path_length(&desc, &seg, tol).value))
        })
        .collect()
}

/// Least-squares fit of `length ≈ c₁ + c₂√(ln(1/δ))`.
pub fn fit_axis_growth(rows: &[(f64, f64)]) -> Option<LineFit> {
    let xs: Vec<f64> = rows.iter().map(|(d, _)| (1.0 / d).ln().sqrt()).collect();
    let ys: Vec<f64> = rows.iter().map(|(_, l)| *l).collect();
    linear_fit(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleTestResult {
    /// `(D, length)` of the path `0 → (0,D,0) → (|p|,D,0) → p`.
    pub straight_lengths: Vec<(f64, f64)>,
    /// Solver distance `d(0, p)`.
    pub detour_distance: f64,
    /// The part of the solver witness inside `L(D)` at its end, for the smallest `D`.
    pub excursion_length: Option<f64>,
    /// Its projection `P_γ` onto the boundary circle it enters through.
    pub projected_length: Option<f64>,
    pub verdict: String,
}

pub const NO_AXIS_GEODESIC: &str = "no geodesic through the axis";
pub const UNDECIDED: &str = "undecided";

/// The final excursion of `gamma` into `|ζ_C| < d`, from the point where it
/// crosses the boundary; `None` if the path never leaves the slab.
fn final_excursion(gamma: &Polyline, d: f64) -> Option<Polyline> {
    let vs = &gamma.vertices;
    let k = vs.iter().rposition(|v| v.zc_norm() >= d)?;
    if k + 1 == vs.len() {
        return None;
    }
    let (p, q) = (vs[k], vs[k + 1]);
    // Crossing by bisection on |ζ_C| along [p, q].
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if p.lerp(q, mid).zc_norm() >= d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = p.lerp(q, lo);
    let n = c.zc_norm();
    let c = Point3::new(c.zr, c.zc[0] * d / n, c.zc[1] * d / n);
    let mut out = vec![c];
    out.extend_from_slice(&vs[k + 1..]);
    out.dedup();
    if out.len() < 2 {
        return None;
    }
    Polyline::from_vertices(out).ok()
}

/// Compares near-axis approximations of the segment `[0, p]` with the solver
/// distance under `d_0^∞`, and projects the end of the solver witness inside
/// the thinnest slab onto the slab boundary.
pub fn pole_test_at_origin(
    desc: &MetricDescriptor,
    p: Point3,
    d_list: &[f64],
    cfg: &SolverConfig,
) -> Result<PoleTestResult> {
    if !matches!(desc, MetricDescriptor::PotentialST { s, t, .. } if *s == 0.0 && t.is_infinite()) {
        return domain("pole test needs a d_0^inf descriptor");
    }
    if !(p.zr > 0.0 && p.zc_norm() == 0.0) {
        return domain("p must lie on the positive axis");
    }
    if d_list.is_empty() || d_list.iter().any(|d| !(*d > 0.0)) {
        return domain("D list must be nonempty and positive");
    }
    let tol = cfg.quadrature_tol;
    let straight_lengths = d_list
        .par_iter()
        .map(|&d| {
            let path = Polyline::from_vertices(vec![
                Point3::ORIGIN,
                Point3::new(0.0, d, 0.0),
                Point3::new(p.zr, d, 0.0),
                p,
            ])?;
            Ok((d, path_length(desc, &path, tol).value))
        })
        .collect::<Result<Vec<_>>>()?;
    let res = distance(desc, Point3::ORIGIN, p, cfg)?;
    let d_min = d_list.iter().copied().fold(f64::INFINITY, f64::min);
    let (excursion_length, projected_length) = match final_excursion(&res.witness, d_min) {
        Some(ex) => {
            let proj = project_path(&ex, d_min)?;
            (Some(path_length(desc, &ex, tol).value), Some(path_length(desc, &proj, tol).value))
        }
        None => (None, None),
    };
    let at_min = straight_lengths.iter().find(|(d, _)| *d == d_min).map(|x| x.1).unwrap_or(f64::INFINITY);
    let verdict = if res.value.is_finite() && res.value < at_min { NO_AXIS_GEODESIC } else { UNDECIDED };
    Ok(PoleTestResult {
        straight_lengths,
        detour_distance: res.value,
        excursion_length,
        projected_length,
        verdict: verdict.into(),
    })
}

/// Distance in `(θ/|ζ|)h₀`: with `R_i = 2√(θ|x_i|)` and half the angle
/// between `x` and `y` as the link distance, by the law of cosines.
pub fn cone_oracle_distance(theta: f64, x: Point3, y: Point3) -> Result<f64> {
    if !(theta > 0.0) {
        return domain("theta must be positive");
    }
    let (rx, ry) = (x.norm(), y.norm());
    let r1 = 2.0 * (theta * rx).sqrt();
    let r2 = 2.0 * (theta * ry).sqrt();
    if rx == 0.0 || ry == 0.0 {
        return Ok((r1 - r2).abs());
    }
    let cross = Point3::new(
        x.zc[0] * y.zc[1] - x.zc[1] * y.zc[0],
        x.zc[1] * y.zr - x.zr * y.zc[1],
        x.zr * y.zc[0] - x.zc[0] * y.zr,
    );
    let link = 0.5 * cross.norm().atan2(x.dot(y));
    // (R₁ − R₂)² + 4R₁R₂sin²(ℓ/2) is the law of cosines without cancellation.
    let s = (0.5 * link.min(std::f64::consts::PI)).sin();
    Ok(((r1 - r2).powi(2) + 4.0 * r1 * r2 * s * s).sqrt())
}
