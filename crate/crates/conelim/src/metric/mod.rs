//! Lengths and distances of conformal metrics `Φ·h₀`.
//!
//! Distances are upper bounds from a grid Dijkstra followed by coarse-to-fine
//! refinement of the witness polyline; lower bounds are analytic.

mod descriptor;
mod grid;
mod length;
mod refine;
mod surgery;

use crate::error::{domain, precondition, Result};
use crate::geom::{Point3, Polyline, Region};
use grid::{trace, Admissible, Grid, GridSolver};
use length::{polyline_length, Field};
use refine::Refiner;

pub use descriptor::{conformal_factor, MetricDescriptor};
pub use length::path_length;
pub use surgery::{lift_point, modify_path, project_path};

/// Upper bound on grid nodes per query; the spacing is coarsened beyond it.
const MAX_NODES: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Grid spacing as a fraction of `|x − y|`; also sets the final number of
    /// witness segments (`≥ 2/grid_resolution`).
    pub grid_resolution: f64,
    pub refinement_rounds: usize,
    pub quadrature_tol: f64,
    /// Box padding around the endpoints as a fraction of `|x − y|`.
    pub domain_padding: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { grid_resolution: 1.0 / 12.0, refinement_rounds: 40, quadrature_tol: 1e-6, domain_padding: 0.6 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution > 0.0
            && self.refinement_rounds > 0
            && self.quadrature_tol > 0.0
            && self.domain_padding > 0.0
            && self.grid_resolution.is_finite()
            && self.domain_padding.is_finite()
        {
            Ok(())
        } else {
            domain("solver config values must all be positive")
        }
    }

    /// Same config with the grid spacing halved.
    pub fn refined(&self) -> SolverConfig {
        SolverConfig { grid_resolution: 0.5 * self.grid_resolution, ..*self }
    }

    fn pointwise_tol(&self) -> f64 {
        (1e-2 * self.quadrature_tol).max(1e-14)
    }

    fn final_segments(&self) -> usize {
        ((2.0 / self.grid_resolution).ceil() as usize).max(8).next_power_of_two()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub witness: Polyline,
}

/// Lower bound `|G(|y|) − G(|x|)|` from `Φ ≥ C₀ min{1, 1/|ζ|}`, where
/// `G(r) = √C₀ r` on `[0,1]` and `√C₀(2√r − 1)` beyond; combined with
/// `√(inf Φ)|x − y|`.
pub fn analytic_lower_bound(desc: &MetricDescriptor, x: Point3, y: Point3) -> f64 {
    let c0 = desc.c0();
    let g = |r: f64| if r <= 1.0 { r } else { 2.0 * r.sqrt() - 1.0 };
    let radial = c0.max(0.0).sqrt() * (g(y.norm()) - g(x.norm())).abs();
    let flat = desc.inf_phi().sqrt() * x.dist(y);
    radial.max(flat)
}

fn bbox(x: Point3, y: Point3, pad: f64) -> (Point3, Point3) {
    let (a, b) = (x.to_array(), y.to_array());
    let lo = [a[0].min(b[0]) - pad, a[1].min(b[1]) - pad, a[2].min(b[2]) - pad];
    let hi = [a[0].max(b[0]) + pad, a[1].max(b[1]) + pad, a[2].max(b[2]) + pad];
    (Point3::from_array(lo), Point3::from_array(hi))
}

fn clip_to_region(lo: Point3, hi: Point3, x: Point3, y: Point3, region: Option<&Region>) -> (Point3, Point3) {
    let (mut lo, mut hi) = (lo.to_array(), hi.to_array());
    match region {
        Some(Region::Ball { u }) => {
            for k in 0..3 {
                lo[k] = lo[k].max(-u);
                hi[k] = hi[k].min(*u);
            }
        }
        Some(Region::Krd { r, .. }) => {
            // Room to wind around the half-axis at the endpoints' transverse radius.
            let rc = x.zc_norm().max(y.zc_norm());
            for k in 1..3 {
                lo[k] = lo[k].min(-rc);
                hi[k] = hi[k].max(rc);
            }
            for k in 0..3 {
                lo[k] = lo[k].max(-r);
                hi[k] = hi[k].min(*r);
            }
        }
        _ => {}
    }
    (Point3::from_array(lo), Point3::from_array(hi))
}

fn admissible(region: Option<&Region>) -> Admissible {
    match region {
        Some(r) => Admissible::Region(*r),
        None => Admissible::All,
    }
}

fn solve(desc: &MetricDescriptor, x: Point3, y: Point3, region: Option<&Region>, cfg: &SolverConfig) -> Result<DistanceResult> {
    desc.validate()?;
    cfg.validate()?;
    if !x.is_finite() || !y.is_finite() {
        return domain("endpoints must be finite");
    }
    let adm = admissible(region);
    if let Some(r) = region {
        r.validate()?;
        if !matches!(r, Region::Krd { .. } | Region::Ball { .. }) {
            return precondition("restricted distance supports K(R,D) and ball regions only");
        }
        if !adm.point(x) || !adm.point(y) {
            return precondition("endpoint outside region");
        }
    }
    if x == y {
        let witness = Polyline::new(vec![x, y], vec![0.0, 1.0])?;
        return Ok(DistanceResult { value: 0.0, lower_bound: 0.0, upper_bound: 0.0, witness });
    }
    let field = Field::new(desc, cfg.pointwise_tol());
    let init = grid_path(&field, adm, x, y, region, cfg);

    let straight = [x, y];
    let mut best: Vec<Point3> = init.unwrap_or_else(|| straight.to_vec());
    if adm.segment(x, y) && field.polyline_fixed(&straight) < field.polyline_fixed(&best) {
        best = straight.to_vec();
    }
    let refiner = Refiner { field: &field, adm, rounds: cfg.refinement_rounds };
    let refined = refiner.run(&best, cfg.final_segments());
    let witness = if field.polyline_fixed(&refined) <= field.polyline_fixed(&best) { refined } else { best };

    let len = polyline_length(&field, &witness, cfg.quadrature_tol);
    let lower = analytic_lower_bound(desc, x, y).min(len.value);
    Ok(DistanceResult {
        value: len.value,
        lower_bound: lower,
        upper_bound: len.upper(),
        witness: Polyline::from_vertices(witness)?,
    })
}

/// Shortest grid path from `x` to `y`, endpoints included.
fn grid_path(
    field: &Field,
    adm: Admissible,
    x: Point3,
    y: Point3,
    region: Option<&Region>,
    cfg: &SolverConfig,
) -> Option<Vec<Point3>> {
    let span = x.dist(y);
    let (lo, hi) = bbox(x, y, cfg.domain_padding * span);
    let (lo, hi) = clip_to_region(lo, hi, x, y, region);
    let mut h = cfg.grid_resolution * span;
    let mut grid = Grid::anchored(lo, hi, h, x);
    if grid.len() > MAX_NODES {
        h *= (grid.len() as f64 / MAX_NODES as f64).cbrt() * 1.01;
        grid = Grid::anchored(lo, hi, h, x);
    }
    let src = grid.nearest(x);
    let near_y = grid.nearest(y);
    let mut targets = Vec::with_capacity(27);
    grid.neighbours(near_y, &mut targets);
    targets.push(near_y);
    targets.sort_unstable();

    let mut solver = GridSolver::new(grid, *field, adm);
    let (dist, prev) = solver.run(&[src], &targets);
    let grid = &solver.grid;
    let mut best: Option<(f64, usize)> = None;
    for &t in &targets {
        if !dist[t].is_finite() {
            continue;
        }
        let p = grid.point(t);
        if !adm.segment(p, y) {
            continue;
        }
        let c = dist[t] + field.segment_coarse(p, y);
        if c.is_finite() && best.is_none_or(|(bc, _)| c < bc) {
            best = Some((c, t));
        }
    }
    let (_, t) = best?;
    let mut path: Vec<Point3> = trace(&prev, t).into_iter().map(|i| grid.point(i)).collect();
    path[0] = x;
    if path.last().is_some_and(|p| p.dist(y) > 0.0) {
        path.push(y);
    }
    path.dedup_by(|a, b| a.dist(*b) == 0.0);
    (path.len() >= 2).then_some(path)
}

/// `d(x, y)`: value and upper bound from the witness length, analytic lower bound.
pub fn distance(desc: &MetricDescriptor, x: Point3, y: Point3, cfg: &SolverConfig) -> Result<DistanceResult> {
    solve(desc, x, y, None, cfg)
}

/// Distance among paths inside `region` (`K(R,D)` or a Euclidean ball).
pub fn distance_restricted(
    desc: &MetricDescriptor,
    x: Point3,
    y: Point3,
    region: &Region,
    cfg: &SolverConfig,
) -> Result<DistanceResult> {
    solve(desc, x, y, Some(region), cfg)
}

/// Whether `z` lies in the closed metric ball `B(center, r)`, judged by the
/// solver's upper bound (so `true` is certain, `false` may be conservative).
pub fn in_metric_ball(desc: &MetricDescriptor, center: Point3, r: f64, z: Point3, cfg: &SolverConfig) -> Result<bool> {
    if analytic_lower_bound(desc, center, z) > r {
        return Ok(false);
    }
    Ok(distance(desc, center, z, cfg)?.upper_bound <= r)
}

/// `d_A(x,y)`, `d_B(x,y)` and their difference. Each distance is the shorter
/// of its own witness and the other metric's witness measured in it, which
/// removes most of the solver noise from the difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistortion {
    pub d_a: f64,
    pub d_b: f64,
    pub distortion: f64,
}

pub fn pair_distortion(
    desc_a: &MetricDescriptor,
    desc_b: &MetricDescriptor,
    x: Point3,
    y: Point3,
    cfg: &SolverConfig,
) -> Result<PairDistortion> {
    let ra = distance(desc_a, x, y, cfg)?;
    if desc_a == desc_b {
        return Ok(PairDistortion { d_a: ra.value, d_b: ra.value, distortion: 0.0 });
    }
    let rb = distance(desc_b, x, y, cfg)?;
    let d_a = ra.value.min(path_length(desc_a, &rb.witness, cfg.quadrature_tol).value);
    let d_b = rb.value.min(path_length(desc_b, &ra.witness, cfg.quadrature_tol).value);
    Ok(PairDistortion { d_a, d_b, distortion: (d_a - d_b).abs() })
}

/// Grid distances from a set of sources to every node of a box.
#[derive(Debug, Clone)]
pub struct DistanceField {
    grid: Grid,
    values: Vec<f64>,
}

impl DistanceField {
    pub fn spacing(&self) -> f64 {
        self.grid.h
    }

    /// All nodes with their grid distance (`+∞` when unreachable).
    pub fn nodes(&self) -> impl Iterator<Item = (Point3, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.grid.point(i), v))
    }

    /// Distance at the node nearest to `p`.
    pub fn nearest_value(&self, p: Point3) -> f64 {
        self.values[self.grid.nearest(p)]
    }
}

/// Multi-source grid distances over `[lo, hi]` with spacing `h`; each source
/// is snapped to its nearest node. Values are upper bounds up to the snapping
/// and the edge quadrature.
pub fn distance_field(
    desc: &MetricDescriptor,
    sources: &[Point3],
    lo: Point3,
    hi: Point3,
    h: f64,
    tol: f64,
    region: Option<&Region>,
) -> Result<DistanceField> {
    desc.validate()?;
    if !(h > 0.0 && tol > 0.0) {
        return domain("spacing and tolerance must be positive");
    }
    if sources.is_empty() {
        return domain("need at least one source");
    }
    let mut grid = Grid::anchored(lo, hi, h, sources[0]);
    if grid.len() > MAX_NODES {
        let h = h * (grid.len() as f64 / MAX_NODES as f64).cbrt() * 1.01;
        grid = Grid::anchored(lo, hi, h, sources[0]);
    }
    let mut src: Vec<usize> = sources.iter().map(|&p| grid.nearest(p)).collect();
    src.sort_unstable();
    src.dedup();
    let field = Field::new(desc, tol);
    let mut solver = GridSolver::new(grid, field, admissible(region));
    let (values, _) = solver.run(&src, &[]);
    Ok(DistanceField { grid: solver.grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_distance() {
        let r = distance(&MetricDescriptor::Euclidean, Point3::ORIGIN, Point3::new(3.0, 4.0, 0.0), &SolverConfig::default())
            .unwrap();
        assert!((r.value - 5.0).abs() < 0.05, "{r:?}");
        assert!(r.lower_bound <= r.value && r.value <= r.upper_bound);
        assert_eq!(r.witness.first(), Point3::ORIGIN);
        assert_eq!(r.witness.last(), Point3::new(3.0, 4.0, 0.0));
    }

    #[test]
    fn cone_antipodal() {
        let d = MetricDescriptor::InverseRadial { theta: 1.0 };
        let r = distance(&d, Point3::new(1.0, 0.0, 0.0), Point3::new(-1.0, 0.0, 0.0), &SolverConfig::default()).unwrap();
        let exact = 2.0 * 2f64.sqrt();
        assert!((r.value - exact).abs() < 0.02 * exact, "{}", r.value);
    }

    #[test]
    fn same_point_is_zero() {
        let p = Point3::new(0.3, 0.2, 0.1);
        let r = distance(&MetricDescriptor::d_st(0.0, 2.0, 2.0), p, p, &SolverConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn restricted_endpoint_check() {
        let region = Region::Krd { r: 3.0, d: 0.5 };
        let bad = distance_restricted(
            &MetricDescriptor::Euclidean,
            Point3::new(1.0, 0.1, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            &region,
            &SolverConfig::default(),
        );
        assert!(bad.is_err());
        // Around the half-axis: the straight chord is excluded.
        let x = Point3::new(1.0, 0.6, 0.0);
        let y = Point3::new(1.0, -0.6, 0.0);
        let r = distance_restricted(&MetricDescriptor::Euclidean, x, y, &region, &SolverConfig::default()).unwrap();
        assert!(r.value > 1.2 && r.value < 0.6 * std::f64::consts::PI * 1.05, "{}", r.value);
    }
}
