//! Replacing slab excursions of paths by their projections onto `∂L(D)`.

use super::descriptor::MetricDescriptor;
use crate::error::{domain, precondition, Result};
use crate::geom::{Point3, Polyline};

/// Largest angle between consecutive vertices of a boundary rotation arc.
const ARC_STEP: f64 = 0.05;

fn on_boundary(p: Point3, d: f64) -> bool {
    (p.zc_norm() - d).abs() <= 1e-9 * d.max(1.0)
}

fn with_zc_radius(p: Point3, d: f64) -> Point3 {
    let n = p.zc_norm();
    if n == 0.0 {
        Point3::new(p.zr, d, 0.0)
    } else {
        Point3::new(p.zr, p.zc[0] * d / n, p.zc[1] * d / n)
    }
}

fn arg(p: Point3) -> f64 {
    p.zc[1].atan2(p.zc[0])
}

/// `P_γ(t) = (γ_R(t), γ_C(a))`; the first vertex must lie on `|ζ_C| = D`.
pub fn project_path(gamma: &Polyline, d: f64) -> Result<Polyline> {
    if !(d > 0.0) {
        return domain("D must be positive");
    }
    let first = gamma.first();
    if !on_boundary(first, d) {
        return precondition(format!("first vertex has |zc| = {}, expected D = {d}", first.zc_norm()));
    }
    let vertices = gamma.vertices.iter().map(|v| Point3 { zr: v.zr, zc: first.zc }).collect();
    Polyline::new(vertices, gamma.params.clone())
}

/// `(ζ_R, Dζ_C/|ζ_C|)`, or `(ζ_R, (D, 0))` on the axis.
pub fn lift_point(z: Point3, d: f64) -> Result<Point3> {
    if !(d > 0.0) {
        return domain("D must be positive");
    }
    if z.zc_norm() == d {
        return Ok(z);
    }
    Ok(with_zc_radius(z, d))
}

/// Splits every segment at its crossings of `|ζ_C| = D`; returns the points
/// and, per piece, whether the piece lies in the open slab.
fn split_at_boundary(vs: &[Point3], d: f64) -> (Vec<Point3>, Vec<bool>) {
    let mut pts = vec![vs[0]];
    let mut inside = Vec::new();
    for w in vs.windows(2) {
        let (p, q) = (w[0], w[1]);
        let v = q - p;
        let a = v.zc[0] * v.zc[0] + v.zc[1] * v.zc[1];
        let b = 2.0 * (p.zc[0] * v.zc[0] + p.zc[1] * v.zc[1]);
        let c = p.zc[0] * p.zc[0] + p.zc[1] * p.zc[1] - d * d;
        let mut knots = vec![0.0];
        if a > 0.0 {
            let disc = b * b - 4.0 * a * c;
            if disc > 0.0 {
                let sq = disc.sqrt();
                // Stable roots.
                let qq = -0.5 * (b + b.signum() * sq);
                let mut roots = [qq / a, if qq != 0.0 { c / qq } else { -b / (2.0 * a) }];
                roots.sort_by(f64::total_cmp);
                knots.extend(roots.into_iter().filter(|&t| t > 1e-14 && t < 1.0 - 1e-14));
            }
        }
        knots.push(1.0);
        for k in knots.windows(2) {
            let mid = p.lerp(q, 0.5 * (k[0] + k[1]));
            inside.push(mid.zc_norm() < d);
            let end = if k[1] == 1.0 { q } else { with_zc_radius(p.lerp(q, k[1]), d) };
            pts.push(end);
        }
    }
    (pts, inside)
}

/// Tangent polygon on `|ζ_C| = D` at height `zr` from angle `from` to `to`;
/// every edge touches the circle, so it avoids the open slab.
fn boundary_arc(zr: f64, d: f64, from: f64, to: f64) -> Vec<Point3> {
    let mut delta = to - from;
    delta -= (delta / std::f64::consts::TAU).round() * std::f64::consts::TAU;
    let n = (delta.abs() / ARC_STEP).ceil() as usize;
    if n == 0 {
        return Vec::new();
    }
    let step = delta / n as f64;
    let r = d / (0.5 * step).cos();
    (0..n)
        .map(|k| {
            let phi = from + (k as f64 + 0.5) * step;
            Point3::new(zr, r * phi.cos(), r * phi.sin())
        })
        .collect()
}

/// Applies the slab-excursion replacement to every maximal excursion of
/// `gamma` into `L(D)` and closes up with a boundary rotation arc. The
/// construction is metric-independent (it only uses the `S¹` symmetry).
pub fn modify_path(gamma: &Polyline, d: f64, _desc: &MetricDescriptor) -> Result<Polyline> {
    if !(d > 0.0) {
        return domain("D must be positive");
    }
    if gamma.first().zc_norm() < d || gamma.last().zc_norm() < d {
        return precondition("path endpoints must lie outside the open slab L(D)");
    }
    let (pts, inside) = split_at_boundary(&gamma.vertices, d);
    if !inside.iter().any(|&b| b) {
        return Ok(gamma.clone());
    }
    let mut out = vec![pts[0]];
    let mut theta = 0.0;
    let mut last_exit: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < inside.len() {
        if !inside[i] {
            out.push(pts[i + 1].rotate_c(theta));
            i += 1;
            continue;
        }
        let mut j = i;
        while j < inside.len() && inside[j] {
            j += 1;
        }
        let anchor = with_zc_radius(pts[i].rotate_c(theta), d).zc;
        for p in &pts[i + 1..=j] {
            out.push(Point3 { zr: p.zr, zc: anchor });
        }
        theta = arg(Point3 { zr: 0.0, zc: anchor }) - arg(pts[j]);
        last_exit = Some((out.len() - 1, j));
        i = j;
    }
    if let Some((k, j)) = last_exit {
        out.truncate(k + 1);
        let exit = pts[j];
        let from = arg(out[k]);
        out.extend(boundary_arc(exit.zr, d, from, arg(exit)));
        out.extend_from_slice(&pts[j..]);
    }
    out.dedup_by(|a, b| a.dist(*b) == 0.0);
    if out.len() == 1 {
        out.push(out[0]);
    }
    Polyline::from_vertices(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_examples() {
        let z = lift_point(Point3::new(1.0, 0.01, 0.0), 0.5).unwrap();
        assert_eq!(z, Point3::new(1.0, 0.5, 0.0));
        assert_eq!(lift_point(Point3::new(2.0, 0.0, 0.0), 0.5).unwrap(), Point3::new(2.0, 0.5, 0.0));
        let on = Point3::new(1.0, 0.3, 0.4);
        assert_eq!(lift_point(on, 0.5).unwrap(), on);
        assert!(lift_point(on, 0.0).is_err());
    }

    #[test]
    fn projection_keeps_transverse_part() {
        let g = Polyline::from_vertices(vec![
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(1.0, 0.2, 0.1),
            Point3::new(2.0, -0.5, 0.3),
        ])
        .unwrap();
        let p = project_path(&g, 1.0).unwrap();
        assert!(p.vertices.iter().all(|v| v.zc == [1.0, 0.0]));
        assert!(project_path(&g, 0.5).is_err());
    }

    #[test]
    fn crossing_path_is_rerouted() {
        let d = 0.5;
        let g = Polyline::from_vertices(vec![Point3::new(0.0, 1.0, 0.0), Point3::new(1.0, -1.0, 0.2)]).unwrap();
        let out = modify_path(&g, d, &MetricDescriptor::Euclidean).unwrap();
        assert_eq!(out.first(), g.first());
        assert_eq!(out.last(), g.last());
        for w in out.vertices.windows(2) {
            for k in 0..=20 {
                let p = w[0].lerp(w[1], k as f64 / 20.0);
                assert!(p.zc_norm() >= d * (1.0 - 1e-9), "{p:?}");
            }
        }
        let outside = Polyline::from_vertices(vec![Point3::new(0.0, 1.0, 0.0), Point3::new(1.0, 1.0, 0.2)]).unwrap();
        assert_eq!(modify_path(&outside, d, &MetricDescriptor::Euclidean).unwrap(), outside);
    }
}
