//! Length of segments and polylines under `√Φ·|dζ|`.

use std::sync::OnceLock;

use super::descriptor::{conformal_factor, MetricDescriptor, Singular};
use crate::geom::{Point3, Polyline};
use crate::potential::EvalResult;
use crate::quad::{self, smoothstep, GaussLegendre};

fn gl8() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(8))
}

fn gl4() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(4))
}

/// `√Φ` for one descriptor at a fixed pointwise tolerance.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Field<'a> {
    pub desc: &'a MetricDescriptor,
    pub tol: f64,
}

impl<'a> Field<'a> {
    pub fn new(desc: &'a MetricDescriptor, tol: f64) -> Self {
        Field { desc, tol }
    }

    #[inline]
    pub fn sqrt_phi(&self, z: Point3) -> f64 {
        match conformal_factor(self.desc, z, self.tol) {
            Ok(r) => r.value.max(0.0).sqrt(),
            Err(_) => f64::NAN,
        }
    }

    /// Segment parameters in `(0, 1)` where the integrand may peak.
    fn splits(&self, p: Point3, q: Point3) -> Vec<f64> {
        let v = q - p;
        let mut out = Vec::with_capacity(2);
        let mut push = |t: f64| {
            if t > 1e-12 && t < 1.0 - 1e-12 {
                out.push(t);
            }
        };
        match self.desc.singular() {
            Singular::None => {}
            Singular::Origin => {
                let vv = v.dot(v);
                if vv > 0.0 {
                    push(-p.dot(v) / vv);
                }
            }
            Singular::Axis => {
                let vc = v.zc[0] * v.zc[0] + v.zc[1] * v.zc[1];
                if vc > 0.0 {
                    push(-(p.zc[0] * v.zc[0] + p.zc[1] * v.zc[1]) / vc);
                }
                let vv = v.dot(v);
                if vv > 0.0 {
                    push(-p.dot(v) / vv);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        out
    }

    /// True when the segment runs along the axis through a curve piece of poles.
    fn on_singular_axis(&self, p: Point3, q: Point3) -> bool {
        if p.zc != [0.0, 0.0] || q.zc != [0.0, 0.0] {
            return false;
        }
        let (lo, hi) = if p.zr <= q.zr { (p.zr, q.zr) } else { (q.zr, p.zr) };
        self.desc.axis_singular_intervals().iter().any(|&(a, b)| lo.max(a) < hi.min(b))
    }

    fn pieces(&self, p: Point3, q: Point3) -> Vec<(f64, f64)> {
        let mut knots = vec![0.0];
        knots.extend(self.splits(p, q));
        knots.push(1.0);
        knots.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Fixed-order segment length (smooth in the endpoints); used inside optimization.
    pub fn segment_fixed(&self, p: Point3, q: Point3) -> f64 {
        self.segment_rule(p, q, gl8())
    }

    /// Cheap segment length for grid edges touching singular nodes.
    pub fn segment_coarse(&self, p: Point3, q: Point3) -> f64 {
        self.segment_rule(p, q, gl4())
    }

    fn segment_rule(&self, p: Point3, q: Point3, gl: &GaussLegendre) -> f64 {
        let len = p.dist(q);
        if len == 0.0 {
            return 0.0;
        }
        if self.on_singular_axis(p, q) {
            return f64::INFINITY;
        }
        let v = q - p;
        let mut total = 0.0;
        for (a, b) in self.pieces(p, q) {
            let w = b - a;
            for (&u, &wt) in gl.nodes.iter().zip(&gl.weights) {
                let (s, ds) = smoothstep(u);
                total += wt * ds * w * self.sqrt_phi(p + v * (a + w * s));
            }
        }
        total * len
    }

    /// Adaptive segment length with an error estimate.
    pub fn segment_adaptive(&self, p: Point3, q: Point3, tol: f64) -> EvalResult {
        let len = p.dist(q);
        if len == 0.0 {
            return EvalResult::exact(0.0);
        }
        if self.on_singular_axis(p, q) {
            return EvalResult::INFINITE;
        }
        let v = q - p;
        let pieces = self.pieces(p, q);
        let k = pieces.len() as f64;
        let mut out = EvalResult::exact(0.0);
        for (a, b) in pieces {
            let r = quad::integrate_clustered(|t| self.sqrt_phi(p + v * t) * len, a, b, tol / k);
            out = out.add(EvalResult { value: r.value, error_bound: r.error });
        }
        if !out.value.is_finite() {
            return EvalResult::INFINITE;
        }
        out
    }

    pub fn polyline_fixed(&self, vs: &[Point3]) -> f64 {
        vs.windows(2).map(|w| self.segment_fixed(w[0], w[1])).sum()
    }
}

/// `l(γ) = ∫ √Φ(γ)|γ′|` with adaptive quadrature on every segment.
pub fn path_length(desc: &MetricDescriptor, gamma: &Polyline, tol: f64) -> EvalResult {
    let field = Field::new(desc, (tol * 1e-2).max(1e-14));
    polyline_length(&field, &gamma.vertices, tol)
}

pub(crate) fn polyline_length(field: &Field, vs: &[Point3], tol: f64) -> EvalResult {
    let nseg = vs.len().saturating_sub(1).max(1) as f64;
    let mut out = EvalResult::exact(0.0);
    for w in vs.windows(2) {
        out = out.add(field.segment_adaptive(w[0], w[1], tol / nseg));
        if out.is_infinite() {
            break;
        }
    }
    out
}
