//! Coarse-to-fine polyline refinement: resample by metric length, then
//! minimize the discretized length over the interior vertices.

use super::grid::Admissible;
use super::length::Field;
use crate::geom::Point3;

pub(crate) struct Refiner<'a, 'b> {
    pub field: &'b Field<'a>,
    pub adm: Admissible,
    pub rounds: usize,
}

impl Refiner<'_, '_> {
    fn admissible(&self, vs: &[Point3]) -> bool {
        vs.windows(2).all(|w| self.adm.segment(w[0], w[1]))
    }

    /// `m` segments of (roughly) equal metric length on the polyline `vs`.
    pub fn resample(&self, vs: &[Point3], m: usize) -> Vec<Point3> {
        let lens: Vec<f64> = vs.windows(2).map(|w| self.field.segment_fixed(w[0], w[1])).collect();
        let total: f64 = lens.iter().sum();
        if total.is_finite() && total > 0.0 {
            let mut out = Vec::with_capacity(m + 1);
            out.push(vs[0]);
            let mut seg = 0;
            let mut acc = 0.0;
            for j in 1..m {
                let target = total * j as f64 / m as f64;
                while seg + 1 < lens.len() && acc + lens[seg] < target {
                    acc += lens[seg];
                    seg += 1;
                }
                let f = if lens[seg] > 0.0 { ((target - acc) / lens[seg]).clamp(0.0, 1.0) } else { 0.5 };
                out.push(vs[seg].lerp(vs[seg + 1], f));
            }
            out.push(*vs.last().unwrap());
            out.dedup_by(|a, b| a.dist(*b) == 0.0);
            if out.len() >= 2 && self.admissible(&out) {
                return out;
            }
        }
        subdivide(vs, m)
    }

    fn objective(&self, vs: &[Point3]) -> f64 {
        self.field.polyline_fixed(vs)
    }

    /// Central-difference gradient of the total length in the interior vertices.
    fn gradient(&self, vs: &[Point3]) -> Vec<f64> {
        let n = vs.len();
        let mut g = vec![0.0; 3 * (n - 2)];
        let mut work = [Point3::ORIGIN; 3];
        for i in 1..n - 1 {
            let h = 1e-4 * vs[i - 1].dist(vs[i]).min(vs[i].dist(vs[i + 1])).max(1e-300);
            for k in 0..3 {
                let mut e = [0.0; 3];
                e[k] = h;
                let e = Point3::from_array(e);
                work.copy_from_slice(&vs[i - 1..=i + 1]);
                work[1] = vs[i] + e;
                let fp = self.objective(&work);
                work[1] = vs[i] - e;
                let fm = self.objective(&work);
                g[3 * (i - 1) + k] = (fp - fm) / (2.0 * h);
            }
        }
        g
    }

    fn step(vs: &[Point3], d: &[f64], t: f64) -> Vec<Point3> {
        let mut out = vs.to_vec();
        for i in 1..vs.len() - 1 {
            let j = 3 * (i - 1);
            out[i] = vs[i] + Point3::new(d[j], d[j + 1], d[j + 2]) * t;
        }
        out
    }

    /// Limited-memory BFGS on the interior vertices with a backtracking
    /// line search; stops when an iteration gains less than 1e−12 relative.
    pub fn optimize(&self, vs: &mut Vec<Point3>) {
        if vs.len() < 3 {
            return;
        }
        const MEM: usize = 6;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut f = self.objective(vs);
        if !f.is_finite() {
            return;
        }
        let mut g = self.gradient(vs);
        let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
        let mut iters = 0;
        while iters < self.rounds {
            iters += 1;
            // Two-loop recursion.
            let mut q: Vec<f64> = g.iter().map(|v| -v).collect();
            let mut alphas = Vec::with_capacity(hist.len());
            for (s, y, rho) in hist.iter().rev() {
                let a = rho * dot(s, &q);
                q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
                alphas.push(a);
            }
            if let Some((s, y, _)) = hist.last() {
                let gamma = dot(s, y) / dot(y, y);
                q.iter_mut().for_each(|v| *v *= gamma);
            }
            for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(y, &q);
                q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
            }
            let mut d = q;
            let mut slope = dot(&g, &d);
            if !(slope < 0.0) {
                hist.clear();
                d = g.iter().map(|v| -v).collect();
                slope = dot(&g, &d);
                if !(slope < 0.0) {
                    break;
                }
            }
            // Cap the largest vertex move at a quarter of the shortest segment.
            let smin = vs.windows(2).map(|w| w[0].dist(w[1])).fold(f64::INFINITY, f64::min);
            let dmax = d.chunks(3).map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()).fold(0.0, f64::max);
            let mut t = if hist.is_empty() { 0.25 * smin / dmax } else { 1.0f64.min(0.25 * smin / dmax) };
            let mut accepted = None;
            for _ in 0..30 {
                let trial = Self::step(vs, &d, t);
                let ft = self.objective(&trial);
                if ft.is_finite() && ft <= f + 1e-4 * t * slope && self.admissible(&trial) {
                    accepted = Some((trial, ft));
                    break;
                }
                t *= 0.5;
            }
            let Some((trial, ft)) = accepted else {
                if hist.is_empty() {
                    break;
                }
                hist.clear();
                continue;
            };
            let gain = f - ft;
            let gt = self.gradient(&trial);
            let s: Vec<f64> = d.iter().map(|v| v * t).collect();
            let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
                if hist.len() == MEM {
                    hist.remove(0);
                }
                hist.push((s, y, 1.0 / sy));
            }
            *vs = trial;
            f = ft;
            g = gt;
            if gain <= 1e-12 * f {
                break;
            }
        }
    }

    /// Levels `8, 16, …, m_final` segments.
    pub fn run(&self, init: &[Point3], m_final: usize) -> Vec<Point3> {
        let mut m = 8.min(m_final).max(1);
        let mut vs = self.resample(init, m);
        loop {
            self.optimize(&mut vs);
            if m >= m_final {
                return vs;
            }
            m *= 2;
            vs = self.resample(&vs, m);
        }
    }
}

/// Splits every segment into equal pieces until there are at least `m` segments.
pub(crate) fn subdivide(vs: &[Point3], m: usize) -> Vec<Point3> {
    let nseg = vs.len() - 1;
    let k = m.div_ceil(nseg.max(1)).max(1);
    let mut out = Vec::with_capacity(nseg * k + 1);
    for w in vs.windows(2) {
        for j in 0..k {
            out.push(w[0].lerp(w[1], j as f64 / k as f64));
        }
    }
    out.push(*vs.last().unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricDescriptor;

    #[test]
    fn straightens_euclidean_path() {
        let d = MetricDescriptor::Euclidean;
        let field = Field::new(&d, 1e-9);
        let r = Refiner { field: &field, adm: Admissible::All, rounds: 40 };
        let init = [Point3::ORIGIN, Point3::new(1.0, 1.0, 0.0), Point3::new(2.0, 0.0, 0.0)];
        let out = r.run(&init, 16);
        let len = field.polyline_fixed(&out);
        assert!((len - 2.0).abs() < 1e-6, "{len}");
        assert_eq!(out[0], init[0]);
        assert_eq!(*out.last().unwrap(), init[2]);
    }
}
