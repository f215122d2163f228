//! Cartesian grid with 26-neighbour connectivity and Dijkstra over it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::length::Field;
use crate::geom::{Point3, Region};

/// Admissible set for nodes and edges.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Admissible {
    All,
    Region(Region),
}

impl Admissible {
    pub fn point(&self, p: Point3) -> bool {
        match self {
            Admissible::All => true,
            Admissible::Region(r) => region_contains(r, p),
        }
    }

    /// Whether the whole segment `[p, q]` lies in the set.
    pub fn segment(&self, p: Point3, q: Point3) -> bool {
        match self {
            Admissible::All => true,
            Admissible::Region(r) => segment_in_region(r, p, q),
        }
    }
}

fn region_contains(r: &Region, p: Point3) -> bool {
    match *r {
        Region::Krd { r, d } => p.norm() <= r && p.dist_to_half_axis() >= d,
        Region::Ball { u } => p.norm() <= u,
        Region::SlabL { d } => p.zc_norm() < d,
        Region::MetricBall { .. } => true,
    }
}

/// Exact for balls (convexity); for `K(R,D)` the distance to the half-axis
/// is convex along the segment, so its minimum is found by golden section.
pub(crate) fn segment_in_region(r: &Region, p: Point3, q: Point3) -> bool {
    if !region_contains(r, p) || !region_contains(r, q) {
        return false;
    }
    match *r {
        Region::Krd { d, .. } => {
            let f = |t: f64| p.lerp(q, t).dist_to_half_axis();
            let (mut a, mut b) = (0.0, 1.0);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = b - g * (b - a);
            let mut e = a + g * (b - a);
            let (mut fc, mut fe) = (f(c), f(e));
            for _ in 0..60 {
                if fc < fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - g * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + g * (b - a);
                    fe = f(e);
                }
            }
            fc.min(fe) >= d * (1.0 - 1e-12)
        }
        _ => true,
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub lo: Point3,
    pub h: f64,
    pub n: [usize; 3],
}

impl Grid {
    /// Grid over `[lo, hi]` with spacing `h`, shifted so that `anchor` is a node.
    pub fn anchored(lo: Point3, hi: Point3, h: f64, anchor: Point3) -> Grid {
        let a = anchor.to_array();
        let l = lo.to_array();
        let u = hi.to_array();
        let mut start = [0.0; 3];
        let mut n = [0usize; 3];
        for k in 0..3 {
            let below = ((a[k] - l[k]) / h).ceil().max(0.0);
            let above = ((u[k] - a[k]) / h).ceil().max(0.0);
            start[k] = a[k] - below * h;
            n[k] = (below + above) as usize + 1;
        }
        Grid { lo: Point3::from_array(start), h, n }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.n[2];
        let j = (idx / self.n[2]) % self.n[1];
        let i = idx / (self.n[1] * self.n[2]);
        [i, j, k]
    }

    pub fn point(&self, idx: usize) -> Point3 {
        let c = self.coords(idx);
        Point3::new(
            self.lo.zr + c[0] as f64 * self.h,
            self.lo.zc[0] + c[1] as f64 * self.h,
            self.lo.zc[1] + c[2] as f64 * self.h,
        )
    }

    /// Nearest node to `p` (clamped into the grid).
    pub fn nearest(&self, p: Point3) -> usize {
        let a = p.to_array();
        let l = self.lo.to_array();
        let mut c = [0usize; 3];
        for k in 0..3 {
            let v = ((a[k] - l[k]) / self.h).round();
            c[k] = v.clamp(0.0, (self.n[k] - 1) as f64) as usize;
        }
        self.index(c)
    }

    pub fn neighbours(&self, idx: usize, out: &mut Vec<usize>) {
        out.clear();
        let c = self.coords(idx);
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                for dk in -1i64..=1 {
                    if di == 0 && dj == 0 && dk == 0 {
                        continue;
                    }
                    let ni = c[0] as i64 + di;
                    let nj = c[1] as i64 + dj;
                    let nk = c[2] as i64 + dk;
                    if ni < 0 || nj < 0 || nk < 0 {
                        continue;
                    }
                    let (ni, nj, nk) = (ni as usize, nj as usize, nk as usize);
                    if ni >= self.n[0] || nj >= self.n[1] || nk >= self.n[2] {
                        continue;
                    }
                    out.push(self.index([ni, nj, nk]));
                }
            }
        }
    }
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

// Min-heap by (cost, node index).
impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazily evaluated `√Φ` on the nodes plus Dijkstra.
pub(crate) struct GridSolver<'a> {
    pub grid: Grid,
    field: Field<'a>,
    adm: Admissible,
    sqrt_phi: Vec<f64>,
    allowed: Vec<u8>,
}

impl<'a> GridSolver<'a> {
    pub fn new(grid: Grid, field: Field<'a>, adm: Admissible) -> Self {
        let n = grid.len();
        GridSolver { grid, field, adm, sqrt_phi: vec![f64::NAN; n], allowed: vec![2; n] }
    }

    pub fn allowed(&mut self, idx: usize) -> bool {
        if self.allowed[idx] == 2 {
            self.allowed[idx] = self.adm.point(self.grid.point(idx)) as u8;
        }
        self.allowed[idx] == 1
    }

    fn node_value(&mut self, idx: usize) -> f64 {
        let v = self.sqrt_phi[idx];
        if !v.is_nan() {
            return v;
        }
        let v = self.field.sqrt_phi(self.grid.point(idx));
        self.sqrt_phi[idx] = v;
        v
    }

    fn edge_weight(&mut self, a: usize, b: usize) -> f64 {
        let pa = self.grid.point(a);
        let pb = self.grid.point(b);
        if !self.adm.segment(pa, pb) {
            return f64::INFINITY;
        }
        let sa = self.node_value(a);
        let sb = self.node_value(b);
        let len = pa.dist(pb);
        let (lo, hi) = if sa < sb { (sa, sb) } else { (sb, sa) };
        if hi.is_finite() && hi <= 4.0 * lo {
            0.5 * (sa + sb) * len
        } else {
            self.field.segment_coarse(pa, pb)
        }
    }

    /// Dijkstra from `sources`; stops early once every node in `targets` is
    /// settled (never, when `targets` is empty). Returns distances and
    /// predecessor links.
    pub fn run(&mut self, sources: &[usize], targets: &[usize]) -> (Vec<f64>, Vec<usize>) {
        let n = self.grid.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(State { cost: 0.0, node: s });
        }
        let mut nbrs = Vec::with_capacity(26);
        let mut remaining = targets.len();
        while let Some(State { cost, node }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            if targets.contains(&node) {
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            self.grid.neighbours(node, &mut nbrs);
            for &m in &nbrs {
                if done[m] || !self.allowed(m) {
                    continue;
                }
                let w = self.edge_weight(node, m);
                if !w.is_finite() {
                    continue;
                }
                let c = cost + w;
                if c < dist[m] {
                    dist[m] = c;
                    prev[m] = node;
                    heap.push(State { cost: c, node: m });
                }
            }
        }
        (dist, prev)
    }
}

pub(crate) fn trace(prev: &[usize], target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut cur = target;
    while prev[cur] != usize::MAX {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchored_grid_contains_anchor() {
        let g = Grid::anchored(Point3::new(-1.0, -1.0, -1.0), Point3::new(1.0, 1.0, 1.0), 0.3, Point3::new(0.1, 0.2, 0.0));
        let i = g.nearest(Point3::new(0.1, 0.2, 0.0));
        assert!(g.point(i).dist(Point3::new(0.1, 0.2, 0.0)) < 1e-12);
        assert_eq!(g.coords(g.index([1, 2, 3])), [1, 2, 3]);
    }

    #[test]
    fn krd_segment_check() {
        let r = Region::Krd { r: 3.0, d: 0.5 };
        // Both endpoints admissible, but the chord crosses the axis.
        assert!(!segment_in_region(&r, Point3::new(1.0, 1.0, 0.0), Point3::new(1.0, -1.0, 0.0)));
        assert!(segment_in_region(&r, Point3::new(1.0, 1.0, 0.0), Point3::new(2.0, 1.0, 0.0)));
    }
}
