//! One-dimensional quadrature: adaptive Gauss–Kronrod (7/15) with explicit
//! breakpoints, a smoothstep substitution for endpoint singularities, and
//! fixed Gauss–Legendre rules.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 4000;

/// Integral estimate with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

impl Quad {
    pub const ZERO: Quad = Quad { value: 0.0, error: 0.0 };

    pub fn add(self, other: Quad) -> Quad {
        Quad { value: self.value + other.value, error: self.error + other.error }
    }
}

/// One Kronrod panel: (value, error estimate), QUADPACK error heuristic.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * h;
    resabs *= h.abs();
    resasc *= h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]` (finite), starting from
/// the panels delimited by `breaks` (points outside `(a, b)` are ignored).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Quad {
    if !(b > a) {
        return Quad::ZERO;
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut heap = BinaryHeap::new();
    let mut lo = a;
    for &p in pts.iter().chain(std::iter::once(&b)) {
        let (value, error) = gk15(&f, lo, p);
        heap.push(Panel { a: lo, b: p, value, error });
        lo = p;
    }
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();
    while total_err > tol && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to avoid drift from incremental updates.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Quad { value, error }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quad {
    integrate_with_breaks(f, a, b, &[], tol)
}

/// Smoothstep map `u ↦ 3u² − 2u³` and its derivative; clusters nodes at both
/// ends so that `r^{-1/2}` endpoint singularities become bounded.
#[inline]
pub fn smoothstep(u: f64) -> (f64, f64) {
    (u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u))
}

/// Integral over `[a, b]` of a function that may blow up integrably at either end.
pub fn integrate_clustered<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quad {
    if !(b > a) {
        return Quad::ZERO;
    }
    let len = b - a;
    let g = |u: f64| {
        let (s, ds) = smoothstep(u);
        if ds == 0.0 {
            return 0.0;
        }
        f(a + len * s) * ds * len
    };
    integrate(g, 0.0, 1.0, tol)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Newton iteration from the Chebyshev-like initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes[i] = 0.5 * (1.0 - x);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| nodes[i].total_cmp(&nodes[j]));
        GaussLegendre {
            nodes: idx.iter().map(|&i| nodes[i]).collect(),
            weights: idx.iter().map(|&i| weights[i]).collect(),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let len = b - a;
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(a + len * x)).sum::<f64>() * len
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomials `P_0..=P_l` at `x`.
pub fn legendre_table(l: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if l == 0 {
        return;
    }
    out.push(x);
    for k in 2..=l {
        let p = ((2 * k - 1) as f64 * x * out[k - 1] - (k - 1) as f64 * out[k - 2]) / k as f64;
        out.push(p);
    }
}

/// `∫₀^π |cos t|^{-1/2} dt`, computed once by quadrature.
///
/// By symmetry this is `2∫₀^{π/2} (sin s)^{-1/2} ds`; the smoothstep map
/// absorbs the `s^{-1/2}` singularity at `s = 0`.
pub fn cos_inverse_sqrt_integral() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let q = integrate_clustered(|s| 1.0 / s.sin().sqrt(), 0.0, half_pi, 1e-14);
        2.0 * q.value
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x.powi(5) - 2.0 * x, -1.0, 2.0, 1e-12);
        assert!((q.value - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt_singularity() {
        let q = integrate_clustered(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12);
        assert!((q.value - 2.0).abs() < 1e-10, "{q:?}");
    }

    #[test]
    fn gauss_legendre_exact_degree() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(|x| x.powi(15), 0.0, 1.0);
        assert!((v - 1.0 / 16.0).abs() < 1e-14);
        assert!((gl.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn peaked_with_breakpoint() {
        let eps = 1e-6;
        let q = integrate_with_breaks(|x| eps / (x * x + eps * eps), -1.0, 1.0, &[0.0], 1e-10);
        let exact = 2.0 * (1.0 / eps).atan();
        assert!((q.value - exact).abs() < 1e-8, "{q:?}");
    }
}
