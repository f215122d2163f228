//! Points in R³ = R ⊕ C, the four region shapes, polylines and the constants ledger.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;

/// A point `ζ = (ζ_R, ζ_C)`; `zc` is the complex part as a plane vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub zr: f64,
    pub zc: [f64; 2],
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { zr: 0.0, zc: [0.0, 0.0] };

    pub const fn new(zr: f64, c1: f64, c2: f64) -> Self {
        Point3 { zr, zc: [c1, c2] }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.zr, self.zc[0], self.zc[1]]
    }

    /// `|ζ_C|`.
    pub fn zc_norm(self) -> f64 {
        self.zc[0].hypot(self.zc[1])
    }

    /// `|ζ|`; hypot keeps this overflow-free.
    pub fn norm(self) -> f64 {
        self.zr.hypot(self.zc_norm())
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.zr * o.zr + self.zc[0] * o.zc[0] + self.zc[1] * o.zc[1]
    }

    pub fn dist(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    /// Distance to the half-axis `l = {(t,0,0) : t ≥ 0}`.
    pub fn dist_to_half_axis(self) -> f64 {
        if self.zr >= 0.0 {
            self.zc_norm()
        } else {
            self.norm()
        }
    }

    pub fn is_finite(self) -> bool {
        self.zr.is_finite() && self.zc[0].is_finite() && self.zc[1].is_finite()
    }

    /// Rotate `ζ_C` by angle `theta`.
    pub fn rotate_c(self, theta: f64) -> Point3 {
        let (s, c) = theta.sin_cos();
        Point3::new(self.zr, c * self.zc[0] - s * self.zc[1], s * self.zc[0] + c * self.zc[1])
    }

    pub fn lerp(self, o: Point3, t: f64) -> Point3 {
        self + (o - self) * t
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.zr + o.zr, self.zc[0] + o.zc[0], self.zc[1] + o.zc[1])
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.zr - o.zr, self.zc[0] - o.zc[0], self.zc[1] - o.zc[1])
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.zr * s, self.zc[0] * s, self.zc[1] * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        self * -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// `K(R,D)`: `|ζ| ≤ R` and distance to the half-axis `≥ D`.
    Krd { r: f64, d: f64 },
    /// Open slab `L(D) = {|ζ_C| < D}`.
    SlabL { d: f64 },
    /// Closed Euclidean ball `|ζ| ≤ u`.
    Ball { u: f64 },
    /// Metric ball; membership needs a distance, see `metric::in_metric_ball`.
    MetricBall { center: Point3, r: f64 },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::Krd { r, d } => r >= d && d >= 0.0,
            Region::SlabL { d } => d > 0.0,
            Region::Ball { u } => u > 0.0,
            Region::MetricBall { center, r } => r > 0.0 && center.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            domain(format!("invalid region {self:?}"))
        }
    }
}

/// Set-membership for the Euclidean region shapes.
pub fn contains(region: &Region, p: Point3) -> Result<bool> {
    match *region {
        Region::Krd { r, d } => Ok(p.norm() <= r && p.dist_to_half_axis() >= d),
        Region::SlabL { d } => Ok(p.zc_norm() < d),
        Region::Ball { u } => Ok(p.norm() <= u),
        Region::MetricBall { .. } => Err(Error::Precondition(
            "metric-ball membership requires a metric descriptor".into(),
        )),
    }
}

/// Piecewise-linear path with strictly increasing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub vertices: Vec<Point3>,
    pub params: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point3>, params: Vec<f64>) -> Result<Self> {
        if vertices.len() < 2 || vertices.len() != params.len() {
            return domain("polyline needs >= 2 vertices and one parameter per vertex");
        }
        if params.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("polyline parameters must be strictly increasing");
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return domain("polyline vertices must be finite");
        }
        Ok(Polyline { vertices, params })
    }

    /// Parameters by cumulative Euclidean arclength, with unit steps across
    /// repeated vertices so they stay strictly increasing.
    pub fn from_vertices(vertices: Vec<Point3>) -> Result<Self> {
        let mut params = Vec::with_capacity(vertices.len());
        let mut t = 0.0;
        for (i, v) in vertices.iter().enumerate() {
            if i > 0 {
                let next = t + v.dist(vertices[i - 1]);
                t = if next > t { next } else { t + 1e-12_f64.max(t * 1e-15) };
            }
            params.push(t);
        }
        Polyline::new(vertices, params)
    }

    pub fn first(&self) -> Point3 {
        self.vertices[0]
    }

    pub fn last(&self) -> Point3 {
        *self.vertices.last().unwrap()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].dist(w[1])).sum()
    }
}

/// Constants of the standing assumptions, with the derived `C₂`, `C₃`, `κ′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub m: f64,
    pub epsilon: f64,
}

impl ConstantsLedger {
    pub fn new(c0: f64, c1: f64, kappa: f64, m: f64, epsilon: f64) -> Result<Self> {
        if !(c0 > 0.0 && c1 > 0.0 && kappa >= 0.0 && m > 0.0 && epsilon >= 0.0) {
            return domain("ledger needs C0, C1, m > 0 and kappa, epsilon >= 0");
        }
        let c2 = (2.0 + quad::cos_inverse_sqrt_integral()) * c1.sqrt();
        let c3 = 3.0 * c2 / (2.0 * c0.sqrt());
        Ok(ConstantsLedger { c0, c1, c2, c3, kappa, kappa_prime: 0.5 * (1.0 + kappa), m, epsilon })
    }

    /// `ρ(t) = max{t − 1, (1 + C₃ t^{κ′})²}`.
    pub fn rho(&self, t: f64) -> f64 {
        (t - 1.0).max((1.0 + self.c3 * t.powf(self.kappa_prime)).powi(2))
    }

    /// `u(r) = (1 + C₀^{-1/2} r / 2)²`.
    pub fn u_of_r(&self, r: f64) -> f64 {
        (1.0 + r / (2.0 * self.c0.sqrt())).powi(2)
    }

    pub fn xi(&self, u: f64) -> f64 {
        let k = self.kappa;
        (self.c1 * (1.0 + (self.rho(u + 1.0) + 1.0).powf(k))).sqrt()
            + 8.0 * (self.c1 * (1.0 + (u + 1.0).powf(k))).sqrt()
            + 2.0
    }

    pub fn xi_inf(&self, u: f64) -> f64 {
        let k = self.kappa;
        (self.c1 * (self.rho(u + 1.0) + 1.0).powf(k)).sqrt() + 8.0 * (self.c1 * (u + 1.0).powf(k)).sqrt() + 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerValues {
    pub rho_u: f64,
    pub u_of_r: f64,
    pub xi_u: f64,
    pub xi_inf_u: f64,
}

pub fn ledger_functions(ledger: &ConstantsLedger, u: f64, r: f64) -> Result<LedgerValues> {
    if !(u >= 1.0) {
        return domain(format!("ledger functions need u >= 1, got {u}"));
    }
    if !(r > 0.0) {
        return domain(format!("ledger functions need r > 0, got {r}"));
    }
    Ok(LedgerValues {
        rho_u: ledger.rho(u),
        u_of_r: ledger.u_of_r(r),
        xi_u: ledger.xi(u),
        xi_inf_u: ledger.xi_inf(u),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_examples() {
        let k = Region::Krd { r: 2.0, d: 0.5 };
        assert!(contains(&k, Point3::new(1.0, 0.6, 0.0)).unwrap());
        assert!(contains(&k, Point3::new(-1.0, 0.1, 0.0)).unwrap());
        assert!(!contains(&k, Point3::new(1.0, 0.1, 0.0)).unwrap());
        assert!(contains(&Region::SlabL { d: 0.5 }, Point3::new(3.0, 0.4, 0.2)).unwrap());
        let mb = Region::MetricBall { center: Point3::ORIGIN, r: 1.0 };
        assert!(contains(&mb, Point3::ORIGIN).is_err());
    }

    #[test]
    fn norm_without_overflow() {
        let p = Point3::new(1e12, 1e12, 1e12);
        assert!((p.norm() - 3f64.sqrt() * 1e12).abs() < 1e-3);
        let q = Point3::new(1e200, 1e200, 0.0);
        assert!(q.norm().is_finite());
    }

    #[test]
    fn ledger_substitutions() {
        let mut l = ConstantsLedger::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        l.c3 = 1.0;
        l.kappa_prime = 1.0;
        assert_eq!(l.rho(1.0), 4.0);
        assert_eq!(l.u_of_r(2.0), 4.0);
    }

    #[test]
    fn xi_with_kappa_zero() {
        let l = ConstantsLedger::new(1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        let v = ledger_functions(&l, 1.0, 1.0).unwrap();
        let expect = 2f64.sqrt() + 8.0 * 2f64.sqrt() + 2.0;
        assert!((v.xi_u - expect).abs() < 1e-12);
        assert!((v.xi_inf_u - 11.0).abs() < 1e-12);
        assert!(ledger_functions(&l, 0.5, 1.0).is_err());
    }

    #[test]
    fn polyline_validation() {
        let a = Point3::ORIGIN;
        let b = Point3::new(1.0, 0.0, 0.0);
        assert!(Polyline::new(vec![a], vec![0.0]).is_err());
        assert!(Polyline::new(vec![a, b], vec![1.0, 1.0]).is_err());
        let p = Polyline::from_vertices(vec![a, b, b]).unwrap();
        assert!(p.params[2] > p.params[1]);
    }
}
