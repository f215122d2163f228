//! Harmonic conformal factors with poles on the curve `x ↦ (c·x^α, 0, 0)`:
//! lattice sums `Φ_Λ`, `Φ_a`, integral potentials `Φ_{S,P}^T`, interval unions,
//! and the constants `A_{S,P}^T`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geom::Point3;
use crate::quad::{self, Quad};

/// A value with an absolute error bound; `value = +∞` is the singular marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub error_bound: f64,
}

impl EvalResult {
    pub const INFINITE: EvalResult = EvalResult { value: f64::INFINITY, error_bound: 0.0 };

    pub fn exact(value: f64) -> Self {
        EvalResult { value, error_bound: 0.0 }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    pub fn lower(&self) -> f64 {
        (self.value - self.error_bound).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }

    pub fn add(self, o: EvalResult) -> EvalResult {
        if self.is_infinite() || o.is_infinite() {
            return EvalResult::INFINITE;
        }
        EvalResult { value: self.value + o.value, error_bound: self.error_bound + o.error_bound }
    }

    pub fn scale(self, s: f64) -> EvalResult {
        if self.is_infinite() {
            return self;
        }
        EvalResult { value: self.value * s, error_bound: self.error_bound * s.abs() }
    }
}

/// Rule producing the increasing sequence `K₀ < K₁ < ⋯`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KSeq {
    /// Finite list; the last entry may be `+∞`. An odd-length list leaves the
    /// final block open to infinity.
    Explicit(Vec<f64>),
    /// `K_n = ⌈K₀·β^n⌉`.
    Geometric { k0: f64, beta: f64 },
    /// `K_n = ⌈K₀·β^{n²}⌉`.
    SuperGeometric { k0: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub alpha: f64,
    pub kseq: KSeq,
}

impl LatticeSpec {
    pub fn new(alpha: f64, kseq: KSeq) -> Result<Self> {
        if !(alpha > 1.0) {
            return domain(format!("alpha must exceed 1, got {alpha}"));
        }
        match &kseq {
            KSeq::Explicit(ks) => {
                if ks.is_empty() {
                    return domain("explicit K list is empty");
                }
                if ks.iter().any(|k| !(*k >= 0.0)) || ks[..ks.len() - 1].iter().any(|k| !k.is_finite()) {
                    return domain("explicit K list must be nonnegative, with +inf only last");
                }
                if ks.iter().any(|k| k.is_finite() && k.fract() != 0.0) {
                    return domain("explicit K values must be integers");
                }
                if ks.windows(2).any(|w| !(w[1] > w[0])) {
                    return domain("explicit K list must be strictly increasing");
                }
            }
            KSeq::Geometric { k0, beta } | KSeq::SuperGeometric { k0, beta } => {
                if !(*k0 >= 1.0 && *beta > 1.0 && k0 * (beta - 1.0) >= 1.0) {
                    return domain("K rule needs K0 >= 1, beta > 1 and K0(beta-1) >= 1");
                }
            }
        }
        Ok(LatticeSpec { alpha, kseq })
    }

    /// `K_n`; `None` past the end of an explicit list.
    pub fn k(&self, n: usize) -> Option<f64> {
        match &self.kseq {
            KSeq::Explicit(ks) => ks.get(n).copied(),
            KSeq::Geometric { k0, beta } => Some((k0 * beta.powf(n as f64)).ceil()),
            KSeq::SuperGeometric { k0, beta } => Some((k0 * beta.powf((n * n) as f64)).ceil()),
        }
    }

    /// Block `n` as the integer range `[K_{2n}, K_{2n+1})`; the upper end may be `+∞`.
    pub fn block(&self, n: usize) -> Option<(f64, f64)> {
        let lo = self.k(2 * n)?;
        if !lo.is_finite() {
            return None;
        }
        Some((lo, self.k(2 * n + 1).unwrap_or(f64::INFINITY)))
    }

    pub fn is_infinite_sequence(&self) -> bool {
        !matches!(self.kseq, KSeq::Explicit(_))
    }
}

/// Rescaling parameters `a`, `P` and the derived `N = (P/a)^{1/(1+α)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleParams {
    pub a: f64,
    pub p: f64,
}

impl RescaleParams {
    pub fn new(a: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && p > 0.0 && a.is_finite() && p.is_finite()) {
            return domain("rescale parameters need a > 0 and P > 0");
        }
        Ok(RescaleParams { a, p })
    }

    pub fn n(&self, alpha: f64) -> f64 {
        (self.p / self.a).powf(1.0 / (1.0 + alpha))
    }

    /// `(S_n, T_n) = (K_{2n}/N, K_{2n+1}/N)`.
    pub fn block(&self, spec: &LatticeSpec, n: usize) -> Option<(f64, f64)> {
        let nn = self.n(spec.alpha);
        spec.block(n).map(|(lo, hi)| (lo / nn, hi / nn))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return domain("interval union is empty");
        }
        for (i, &(s, t)) in intervals.iter().enumerate() {
            if !(s >= 0.0 && s.is_finite() && t > s) {
                return domain(format!("invalid interval ({s}, {t})"));
            }
            if !t.is_finite() && i + 1 != intervals.len() {
                return domain("only the last interval may be unbounded");
            }
            if i + 1 < intervals.len() && !(t < intervals[i + 1].0) {
                return domain("intervals must be sorted and disjoint");
            }
        }
        Ok(IntervalUnion { intervals })
    }
}

/// `f(x) = 1/|ζ − c(x^α,0,0)|` together with the analytic pieces needed to
/// integrate and to bound its midpoint-rule error.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Curve {
    c: f64,
    alpha: f64,
    zr: f64,
    rho: f64,
    znorm: f64,
}

impl Curve {
    pub(crate) fn new(c: f64, alpha: f64, z: Point3) -> Self {
        Curve { c, alpha, zr: z.zr, rho: z.zc_norm(), znorm: z.norm() }
    }

    #[inline]
    pub(crate) fn f(&self, x: f64) -> f64 {
        let s = self.c * x.powf(self.alpha);
        1.0 / (s - self.zr).hypot(self.rho)
    }

    /// Parameter minimizing the distance to `ζ`.
    pub(crate) fn x_closest(&self) -> f64 {
        if self.zr > 0.0 {
            (self.zr / self.c).powf(1.0 / self.alpha)
        } else {
            0.0
        }
    }

    /// Start of the pure-power regime `c·t^α ≥ 2|ζ|`.
    fn t_star(&self) -> f64 {
        (2.0 * self.znorm / self.c).powf(1.0 / self.alpha)
    }

    /// True when `ζ` lies on the curve piece over `[a, b]`.
    pub(crate) fn on_curve(&self, a: f64, b: f64) -> bool {
        if self.rho != 0.0 || self.zr < 0.0 {
            return false;
        }
        let x0 = self.x_closest();
        x0 >= a && x0 <= b
    }

    /// Breakpoints that resolve the spike of width `ρ/(cαx₀^{α−1})` at `x₀`.
    fn spike_breaks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if self.zr <= 0.0 {
            return out;
        }
        let x0 = self.x_closest();
        out.push(x0);
        let slope = self.c * self.alpha * x0.powf(self.alpha - 1.0);
        let mut w = (self.rho / slope).max(1e-14 * x0.max(1.0));
        let span = (b - a).abs().max(x0);
        while w < span {
            out.push(x0 - w);
            out.push(x0 + w);
            w *= 4.0;
        }
        out
    }

    /// `∫_t^∞ f` by the multipole expansion, valid for `c·t^α ≥ 2|ζ|`.
    fn tail(&self, t: f64, tol: f64) -> Quad {
        if !t.is_finite() {
            return Quad::ZERO;
        }
        let base = t.powf(1.0 - self.alpha) / self.c;
        if self.znorm == 0.0 {
            return Quad { value: base / (self.alpha - 1.0), error: 0.0 };
        }
        let q = self.znorm / (self.c * t.powf(self.alpha));
        debug_assert!(q <= 0.5 + 1e-12);
        let x = self.zr / self.znorm;
        let (mut p_prev, mut p_cur) = (1.0, x);
        let mut qpow = 1.0;
        let mut sum = 0.0;
        let mut l = 0usize;
        loop {
            let pl = if l == 0 { 1.0 } else { p_cur };
            sum += base * qpow * pl / (self.alpha * (l as f64 + 1.0) - 1.0);
            qpow *= q;
            let rem = base * qpow / ((1.0 - q) * (self.alpha * (l as f64 + 2.0) - 1.0));
            if rem <= 0.25 * tol || qpow == 0.0 || l > 200 {
                return Quad { value: sum, error: rem + 4.0 * f64::EPSILON * sum.abs() };
            }
            if l >= 1 {
                let k = (l + 1) as f64;
                let p_next = ((2.0 * k - 1.0) * x * p_cur - (k - 1.0) * p_prev) / k;
                p_prev = p_cur;
                p_cur = p_next;
            }
            l += 1;
        }
    }

    /// `∫_a^b f` for `0 ≤ a < b ≤ ∞`, assuming `ζ` is not on the curve piece.
    pub(crate) fn integral(&self, a: f64, b: f64, tol: f64) -> Quad {
        if !(b > a) {
            return Quad::ZERO;
        }
        if self.znorm == 0.0 {
            let g = |x: f64| if x.is_finite() { x.powf(1.0 - self.alpha) } else { 0.0 };
            return Quad { value: (g(a) - g(b)) / (self.c * (self.alpha - 1.0)), error: 0.0 };
        }
        let ts = self.t_star();
        let mut out = Quad::ZERO;
        if a < ts {
            let hi = b.min(ts);
            let breaks = self.spike_breaks(a, hi);
            out = out.add(quad::integrate_with_breaks(|x| self.f(x), a, hi, &breaks, 0.5 * tol));
        }
        let lo = a.max(ts);
        if lo < b {
            let t_lo = self.tail(lo, 0.25 * tol);
            let t_hi = self.tail(b, 0.25 * tol);
            out = out.add(Quad { value: t_lo.value - t_hi.value, error: t_lo.error + t_hi.error });
        }
        out
    }

    /// Pointwise bound on `|f''(x)|`.
    fn f2_bound(&self, x: f64) -> f64 {
        let a = self.alpha;
        let s = self.c * x.powf(a);
        let d = (s - self.zr).hypot(self.rho);
        let s1 = self.c * a * x.powf(a - 1.0);
        let s2 = self.c * a * (a - 1.0) * x.powf(a - 2.0);
        2.0 * s1 * s1 / (d * d * d) + s2 / (d * d)
    }

    /// Bound on `Σ_k max_{[k−½,k+½]} |f''|` over the cells covering `[a, b]`.
    ///
    /// Integral of the pointwise bound plus a few times its sampled supremum,
    /// which covers the boundary cells of each monotone piece.
    fn f2_cell_sum_bound(&self, a: f64, b: f64) -> f64 {
        let ts = self.t_star();
        let kappa = (16.0 * self.alpha * self.alpha + 4.0 * self.alpha * (self.alpha - 1.0)) / self.c;
        let mut integral = 0.0;
        if a < ts {
            let hi = b.min(ts);
            let breaks = self.spike_breaks(a, hi);
            let g = |x: f64| self.f2_bound(x);
            let rough = quad::integrate_with_breaks(g, a, hi, &breaks, f64::INFINITY);
            let q = quad::integrate_with_breaks(g, a, hi, &breaks, 1e-3 * rough.value.abs());
            integral += q.value * 1.01 + q.error;
        }
        let lo = a.max(ts);
        if lo < b {
            let g = |x: f64| if x.is_finite() { x.powf(-self.alpha - 1.0) } else { 0.0 };
            integral += kappa / (self.alpha + 1.0) * (g(lo) - g(b));
        }
        let b_eff = if b.is_finite() { b } else { (a * 1e3).max(4.0 * ts) };
        let mut sup: f64 = 0.0;
        let n = 32;
        for i in 0..=n {
            let x = a * (b_eff / a).powf(i as f64 / n as f64);
            sup = sup.max(self.f2_bound(x));
        }
        integral + 4.0 * sup
    }
}

/// `Σ_{k ∈ Λ} 1/|ζ − c·(k^α,0,0)|` over the blocks of `spec`.
///
/// Integers near the spike and near the origin are summed directly; every
/// other range is replaced by its midpoint-rule integral, whose error is
/// bounded through `|f''|`. Trailing blocks of an infinite rule are dropped
/// once the integral comparison tail bound is small.
fn lattice_sum(spec: &LatticeSpec, c: f64, z: Point3, tol: f64) -> EvalResult {
    let curve = Curve::new(c, spec.alpha, z);
    let mut w = 16.0;
    loop {
        let r = lattice_attempt(spec, &curve, z, w, tol);
        if r.is_infinite() || r.error_bound <= tol || w > 1e6 {
            return r;
        }
        w *= 4.0;
    }
}

fn lattice_attempt(spec: &LatticeSpec, curve: &Curve, z: Point3, w: f64, tol: f64) -> EvalResult {
    let alpha = spec.alpha;
    let x0 = curve.x_closest();
    // Integer ranges summed term by term.
    let mut direct = vec![(0.0, w.ceil())];
    let (d_lo, d_hi) = ((x0 - w).floor().max(0.0), (x0 + w).ceil() + 1.0);
    if d_lo <= direct[0].1 {
        direct[0].1 = direct[0].1.max(d_hi);
    } else {
        direct.push((d_lo, d_hi));
    }
    let znorm = z.norm();
    let mut value = 0.0;
    let mut err = 0.0;
    let mut nterms = 0.0;
    let piece_tol = 1e-3 * tol;
    for n in 0.. {
        let Some((lo, hi)) = spec.block(n) else { break };
        if spec.is_infinite_sequence() && n > 0 {
            let t = lo - 1.0;
            if t > 0.0 && curve.c * t.powf(alpha) >= 2.0 * znorm {
                let rest = 2.0 / (curve.c * (alpha - 1.0)) * t.powf(1.0 - alpha);
                if rest < 0.125 * tol || n > 100_000 {
                    err += rest;
                    break;
                }
            }
        }
        // Walk [lo, hi) alternating between direct and smooth ranges.
        let mut cur = lo;
        for &(p, q) in &direct {
            if cur >= hi {
                break;
            }
            if q <= cur {
                continue;
            }
            if p > cur {
                let end = p.min(hi);
                smooth_range(curve, cur, end, piece_tol, &mut value, &mut err);
                cur = end;
            }
            let end = q.min(hi);
            let mut k = cur;
            while k < end {
                let t = curve.f(k);
                if t.is_infinite() {
                    return EvalResult::INFINITE;
                }
                value += t;
                nterms += 1.0;
                k += 1.0;
            }
            cur = cur.max(end);
        }
        if cur < hi {
            smooth_range(curve, cur, hi, piece_tol, &mut value, &mut err);
        }
    }
    err += (nterms + 10.0) * f64::EPSILON * value.abs();
    EvalResult { value, error_bound: err }
}

fn smooth_range(curve: &Curve, p: f64, q: f64, tol: f64, value: &mut f64, err: &mut f64) {
    if !(q > p) {
        return;
    }
    let (a, b) = (p - 0.5, q - 0.5);
    let r = curve.integral(a, b, tol);
    *value += r.value;
    *err += r.error + curve.f2_cell_sum_bound(a, b) / 24.0;
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        domain(format!("tolerance must be positive, got {tol}"))
    }
}

/// `Φ_Λ(ζ) = Σ_{λ∈Λ} 1/|ζ − λ|`.
pub fn phi_lambda(spec: &LatticeSpec, z: Point3, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    Ok(lattice_sum(spec, 1.0, z, tol))
}

/// `Φ_{sΛ}(ζ) = Σ_{λ∈Λ} 1/|ζ − sλ|`, summed in the original coordinates.
pub fn phi_scaled_lattice(spec: &LatticeSpec, s: f64, z: Point3, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    if !(s > 0.0) {
        return domain("lattice scale must be positive");
    }
    Ok(lattice_sum(spec, s, z, tol))
}

/// `Φ_a(ζ) = Σ_{λ∈Λ} 1/(N|ζ − PN^{−α}λ|)`.
pub fn phi_a(spec: &LatticeSpec, rp: &RescaleParams, z: Point3, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    let n = rp.n(spec.alpha);
    let c = rp.p * n.powf(-spec.alpha);
    Ok(lattice_sum(spec, c, z, tol * n).scale(1.0 / n))
}

/// `Φ_{S,P}^T(ζ) = ∫_S^T dx/|ζ − P(x^α,0,0)|`.
pub fn phi_st(s: f64, t: f64, p: f64, alpha: f64, z: Point3, tol: f64) -> Result<EvalResult> {
    check_tol(tol)?;
    if !(alpha > 1.0) {
        return domain(format!("alpha must exceed 1, got {alpha}"));
    }
    if !(p > 0.0) {
        return domain("P must be positive");
    }
    if !(s >= 0.0 && s.is_finite() && t > s) {
        return domain(format!("need 0 <= S < T, got S={s}, T={t}"));
    }
    let curve = Curve::new(p, alpha, z);
    if curve.on_curve(s, t) {
        return Ok(EvalResult::INFINITE);
    }
    let q = curve.integral(s, t, tol);
    Ok(EvalResult { value: q.value, error_bound: q.error })
}

/// `Φ_I = Σ_l Φ_{S_l,P}^{T_l}`.
pub fn phi_interval_union(iu: &IntervalUnion, p: f64, alpha: f64, z: Point3, tol: f64) -> Result<EvalResult> {
    let k = iu.intervals.len() as f64;
    let mut acc = EvalResult::exact(0.0);
    for &(s, t) in &iu.intervals {
        acc = acc.add(phi_st(s, t, p, alpha, z, tol / k)?);
    }
    Ok(acc)
}

/// `A_{S,P}^T = ∫_S^T dx/(1 + Px^α)`, relative accuracy about 1e−11.
pub fn a_st(s: f64, t: f64, p: f64, alpha: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= s) {
        return domain(format!("need 0 <= S <= T, got S={s}, T={t}"));
    }
    if s == t {
        return Ok(0.0);
    }
    let z = Point3::new(-1.0, 0.0, 0.0);
    let rough = phi_st(s, t, p, alpha, z, 1e-6)?;
    let fine = phi_st(s, t, p, alpha, z, (1e-12 * rough.value).max(1e-300))?;
    Ok(fine.value)
}

/// `π/(N√Φ_a(ζ))`, zero at the poles.
pub fn fiber_diameter(spec: &LatticeSpec, rp: &RescaleParams, z: Point3, tol: f64) -> Result<EvalResult> {
    let phi = phi_a(spec, rp, z, tol)?;
    if phi.is_infinite() {
        return Ok(EvalResult::exact(0.0));
    }
    let n = rp.n(spec.alpha);
    let f = |v: f64| std::f64::consts::PI / (n * v.sqrt());
    let value = f(phi.value);
    let lo = phi.lower();
    let err = if lo > 0.0 { (f(lo) - value).max(value - f(phi.upper())) } else { f64::INFINITY };
    Ok(EvalResult { value, error_bound: err })
}

/// `Σ_n Φ_{S_n,P}^{T_n}(ζ)`, with trailing blocks bounded by
/// `2S_{n₀}^{1−α}/(P(α−1))` once `S_{n₀} ≥ (2|ζ|/P)^{1/α}` and that bound is below `tail_tol`.
pub fn phi_blocks(spec: &LatticeSpec, rp: &RescaleParams, z: Point3, tol: f64, tail_tol: f64) -> Result<EvalResult> {
    let alpha = spec.alpha;
    let znorm = z.norm();
    let mut acc = EvalResult::exact(0.0);
    for n in 0.. {
        let Some((s, t)) = rp.block(spec, n) else { break };
        if s >= (2.0 * znorm / rp.p).powf(1.0 / alpha) && n > 0 {
            let rest = 2.0 * s.powf(1.0 - alpha) / (rp.p * (alpha - 1.0));
            if rest < tail_tol || !s.is_finite() {
                acc.error_bound += rest;
                break;
            }
        }
        let term = phi_st(s, t, rp.p, alpha, z, tol * 0.5f64.powi(n as i32 + 1))?;
        acc = acc.add(term);
        if acc.is_infinite() {
            return Ok(acc);
        }
    }
    Ok(acc)
}

/// `Σ_n A_{S_n,P}^{T_n}` truncated once the remaining tail is below `tail_tol`.
pub fn sum_a(spec: &LatticeSpec, rp: &RescaleParams, tail_tol: f64) -> Result<f64> {
    let alpha = spec.alpha;
    let mut acc = 0.0;
    for n in 0.. {
        let Some((s, t)) = rp.block(spec, n) else { break };
        if n > 0 && s > 0.0 {
            let rest = s.powf(1.0 - alpha) / (rp.p * (alpha - 1.0));
            if rest < tail_tol {
                break;
            }
        }
        acc += a_st(s, t, rp.p, alpha)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn arctan_oracle() {
        let r = phi_st(0.0, f64::INFINITY, 1.0, 2.0, Point3::new(-1.0, 0.0, 0.0), 1e-12).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-10, "{r:?}");
        assert!(r.error_bound <= 1e-12);
    }

    #[test]
    fn full_lattice_closed_form() {
        let spec = LatticeSpec::new(2.0, KSeq::Explicit(vec![0.0, f64::INFINITY])).unwrap();
        let r = phi_lambda(&spec, Point3::new(-1.0, 0.0, 0.0), 1e-10).unwrap();
        let exact = 0.5 + PI / 2.0 / PI.tanh();
        assert!((r.value - exact).abs() < 1e-9, "{r:?} vs {exact}");
        assert!((r.value - exact).abs() <= r.error_bound + 1e-12);
    }

    #[test]
    fn lattice_point_marker() {
        let spec = LatticeSpec::new(2.0, KSeq::Geometric { k0: 2.0, beta: 3.0 }).unwrap();
        let r = phi_lambda(&spec, Point3::new(4.0, 0.0, 0.0), 1e-8).unwrap();
        assert!(r.is_infinite());
    }

    #[test]
    fn on_curve_marker_and_domain() {
        let r = phi_st(1.0, 2.0, 1.0, 2.0, Point3::new(2.25, 0.0, 0.0), 1e-8).unwrap();
        assert!(r.is_infinite());
        assert!(phi_st(1.0, 1.0, 1.0, 2.0, Point3::ORIGIN, 1e-8).is_err());
        assert!(phi_st(0.0, 1.0, 1.0, 0.5, Point3::ORIGIN, 1e-8).is_err());
    }

    #[test]
    fn a_st_values() {
        assert!((a_st(0.0, f64::INFINITY, 1.0, 2.0).unwrap() - PI / 2.0).abs() < 1e-12);
        assert_eq!(a_st(2.0, 2.0, 1.0, 2.0).unwrap(), 0.0);
    }
}
