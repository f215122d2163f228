use crate::error::{domain, Result};
use crate::geom::Point3;
use crate::potential::{self, EvalResult, IntervalUnion, LatticeSpec, RescaleParams};

/// The supported conformal factors `Φ` of metrics `Φ·h₀`.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricDescriptor {
    Euclidean,
    /// `(θ/|ζ|)h₀`.
    InverseRadial { theta: f64 },
    /// `(c + θ/|ζ|)h₀`.
    AffineConformal { c: f64, theta: f64 },
    /// `Φ_{S,P}^T h₀`; `t` may be `+∞`.
    PotentialST { s: f64, t: f64, p: f64, alpha: f64 },
    /// `Φ_I h₀` for a finite union of intervals.
    PotentialUnion { union: IntervalUnion, p: f64, alpha: f64 },
    /// `Φ_a h₀`.
    RescaledLattice { spec: LatticeSpec, rp: RescaleParams },
}

/// Where `Φ` blows up, used to place quadrature splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Singular {
    None,
    Origin,
    Axis,
}

impl MetricDescriptor {
    /// `d_S^T` with `P = 1`.
    pub fn d_st(s: f64, t: f64, alpha: f64) -> Self {
        MetricDescriptor::PotentialST { s, t, p: 1.0, alpha }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricDescriptor::Euclidean => Ok(()),
            MetricDescriptor::InverseRadial { theta } => {
                if *theta > 0.0 && theta.is_finite() {
                    Ok(())
                } else {
                    domain("InverseRadial needs theta > 0")
                }
            }
            MetricDescriptor::AffineConformal { c, theta } => {
                if *c >= 0.0 && *theta >= 0.0 && c + theta > 0.0 && (c + theta).is_finite() {
                    Ok(())
                } else {
                    domain("AffineConformal needs c, theta >= 0 and c + theta > 0")
                }
            }
            MetricDescriptor::PotentialST { s, t, p, alpha } => {
                if !(*alpha > 1.0) {
                    return domain(format!("alpha must exceed 1, got {alpha}"));
                }
                if !(*p > 0.0) {
                    return domain("P must be positive");
                }
                if !(*s >= 0.0 && s.is_finite() && t > s) {
                    return domain(format!("need 0 <= S < T, got S={s}, T={t}"));
                }
                Ok(())
            }
            MetricDescriptor::PotentialUnion { union, p, alpha } => {
                IntervalUnion::new(union.intervals.clone())?;
                if !(*alpha > 1.0 && *p > 0.0) {
                    return domain("PotentialUnion needs alpha > 1 and P > 0");
                }
                Ok(())
            }
            MetricDescriptor::RescaledLattice { spec, rp } => {
                LatticeSpec::new(spec.alpha, spec.kseq.clone())?;
                RescaleParams::new(rp.a, rp.p)?;
                Ok(())
            }
        }
    }

    pub(crate) fn singular(&self) -> Singular {
        match self {
            MetricDescriptor::Euclidean => Singular::None,
            MetricDescriptor::AffineConformal { theta, .. } if *theta == 0.0 => Singular::None,
            MetricDescriptor::InverseRadial { .. } | MetricDescriptor::AffineConformal { .. } => Singular::Origin,
            _ => Singular::Axis,
        }
    }

    /// `ζ_R`-intervals of the axis on which `Φ = ∞` along a positive-length piece.
    pub(crate) fn axis_singular_intervals(&self) -> Vec<(f64, f64)> {
        match self {
            MetricDescriptor::PotentialST { s, t, p, alpha } => vec![(p * s.powf(*alpha), p * t.powf(*alpha))],
            MetricDescriptor::PotentialUnion { union, p, alpha } => {
                union.intervals.iter().map(|&(s, t)| (p * s.powf(*alpha), p * t.powf(*alpha))).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Constant `C₀` with `Φ ≥ C₀·min{1, 1/|ζ|}` everywhere (0 when none is known).
    pub fn c0(&self) -> f64 {
        match self {
            MetricDescriptor::Euclidean => 1.0,
            MetricDescriptor::InverseRadial { theta } => *theta,
            MetricDescriptor::AffineConformal { c, theta } => c + theta,
            MetricDescriptor::PotentialST { s, t, p, alpha } => potential::a_st(*s, *t, *p, *alpha).unwrap_or(0.0),
            MetricDescriptor::PotentialUnion { union, p, alpha } => union
                .intervals
                .iter()
                .map(|&(s, t)| potential::a_st(s, t, *p, *alpha).unwrap_or(0.0))
                .sum(),
            MetricDescriptor::RescaledLattice { spec, rp } => {
                let sum = potential::sum_a(spec, rp, 1e-9).unwrap_or(0.0);
                (sum - 2.0 * (rp.a / rp.p).powf(1.0 / (1.0 + spec.alpha))).max(0.0)
            }
        }
    }

    /// Global infimum of `Φ`.
    pub fn inf_phi(&self) -> f64 {
        match self {
            MetricDescriptor::Euclidean => 1.0,
            MetricDescriptor::AffineConformal { c, .. } => *c,
            _ => 0.0,
        }
    }

    /// `(C₁, κ)` with `Φ ≤ C₁(1 + u^κ)/|ζ_C|` on `B(u)`, when known.
    pub fn transverse_bound(&self) -> Option<(f64, f64)> {
        match self {
            MetricDescriptor::InverseRadial { theta } => Some((*theta, 0.0)),
            MetricDescriptor::PotentialST { p, alpha, .. } => {
                let a = *alpha;
                Some((p.powf(-1.0 / a) * a * 2f64.powf(1.0 / a) / (a - 1.0), 1.0 / a))
            }
            _ => None,
        }
    }
}

/// `Φ(ζ)`; `+∞` marker at the origin for radial kinds and on the poles otherwise.
pub fn conformal_factor(desc: &MetricDescriptor, z: Point3, tol: f64) -> Result<EvalResult> {
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    Ok(match desc {
        MetricDescriptor::Euclidean => EvalResult::exact(1.0),
        MetricDescriptor::InverseRadial { theta } => EvalResult::exact(theta / z.norm()),
        MetricDescriptor::AffineConformal { c, theta } => {
            if *theta == 0.0 {
                EvalResult::exact(*c)
            } else {
                EvalResult::exact(c + theta / z.norm())
            }
        }
        MetricDescriptor::PotentialST { s, t, p, alpha } => potential::phi_st(*s, *t, *p, *alpha, z, tol)?,
        MetricDescriptor::PotentialUnion { union, p, alpha } => {
            potential::phi_interval_union(union, *p, *alpha, z, tol)?
        }
        MetricDescriptor::RescaledLattice { spec, rp } => potential::phi_a(spec, rp, z, tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let e = conformal_factor(&MetricDescriptor::Euclidean, Point3::new(3.0, 1.0, 2.0), 1e-9).unwrap();
        assert_eq!(e.value, 1.0);
        let r = conformal_factor(&MetricDescriptor::InverseRadial { theta: 1.0 }, Point3::new(0.0, 2.0, 0.0), 1e-9)
            .unwrap();
        assert_eq!(r.value, 0.5);
        let o = conformal_factor(&MetricDescriptor::InverseRadial { theta: 1.0 }, Point3::ORIGIN, 1e-9).unwrap();
        assert!(o.is_infinite());
        let p = conformal_factor(&MetricDescriptor::d_st(0.0, f64::INFINITY, 2.0), Point3::new(-1.0, 0.0, 0.0), 1e-10)
            .unwrap();
        assert!((p.value - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        assert!(MetricDescriptor::AffineConformal { c: 0.0, theta: 0.0 }.validate().is_err());
        assert!(MetricDescriptor::d_st(1.0, 1.0, 2.0).validate().is_err());
        assert!(MetricDescriptor::d_st(0.0, 1.0, 0.5).validate().is_err());
    }
}
