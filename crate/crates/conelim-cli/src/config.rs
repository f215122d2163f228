//! Run configuration read from a TOML file. Every field has a default, and
//! command-line flags override file values.

use std::path::{Path, PathBuf};

use conelim::potential::{KSeq, LatticeSpec, RescaleParams};
use conelim::tangentcone::{LimitThresholds, SequenceRule};
use conelim::{IntervalUnion, MetricDescriptor, SolverConfig};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Sampling seed, default 0.
    pub seed: Option<u64>,
    /// Pointwise (potential) or quadrature (solver) tolerance.
    pub tol: Option<f64>,
    /// Output directory, default `.`.
    pub out: Option<PathBuf>,
    pub metric: MetricSection,
    pub solver: SolverSection,
    pub cache: CacheSection,
    pub bounds: BoundsSection,
    pub limits: LimitsSection,
    pub gh: GhSection,
    pub probe: ProbeSection,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Malformed(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Malformed(format!("bad config {}: {e}", path.display())))
    }
}

/// Descriptor used by `potential` and `dist`.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    /// One of `euclidean`, `radial`, `affine`, `st`, `union`, `lattice`.
    pub kind: String,
    pub s: f64,
    pub t: f64,
    pub p: f64,
    pub alpha: f64,
    pub theta: f64,
    pub c: f64,
    /// Flattened endpoints `s0, t0, s1, t1, ...` for `union`.
    pub intervals: Vec<f64>,
    pub lattice: LatticeSection,
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection {
            kind: "euclidean".into(),
            s: 0.0,
            t: f64::INFINITY,
            p: 1.0,
            alpha: 2.0,
            theta: 1.0,
            c: 1.0,
            intervals: Vec::new(),
            lattice: LatticeSection::default(),
        }
    }
}

impl MetricSection {
    pub fn descriptor(&self) -> Result<MetricDescriptor, Failure> {
        let desc = match self.kind.as_str() {
            "euclidean" => MetricDescriptor::Euclidean,
            "radial" => MetricDescriptor::InverseRadial { theta: self.theta },
            "affine" => MetricDescriptor::AffineConformal { c: self.c, theta: self.theta },
            "st" => MetricDescriptor::PotentialST { s: self.s, t: self.t, p: self.p, alpha: self.alpha },
            "union" => {
                if self.intervals.len() % 2 != 0 || self.intervals.is_empty() {
                    return Err(Failure::Malformed("union needs an even, nonempty list of endpoints".into()));
                }
                let iv = self.intervals.chunks(2).map(|c| (c[0], c[1])).collect();
                MetricDescriptor::PotentialUnion { union: IntervalUnion::new(iv)?, p: self.p, alpha: self.alpha }
            }
            "lattice" => {
                let spec = self.lattice.spec(self.alpha)?;
                MetricDescriptor::RescaledLattice { spec, rp: self.lattice.rescale()? }
            }
            other => return Err(Failure::Malformed(format!("unknown metric kind '{other}'"))),
        };
        desc.validate()?;
        Ok(desc)
    }
}

/// A `K` rule together with the rescaling `a`, `P`.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    /// `geometric`, `supergeometric` or `explicit`.
    pub kseq: String,
    pub k0: f64,
    pub beta: f64,
    pub ks: Vec<f64>,
    pub a: f64,
    pub p: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection { kseq: "geometric".into(), k0: 1.0, beta: 10.0, ks: Vec::new(), a: 1e-4, p: 1.0 }
    }
}

impl LatticeSection {
    pub fn spec(&self, alpha: f64) -> Result<LatticeSpec, Failure> {
        let kseq = match self.kseq.as_str() {
            "geometric" => KSeq::Geometric { k0: self.k0, beta: self.beta },
            "supergeometric" => KSeq::SuperGeometric { k0: self.k0, beta: self.beta },
            "explicit" => KSeq::Explicit(self.ks.clone()),
            other => return Err(Failure::Malformed(format!("unknown kseq '{other}'"))),
        };
        Ok(LatticeSpec::new(alpha, kseq)?)
    }

    pub fn rescale(&self) -> Result<RescaleParams, Failure> {
        Ok(RescaleParams::new(self.a, self.p)?)
    }
}

/// Overrides on top of each command's base solver configuration.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub grid_resolution: Option<f64>,
    pub refinement_rounds: Option<usize>,
    pub quadrature_tol: Option<f64>,
    pub domain_padding: Option<f64>,
}

impl SolverSection {
    pub fn apply(&self, base: SolverConfig, tol: Option<f64>) -> Result<SolverConfig, Failure> {
        let cfg = SolverConfig {
            grid_resolution: self.grid_resolution.unwrap_or(base.grid_resolution),
            refinement_rounds: self.refinement_rounds.unwrap_or(base.refinement_rounds),
            quadrature_tol: tol.or(self.quadrature_tol).unwrap_or(base.quadrature_tol),
            domain_padding: self.domain_padding.unwrap_or(base.domain_padding),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Distance cache; off unless a path is given.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    /// Any of `conv1`, `lower1`, `a3forpsi`, `a3forpsi2`, `c0c1`, `c0c1prime`,
    /// `fiberdiam`, `keycor`, or `all` (everything but `keycor`).
    pub checks: Vec<String>,
    pub alpha: f64,
    pub lattice: LatticeSection,
    /// Outer radius of `K(R, D)`.
    pub r: f64,
    pub d: Vec<f64>,
    pub samples: usize,
    /// Radius for the dilation and fiber checks.
    pub ball_r: f64,
    pub s: f64,
    pub t: f64,
    pub theta: f64,
    pub calibration: Vec<f64>,
    pub radial_t: f64,
    pub plain_t: f64,
    pub fiber_cells: usize,
    pub keycor_s: f64,
    pub keycor_u: f64,
    pub keycor_pairs: usize,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection {
            checks: vec!["conv1".into()],
            alpha: 2.0,
            lattice: LatticeSection::default(),
            r: 4.0,
            d: vec![0.5],
            samples: 200,
            ball_r: 2.0,
            s: 8.0,
            t: f64::INFINITY,
            theta: 1.0,
            calibration: vec![4.0, 8.0, 16.0, 32.0],
            radial_t: 0.1,
            plain_t: 1.0,
            fiber_cells: 12,
            keycor_s: 1e20,
            keycor_u: 1.0,
            keycor_pairs: 20,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsSection {
    /// `pin_lower`, `pin_upper`, `theta` or `explicit`.
    pub rule: String,
    /// `S`, `T` or `θ` of the rule.
    pub value: f64,
    /// Scales and block indices for `explicit`.
    pub a: Vec<f64>,
    pub n: Vec<usize>,
    pub horizon: usize,
    pub alpha: f64,
    pub lattice: LatticeSection,
    pub zero: f64,
    pub infinity: f64,
    pub agree: f64,
    /// Terms checked for convergence; empty skips the check.
    pub i_list: Vec<usize>,
    pub r: f64,
    pub npairs: usize,
    pub nstraddle: usize,
    pub cells: usize,
}

impl Default for LimitsSection {
    fn default() -> Self {
        let th = LimitThresholds::default();
        LimitsSection {
            rule: "pin_lower".into(),
            value: 1.0,
            a: Vec::new(),
            n: Vec::new(),
            horizon: 10,
            alpha: 2.0,
            lattice: LatticeSection { kseq: "supergeometric".into(), beta: 2.0, ..LatticeSection::default() },
            zero: th.zero,
            infinity: th.infinity,
            agree: th.agree,
            i_list: vec![1, 2],
            r: 2.0,
            npairs: 6,
            nstraddle: 2,
            cells: 8,
        }
    }
}

impl LimitsSection {
    pub fn rule(&self) -> Result<SequenceRule, Failure> {
        let rule = match self.rule.as_str() {
            "pin_lower" => SequenceRule::PinLower(self.value),
            "pin_upper" => SequenceRule::PinUpper(self.value),
            "theta" => SequenceRule::Theta(self.value),
            "explicit" => SequenceRule::ExplicitList { a: self.a.clone(), n: self.n.clone() },
            other => return Err(Failure::Malformed(format!("unknown rule '{other}'"))),
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn thresholds(&self) -> LimitThresholds {
        LimitThresholds { zero: self.zero, infinity: self.infinity, agree: self.agree }
    }
}

/// Solver settings used by `limits` before `[solver]` overrides.
pub fn limits_base_solver() -> SolverConfig {
    SolverConfig { refinement_rounds: 4, grid_resolution: 1.0 / 8.0, ..SolverConfig::default() }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GhSection {
    /// `constant` (dilated `d_S^T` against its constant limit) or `radial`
    /// (dilated `d_0^T` against `(1/(θ|ζ|))h₀`).
    pub mode: String,
    pub s: f64,
    pub t: f64,
    /// `T` of the radial mode.
    pub radial_t: f64,
    pub theta: f64,
    pub alpha: f64,
    pub r: f64,
    pub epsilon: f64,
    pub samples: usize,
}

impl Default for GhSection {
    fn default() -> Self {
        GhSection {
            mode: "constant".into(),
            s: 16.0,
            t: f64::INFINITY,
            radial_t: 0.1,
            theta: 1.0,
            alpha: 2.0,
            r: 1.0,
            epsilon: 0.1,
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    /// `axis` or `pole`.
    pub kind: String,
    pub alpha: f64,
    pub t0: f64,
    pub t1: f64,
    pub deltas: Vec<f64>,
    pub p: [f64; 3],
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            kind: "axis".into(),
            alpha: 2.0,
            t0: 0.4,
            t1: 0.6,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            p: [1.0, 0.0, 0.0],
        }
    }
}
