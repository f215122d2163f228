//! Conformal metrics `Φ·h₀` on R³ built from harmonic potentials with poles
//! along the curve `x ↦ (x^α, 0, 0)`.
//!
//! The crate evaluates the potentials with certified error bounds, computes
//! distances (grid Dijkstra plus path refinement), checks the quantitative
//! estimates on samples, and classifies rescaling limits.

pub mod bounds;
pub mod error;
pub mod fit;
pub mod geom;
pub mod metric;
pub mod potential;
pub mod probes;
pub mod quad;
pub mod sampling;
pub mod tangentcone;
pub mod text;

pub use error::{Error, Result};
pub use geom::{ConstantsLedger, Point3, Polyline, Region};
pub use metric::{DistanceResult, MetricDescriptor, SolverConfig};
pub use potential::{EvalResult, IntervalUnion, KSeq, LatticeSpec, RescaleParams};
