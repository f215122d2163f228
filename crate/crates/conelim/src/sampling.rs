//! Deterministic samplers for the regions used by the bound checks and probes.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::geom::Point3;

/// FNV-1a, used to derive per-check seeds that do not depend on the std hasher.
fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Generator seeded by a tag (e.g. a bound id) and a user seed.
pub fn seeded_rng(tag: &str, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fnv1a(tag) ^ seed)
}

fn cylindrical(zr: f64, rho: f64, phi: f64) -> Point3 {
    Point3::new(zr, rho * phi.cos(), rho * phi.sin())
}

fn in_krd(p: Point3, r: f64, d: f64) -> bool {
    p.norm() <= r && p.dist_to_half_axis() >= d
}

/// `n` points of `K(R,D)`: about a tenth on the boundary pieces `|ζ_C| = D`
/// (with `ζ_R ≥ 0`) and `|ζ| = R`, the rest uniform in `(ζ_R, |ζ_C|, arg ζ_C)`
/// with rejection.
pub fn sample_krd(r: f64, d: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point3>> {
    if !(r > 0.0 && d > 0.0 && r.is_finite()) {
        return domain("K(R,D) sampling needs R, D > 0");
    }
    let mut out = Vec::with_capacity(n);
    let nb = if n >= 4 { (n / 10).max(2) } else { 0 };
    let zr_max = (r * r - d * d).max(0.0).sqrt();
    for k in 0..nb {
        let phi = rng.gen::<f64>() * TAU;
        let p = if k % 2 == 0 && zr_max > 0.0 {
            cylindrical(rng.gen::<f64>() * zr_max, d, phi)
        } else {
            // Uniform direction on the sphere |ζ| = R.
            let c: f64 = rng.gen_range(-1.0..=1.0);
            cylindrical(r * c, r * (1.0 - c * c).sqrt(), phi)
        };
        if in_krd(p, r, d * (1.0 - 1e-12)) {
            out.push(p);
        }
    }
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        if tries > 1000 * n.max(1) + 10_000 {
            return Err(Error::EmptySample(format!("no admissible points in K({r},{d})")));
        }
        let p = cylindrical(rng.gen_range(-r..=r), rng.gen::<f64>() * r, rng.gen::<f64>() * TAU);
        if in_krd(p, r, d) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Uniform point in the Euclidean ball `B(u)`.
pub fn point_in_ball(u: f64, rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let p = Point3::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if p.norm() <= 1.0 {
            return p * u;
        }
    }
}

pub fn sample_ball(u: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point3> {
    (0..n).map(|_| point_in_ball(u, rng)).collect()
}

/// `n` distinct pairs in `B(u)`; the first `n_straddle` sit on opposite sides
/// of the half-axis `l` (same side `ζ_R > 0`, opposite `ζ_C` directions).
pub fn sample_pairs(u: f64, n: usize, n_straddle: usize, rng: &mut ChaCha8Rng) -> Vec<(Point3, Point3)> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let pair = if out.len() < n_straddle {
            let zr1 = rng.gen::<f64>() * 0.7 * u;
            let zr2 = rng.gen::<f64>() * 0.7 * u;
            let phi = rng.gen::<f64>() * TAU;
            let r1 = rng.gen_range(0.05..0.7) * u;
            let r2 = rng.gen_range(0.05..0.7) * u;
            (cylindrical(zr1, r1, phi), cylindrical(zr2, r2, phi + std::f64::consts::PI))
        } else {
            (point_in_ball(u, rng), point_in_ball(u, rng))
        };
        if pair.0.dist(pair.1) > 1e-3 * u && pair.0.norm() <= u && pair.1.norm() <= u {
            out.push(pair);
        }
    }
    out
}
