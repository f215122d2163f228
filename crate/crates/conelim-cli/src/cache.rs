//! Append-only distance cache. One record per line:
//! `key value lower upper nvert (x y z t)* checksum`, floats stored as their
//! bit patterns in hex so a hit reproduces the computed result exactly. A
//! record whose checksum does not match is ignored and recomputed.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;

use conelim::metric::distance;
use conelim::{DistanceResult, MetricDescriptor, Point3, Polyline, SolverConfig};
use sha2::{Digest, Sha256};

use crate::Failure;

pub struct DistanceCache {
    path: PathBuf,
    records: HashMap<String, DistanceResult>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha(text: &str) -> String {
    hex(&Sha256::digest(text.as_bytes()))
}

fn bits(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn unbits(s: &str) -> Option<f64> {
    u64::from_str_radix(s, 16).ok().map(f64::from_bits)
}

/// Hash of every descriptor parameter, both endpoints and the full solver
/// configuration. Endpoints are keyed by their exact bit patterns.
pub fn fingerprint(desc: &MetricDescriptor, x: Point3, y: Point3, cfg: &SolverConfig) -> String {
    let pt = |p: Point3| p.to_array().map(bits).join(",");
    sha(&format!("{desc:?}|{}|{}|{cfg:?}", pt(x), pt(y)))
}

fn encode(key: &str, r: &DistanceResult) -> String {
    let mut body = format!(
        "{key} {} {} {} {}",
        bits(r.value),
        bits(r.lower_bound),
        bits(r.upper_bound),
        r.witness.vertices.len()
    );
    for (v, t) in r.witness.vertices.iter().zip(&r.witness.params) {
        for c in v.to_array().into_iter().chain([*t]) {
            body.push(' ');
            body.push_str(&bits(c));
        }
    }
    let sum = sha(&body);
    format!("{body} {sum}\n")
}

fn decode(line: &str) -> Option<(String, DistanceResult)> {
    let (body, sum) = line.rsplit_once(' ')?;
    if sha(body) != sum {
        return None;
    }
    let mut it = body.split(' ');
    let key = it.next()?.to_string();
    let value = unbits(it.next()?)?;
    let lower_bound = unbits(it.next()?)?;
    let upper_bound = unbits(it.next()?)?;
    let n: usize = it.next()?.parse().ok()?;
    let mut vertices = Vec::with_capacity(n);
    let mut params = Vec::with_capacity(n);
    for _ in 0..n {
        let mut c = [0.0; 4];
        for slot in &mut c {
            *slot = unbits(it.next()?)?;
        }
        vertices.push(Point3::new(c[0], c[1], c[2]));
        params.push(c[3]);
    }
    if it.next().is_some() {
        return None;
    }
    let witness = Polyline::new(vertices, params).ok()?;
    Some((key, DistanceResult { value, lower_bound, upper_bound, witness }))
}

impl DistanceCache {
    /// Loads whatever valid records the file holds; a missing file is an empty cache.
    pub fn open(path: PathBuf) -> Self {
        let records = std::fs::read_to_string(&path)
            .map(|text| text.lines().filter_map(decode).collect())
            .unwrap_or_default();
        DistanceCache { path, records }
    }

    pub fn distance(
        &mut self,
        desc: &MetricDescriptor,
        x: Point3,
        y: Point3,
        cfg: &SolverConfig,
    ) -> Result<DistanceResult, Failure> {
        let key = fingerprint(desc, x, y, cfg);
        if let Some(hit) = self.records.get(&key) {
            return Ok(hit.clone());
        }
        let res = distance(desc, x, y, cfg)?;
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Failure::Io(format!("cache {}: {e}", self.path.display())))?;
        f.write_all(encode(&key, &res).as_bytes())
            .map_err(|e| Failure::Io(format!("cache {}: {e}", self.path.display())))?;
        self.records.insert(key, res.clone());
        Ok(res)
    }
}
