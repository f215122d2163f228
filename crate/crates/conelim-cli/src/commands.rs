use std::io::Write;
use std::path::{Path, PathBuf};

use conelim::bounds::{
    calibrate_a3, check_a3for_psi, check_a3for_psi2, check_c0c1, check_conv1, check_fiberdiam, check_key_cor,
    check_lower1, rescaled_to_constant, rescaled_to_radial, AssumptionWitness, BoundReport, C0C1Variant,
};
use conelim::metric::{conformal_factor, distance};
use conelim::probes::{axis_segment_length, eps_isometry_check, fit_axis_growth, pole_test_at_origin, NO_AXIS_GEODESIC};
use conelim::tangentcone::{
    classify_limit, limit_invariants, table1, table1_matches, verify_convergence, ConvergenceOptions,
};
use conelim::text::g12;
use conelim::{MetricDescriptor, Point3, SolverConfig};

use crate::cache::DistanceCache;
use crate::config::{limits_base_solver, LatticeSection, MetricSection, RunConfig, SolverSection};
use crate::output::{json_text, write_file, Csv, FlatJson};
use crate::{Cli, Cmd, Failure, LatticeArgs, MetricArgs, SolverArgs};

/// Resolved common settings.
struct Ctx {
    seed: u64,
    out: PathBuf,
    tol: Option<f64>,
    cfg: RunConfig,
}

impl Ctx {
    fn solver(&self, base: SolverConfig, args: &SolverArgs) -> Result<SolverConfig, Failure> {
        let sec = SolverSection {
            grid_resolution: args.grid_resolution.or(self.cfg.solver.grid_resolution),
            refinement_rounds: args.refinement_rounds.or(self.cfg.solver.refinement_rounds),
            ..self.cfg.solver
        };
        sec.apply(base, self.tol)
    }

    fn write(&self, name: &str, text: &str) -> Result<(), Failure> {
        write_file(&self.out.join(name), text)
    }
}

fn say(w: &mut impl Write, line: impl AsRef<str>) -> Result<(), Failure> {
    writeln!(w, "{}", line.as_ref()).map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn point(v: &[f64]) -> Point3 {
    Point3::new(v[0], v[1], v[2])
}

fn apply_lattice(args: &LatticeArgs, sec: &mut LatticeSection) {
    if let Some(k) = &args.kseq {
        sec.kseq = k.clone();
    }
    if let Some(k0) = args.k0 {
        sec.k0 = k0;
    }
    if let Some(b) = args.beta {
        sec.beta = b;
    }
    if let Some(ks) = &args.ks {
        sec.ks = ks.clone();
    }
    if let Some(a) = args.a {
        sec.a = a;
    }
}

fn apply_metric(args: &MetricArgs, sec: &mut MetricSection) -> Result<(), Failure> {
    let kinds = [
        args.euclidean,
        args.radial.is_some(),
        args.affine.is_some(),
        args.st.is_some(),
        args.union.is_some(),
        args.lattice,
    ];
    if kinds.iter().filter(|k| **k).count() > 1 {
        return Err(Failure::Malformed("give at most one metric kind".into()));
    }
    if args.euclidean {
        sec.kind = "euclidean".into();
    }
    if let Some(theta) = args.radial {
        sec.kind = "radial".into();
        sec.theta = theta;
    }
    if let Some(v) = &args.affine {
        sec.kind = "affine".into();
        (sec.c, sec.theta) = (v[0], v[1]);
    }
    if let Some(v) = &args.st {
        sec.kind = "st".into();
        (sec.s, sec.t) = (v[0], v[1]);
    }
    if let Some(v) = &args.union {
        sec.kind = "union".into();
        sec.intervals = v.clone();
    }
    if args.lattice {
        sec.kind = "lattice".into();
    }
    if let Some(alpha) = args.alpha {
        sec.alpha = alpha;
    }
    if let Some(p) = args.p {
        sec.p = p;
        sec.lattice.p = p;
    }
    apply_lattice(&args.lat, &mut sec.lattice);
    Ok(())
}

/// `(1/(θ²(α−1)))h₀`, written as `h₀` when the constant is 1.
fn constant_limit_metric(theta: f64, alpha: f64) -> MetricDescriptor {
    let c = 1.0 / (theta * theta * (alpha - 1.0));
    if c == 1.0 {
        MetricDescriptor::Euclidean
    } else {
        MetricDescriptor::AffineConformal { c, theta: 0.0 }
    }
}

pub fn run(cli: Cli, w: &mut impl Write) -> Result<(), Failure> {
    let cfg = RunConfig::load(cli.common.config.as_deref())?;
    let ctx = Ctx {
        seed: cli.common.seed.or(cfg.seed).unwrap_or(0),
        out: cli.common.out.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from(".")),
        tol: cli.common.tol.or(cfg.tol),
        cfg,
    };
    if let Some(t) = ctx.tol {
        if !(t > 0.0) {
            return Err(Failure::Malformed(format!("--tol must be positive, got {t}")));
        }
    }
    match cli.cmd {
        Cmd::Potential { metric, point: p } => cmd_potential(&ctx, &metric, point(&p), w),
        Cmd::Dist { metric, solver, from, to, witness, cache } => {
            cmd_dist(&ctx, &metric, &solver, (point(&from), point(&to)), witness.as_deref(), cache, w)
        }
        Cmd::Bounds { checks, r, d, samples, alpha, p, lat, solver } => {
            let mut sec = ctx.cfg.bounds.clone();
            if let Some(c) = checks {
                sec.checks = c;
            }
            sec.r = r.unwrap_or(sec.r);
            if let Some(d) = d {
                sec.d = d;
            }
            sec.samples = samples.unwrap_or(sec.samples);
            sec.alpha = alpha.unwrap_or(sec.alpha);
            sec.lattice.p = p.unwrap_or(sec.lattice.p);
            apply_lattice(&lat, &mut sec.lattice);
            cmd_bounds(&ctx, &sec, &solver, w)
        }
        Cmd::Limits { rule, value, horizon, i_list, r, alpha, lat, solver } => {
            let mut sec = ctx.cfg.limits.clone();
            if let Some(rule) = rule {
                sec.rule = rule;
            }
            sec.value = value.unwrap_or(sec.value);
            sec.horizon = horizon.unwrap_or(sec.horizon);
            if let Some(i) = i_list {
                sec.i_list = i;
            }
            sec.r = r.unwrap_or(sec.r);
            sec.alpha = alpha.unwrap_or(sec.alpha);
            apply_lattice(&lat, &mut sec.lattice);
            cmd_limits(&ctx, &sec, &solver, w)
        }
        Cmd::Gh { mode, s, t, theta, alpha, r, epsilon, samples, solver } => {
            let mut sec = ctx.cfg.gh.clone();
            if let Some(m) = mode {
                sec.mode = m;
            }
            sec.s = s.unwrap_or(sec.s);
            if let Some(t) = t {
                sec.t = t;
                sec.radial_t = t;
            }
            sec.theta = theta.unwrap_or(sec.theta);
            sec.alpha = alpha.unwrap_or(sec.alpha);
            sec.r = r.unwrap_or(sec.r);
            sec.epsilon = epsilon.unwrap_or(sec.epsilon);
            sec.samples = samples.unwrap_or(sec.samples);
            cmd_gh(&ctx, &sec, &solver, w)
        }
        Cmd::Probe { kind, alpha, t0, t1, deltas, p, solver } => {
            let mut sec = ctx.cfg.probe.clone();
            if let Some(k) = kind {
                sec.kind = k;
            }
            sec.alpha = alpha.unwrap_or(sec.alpha);
            sec.t0 = t0.unwrap_or(sec.t0);
            sec.t1 = t1.unwrap_or(sec.t1);
            if let Some(d) = deltas {
                sec.deltas = d;
            }
            if let Some(p) = p {
                sec.p = [p[0], p[1], p[2]];
            }
            cmd_probe(&ctx, &sec, &solver, w)
        }
        Cmd::Table1 { alpha } => cmd_table1(&ctx, alpha.unwrap_or(2.0), w),
    }
}

fn cmd_potential(ctx: &Ctx, args: &MetricArgs, z: Point3, w: &mut impl Write) -> Result<(), Failure> {
    let mut sec = ctx.cfg.metric.clone();
    apply_metric(args, &mut sec)?;
    let desc = sec.descriptor()?;
    let r = conformal_factor(&desc, z, ctx.tol.unwrap_or(1e-10))?;
    if r.is_infinite() {
        say(w, "inf")
    } else {
        say(w, format!("{} ± {}", g12(r.value), g12(r.error_bound)))
    }
}

fn cmd_dist(
    ctx: &Ctx,
    args: &MetricArgs,
    solver: &SolverArgs,
    (x, y): (Point3, Point3),
    witness: Option<&Path>,
    cache: Option<PathBuf>,
    w: &mut impl Write,
) -> Result<(), Failure> {
    let mut sec = ctx.cfg.metric.clone();
    apply_metric(args, &mut sec)?;
    let desc = sec.descriptor()?;
    let cfg = ctx.solver(SolverConfig::default(), solver)?;
    let res = match cache.or(ctx.cfg.cache.path.clone()) {
        Some(path) => DistanceCache::open(path).distance(&desc, x, y, &cfg)?,
        None => distance(&desc, x, y, &cfg)?,
    };
    say(w, format!("value {}", g12(res.value)))?;
    say(w, format!("lower {}", g12(res.lower_bound)))?;
    say(w, format!("upper {}", g12(res.upper_bound)))?;
    if let Some(path) = witness {
        let mut csv = Csv::new(&["t", "x", "y", "z"]);
        for (v, t) in res.witness.vertices.iter().zip(&res.witness.params) {
            csv.row([*t, v.zr, v.zc[0], v.zc[1]].map(g12));
        }
        write_file(path, &csv.into_string())?;
    }
    Ok(())
}

fn cmd_bounds(
    ctx: &Ctx,
    sec: &crate::config::BoundsSection,
    solver: &SolverArgs,
    w: &mut impl Write,
) -> Result<(), Failure> {
    const ALL: [&str; 7] = ["conv1", "lower1", "a3forpsi", "a3forpsi2", "c0c1", "c0c1prime", "fiberdiam"];
    let mut checks: Vec<String> = Vec::new();
    for c in &sec.checks {
        if c == "all" {
            checks.extend(ALL.iter().map(|s| s.to_string()));
        } else if ALL.contains(&c.as_str()) || c == "keycor" {
            checks.push(c.clone());
        } else {
            return Err(Failure::Malformed(format!("unknown check '{c}'")));
        }
    }
    let (alpha, theta, seed, n) = (sec.alpha, sec.theta, ctx.seed, sec.samples);
    let spec = sec.lattice.spec(alpha)?;
    let rp = sec.lattice.rescale()?;
    let mut reports: Vec<(String, BoundReport)> = Vec::new();
    for check in &checks {
        match check.as_str() {
            "conv1" => {
                for &d in &sec.d {
                    reports.push((format!("R={} D={}", g12(sec.r), g12(d)), check_conv1(&spec, &rp, sec.r, d, n, seed)?));
                }
            }
            "lower1" => {
                for &d in &sec.d {
                    for rep in check_lower1(&spec, &rp, sec.r, d, n, seed)? {
                        reports.push((format!("R={} D={}", g12(sec.r), g12(d)), rep));
                    }
                }
            }
            "a3forpsi" => {
                let c = calibrate_a3(alpha, theta, sec.ball_r, &sec.calibration)?;
                let rep = check_a3for_psi(sec.s, sec.t, theta, alpha, sec.ball_r, c, n, seed)?;
                reports.push((format!("S={} T={} C={}", g12(sec.s), g12(sec.t), g12(c)), rep));
            }
            "a3forpsi2" => {
                for &d in &sec.d {
                    let rep = check_a3for_psi2(0.0, sec.radial_t, theta, alpha, sec.ball_r, d, n, seed)?;
                    reports.push((format!("T={} D={}", g12(sec.radial_t), g12(d)), rep));
                }
            }
            "c0c1" => {
                let rep = check_c0c1(0.0, sec.plain_t, theta, alpha, C0C1Variant::Plain, n, seed)?;
                reports.push((format!("S=0 T={}", g12(sec.plain_t)), rep));
            }
            "c0c1prime" => {
                let rep = check_c0c1(sec.s, sec.t, theta, alpha, C0C1Variant::Prime, n, seed)?;
                reports.push((format!("S={} T={}", g12(sec.s), g12(sec.t)), rep));
            }
            "fiberdiam" => {
                let rep = check_fiberdiam(&spec, &rp, sec.ball_r, sec.fiber_cells)?;
                reports.push((format!("r={}", g12(sec.ball_r)), rep));
            }
            _ => {
                let cfg = ctx.solver(SolverConfig::default(), solver)?;
                let s = sec.keycor_s;
                let c = calibrate_a3(alpha, theta, sec.ball_r, &sec.calibration)?;
                let ledger = AssumptionWitness::constant_limit(s, f64::INFINITY, theta, alpha, 1.0, c)?.ledger()?;
                let big_r = ledger.rho(sec.keycor_u + 2.0) + 1.0;
                let wit = AssumptionWitness::constant_limit(s, f64::INFINITY, theta, alpha, big_r, c)?;
                let a = rescaled_to_constant(s, f64::INFINITY, theta, alpha)?;
                let b = constant_limit_metric(theta, alpha);
                let rep = check_key_cor(&a, &b, &wit, 1.0, sec.keycor_u, sec.keycor_pairs, seed, &cfg)?;
                reports.push((format!("S={} u={}", g12(s), g12(sec.keycor_u)), rep));
            }
        }
    }

    let mut csv = Csv::new(&["bound_id", "zr", "zc1", "zc2", "lhs", "rhs", "margin"]);
    let mut summary = Vec::new();
    let mut failed = Vec::new();
    for (setting, rep) in &reports {
        for row in &rep.rows {
            let p = row.point;
            let nums = [p.zr, p.zc[0], p.zc[1], row.lhs, row.rhs, row.margin].map(g12);
            csv.row(std::iter::once(rep.bound_id.clone()).chain(nums));
        }
        let status = if rep.vacuous {
            "VACUOUS"
        } else if rep.passed() {
            "PASS"
        } else {
            failed.push(format!("{} ({setting})", rep.bound_id));
            "FAIL"
        };
        say(
            w,
            format!(
                "{} {setting} samples={} worst_margin={} {status}",
                rep.bound_id,
                rep.samples,
                g12(rep.worst_margin)
            ),
        )?;
        summary.push(
            FlatJson::new()
                .str("bound_id", &rep.bound_id)
                .str("setting", setting)
                .int("samples", rep.samples as u64)
                .num("worst_margin", rep.worst_margin)
                .num("worst_zr", rep.worst_point.zr)
                .num("worst_zc1", rep.worst_point.zc[0])
                .num("worst_zc2", rep.worst_point.zc[1])
                .bool("vacuous", rep.vacuous)
                .str("status", status)
                .str("notes", &rep.notes),
        );
    }
    ctx.write("bounds.csv", &csv.into_string())?;
    ctx.write("bounds.json", &json_text(&summary))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("negative margin in {}", failed.join(", "))))
    }
}

fn cmd_limits(
    ctx: &Ctx,
    sec: &crate::config::LimitsSection,
    solver: &SolverArgs,
    w: &mut impl Write,
) -> Result<(), Failure> {
    let spec = sec.lattice.spec(sec.alpha)?;
    let rule = sec.rule()?;
    let inv = limit_invariants(&spec, &rule, sec.horizon, &sec.thresholds())?;
    let lim = classify_limit(&inv, &spec)?;
    let l3 = inv.l3.map(|v| v.label()).unwrap_or_else(|| "-".into());

    let mut csv = Csv::new(&["i", "a_i", "distortion", "fiber_sup"]);
    if !sec.i_list.is_empty() {
        let cfg = ctx.solver(limits_base_solver(), solver)?;
        let opts = ConvergenceOptions { npairs: sec.npairs, nstraddle: sec.nstraddle, cells: sec.cells, seed: ctx.seed };
        let recs = verify_convergence(&spec, &rule, &lim, sec.r, &sec.i_list, &cfg, &opts)?;
        say(w, "i,a_i,distortion,fiber_sup")?;
        for rec in &recs {
            let row = [rec.i.to_string(), g12(rec.a), g12(rec.distortion), g12(rec.fiber_sup)];
            say(w, row.join(","))?;
            csv.row(row);
        }
    }
    ctx.write("limits.csv", &csv.into_string())?;
    let summary = FlatJson::new()
        .str("rule", &sec.rule)
        .num("value", sec.value)
        .int("horizon", sec.horizon as u64)
        .str("l1", inv.l1.label())
        .str("l2", inv.l2.label())
        .str("l3", &l3)
        .str("limit", lim.name());
    ctx.write("limits.json", &json_text(&[summary]))?;
    say(w, format!("L1={} L2={} L3={l3}", inv.l1.label(), inv.l2.label()))?;
    say(w, format!("limit {}", lim.name()))
}

fn cmd_gh(ctx: &Ctx, sec: &crate::config::GhSection, solver: &SolverArgs, w: &mut impl Write) -> Result<(), Failure> {
    let (a, b) = match sec.mode.as_str() {
        "constant" => (rescaled_to_constant(sec.s, sec.t, sec.theta, sec.alpha)?, constant_limit_metric(sec.theta, sec.alpha)),
        "radial" => (
            rescaled_to_radial(0.0, sec.radial_t, sec.theta, sec.alpha)?,
            MetricDescriptor::InverseRadial { theta: 1.0 / sec.theta },
        ),
        other => return Err(Failure::Malformed(format!("unknown gh mode '{other}'"))),
    };
    let cfg = ctx.solver(SolverConfig::default(), solver)?;
    let res = eps_isometry_check(&a, &b, sec.r, sec.epsilon, sec.samples, ctx.seed, &cfg)?;
    let summary = FlatJson::new()
        .str("mode", &sec.mode)
        .num("r", res.r)
        .num("epsilon", res.epsilon)
        .num("distortion", res.distortion_observed)
        .num("surjectivity_defect", res.surjectivity_defect)
        .int("pairs", res.pairs as u64)
        .int("net_points", res.net_points as u64)
        .bool("passed", res.passed);
    ctx.write("gh.json", &json_text(&[summary]))?;
    say(w, format!("distortion {}", g12(res.distortion_observed)))?;
    say(w, format!("surjectivity_defect {}", g12(res.surjectivity_defect)))?;
    say(w, format!("passed {}", res.passed))?;
    if res.passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!("not an (r, epsilon)-isometry at epsilon = {}", g12(sec.epsilon))))
    }
}

fn cmd_probe(
    ctx: &Ctx,
    sec: &crate::config::ProbeSection,
    solver: &SolverArgs,
    w: &mut impl Write,
) -> Result<(), Failure> {
    match sec.kind.as_str() {
        "axis" => {
            let rows = axis_segment_length(sec.alpha, sec.t0, sec.t1, &sec.deltas, ctx.tol.unwrap_or(1e-9))?;
            let mut csv = Csv::new(&["delta", "length"]);
            for &(d, l) in &rows {
                csv.row([g12(d), g12(l)]);
                say(w, format!("delta {} length {}", g12(d), g12(l)))?;
            }
            ctx.write("probe_axis.csv", &csv.into_string())?;
            let increasing = rows.windows(2).all(|p| p[1].1 > p[0].1);
            let fit = fit_axis_growth(&rows);
            let (slope, intercept, r2) = fit.map_or((f64::NAN, f64::NAN, f64::NAN), |f| (f.slope, f.intercept, f.r_squared));
            let summary = FlatJson::new()
                .num("alpha", sec.alpha)
                .num("t0", sec.t0)
                .num("t1", sec.t1)
                .num("intercept", intercept)
                .num("slope", slope)
                .num("r_squared", r2)
                .bool("increasing", increasing);
            ctx.write("probe_axis.json", &json_text(&[summary]))?;
            say(w, format!("fit slope {} r_squared {}", g12(slope), g12(r2)))?;
            if increasing && slope > 0.0 {
                Ok(())
            } else {
                Err(Failure::Verification("axis lengths do not grow as delta shrinks".into()))
            }
        }
        "pole" => {
            let desc = MetricDescriptor::d_st(0.0, f64::INFINITY, sec.alpha);
            let cfg = ctx.solver(SolverConfig::default(), solver)?;
            let p = Point3::from_array(sec.p);
            let res = pole_test_at_origin(&desc, p, &sec.deltas, &cfg)?;
            let mut csv = Csv::new(&["D", "straight_length"]);
            for &(d, l) in &res.straight_lengths {
                csv.row([g12(d), g12(l)]);
                say(w, format!("D {} straight {}", g12(d), g12(l)))?;
            }
            ctx.write("probe_pole.csv", &csv.into_string())?;
            let summary = FlatJson::new()
                .num("alpha", sec.alpha)
                .num("detour_distance", res.detour_distance)
                .num("excursion_length", res.excursion_length.unwrap_or(f64::NAN))
                .num("projected_length", res.projected_length.unwrap_or(f64::NAN))
                .str("verdict", &res.verdict);
            ctx.write("probe_pole.json", &json_text(&[summary]))?;
            say(w, format!("detour {}", g12(res.detour_distance)))?;
            say(w, format!("verdict {}", res.verdict))?;
            if res.verdict == NO_AXIS_GEODESIC {
                Ok(())
            } else {
                Err(Failure::Verification(format!("pole test {}", res.verdict)))
            }
        }
        other => Err(Failure::Malformed(format!("unknown probe kind '{other}'"))),
    }
}

fn cmd_table1(ctx: &Ctx, alpha: f64, w: &mut impl Write) -> Result<(), Failure> {
    let rows = table1(alpha)?;
    let mut csv = Csv::new(&["metric", "at_zero", "at_infinity"]);
    say(w, "metric,at_zero,at_infinity")?;
    for r in &rows {
        let row = [r.metric.label(), r.at_zero.label(), r.at_infinity.label()].map(String::from);
        say(w, row.join(","))?;
        csv.row(row);
    }
    ctx.write("table1.csv", &csv.into_string())?;
    if table1_matches(&rows) {
        Ok(())
    } else {
        Err(Failure::Verification("table differs from the reference".into()))
    }
}
