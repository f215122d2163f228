use std::path::Path;
use std::process::Command;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn conelim(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_conelim")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn field(stdout: &str, key: &str) -> f64 {
    let line = stdout.lines().find(|l| l.starts_with(&format!("{key} "))).unwrap();
    line[key.len() + 1..].parse().unwrap()
}

fn dir_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn potential_examples() {
    let r = conelim(&["potential", "--st", "0", "inf", "--alpha", "2", "--P", "1", "--point", "-1", "0", "0"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (value, bound) = r.stdout.trim().split_once(" ± ").unwrap();
    assert_eq!(value, "1.57079632679");
    assert!(bound.parse::<f64>().unwrap() <= 1e-10);

    let r = conelim(&["potential", "--st", "0", "inf", "--point", "4", "0", "0"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "inf\n"));

    let r = conelim(&["potential", "--st", "0", "inf", "--alpha", "0.5", "--point", "-1", "0", "0"]);
    assert_eq!(r.code, 2);
}

#[test]
fn malformed_arguments_exit_1_with_usage() {
    for args in [
        vec!["potential", "--point", "1", "2"],
        vec!["potential", "--radial", "1", "--euclidean", "--point", "1", "2", "3"],
        vec!["dist", "--from", "0", "0", "0"],
        vec!["bounds", "--check", "nope"],
        vec!["frobnicate"],
        vec!["table1", "--tol", "-1"],
    ] {
        let r = conelim(&args);
        assert_eq!(r.code, 1, "{args:?}: {}", r.stderr);
        assert!(r.stderr.contains("Usage"), "{args:?}: {}", r.stderr);
    }
    assert_eq!(conelim(&["--help"]).code, 0);
}

#[test]
fn dist_examples() {
    let r = conelim(&["dist", "--euclidean", "--from", "0", "0", "0", "--to", "3", "4", "0"]);
    assert_eq!(r.code, 0);
    assert!((field(&r.stdout, "value") - 5.0).abs() < 0.05);

    let r = conelim(&["dist", "--radial", "1", "--from", "1", "0", "0", "--to", "-1", "0", "0"]);
    let v = field(&r.stdout, "value");
    assert!((v - 8f64.sqrt()).abs() < 0.02 * 8f64.sqrt(), "{v}");
    assert!(field(&r.stdout, "lower") <= v && v <= field(&r.stdout, "upper"));

    let r = conelim(&["dist", "--st", "0", "1", "--from", "0.5", "0.5", "0.5", "--to", "0.5", "0.5", "0.5"]);
    assert_eq!(field(&r.stdout, "value"), 0.0);

    let r = conelim(&["dist", "--st", "2", "1", "--from", "0", "0", "0", "--to", "1", "0", "0"]);
    assert_eq!(r.code, 2);
}

#[test]
fn dist_witness_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("w.csv");
    let r = conelim(&["dist", "--radial", "1", "--from", "1", "0", "0", "--to", "0", "1", "0", "--witness", dir_str(&path)]);
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,z"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 2 && rows.iter().all(|r| r.len() == 4));
    assert_eq!(&rows[0][1..], &[1.0, 0.0, 0.0]);
    assert_eq!(&rows.last().unwrap()[1..], &[0.0, 1.0, 0.0]);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(!text.contains('\r'));
}

#[test]
fn cache_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("d.cache");
    let args = ["dist", "--st", "0", "inf", "--from", "0.3", "0.4", "-0.1", "--to", "-0.5", "-0.2", "0.3"];
    let plain = conelim(&args);
    let with = |extra: &[&str]| conelim(&[&args[..], extra].concat());
    let first = with(&["--cache", dir_str(&cache)]);
    let stored = std::fs::read_to_string(&cache).unwrap();
    assert_eq!(stored.lines().count(), 1);
    let second = with(&["--cache", dir_str(&cache)]);
    assert_eq!(std::fs::read_to_string(&cache).unwrap(), stored, "a hit must not append");
    assert_eq!(plain.stdout, first.stdout);
    assert_eq!(plain.stdout, second.stdout);

    // A damaged record is skipped and recomputed.
    std::fs::write(&cache, stored.replacen('a', "b", 1)).unwrap();
    let third = with(&["--cache", dir_str(&cache)]);
    assert_eq!(third.code, 0);
    assert_eq!(third.stdout, plain.stdout);
}

#[test]
fn bounds_conv1_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let r = conelim(&["bounds", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.starts_with("conv1 R=4 D=0.5 samples=200"));
    let csv = std::fs::read_to_string(tmp.path().join("bounds.csv")).unwrap();
    assert!(csv.starts_with("bound_id,zr,zc1,zc2,lhs,rhs,margin\n"));
    assert_eq!(csv.lines().count(), 201);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("bounds.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "PASS");
}

#[test]
fn bounds_failure_exits_3() {
    // C_α calibrated at large S only underestimates the constant needed at small S.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[bounds]\nchecks = [\"a3forpsi\"]\ns = 4.0\ncalibration = [64.0]\n").unwrap();
    let r = conelim(&["bounds", "--config", dir_str(&cfg), "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 3, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("FAIL"));
}

#[test]
fn limits_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let r = conelim(&["limits", "--i-list", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().last(), Some("limit d_1^inf"));
    assert_eq!(std::fs::read_to_string(tmp.path().join("limits.csv")).unwrap(), "i,a_i,distortion,fiber_sup\n");

    let r = conelim(&["limits", "--rule", "pin_upper", "--i-list", "--out", dir_str(tmp.path())]);
    assert_eq!(r.stdout.lines().last(), Some("limit d_0^1"));

    // A horizon too short to extrapolate from.
    let r = conelim(&["limits", "--horizon", "2", "--i-list", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    let r = conelim(&["limits", "--rule", "pin_lower", "--value", "-1", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn gh_pass_and_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let r = conelim(&["gh", "--S", "16", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("passed true"));
    let r = conelim(&["gh", "--S", "4", "--epsilon", "0.005", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 3, "{}{}", r.stdout, r.stderr);
    let r = conelim(&["gh", "--mode", "radial", "--T", "inf", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn probe_kinds() {
    let tmp = tempfile::tempdir().unwrap();
    let r = conelim(&["probe", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(tmp.path().join("probe_axis.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let r = conelim(&["probe", "--kind", "pole", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("verdict no geodesic through the axis"));
    let r = conelim(&["probe", "--kind", "pole", "--p", "1", "0.5", "0", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 2);
    let r = conelim(&["probe", "--deltas", "0.01", "0.1", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 2);
}

#[test]
fn table1_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let r = conelim(&["table1", "--out", dir_str(tmp.path())]);
    assert_eq!(r.code, 0);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[1], "d_S^T,h0,1/|z| h0");
    assert_eq!(lines[7], "(1+theta/|z|) h0,1/|z| h0,h0");
    assert_eq!(std::fs::read_to_string(tmp.path().join("table1.csv")).unwrap(), r.stdout);
    assert_eq!(conelim(&["table1", "--alpha", "1"]).code, 2);
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[metric]\nkind = \"st\"\ns = 0.0\nt = inf\nalpha = 2.0\n").unwrap();
    let r = conelim(&["potential", "--config", dir_str(&cfg), "--point", "-1", "0", "0"]);
    assert!(r.stdout.starts_with("1.57079632679 ± "), "{}{}", r.stdout, r.stderr);
    // Flags win over the file.
    let r = conelim(&["potential", "--config", dir_str(&cfg), "--euclidean", "--point", "-1", "0", "0"]);
    assert_eq!(r.stdout, "1 ± 0\n");

    std::fs::write(&cfg, "[metric]\nkindd = \"st\"\n").unwrap();
    assert_eq!(conelim(&["potential", "--config", dir_str(&cfg), "--point", "1", "1", "1"]).code, 1);
    assert_eq!(conelim(&["table1", "--config", "/nonexistent/run.toml"]).code, 1);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cmds: [&[&str]; 3] = [&["bounds", "--check", "conv1", "c0c1"], &["table1"], &["probe"]];
    for cmd in cmds {
        let ra = conelim(&[cmd, &["--seed", "5", "--out", dir_str(a.path())]].concat());
        let rb = conelim(&[cmd, &["--seed", "5", "--out", dir_str(b.path())]].concat());
        assert_eq!((ra.code, &ra.stdout), (rb.code, &rb.stdout), "{cmd:?}");
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}
