use std::path::Path;
use std::process::{Command, Output};

use gcb::catalog::{self, EXAMPLES};
use gcb::{parse, serialize, CliError, Report, Verdict};

fn gcb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcb")).args(args).output().unwrap()
}

fn write_example(dir: &Path, name: &str) -> String {
    let path = dir.join(format!("{name}.gcb"));
    std::fs::write(&path, catalog::find(name).unwrap().source).unwrap();
    path.to_str().unwrap().to_string()
}

fn report(args: &[&str], dir: &Path) -> (Output, Report, serde_json::Value) {
    let path = dir.join("report.json");
    let mut all = args.to_vec();
    all.extend(["--report", path.to_str().unwrap()]);
    let out = gcb(&all);
    let text = std::fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    (out, serde_json::from_str(&text).unwrap(), value)
}

#[test]
fn every_shipped_file_round_trips() {
    for ex in EXAMPLES {
        let st = parse(ex.source).unwrap();
        let text = serialize(&st);
        assert_eq!(parse(&text).unwrap(), st, "{}", ex.name);
        assert_eq!(serialize(&parse(&text).unwrap()), text, "{}", ex.name);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gcb(&["check", &write_example(dir.path(), "contact_r3")]).status.code(), Some(0));
    assert_eq!(gcb(&["check", &write_example(dir.path(), "non_jacobi")]).status.code(), Some(1));
    assert_eq!(gcb(&["check", "examples/pair_groupoid_nonmult"]).status.code(), Some(1));
    assert_eq!(gcb(&["check", "/nonexistent/file.gcb"]).status.code(), Some(2));
    let bad = dir.path().join("bad.gcb");
    std::fs::write(&bad, "[manifold]\ncoords = x\n[theta]\nx = 1 +\n").unwrap();
    let out = gcb(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
    assert_eq!(gcb(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_example(dir.path(), "nonclosed_omega");
    let (out, rep, value) = report(&["check", &file], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(value["schema"], 1);
    assert_eq!(value["verdict"], "fail");
    assert!(value["conventions"].as_str().unwrap().contains("J"));
    let names: Vec<&str> = value["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(value["timing_ms"].is_object());
    assert_eq!(rep.get("almost.relations").unwrap().verdict, Verdict::Pass);
    let integrable = rep.get("integrable.nijenhuis").unwrap();
    assert_eq!(integrable.verdict, Verdict::Fail);
    assert!(integrable.nonzero > 0);
    assert!(!integrable.residuals.is_empty());
}

#[test]
fn error_verdict_carries_the_message() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rep, value) = report(&["check", "examples/pair_groupoid_nonmult"], dir.path());
    assert_eq!(value["verdict"], "error");
    let errored: Vec<_> = rep.checks.iter().filter(|c| c.verdict == Verdict::Error).collect();
    assert!(!errored.is_empty());
    assert!(errored.iter().all(|c| c.error.is_some()));
}

#[test]
fn unknown_example() {
    assert!(matches!(catalog::find("bogus"), Err(CliError::UnknownExample(_))));
    let out = gcb(&["examples", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gcb examples"));
}

#[test]
fn examples_print_the_shipped_file() {
    let listing = String::from_utf8(gcb(&["examples"]).stdout).unwrap();
    for ex in EXAMPLES {
        assert!(listing.contains(ex.name));
        assert_eq!(gcb(&["examples", ex.name]).stdout, ex.source.as_bytes());
    }
}

#[test]
fn undeclared_coordinate_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.gcb");
    std::fs::write(&path, "[manifold]\ncoords = x, y\n\n[theta]\nx = 1\ny = t\n").unwrap();
    let out = gcb(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('6') && err.contains('t'), "{err}");
}

#[test]
fn homogenize_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_example(dir.path(), "contact_r3");
    let out_path = dir.path().join("h.gcb");
    let out = gcb(&["homogenize", &file, "-o", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let (out, rep, _) = report(&["check", out_path.to_str().unwrap(), "--gc"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(rep.get("gc.homogeneity").is_some());
    assert!(rep.get("gc.integrable").is_some());

    let back = gcb(&["dehomogenize", out_path.to_str().unwrap()]);
    assert!(back.status.success());
    let st = parse(&String::from_utf8(back.stdout).unwrap()).unwrap();
    assert!(st.phi.is_some() && st.j.is_some() && st.omega.is_some());
}

#[test]
fn homogenize_nonintegrable_still_fails() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_example(dir.path(), "nonclosed_omega");
    let out_path = dir.path().join("h.gcb");
    assert!(gcb(&["homogenize", &file, "-o", out_path.to_str().unwrap()]).status.success());
    assert_eq!(gcb(&["check", out_path.to_str().unwrap(), "--gc"]).status.code(), Some(1));
}

#[test]
fn induce_im() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["pair_groupoid_r", "bundle_of_groups"] {
        let file = write_example(dir.path(), name);
        let out_path = dir.path().join(format!("{name}-im.gcb"));
        assert!(gcb(&["induce-im", &file, "-o", out_path.to_str().unwrap()]).status.success());
        let (out, rep, _) = report(&["check", out_path.to_str().unwrap(), "--im"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(rep.get("im.r2").unwrap().verdict, Verdict::Pass);
    }
    let file = write_example(dir.path(), "pair_groupoid_nonmult");
    assert_eq!(gcb(&["induce-im", &file]).status.code(), Some(2));
}

#[test]
fn full_lifts_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_example(dir.path(), "nonclosed_omega");
    let (_, short, _) = report(&["check", &file], dir.path());
    let (_, full, _) = report(&["check", &file, "--full"], dir.path());
    assert!(full.checks.iter().all(|c| !c.truncated));
    for (s, f) in short.checks.iter().zip(&full.checks) {
        assert_eq!(s.name, f.name);
        assert_eq!(s.nonzero, f.nonzero);
        assert!(s.residuals.len() <= f.residuals.len());
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for ex in EXAMPLES {
        let file = write_example(dir.path(), ex.name);
        let (_, a, _) = report(&["check", &file], dir.path());
        let (_, b, _) = report(&["check", &file], dir.path());
        let strip = |r: &Report| Report { timing_ms: Default::default(), file: String::new(), ..r.clone() };
        assert_eq!(strip(&a), strip(&b), "{}", ex.name);
        assert_eq!(a.verdict, catalog::manifest()[ex.name].verdict, "{}", ex.name);
    }
}
