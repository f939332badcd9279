use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const QUARTIC: &str = "[potential]\nfamily = \"quartic\"\nbeta = 0.05\n";

fn fronts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fronts"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_artifacts_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "q.toml", QUARTIC);
    let out = dir.path().join("run");
    let o = fronts(&["solve", "-c", s(&cfg), "-o", s(&out), "--verify"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "profile.csv",
        "history.csv",
        "profile_physical.csv",
        "summary.json",
        "timings.json",
        "verify.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary = json(&std::fs::read(out.join("summary.json")).unwrap());
    assert_eq!(summary["outcome"], "front_converged");
    assert_eq!(summary["phases"]["m"], 1);
    assert_eq!(summary["monotone"], true);
    let verify = json(&std::fs::read(out.join("verify.json")).unwrap());
    assert_eq!(verify["passed"], true);
    let header = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert!(header.starts_with("iter,L,N,P,grad_norm,lambda\n"));
}

#[test]
fn summary_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "q.toml", QUARTIC);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(
        fronts(&["solve", "-c", s(&cfg), "-o", s(&a)]).status.code(),
        Some(0)
    );
    assert_eq!(
        fronts(&["solve", "-c", s(&cfg), "-o", s(&b)]).status.code(),
        Some(0)
    );
    for f in ["summary.json", "profile.csv", "history.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn verify_and_diagnose_stored_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "q.toml", QUARTIC);
    let run = dir.path().join("run");
    assert_eq!(
        fronts(&["solve", "-c", s(&cfg), "-o", s(&run)])
            .status
            .code(),
        Some(0)
    );
    let profile = run.join("profile.csv");

    let v = dir.path().join("v");
    let o = fronts(&[
        "verify",
        "-c",
        s(&cfg),
        "-p",
        s(&profile),
        "-o",
        s(&v),
        "--trajectory",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let traj = std::fs::read_to_string(v.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 21 * 400);

    let o = fronts(&["diagnose", "-c", s(&cfg), "-p", s(&profile)]);
    assert_eq!(o.status.code(), Some(0));
    let d = json(&o.stdout);
    assert_eq!(d["separation"]["m"], 1);
    assert_eq!(d["monotone"], true);
    assert!(d["plateau"].is_null());

    // a hand-corrupted interior fails verification with exit 1
    let text = std::fs::read_to_string(&profile).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    for line in lines.iter_mut().skip(1) {
        let mut cols: Vec<String> = line.split(',').map(String::from).collect();
        let phi: f64 = cols[0].parse().unwrap();
        if phi.abs() < 1.0 {
            let w: f64 = cols[1].parse().unwrap();
            cols[1] = (w + 0.3).to_string();
            *line = cols.join(",");
        }
    }
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let o = fronts(&[
        "verify",
        "-c",
        s(&cfg),
        "-p",
        s(&bad),
        "-o",
        s(&dir.path().join("vb")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o.stdout)["report"]["passed"], false);
}

#[test]
fn check_potential_reports_reason() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), "q.toml", QUARTIC);
    let o = fronts(&["check-potential", "-c", s(&ok)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o.stdout)["all_ok"], true);

    let gv = write_config(
        dir.path(),
        "gv.toml",
        "[potential]\nfamily = \"graph_violating\"\nbeta = 0.1\nc = -0.5\n",
    );
    let o = fronts(&["check-potential", "-c", s(&gv)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o.stdout)["reason"], "graph_condition");
}

#[test]
fn normalize_physical_states() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.toml",
        r#"
[potential]
family = "quartic"
beta = 0.05
[transform]
arg_scale = 0.5
arg_shift = -1.5
value_scale = 3.0
slope = 0.7
offset = 0.2
[states]
r_minus = 1.0
r_plus = 5.0
"#,
    );
    let o = fronts(&["normalize", "-c", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o.stdout);
    let vals: Vec<f64> = v["normalized_values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (got, want) in vals.iter().zip([-1.0, 1.0, 0.5, 0.5]) {
        assert!((got - want).abs() < 1e-12);
    }
    let fd = &v["front_data"];
    let sigma = fd["sigma"].as_f64().unwrap();
    assert!((sigma - 0.75f64.sqrt()).abs() < 1e-12);
    let vm = fd["v_minus"].as_f64().unwrap();
    let vp = fd["v_plus"].as_f64().unwrap();
    assert!((vm + vp).abs() < 1e-12, "centred velocities");
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = fronts(&["solve", "-c", s(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o.stderr)["error"], "io");

    let unknown = write_config(dir.path(), "u.toml", &format!("{QUARTIC}colour = 3\n"));
    let o = fronts(&["solve", "-c", s(&unknown)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o.stderr)["error"], "config");

    let misaligned = write_config(
        dir.path(),
        "m.toml",
        &format!("{QUARTIC}[grid]\ncells = 1601\n"),
    );
    assert_eq!(
        fronts(&["solve", "-c", s(&misaligned)]).status.code(),
        Some(2)
    );

    let kinetic = write_config(
        dir.path(),
        "k.toml",
        &format!("{QUARTIC}[states]\nr_minus = -1.0\nr_plus = 2.0\n"),
    );
    let o = fronts(&["normalize", "-c", s(&kinetic)]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o.stderr)["reason"], "kinetic");

    assert_eq!(fronts(&["solve"]).status.code(), Some(2));
}

#[test]
fn verify_rejects_non_front() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "gv.toml",
        "[potential]\nfamily = \"graph_violating\"\nbeta = 0.1\nc = -0.5\n",
    );
    let run = dir.path().join("run");
    let o = fronts(&["solve", "-c", s(&cfg), "-o", s(&run)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o.stdout)["outcome"], "plateau_diverging");
    let o = fronts(&["verify", "-c", s(&cfg), "-p", s(&run.join("profile.csv"))]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o.stderr)["error"], "lattice");
}

#[test]
fn sweep_runs_each_beta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        &format!("{QUARTIC}[grid]\nhalf_width = 10.0\ncells = 1600\n[sweep]\nbetas = [0.05, 0.2]\nworkers = 2\n"),
    );
    let out = dir.path().join("sweep");
    let o = fronts(&[
        "sweep",
        "-c",
        s(&cfg),
        "-o",
        s(&out),
        "--betas",
        "0.05,0.1,0.2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = json(&std::fs::read(out.join("sweep.json")).unwrap());
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["outcome"] == "front_converged"));
    assert!(out.join("run_002").join("summary.json").exists());
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}
