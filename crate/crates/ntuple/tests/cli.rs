use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ntuple"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn report(args: &[&str], dir: &Path) -> (i32, Value) {
    let path = dir.join("report.json").display().to_string();
    let mut all = args.to_vec();
    all.extend(["--report", &path, "--no-timings"]);
    let out = run(&all);
    let text = std::fs::read_to_string(&path).unwrap();
    (code(&out), serde_json::from_str(&text).unwrap())
}

#[test]
fn star_presets() {
    let out = run(&["star", "--preset", "forward_cyclic", "--n", "3"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains(" 1  2  3\n 2  3  1\n 3  1  2\npermuted: true"));
    let out = run(&["star", "--preset", "skew_1", "--n", "3"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("permuted: false"));
    assert_eq!(code(&run(&["star", "--preset", "nonsense", "--n", "3"])), 64);
    assert_eq!(code(&run(&["star"])), 64);
}

#[test]
fn star_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "2\n1 0\n2 1\n");
    assert_eq!(code(&run(&["star", "--file", &bad])), 65);
    let good = write(dir.path(), "good.txt", "2\n2 1\n1 2\n");
    let (c, r) = report(&["star", "--file", &good], dir.path());
    assert_eq!(c, 0);
    assert_eq!(r["matrix"], serde_json::json!([[2, 1], [1, 2]]));
    assert_eq!(r["permuted"], true);
    assert_eq!(r["schema_version"], 1);
    let missing = dir.path().join("missing.txt").display().to_string();
    assert_eq!(code(&run(&["star", "--file", &missing])), 66);
}

#[test]
fn check_coupled_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (c, r) = report(&["check", &config("coupled.toml")], dir.path());
    assert_eq!(c, 0);
    for h in r["hypotheses"].as_array().unwrap() {
        assert_ne!(h["verdict"], "fails", "{h}");
    }
    assert!(r.get("timings").is_none());
    assert_eq!(r["config"]["star"]["preset"], "coupled2");
}

#[test]
fn check_reports_contraction_witness() {
    let dir = tempfile::tempdir().unwrap();
    let (c, r) = report(&["check", &config("contraction_fail.toml")], dir.path());
    assert_eq!(c, 2);
    let failed: Vec<&Value> = r["hypotheses"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|h| h["verdict"] == "fails")
        .collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["hypothesis"], "contraction_lin_pt_max_x");
    let w = &failed[0]["witness"];
    assert_eq!(w["kind"], "pair");
    assert!(w["lhs"].as_f64().unwrap() > w["rhs"].as_f64().unwrap());
}

#[test]
fn missing_and_malformed_configs() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml").display().to_string();
    assert_eq!(code(&run(&["check", &missing])), 66);
    let unknown_var = write(
        dir.path(),
        "bad.toml",
        "[space]\nkind = \"vector\"\n[star]\npreset = \"coupled2\"\n[mappings]\nf = \"x3 + 1\"\n",
    );
    let out = run(&["check", &unknown_var]);
    assert_eq!(code(&out), 65);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mappings.f"));
    let wrong_len = write(
        dir.path(),
        "len.toml",
        "[space]\nkind = \"vector\"\n[star]\npreset = \"coupled2\"\n[mappings]\nf = \"x1\"\n[initial]\nvalues = [1, 2, 3]\n",
    );
    assert_eq!(code(&run(&["solve", &wrong_len])), 65);
    let missing_table = write(
        dir.path(),
        "table.toml",
        "[space]\nkind = \"finite\"\nchain = 2\n[star]\npreset = \"coupled2\"\n[mappings]\nf_table = \"none.txt\"\n",
    );
    assert_eq!(code(&run(&["check", &missing_table])), 66);
}

#[test]
fn solve_coupled() {
    let dir = tempfile::tempdir().unwrap();
    let (c, r) = report(&["solve", &config("coupled.toml")], dir.path());
    assert_eq!(c, 0);
    let s = &r["solve"];
    assert_eq!(s["status"], "converged");
    for p in s["point"].as_array().unwrap() {
        assert!((p[0].as_f64().unwrap() - 1.5).abs() < 1e-8);
    }
    assert_eq!(r["verification"]["holds"], true);
    assert_eq!(r["uniqueness"]["clusters"].as_array().unwrap().len(), 1);
    let (c, r) = report(&["solve", &config("coupled.toml"), "--max-iter", "1"], dir.path());
    assert_eq!(c, 3);
    assert_eq!(r["solve"]["status"], "max_iter");
    assert_eq!(r["config"]["solver"]["max_iter"], 1);
}

#[test]
fn solve_needs_g_inverse_and_force_overrides_failures() {
    let dir = tempfile::tempdir().unwrap();
    let ginv = write(
        dir.path(),
        "ginv.toml",
        "[space]\nkind = \"vector\"\n[star]\npreset = \"coupled2\"\n[mappings]\nf = \"(x1 + x2)/6 + 1\"\ng = \"2 * x1\"\n[initial]\nvalues = [0, 0]\n",
    );
    assert_eq!(code(&run(&["solve", &ginv])), 70);
    let with_inverse = ginv.replace("ginv.toml", "ginv2.toml");
    std::fs::write(
        &with_inverse,
        std::fs::read_to_string(&ginv)
            .unwrap()
            .replace("[initial]", "g_inverse = \"x1 / 2\"\n[initial]"),
    )
    .unwrap();
    let (c, r) = report(&["solve", &with_inverse], dir.path());
    assert_eq!(c, 0, "{r}");
    let decreasing = write(
        dir.path(),
        "dec.toml",
        "[space]\nkind = \"vector\"\n[star]\npreset = \"coupled2\"\n[mappings]\nf = \"1 - x1/4\"\n[initial]\nvalues = [0, 0]\n",
    );
    assert_eq!(code(&run(&["solve", &decreasing])), 2);
    let (c, r) = report(&["solve", &decreasing, "--force"], dir.path());
    assert_eq!(c, 0);
    assert_eq!(r["forced"], true);
    assert!(r["solve"]["hypotheses"]
        .as_array()
        .unwrap()
        .iter()
        .any(|h| h["verdict"] == "fails"));
    assert_eq!(r["solve"]["status"], "converged");
}

#[test]
fn enumerate_chain_min() {
    let dir = tempfile::tempdir().unwrap();
    let (c, r) = report(&["enumerate", &config("chain_min.toml")], dir.path());
    assert_eq!(c, 0);
    assert_eq!(r["coincidence_points"], serde_json::json!([[0, 0], [1, 1]]));
    assert_eq!(r["oracle"]["cross_check"], "pass");
}

#[test]
fn enumerate_errors_and_empty_results() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["enumerate", &config("coupled.toml")])), 64);
    let big = write(
        dir.path(),
        "big.toml",
        "[space]\nkind = \"finite\"\nchain = 10\n[star]\npreset = \"forward_cyclic\"\nn = 7\n[mappings]\nf = \"x1\"\n",
    );
    assert_eq!(code(&run(&["enumerate", &big])), 69);
    let empty = write(
        dir.path(),
        "empty.toml",
        "[space]\nkind = \"finite\"\nchain = 2\n[star]\npreset = \"coupled2\"\n[mappings]\nf = \"1 - x1\"\n",
    );
    let (c, r) = report(&["enumerate", &empty], dir.path());
    assert_eq!(c, 0);
    assert_eq!(r["coincidence_points"], serde_json::json!([]));
    assert_eq!(r["oracle"]["cross_check"], "pass");
}

#[test]
fn reports_are_deterministic_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["check", "solve"] {
        for name in [
            "coupled.toml",
            "tripled.toml",
            "chain_min.toml",
            "contraction_fail.toml",
        ] {
            let mut texts = Vec::new();
            for jobs in ["1", "4", "4"] {
                let path = dir.path().join(format!("{cmd}-{name}-{}.json", texts.len()));
                let p = path.display().to_string();
                run(&[cmd, &config(name), "--no-timings", "--jobs", jobs, "--report", &p]);
                texts.push(std::fs::read(&path).unwrap());
            }
            assert_eq!(texts[0], texts[1], "{cmd} {name}");
            assert_eq!(texts[1], texts[2], "{cmd} {name}");
        }
    }
}

#[test]
fn seed_changes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = report(&["check", &config("contraction_fail.toml"), "--seed", "1"], dir.path());
    let (_, b) = report(&["check", &config("contraction_fail.toml"), "--seed", "2"], dir.path());
    assert_ne!(a["hypotheses"], b["hypotheses"]);
    assert_eq!(a["config"]["check"]["seed"], 1);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["coupled.toml", "chain_min.toml", "chain2.txt", "min2.txt"] {
        std::fs::copy(configs().join(f), dir.path().join(f)).unwrap();
    }
    for (cmd, name) in [("solve", "coupled.toml"), ("enumerate", "chain_min.toml")] {
        let original = dir.path().join(name).display().to_string();
        let (c1, r1) = report(&[cmd, &original, "--seed", "99"], dir.path());
        let echo = write(dir.path(), "echo.json", &serde_json::to_string(&r1["config"]).unwrap());
        let (c2, r2) = report(&[cmd, &echo], dir.path());
        assert_eq!(c1, c2);
        assert_eq!(r1["config"], r2["config"]);
        for key in ["solve", "uniqueness", "coincidence_points", "oracle"] {
            assert_eq!(r1.get(key), r2.get(key), "{cmd} {key}");
        }
    }
}
