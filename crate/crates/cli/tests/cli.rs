use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sgdefect"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(config: &Path, out: &Path, format: &str) -> Output {
    bin()
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--format", format, "--jobs", "2"])
        .output()
        .expect("binary runs")
}

#[test]
fn list_suites_names_all_eight() {
    let out = bin().arg("list-suites").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names.len(), 8);
    for n in ["lax-residual", "monodromy-conservation", "charges", "energy-identities", "appendix", "defect", "rmatrix", "involution"] {
        assert!(names.contains(&n), "{n} missing");
    }
}

#[test]
fn shipped_configs_pass() {
    for name in ["vacuum", "kink", "defect"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&configs().join(format!("{name}.json")), dir.path(), "json");
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        assert!(dir.path().join("lax-residual.json").exists());
        assert!(dir.path().join("timings.json").exists());
    }
}

#[test]
fn zero_tolerance_fails_with_exit_one() {
    let text = fs::read_to_string(configs().join("kink.json")).unwrap();
    let strict = text.replace(
        "\"numerics\": { \"half_width\": 40.0 }",
        "\"numerics\": { \"half_width\": 40.0, \"tolerances\": { \"lax_residual\": 0.0 } }",
    );
    assert_ne!(strict, text);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    fs::write(&cfg, strict).unwrap();
    let out = run(&cfg, &dir.path().join("out"), "csv");
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("lax-residual/"), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("out/lax-residual.csv")).unwrap();
    assert!(csv.starts_with("suite,case,inputs,lhs,rhs,gap,tolerance,pass,note"));
    assert!(csv.contains(",false,"));
}

#[test]
fn bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("kink.json")).unwrap();
    for (i, bad) in [
        text.replace("\"v\": -0.5", "\"v\": 1.5"),
        text.replace("\"suites\"", "\"tolerence\": 1, \"suites\""),
        text.replace("\"schema_version\": 1", "\"schema_version\": 7"),
        "not json".to_string(),
    ]
    .iter()
    .enumerate()
    {
        let cfg = dir.path().join(format!("bad{i}.json"));
        fs::write(&cfg, bad).unwrap();
        let out = run(&cfg, &dir.path().join("out"), "json");
        assert_eq!(out.status.code(), Some(2), "case {i}");
    }
    let out = run(&dir.path().join("missing.json"), &dir.path().join("out"), "json");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_stable() {
    let cfg = configs().join("defect.json");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for format in ["csv", "json"] {
        assert_eq!(run(&cfg, a.path(), format).status.code(), Some(0));
        assert_eq!(run(&cfg, b.path(), format).status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for n in names.iter().filter(|n| *n != "timings.json") {
        assert_eq!(fs::read(a.path().join(n)).unwrap(), fs::read(b.path().join(n)).unwrap(), "{n:?}");
    }
}

#[test]
fn defect_report_records_generating_candidate() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&configs().join("defect.json"), dir.path(), "json").status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("defect.json")).unwrap()).unwrap();
    assert_eq!(v["metadata"]["c_candidate"], "ratio form matches");
    assert_eq!(v["metadata"]["generating"]["rows"].as_array().unwrap().len(), 3);
}
