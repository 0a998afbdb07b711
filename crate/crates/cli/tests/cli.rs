use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios")
}

fn agora(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agora")).args(args).env_remove("AGORA_SEED").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Copies the shipped scenario and catalog into `dir`, applying `edit` to
/// the catalog text.
fn scenario_copy(dir: &Path, edit: impl Fn(&str) -> String) -> PathBuf {
    let src = scenarios();
    fs::write(dir.join("catalog.toml"), edit(&fs::read_to_string(src.join("catalog.toml")).unwrap())).unwrap();
    let path = dir.join("default.toml");
    fs::copy(src.join("default.toml"), &path).unwrap();
    path
}

#[test]
fn help_output_is_stable() {
    let snaps = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots");
    for sub in ["", "validate", "run", "analyze", "stratify", "replicate"] {
        let mut args: Vec<&str> = vec![];
        if !sub.is_empty() {
            args.push(sub);
        }
        args.push("--help");
        let out = agora(&args);
        assert_eq!(code(&out), 0);
        let name = if sub.is_empty() { "help.txt".to_string() } else { format!("help-{sub}.txt") };
        let expected = fs::read_to_string(snaps.join(&name)).unwrap();
        assert_eq!(String::from_utf8(out.stdout).unwrap(), expected, "{name} drifted");
    }
}

#[test]
fn validate_shipped_scenarios() {
    for name in ["default", "market-life", "stratify"] {
        let out = agora(&["validate", "--scenario", s(&scenarios().join(format!("{name}.toml")))]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn validate_reports_zero_eligibility_share() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_copy(dir.path(), |t| t.replacen("eligibility_share = 1.0", "eligibility_share = 0.0", 1));
    let out = agora(&["validate", "--scenario", s(&path)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ELIGIBILITY_SHARE_RANGE"));
    let out = agora(&["--json", "validate", "--scenario", s(&path)]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    let doc: Value =
        serde_json::from_str(stderr.lines().take_while(|l| !l.starts_with("{\"error\"")).collect::<String>().as_str())
            .unwrap();
    assert_eq!(doc["diagnostics"][0]["code"], "ELIGIBILITY_SHARE_RANGE");
}

#[test]
fn validate_missing_file_is_io() {
    assert_eq!(code(&agora(&["validate", "--scenario", "/definitely/not/here.toml"])), 2);
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&agora(&["run", "--bogus"])), 2);
}

#[test]
fn run_writes_manifest_with_scenario_hash() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("default.toml");
    let out = agora(&["run", "--scenario", s(&scenario), "--ticks", "50", "--seed", "7", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    let digest: String = Sha256::digest(fs::read(&scenario).unwrap()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(m["scenario_sha256"], digest.as_str());
    assert_eq!((m["seed"].as_u64(), m["ticks"].as_u64()), (Some(7), Some(50)));
    for f in m["outputs"].as_array().unwrap() {
        assert!(dir.path().join(f.as_str().unwrap()).exists());
    }
    assert!(!dir.path().join(".manifest.json.tmp").exists());
}

#[test]
fn seed_comes_from_environment_unless_flag_given() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenarios().join("default.toml");
    let run = |extra: &[&str], sub: &str| {
        let out_dir = dir.path().join(sub);
        let mut args = vec!["run", "--scenario", s(&scenario), "--ticks", "5", "--out", s(&out_dir)];
        args.extend_from_slice(extra);
        let o = Command::new(env!("CARGO_BIN_EXE_agora")).args(&args).env("AGORA_SEED", "99").output().unwrap();
        assert_eq!(code(&o), 0);
        manifest(&out_dir)["seed"].as_u64().unwrap()
    };
    assert_eq!(run(&[], "env"), 99);
    assert_eq!(run(&["--seed", "3"], "flag"), 3);
}

#[test]
fn unwritable_output_is_io() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = agora(&[
        "run",
        "--scenario",
        s(&scenarios().join("default.toml")),
        "--ticks",
        "5",
        "--out",
        s(&blocker.join("sub")),
    ]);
    assert_eq!(code(&out), 2);
    let out = agora(&[
        "replicate",
        "--scenario",
        s(&scenarios().join("default.toml")),
        "--ticks",
        "5",
        "--out",
        s(&blocker.join("sub")),
    ]);
    assert_eq!(code(&out), 2);
}

fn bundle(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![];
    for f in manifest(dir)["outputs"].as_array().unwrap() {
        let name = f.as_str().unwrap().to_string();
        files.push((name.clone(), fs::read(dir.join(&name)).unwrap()));
    }
    files.push(("manifest.json".into(), fs::read(dir.join("manifest.json")).unwrap()));
    files
}

#[test]
fn replicate_bundle_is_reproducible_and_covers_traded_commodities() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let scenario = scenarios().join("default.toml");
    for d in [&a, &b] {
        let out = agora(&["replicate", "--scenario", s(&scenario), "--ticks", "2000", "--out", s(d.path())]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(bundle(a.path()), bundle(b.path()));

    let facts: Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("stylized_facts.json")).unwrap()).unwrap();
    let summary: Value = serde_json::from_str(&fs::read_to_string(a.path().join("run/summary.json")).unwrap()).unwrap();
    let rows = facts["commodities"].as_array().unwrap().len();
    let skipped = facts["skipped"].as_array().unwrap().len();
    assert_eq!(rows + skipped, summary["trades_by_commodity"].as_object().unwrap().len());
    assert!(rows >= 10, "only {rows} commodities analysed");
    let table = fs::read_to_string(a.path().join("stylized_facts.csv")).unwrap();
    assert_eq!(table.lines().count(), rows + 1);
}

#[test]
fn replicate_refuses_a_different_scenario_in_the_same_directory() {
    let out_dir = tempfile::tempdir().unwrap();
    let out = agora(&[
        "replicate",
        "--scenario",
        s(&scenarios().join("default.toml")),
        "--ticks",
        "300",
        "--out",
        s(out_dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    let before = fs::read(out_dir.path().join("run/transactions.csv")).unwrap();

    let edited = tempfile::tempdir().unwrap();
    let path = scenario_copy(edited.path(), |t| t.replacen("eligibility_share = 0.90", "eligibility_share = 0.85", 1));
    let out = agora(&["replicate", "--scenario", s(&path), "--ticks", "300", "--out", s(out_dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing to mix"));
    assert_eq!(fs::read(out_dir.path().join("run/transactions.csv")).unwrap(), before);
}

#[test]
fn analyze_and_stratify_run_logs() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let out = agora(&[
        "run",
        "--scenario",
        s(&scenarios().join("market-life.toml")),
        "--ticks",
        "1500",
        "--out",
        s(&run_dir),
    ]);
    assert_eq!(code(&out), 0);
    let log = run_dir.join("transactions.csv");

    let out =
        agora(&["--json", "analyze", "--log", s(&log), "--commodity", "Wheat", "--out", s(&dir.path().join("a"))]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema"], "agora-report/1");
    assert_eq!(doc["commodities"][0]["commodity"], "Wheat");
    let bars = fs::read_to_string(dir.path().join("a/bars.csv")).unwrap();
    assert_eq!(bars.lines().count() as u64 - 1, doc["commodities"][0]["bars"].as_u64().unwrap());

    let out = agora(&["analyze", "--log", s(&log), "--commodity", "Unobtainium", "--out", s(&dir.path().join("b"))]);
    assert_eq!(code(&out), 1);
    let out = agora(&[
        "analyze",
        "--log",
        s(&dir.path().join("none.csv")),
        "--commodity",
        "Wheat",
        "--out",
        s(&dir.path().join("b")),
    ]);
    assert_eq!(code(&out), 2);

    let snaps = run_dir.join("snapshots.csv");
    let plain = agora(&["--json", "stratify", "--snapshots", s(&snaps), "--out", s(&dir.path().join("s1"))]);
    let quoted = agora(&[
        "--json",
        "stratify",
        "--snapshots",
        s(&snaps),
        "--quotes",
        s(&run_dir.join("quotes.csv")),
        "--out",
        s(&dir.path().join("s2")),
    ]);
    assert_eq!((code(&plain), code(&quoted)), (0, 0));
    // The logged net worth already uses the final quotes.
    let a: Value = serde_json::from_slice(&plain.stdout).unwrap();
    let b: Value = serde_json::from_slice(&quoted.stdout).unwrap();
    let medians = |v: &Value| -> Vec<f64> {
        v["stratification"]["bins"]
            .as_array()
            .unwrap()
            .iter()
            .map(|b| b["median_net_worth"].as_f64().unwrap())
            .collect()
    };
    for (x, y) in medians(&a).iter().zip(medians(&b)) {
        assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{x} vs {y}");
    }
}
