use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ergolab(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn error_record(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn cone_check_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("q");
    let out = ergolab(&["cone-check"], &repo_config("cone-quadratic.toml"), &prefix);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for suffix in ["csv", "json"] {
        let got = std::fs::read(dir.path().join(format!("q.{suffix}"))).unwrap();
        let want = std::fs::read(golden.join(format!("cone-quadratic.{suffix}"))).unwrap();
        assert!(got == want, "{suffix} differs from the golden file");
    }
    let csv = std::fs::read_to_string(dir.path().join("q.csv")).unwrap();
    assert!(csv.starts_with("lambda,C_lambda,ratio\n"));
}

#[test]
fn missing_seed_is_a_validation_error_with_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "kind = \"cone-check\"\n[scheme]\nfamily = \"quadratic\"\nn_max = 10\n",
    );
    let out_dir = dir.path().join("out");
    let out = ergolab(&["cone-check"], &cfg, &out_dir.join("x"));
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    assert_eq!(rec["error"]["kind"], "validation");
    assert_eq!(rec["error"]["diagnostics"][0]["path"], "seed");
    assert!(!out_dir.exists());

    // The flag supplies the seed.
    let out = Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(["cone-check", "--seed", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(out_dir.join("x"))
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn seed_override_changes_digest_not_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_config("rates.toml");
    let digest = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_ergolab"))
            .args(["rates", "--seed", seed, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(seed))
            .output()
            .unwrap();
        assert!(out.status.success());
        let m: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        m["config_digest"].as_str().unwrap().to_string()
    };
    assert_ne!(digest("1"), digest("2"));
    assert_eq!(digest("1"), digest("1"));
}

#[test]
fn wrong_subcommand_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = ergolab(&["scan"], &repo_config("cone-quadratic.toml"), &dir.path().join("x"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_increasing_explicit_scheme_cites_the_convention() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "pairs.csv", "0,1\n0,3\n0,3\n");
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!(
            "kind = \"cone-check\"\nseed = 1\n[scheme]\nfamily = \"explicit:{}\"\nn_max = 3\n",
            dir.path().join("pairs.csv").display()
        ),
    );
    let out = ergolab(&["cone-check"], &cfg, &dir.path().join("x"));
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    let msg = rec["error"]["diagnostics"][0]["message"].as_str().unwrap();
    assert!(msg.contains("increasing means strictly increasing"), "{msg}");
}

#[test]
fn budget_overrun_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        r#"
kind = "scan"
seed = 1
deltas = [0.5]
lengths = [10, 20, 40]
trials = 10000
budget = 1000
exact = false
[system]
type = "cyclic"
size = 1000
[observable]
type = "random-step"
"#,
    );
    let out = ergolab(&["scan"], &cfg, &dir.path().join("x"));
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"]["kind"], "budget");
}

#[test]
fn unwritable_prefix_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "");
    let out = ergolab(&["cone-check"], &repo_config("cone-hyperlacunary.toml"), &blocker.join("x"));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn repeated_runs_have_identical_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let sums = |name: &str, threads: &str| {
        let out = ergolab(
            &["scan", "--threads", threads],
            &repo_config("scan-shift.toml"),
            &dir.path().join(name),
        );
        assert!(out.status.success());
        let m: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| o["sha256"].as_str().unwrap().to_string())
            .collect::<Vec<_>>()
    };
    let a = sums("a", "1");
    assert_eq!(a, sums("b", "1"));
    assert_eq!(a, sums("c", "3"));
}
