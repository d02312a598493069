//! End-to-end tests of the `rmtlab` binary: exit codes, resume and output schemas.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rmtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmtlab"))
        .args(args)
        .env_remove("RMTLAB_OUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// CSV files of a run directory keyed by name.
fn csvs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn read_column_max(csv: &Path, column: &str) -> f64 {
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = rmtlab(&["run", "nosuch"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert_eq!(code(&rmtlab(&["frobnicate"])), 1);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&rmtlab(&["--help"])), 0);
    assert_eq!(code(&rmtlab(&["run", "--help"])), 0);
}

#[test]
fn missing_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let out = rmtlab(&["run", "tail", "--config", path_str(&missing), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("absent.toml"), "{}", stderr(&out));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "trials = 10\n").unwrap();
    let out = rmtlab(&["run", "tail", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("trials"), "{}", stderr(&out));
}

#[test]
fn distance_identity_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = rmtlab(&[
        "run", "distid", "-n", "8", "--trials", "1000", "--out", path_str(dir.path()), "--run-id", "d",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = dir.path().join("d");
    assert!(read_column_max(&run.join("distance_identity.csv"), "max_abs_err") <= 1e-6);
    for f in ["manifest.json", "config.json", "report.json", "fits.json"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
}

#[test]
fn failed_invariant_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    std::fs::write(&cfg, "sizes = [8]\ntrials = 100\nfact_trials = 100\ntol = 1e-300\n").unwrap();
    let out = rmtlab(&["run", "distid", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] invariant"));
}

#[test]
fn json_config_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lcd.json");
    std::fs::write(&cfg, r#"{"alpha": 0.2, "gamma": 0.4}"#).unwrap();
    let out = rmtlab(&["run", "lcd", "--config", path_str(&cfg), "--out", path_str(dir.path()), "--run-id", "l"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let saved = std::fs::read_to_string(dir.path().join("l/config.json")).unwrap();
    assert!(saved.contains("0.2") && saved.contains("0.4"));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rmtlab"))
        .args(["run", "lcd", "--run-id", "env"])
        .env("RMTLAB_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("env/report.json").is_file());
}

#[test]
fn json_format_skips_csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = rmtlab(&["run", "lcd", "--format", "json", "--out", path_str(dir.path()), "--run-id", "j"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(csvs(&dir.path().join("j")).is_empty());
    assert!(dir.path().join("j/report.json").is_file());
}

fn tail_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec!["run", "tail", "-n", "20", "--trials", "10000", "--out", out, "--run-id", "t"];
    args.extend_from_slice(extra);
    args
}

#[test]
fn interrupted_run_resumes_to_identical_output() {
    let full = tempfile::tempdir().unwrap();
    assert_eq!(code(&rmtlab(&tail_args(path_str(full.path()), &[]))), 0);

    let part = tempfile::tempdir().unwrap();
    let out = rmtlab(&tail_args(path_str(part.path()), &["--stop-after", "2"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = part.path().join("t");
    assert!(!run.join("report.json").exists());
    let manifest = run.join("manifest.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("\"pending\""));

    let out = rmtlab(&["resume", path_str(&manifest), "--threads", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(csvs(&run), csvs(&full.path().join("t")));
    assert_eq!(
        std::fs::read(run.join("report.json")).unwrap(),
        std::fs::read(full.path().join("t/report.json")).unwrap()
    );

    // A finished run resumes as a no-op.
    let out = rmtlab(&["resume", path_str(&manifest)]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("already complete"));
}

#[test]
fn rerunning_a_completed_run_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "lcd", "--out", path_str(dir.path()), "--run-id", "x"];
    assert_eq!(code(&rmtlab(&args)), 0);
    let out = rmtlab(&args);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("already complete"));
}

#[test]
fn reusing_a_run_id_with_another_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["run", "lcd", "--out", path_str(dir.path()), "--run-id", "x"];
    assert_eq!(code(&rmtlab(&base)), 0);
    let mut other = base.to_vec();
    other.extend(["--seed", "9"]);
    assert_eq!(code(&rmtlab(&other)), 1);
}

fn stopped_run(dir: &Path) -> PathBuf {
    let out = rmtlab(&tail_args(path_str(dir), &["--stop-after", "1"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir.join("t")
}

#[test]
fn resume_rejects_a_tampered_config() {
    let dir = tempfile::tempdir().unwrap();
    let run = stopped_run(dir.path());
    let cfg = run.join("config.json");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("\"n\": 20", "\"n\": 21");
    std::fs::write(&cfg, text).unwrap();
    let out = rmtlab(&["resume", path_str(&run.join("manifest.json"))]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("hash"), "{}", stderr(&out));
}

#[test]
fn resume_rejects_a_corrupted_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = stopped_run(dir.path());
    let manifest = run.join("manifest.json");
    std::fs::write(&manifest, "{ not json").unwrap();
    let out = rmtlab(&["resume", path_str(&manifest)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("corrupted manifest"), "{}", stderr(&out));
}

#[test]
fn resume_of_a_missing_manifest_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rmtlab(&["resume", path_str(&dir.path().join("manifest.json"))])), 1);
}

/// Small runs of every subcommand, shared with the golden schema check.
const SMALL_RUNS: [(&str, &[&str]); 13] = [
    ("tail", &["--trials", "2500", "-n", "20"]),
    ("gaps", &["--trials", "2500", "-n", "12"]),
    ("locallaw", &["--trials", "100", "-n", "60"]),
    ("moments", &["--trials", "100", "-n", "30"]),
    ("hw", &["--trials", "2500"]),
    ("negcorr", &["--trials", "2500"]),
    ("invlwo", &["--trials", "2500"]),
    ("lcd", &[]),
    ("smallball", &["--trials", "1000"]),
    ("distid", &["--trials", "100", "-n", "8"]),
    ("charfn", &["--trials", "10"]),
    ("threshold", &["--trials", "1000"]),
    ("audit", &["--trials", "100", "-n", "20"]),
];

/// File list of a run plus the header line of every CSV.
fn schema(run: &Path) -> String {
    let mut names: Vec<String> = std::fs::read_dir(run)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "units")
        .collect();
    names.sort();
    let mut out = String::new();
    for name in names {
        out.push_str(&name);
        if name.ends_with(".csv") {
            let text = std::fs::read_to_string(run.join(&name)).unwrap();
            out.push_str(": ");
            out.push_str(text.lines().next().unwrap_or(""));
        }
        out.push('\n');
    }
    out
}

#[test]
fn output_schemas_match_golden_files() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let dir = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    for (sub, extra) in SMALL_RUNS {
        let mut args = vec!["run", sub, "--out", path_str(dir.path()), "--run-id", sub];
        args.extend_from_slice(extra);
        let out = rmtlab(&args);
        assert_eq!(code(&out), 0, "{sub}: {}", stderr(&out));
        let got = schema(&dir.path().join(sub));
        let path = golden.join(format!("{sub}.txt"));
        if update {
            std::fs::create_dir_all(&golden).unwrap();
            std::fs::write(&path, &got).unwrap();
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(got.as_str()) {
            mismatched.push(sub);
        }
    }
    assert!(mismatched.is_empty(), "schema changed for {mismatched:?}; rerun with UPDATE_GOLDEN=1 if intended");
}
