//! End-to-end tests of the `fim-mc` binary: command output, config
//! handling, determinism, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fim-mc"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    binary()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn oracle_prints_classic_normal_fim() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scalar.conf",
        "[model]\nname = signal-plus-noise\nd = 1\nn = 1\nnoise = none\n",
    );
    let output = run_in(
        dir.path(),
        &["oracle", "--config", config.to_str().unwrap(), "--seed", "1"],
    );
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("# command = oracle"), "{text}");
    assert!(text.contains("# order = 2"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    let first: Vec<f64> = rows[0]
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    let second: Vec<f64> = rows[1]
        .split_whitespace()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((first[0] - 1.0).abs() < 1e-12 && first[1].abs() < 1e-12);
    assert!(second[0].abs() < 1e-12 && (second[1] - 0.5).abs() < 1e-12);
}

#[test]
fn study_outputs_are_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "study",
        "--model",
        "scalar-variance",
        "--variant",
        "basic,feedback",
        "-N",
        "200",
        "--reps",
        "4",
        "--seed",
        "7",
        "--format",
        "jsonl",
    ];
    let mut first = args.to_vec();
    first.extend(["--out", "run1.jsonl"]);
    let mut second = args.to_vec();
    second.extend(["--out", "run2.jsonl"]);
    assert!(run_in(dir.path(), &first).status.success());
    assert!(run_in(dir.path(), &second).status.success());
    let a = std::fs::read(dir.path().join("run1.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("run2.jsonl")).unwrap();
    assert_eq!(a, b, "same seed and config must produce identical bytes");
}

#[test]
fn study_emits_table_analogue_with_bracketed_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng_config = String::new();
    rng_config.push_str("[model]\nname = signal-plus-noise\nd = 2\nn = 10\n");
    rng_config.push_str("[estimator]\nvariant = basic, feedback\nN = 300\n");
    rng_config.push_str("[study]\nreps = 5\nseed = 11\n");
    let config = write_config(dir.path(), "study.conf", &rng_config);
    let output = run_in(dir.path(), &["study", "--config", config.to_str().unwrap()]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("# estimator.variant = basic,feedback"), "{text}");
    assert!(text.contains("basic/gradient"));
    assert!(text.contains("feedback/gradient"));
    // Bracketed 95% interval in the summary block.
    assert!(
        text.contains("] ") || text.contains("]\n") || text.contains(", "),
        "{text}"
    );
    let summary_line = text
        .lines()
        .find(|l| l.starts_with("basic/gradient"))
        .unwrap();
    assert!(
        summary_line.contains('[') && summary_line.contains(']'),
        "summary must carry a bracketed CI: {summary_line}"
    );
    assert!(text.contains("one-sided t-tests"));
    // Progress counter goes to stderr, not stdout.
    assert!(!text.contains("replication 5/5"));
    assert!(stderr(&output).contains("replication 5/5"));
}

#[test]
fn csv_study_round_trips_through_a_csv_reader() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(
        dir.path(),
        &[
            "study",
            "--model",
            "scalar-variance",
            "--variant",
            "basic",
            "-N",
            "100",
            "--reps",
            "3",
            "--seed",
            "3",
            "--format",
            "csv",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let replications = rows.iter().filter(|r| &r[0] == "replication").count();
    assert_eq!(replications, 3);
    assert!(rows.iter().any(|r| &r[0] == "summary"));
}

#[test]
fn estimate_prints_one_symmetric_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(
        dir.path(),
        &[
            "estimate",
            "--model",
            "scalar-normal",
            "--variant",
            "basic",
            "-N",
            "50",
            "--seed",
            "5",
        ],
    );
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("# command = estimate"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 1);
    let value: f64 = rows[0].trim().parse().unwrap();
    assert!((value - 1.0).abs() < 1e-6, "scalar-normal estimate {value}");
}

#[test]
fn omitted_seed_is_recorded_in_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(
        dir.path(),
        &[
            "estimate",
            "--model",
            "scalar-normal",
            "--variant",
            "basic",
            "-N",
            "10",
        ],
    );
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(
        text.contains("(auto)"),
        "auto-selected seed must be recorded: {text}"
    );
}

#[test]
fn unknown_config_key_fails_with_exit_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.conf", "[model]\nbogus = 1\n");
    let output = run_in(
        dir.path(),
        &["estimate", "--config", config.to_str().unwrap()],
    );
    assert_eq!(output.status.code(), Some(1));
    let err = stderr(&output);
    assert!(err.contains("unknown key `bogus`"), "{err}");
    assert!(err.contains("valid keys"), "{err}");
}

#[test]
fn indep_variant_on_black_box_model_fails_at_parse_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "blackbox.conf",
        "[model]\nname = mixture\nblack-box = true\n[estimator]\nvariant = indep\ninput-mode = loglik-only\nN = 10\n",
    );
    let output = run_in(
        dir.path(),
        &["estimate", "--config", config.to_str().unwrap(), "--seed", "1"],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(
        stderr(&output).contains("per-datum"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn non_positive_definite_covariance_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad-sigma.conf",
        "[model]\nname = signal-plus-noise\nd = 2\nn = 3\nnoise = none\nsigma-offdiag = 2.0\n",
    );
    let output = run_in(
        dir.path(),
        &[
            "estimate",
            "--config",
            config.to_str().unwrap(),
            "--variant",
            "basic",
            "-N",
            "5",
            "--seed",
            "1",
        ],
    );
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("not positive definite"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn list_models_names_all_reference_models() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(dir.path(), &["list-models"]);
    assert!(output.status.success());
    let text = stdout(&output);
    for name in [
        "signal-plus-noise",
        "mixture",
        "scalar-normal",
        "scalar-variance",
    ] {
        assert!(text.contains(name), "missing {name} in {text}");
    }
}

#[test]
fn mixture_oracle_uses_and_reuses_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "oracle",
        "--model",
        "mixture",
        "--oracle-reps",
        "2000",
        "--cache-dir",
        "cache",
        "--seed",
        "3",
        "--format",
        "jsonl",
    ];
    let first = run_in(dir.path(), &args);
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    assert!(!stderr(&first).contains("loaded from cache"));
    // Warns that the oracle replication count is below the reference scale.
    assert!(stderr(&first).contains("1000000"), "{}", stderr(&first));

    let cache_files: Vec<_> = std::fs::read_dir(dir.path().join("cache"))
        .unwrap()
        .collect();
    assert_eq!(cache_files.len(), 1);

    let second = run_in(dir.path(), &args);
    assert!(second.status.success());
    assert!(stderr(&second).contains("loaded from cache"));
    // Output bytes are identical whether the oracle was computed or loaded.
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn study_bytes_do_not_depend_on_oracle_cache_state() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "study",
        "--model",
        "mixture",
        "--variant",
        "basic,feedback",
        "-N",
        "50",
        "--reps",
        "3",
        "--seed",
        "12",
        "--oracle-reps",
        "2000",
        "--cache-dir",
        "cache",
        "--format",
        "text",
    ];
    let mut first = args.to_vec();
    first.extend(["--out", "first.txt"]);
    let mut second = args.to_vec();
    second.extend(["--out", "second.txt"]);
    // First run computes the oracle, second loads it from the cache.
    assert!(run_in(dir.path(), &first).status.success());
    assert!(run_in(dir.path(), &second).status.success());
    let a = std::fs::read(dir.path().join("first.txt")).unwrap();
    let b = std::fs::read(dir.path().join("second.txt")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn threads_flag_does_not_change_study_results() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "study",
        "--model",
        "scalar-variance",
        "--variant",
        "basic,indep",
        "-N",
        "150",
        "--reps",
        "6",
        "--seed",
        "21",
        "--format",
        "csv",
    ];
    let mut single = base.to_vec();
    single.extend(["--threads", "1", "--out", "single.csv"]);
    let mut several = base.to_vec();
    several.extend(["--threads", "4", "--out", "several.csv"]);
    assert!(run_in(dir.path(), &single).status.success());
    assert!(run_in(dir.path(), &several).status.success());
    let a = std::fs::read(dir.path().join("single.csv")).unwrap();
    let b = std::fs::read(dir.path().join("several.csv")).unwrap();
    assert_eq!(a, b, "worker count must not affect results");
}
