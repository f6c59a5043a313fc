//! End-to-end runs of the `spars` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spars::experiment::exit;

fn spars(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spars"))
        .args(args)
        .env_remove("SPARS_SEED")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const QUICK: [&str; 4] = ["--epochs", "40", "--hidden", "3"];

#[test]
fn missing_input_exits_with_io_code_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = spars(&["fit", "--input", "/definitely/not/here.csv", "--out", p(&out)]);
    assert_eq!(code(&o), exit::IO, "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unparsable_sample_names_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "t,value\n1,0.5\n2,0.7\n3,oops\n").unwrap();
    let o = spars(&["fit", "--input", p(&input), "--out", p(dir.path())]);
    assert_eq!(code(&o), exit::PARSE);
    let e = stderr(&o);
    assert!(e.contains("row 4") && e.contains("value"), "{e}");
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&spars(&["fit", "--delta", "abc"])), exit::USAGE);
    assert_eq!(code(&spars(&["frobnicate"])), exit::USAGE);
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    fs::write(&input, "1\n2\n3\n").unwrap();
    let o = spars(&["fit", "--input", p(&input), "--delta", "-1"]);
    assert_eq!(code(&o), exit::USAGE, "{}", stderr(&o));
}

#[test]
fn empty_model_path_is_a_config_error() {
    let o = spars(&["spectra", "--model", "", "--data", "x.csv"]);
    assert_eq!(code(&o), exit::USAGE, "{}", stderr(&o));
}

#[test]
fn short_series_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("short.csv");
    fs::write(&input, "1\n2\n1\n2\n1\n").unwrap();
    let o = spars(&["fit", "--input", p(&input), "--lag", "4", "--out", p(dir.path())]);
    assert_eq!(code(&o), exit::NUMERICAL, "{}", stderr(&o));
}

#[test]
fn generate_fit_spectra_round_trip_for_every_fixture() {
    for kind in ["sine", "alternating", "aep", "noisy-periodic", "recurrence"] {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join(format!("{kind}.csv"));
        let o = spars(&["generate", kind, "--out", p(&data), "--n", "240", "--seed", "3"]);
        assert_eq!(code(&o), 0, "{kind}: {}", stderr(&o));

        let mut args = vec!["fit", "--input", p(&data), "--out", p(dir.path())];
        args.extend(QUICK);
        let o = spars(&args);
        assert_eq!(code(&o), 0, "{kind}: {}", stderr(&o));
        let report = fs::read_to_string(dir.path().join("fit_report.txt")).unwrap();
        assert!(report.contains("lag="), "{report}");

        let model = dir.path().join("model.json");
        let o = spars(&["spectra", "--model", p(&model), "--data", p(&data), "--out", p(dir.path())]);
        assert_eq!(code(&o), 0, "{kind}: {}", stderr(&o));
        for f in ["section_eigenvalues.csv", "power_eigenvalues.csv", "spectra_meta.csv"] {
            assert!(dir.path().join(f).exists(), "{kind}: {f}");
        }
    }
}

#[test]
fn compare_writes_all_three_rmses() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("noisy.csv");
    assert_eq!(code(&spars(&["generate", "noisy-periodic", "--out", p(&data)])), 0);
    let mut args = vec!["compare", "--input", p(&data), "--out", p(dir.path())];
    args.extend(QUICK);
    let o = spars(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("compare_report.txt")).unwrap();
    for key in ["spars_rmse=", "sparse_ar_rmse=", "dense_ar_rmse="] {
        assert!(report.contains(key), "{key} missing from\n{report}");
    }
}

#[test]
fn repeated_fits_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    assert_eq!(code(&spars(&["generate", "noisy-periodic", "--out", p(&data), "--seed", "11"])), 0);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let mut args = vec!["fit", "--input", p(&data), "--out", p(&out), "--seed", "5"];
        args.extend(QUICK);
        assert_eq!(code(&spars(&args)), 0);
        outputs.push((
            fs::read(out.join("model.json")).unwrap(),
            fs::read(out.join("fit_report.txt")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    assert_eq!(code(&spars(&["generate", "sine", "--out", p(&data), "--period", "10"])), 0);
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("input = {}\nlag = 7\nepochs = 30\nhidden = 3\n", p(&data))).unwrap();
    let o = spars(&["fit", "--config", p(&cfg), "--lag", "10", "--out", p(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("fit_report.txt")).unwrap();
    assert!(report.lines().any(|l| l == "lag=10"), "{report}");
}
