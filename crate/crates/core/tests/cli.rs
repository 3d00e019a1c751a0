use std::path::Path;
use std::process::{Command, Output};

fn oksvm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oksvm")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn generate(dir: &Path) -> String {
    let path = dir.join("data.csv").to_str().unwrap().to_string();
    let out = oksvm(&[
        "generate",
        "--n-samples",
        "60",
        "--dim",
        "2",
        "--sep",
        "1.4",
        "--seed",
        "3",
        "--out",
        &path,
    ]);
    assert!(out.status.success());
    path
}

#[test]
fn train_reports_key_values() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path());
    let out = oksvm(&["train", "--data", &data, "--gamma", "0.5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for key in ["method=oksvm", "gamma0=0.5", "final_gamma=", "terminated_by=", "f1="] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(oksvm(&["train"]).status.code(), Some(1));
    assert_eq!(oksvm(&["bogus"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path());
    let out = oksvm(&["train", "--data", &data, "--eta0", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = oksvm(&["heatmap", "--input", &data, "--value", "mse", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(
        oksvm(&["train", "--data", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let one_class = dir.path().join("one.csv");
    std::fs::write(&one_class, "x,label\n1,1\n2,1\n3,1\n4,1\n").unwrap();
    let out = oksvm(&["train", "--data", one_class.to_str().unwrap(), "--test-fraction", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_mode_flags_step_cap() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path());
    let capped = ["train", "--data", &data, "--max-outer-steps", "1"];
    let out = oksvm(&capped);
    assert!(out.status.success());
    assert!(stdout(&out).contains("terminated_by=step_cap"));
    let mut strict = capped.to_vec();
    strict.push("--strict");
    assert_eq!(oksvm(&strict).status.code(), Some(3));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        "# small grid\ndims = 2\nseps = 1.0\ncs = 1\ngammas = 0.5\nreps = 4\nn_samples = 40\n",
    )
    .unwrap();
    let out_path = dir.path().join("rows.csv");
    let (conf, rows) = (config.to_str().unwrap(), out_path.to_str().unwrap());

    assert!(oksvm(&["--config", conf, "grid-fixed", "--out", rows]).status.success());
    let lines = std::fs::read_to_string(&out_path).unwrap().lines().count();
    assert_eq!(lines, 1 + 2 * 4);

    assert!(oksvm(&["--config", conf, "grid-fixed", "--reps", "2", "--out", rows])
        .status
        .success());
    let lines = std::fs::read_to_string(&out_path).unwrap().lines().count();
    assert_eq!(lines, 1 + 2 * 2);

    std::fs::write(&config, "not a pair\n").unwrap();
    assert_eq!(
        oksvm(&["--config", conf, "grid-fixed", "--out", rows]).status.code(),
        Some(1)
    );
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, name: &str| {
        let path = dir.path().join(name);
        let out = oksvm(&[
            "--jobs",
            jobs,
            "grid-fixed",
            "--dims",
            "2,3",
            "--seps",
            "1.2",
            "--cs",
            "1",
            "--gammas",
            "0.1,2.1",
            "--reps",
            "3",
            "--n-samples",
            "40",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("1", "a.csv"), run("4", "b.csv"));
}

#[test]
fn timing_column_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let base = [
        "grid-fixed",
        "--dims",
        "2",
        "--seps",
        "1",
        "--cs",
        "1",
        "--gammas",
        "1",
        "--reps",
        "1",
        "--n-samples",
        "20",
    ];
    let header = |extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend(["--out", path.to_str().unwrap()]);
        args.extend(extra);
        assert!(oksvm(&args).status.success());
        std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert!(!header(&[]).contains("wall_time"));
    assert!(header(&["--timing"]).ends_with("wall_time"));
}
