use std::path::Path;
use std::process::{Command, Output};

use oldroyd_core::spectral::io::write_fields;
use oldroyd_core::spectral::{AnyField, SpectralSymTensor, SpectralVector, TorusGrid};
use tempfile::TempDir;

const TAYLOR_GREEN: &str = r#"
[run]
n = 16
dt = 0.01
t_end = 0.1
diag_every = 2
checkpoint_every = 5

[params]
nu = 1.0
alpha = 1.25

[initial_condition]
kind = "taylor_green"
amplitude = 1.0
"#;

fn o2d(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_o2d"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup(config: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn simulate_writes_outputs_and_is_deterministic() {
    let dir = setup(
        &TAYLOR_GREEN
            .replace(
                "taylor_green\"",
                "random_solenoidal\"\ndecay = 3.0\ntau_amplitude = 0.1\nseed = 4\n",
            )
            .replace("amplitude = 1.0", "amplitude = 0.1"),
    );
    let a = o2d(dir.path(), &["simulate", "run.toml", "--out", "a"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = o2d(dir.path(), &["simulate", "run.toml", "--out", "b"]);
    assert_eq!(b.status.code(), Some(0));
    let da = std::fs::read(dir.path().join("a/diagnostics.csv")).unwrap();
    let db = std::fs::read(dir.path().join("b/diagnostics.csv")).unwrap();
    assert_eq!(da, db);
    for f in [
        "metadata.json",
        "step_0.o2df",
        "step_5.o2df",
        "step_10.o2df",
    ] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
    let residuals = csv_column(&String::from_utf8(da).unwrap(), "energy_residual");
    assert!(residuals.iter().all(|r| *r < 1e-6), "{residuals:?}");
    let meta = std::fs::read_to_string(dir.path().join("a/metadata.json")).unwrap();
    assert!(meta.contains("\"config_text\"") && meta.contains("checkpoint_every = 5"));
}

#[test]
fn existing_run_needs_force() {
    let dir = setup(TAYLOR_GREEN);
    assert_eq!(
        o2d(dir.path(), &["simulate", "run.toml", "--out", "r"])
            .status
            .code(),
        Some(0)
    );
    let again = o2d(dir.path(), &["simulate", "run.toml", "--out", "r"]);
    assert_eq!(again.status.code(), Some(4));
    assert!(stderr(&again).contains("--force"));
    let forced = o2d(
        dir.path(),
        &[
            "simulate",
            "run.toml",
            "--out",
            "r",
            "--force",
            "--set",
            "run.checkpoint_every=0",
        ],
    );
    assert_eq!(forced.status.code(), Some(0));
    assert!(!dir.path().join("r/step_5.o2df").exists());
}

#[test]
fn empty_run_has_one_row() {
    let dir = setup(TAYLOR_GREEN);
    let o = o2d(
        dir.path(),
        &["simulate", "run.toml", "--set", "run.t_end=0", "--out", "r"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("r/diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn invalid_config_exits_2_naming_the_key() {
    let dir = setup(TAYLOR_GREEN);
    let o = o2d(
        dir.path(),
        &["simulate", "run.toml", "--set", "run.dt=-1", "--out", "r"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dt must be positive"), "{}", stderr(&o));
    assert!(!dir.path().join("r").exists());
    let o = o2d(
        dir.path(),
        &[
            "simulate",
            "run.toml",
            "--set",
            "params.viscosity=1",
            "--out",
            "r",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.viscosity"));
    let o = o2d(dir.path(), &["simulate", "missing.toml"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn blow_up_exits_3_and_keeps_trajectory() {
    let config = r#"
[run]
n = 16
dt = 5.0
t_end = 500.0
diag_every = 1

[params]
nu = 1e-6
alpha = 1.0

[initial_condition]
kind = "random_solenoidal"
decay = 1.0
amplitude = 50.0
tau_amplitude = 50.0
seed = 2
"#;
    let dir = setup(config);
    let o = o2d(dir.path(), &["simulate", "run.toml", "--out", "r"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("blow-up"));
    let meta = std::fs::read_to_string(dir.path().join("r/metadata.json")).unwrap();
    assert!(meta.contains("\"blow_up\": \"blow-up"));
    assert!(
        std::fs::read_to_string(dir.path().join("r/diagnostics.csv"))
            .unwrap()
            .lines()
            .count()
            > 1
    );
}

#[test]
fn taylor_green_l2_matches_closed_form() {
    let dir = setup(TAYLOR_GREEN);
    assert_eq!(
        o2d(dir.path(), &["simulate", "run.toml", "--out", "r"])
            .status
            .code(),
        Some(0)
    );
    let o = o2d(
        dir.path(),
        &["norms", "r/step_0.o2df", "--norm", "L2", "--record", "0"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = csv_column(&stdout(&o), "value");
    let expected = std::f64::consts::PI * 2f64.sqrt();
    assert!((v[0] - expected).abs() < 1e-12, "{v:?}");
}

#[test]
fn norms_cross_check_diagnostics() {
    // eta, beta > 0 puts the velocity criterion in B^{-1}_{inf,inf} for beta = 1
    let config = TAYLOR_GREEN
        .replace("alpha = 1.25", "alpha = 1.0\neta = 1.0\nbeta = 1.0")
        .replace("kind = \"taylor_green\"\namplitude = 1.0", "kind = \"random_solenoidal\"\ndecay = 2.0\namplitude = 0.5\ntau_amplitude = 0.5\nseed = 9");
    let dir = setup(&config);
    assert_eq!(
        o2d(dir.path(), &["simulate", "run.toml", "--out", "r"])
            .status
            .code(),
        Some(0)
    );
    let diag = std::fs::read_to_string(dir.path().join("r/diagnostics.csv")).unwrap();
    let t = csv_column(&diag, "t");
    let crit = csv_column(&diag, "crit_u");
    let row = t.iter().position(|&t| (t - 0.1).abs() < 1e-12).unwrap();
    let o = o2d(
        dir.path(),
        &[
            "norms",
            "r/step_10.o2df",
            "--norm",
            "B-1,inf,inf",
            "--derivative",
            "grad",
            "--record",
            "0",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = csv_column(&stdout(&o), "value")[0];
    assert!(
        (v * v - crit[row]).abs() <= 1e-10 * crit[row],
        "{} vs {}",
        v * v,
        crit[row]
    );
}

#[test]
fn norms_of_zero_field_and_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = TorusGrid::new(16).unwrap();
    write_fields(
        &dir.path().join("zero.o2df"),
        &[
            AnyField::Vector(SpectralVector::zeros(&g)),
            AnyField::Tensor(SpectralSymTensor::zeros(&g)),
        ],
    )
    .unwrap();
    let o = o2d(
        dir.path(),
        &[
            "norms",
            "zero.o2df",
            "--norm",
            "L2",
            "--norm",
            "Linf",
            "--norm",
            "H1",
            "--norm",
            "B0,2,2",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = csv_column(&stdout(&o), "value");
    assert_eq!(v.len(), 8);
    assert!(v.iter().all(|&x| x == 0.0));

    std::fs::write(dir.path().join("bad.o2df"), b"JUNKJUNKJUNK").unwrap();
    let o = o2d(dir.path(), &["norms", "bad.o2df", "--norm", "L2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not an o2df file"));
    let o = o2d(dir.path(), &["norms", "zero.o2df", "--norm", "Q7"]);
    assert_eq!(o.status.code(), Some(2));
}

const SMALL_ENSEMBLE: &str = r#"
[ensemble]
size = 2
resolutions = [16, 32]
"#;

#[test]
fn verify_subset_writes_one_report() {
    let dir = setup(&format!(
        "[verify]\nestimates = [\"eq3_12\"]\n{SMALL_ENSEMBLE}"
    ));
    let o = o2d(dir.path(), &["verify", "run.toml", "--out", "reports"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let files: Vec<_> = std::fs::read_dir(dir.path().join("reports"))
        .unwrap()
        .collect();
    assert_eq!(files.len(), 1);
    let report = std::fs::read_to_string(dir.path().join("reports/eq3_12.json")).unwrap();
    for key in [
        "\"estimate_id\": \"eq3_12\"",
        "\"samples\"",
        "\"max_ratio\"",
        "\"median_ratio\"",
        "\"sweep\"",
        "\"pass\": true",
    ] {
        assert!(report.contains(key), "{key}");
    }
    let again = o2d(dir.path(), &["verify", "run.toml", "--out", "reports"]);
    assert_eq!(again.status.code(), Some(4));
}

#[test]
fn verify_rejects_bad_configs() {
    let dir = setup("[ensemble]\nsize = 0\n");
    let o = o2d(dir.path(), &["verify", "run.toml", "--out", "reports"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ensemble must be nonempty"));
    assert!(!dir.path().join("reports").exists());

    let o = o2d(
        dir.path(),
        &["verify", "--estimate", "eq9_9", "--out", "reports"],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("eq9_9") && err.contains("known ids") && err.contains("weies"),
        "{err}"
    );
}

#[test]
fn thread_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_o2d"))
        .current_dir(dir.path())
        .env("O2D_THREADS", "many")
        .arg("info")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_o2d"))
        .env("O2D_THREADS", "2")
        .arg("info")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exit codes"));
}
