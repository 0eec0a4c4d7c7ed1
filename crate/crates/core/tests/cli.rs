use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use oldroyd_bkm::io::{self, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oldroyd-bkm"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_config(path: &Path) -> Output {
    bin().args(["run", "--config"]).arg(path).output().unwrap()
}

fn base(dir: &Path, extra: &str) -> String {
    format!(
        "grid_n = 8\ninitial.kind = taylor_green\nstep.mode = fixed_dt\nstep.dt = 0.01\nstep.t_end = 0.04\ntail_halt_threshold = 1.0\noutput_path = {}\n{extra}",
        dir.join("out.csv").display()
    )
}

#[test]
fn run_equilibrium_completes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "eq.conf",
        &format!("{}initial.amplitude = 0.0\n", base(dir.path(), "")).replace("0.04", "1.0"),
    );
    let out = run_config(&cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("halt_reason = completed"));
    assert!(stdout.contains("bkm_m = 0.0000000000000000e0"));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    let recs = io::read_diagnostics(dir.path().join("out.csv")).unwrap();
    assert_eq!(recs.len(), 101);
    assert!(recs.iter().all(|r| r.sup_w == 0.0 && r.sup_r == [0.0; 3] && r.bkm_m == 0.0));
    assert!(dir.path().join("out.summary").exists());
    assert!(dir.path().join("out_final.ivbk").exists());
}

#[test]
fn csv_values_carry_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tg.conf", &base(dir.path(), ""));
    assert_eq!(run_config(&cfg).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let row = csv.lines().nth(2).unwrap();
    for field in row.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert!(mantissa.len() >= 15, "{field}");
    }
    let recs = io::read_diagnostics(dir.path().join("out.csv")).unwrap();
    assert!(recs.windows(2).all(|p| p[1].bkm_m >= p[0].bkm_m && p[1].time > p[0].time));
    assert!(recs.last().unwrap().bkm_m > 0.0);
}

#[test]
fn config_errors_exit_4_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let bad_grid = write_config(dir.path(), "a.conf", &base(dir.path(), "").replace("grid_n = 8", "grid_n = 7"));
    let out = run_config(&bad_grid);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1") && err.contains("grid_n"), "{err}");
    assert!(!dir.path().join("out.csv").exists());

    let unknown = write_config(dir.path(), "b.conf", &base(dir.path(), "step.dtt = 0.1\n"));
    let out = run_config(&unknown);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 8") && err.contains("step.dtt") && err.contains("unknown key"), "{err}");

    let missing = dir.path().join("nope.conf");
    assert_eq!(run_config(&missing).status.code(), Some(4));
}

#[test]
fn resolution_loss_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let body = base(dir.path(), "initial.kind = random_band_limited\n")
        .replace("initial.kind = taylor_green\n", "")
        .replace("tail_halt_threshold = 1.0", "tail_halt_threshold = 1e-12");
    let cfg = write_config(dir.path(), "r.conf", &body);
    let out = run_config(&cfg);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("halt_reason = resolution_lost"));
    assert!(!io::read_diagnostics(dir.path().join("out.csv")).unwrap().is_empty());
}

#[test]
fn overflow_exits_3_and_keeps_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "o.conf", &base(dir.path(), "initial.amplitude = 1e200\n"));
    let out = run_config(&cfg);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("halt_reason = nonfinite"));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(csv.lines().count() >= 2);
}

#[test]
fn resume_continues_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let first = write_config(dir.path(), "first.conf", &base(dir.path(), ""));
    assert_eq!(run_config(&first).status.code(), Some(0));
    let body = base(dir.path(), "")
        .replace("0.04", "0.08")
        .replace("out.csv", "resumed.csv");
    let second = write_config(dir.path(), "second.conf", &body);
    let out = bin()
        .args(["resume", "--checkpoint"])
        .arg(dir.path().join("out_final.ivbk"))
        .arg("--config")
        .arg(&second)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = io::read_diagnostics(dir.path().join("resumed.csv")).unwrap();
    assert!((recs[0].time - 0.04).abs() < 1e-15);
    assert_eq!(recs.last().unwrap().time, 0.08);

    let wrong = write_config(dir.path(), "wrong.conf", &body.replace("grid_n = 8", "grid_n = 16"));
    let out = bin()
        .args(["resume", "--checkpoint"])
        .arg(dir.path().join("out_final.ivbk"))
        .arg("--config")
        .arg(&wrong)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn surveys_print_reports() {
    let out = bin()
        .args(["kato-survey", "--n", "16", "--ensemble", "4", "--seed", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("survey = kato") && text.contains("samples = 4"), "{text}");

    let out = bin()
        .args(["commutator-survey", "--n", "16", "--ensemble", "2", "--seed", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("survey = commutator") && text.contains("samples = 40"), "{text}");

    let out = bin().args(["kato-survey", "--n", "9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}
