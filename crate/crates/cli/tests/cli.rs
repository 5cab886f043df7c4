//! End-to-end tests of the `cnqg` binary: exit codes, outputs, determinism
//! and checkpoint round trips.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cnqg_cli::checkpoint::{self, Checkpoint};
use tempfile::TempDir;

fn cnqg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnqg"))
        .args(args)
        .env("CNQG_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = "N = 2\nM = 32\nL = 12.8\nalpha = 1.5\nnu = 0.1\nt_end = 0.2\nrecord_every = 5\n";

fn run_small(dir: &Path, body: &str, out: &str, extra: &[&str]) -> Output {
    let cfg = write_config(dir, &format!("{out}.cfg"), body);
    let out_dir = dir.join(out);
    let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    cnqg(&args)
}

#[test]
fn run_writes_documented_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = run_small(tmp.path(), &format!("{SMALL}checkpoint_every = 2\nspectrum = true\n"), "a", &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("a");
    for f in ["manifest.txt", "series.csv", "spectrum.csv", "final.bin", "summary.txt", "checkpoint_00000000.bin"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let series = fs::read_to_string(dir.join("series.csv")).unwrap();
    let header = series.lines().next().unwrap();
    assert!(header.starts_with("t,step,mass,min,l1,l2,l4,linf,"));
    assert!(header.ends_with("hs_0.5,hs_1,energy_residual"));
    let first_row: Vec<&str> = series.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first_row[0], "0.0000000000000000e0");
    let ck = checkpoint::read_file(&dir.join("final.bin")).unwrap();
    assert_eq!(ck.points, vec![32, 32]);
    assert!((ck.t - 0.2).abs() < 1e-12);
}

#[test]
fn reruns_are_bit_identical() {
    let tmp = TempDir::new().unwrap();
    let body = format!("{SMALL}initial = random-smooth\namplitude = 0.5\n");
    for name in ["x", "y"] {
        let out = run_small(tmp.path(), &body, name, &["--seed", "1234"]);
        assert_eq!(code(&out), 0);
    }
    for f in ["series.csv", "final.bin", "manifest.txt"] {
        let x = fs::read(tmp.path().join("x").join(f)).unwrap();
        let y = fs::read(tmp.path().join("y").join(f)).unwrap();
        if f == "manifest.txt" {
            assert_eq!(
                String::from_utf8(x).unwrap().replace("/x\n", "/y\n"),
                String::from_utf8(y).unwrap()
            );
        } else {
            assert_eq!(x, y, "{f}");
        }
    }
    let manifest = fs::read_to_string(tmp.path().join("x/manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 1234"));
}

#[test]
fn checkpoint_write_read_write_is_identical_and_restartable() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run_small(tmp.path(), SMALL, "first", &[])), 0);
    let path = tmp.path().join("first/final.bin");
    let bytes = fs::read(&path).unwrap();
    let ck = Checkpoint::from_bytes(&bytes, &path).unwrap();
    let copy = tmp.path().join("copy.bin");
    checkpoint::write_file(&copy, &ck).unwrap();
    assert_eq!(fs::read(&copy).unwrap(), bytes);

    let restart = format!("{SMALL}initial = checkpoint\ncheckpoint = {}\n", copy.display());
    assert_eq!(code(&run_small(tmp.path(), &restart, "second", &[])), 0);
    let series = fs::read_to_string(tmp.path().join("second/series.csv")).unwrap();
    let first_series = fs::read_to_string(tmp.path().join("first/series.csv")).unwrap();
    let last_l2 = first_series.lines().last().unwrap().split(',').nth(5).unwrap().to_string();
    let restart_l2 = series.lines().nth(1).unwrap().split(',').nth(5).unwrap().to_string();
    let a: f64 = last_l2.parse().unwrap();
    let b: f64 = restart_l2.parse().unwrap();
    assert!((a - b).abs() <= 1e-14 * a);
}

#[test]
fn overrides_are_recorded() {
    let tmp = TempDir::new().unwrap();
    let out = run_small(tmp.path(), SMALL, "o", &["--nu", "0.25", "--scheme", "etdrk2", "--alpha", "1.25"]);
    assert_eq!(code(&out), 0);
    let manifest = fs::read_to_string(tmp.path().join("o/manifest.txt")).unwrap();
    assert!(manifest.contains("nu = 2.5000000000000000e-1"));
    assert!(manifest.contains("alpha = 1.2500000000000000e0"));
    assert!(manifest.contains("scheme = etdrk2"));
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let tmp = TempDir::new().unwrap();
    let out = run_small(tmp.path(), &SMALL.replace("alpha = 1.5", "alpha = 2.5"), "bad", &[]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("`alpha`"));
    let out = run_small(tmp.path(), &format!("{SMALL}colour = red\n"), "bad2", &[]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("`colour`"));
    let out = run_small(tmp.path(), &SMALL.replace("t_end = 0.2\n", ""), "bad3", &[]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("`t_end`"));

    let cfg = write_config(tmp.path(), "ok.cfg", SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_cnqg"))
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("CNQG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_files_exit_3() {
    let out = cnqg(&["run", "--config", "/nonexistent/cnqg.cfg"]);
    assert_eq!(code(&out), 3);
    let tmp = TempDir::new().unwrap();
    let restart = format!("{SMALL}initial = checkpoint\ncheckpoint = {}\n", tmp.path().join("none.bin").display());
    assert_eq!(code(&run_small(tmp.path(), &restart, "r", &[])), 3);
}

#[test]
fn constant_data_stays_flat() {
    let tmp = TempDir::new().unwrap();
    let out = run_small(tmp.path(), &format!("{SMALL}initial = constant\namplitude = 0.75\n"), "c", &[]);
    assert_eq!(code(&out), 0);
    let series = fs::read_to_string(tmp.path().join("c/series.csv")).unwrap();
    let rows: Vec<Vec<f64>> = series
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    for row in &rows {
        for (a, b) in row[2..].iter().zip(&rows[0][2..]) {
            assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn inviscid_negative_bump_exits_with_blowup_code() {
    let tmp = TempDir::new().unwrap();
    let body = "N = 2\nM = 64\nL = 16\nalpha = 1\nnu = 0\nt_end = 2\ndt_max = 1e-3\ninitial = negative-bump\namplitude = 4\nwidth = 4\n";
    let out = run_small(tmp.path(), body, "neg", &[]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stdout));
    let summary = fs::read_to_string(tmp.path().join("neg/summary.txt")).unwrap();
    assert!(summary.contains("blow-up suspected"));
}

#[test]
fn blowup_probe_reports_shrinking_second_moment() {
    let tmp = TempDir::new().unwrap();
    let body = "N = 2\nM = 64\nL = 16\nalpha = 1\nnu = 0.3\nt_end = 0.5\ndt_max = 2e-3\nrecord_every = 5\ninitial = negative-bump\nwidth = 4\n";
    let cfg = write_config(tmp.path(), "probe.cfg", body);
    let out_dir = tmp.path().join("probe");
    let out = cnqg(&["blowup-probe", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{stdout}");
    assert!(stdout.contains("w_decreasing = true"));
    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("nu = 0.0000000000000000e0"));
    let virial = fs::read_to_string(out_dir.join("virial.csv")).unwrap();
    assert!(virial.starts_with("t,mass,w,j,dw_dt,residual,lower_bound"));

    let positive = write_config(tmp.path(), "pos.cfg", &body.replace("negative-bump", "gaussian-bump\n#"));
    let out = cnqg(&["blowup-probe", "--config", positive.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn property_suite_selection() {
    let out = cnqg(&["property-suite", "--only", "parseval", "--trials", "3"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("parseval") && stdout.contains("PASS"));
    assert_eq!(stdout.lines().count(), 2);
    assert_eq!(code(&cnqg(&["property-suite", "--only", "nonsense"])), 2);
}

#[test]
fn property_suite_default_passes() {
    let out = cnqg(&["property-suite", "--trials", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn oracle_compare_one_dimension() {
    let tmp = TempDir::new().unwrap();
    let body = "N = 1\nM = 256\nL = 80\nalpha = 1\nnu = 0\nt_end = 1\nwidth = 1\n";
    let cfg = write_config(tmp.path(), "oracle.cfg", body);
    let out_dir = tmp.path().join("oracle");
    let out = cnqg(&["oracle-compare", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let table = fs::read_to_string(out_dir.join("oracle.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);

    let constant = write_config(tmp.path(), "const.cfg", &format!("{body}initial = constant\n"));
    let out = cnqg(&["oracle-compare", "--config", constant.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
}

#[test]
fn decay_fit_on_finished_runs() {
    let tmp = TempDir::new().unwrap();
    let body = "N = 2\nM = 32\nL = 12.8\nalpha = 1.5\nnu = 1\nt_end = 20\ndt_max = 0.05\nrecord_every = 5\nnonlinear = false\nwidth = 3\n";
    assert_eq!(code(&run_small(tmp.path(), body, "lin", &[])), 0);
    let dir = tmp.path().join("lin");
    let out = cnqg(&["decay-fit", "--out", dir.to_str().unwrap(), "--window", "5,20"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{stdout}");
    assert!(stdout.contains("decay looks exponential"));
    let fit = fs::read_to_string(dir.join("decay_fit.csv")).unwrap();
    assert!(fit.lines().nth(1).unwrap().ends_with(",true,true"));

    let out = cnqg(&["decay-fit", "--out", dir.to_str().unwrap(), "--window", "19.9,20"]);
    assert_eq!(code(&out), 2);
}
