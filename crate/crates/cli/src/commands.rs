//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use cnqg_core::diagnostics::{decay_fit, radial_spectrum, virial_probe, DecayQuantity, DiagnosticsRecorder};
use cnqg_core::operators::{fractional_laplacian, riesz_transform};
use cnqg_core::oracle::{interior_relative_error, lambda_alpha_quadrature, riesz_quadrature, QuadratureSpec};
use cnqg_core::solver::{run as solve, run_with_hooks, Hook, TrajectoryRecord};
use cnqg_core::{forward_transform, inverse_transform, RunStatus, SpectralField};

use crate::checkpoint::{self, Checkpoint};
use crate::config::{parse_config, RunManifest};
use crate::error::{CliError, CliResult, Exit};
use crate::output::{fmt17, read_series, series_header, series_row, CsvOut};
use crate::suite::{check_names, run_suite};

/// Orders compared by `oracle-compare`.
pub const ORACLE_ALPHAS: [f64; 4] = [0.25, 0.5, 1.0, 1.5];

/// Largest relative virial-identity residual accepted by `blowup-probe`.
pub const VIRIAL_RESIDUAL_LIMIT: f64 = 0.05;

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn status_exit(status: &RunStatus) -> Exit {
    match status {
        RunStatus::Completed => Exit::Success,
        RunStatus::BlowupSuspected { .. } => Exit::BlowupSuspected,
        RunStatus::NumericalBlowup { .. } => Exit::NumericalBlowup,
    }
}

fn describe(status: &RunStatus) -> String {
    match status {
        RunStatus::Completed => "completed".into(),
        RunStatus::BlowupSuspected { t, reason } => format!("blow-up suspected at t = {}: {reason}", fmt17(*t)),
        RunStatus::NumericalBlowup { t } => format!("non-finite values after t = {}", fmt17(*t)),
    }
}

/// Streams diagnostics rows, spectra and periodic checkpoints during a run.
/// The first I/O failure is kept and reported after the run.
struct RunOutputs<'a> {
    manifest: &'a RunManifest,
    recorder: DiagnosticsRecorder<f64>,
    series: CsvOut,
    spectrum: Option<CsvOut>,
    records: usize,
    failure: Option<CliError>,
}

impl RunOutputs<'_> {
    fn write(&mut self, record: &TrajectoryRecord<f64>, state: &SpectralField<f64>) -> CliResult<()> {
        let entry = self
            .recorder
            .series()
            .entries
            .last()
            .expect("recorder ran first")
            .clone();
        self.series.row(&series_row(record.step, &entry))?;
        if let Some(out) = &mut self.spectrum {
            let row: Vec<String> = std::iter::once(fmt17(record.t))
                .chain(entry.spectrum.iter().map(|&v| fmt17(v)))
                .collect();
            out.row(&row)?;
        }
        let every = self.manifest.checkpoint_every;
        if every > 0 && self.records % every == 0 {
            let c = &self.manifest.config;
            let ck = Checkpoint::new(&inverse_transform(state)?, c.alpha, c.nu, c.eps, record.t);
            let path = self.manifest.out.join(format!("checkpoint_{:08}.bin", record.step));
            checkpoint::write_file(&path, &ck)?;
        }
        Ok(())
    }
}

impl Hook<f64> for RunOutputs<'_> {
    fn on_record(&mut self, record: &TrajectoryRecord<f64>, state: &SpectralField<f64>) -> cnqg_core::Result<()> {
        self.recorder.on_record(record, state)?;
        if self.failure.is_none() {
            if let Err(e) = self.write(record, state) {
                self.failure = Some(e);
            }
        }
        self.records += 1;
        Ok(())
    }
}

/// `cnqg run`: integrates the manifest and writes `manifest.txt`,
/// `series.csv`, optional `spectrum.csv`, checkpoints, `final.bin` and
/// `summary.txt` into the output directory.
pub fn run(manifest: &RunManifest) -> CliResult<Exit> {
    let grid = manifest.grid()?;
    let theta0 = manifest.initial_field()?;
    create_dir(&manifest.out)?;
    write_text(&manifest.out.join("manifest.txt"), &manifest.to_text())?;

    let cfg = &manifest.config;
    let spectrum = if manifest.spectrum {
        let shells = radial_spectrum(&forward_transform(&theta0)?).len();
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((0..shells).map(|j| format!("shell_{j}")))
            .collect();
        Some(CsvOut::create(&manifest.out.join("spectrum.csv"), &header)?)
    } else {
        None
    };
    let mut outputs = RunOutputs {
        manifest,
        recorder: DiagnosticsRecorder::new(&grid, cfg)
            .with_hs_orders(manifest.hs_orders.clone())
            .with_spectrum(manifest.spectrum),
        series: CsvOut::create(&manifest.out.join("series.csv"), &series_header(&manifest.hs_orders))?,
        spectrum,
        records: 0,
        failure: None,
    };
    let traj = run_with_hooks(&theta0, cfg, &mut [&mut outputs as &mut dyn Hook<f64>])?;
    if let Some(e) = outputs.failure.take() {
        return Err(e);
    }
    let records = outputs.records;
    outputs.series.finish()?;
    if let Some(s) = outputs.spectrum {
        s.finish()?;
    }

    let final_field = inverse_transform(&traj.final_state)?;
    let ck = Checkpoint::new(&final_field, cfg.alpha, cfg.nu, cfg.eps, traj.final_time);
    checkpoint::write_file(&manifest.out.join("final.bin"), &ck)?;

    let exit = status_exit(&traj.status);
    let summary = format!(
        "status = {}\nsteps = {}\nrecords = {records}\nfinal_time = {}\nexit_code = {}\n",
        describe(&traj.status),
        traj.steps,
        fmt17(traj.final_time),
        exit as u8
    );
    write_text(&manifest.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(exit)
}

/// `cnqg property-suite`: prints a pass/fail table of the randomized
/// invariants.
pub fn property_suite(trials: usize, seed: u64, only: Option<&str>) -> CliResult<Exit> {
    if let Some(name) = only {
        if !check_names().contains(&name) {
            return Err(CliError::config(
                "--only",
                format!("unknown check `{name}`; available: {}", check_names().join(", ")),
            ));
        }
    }
    if trials == 0 {
        return Err(CliError::config("--trials", "must be >= 1"));
    }
    let results = run_suite(trials, seed, only)?;
    println!("{:<22} {:>6} {:>12} {:>10}  result", "check", "trials", "worst", "tolerance");
    for r in &results {
        println!(
            "{:<22} {:>6} {:>12.3e} {:>10.1e}  {}",
            r.name,
            r.trials,
            r.worst,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(if results.iter().all(|r| r.pass) {
        Exit::Success
    } else {
        Exit::CheckFailed
    })
}

/// `cnqg oracle-compare`: interior relative errors of the spectral
/// operators against the quadratures on the manifest's initial data.
pub fn oracle_compare(manifest: &RunManifest) -> CliResult<Exit> {
    let f = manifest.initial_field()?;
    let spec = QuadratureSpec::default();
    let hat = forward_transform(&f)?;
    create_dir(&manifest.out)?;
    let mut csv = CsvOut::create(
        &manifest.out.join("oracle.csv"),
        &["operator", "alpha", "rel_err", "limit", "pass"].map(String::from),
    )?;
    let mut all = true;
    println!("{:<10} {:>6} {:>12} {:>6}  result", "operator", "alpha", "rel_err", "limit");
    let mut emit = |op: &str, alpha: Option<f64>, err: f64, limit: f64| -> CliResult<()> {
        let pass = err <= limit;
        all &= pass;
        let a = alpha.map(fmt17).unwrap_or_default();
        csv.row(&[op.to_string(), a, fmt17(err), fmt17(limit), pass.to_string()])?;
        println!(
            "{op:<10} {:>6} {err:>12.3e} {limit:>6}  {}",
            alpha.map(|a| a.to_string()).unwrap_or_else(|| "-".into()),
            if pass { "PASS" } else { "FAIL" }
        );
        Ok(())
    };
    for alpha in ORACLE_ALPHAS {
        let spectral = inverse_transform(&fractional_laplacian(&hat, alpha)?)?;
        let quad = lambda_alpha_quadrature(&f, alpha, &spec)?;
        let err = interior_relative_error(&spectral, &quad, spec.interior_margin)?;
        emit("lambda", Some(alpha), err, if alpha < 0.5 { 0.05 } else { 0.02 })?;
    }
    let spectral = inverse_transform(&riesz_transform(&hat)?)?;
    let quad = riesz_quadrature(&f, &spec)?;
    emit(
        "riesz",
        None,
        interior_relative_error(&spectral, &quad, spec.interior_margin)?,
        0.02,
    )?;
    csv.finish()?;
    Ok(if all { Exit::Success } else { Exit::CheckFailed })
}

/// `cnqg blowup-probe`: inviscid run from nonpositive data followed by the
/// second-moment probe; writes `virial.csv`.
pub fn blowup_probe(manifest: &RunManifest) -> CliResult<Exit> {
    let mut manifest = manifest.clone();
    manifest.config.nu = 0.0;
    manifest.config.eps = 0.0;
    manifest.config.keep_fields = true;
    let theta0 = manifest.initial_field()?;
    if theta0.max() > 0.0 {
        return Err(CliError::config(
            "initial",
            format!("blow-up probe needs theta_0 <= 0, found max {}", fmt17(theta0.max())),
        ));
    }
    create_dir(&manifest.out)?;
    write_text(&manifest.out.join("manifest.txt"), &manifest.to_text())?;
    let traj = solve(&theta0, &manifest.config)?;
    let spec = QuadratureSpec::default().with_subsample(manifest.subsample);
    let probe = virial_probe(&traj, &spec)?;

    let mut csv = CsvOut::create(
        &manifest.out.join("virial.csv"),
        &["t", "mass", "w", "j", "dw_dt", "residual", "lower_bound"].map(String::from),
    )?;
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    for i in 0..probe.times.len() {
        csv.row(&[
            fmt17(probe.times[i]),
            fmt17(probe.mass[i]),
            fmt17(probe.w[i]),
            fmt17(probe.j[i]),
            opt(probe.dw_dt[i]),
            opt(probe.identity_residual[i]),
            fmt17(probe.lower_bound[i]),
        ])?;
    }
    csv.finish()?;

    let residual = probe.max_relative_residual();
    let decreasing = probe.w.windows(2).all(|w| w[1] < w[0]);
    println!("status = {}", describe(&traj.status));
    println!("samples = {}", probe.times.len());
    println!(
        "max_relative_residual = {}",
        residual.map(fmt17).unwrap_or_else(|| "n/a".into())
    );
    println!("lower_bound_ok = {}", probe.lower_bound_ok);
    println!("w_decreasing = {decreasing}");
    let pass = probe.lower_bound_ok && residual.is_some_and(|r| r <= VIRIAL_RESIDUAL_LIMIT);
    Ok(if pass { Exit::Success } else { Exit::CheckFailed })
}

/// Parses `a,b` into a fit window.
pub fn parse_window(raw: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::config("--window", format!("expected `t_a,t_b` with t_a < t_b, found `{raw}`"));
    let (a, b) = raw.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

/// `cnqg decay-fit`: fits algebraic rates to a finished run's series and
/// writes `decay_fit.csv` next to it.
pub fn decay_fit_dir(dir: &Path, window: Option<(f64, f64)>) -> CliResult<Exit> {
    let manifest = parse_config(&dir.join("manifest.txt"), &Default::default())?;
    let series = read_series(&dir.join("series.csv"), manifest.dim(), manifest.config.alpha)?;
    let window = window.unwrap_or((0.0, f64::INFINITY));
    let mut csv = CsvOut::create(
        &dir.join("decay_fit.csv"),
        &[
            "quantity",
            "exponent",
            "expected",
            "r2",
            "samples",
            "outside_hypotheses",
            "exponential_like",
        ]
        .map(String::from),
    )?;
    let quantities = [
        ("l2_fluct", DecayQuantity::L2),
        ("l4_fluct", DecayQuantity::Lp(4.0)),
        ("grad_l2", DecayQuantity::GradL2),
    ];
    let mut notes: Vec<String> = Vec::new();
    for (name, quantity) in quantities {
        let fit = decay_fit(&series, window, quantity).map_err(|e| match e {
            cnqg_core::Error::InsufficientData { .. } => CliError::config("--window", e.to_string()),
            other => other.into(),
        })?;
        csv.row(&[
            name.to_string(),
            fmt17(fit.exponent),
            fmt17(fit.expected),
            fmt17(fit.r2),
            fit.samples.to_string(),
            fit.outside_hypotheses.to_string(),
            fit.exponential_like.to_string(),
        ])?;
        println!(
            "{name:<9} fitted {:.6} expected {:.6} r2 {:.6} ({} samples)",
            fit.exponent, fit.expected, fit.r2, fit.samples
        );
        for n in fit.notes {
            if !notes.contains(&n) {
                notes.push(n);
            }
        }
    }
    csv.finish()?;
    for n in notes {
        println!("note: {n}");
    }
    Ok(Exit::Success)
}

/// Output directory for `decay-fit`: the flag value or `out`.
pub fn run_dir(out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from("out"))
}
