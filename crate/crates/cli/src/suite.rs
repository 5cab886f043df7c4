//! Randomized invariant suite behind `cnqg property-suite`.

use cnqg_core::diagnostics::{lp_norm, pointwise_lemma_check};
use cnqg_core::initial::{gaussian_bump, random_smooth};
use cnqg_core::operators::{divergence, fractional_laplacian, gradient, riesz_transform};
use cnqg_core::oracle::{riesz_symmetrization_check, QuadratureSpec};
use cnqg_core::solver::Stepper;
use cnqg_core::{forward_transform, inverse_transform, Grid, PhysicalField, SolverConfig, SpectralField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliResult;

/// Outcome of one named check over all trials.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    /// Largest normalized defect seen; the check passes when it is at most
    /// `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

type CheckFn = fn(&mut ChaCha8Rng) -> CliResult<f64>;

/// `(name, tolerance, one trial)`.
pub const CHECKS: [(&str, f64, CheckFn); 9] = [
    ("round-trip", 1e-12, round_trip),
    ("parseval", 1e-12, parseval),
    ("lambda-composition", 1e-12, lambda_composition),
    ("lambda-gradient", 1e-12, lambda_gradient),
    ("riesz-bounded", 1e-12, riesz_bounded),
    ("div-riesz", 1e-12, div_riesz),
    ("positivity-lemma", 0.0, positivity_lemma),
    ("riesz-symmetrization", 0.05, riesz_symmetrization),
    ("flux-forms", 1e-10, flux_forms),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Runs every check (or only `only`) for `trials` seeded trials each.
pub fn run_suite(trials: usize, seed: u64, only: Option<&str>) -> CliResult<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (i, &(name, tolerance, check)) in CHECKS.iter().enumerate() {
        if only.is_some_and(|o| o != name) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..trials {
            worst = worst.max(check(&mut rng)?);
        }
        out.push(CheckOutcome {
            name,
            trials,
            worst,
            tolerance,
            pass: worst <= tolerance,
        });
    }
    Ok(out)
}

fn random_grid(rng: &mut ChaCha8Rng) -> CliResult<Grid<f64>> {
    let dim = rng.gen_range(1..=3);
    let m = [0, 64, 32, 16][dim];
    let length = rng.gen_range(2.0..12.0);
    Ok(Grid::cube(dim, m, length)?)
}

fn random_field(rng: &mut ChaCha8Rng, grid: &Grid<f64>) -> CliResult<PhysicalField<f64>> {
    let band = grid.points()[0] / 8;
    Ok(random_smooth(grid, rng.gen(), band)?)
}

fn max_diff(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn relative(defect: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

fn round_trip(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = random_grid(rng)?;
    let f = random_field(rng, &grid)?;
    let back = inverse_transform(&forward_transform(&f)?)?;
    let err = f
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(relative(err, f.max_abs()))
}

fn parseval(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = random_grid(rng)?;
    let f = random_field(rng, &grid)?;
    let physical = lp_norm(&f, 2.0)?.powi(2);
    Ok(relative((physical - forward_transform(&f)?.l2_norm_sq()).abs(), physical))
}

fn lambda_composition(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = random_grid(rng)?;
    let hat = forward_transform(&random_field(rng, &grid)?)?.without_mean();
    let a = rng.gen_range(-0.4..2.0);
    let b = rng.gen_range(0.0..2.0);
    let two = fractional_laplacian(&fractional_laplacian(&hat, a)?, b)?;
    let one = fractional_laplacian(&hat, a + b)?;
    Ok(relative(max_diff(&two, &one), one.max_abs()))
}

fn lambda_gradient(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = random_grid(rng)?;
    let hat = forward_transform(&random_field(rng, &grid)?)?;
    let a = gradient(&fractional_laplacian(&hat, 1.0)?)?;
    let b = fractional_laplacian(&gradient(&hat)?, 1.0)?;
    let commute = relative(max_diff(&a, &b), a.max_abs());
    let g = gradient(&hat)?.l2_norm_sq();
    let l = fractional_laplacian(&hat, 1.0)?.l2_norm_sq();
    Ok(commute.max(relative((g - l).abs(), l)))
}

fn riesz_bounded(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = random_grid(rng)?;
    let hat = forward_transform(&random_field(rng, &grid)?)?;
    let r = riesz_transform(&hat)?.l2_norm_sq().sqrt();
    let f = hat.l2_norm_sq().sqrt();
    Ok(relative(r - f, f))
}

fn div_riesz(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = random_grid(rng)?;
    let hat = forward_transform(&random_field(rng, &grid)?)?;
    let lhs = divergence(&riesz_transform(&hat)?)?;
    let rhs = fractional_laplacian(&hat, 1.0)?;
    Ok(relative(max_diff(&lhs, &rhs), rhs.max_abs()))
}

/// Largest `violation - tolerance`, so a passing trial is `<= 0`.
fn positivity_lemma(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = Grid::cube(2, 32, rng.gen_range(4.0..8.0))?;
    let f = random_smooth(&grid, rng.gen(), 4)?;
    let mut worst = f64::NEG_INFINITY;
    for s in [0.5, 1.0, 1.5, 2.0] {
        for p in [2.0, 3.0, 4.0] {
            let r = pointwise_lemma_check(&f, s, p)?;
            worst = worst.max(r.worst_violation - r.tolerance);
        }
    }
    Ok(worst)
}

fn riesz_symmetrization(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = Grid::cube(2, 48, 12.0)?;
    let c1 = [rng.gen_range(5.0..7.0), rng.gen_range(5.0..7.0)];
    let c2 = [rng.gen_range(5.0..7.0), rng.gen_range(5.0..7.0)];
    let f = gaussian_bump(&grid, 1.0, 1.0, &c1)?.axpby(1.0, &gaussian_bump(&grid, 0.6, 0.8, &c2)?, 1.0)?;
    let k1: f64 = rng.gen_range(0.3..0.6);
    let k2: f64 = rng.gen_range(0.3..0.6);
    let shift: f64 = rng.gen_range(0.0..6.0);
    let phi = PhysicalField::from_fn(&grid, |x| (k1 * x[0]).sin() + 0.3 * (k2 * x[1] + shift).cos());
    Ok(riesz_symmetrization_check(&f, &phi, &QuadratureSpec::default())?.rel_err)
}

fn flux_forms(rng: &mut ChaCha8Rng) -> CliResult<f64> {
    let grid = Grid::cube(2, 32, rng.gen_range(4.0..12.0))?;
    let stepper = Stepper::new(&grid, &SolverConfig::default())?;
    let hat = forward_transform(&random_smooth(&grid, rng.gen(), 4)?)?;
    let div_form = stepper.flux(&hat)?.divergence;
    let adv_form = stepper.flux_advective(&hat)?;
    Ok(relative(max_diff(&div_form, &adv_form), div_form.max_abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes_on_a_few_trials() {
        let results = run_suite(2, 3, None).unwrap();
        assert_eq!(results.len(), CHECKS.len());
        for r in results {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn only_selects_one_check() {
        let results = run_suite(1, 0, Some("parseval")).unwrap();
        assert_eq!(results.len(), 1);
        assert_eq!(results[0].name, "parseval");
    }
}
