//! Empirical bound surveys that report measured ratios and exponents
//! without asserting a constant.

use crate::diagnostics::decay::linear_fit;
use crate::diagnostics::norms::lp_norm;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial::{centered_bump, random_smooth};
use crate::operators::{riesz_potential, semigroup_apply};
use crate::transform::{forward_transform, inverse_unchecked};

/// Largest `||Lambda^(-delta) f||_p / ||f||_q` per resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct RieszPotentialSurvey {
    pub delta: f64,
    pub p: f64,
    pub q: f64,
    /// `(points per axis, max ratio over trials)`.
    pub max_ratio: Vec<(usize, f64)>,
}

/// Ratio survey for the Riesz potential on random mean-zero fields, with
/// `1/p = 1/q - delta/N`.
pub fn riesz_potential_survey(
    dim: usize,
    length: f64,
    delta: f64,
    q: f64,
    resolutions: &[usize],
    trials: usize,
    seed: u64,
) -> Result<RieszPotentialSurvey> {
    let n = dim as f64;
    if !(delta > 0.0 && delta < n) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must lie in (0, N)",
        });
    }
    let inv_p = 1.0 / q - delta / n;
    if !(q > 1.0) || !(inv_p > 0.0) {
        return Err(Error::InvalidExponents(format!(
            "q = {q} with delta = {delta} gives 1/p = {inv_p}; need q > 1 and 1/p > 0"
        )));
    }
    let p = 1.0 / inv_p;
    let mut max_ratio = Vec::with_capacity(resolutions.len());
    for &m in resolutions {
        let grid = Grid::<f64>::cube(dim, m, length)?;
        let band = (m / 8).max(1);
        let mut worst = 0.0f64;
        for trial in 0..trials {
            let f = random_smooth(&grid, seed.wrapping_add(trial as u64), band)?;
            let hat = forward_transform(&f)?.without_mean();
            let centered = inverse_unchecked(&hat);
            let pot = inverse_unchecked(&riesz_potential(&hat, delta)?);
            let denom = lp_norm(&centered, q)?;
            if denom > 0.0 {
                worst = worst.max(lp_norm(&pot, p)? / denom);
            }
        }
        max_ratio.push((m, worst));
    }
    Ok(RieszPotentialSurvey { delta, p, q, max_ratio })
}

/// Measured decay of `||G(t) f||_q / ||f||_p` for a concentrated bump.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupSurvey {
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `gamma` in `ratio ~ t^(-gamma)` from a log-log fit.
    pub fitted_exponent: f64,
    /// `(2/alpha)(1/p - 1/q)`.
    pub exponent_two_over_alpha: f64,
    /// `(N/alpha)(1/p - 1/q)`.
    pub exponent_n_over_alpha: f64,
}

/// Applies the semigroup (`nu = 1`) to a bump of width two cells at each
/// time and fits the algebraic rate of the `L^p -> L^q` ratio.
pub fn semigroup_bound_survey(
    grid: &Grid<f64>,
    alpha: f64,
    p: f64,
    q: f64,
    times: &[f64],
) -> Result<SemigroupSurvey> {
    if !(q >= p && p >= 1.0) {
        return Err(Error::InvalidExponents(format!("need 1 <= p <= q, got p = {p}, q = {q}")));
    }
    if times.len() < 2 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidTime(times.first().copied().unwrap_or(0.0)));
    }
    let f = centered_bump(grid, 1.0, 2.0 * grid.min_spacing())?;
    let hat = forward_transform(&f)?;
    let base = lp_norm(&f, p)?;
    let mut ratios = Vec::with_capacity(times.len());
    for &t in times {
        let evolved = inverse_unchecked(&semigroup_apply(&hat, t, alpha, 1.0, 0.0)?);
        ratios.push(lp_norm(&evolved, q)? / base);
    }
    let lt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let lr: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let (_, slope, _) = linear_fit(&lt, &lr);
    let gap = 1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q };
    Ok(SemigroupSurvey {
        times: times.to_vec(),
        ratios,
        fitted_exponent: -slope,
        exponent_two_over_alpha: 2.0 / alpha * gap,
        exponent_n_over_alpha: grid.dim() as f64 / alpha * gap,
    })
}
