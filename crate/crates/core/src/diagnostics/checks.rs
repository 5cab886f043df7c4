//! Inequality checkers evaluated on single fields or recorded trajectories.

use std::fmt;

use crate::diagnostics::norms::{lp_norm, weighted_energy};
use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::operators::{dissipation_rates, fractional_laplacian, fractional_symbol};
use crate::scalar::Scalar;
use crate::solver::{SolverConfig, Trajectory};
use crate::transform::{forward_transform, inverse_unchecked};

/// Largest top-third energy fraction accepted by [`pointwise_lemma_check`].
pub const LEMMA_TAIL_LIMIT: f64 = 1e-6;

/// Outcome of one inequality check. `worst_violation <= 0` means the
/// inequality held with room to spare.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub name: String,
    pub sampled_points: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Caveats (e.g. hypotheses not met, so the result is informational).
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, sampled_points: usize, worst_violation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            sampled_points,
            worst_violation,
            tolerance,
            pass: worst_violation <= tolerance,
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

impl fmt::Display for InequalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: worst violation {:.3e} (tolerance {:.3e}, {} samples)",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.worst_violation,
            self.tolerance,
            self.sampled_points
        )?;
        for note in &self.notes {
            write!(f, "; {note}")?;
        }
        Ok(())
    }
}

fn spectra<T: Scalar>(traj: &Trajectory<T>) -> Result<Vec<SpectralField<T>>> {
    traj.fields()?.into_iter().map(forward_transform).collect()
}

/// Checks `int |f|^(p-2) f Lambda^s f >= (2/p) ||Lambda^(s/2) |f|^(p/2)||_2^2`.
///
/// Both sides are midpoint sums / Parseval sums on the grid. The violation
/// is `rhs - lhs`, passing at `1e-8 (|lhs| + |rhs|)`.
pub fn pointwise_lemma_check<T: Scalar>(f: &PhysicalField<T>, s: T, p: T) -> Result<InequalityReport> {
    f.require_scalar()?;
    if !(s >= T::zero() && s <= T::lit(2.0)) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s.to_f64_lossy(),
            reason: "must lie in [0, 2]",
        });
    }
    if !(p >= T::lit(2.0)) || p.is_infinite() {
        return Err(Error::InvalidExponent(p.to_f64_lossy()));
    }
    let hat = forward_transform(f)?;
    let tail = hat.tail_energy_fraction(T::lit(2.0 / 3.0));
    if tail > T::lit(LEMMA_TAIL_LIMIT) {
        return Err(Error::UnderResolved {
            fraction: tail.to_f64_lossy(),
            limit: LEMMA_TAIL_LIMIT,
        });
    }
    let grid = f.grid();
    let lam = inverse_unchecked(&fractional_laplacian(&hat, s)?);
    let two = T::lit(2.0);
    let lhs: T = f
        .values()
        .iter()
        .zip(lam.values())
        .map(|(&v, &l)| {
            let w = if p == two { v } else { v.abs().powf(p - two) * v };
            w * l
        })
        .sum::<T>()
        * grid.cell_volume();
    let power = f.map(|v| if p == two { v.abs() } else { v.abs().powf(p / two) });
    let rhs = two / p * weighted_energy(&forward_transform(&power)?, &fractional_symbol(grid, s));
    let scale = lhs.abs() + rhs.abs();
    let violation = rhs - lhs;
    let tolerance = T::lit(1e-8) * scale;
    Ok(InequalityReport::new(
        format!("pointwise lemma s={} p={}", s.to_f64_lossy(), p.to_f64_lossy()),
        grid.len(),
        violation.to_f64_lossy(),
        tolerance.to_f64_lossy(),
    ))
}

/// `V sum_k w_k |c_k|^2` integrated between two records assuming every mode
/// varies exponentially in between (exact for the linear flow).
fn interval_integral<T: Scalar>(a: &SpectralField<T>, b: &SpectralField<T>, weights: &[T], dt: T) -> T {
    let sum: T = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .zip(weights)
        .map(|((za, zb), &w)| {
            if w == T::zero() {
                return T::zero();
            }
            let ea = za.norm_sqr();
            let eb = zb.norm_sqr();
            let big = ea.max(eb);
            let mean = if ea > T::zero() && eb > T::zero() && (ea - eb).abs() > T::lit(1e-12) * big {
                (ea - eb) / (ea / eb).ln()
            } else {
                (ea + eb) / T::lit(2.0)
            };
            w * mean
        })
        .sum();
    sum * a.grid().volume() * dt
}

/// Integrated energy balance `E(t_n) + 2 int_0^t_n sum_k r_k |theta_k|^2 - E(0)`
/// at every record, with `r_k = nu |k|^alpha + eps |k|^2` from `cfg`.
///
/// Between records each mode is interpolated exponentially, so the balance is
/// zero up to rounding for the linear flow and non-positive for the
/// nonlinear one with nonnegative data.
pub fn energy_balance<T: Scalar>(traj: &Trajectory<T>, cfg: &SolverConfig<T>) -> Result<Vec<T>> {
    let hats = spectra(traj)?;
    let Some(first) = hats.first() else {
        return Ok(Vec::new());
    };
    let rates = dissipation_rates(first.grid(), cfg.alpha, cfg.nu, cfg.eps);
    let e0 = first.l2_norm_sq();
    let times = traj.times();
    let mut out = Vec::with_capacity(hats.len());
    let mut integral = T::zero();
    out.push(T::zero());
    for i in 1..hats.len() {
        integral = integral + interval_integral(&hats[i - 1], &hats[i], &rates, times[i] - times[i - 1]);
        out.push(hats[i].l2_norm_sq() + T::lit(2.0) * integral - e0);
    }
    Ok(out)
}

/// Energy inequality in integrated form and in backward-difference form
/// between consecutive records, tolerance `1e-6 ||theta_0||_2^2`.
pub fn energy_inequality_check<T: Scalar>(traj: &Trajectory<T>, cfg: &SolverConfig<T>) -> Result<InequalityReport> {
    let balance = energy_balance(traj, cfg)?;
    let hats = spectra(traj)?;
    let times = traj.times();
    let e0 = hats.first().map(|h| h.l2_norm_sq()).unwrap_or_else(T::zero);
    let rates = hats
        .first()
        .map(|h| dissipation_rates(h.grid(), cfg.alpha, cfg.nu, cfg.eps))
        .unwrap_or_default();
    let mut worst = balance.iter().copied().fold(T::neg_infinity(), T::max);
    for i in 1..hats.len() {
        let dt = times[i] - times[i - 1];
        let step = hats[i].l2_norm_sq() - hats[i - 1].l2_norm_sq()
            + T::lit(2.0) * dt * weighted_energy(&hats[i], &rates);
        worst = worst.max(step);
    }
    let mut report = InequalityReport::new(
        "energy inequality",
        balance.len(),
        worst.to_f64_lossy(),
        (T::lit(1e-6) * e0).to_f64_lossy(),
    );
    let fields = traj.fields()?;
    if fields.first().is_some_and(|f| f.min() < T::zero()) {
        report = report.with_note("initial data changes sign; inequality not implied");
    }
    Ok(report)
}

/// Level-set energy inequality for `theta_lambda = (theta - lambda)_+`:
/// `E_l(t2) + 2 nu int_t1^t2 ||Lambda^(alpha/2) theta_lambda||_2^2 <= E_l(t1)`
/// over all recorded pairs `t1 < t2`, trapezoid in time, tolerance
/// `1e-4 ||theta_0||_2^2`.
pub fn level_set_energy_check<T: Scalar>(
    traj: &Trajectory<T>,
    lambdas: &[T],
) -> Result<Vec<InequalityReport>> {
    let fields = traj.fields()?;
    let times = traj.times();
    let Some(first) = fields.first() else {
        return Ok(Vec::new());
    };
    let grid = first.grid();
    let cfg = &traj.config;
    let symbol = fractional_symbol(grid, cfg.alpha);
    let e0 = lp_norm(first, T::lit(2.0))?.powi(2);
    let mut reports = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut energy = Vec::with_capacity(fields.len());
        let mut dissipation = Vec::with_capacity(fields.len());
        for f in &fields {
            let part = f.map(|v| (v - lambda).max(T::zero()));
            energy.push(lp_norm(&part, T::lit(2.0))?.powi(2));
            dissipation.push(weighted_energy(&forward_transform(&part)?, &symbol));
        }
        let two_nu = T::lit(2.0) * cfg.nu;
        let mut cumulative = T::zero();
        // max over t1 < t2 of -(E(t1) + 2 nu C(t1)) where C is the running integral
        let mut best_start = -energy[0];
        let mut worst = T::neg_infinity();
        for i in 1..fields.len() {
            let dt = times[i] - times[i - 1];
            cumulative = cumulative + dt * (dissipation[i] + dissipation[i - 1]) / T::lit(2.0);
            let here = energy[i] + two_nu * cumulative;
            worst = worst.max(here + best_start);
            best_start = best_start.max(-here);
        }
        if fields.len() < 2 {
            worst = T::zero();
        }
        let mut report = InequalityReport::new(
            format!("level-set energy lambda={}", lambda.to_f64_lossy()),
            fields.len(),
            worst.to_f64_lossy(),
            (T::lit(1e-4) * e0).to_f64_lossy(),
        );
        if cfg.alpha != T::one() {
            report = report.with_note("dissipation order differs from 1; uses Lambda^(alpha/2)");
        }
        reports.push(report);
    }
    Ok(reports)
}

/// Monotonicity of `||theta||_p` for `p = 2, 4, inf` (relative slack 1e-8
/// per record) and `min theta >= -1e-6 ||theta_0||_inf`.
pub fn maximum_principle_check<T: Scalar>(traj: &Trajectory<T>) -> Result<Vec<InequalityReport>> {
    let fields = traj.fields()?;
    let mut reports = Vec::new();
    let Some(first) = fields.first() else {
        return Ok(reports);
    };
    for (name, p) in [("L2", T::lit(2.0)), ("L4", T::lit(4.0)), ("Linf", T::infinity())] {
        let norms = fields.iter().map(|f| lp_norm(f, p)).collect::<Result<Vec<_>>>()?;
        let worst = norms
            .windows(2)
            .map(|w| {
                if w[0] > T::zero() {
                    (w[1] - w[0]) / w[0]
                } else {
                    w[1]
                }
            })
            .fold(T::neg_infinity(), T::max);
        let worst = if norms.len() < 2 { T::zero() } else { worst };
        reports.push(InequalityReport::new(
            format!("maximum principle {name}"),
            norms.len(),
            worst.to_f64_lossy(),
            1e-8,
        ));
    }
    let scale = first.max_abs();
    let lowest = fields.iter().map(|f| f.min()).fold(T::infinity(), T::min);
    let violation = if scale > T::zero() { -lowest / scale } else { -lowest };
    let mut report = InequalityReport::new("positivity", fields.len(), violation.to_f64_lossy(), 1e-6);
    if first.min() < T::zero() {
        report = report.with_note("initial data changes sign");
    }
    reports.push(report);
    Ok(reports)
}

/// Worst value of `|theta^(k, t)| - ||theta_0||_1 - |k| int_0^t ||theta||_2^2`
/// at each record, with `theta^ = V c_k` approximating the continuum
/// transform.
pub fn spectral_apriori_violations<T: Scalar>(traj: &Trajectory<T>) -> Result<Vec<T>> {
    let fields = traj.fields()?;
    let Some(first) = fields.first() else {
        return Ok(Vec::new());
    };
    let grid = first.grid();
    let volume = grid.volume();
    let l1 = lp_norm(first, T::one())?;
    let times = traj.times();
    let mut integral = T::zero();
    let mut prev_energy = T::zero();
    let mut out = Vec::with_capacity(fields.len());
    for (i, f) in fields.iter().enumerate() {
        let hat = forward_transform(f)?;
        let energy = hat.l2_norm_sq();
        if i > 0 {
            integral = integral + (times[i] - times[i - 1]) * (energy + prev_energy) / T::lit(2.0);
        }
        prev_energy = energy;
        let worst = hat
            .coeffs()
            .iter()
            .zip(grid.kmag())
            .map(|(z, &k)| z.norm() * volume - l1 - k * integral)
            .fold(T::neg_infinity(), T::max);
        out.push(worst);
    }
    Ok(out)
}

/// Spectral a priori bound at every recorded `(k, t)`, tolerance
/// `1e-6 ||theta_0||_1`.
pub fn spectral_apriori_check<T: Scalar>(traj: &Trajectory<T>) -> Result<InequalityReport> {
    let violations = spectral_apriori_violations(traj)?;
    let l1 = match traj.fields()?.first() {
        Some(f) => lp_norm(f, T::one())?,
        None => T::zero(),
    };
    let worst = violations.iter().copied().fold(T::neg_infinity(), T::max);
    Ok(InequalityReport::new(
        "spectral a priori bound",
        violations.len() * traj.final_state.grid().len(),
        worst.to_f64_lossy(),
        (T::lit(1e-6) * l1).to_f64_lossy(),
    )
    .with_note("torus analogue with continuum-normalized coefficients"))
}

/// `||theta(t)||_q` and the running `(int_0^t ||theta||_q^p)^(1/p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessMonitor<T: Scalar> {
    pub times: Vec<T>,
    pub lq: Vec<T>,
    pub integral: Vec<T>,
}

/// Validates `1/p + N/(q alpha) = 1 - 1/alpha` (to 1e-12) with
/// `q > N/(alpha - 1)`, `alpha > 1`.
pub fn validate_uniqueness_exponents(dim: usize, p: f64, q: f64, alpha: f64) -> Result<()> {
    let n = dim as f64;
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::InvalidExponents(format!("alpha = {alpha} must lie in (1, 2]")));
    }
    if !(q > n / (alpha - 1.0)) || q.is_infinite() {
        return Err(Error::InvalidExponents(format!(
            "q = {q} must be finite and exceed N/(alpha-1) = {}",
            n / (alpha - 1.0)
        )));
    }
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::InvalidExponents(format!("p = {p} must be finite and >= 1")));
    }
    let gap = 1.0 / p + n / (q * alpha) - (1.0 - 1.0 / alpha);
    if gap.abs() > 1e-12 {
        return Err(Error::InvalidExponents(format!(
            "1/p + N/(q alpha) - (1 - 1/alpha) = {gap:e}"
        )));
    }
    Ok(())
}

/// Tracks the space-time norm of the uniqueness class along a trajectory.
pub fn uniqueness_class_monitor<T: Scalar>(
    traj: &Trajectory<T>,
    p: T,
    q: T,
    alpha: T,
) -> Result<UniquenessMonitor<T>> {
    let fields = traj.fields()?;
    let dim = traj.final_state.grid().dim();
    validate_uniqueness_exponents(dim, p.to_f64_lossy(), q.to_f64_lossy(), alpha.to_f64_lossy())?;
    let times = traj.times();
    let lq = fields.iter().map(|f| lp_norm(f, q)).collect::<Result<Vec<_>>>()?;
    let mut acc = T::zero();
    let mut integral = Vec::with_capacity(lq.len());
    for i in 0..lq.len() {
        if i > 0 {
            acc = acc + (times[i] - times[i - 1]) * (lq[i].powf(p) + lq[i - 1].powf(p)) / T::lit(2.0);
        }
        integral.push(acc.powf(T::one() / p));
    }
    Ok(UniquenessMonitor { times, lq, integral })
}
