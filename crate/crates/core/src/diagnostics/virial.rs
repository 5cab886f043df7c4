//! Second-moment probe for nonpositive data evolving without dissipation.

use crate::error::{Error, Result};
use crate::field::PhysicalField;
use crate::oracle::{riesz_constant, virial_rhs, QuadratureSpec};
use crate::scalar::Scalar;
use crate::solver::Trajectory;

/// Negative values of `Theta = -theta` tolerated (relative to its maximum)
/// before the probe reports a sign violation. Smaller undershoots are
/// clipped for `J_N` only.
pub const VIRIAL_SIGN_SLACK: f64 = 1e-2;

/// Initial `Theta` beyond a quarter box from the center must stay below this
/// fraction of its maximum.
pub const VIRIAL_SUPPORT_LIMIT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct VirialReport<T: Scalar> {
    pub times: Vec<T>,
    /// `M = int Theta`.
    pub mass: Vec<T>,
    /// `w = int |x - x_c|^2 Theta`.
    pub w: Vec<T>,
    /// Double integral `J_N` from the quadrature oracle.
    pub j: Vec<T>,
    /// Centered difference `dw/dt` at interior samples (`None` at the ends).
    pub dw_dt: Vec<Option<T>>,
    /// `|dw/dt + c_N J_N|` at interior samples.
    pub identity_residual: Vec<Option<T>>,
    /// `2^(-(N-1)/2) M^((N+3)/2) w^(-(N-1)/2)` at every sample.
    pub lower_bound: Vec<T>,
    pub lower_bound_ok: bool,
}

impl<T: Scalar> VirialReport<T> {
    /// Largest `|dw/dt + c_N J_N| / |dw/dt|` over interior samples.
    pub fn max_relative_residual(&self) -> Option<T> {
        self.dw_dt
            .iter()
            .zip(&self.identity_residual)
            .filter_map(|(d, r)| match (d, r) {
                (Some(d), Some(r)) => Some(*r / d.abs()),
                _ => None,
            })
            .reduce(T::max)
    }
}

/// Center-origin second moment and mass.
pub fn second_moment<T: Scalar>(theta: &PhysicalField<T>) -> (T, T) {
    let grid = theta.grid();
    let center = grid.center();
    let cell = grid.cell_volume();
    let mut w = T::zero();
    let mut mass = T::zero();
    for (p, &v) in theta.values().iter().enumerate() {
        let x = grid.coordinate(p);
        let r2: T = (0..grid.dim()).map(|a| (x[a] - center[a]).powi(2)).sum();
        w = w + r2 * v;
        mass = mass + v;
    }
    (w * cell, mass * cell)
}

fn check_support<T: Scalar>(theta: &PhysicalField<T>) -> Result<()> {
    let grid = theta.grid();
    let center = grid.center();
    let peak = theta.max_abs();
    let mut outside = T::zero();
    for (p, &v) in theta.values().iter().enumerate() {
        let x = grid.coordinate(p);
        let far = (0..grid.dim()).any(|a| (x[a] - center[a]).abs() > grid.lengths()[a] / T::lit(4.0));
        if far {
            outside = outside.max(v.abs());
        }
    }
    if outside > T::lit(VIRIAL_SUPPORT_LIMIT) * peak {
        return Err(Error::SupportTooWide {
            value: (outside / peak).to_f64_lossy(),
        });
    }
    Ok(())
}

/// Evaluates `w`, `J_N`, the residual of `dw/dt = -c_N J_N` and the algebraic
/// lower bound on `J_N` along a trajectory with `theta <= 0`.
///
/// The support condition applies to the initial record; later records only
/// need the sign condition.
pub fn virial_probe<T: Scalar>(traj: &Trajectory<T>, spec: &QuadratureSpec<T>) -> Result<VirialReport<T>> {
    let fields = traj.fields()?;
    let times = traj.times();
    let dim = traj.final_state.grid().dim();
    let n = T::from_usize_lossy(dim);
    let c_n = T::lit(riesz_constant(dim));
    let half = T::lit(0.5);

    let mut report = VirialReport {
        times: times.clone(),
        mass: Vec::new(),
        w: Vec::new(),
        j: Vec::new(),
        dw_dt: Vec::new(),
        identity_residual: Vec::new(),
        lower_bound: Vec::new(),
        lower_bound_ok: true,
    };
    for (i, f) in fields.iter().enumerate() {
        let big = f.map(|v| -v);
        let peak = big.max_abs();
        if big.min() < -T::lit(VIRIAL_SIGN_SLACK) * peak {
            return Err(Error::SignViolation {
                value: big.min().to_f64_lossy(),
            });
        }
        if i == 0 {
            check_support(&big)?;
        }
        // Clipping would bias w upward, so moments use the signed field.
        let (w, mass) = second_moment(&big);
        let j = virial_rhs(&big.map(|v| v.max(T::zero())), spec)?;
        let bound = T::lit(2.0).powf(-(n - T::one()) * half)
            * mass.powf((n + T::lit(3.0)) * half)
            * w.powf(-(n - T::one()) * half);
        // 1-D: J = M^2 is the bound itself, up to rounding.
        if bound > j * (T::one() + T::lit(1e-10)) {
            report.lower_bound_ok = false;
        }
        report.mass.push(mass);
        report.w.push(w);
        report.j.push(j);
        report.lower_bound.push(bound);
    }
    let len = fields.len();
    for i in 0..len {
        if i == 0 || i + 1 == len {
            report.dw_dt.push(None);
            report.identity_residual.push(None);
            continue;
        }
        let h1 = times[i] - times[i - 1];
        let h2 = times[i + 1] - times[i];
        let w = &report.w;
        let d = -h2 / (h1 * (h1 + h2)) * w[i - 1]
            + (h2 - h1) / (h1 * h2) * w[i]
            + h1 / (h2 * (h1 + h2)) * w[i + 1];
        report.dw_dt.push(Some(d));
        report.identity_residual.push(Some((d + c_n * report.j[i]).abs()));
    }
    Ok(report)
}
