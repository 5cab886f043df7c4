//! Per-record diagnostics collected while a run is in progress.

use crate::diagnostics::norms::{hs_norm, lp_norm, weighted_energy};
use crate::error::Result;
use crate::field::SpectralField;
use crate::operators::{dissipation_rates, gradient};
use crate::scalar::Scalar;
use crate::solver::{Hook, SolverConfig, TrajectoryRecord};
use crate::transform::inverse_unchecked;

/// Norms and moments of one recorded state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsEntry<T: Scalar> {
    pub t: T,
    pub mass: T,
    pub min_theta: T,
    pub l1: T,
    pub l2: T,
    pub l4: T,
    pub linf: T,
    /// `L^2` norm of `theta - mean`.
    pub l2_fluct: T,
    /// `L^4` norm of `theta - mean`.
    pub l4_fluct: T,
    pub grad_l2: T,
    pub grad_linf: T,
    /// `(s, ||Lambda^s theta||_2)` for every configured order.
    pub hs: Vec<(T, T)>,
    /// Backward-difference energy balance between this record and the
    /// previous one: `(E_n - E_{n-1}) / dt + 2 sum_k r_k |theta_k|^2`, where
    /// `r_k` is the linear decay rate. Zero at the first record.
    pub energy_residual: T,
    /// Energy per radial shell of width `min_i 2 pi / L_i`.
    pub spectrum: Vec<T>,
}

/// Time-ordered diagnostics of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsSeries<T: Scalar> {
    pub dim: usize,
    pub alpha: T,
    pub entries: Vec<DiagnosticsEntry<T>>,
}

impl<T: Scalar> DiagnosticsSeries<T> {
    pub fn times(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.t).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Energy in radial shells `[j dk, (j+1) dk)` with `dk = min_i 2 pi / L_i`.
pub fn radial_spectrum<T: Scalar>(f: &SpectralField<T>) -> Vec<T> {
    let grid = f.grid();
    let dk = grid
        .lengths()
        .iter()
        .map(|&l| T::TAU() / l)
        .fold(T::infinity(), T::min);
    let kmax = grid.kmag().iter().copied().fold(T::zero(), T::max);
    let shells = (kmax / dk).floor().to_f64_lossy() as usize + 1;
    let mut out = vec![T::zero(); shells];
    let volume = grid.volume();
    for (z, &k) in f.coeffs().iter().zip(grid.kmag()) {
        let j = ((k / dk).floor().to_f64_lossy() as usize).min(shells - 1);
        out[j] = out[j] + z.norm_sqr() * volume;
    }
    out
}

/// [`Hook`] that evaluates a [`DiagnosticsEntry`] at every record.
pub struct DiagnosticsRecorder<T: Scalar> {
    hs_orders: Vec<T>,
    with_spectrum: bool,
    rates: Vec<T>,
    last_energy: Option<(T, T)>,
    series: DiagnosticsSeries<T>,
}

impl<T: Scalar> DiagnosticsRecorder<T> {
    /// Records `hs_0.5` and `hs_1` and no spectra.
    pub fn new(grid: &crate::grid::Grid<T>, cfg: &SolverConfig<T>) -> Self {
        Self {
            hs_orders: vec![T::lit(0.5), T::one()],
            with_spectrum: false,
            rates: dissipation_rates(grid, cfg.alpha, cfg.nu, cfg.eps),
            last_energy: None,
            series: DiagnosticsSeries {
                dim: grid.dim(),
                alpha: cfg.alpha,
                entries: Vec::new(),
            },
        }
    }

    pub fn with_hs_orders(mut self, orders: Vec<T>) -> Self {
        self.hs_orders = orders;
        self
    }

    pub fn with_spectrum(mut self, on: bool) -> Self {
        self.with_spectrum = on;
        self
    }

    pub fn series(&self) -> &DiagnosticsSeries<T> {
        &self.series
    }

    pub fn into_series(self) -> DiagnosticsSeries<T> {
        self.series
    }

    /// Diagnostics of a single state at time `t`.
    pub fn evaluate(&mut self, t: T, state: &SpectralField<T>) -> Result<DiagnosticsEntry<T>> {
        let theta = inverse_unchecked(state);
        let fluct = {
            let mean = state.coeffs()[0].re;
            theta.map(|v| v - mean)
        };
        let grad = inverse_unchecked(&gradient(state)?);
        let grad_l2 = hs_norm(state, T::one())?;
        let energy = state.l2_norm_sq();
        let dissipation = weighted_energy(state, &self.rates);
        let energy_residual = match self.last_energy {
            Some((t0, e0)) if t > t0 => (energy - e0) / (t - t0) + T::lit(2.0) * dissipation,
            _ => T::zero(),
        };
        self.last_energy = Some((t, energy));
        let hs = self
            .hs_orders
            .iter()
            .map(|&s| hs_norm(state, s).map(|v| (s, v)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiagnosticsEntry {
            t,
            mass: theta.integral(0),
            min_theta: theta.min(),
            l1: lp_norm(&theta, T::one())?,
            l2: lp_norm(&theta, T::lit(2.0))?,
            l4: lp_norm(&theta, T::lit(4.0))?,
            linf: theta.max_abs(),
            l2_fluct: lp_norm(&fluct, T::lit(2.0))?,
            l4_fluct: lp_norm(&fluct, T::lit(4.0))?,
            grad_l2,
            grad_linf: grad.max_magnitude(),
            hs,
            energy_residual,
            spectrum: if self.with_spectrum {
                radial_spectrum(state)
            } else {
                Vec::new()
            },
        })
    }
}

impl<T: Scalar> Hook<T> for DiagnosticsRecorder<T> {
    fn on_record(&mut self, record: &TrajectoryRecord<T>, state: &SpectralField<T>) -> Result<()> {
        let entry = self.evaluate(record.t, state)?;
        self.series.entries.push(entry);
        Ok(())
    }
}
