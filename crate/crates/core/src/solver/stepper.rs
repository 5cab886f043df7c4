//! Nonlinear term and single time steps with exact linear factors.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{dealias_mask, PhysicalField, SpectralField};
use crate::grid::Grid;
use crate::operators::{dissipation_rates, fractional_symbol, gradient_symbols, riesz_symbols};
use crate::scalar::Scalar;
use crate::solver::config::{Scheme, SolverConfig};
use crate::transform::{forward_unchecked, inverse_unchecked};

/// Nonlinear flux divergence together with the velocity bound used by CFL.
pub struct Flux<T: Scalar> {
    /// `div(u theta)` in spectral space, dealiased.
    pub divergence: SpectralField<T>,
    /// `max_x |u(x)|`.
    pub max_speed: T,
}

/// Precomputed symbol tables for one grid and configuration.
pub struct Stepper<T: Scalar> {
    grid: Grid<T>,
    config: SolverConfig<T>,
    rates: Vec<T>,
    riesz: Vec<Vec<Complex<T>>>,
    grad: Vec<Vec<Complex<T>>>,
    lambda: Vec<T>,
    keep: Vec<T>,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(grid: &Grid<T>, config: &SolverConfig<T>) -> Result<Self> {
        config.validate()?;
        let keep = dealias_mask(grid, config.dealias_fraction)
            .into_iter()
            .map(|k| if k { T::one() } else { T::zero() })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            config: config.clone(),
            rates: dissipation_rates(grid, config.alpha, config.nu, config.eps),
            riesz: riesz_symbols(grid),
            grad: gradient_symbols(grid),
            lambda: fractional_symbol(grid, T::one()),
            keep,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.config
    }

    /// Decay rate `nu |k|^alpha + eps |k|^2` per mode.
    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    fn truncate(&self, f: &SpectralField<T>) -> SpectralField<T> {
        let mut out = f.clone();
        let n = self.grid.len();
        for chunk in out.coeffs_mut().chunks_mut(n) {
            for (z, &k) in chunk.iter_mut().zip(&self.keep) {
                *z = *z * k;
            }
        }
        out
    }

    fn times_table(&self, f: &[Complex<T>], table: &[Complex<T>]) -> Vec<Complex<T>> {
        f.iter().zip(table).map(|(&a, &b)| a * b).collect()
    }

    /// Divergence form: `P div(u P theta)` with `u = R P theta`, `P` the
    /// dealiasing projection.
    pub fn flux(&self, theta: &SpectralField<T>) -> Result<Flux<T>> {
        theta.require_scalar()?;
        let grid = &self.grid;
        let n = grid.len();
        let dim = grid.dim();
        let th = self.truncate(theta);

        let mut u_hat = Vec::with_capacity(dim * n);
        for j in 0..dim {
            u_hat.extend(self.times_table(th.coeffs(), &self.riesz[j]));
        }
        let u = inverse_unchecked(&SpectralField::from_coeffs_unchecked(grid, dim, u_hat));
        let th_phys = inverse_unchecked(&th);

        let mut prod = Vec::with_capacity(dim * n);
        for j in 0..dim {
            prod.extend(
                u.component(j)
                    .iter()
                    .zip(th_phys.values())
                    .map(|(&a, &b)| a * b),
            );
        }
        let prod_hat = forward_unchecked(&PhysicalField::from_values_unchecked(grid, dim, prod));

        let mut div = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..dim {
            for ((d, &q), &s) in div.iter_mut().zip(prod_hat.component(j)).zip(&self.grad[j]) {
                *d = *d + q * s;
            }
        }
        let divergence = self.truncate(&SpectralField::from_coeffs_unchecked(grid, 1, div));
        Ok(Flux {
            divergence,
            max_speed: u.max_magnitude(),
        })
    }

    /// Advective form `P(u . grad theta + theta Lambda theta)` under the same
    /// truncation; equal to [`Stepper::flux`] up to rounding.
    pub fn flux_advective(&self, theta: &SpectralField<T>) -> Result<SpectralField<T>> {
        theta.require_scalar()?;
        let grid = &self.grid;
        let n = grid.len();
        let dim = grid.dim();
        let th = self.truncate(theta);
        let th_phys = inverse_unchecked(&th);
        let lam = inverse_unchecked(&SpectralField::from_coeffs_unchecked(
            grid,
            1,
            th.coeffs()
                .iter()
                .zip(&self.lambda)
                .map(|(&z, &s)| z * s)
                .collect(),
        ));
        let mut acc: Vec<T> = th_phys
            .values()
            .iter()
            .zip(lam.values())
            .map(|(&a, &b)| a * b)
            .collect();
        for j in 0..dim {
            let u = inverse_unchecked(&SpectralField::from_coeffs_unchecked(
                grid,
                1,
                self.times_table(th.coeffs(), &self.riesz[j]),
            ));
            let g = inverse_unchecked(&SpectralField::from_coeffs_unchecked(
                grid,
                1,
                self.times_table(th.coeffs(), &self.grad[j]),
            ));
            for ((a, &uj), &gj) in acc.iter_mut().zip(u.values()).zip(g.values()) {
                *a = *a + uj * gj;
            }
        }
        debug_assert_eq!(acc.len(), n);
        Ok(self.truncate(&forward_unchecked(&PhysicalField::from_values_unchecked(
            grid, 1, acc,
        ))))
    }

    fn zero_flux(&self) -> Flux<T> {
        Flux {
            divergence: SpectralField::zeros(&self.grid, 1),
            max_speed: T::zero(),
        }
    }

    /// Flux for the configured model (zero when the nonlinearity is off).
    pub fn evaluate(&self, theta: &SpectralField<T>) -> Result<Flux<T>> {
        if self.config.nonlinear {
            self.flux(theta)
        } else {
            theta.require_scalar()?;
            Ok(self.zero_flux())
        }
    }

    /// Largest admissible step for a given velocity bound.
    pub fn admissible_dt(&self, max_speed: T) -> T {
        let speed = max_speed.max(T::min_positive_value());
        (self.config.cfl * self.grid.min_spacing() / speed).min(self.config.dt_max)
    }

    /// Advances one step of size `dt` from `theta`, reusing its flux.
    pub fn advance(&self, theta: &SpectralField<T>, flux: &Flux<T>, dt: T) -> Result<SpectralField<T>> {
        let n = self.grid.len();
        let mut out = theta.clone();
        match self.config.scheme {
            Scheme::IfEuler => {
                let coeffs = out.coeffs_mut();
                for p in 0..n {
                    let e = (-self.rates[p] * dt).exp();
                    coeffs[p] = (coeffs[p] - flux.divergence.coeffs()[p] * dt) * e;
                }
            }
            Scheme::Etdrk2 => {
                let mut stage = theta.clone();
                {
                    let a = stage.coeffs_mut();
                    for p in 0..n {
                        let z = -self.rates[p] * dt;
                        a[p] = a[p] * z.exp() - flux.divergence.coeffs()[p] * (dt * phi1(z));
                    }
                }
                let second = self.evaluate(&stage)?;
                let coeffs = out.coeffs_mut();
                for p in 0..n {
                    let z = -self.rates[p] * dt;
                    coeffs[p] = stage.coeffs()[p]
                        - (second.divergence.coeffs()[p] - flux.divergence.coeffs()[p])
                            * (dt * phi2(z));
                }
            }
        }
        if self.config.clip_negative {
            let phys = inverse_unchecked(&out).map(|v| v.max(T::zero()));
            out = forward_unchecked(&phys);
        }
        Ok(out)
    }

    /// One checked step: rejects `dt` above `dt_max` or the CFL limit.
    pub fn step(&self, theta: &SpectralField<T>, dt: T) -> Result<SpectralField<T>> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidTime(dt.to_f64_lossy()));
        }
        let flux = self.evaluate(theta)?;
        let limit = self.admissible_dt(flux.max_speed);
        if dt > limit * (T::one() + T::lit(1e-12)) {
            return Err(Error::StepTooLarge {
                dt: dt.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
            });
        }
        self.advance(theta, &flux, dt)
    }
}

/// `(e^z - 1)/z`, accurate near zero.
pub fn phi1<T: Scalar>(z: T) -> T {
    if z.abs() < T::lit(0.1) {
        // sum_{k>=0} z^k/(k+1)!
        let mut term = T::one();
        let mut sum = T::one();
        for k in 1..16 {
            term = term * z / T::lit((k + 1) as f64);
            sum = sum + term;
        }
        sum
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z)/z^2`, accurate near zero.
pub fn phi2<T: Scalar>(z: T) -> T {
    if z.abs() < T::lit(0.1) {
        // sum_{k>=0} z^k/(k+2)!
        let mut term = T::lit(0.5);
        let mut sum = term;
        for k in 1..16 {
            term = term * z / T::lit((k + 2) as f64);
            sum = sum + term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `div(u theta)` with `u = R theta`, dealiased per `config`.
pub fn nonlinear_term<T: Scalar>(
    theta: &SpectralField<T>,
    config: &SolverConfig<T>,
) -> Result<SpectralField<T>> {
    Ok(Stepper::new(theta.grid(), config)?.flux(theta)?.divergence)
}

/// One step of the configured scheme.
pub fn step<T: Scalar>(
    theta: &SpectralField<T>,
    dt: T,
    config: &SolverConfig<T>,
) -> Result<SpectralField<T>> {
    Stepper::new(theta.grid(), config)?.step(theta, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_functions_are_continuous_across_the_switch() {
        for &z in &[-0.0999999f64, -0.1000001, 0.0999999, 0.1000001] {
            let direct1 = z.exp_m1() / z;
            let direct2 = (z.exp_m1() - z) / (z * z);
            assert!((phi1(z) - direct1).abs() < 1e-13);
            assert!((phi2(z) - direct2).abs() < 1e-12);
        }
        assert_eq!(phi1(0.0f64), 1.0);
        assert_eq!(phi2(0.0f64), 0.5);
    }

    #[test]
    fn constant_has_zero_flux() {
        let g = Grid::<f64>::cube(2, 16, 6.0).unwrap();
        let mut f = SpectralField::zeros(&g, 1);
        f.coeffs_mut()[0] = Complex::new(2.0, 0.0);
        let n = nonlinear_term(&f, &SolverConfig::default()).unwrap();
        assert!(n.max_abs() < 1e-15);
    }

    #[test]
    fn step_rejects_large_dt() {
        let g = Grid::<f64>::cube(1, 32, 6.0).unwrap();
        let f = SpectralField::pure_mode(&g, &[1], 1.0, 0.0).unwrap();
        let mut cfg = SolverConfig::default();
        cfg.dt_max = 0.01;
        assert!(matches!(
            step(&f, 0.02, &cfg),
            Err(Error::StepTooLarge { .. })
        ));
        assert!(step(&f, 0.01, &cfg).is_ok());
    }
}
