//! Fourier-multiplier operators: fractional Laplacian, Riesz transform and
//! potential, gradient, divergence and the dissipative semigroup.
//!
//! Odd symbols (gradient, Riesz) vanish on the Nyquist plane of their axis:
//! that bin is its own mirror, so any imaginary symbol there would break the
//! Hermitian symmetry of a real field.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{Grid, MAX_DIM};
use crate::scalar::Scalar;

/// What a multiplier does with the `k = 0` coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroModePolicy {
    /// Output zero mode is 0.
    Zero,
    /// Output zero mode equals the input.
    Identity,
    /// Input zero mode must vanish (mean-zero field), output is 0.
    Error,
}

/// Wavevector data handed to a symbol.
#[derive(Clone, Copy, Debug)]
pub struct Mode<T: Scalar> {
    pub k: [T; MAX_DIM],
    /// `k` with the Nyquist component zeroed, for odd symbols.
    pub k_odd: [T; MAX_DIM],
    pub kmag: T,
}

/// Calls `f(flat, mode)` for every Fourier mode of `grid`.
pub fn for_each_mode<T: Scalar>(grid: &Grid<T>, mut f: impl FnMut(usize, Mode<T>)) {
    let dim = grid.dim();
    let kmag = grid.kmag();
    for (p, &km) in kmag.iter().enumerate() {
        let idx = grid.unravel(p);
        let mut k = [T::zero(); MAX_DIM];
        let mut k_odd = [T::zero(); MAX_DIM];
        for a in 0..dim {
            k[a] = grid.k_axis(a)[idx[a]];
            k_odd[a] = grid.k_odd_axis(a)[idx[a]];
        }
        f(
            p,
            Mode {
                k,
                k_odd,
                kmag: km,
            },
        );
    }
}

/// Diagonal Fourier operator `out(k) = symbol(k) * in(k)`.
pub struct Multiplier<T: Scalar> {
    symbol: Box<dyn Fn(&Mode<T>) -> Complex<T> + Send + Sync>,
    zero_mode: ZeroModePolicy,
}

impl<T: Scalar> Multiplier<T> {
    pub fn new(
        symbol: impl Fn(&Mode<T>) -> Complex<T> + Send + Sync + 'static,
        zero_mode: ZeroModePolicy,
    ) -> Self {
        Self {
            symbol: Box::new(symbol),
            zero_mode,
        }
    }

    pub fn zero_mode(&self) -> ZeroModePolicy {
        self.zero_mode
    }

    /// Symbol table over all modes of `grid`, zero-mode policy applied.
    pub fn table(&self, grid: &Grid<T>) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        for_each_mode(grid, |p, mode| out[p] = (self.symbol)(&mode));
        out[0] = match self.zero_mode {
            ZeroModePolicy::Identity => Complex::new(T::one(), T::zero()),
            ZeroModePolicy::Zero | ZeroModePolicy::Error => Complex::new(T::zero(), T::zero()),
        };
        out
    }

    /// Applies the multiplier to every component of `f`.
    pub fn apply(&self, f: &SpectralField<T>) -> Result<SpectralField<T>> {
        if self.zero_mode == ZeroModePolicy::Error {
            require_mean_zero(f)?;
        }
        let table = self.table(f.grid());
        Ok(apply_table(f, &table))
    }
}

/// Multiplies every component of `f` by a precomputed symbol table.
pub fn apply_table<T: Scalar>(f: &SpectralField<T>, table: &[Complex<T>]) -> SpectralField<T> {
    let n = f.grid().len();
    debug_assert_eq!(table.len(), n);
    let mut out = f.clone();
    for chunk in out.coeffs_mut().chunks_mut(n) {
        for (z, &s) in chunk.iter_mut().zip(table) {
            *z = *z * s;
        }
    }
    debug_assert!(hermitian_preserved(f, &out));
    out
}

/// Same as [`apply_table`] for a real symbol.
pub fn apply_real_table<T: Scalar>(f: &SpectralField<T>, table: &[T]) -> SpectralField<T> {
    let n = f.grid().len();
    debug_assert_eq!(table.len(), n);
    let mut out = f.clone();
    for chunk in out.coeffs_mut().chunks_mut(n) {
        for (z, &s) in chunk.iter_mut().zip(table) {
            *z = *z * s;
        }
    }
    out
}

fn hermitian_preserved<T: Scalar>(input: &SpectralField<T>, out: &SpectralField<T>) -> bool {
    let scale = input.max_abs().max(T::min_positive_value());
    let tol = T::lit(1e-8) * scale;
    input.hermitian_asymmetry() > tol || out.hermitian_asymmetry() <= tol * T::lit(1e6)
}

/// Mean-zero check used by negative-order operators.
pub fn require_mean_zero<T: Scalar>(f: &SpectralField<T>) -> Result<()> {
    let n = f.grid().len();
    let scale = f.max_abs().max(T::min_positive_value());
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * scale;
    for c in 0..f.components() {
        let m = f.coeffs()[c * n];
        if m.norm() > tol {
            return Err(Error::MeanNotZero {
                mean: m.re.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// `|k|^s`, with `0^0 = 1`.
fn kpow<T: Scalar>(kmag: T, s: T) -> T {
    if s == T::zero() {
        T::one()
    } else if kmag == T::zero() {
        T::zero()
    } else {
        kmag.powf(s)
    }
}

/// Symbol table of `|k|^s`; the zero mode is 1 for `s = 0` and 0 otherwise.
pub fn fractional_symbol<T: Scalar>(grid: &Grid<T>, s: T) -> Vec<T> {
    grid.kmag().iter().map(|&k| kpow(k, s)).collect()
}

/// `Lambda^s = (-Laplacian)^{s/2}`, symbol `|k|^s`.
///
/// Negative orders require a mean-zero input; `s` must be at least `-N/2`.
pub fn fractional_laplacian<T: Scalar>(f: &SpectralField<T>, s: T) -> Result<SpectralField<T>> {
    let dim = T::from_usize_lossy(f.grid().dim());
    if !s.is_finite() || s < -dim / T::lit(2.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s.to_f64_lossy(),
            reason: "order must be finite and >= -N/2",
        });
    }
    if s < T::zero() {
        require_mean_zero(f)?;
    }
    Ok(apply_real_table(f, &fractional_symbol(f.grid(), s)))
}

/// Riesz potential `Lambda^{-delta}`, `0 < delta < N`, on mean-zero fields.
pub fn riesz_potential<T: Scalar>(f: &SpectralField<T>, delta: T) -> Result<SpectralField<T>> {
    let dim = T::from_usize_lossy(f.grid().dim());
    if !(delta > T::zero() && delta < dim) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta.to_f64_lossy(),
            reason: "Riesz potential order must lie in (0, N)",
        });
    }
    require_mean_zero(f)?;
    Ok(apply_real_table(f, &fractional_symbol(f.grid(), -delta)))
}

/// Symbol tables `-i k_j / |k|` of the Riesz transform, one per axis.
pub fn riesz_symbols<T: Scalar>(grid: &Grid<T>) -> Vec<Vec<Complex<T>>> {
    (0..grid.dim())
        .map(|j| {
            Multiplier::new(
                move |m: &Mode<T>| {
                    if m.kmag == T::zero() {
                        Complex::new(T::zero(), T::zero())
                    } else {
                        Complex::new(T::zero(), -m.k_odd[j] / m.kmag)
                    }
                },
                ZeroModePolicy::Zero,
            )
            .table(grid)
        })
        .collect()
}

/// Symbol tables `i k_j`, one per axis.
pub fn gradient_symbols<T: Scalar>(grid: &Grid<T>) -> Vec<Vec<Complex<T>>> {
    (0..grid.dim())
        .map(|j| {
            Multiplier::new(
                move |m: &Mode<T>| Complex::new(T::zero(), m.k_odd[j]),
                ZeroModePolicy::Zero,
            )
            .table(grid)
        })
        .collect()
}

fn vector_from_tables<T: Scalar>(
    f: &SpectralField<T>,
    tables: &[Vec<Complex<T>>],
) -> SpectralField<T> {
    let grid = f.grid();
    let n = grid.len();
    let src = f.component(0);
    let mut coeffs = Vec::with_capacity(tables.len() * n);
    for t in tables {
        coeffs.extend(src.iter().zip(t).map(|(&z, &s)| z * s));
    }
    SpectralField::from_coeffs_unchecked(grid, tables.len(), coeffs)
}

/// Riesz transform of a scalar field: component `j` has symbol `-i k_j/|k|`
/// and the zero mode is mapped to 0.
pub fn riesz_transform<T: Scalar>(f: &SpectralField<T>) -> Result<SpectralField<T>> {
    f.require_scalar()?;
    Ok(vector_from_tables(f, &riesz_symbols(f.grid())))
}

/// Gradient of a scalar field, symbol `i k_j`.
pub fn gradient<T: Scalar>(f: &SpectralField<T>) -> Result<SpectralField<T>> {
    f.require_scalar()?;
    Ok(vector_from_tables(f, &gradient_symbols(f.grid())))
}

/// Divergence of an N-component field, `sum_j i k_j F_j`.
pub fn divergence<T: Scalar>(f: &SpectralField<T>) -> Result<SpectralField<T>> {
    let grid = f.grid();
    if f.components() != grid.dim() {
        return Err(Error::ArityError {
            expected: grid.dim(),
            found: f.components(),
        });
    }
    let n = grid.len();
    let tables = gradient_symbols(grid);
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    for (j, t) in tables.iter().enumerate() {
        for ((o, &z), &s) in out.iter_mut().zip(f.component(j)).zip(t) {
            *o = *o + z * s;
        }
    }
    Ok(SpectralField::from_coeffs_unchecked(grid, 1, out))
}

/// Decay rate `nu |k|^alpha + eps |k|^2` of each mode under the linear part.
pub fn dissipation_rates<T: Scalar>(grid: &Grid<T>, alpha: T, nu: T, eps: T) -> Vec<T> {
    grid.kmag()
        .iter()
        .map(|&k| nu * kpow(k, alpha) + eps * k * k)
        .collect()
}

/// Factor table `exp(-(nu |k|^alpha + eps |k|^2) t)`.
pub fn semigroup_factors<T: Scalar>(grid: &Grid<T>, t: T, alpha: T, nu: T, eps: T) -> Vec<T> {
    dissipation_rates(grid, alpha, nu, eps)
        .into_iter()
        .map(|r| (-r * t).exp())
        .collect()
}

/// Exact linear evolution over time `t`: `exp(-(nu |k|^alpha + eps |k|^2) t)`.
pub fn semigroup_apply<T: Scalar>(
    f: &SpectralField<T>,
    t: T,
    alpha: T,
    nu: T,
    eps: T,
) -> Result<SpectralField<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidTime(t.to_f64_lossy()));
    }
    if !(nu >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "nu",
            value: nu.to_f64_lossy(),
            reason: "must be non-negative",
        });
    }
    if !(eps >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps.to_f64_lossy(),
            reason: "must be non-negative",
        });
    }
    if !(alpha >= T::zero() && alpha <= T::lit(2.0)) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.to_f64_lossy(),
            reason: "must lie in [0, 2]",
        });
    }
    Ok(apply_real_table(
        f,
        &semigroup_factors(f.grid(), t, alpha, nu, eps),
    ))
}
