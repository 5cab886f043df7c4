//! Physical-space samples and Fourier coefficients on a [`Grid`].

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{Grid, MAX_DIM};
use crate::scalar::Scalar;

/// Real samples of a scalar (1 component) or vector (N components) field.
///
/// Values are stored component-major, each component row-major over the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField<T: Scalar> {
    grid: Grid<T>,
    components: usize,
    values: Vec<T>,
}

impl<T: Scalar> PhysicalField<T> {
    pub fn from_values(grid: &Grid<T>, components: usize, values: Vec<T>) -> Result<Self> {
        if components == 0 {
            return Err(Error::ArityError {
                expected: 1,
                found: 0,
            });
        }
        if values.len() != components * grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} component(s) on {} points",
                values.len(),
                components,
                grid.len()
            )));
        }
        let bad = values.iter().filter(|v| !v.is_finite()).count();
        if bad > 0 {
            return Err(Error::InvalidField {
                count: bad,
                total: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            components,
            values,
        })
    }

    pub(crate) fn from_values_unchecked(grid: &Grid<T>, components: usize, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), components * grid.len());
        Self {
            grid: grid.clone(),
            components,
            values,
        }
    }

    pub fn zeros(grid: &Grid<T>, components: usize) -> Self {
        Self::from_values_unchecked(grid, components, vec![T::zero(); components * grid.len()])
    }

    pub fn constant(grid: &Grid<T>, value: T) -> Self {
        Self::from_values_unchecked(grid, 1, vec![value; grid.len()])
    }

    /// Samples a scalar function of position.
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(&[T]) -> T) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|p| {
                let x = grid.coordinate(p);
                f(&x[..dim])
            })
            .collect();
        Self::from_values_unchecked(grid, 1, values)
    }

    /// Stacks scalar fields into a vector field.
    pub fn stack(parts: &[PhysicalField<T>]) -> Result<Self> {
        let first = parts.first().ok_or(Error::ArityError {
            expected: 1,
            found: 0,
        })?;
        let mut values = Vec::with_capacity(parts.len() * first.grid.len());
        for p in parts {
            if p.grid != first.grid || p.components != 1 {
                return Err(Error::GridMismatch);
            }
            values.extend_from_slice(&p.values);
        }
        Ok(Self::from_values_unchecked(&first.grid, parts.len(), values))
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[T] {
        let n = self.grid.len();
        &self.values[c * n..(c + 1) * n]
    }

    /// Copies out one component as a scalar field.
    pub fn component_field(&self, c: usize) -> Self {
        Self::from_values_unchecked(&self.grid, 1, self.component(c).to_vec())
    }

    pub fn require_scalar(&self) -> Result<()> {
        if self.components != 1 {
            return Err(Error::ArityError {
                expected: 1,
                found: self.components,
            });
        }
        Ok(())
    }

    /// Applies `f` pointwise, producing a new field of the same shape.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_values_unchecked(
            &self.grid,
            self.components,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_values_unchecked(
            &self.grid,
            self.components,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        ))
    }

    /// Midpoint integral of each component, `sum f h^N`.
    pub fn integral(&self, c: usize) -> T {
        self.component(c).iter().copied().sum::<T>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> T {
        self.component(0).iter().copied().sum::<T>() / T::from_usize_lossy(self.grid.len())
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Pointwise Euclidean magnitude of a vector field, sup over the grid.
    pub fn max_magnitude(&self) -> T {
        let n = self.grid.len();
        (0..n)
            .map(|p| {
                (0..self.components)
                    .map(|c| {
                        let v = self.values[c * n + p];
                        v * v
                    })
                    .sum::<T>()
                    .sqrt()
            })
            .fold(T::zero(), T::max)
    }

    /// Largest magnitude over points within distance `margin * L_i` of any
    /// box face, used to verify compact support.
    pub fn boundary_max_abs(&self, margin: T) -> T {
        let grid = &self.grid;
        let dim = grid.dim();
        let mut out = T::zero();
        for p in 0..grid.len() {
            let x = grid.coordinate(p);
            let near = (0..dim).any(|a| {
                let l = grid.lengths()[a];
                x[a] < margin * l || x[a] > (T::one() - margin) * l
            });
            if near {
                for c in 0..self.components {
                    out = out.max(self.component(c)[p].abs());
                }
            }
        }
        out
    }
}

/// Fourier coefficients under the mean-normalized convention: the forward
/// transform divides by the number of points, so `coeff(0)` is the spatial
/// mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T: Scalar> {
    grid: Grid<T>,
    components: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn from_coeffs(grid: &Grid<T>, components: usize, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if components == 0 || coeffs.len() != components * grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} coefficients for {} component(s) on {} modes",
                coeffs.len(),
                components,
                grid.len()
            )));
        }
        Ok(Self::from_coeffs_unchecked(grid, components, coeffs))
    }

    pub(crate) fn from_coeffs_unchecked(
        grid: &Grid<T>,
        components: usize,
        coeffs: Vec<Complex<T>>,
    ) -> Self {
        debug_assert_eq!(coeffs.len(), components * grid.len());
        Self {
            grid: grid.clone(),
            components,
            coeffs,
        }
    }

    pub fn zeros(grid: &Grid<T>, components: usize) -> Self {
        Self::from_coeffs_unchecked(
            grid,
            components,
            vec![Complex::new(T::zero(), T::zero()); components * grid.len()],
        )
    }

    /// Real single mode `a cos(k.x + phase)` placed on the bin pair `+-bins`.
    pub fn pure_mode(grid: &Grid<T>, bins: &[isize], amplitude: T, phase: T) -> Result<Self> {
        if bins.len() != grid.dim() {
            return Err(Error::ArityError {
                expected: grid.dim(),
                found: bins.len(),
            });
        }
        let mut idx = [0usize; MAX_DIM];
        let mut neg = [0usize; MAX_DIM];
        for a in 0..grid.dim() {
            let m = grid.points()[a] as isize;
            if bins[a] <= -m / 2 || bins[a] >= m / 2 {
                return Err(Error::InvalidGrid(format!(
                    "bin {} on axis {a} is outside the open band (-{}, {})",
                    bins[a],
                    m / 2,
                    m / 2
                )));
            }
            idx[a] = bins[a].rem_euclid(m) as usize;
            neg[a] = (-bins[a]).rem_euclid(m) as usize;
        }
        let mut f = Self::zeros(grid, 1);
        let half = amplitude / T::lit(2.0);
        let p = grid.ravel(&idx[..grid.dim()]);
        let q = grid.ravel(&neg[..grid.dim()]);
        if p == q {
            f.coeffs[p] = Complex::new(amplitude * phase.cos(), T::zero());
        } else {
            f.coeffs[p] = Complex::from_polar(half, phase);
            f.coeffs[q] = Complex::from_polar(half, -phase);
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex<T>] {
        let n = self.grid.len();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn component_field(&self, c: usize) -> Self {
        Self::from_coeffs_unchecked(&self.grid, 1, self.component(c).to_vec())
    }

    pub fn require_scalar(&self) -> Result<()> {
        if self.components != 1 {
            return Err(Error::ArityError {
                expected: 1,
                found: self.components,
            });
        }
        Ok(())
    }

    /// Spatial mean (the zero mode of component 0).
    pub fn mean(&self) -> Complex<T> {
        self.coeffs[0]
    }

    /// Copy with the zero mode of every component removed.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        let n = self.grid.len();
        for c in 0..self.components {
            out.coeffs[c * n] = Complex::new(T::zero(), T::zero());
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_coeffs_unchecked(
            &self.grid,
            self.components,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&x, &y)| x * a + y * b)
                .collect(),
        ))
    }

    pub fn scale(&self, a: T) -> Self {
        Self::from_coeffs_unchecked(
            &self.grid,
            self.components,
            self.coeffs.iter().map(|&z| z * a).collect(),
        )
    }

    /// Squared L2 norm of the represented field, `V * sum |c_k|^2` (Parseval).
    pub fn l2_norm_sq(&self) -> T {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<T>() * self.grid.volume()
    }

    /// Largest `|c(k) - conj(c(-k))|` over all modes and components.
    pub fn hermitian_asymmetry(&self) -> T {
        let n = self.grid.len();
        let mut worst = T::zero();
        for c in 0..self.components {
            let comp = self.component(c);
            for p in 0..n {
                let q = self.grid.mirror(p);
                worst = worst.max((comp[p] - comp[q].conj()).norm());
            }
        }
        worst
    }

    /// Replaces each coefficient by `(c(k) + conj(c(-k))) / 2`.
    pub fn symmetrized(&self) -> Self {
        let n = self.grid.len();
        let half = T::lit(0.5);
        let mut out = self.clone();
        for c in 0..self.components {
            let comp = self.component(c);
            for p in 0..n {
                let q = self.grid.mirror(p);
                out.coeffs[c * n + p] = (comp[p] + comp[q].conj()) * half;
            }
        }
        out
    }

    /// Zeroes modes with `|m~_i| > fraction * M_i / 2` on any axis.
    pub fn truncated(&self, fraction: T) -> Self {
        let mut out = self.clone();
        out.truncate_in_place(fraction);
        out
    }

    pub fn truncate_in_place(&mut self, fraction: T) {
        let mask = dealias_mask(&self.grid, fraction);
        let n = self.grid.len();
        for c in 0..self.components {
            for (z, &keep) in self.coeffs[c * n..(c + 1) * n].iter_mut().zip(&mask) {
                if !keep {
                    *z = Complex::new(T::zero(), T::zero());
                }
            }
        }
    }

    /// Fraction of energy (`sum |c_k|^2` over non-mean modes) carried by
    /// modes whose normalized bin exceeds `cutoff`. Zero for a constant field.
    pub fn tail_energy_fraction(&self, cutoff: T) -> T {
        let mut total = T::zero();
        let mut tail = T::zero();
        for c in 0..self.components {
            let comp = self.component(c);
            for (p, z) in comp.iter().enumerate().skip(1) {
                let e = z.norm_sqr();
                total = total + e;
                if self.grid.normalized_bin(p) > cutoff {
                    tail = tail + e;
                }
            }
        }
        if total > T::zero() {
            tail / total
        } else {
            T::zero()
        }
    }
}

/// Modes kept by the truncation rule `|m~_i| <= fraction * M_i / 2`.
pub fn dealias_mask<T: Scalar>(grid: &Grid<T>, fraction: T) -> Vec<bool> {
    let dim = grid.dim();
    let limits: Vec<T> = (0..dim)
        .map(|a| fraction * T::lit(grid.points()[a] as f64 / 2.0))
        .collect();
    (0..grid.len())
        .map(|p| {
            let bins = grid.signed_bins(p);
            (0..dim).all(|a| T::lit(bins[a].unsigned_abs() as f64) <= limits[a])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_values() {
        let g = Grid::<f64>::cube(1, 8, 1.0).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(
            PhysicalField::from_values(&g, 1, v),
            Err(Error::InvalidField { count: 1, .. })
        ));
        assert!(PhysicalField::from_values(&g, 1, vec![0.0; 7]).is_err());
    }

    #[test]
    fn pure_mode_is_hermitian() {
        let g = Grid::<f64>::new(&[8, 12], &[1.0, 2.0]).unwrap();
        let f = SpectralField::pure_mode(&g, &[2, -3], 1.5, 0.3).unwrap();
        assert!(f.hermitian_asymmetry() < 1e-15);
        assert!(SpectralField::pure_mode(&g, &[4, 0], 1.0, 0.0).is_err());
    }

    #[test]
    fn dealias_mask_two_thirds() {
        let g = Grid::<f64>::cube(1, 12, 1.0).unwrap();
        let mask = dealias_mask(&g, 2.0 / 3.0);
        let kept: Vec<isize> = (0..12)
            .filter(|&p| mask[p])
            .map(|p| g.signed_bins(p)[0])
            .collect();
        assert_eq!(kept, vec![0, 1, 2, 3, 4, -4, -3, -2, -1]);
    }

    #[test]
    fn tail_fraction_of_constant_is_zero() {
        let g = Grid::<f64>::cube(2, 8, 1.0).unwrap();
        let mut f = SpectralField::zeros(&g, 1);
        f.coeffs_mut()[0] = Complex::new(3.0, 0.0);
        assert_eq!(f.tail_energy_fraction(2.0 / 3.0), 0.0);
    }
}
