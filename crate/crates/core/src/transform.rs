//! Forward and inverse N-dimensional FFTs.
//!
//! The forward transform carries the `1 / prod(M_i)` factor, so `coeff(0)`
//! equals the spatial mean and a unit cosine maps to two coefficients of
//! magnitude 1/2.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::Fft;

use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// Relative Hermitian-symmetry tolerance accepted by [`inverse_transform`].
pub fn hermitian_tolerance<T: Scalar>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

pub fn forward_transform<T: Scalar>(f: &PhysicalField<T>) -> Result<SpectralField<T>> {
    let bad = f.values().iter().filter(|v| !v.is_finite()).count();
    if bad > 0 {
        return Err(Error::InvalidField {
            count: bad,
            total: f.values().len(),
        });
    }
    Ok(forward_unchecked(f))
}

pub(crate) fn forward_unchecked<T: Scalar>(f: &PhysicalField<T>) -> SpectralField<T> {
    let grid = f.grid();
    let n = grid.len();
    let scale = T::one() / T::from_usize_lossy(n);
    let mut coeffs: Vec<Complex<T>> = f
        .values()
        .iter()
        .map(|&v| Complex::new(v * scale, T::zero()))
        .collect();
    for chunk in coeffs.chunks_mut(n) {
        transform_in_place(grid, chunk, Direction::Forward);
    }
    SpectralField::from_coeffs_unchecked(grid, f.components(), coeffs)
}

/// Inverse transform; rejects spectra whose Hermitian asymmetry exceeds
/// [`hermitian_tolerance`] relative to the largest coefficient.
pub fn inverse_transform<T: Scalar>(f: &SpectralField<T>) -> Result<PhysicalField<T>> {
    let asym = f.hermitian_asymmetry();
    let tol = hermitian_tolerance::<T>() * f.max_abs().max(T::min_positive_value());
    if asym > tol {
        return Err(Error::HermitianViolation {
            asymmetry: asym.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    Ok(inverse_unchecked(f))
}

/// Inverse transform after projecting onto the Hermitian-symmetric part.
pub fn inverse_transform_symmetrized<T: Scalar>(f: &SpectralField<T>) -> PhysicalField<T> {
    inverse_unchecked(&f.symmetrized())
}

/// Inverse transform keeping the real part without a symmetry check.
pub(crate) fn inverse_unchecked<T: Scalar>(f: &SpectralField<T>) -> PhysicalField<T> {
    let grid = f.grid();
    let n = grid.len();
    let mut buf = f.coeffs().to_vec();
    for chunk in buf.chunks_mut(n) {
        transform_in_place(grid, chunk, Direction::Inverse);
    }
    let values = buf.into_iter().map(|z| z.re).collect();
    PhysicalField::from_values_unchecked(grid, f.components(), values)
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

/// Unnormalized in-place transform of one component along every axis.
fn transform_in_place<T: Scalar>(grid: &Grid<T>, data: &mut [Complex<T>], dir: Direction) {
    let points = grid.points();
    let dim = points.len();
    for axis in (0..dim).rev() {
        let plan = grid.plan(axis);
        let fft: &dyn Fft<T> = match dir {
            Direction::Forward => plan.forward.as_ref(),
            Direction::Inverse => plan.inverse.as_ref(),
        };
        let m = points[axis];
        let stride: usize = points[axis + 1..].iter().product();
        let block = m * stride;
        if stride == 1 {
            // contiguous lines
            let lines_per_task = (4096 / m).max(1);
            data.par_chunks_mut(m * lines_per_task).for_each(|chunk| {
                let mut scratch =
                    vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(chunk, &mut scratch);
            });
        } else {
            data.par_chunks_mut(block).for_each(|blk| {
                strided_block(fft, blk, m, stride);
            });
        }
    }
}

/// Transforms the `stride` lines of length `m` interleaved in `blk`.
fn strided_block<T: Scalar>(fft: &dyn Fft<T>, blk: &mut [Complex<T>], m: usize, stride: usize) {
    let mut lines = vec![Complex::new(T::zero(), T::zero()); m * stride];
    for j in 0..m {
        for s in 0..stride {
            lines[s * m + j] = blk[j * stride + s];
        }
    }
    lines.par_chunks_mut(m * (4096 / m).max(1)).for_each(|chunk| {
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
    for j in 0..m {
        for s in 0..stride {
            blk[j * stride + s] = lines[s * m + j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Direct O(M^2) DFT with the same normalization, as an oracle.
    fn brute_force_dft(x: &[f64]) -> Vec<Complex<f64>> {
        let m = x.len();
        (0..m)
            .map(|k| {
                let mut acc = Complex::new(0.0, 0.0);
                for (j, &v) in x.iter().enumerate() {
                    let ang = -2.0 * PI * (k * j) as f64 / m as f64;
                    acc += Complex::from_polar(v, ang);
                }
                acc / m as f64
            })
            .collect()
    }

    fn brute_force_idft(c: &[Complex<f64>]) -> Vec<f64> {
        let m = c.len();
        (0..m)
            .map(|j| {
                let mut acc = Complex::new(0.0, 0.0);
                for (k, &z) in c.iter().enumerate() {
                    let ang = 2.0 * PI * (k * j) as f64 / m as f64;
                    acc += z * Complex::from_polar(1.0, ang);
                }
                acc.re
            })
            .collect()
    }

    #[test]
    fn constant_maps_to_mean() {
        let g = Grid::<f64>::cube(2, 8, 3.0).unwrap();
        let f = PhysicalField::constant(&g, 2.5);
        let s = forward_transform(&f).unwrap();
        assert!((s.coeffs()[0].re - 2.5).abs() < 1e-15);
        assert!(s.coeffs()[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn cosine_maps_to_half_amplitude_pair() {
        let l = 5.0;
        let g = Grid::<f64>::cube(1, 16, l).unwrap();
        let f = PhysicalField::from_fn(&g, |x| (2.0 * PI * x[0] / l).cos());
        let s = forward_transform(&f).unwrap();
        for (p, z) in s.coeffs().iter().enumerate() {
            let expect = if p == 1 || p == 15 { 0.5 } else { 0.0 };
            assert!((z.norm() - expect).abs() < 1e-14, "bin {p}: {z}");
        }
    }

    #[test]
    fn matches_brute_force_dft_on_eight_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Grid::<f64>::cube(1, 8, 1.0).unwrap();
        let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = forward_transform(&PhysicalField::from_values(&g, 1, x.clone()).unwrap()).unwrap();
        for (a, b) in s.coeffs().iter().zip(brute_force_dft(&x)) {
            assert!((a - b).norm() < 1e-13);
        }
        let back = inverse_transform(&s).unwrap();
        for (a, b) in back.values().iter().zip(brute_force_idft(s.coeffs())) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn inverse_of_zero_and_of_pure_pair() {
        let g = Grid::<f64>::cube(1, 32, 2.0 * PI).unwrap();
        let z = inverse_transform(&SpectralField::zeros(&g, 1)).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let s = SpectralField::pure_mode(&g, &[3], 1.0, 0.0).unwrap();
        let f = inverse_transform(&s).unwrap();
        for p in 0..g.len() {
            let x = g.coordinate(p)[0];
            assert!((f.values()[p] - (3.0 * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_asymmetric_spectrum() {
        let g = Grid::<f64>::cube(1, 16, 1.0).unwrap();
        let mut s = SpectralField::zeros(&g, 1);
        s.coeffs_mut()[2] = Complex::new(1.0, 0.0);
        assert!(matches!(
            inverse_transform(&s),
            Err(Error::HermitianViolation { .. })
        ));
        let f = inverse_transform_symmetrized(&s);
        assert!((f.values()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn round_trip_multi_dimensional() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (pts, len) in [
            (vec![8usize], vec![1.0]),
            (vec![16, 10], vec![1.0, 2.0]),
            (vec![8, 12, 10], vec![1.0, 1.5, 2.0]),
        ] {
            let g = Grid::<f64>::new(&pts, &len).unwrap();
            let x: Vec<f64> = (0..2 * g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = PhysicalField::from_values(&g, 2, x).unwrap();
            let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
            let err = back
                .values()
                .iter()
                .zip(f.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-13, "{pts:?}: {err}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let g = Grid::<f32>::cube(2, 16, 1.0).unwrap();
        let f = PhysicalField::from_fn(&g, |x| (x[0] * 6.0).sin() + x[1]);
        let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
        let err = back
            .values()
            .iter()
            .zip(f.values())
            .fold(0.0f32, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-5);
    }
}
