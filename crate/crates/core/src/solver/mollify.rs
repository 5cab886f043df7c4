use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::PhysicalField;
use crate::scalar::Scalar;
use crate::transform::{forward_unchecked, inverse_unchecked};

/// Standard bump `exp(-1/(1-r^2))` on the unit ball.
fn bump<T: Scalar>(r2: T) -> T {
    if r2 < T::one() {
        (-T::one() / (T::one() - r2)).exp()
    } else {
        T::zero()
    }
}

/// Periodic convolution with the unit-mass bump of radius `radius`.
///
/// The kernel is sampled on the grid and normalized so that its discrete
/// integral is exactly one, which makes the mean invariant.
pub fn mollify<T: Scalar>(theta0: &PhysicalField<T>, radius: T) -> Result<PhysicalField<T>> {
    theta0.require_scalar()?;
    let grid = theta0.grid();
    let dim = grid.dim();
    let h_max = (0..dim).map(|a| grid.spacing(a)).fold(T::zero(), T::max);
    let min = T::lit(2.0) * h_max;
    if !(radius >= min) {
        return Err(Error::UnderResolvedMollifier {
            radius: radius.to_f64_lossy(),
            min: min.to_f64_lossy(),
        });
    }
    let l_min = grid.lengths().iter().copied().fold(T::infinity(), T::min);
    if radius >= l_min / T::lit(2.0) {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius.to_f64_lossy(),
            reason: "mollifier must fit inside half the box",
        });
    }

    let mut kernel = Vec::with_capacity(grid.len());
    for p in 0..grid.len() {
        let idx = grid.unravel(p);
        let mut r2 = T::zero();
        for a in 0..dim {
            let m = grid.points()[a];
            let j = if idx[a] <= m / 2 { idx[a] as f64 } else { idx[a] as f64 - m as f64 };
            let d = T::lit(j) * grid.spacing(a) / radius;
            r2 = r2 + d * d;
        }
        kernel.push(bump(r2));
    }
    let mass: T = kernel.iter().copied().sum::<T>() * grid.cell_volume();
    let kernel = PhysicalField::from_values(grid, 1, kernel.into_iter().map(|v| v / mass).collect())?;

    let k_hat = forward_unchecked(&kernel);
    let mut out = forward_unchecked(theta0);
    let mean = out.coeffs()[0];
    let volume = grid.volume();
    for (z, &w) in out.coeffs_mut().iter_mut().zip(k_hat.coeffs()) {
        *z = *z * w * Complex::new(volume, T::zero());
    }
    out.coeffs_mut()[0] = mean;
    Ok(inverse_unchecked(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn constants_are_unchanged() {
        let g = Grid::<f64>::cube(2, 32, 4.0).unwrap();
        let f = PhysicalField::constant(&g, 3.0);
        let out = mollify(&f, 0.5).unwrap();
        assert!(out.values().iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_small_radius() {
        let g = Grid::<f64>::cube(1, 32, 4.0).unwrap();
        let f = PhysicalField::constant(&g, 1.0);
        assert!(matches!(
            mollify(&f, 0.2),
            Err(Error::UnderResolvedMollifier { .. })
        ));
        assert!(mollify(&f, 0.25).is_ok());
    }
}
