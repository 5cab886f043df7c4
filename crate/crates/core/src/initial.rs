//! Initial-data generators: smooth bumps and seeded band-limited fields.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::grid::Grid;
use crate::scalar::Scalar;
use crate::transform::inverse_unchecked;

/// `amplitude * exp(-|x - center|^2 / (2 sigma^2))`, with the minimal-image
/// displacement so the bump is periodic.
pub fn gaussian_bump<T: Scalar>(grid: &Grid<T>, amplitude: T, sigma: T, center: &[T]) -> Result<PhysicalField<T>> {
    if center.len() != grid.dim() {
        return Err(Error::ArityError {
            expected: grid.dim(),
            found: center.len(),
        });
    }
    if !(sigma > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma.to_f64_lossy(),
            reason: "must be positive",
        });
    }
    let lengths = grid.lengths().to_vec();
    let two_s2 = T::lit(2.0) * sigma * sigma;
    Ok(PhysicalField::from_fn(grid, |x| {
        let mut r2 = T::zero();
        for a in 0..x.len() {
            let l = lengths[a];
            let mut d = x[a] - center[a];
            d = d - l * (d / l).round();
            r2 = r2 + d * d;
        }
        amplitude * (-r2 / two_s2).exp()
    }))
}

/// Gaussian bump of height `amplitude` centered in the box.
pub fn centered_bump<T: Scalar>(grid: &Grid<T>, amplitude: T, sigma: T) -> Result<PhysicalField<T>> {
    gaussian_bump(grid, amplitude, sigma, &grid.center())
}

/// Nonpositive bump `-depth * cos^8(pi r / (2 radius))` for `r < radius`,
/// zero outside, centered in the box.
pub fn negative_bump<T: Scalar>(grid: &Grid<T>, depth: T, radius: T) -> Result<PhysicalField<T>> {
    let half_min = grid.lengths().iter().copied().fold(T::infinity(), T::min) / T::lit(2.0);
    if !(radius > T::zero() && radius <= half_min) {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius.to_f64_lossy(),
            reason: "must lie in (0, L_min/2]",
        });
    }
    let center = grid.center();
    let depth = depth.abs();
    let quarter_wave = T::lit(std::f64::consts::FRAC_PI_2) / radius;
    Ok(PhysicalField::from_fn(grid, |x| {
        let r = x.iter().zip(&center).map(|(&a, &c)| (a - c) * (a - c)).sum::<T>().sqrt();
        if r < radius {
            -depth * (quarter_wave * r).cos().powi(8)
        } else {
            T::zero()
        }
    }))
}

/// Three bumps of unequal heights and widths at fixed fractions of the box.
pub fn multi_bump<T: Scalar>(grid: &Grid<T>, amplitude: T, sigma: T) -> Result<PhysicalField<T>> {
    let dim = grid.dim();
    let placements: [(f64, f64, f64); 3] = [(0.3, 1.0, 1.0), (0.6, 0.7, 0.8), (0.45, 0.5, 1.3)];
    let mut total = PhysicalField::zeros(grid, 1);
    for (i, &(frac, height, width)) in placements.iter().enumerate() {
        let center: Vec<T> = (0..dim)
            .map(|a| {
                let f = if a % 2 == 0 { frac } else { 1.0 - frac + 0.05 * i as f64 };
                grid.lengths()[a] * T::lit(f)
            })
            .collect();
        let bump = gaussian_bump(grid, amplitude * T::lit(height), sigma * T::lit(width), &center)?;
        total = total.axpby(T::one(), &bump, T::one())?;
    }
    Ok(total)
}

/// Seeded real field with random Fourier coefficients on `|m~_i| <= band`,
/// amplitudes damped like `1 / (1 + |m~|^2)`, scaled to `max |f| = 1`.
///
/// The same seed and grid always give the same field.
pub fn random_smooth<T: Scalar>(grid: &Grid<T>, seed: u64, band: usize) -> Result<PhysicalField<T>> {
    let dim = grid.dim();
    for a in 0..dim {
        if band == 0 || band >= grid.points()[a] / 2 {
            return Err(Error::InvalidParameter {
                name: "band",
                value: band as f64,
                reason: "must lie in [1, M/2)",
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hat = SpectralField::zeros(grid, 1);
    let n = grid.len();
    for p in 0..n {
        let q = grid.mirror(p);
        if q < p {
            continue;
        }
        let bins = grid.signed_bins(p);
        if (0..dim).any(|a| bins[a].unsigned_abs() > band) {
            // Keep the generator in step regardless of the band.
            let _: (f64, f64) = (rng.gen(), rng.gen());
            continue;
        }
        let m2: f64 = (0..dim).map(|a| (bins[a] * bins[a]) as f64).sum();
        let damp = 1.0 / (1.0 + m2);
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        let z = if p == q {
            Complex::new(T::lit(re * damp), T::zero())
        } else {
            Complex::new(T::lit(re * damp), T::lit(im * damp))
        };
        hat.coeffs_mut()[p] = z;
        hat.coeffs_mut()[q] = z.conj();
    }
    let f = inverse_unchecked(&hat);
    let scale = f.max_abs();
    if scale == T::zero() {
        return Ok(f);
    }
    Ok(f.map(|v| v / scale))
}

/// Shifts `f` up so that its minimum equals `floor`.
pub fn lifted<T: Scalar>(f: &PhysicalField<T>, floor: T) -> PhysicalField<T> {
    let shift = floor - f.min();
    f.map(|v| v + shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_smooth_is_reproducible_and_band_limited() {
        let g = Grid::<f64>::cube(2, 32, 6.0).unwrap();
        let a = random_smooth(&g, 7, 4).unwrap();
        let b = random_smooth(&g, 7, 4).unwrap();
        let c = random_smooth(&g, 8, 4).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!((a.max_abs() - 1.0).abs() < 1e-15);
        let hat = crate::transform::forward_transform(&a).unwrap();
        for p in 0..g.len() {
            let bins = g.signed_bins(p);
            if bins[0].abs() > 4 || bins[1].abs() > 4 {
                assert!(hat.coeffs()[p].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn bump_peaks_at_center() {
        let g = Grid::<f64>::cube(2, 32, 8.0).unwrap();
        let f = centered_bump(&g, 2.0, 1.0).unwrap();
        assert_eq!(f.max(), 2.0);
        let n = negative_bump(&g, 2.0, 2.0).unwrap();
        assert_eq!(n.min(), -2.0);
        assert_eq!(n.max(), 0.0);
        assert_eq!(n.values()[0], 0.0);
        assert!(negative_bump(&g, 1.0, 5.0).is_err());
        assert!(multi_bump(&g, 1.0, 0.6).unwrap().min() >= 0.0);
    }
}
