use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::operators::require_mean_zero;
use crate::scalar::Scalar;

/// Discrete `L^p` norm `(sum |f|^p h^N)^(1/p)` of a scalar field;
/// `p = infinity` gives the grid maximum of `|f|`.
pub fn lp_norm<T: Scalar>(f: &PhysicalField<T>, p: T) -> Result<T> {
    f.require_scalar()?;
    if !(p >= T::one()) {
        return Err(Error::InvalidExponent(p.to_f64_lossy()));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let cell = f.grid().cell_volume();
    let sum: T = if p == T::one() {
        f.values().iter().map(|v| v.abs()).sum()
    } else if p == T::lit(2.0) {
        f.values().iter().map(|&v| v * v).sum()
    } else {
        f.values().iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((sum * cell).powf(T::one() / p))
}

/// `L^p` norm of `f - mean(f)`.
pub fn lp_norm_fluctuation<T: Scalar>(f: &PhysicalField<T>, p: T) -> Result<T> {
    let mean = f.mean();
    lp_norm(&f.map(|v| v - mean), p)
}

/// Homogeneous Sobolev norm `||Lambda^s f||_2`, the mean mode excluded.
///
/// Negative orders require a mean-zero field.
pub fn hs_norm<T: Scalar>(f: &SpectralField<T>, s: T) -> Result<T> {
    f.require_scalar()?;
    if !s.is_finite() {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s.to_f64_lossy(),
            reason: "order must be finite",
        });
    }
    if s < T::zero() {
        require_mean_zero(f)?;
    }
    let two_s = s + s;
    let sum: T = f
        .coeffs()
        .iter()
        .zip(f.grid().kmag())
        .skip(1)
        .map(|(z, &k)| {
            let w = if two_s == T::zero() { T::one() } else { k.powf(two_s) };
            w * z.norm_sqr()
        })
        .sum();
    Ok((sum * f.grid().volume()).sqrt())
}

/// `||Lambda^s f||_2^2` weighted per mode, i.e. `V sum_k w_k |c_k|^2`.
pub(crate) fn weighted_energy<T: Scalar>(f: &SpectralField<T>, weights: &[T]) -> T {
    let sum: T = f
        .coeffs()
        .iter()
        .zip(weights)
        .map(|(z, &w)| w * z.norm_sqr())
        .sum();
    sum * f.grid().volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::transform::forward_transform;

    #[test]
    fn constant_norms() {
        let g = Grid::<f64>::new(&[16, 8], &[2.0, 3.0]).unwrap();
        let f = PhysicalField::constant(&g, -2.0);
        for p in [1.0, 2.0, 3.5] {
            let expect = 2.0 * 6.0f64.powf(1.0 / p);
            assert!((lp_norm(&f, p).unwrap() - expect).abs() < 1e-12);
        }
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 2.0);
        assert!(matches!(lp_norm(&f, 0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn cosine_energy() {
        let l = 5.0;
        let g = Grid::<f64>::cube(1, 32, l).unwrap();
        let k = std::f64::consts::TAU * 3.0 / l;
        let f = PhysicalField::from_fn(&g, |x| (k * x[0]).cos());
        assert!((lp_norm(&f, 2.0).unwrap().powi(2) - l / 2.0).abs() < 1e-12);
        let hat = forward_transform(&f).unwrap();
        assert!((hs_norm(&hat, 1.5).unwrap() - k.powf(1.5) * (l / 2.0).sqrt()).abs() < 1e-10);
    }
}
