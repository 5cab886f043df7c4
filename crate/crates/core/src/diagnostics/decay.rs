//! Algebraic decay-rate fitting and the closed-form exponents it is compared
//! against.

use crate::diagnostics::series::DiagnosticsSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimum number of samples inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayQuantity {
    /// Mean-removed `L^2` norm.
    L2,
    /// Mean-removed `L^p` norm; only `p = 2` and `p = 4` are recorded.
    Lp(f64),
    /// `||grad theta||_2`.
    GradL2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// Fitted `gamma` in `q(t) ~ (1 + t)^(-gamma)`.
    pub exponent: f64,
    /// Coefficient of determination of the log-log fit.
    pub r2: f64,
    /// Closed-form exponent for the quantity (the small loss parameter set to 0).
    pub expected: f64,
    pub samples: usize,
    /// `true` when `N <= 2` or `alpha` outside `(1, 2]`.
    pub outside_hypotheses: bool,
    /// `true` when log q is better explained linearly in `t` than in `log(1+t)`.
    pub exponential_like: bool,
    pub notes: Vec<String>,
}

/// Expected exponent of the mean-removed `L^2` norm and of `||grad theta||_2`:
/// `((N + 2 - 2 alpha) / alpha - loss) / 2`.
pub fn expected_l2_exponent(dim: usize, alpha: f64, loss: f64) -> f64 {
    0.5 * ((dim as f64 + 2.0 - 2.0 * alpha) / alpha - loss)
}

/// Expected exponent of the `L^p` norm: `N (p - 2) / (2 p alpha)`.
pub fn expected_lp_exponent(dim: usize, alpha: f64, p: f64) -> f64 {
    dim as f64 * (p - 2.0) / (2.0 * p * alpha)
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (a, b, r2)
}

/// Fits `log q = c - gamma log(1 + t)` over samples with `t` in `window`.
///
/// Non-positive samples are skipped. Nothing is asserted; the result
/// carries the closed-form exponent alongside the fitted one.
pub fn decay_fit_samples(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    dim: usize,
    alpha: f64,
    quantity: DecayQuantity,
) -> Result<DecayFit> {
    let picked: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, &v)| t >= window.0 && t <= window.1 && v > 0.0 && v.is_finite())
        .map(|(&t, &v)| (t, v))
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            samples: picked.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    let logt: Vec<f64> = picked.iter().map(|(t, _)| (1.0 + t).ln()).collect();
    let lin: Vec<f64> = picked.iter().map(|(t, _)| *t).collect();
    let logq: Vec<f64> = picked.iter().map(|(_, v)| v.ln()).collect();
    let (_, slope, r2) = linear_fit(&logt, &logq);
    let (_, _, r2_semilog) = linear_fit(&lin, &logq);

    let expected = match quantity {
        DecayQuantity::L2 | DecayQuantity::GradL2 => expected_l2_exponent(dim, alpha, 0.0),
        DecayQuantity::Lp(p) => expected_lp_exponent(dim, alpha, p),
    };
    let outside_hypotheses = dim <= 2 || !(alpha > 1.0 && alpha <= 2.0);
    let exponential_like = r2_semilog > r2;
    let mut notes = vec!["mean mode removed: on a periodic box only the fluctuation can decay".to_string()];
    if outside_hypotheses {
        notes.push("parameters outside the decay theorem's hypotheses (needs N > 2, 1 < alpha <= 2)".into());
    }
    if exponential_like {
        notes.push("decay looks exponential rather than algebraic".into());
    }
    Ok(DecayFit {
        exponent: -slope,
        r2,
        expected,
        samples: picked.len(),
        outside_hypotheses,
        exponential_like,
        notes,
    })
}

/// [`decay_fit_samples`] on a recorded series.
pub fn decay_fit<T: Scalar>(
    series: &DiagnosticsSeries<T>,
    window: (f64, f64),
    quantity: DecayQuantity,
) -> Result<DecayFit> {
    let times: Vec<f64> = series.entries.iter().map(|e| e.t.to_f64_lossy()).collect();
    let values: Vec<f64> = match quantity {
        DecayQuantity::L2 => series.entries.iter().map(|e| e.l2_fluct.to_f64_lossy()).collect(),
        DecayQuantity::GradL2 => series.entries.iter().map(|e| e.grad_l2.to_f64_lossy()).collect(),
        DecayQuantity::Lp(p) if p == 2.0 => series.entries.iter().map(|e| e.l2_fluct.to_f64_lossy()).collect(),
        DecayQuantity::Lp(p) if p == 4.0 => series.entries.iter().map(|e| e.l4_fluct.to_f64_lossy()).collect(),
        DecayQuantity::Lp(p) => return Err(Error::InvalidExponent(p)),
    };
    decay_fit_samples(&times, &values, window, series.dim, series.alpha.to_f64_lossy(), quantity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_synthetic_power_law() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.4).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 * (1.0 + t).powf(-0.7)).collect();
        let fit = decay_fit_samples(&times, &values, (0.0, 100.0), 3, 1.5, DecayQuantity::L2).unwrap();
        assert!((fit.exponent - 0.7).abs() < 1e-6);
        assert!(fit.r2 > 0.999_999);
        assert!(!fit.exponential_like);
    }

    #[test]
    fn flags_exponential_decay() {
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.5).collect();
        let values: Vec<f64> = times.iter().map(|t| (-0.8 * t).exp()).collect();
        let fit = decay_fit_samples(&times, &values, (0.0, 100.0), 2, 1.0, DecayQuantity::L2).unwrap();
        assert!(fit.exponential_like);
        assert!(fit.outside_hypotheses);
    }

    #[test]
    fn too_few_samples() {
        let t = [0.0, 1.0, 2.0];
        assert!(matches!(
            decay_fit_samples(&t, &t, (0.0, 5.0), 3, 2.0, DecayQuantity::L2),
            Err(Error::InsufficientData { .. })
        ));
    }
}
