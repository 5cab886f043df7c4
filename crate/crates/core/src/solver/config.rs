use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Time-stepping scheme. Both treat `nu Lambda^alpha + eps |k|^2` with the
/// exact exponential factor and `div(u theta)` explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Integrating-factor Euler, first order.
    #[default]
    IfEuler,
    /// Cox-Matthews exponential time differencing, second order.
    Etdrk2,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "if-euler" | "ifeuler" | "euler" => Ok(Self::IfEuler),
            "etdrk2" | "etd2" => Ok(Self::Etdrk2),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IfEuler => "if-euler",
            Self::Etdrk2 => "etdrk2",
        })
    }
}

/// Thresholds of the blow-up / under-resolution detector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupCriteria<T: Scalar> {
    /// Trip when the energy fraction in the top third of the retained
    /// spectrum exceeds this.
    pub tail_fraction: T,
    /// Trip when `||grad theta||_inf > gradient_factor * ||grad theta_0||_inf`.
    pub gradient_factor: T,
}

impl<T: Scalar> Default for BlowupCriteria<T> {
    fn default() -> Self {
        Self {
            tail_fraction: T::lit(1e-3),
            gradient_factor: T::lit(1e4),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T: Scalar> {
    pub alpha: T,
    pub nu: T,
    /// Regularizing viscosity: adds `eps |k|^2` to the decay rate.
    pub eps: T,
    pub scheme: Scheme,
    /// Modes with `|m~_i| > dealias_fraction * M_i / 2` are zeroed around
    /// the quadratic product.
    pub dealias_fraction: T,
    pub cfl: T,
    pub dt_max: T,
    pub t_end: T,
    pub record_every: usize,
    /// Zero negative values after every step (breaks mass conservation).
    pub clip_negative: bool,
    /// Test hook: `false` drops `div(u theta)`, leaving the linear flow.
    pub nonlinear: bool,
    /// Store the physical field in every trajectory record.
    pub keep_fields: bool,
    /// Reject initial data below `-1e-12 ||theta_0||_inf`.
    pub monitor_positivity: bool,
    pub blowup: BlowupCriteria<T>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            alpha: T::one(),
            nu: T::lit(0.05),
            eps: T::zero(),
            scheme: Scheme::IfEuler,
            dealias_fraction: T::lit(2.0 / 3.0),
            cfl: T::lit(0.5),
            dt_max: T::lit(1e-2),
            t_end: T::one(),
            record_every: 10,
            clip_negative: false,
            nonlinear: true,
            keep_fields: true,
            monitor_positivity: false,
            blowup: BlowupCriteria::default(),
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: T, reason: &'static str| {
            Err(Error::InvalidParameter {
                name,
                value: value.to_f64_lossy(),
                reason,
            })
        };
        if !(self.alpha >= T::zero() && self.alpha <= T::lit(2.0)) {
            return bad("alpha", self.alpha, "must lie in [0, 2]");
        }
        if !(self.nu >= T::zero()) || !self.nu.is_finite() {
            return bad("nu", self.nu, "must be finite and >= 0");
        }
        if !(self.eps >= T::zero()) || !self.eps.is_finite() {
            return bad("eps", self.eps, "must be finite and >= 0");
        }
        if !(self.dealias_fraction > T::lit(0.5) && self.dealias_fraction <= T::one()) {
            return bad("dealias_fraction", self.dealias_fraction, "must lie in (0.5, 1]");
        }
        if !(self.cfl > T::zero()) {
            return bad("cfl", self.cfl, "must be positive");
        }
        if !(self.dt_max > T::zero()) {
            return bad("dt_max", self.dt_max, "must be positive");
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return bad("t_end", self.t_end, "must be positive and finite");
        }
        if self.record_every == 0 {
            return bad("record_every", T::zero(), "must be >= 1");
        }
        Ok(())
    }

    /// Normalized bin above which the blow-up detector counts tail energy:
    /// the top third of the retained band.
    pub fn tail_cutoff(&self) -> T {
        T::lit(2.0 / 3.0) * self.dealias_fraction
    }
}
