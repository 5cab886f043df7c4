//! Time integration to `t_end` with records, hooks and blow-up detection.

use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::operators::gradient;
use crate::scalar::Scalar;
use crate::solver::config::SolverConfig;
use crate::solver::stepper::Stepper;
use crate::transform::{forward_transform, inverse_unchecked};

/// State sampled at one recorded step.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord<T: Scalar> {
    pub step: usize,
    pub t: T,
    /// Size of the step that produced this state (zero for the initial record).
    pub dt: T,
    /// Physical field, present when `keep_fields` is set.
    pub theta: Option<PhysicalField<T>>,
}

/// Why a run stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    /// The gradient or spectral-tail monitor tripped at time `t`.
    BlowupSuspected { t: f64, reason: String },
    /// A non-finite value appeared in the step ending at `t`; the returned
    /// state is the last finite one.
    NumericalBlowup { t: f64 },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, Self::Completed)
    }
}

/// Output of [`run`].
#[derive(Clone, Debug)]
pub struct Trajectory<T: Scalar> {
    pub config: SolverConfig<T>,
    pub records: Vec<TrajectoryRecord<T>>,
    pub status: RunStatus,
    pub steps: usize,
    /// Last finite state in spectral space.
    pub final_state: SpectralField<T>,
    pub final_time: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Recorded physical fields; fails when the run did not keep them.
    pub fn fields(&self) -> Result<Vec<&PhysicalField<T>>> {
        self.records
            .iter()
            .map(|r| {
                r.theta.as_ref().ok_or_else(|| {
                    Error::InvalidConfig("trajectory was recorded without fields".into())
                })
            })
            .collect()
    }
}

/// Callback invoked on the stepping thread at every record.
pub trait Hook<T: Scalar> {
    fn on_record(&mut self, record: &TrajectoryRecord<T>, state: &SpectralField<T>) -> Result<()>;
}

impl<T, F> Hook<T> for F
where
    T: Scalar,
    F: FnMut(&TrajectoryRecord<T>, &SpectralField<T>) -> Result<()>,
{
    fn on_record(&mut self, record: &TrajectoryRecord<T>, state: &SpectralField<T>) -> Result<()> {
        self(record, state)
    }
}

/// Sup norm of the gradient of a scalar spectral field.
pub fn gradient_sup<T: Scalar>(theta: &SpectralField<T>) -> Result<T> {
    Ok(inverse_unchecked(&gradient(theta)?).max_magnitude())
}

fn all_finite<T: Scalar>(f: &SpectralField<T>) -> bool {
    f.coeffs().iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrates from `theta0` to `cfg.t_end` without hooks.
pub fn run<T: Scalar>(theta0: &PhysicalField<T>, cfg: &SolverConfig<T>) -> Result<Trajectory<T>> {
    run_with_hooks(theta0, cfg, &mut [])
}

/// Integrates from `theta0` to `cfg.t_end` with adaptive CFL steps.
///
/// Records are taken at step 0, every `record_every` steps and at the final
/// step. Blow-up suspicion and non-finite states end the run early with the
/// corresponding [`RunStatus`]; they are not errors.
pub fn run_with_hooks<T: Scalar>(
    theta0: &PhysicalField<T>,
    cfg: &SolverConfig<T>,
    hooks: &mut [&mut dyn Hook<T>],
) -> Result<Trajectory<T>> {
    theta0.require_scalar()?;
    let grid = theta0.grid();
    let stepper = Stepper::new(grid, cfg)?;
    let scale = theta0.max_abs();
    if cfg.monitor_positivity && theta0.min() < -T::lit(1e-12) * scale {
        return Err(Error::SignViolation {
            value: theta0.min().to_f64_lossy(),
        });
    }

    let cutoff = cfg.tail_cutoff();
    let tail_mask: Vec<bool> = (0..grid.len())
        .map(|p| grid.normalized_bin(p) > cutoff)
        .collect();
    let tail_fraction = |f: &SpectralField<T>| -> T {
        let mut total = T::zero();
        let mut tail = T::zero();
        for (p, z) in f.coeffs().iter().enumerate().skip(1) {
            let e = z.norm_sqr();
            total = total + e;
            if tail_mask[p] {
                tail = tail + e;
            }
        }
        if total > T::zero() {
            tail / total
        } else {
            T::zero()
        }
    };

    let mut theta = forward_transform(theta0)?;
    let grad0 = gradient_sup(&theta)?;
    let grad_limit = cfg.blowup.gradient_factor * grad0;

    let mut records = Vec::new();
    let mut t = T::zero();
    let mut steps = 0usize;
    let mut last_dt = T::zero();
    let mut status = RunStatus::Completed;

    let mut emit = |step: usize, t: T, dt: T, state: &SpectralField<T>,
                    records: &mut Vec<TrajectoryRecord<T>>|
     -> Result<()> {
        let record = TrajectoryRecord {
            step,
            t,
            dt,
            theta: cfg.keep_fields.then(|| inverse_unchecked(state)),
        };
        for hook in hooks.iter_mut() {
            hook.on_record(&record, state)?;
        }
        records.push(record);
        Ok(())
    };

    emit(0, t, last_dt, &theta, &mut records)?;
    let tol = cfg.t_end * T::lit(1e-12);
    let mut recorded_last = true;
    while cfg.t_end - t > tol {
        let tail = tail_fraction(&theta);
        if tail > cfg.blowup.tail_fraction {
            status = RunStatus::BlowupSuspected {
                t: t.to_f64_lossy(),
                reason: format!("spectral tail fraction {:.3e}", tail.to_f64_lossy()),
            };
            break;
        }
        let flux = stepper.evaluate(&theta)?;
        let dt = stepper.admissible_dt(flux.max_speed).min(cfg.t_end - t);
        let next = stepper.advance(&theta, &flux, dt)?;
        if !all_finite(&next) {
            status = RunStatus::NumericalBlowup {
                t: (t + dt).to_f64_lossy(),
            };
            break;
        }
        theta = next;
        t = t + dt;
        last_dt = dt;
        steps += 1;
        recorded_last = false;
        if steps % cfg.record_every == 0 {
            emit(steps, t, dt, &theta, &mut records)?;
            recorded_last = true;
            if grad0 > T::zero() {
                let g = gradient_sup(&theta)?;
                if g > grad_limit {
                    status = RunStatus::BlowupSuspected {
                        t: t.to_f64_lossy(),
                        reason: format!(
                            "gradient sup {:.3e} above {:.3e}",
                            g.to_f64_lossy(),
                            grad_limit.to_f64_lossy()
                        ),
                    };
                    break;
                }
            }
        }
    }
    if !recorded_last {
        emit(steps, t, last_dt, &theta, &mut records)?;
    }

    Ok(Trajectory {
        config: cfg.clone(),
        records,
        status,
        steps,
        final_state: theta,
        final_time: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn records_are_strictly_increasing_and_end_at_t_end() {
        let g = Grid::<f64>::cube(2, 16, 6.0).unwrap();
        let f = PhysicalField::from_fn(&g, |x| 1.0 + 0.1 * (x[0] - 3.0).cos());
        let cfg = SolverConfig {
            t_end: 0.105,
            record_every: 3,
            ..Default::default()
        };
        let traj = run(&f, &cfg).unwrap();
        assert!(traj.status.is_completed());
        let times = traj.times();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!((times.last().unwrap() - 0.105).abs() < 1e-14);
        assert_eq!(traj.records.last().unwrap().step, traj.steps);
    }

    #[test]
    fn hooks_see_every_record() {
        let g = Grid::<f64>::cube(1, 16, 6.0).unwrap();
        let f = PhysicalField::constant(&g, 1.0);
        let cfg = SolverConfig {
            t_end: 0.1,
            record_every: 2,
            ..Default::default()
        };
        let mut seen = Vec::new();
        let mut hook = |r: &TrajectoryRecord<f64>, _: &SpectralField<f64>| {
            seen.push(r.step);
            Ok(())
        };
        let traj = run_with_hooks(&f, &cfg, &mut [&mut hook]).unwrap();
        assert_eq!(seen.len(), traj.records.len());
    }

    #[test]
    fn positivity_monitor_rejects_negative_data() {
        let g = Grid::<f64>::cube(1, 16, 6.0).unwrap();
        let f = PhysicalField::from_fn(&g, |x| x[0].sin());
        let cfg = SolverConfig {
            monitor_positivity: true,
            ..Default::default()
        };
        assert!(matches!(run(&f, &cfg), Err(Error::SignViolation { .. })));
    }
}
