//! Time integration: exact linear factors, dealiased explicit flux,
//! mollified data and the mild-solution fixed-point iteration.

mod config;
mod mollify;
mod picard;
mod run;
mod stepper;

pub use config::{BlowupCriteria, Scheme, SolverConfig};
pub use mollify::mollify;
pub use picard::{picard_iterate, PicardReport, MIN_PICARD_STEPS, PICARD_TOLERANCE};
pub use run::{gradient_sup, run, run_with_hooks, Hook, RunStatus, Trajectory, TrajectoryRecord};
pub use stepper::{nonlinear_term, phi1, phi2, step, Flux, Stepper};
