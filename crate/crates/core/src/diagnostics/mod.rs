//! Norms, inequality checkers, decay fits and blow-up probes evaluated on
//! fields and recorded trajectories.

mod checks;
mod decay;
mod norms;
mod series;
mod surveys;
mod virial;

pub use checks::{
    energy_balance, energy_inequality_check, level_set_energy_check, maximum_principle_check,
    pointwise_lemma_check, spectral_apriori_check, spectral_apriori_violations,
    uniqueness_class_monitor, validate_uniqueness_exponents, InequalityReport, UniquenessMonitor,
    LEMMA_TAIL_LIMIT,
};
pub use decay::{
    decay_fit, decay_fit_samples, expected_l2_exponent, expected_lp_exponent, linear_fit,
    DecayFit, DecayQuantity, MIN_FIT_SAMPLES,
};
pub use norms::{hs_norm, lp_norm, lp_norm_fluctuation};
pub use series::{radial_spectrum, DiagnosticsEntry, DiagnosticsRecorder, DiagnosticsSeries};
pub use surveys::{riesz_potential_survey, semigroup_bound_survey, RieszPotentialSurvey, SemigroupSurvey};
pub use virial::{second_moment, virial_probe, VirialReport, VIRIAL_SIGN_SLACK, VIRIAL_SUPPORT_LIMIT};
