//! Dephasing qubit probes for bath spectroscopy: filter functions,
//! attenuation factors, Fisher-information bounds and adaptive Bayesian
//! estimation of a bath's coupling strength or correlation time.
//!
//! Units throughout are µs for times and MHz (angular) for frequencies.

pub mod attenuation;
pub mod bayes;
pub mod control;
pub mod error;
pub mod fisher;
pub mod model;
mod quadrature;
pub mod special;
pub mod spectra;

pub use attenuation::{
    attenuation_comb_beta, attenuation_comb_ohmic, attenuation_free, attenuation_lorentzian_exact,
    attenuation_markovian, attenuation_quadrature, attenuation_zeno, c_beta, c_s, cutoff_harmonic,
    outcome_probabilities, Attenuation, AttenuationResult, CombControl, QuadratureOptions,
    QuadratureReport, TargetParameter,
};
pub use bayes::{
    expected_information_gain, likelihood, run_protocol, select_time, simulate_measurement, AdaptiveConfig,
    CandidateGrid, EnsembleRow, GridSpacing, Outcome, Posterior, ProtocolRun, Trajectory, TrajectoryRow,
};
pub use control::{ControlKind, ControlSequence, HarmonicComb, Segment};
pub use error::{Error, Result};
pub use fisher::{
    bound_constants, maximize_qfi_numeric, maximize_qfi_per_time, qfi, relative_error, t_opt_beta,
    t_opt_ohmic, t_opt_powerlaw, t_opt_zeno, ultimate_bound, AttenuationCurve, BoundConstants,
    Information, ModelCurve, PowerLawCurve, PowerLawTarget, PrecisionReport, RelativeError, ScanOptions,
};
pub use model::{Backend, Evaluation, Method, ProbeModel};
pub use special::{lambert_w0, zeta};
pub use spectra::{OhmicSpectrum, OrnsteinUhlenbeckSpectrum, PowerLawAttenuationModel, Spectrum};
