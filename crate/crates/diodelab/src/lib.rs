//! Coupled-channel scattering for a two-level "atom diode": three
//! overlapping Gaussian laser potentials acting on a moving two-level atom.
//!
//! The crate computes exact transmission/reflection probabilities with a
//! barrier-stable slab-composition solver, explains them through an
//! adiabatic frame (effective potentials, frame couplings, plateau
//! predictions), and quantifies the velocity window in which the device
//! transmits ground-state atoms one way and reflects them the other.

pub mod adiabatic;
pub mod analysis;
pub mod config;
pub mod constants;
pub mod io;
pub mod linalg;
pub mod numeric;
pub mod potential;
pub mod solver;

pub use adiabatic::{
    adiabaticity_q, asymptotic_frames, coupling_functions, eigensystem, lambda_limits,
    overlap_probabilities, predict_table, v_ad_max, AdiabaticLimits, AdiabaticPoint,
    AdiabaticPrediction, AsymptoticFrames,
};
pub use analysis::{
    failure_measure, find_window, scan_d, scan_shift, AnalysisError, BreakdownCause, DiodicWindow,
    FailureBreakdown, ScanKind, ScanRow, ScanTable, VelocityGrid, WindowSearch,
};
pub use config::{
    load_config, simulation_domain, CaseLabel, ConfigError, ConfigFile, DiodeConfig, Species,
};
pub use potential::{gaussian_profile, kinematics, potential_matrix, Kinematics, PhysicsError};
pub use solver::{
    probabilities_signed, s_matrix, solution_field, solve_diode, solve_scattering, AmplitudeSet,
    Channel, Incidence, ProbSet, SMatrix, Side, SolveError, SolveOptions,
};
