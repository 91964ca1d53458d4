//! Physical constants (SI) and the unit conventions used throughout.
//!
//! All internal quantities are SI: lengths in metres, energies in joules,
//! peak laser strengths as angular frequencies in s⁻¹. Configuration files
//! use the laboratory-friendly units `Msi` (10⁶ s⁻¹) and micrometres; the
//! loader converts on the way in.

/// Reduced Planck constant (J·s), CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Atomic mass unit (kg), CODATA 2018.
pub const AMU: f64 = 1.660_539_07e-27;

/// Standard atomic weight of neon, in amu.
pub const NEON_ATOMIC_WEIGHT: f64 = 20.1797;

/// Mass of a neon atom (kg) at the standard atomic weight.
pub const NEON_MASS: f64 = NEON_ATOMIC_WEIGHT * AMU;

/// One "Msi" of peak laser strength: an angular frequency of 10⁶ s⁻¹.
pub const MSI: f64 = 1.0e6;

/// One micrometre in metres.
pub const MICRON: f64 = 1.0e-6;
