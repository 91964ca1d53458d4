//! Gaussian laser profiles, the 2×2 potential matrix, and kinematics.

use thiserror::Error;

use crate::config::{ConfigError, DiodeConfig};
use crate::constants::HBAR;
use crate::linalg::SymMat2;

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("velocity must be strictly positive and finite (got {0})")]
    InvalidVelocity(f64),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Normalised Gaussian profile `exp(-(x-x0)²/(2 Δx²))`.
pub fn gaussian_profile(x: f64, x0: f64, delta_x: f64) -> Result<f64, ConfigError> {
    if !delta_x.is_finite() {
        return Err(ConfigError::NonFinite("delta_x"));
    }
    if delta_x <= 0.0 {
        return Err(ConfigError::NonPositive("delta_x"));
    }
    Ok(profile_unchecked(x, x0, delta_x))
}

#[inline]
pub(crate) fn profile_unchecked(x: f64, x0: f64, delta_x: f64) -> f64 {
    let u = (x - x0) / delta_x;
    (-0.5 * u * u).exp()
}

/// Profile value together with its first and second x-derivatives.
#[inline]
fn profile_with_derivs(x: f64, x0: f64, delta_x: f64) -> (f64, f64, f64) {
    let inv_s2 = 1.0 / (delta_x * delta_x);
    let u = x - x0;
    let f = (-0.5 * u * u * inv_s2).exp();
    let f1 = -u * inv_s2 * f;
    let f2 = (u * u * inv_s2 - 1.0) * inv_s2 * f;
    (f, f1, f2)
}

/// The three laser strengths `(W1, W2, Ω)` at `x`, as angular frequencies.
#[inline]
pub fn laser_frequencies(cfg: &DiodeConfig, x: f64) -> (f64, f64, f64) {
    (
        cfg.w1_hat * profile_unchecked(x, cfg.d, cfg.delta_x),
        cfg.w2_hat * profile_unchecked(x, -cfg.d, cfg.delta_x),
        cfg.omega_hat * profile_unchecked(x, cfg.delta, cfg.delta_x),
    )
}

/// Laser strengths with first and second derivatives:
/// `[(W1, W1', W1''), (W2, ...), (Ω, ...)]`.
#[inline]
pub fn laser_frequency_derivs(cfg: &DiodeConfig, x: f64) -> [(f64, f64, f64); 3] {
    let w1 = profile_with_derivs(x, cfg.d, cfg.delta_x);
    let w2 = profile_with_derivs(x, -cfg.d, cfg.delta_x);
    let om = profile_with_derivs(x, cfg.delta, cfg.delta_x);
    [
        (cfg.w1_hat * w1.0, cfg.w1_hat * w1.1, cfg.w1_hat * w1.2),
        (cfg.w2_hat * w2.0, cfg.w2_hat * w2.1, cfg.w2_hat * w2.2),
        (
            cfg.omega_hat * om.0,
            cfg.omega_hat * om.1,
            cfg.omega_hat * om.2,
        ),
    ]
}

/// Interaction-picture potential matrix `M(x) = (ħ/2) [[W1, Ω], [Ω, W2]]`
/// in joules.
pub fn potential_matrix(x: f64, cfg: &DiodeConfig) -> SymMat2 {
    let (w1, w2, omega) = laser_frequencies(cfg, x);
    let h = 0.5 * HBAR;
    SymMat2 {
        xx: h * w1,
        xy: h * omega,
        yy: h * w2,
    }
}

/// Kinetic quantities of the incident atom.
#[derive(Clone, Copy, Debug)]
pub struct Kinematics {
    /// Incident energy `m v² / 2` (J).
    pub energy: f64,
    /// Asymptotic wavenumber `m v / ħ` (m⁻¹), common to both channels.
    pub wavenumber: f64,
}

pub fn kinematics(v: f64, cfg: &DiodeConfig) -> Result<Kinematics, PhysicsError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(PhysicsError::InvalidVelocity(v));
    }
    Ok(Kinematics {
        energy: 0.5 * cfg.mass * v * v,
        wavenumber: cfg.mass * v / HBAR,
    })
}

/// Anything the channel solver can scatter off: a position-dependent real
/// symmetric 2×2 potential in joules that vanishes at the domain edges.
pub trait PotentialMatrix: Sync {
    fn at(&self, x: f64) -> SymMat2;
}

/// The configured three-Gaussian diode potential.
pub struct GaussianDiodePotential<'a> {
    pub cfg: &'a DiodeConfig,
}

impl PotentialMatrix for GaussianDiodePotential<'_> {
    #[inline]
    fn at(&self, x: f64) -> SymMat2 {
        potential_matrix(x, self.cfg)
    }
}

/// Wrapper turning a closure into a [`PotentialMatrix`] (used by tests and
/// custom profiles).
pub struct FnPotential<F: Fn(f64) -> SymMat2 + Sync>(pub F);

impl<F: Fn(f64) -> SymMat2 + Sync> PotentialMatrix for FnPotential<F> {
    #[inline]
    fn at(&self, x: f64) -> SymMat2 {
        (self.0)(x)
    }
}
