//! Device configuration: the three-laser parameter set and its JSON loader.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{AMU, MICRON, MSI, NEON_ATOMIC_WEIGHT};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("field `{0}` must be finite")]
    NonFinite(&'static str),
    #[error("field `{0}` must not be negative")]
    Negative(&'static str),
    #[error("field `{0}` must be strictly positive")]
    NonPositive(&'static str),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("truncation margin must be at least {min} sigmas (got {got})")]
    MarginTooSmall { min: f64, got: f64 },
    #[error("failed to read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse config file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Atomic species selector for the config file. Only neon at its standard
/// atomic weight is configurable; other masses go through
/// [`DiodeConfig::new`] directly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    #[default]
    #[serde(rename = "Ne20_1797")]
    Neon,
}

impl Species {
    pub fn mass(self) -> f64 {
        match self {
            Species::Neon => NEON_ATOMIC_WEIGHT * AMU,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Species::Neon => "Ne20_1797",
        }
    }
}

/// Full laser/atom parameter set, all SI.
///
/// * `omega_hat` — peak Rabi frequency of the pump laser (s⁻¹),
/// * `w1_hat`, `w2_hat` — peak strengths of the ground/excited-state
///   mirror lasers (s⁻¹), centred at `+d` and `-d` respectively,
/// * `d` — mirror-centre half-separation (m),
/// * `delta` — shift of the pump-laser centre (m),
/// * `delta_x` — common Gaussian width of all three profiles (m),
/// * `mass` — atomic mass (kg).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiodeConfig {
    pub omega_hat: f64,
    pub w1_hat: f64,
    pub w2_hat: f64,
    pub d: f64,
    pub delta: f64,
    pub delta_x: f64,
    pub mass: f64,
}

impl DiodeConfig {
    pub fn new(
        omega_hat: f64,
        w1_hat: f64,
        w2_hat: f64,
        d: f64,
        delta: f64,
        delta_x: f64,
        mass: f64,
    ) -> Result<Self, ConfigError> {
        let cfg = DiodeConfig {
            omega_hat,
            w1_hat,
            w2_hat,
            d,
            delta,
            delta_x,
            mass,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Convenience constructor in the laboratory units of the config file:
    /// peak strengths in Msi (10⁶ s⁻¹), lengths in micrometres, neon mass.
    pub fn from_msi_um(
        omega_hat_msi: f64,
        w1_hat_msi: f64,
        w2_hat_msi: f64,
        d_um: f64,
        delta_um: f64,
    ) -> Result<Self, ConfigError> {
        Self::new(
            omega_hat_msi * MSI,
            w1_hat_msi * MSI,
            w2_hat_msi * MSI,
            d_um * MICRON,
            delta_um * MICRON,
            15.0 * MICRON,
            Species::Neon.mass(),
        )
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields = [
            ("omega_hat", self.omega_hat),
            ("w1_hat", self.w1_hat),
            ("w2_hat", self.w2_hat),
            ("d", self.d),
            ("delta", self.delta),
            ("delta_x", self.delta_x),
            ("mass", self.mass),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ConfigError::NonFinite(name));
            }
        }
        for (name, value) in [
            ("omega_hat", self.omega_hat),
            ("w1_hat", self.w1_hat),
            ("w2_hat", self.w2_hat),
        ] {
            if value < 0.0 {
                return Err(ConfigError::Negative(name));
            }
        }
        if self.d <= 0.0 {
            return Err(ConfigError::NonPositive("d"));
        }
        if self.delta_x <= 0.0 {
            return Err(ConfigError::NonPositive("delta_x"));
        }
        if self.mass <= 0.0 {
            return Err(ConfigError::NonPositive("mass"));
        }
        Ok(())
    }

    pub fn case(&self) -> CaseLabel {
        match (self.w1_hat > 0.0, self.w2_hat > 0.0) {
            (false, false) => CaseLabel::Case0,
            (true, false) => CaseLabel::Case1,
            (false, true) => CaseLabel::Case2,
            (true, true) => CaseLabel::Case12,
        }
    }
}

/// The four mirror-laser arrangements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    /// No mirrors: pump laser only.
    Case0,
    /// Ground-state mirror only (right side).
    Case1,
    /// Excited-state mirror only (left side).
    Case2,
    /// Both mirrors: the full diode.
    Case12,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseLabel::Case0 => "0",
            CaseLabel::Case1 => "1",
            CaseLabel::Case2 => "2",
            CaseLabel::Case12 => "12",
        };
        write!(f, "{s}")
    }
}

/// On-disk configuration schema (JSON), in laboratory units.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "omega_hat_Msi")]
    pub omega_hat_msi: f64,
    #[serde(rename = "w1_hat_Msi")]
    pub w1_hat_msi: f64,
    #[serde(rename = "w2_hat_Msi")]
    pub w2_hat_msi: f64,
    pub d_um: f64,
    #[serde(default)]
    pub delta_um: f64,
    #[serde(default = "default_delta_x_um")]
    pub delta_x_um: f64,
    #[serde(default)]
    pub species: Species,
}

fn default_delta_x_um() -> f64 {
    15.0
}

impl ConfigFile {
    pub fn to_si(&self) -> Result<DiodeConfig, ConfigError> {
        DiodeConfig::new(
            self.omega_hat_msi * MSI,
            self.w1_hat_msi * MSI,
            self.w2_hat_msi * MSI,
            self.d_um * MICRON,
            self.delta_um * MICRON,
            self.delta_x_um * MICRON,
            self.species.mass(),
        )
    }

    pub fn from_config(cfg: &DiodeConfig) -> ConfigFile {
        ConfigFile {
            omega_hat_msi: cfg.omega_hat / MSI,
            w1_hat_msi: cfg.w1_hat / MSI,
            w2_hat_msi: cfg.w2_hat / MSI,
            d_um: cfg.d / MICRON,
            delta_um: cfg.delta / MICRON,
            delta_x_um: cfg.delta_x / MICRON,
            species: Species::Neon,
        }
    }
}

/// Load a config file and convert to SI.
pub fn load_config(path: &Path) -> Result<DiodeConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let file: ConfigFile = serde_json::from_str(&text)?;
    file.to_si()
}

/// Truncated simulation domain `(x_left, x_right)` for a given margin in
/// units of the Gaussian width. The domain is symmetric and covers the
/// outermost laser centre plus `margin` widths on either side, so every
/// profile has decayed to `exp(-margin²/2)` of its peak at the edges.
pub fn simulation_domain(cfg: &DiodeConfig, margin: f64) -> Result<(f64, f64), ConfigError> {
    if !margin.is_finite() {
        return Err(ConfigError::NonFinite("margin"));
    }
    if margin < 5.0 {
        return Err(ConfigError::MarginTooSmall {
            min: 5.0,
            got: margin,
        });
    }
    let half = cfg.d + cfg.delta.abs() + margin * cfg.delta_x;
    Ok((-half, half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::MICRON;

    fn perfect_diode_cfg() -> DiodeConfig {
        DiodeConfig::from_msi_um(1.0, 100.0, 100.0, 50.0, 0.0).unwrap()
    }

    #[test]
    fn case_labels() {
        assert_eq!(
            DiodeConfig::from_msi_um(1.0, 0.0, 0.0, 50.0, 0.0)
                .unwrap()
                .case(),
            CaseLabel::Case0
        );
        assert_eq!(
            DiodeConfig::from_msi_um(1.0, 100.0, 0.0, 50.0, 0.0)
                .unwrap()
                .case(),
            CaseLabel::Case1
        );
        assert_eq!(
            DiodeConfig::from_msi_um(1.0, 0.0, 100.0, 50.0, 0.0)
                .unwrap()
                .case(),
            CaseLabel::Case2
        );
        assert_eq!(perfect_diode_cfg().case(), CaseLabel::Case12);
    }

    #[test]
    fn rejects_invalid_fields() {
        assert!(DiodeConfig::from_msi_um(-1.0, 0.0, 0.0, 50.0, 0.0).is_err());
        assert!(DiodeConfig::from_msi_um(1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(DiodeConfig::new(1.0, 0.0, 0.0, 1.0, 0.0, -1e-6, 1e-26).is_err());
        assert!(DiodeConfig::new(f64::NAN, 0.0, 0.0, 1.0, 0.0, 1e-6, 1e-26).is_err());
    }

    #[test]
    fn json_loader_converts_units_and_defaults() {
        let text = r#"{
            "omega_hat_Msi": 1.0,
            "w1_hat_Msi": 100.0,
            "w2_hat_Msi": 100.0,
            "d_um": 50.0
        }"#;
        let file: ConfigFile = serde_json::from_str(text).unwrap();
        let cfg = file.to_si().unwrap();
        assert_eq!(cfg, perfect_diode_cfg());
        assert_eq!(cfg.delta, 0.0);
        assert_eq!(cfg.delta_x, 15.0 * MICRON);
        assert!((cfg.mass - 3.350918e-26).abs() / cfg.mass < 1e-6);
    }

    #[test]
    fn json_loader_rejects_unknown_species() {
        let text = r#"{
            "omega_hat_Msi": 1.0,
            "w1_hat_Msi": 0.0,
            "w2_hat_Msi": 0.0,
            "d_um": 50.0,
            "species": "Xe131"
        }"#;
        assert!(serde_json::from_str::<ConfigFile>(text).is_err());
    }

    #[test]
    fn domain_margins() {
        let cfg = perfect_diode_cfg();
        let (xl, xr) = simulation_domain(&cfg, 10.0).unwrap();
        assert_eq!(xl, -xr);
        assert!(xr >= 200.0 * MICRON);
        assert!(simulation_domain(&cfg, 4.0).is_err());

        let shifted = DiodeConfig::from_msi_um(1.0, 100.0, 100.0, 50.0, -10.0).unwrap();
        let (xl2, xr2) = simulation_domain(&shifted, 10.0).unwrap();
        assert_eq!(xl2, -xr2);
        assert!(xr2 >= (50.0 + 10.0 + 150.0) * MICRON);
    }
}
