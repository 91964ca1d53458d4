//! Spatial discretisation control.

use serde::{Deserialize, Serialize};

/// Step-size rule for the slab sweep. The cell width is the smaller of
/// `de Broglie wavelength / points_per_wavelength` and
/// `length_scale / sigma_divisions`, where the length scale is the Gaussian
/// width of the laser profiles.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_wavelength: f64,
    pub sigma_divisions: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_wavelength: 40.0,
            sigma_divisions: 100.0,
        }
    }
}

impl GridSpec {
    pub fn step(&self, k: f64, length_scale: f64) -> f64 {
        let lambda = 2.0 * std::f64::consts::PI / k;
        (lambda / self.points_per_wavelength).min(length_scale / self.sigma_divisions)
    }

    /// Coarsen or refine uniformly (used by the self-check negative control
    /// and the refinement loop).
    pub fn scaled(&self, factor: f64) -> GridSpec {
        GridSpec {
            points_per_wavelength: self.points_per_wavelength / factor,
            sigma_divisions: self.sigma_divisions / factor,
        }
    }
}

/// Uniform cell grid over `[x_l, x_r]`.
#[derive(Clone, Copy, Debug)]
pub struct CellGrid {
    pub x_l: f64,
    pub x_r: f64,
    pub n_cells: usize,
    pub h: f64,
}

impl CellGrid {
    pub fn with_step(x_l: f64, x_r: f64, h_target: f64) -> CellGrid {
        let span = x_r - x_l;
        let n_cells = ((span / h_target).ceil() as usize).max(8);
        CellGrid {
            x_l,
            x_r,
            n_cells,
            h: span / n_cells as f64,
        }
    }
}
