//! Diodic-behaviour analytics: failure measure, velocity window, scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adiabatic::{adiabatic_limits, AdiabaticError, AdiabaticLimits};
use crate::config::DiodeConfig;
use crate::numeric::{bisect_boundary, linspace, logspace};
use crate::solver::{solve_diode, Channel, Side, SolveError, SolveOptions};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("epsilon must be strictly positive (got {0})")]
    InvalidEpsilon(f64),
    #[error("scan parameter values must be strictly ascending")]
    NotAscending,
    #[error("scan parameter values must be positive")]
    NotPositive,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Adiabatic(#[from] AdiabaticError),
}

/// Term-by-term decomposition of the ground-state failure sum: every
/// unwanted scattering probability plus the two deficits of the wanted
/// ones. A perfect diode scores zero; the sum is bounded by 8.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FailureBreakdown {
    pub r_l_11: f64,
    pub r_l_21: f64,
    pub t_r_11: f64,
    pub t_r_21: f64,
    pub r_r_21: f64,
    pub t_l_11: f64,
    pub transmission_deficit: f64,
    pub reflection_deficit: f64,
}

impl FailureBreakdown {
    pub fn total(&self) -> f64 {
        self.r_l_11
            + self.r_l_21
            + self.t_r_11
            + self.t_r_21
            + self.r_r_21
            + self.t_l_11
            + self.transmission_deficit
            + self.reflection_deficit
    }

    pub fn terms(&self) -> [(&'static str, f64); 8] {
        [
            ("R_l_11", self.r_l_11),
            ("R_l_21", self.r_l_21),
            ("T_r_11", self.t_r_11),
            ("T_r_21", self.t_r_21),
            ("R_r_21", self.r_r_21),
            ("T_l_11", self.t_l_11),
            ("transmission_deficit", self.transmission_deficit),
            ("reflection_deficit", self.reflection_deficit),
        ]
    }
}

/// Evaluate the failure sum at speed `v`. One sweep provides both required
/// incidences (ground state from the left and from the right).
pub fn failure_measure(
    cfg: &DiodeConfig,
    v: f64,
    opts: &SolveOptions,
) -> Result<FailureBreakdown, AnalysisError> {
    let solve = solve_diode(cfg, v, opts)?;
    let left = solve
        .full
        .amplitudes(Side::Left, Channel::One)
        .probabilities();
    let right = solve
        .full
        .amplitudes(Side::Right, Channel::One)
        .probabilities();
    Ok(FailureBreakdown {
        r_l_11: left.r1,
        r_l_21: left.r2,
        t_r_11: right.t1,
        t_r_21: right.t2,
        r_r_21: right.r2,
        t_l_11: left.t1,
        transmission_deficit: (1.0 - left.t2).max(0.0),
        reflection_deficit: (1.0 - right.r1).max(0.0),
    })
}

/// Which deficit term dominated at a window boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BreakdownCause {
    TransmissionFailure,
    ReflectionFailure,
}

impl std::fmt::Display for BreakdownCause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BreakdownCause::TransmissionFailure => write!(f, "transmission"),
            BreakdownCause::ReflectionFailure => write!(f, "reflection"),
        }
    }
}

/// Velocity interval over which the failure sum stays below epsilon.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiodicWindow {
    pub empty: bool,
    /// Boundaries (m/s); NaN when `empty`.
    pub v_min: f64,
    pub v_max: f64,
    pub cause_at_vmin: Option<BreakdownCause>,
    pub cause_at_vmax: Option<BreakdownCause>,
    pub epsilon: f64,
    /// Exact ties between the two deficit terms at classification.
    pub tie_at_vmin: bool,
    pub tie_at_vmax: bool,
    /// Further disjoint sub-windows at grid resolution, widest excluded.
    pub others: Vec<(f64, f64)>,
}

impl DiodicWindow {
    fn empty(epsilon: f64) -> Self {
        DiodicWindow {
            empty: true,
            v_min: f64::NAN,
            v_max: f64::NAN,
            cause_at_vmin: None,
            cause_at_vmax: None,
            epsilon,
            tie_at_vmin: false,
            tie_at_vmax: false,
            others: Vec::new(),
        }
    }
}

/// Velocity grid specification for window searches.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VelocityGrid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log_spaced: bool,
}

impl Default for VelocityGrid {
    fn default() -> Self {
        VelocityGrid {
            from: 0.005,
            to: 1.2,
            points: 200,
            log_spaced: true,
        }
    }
}

impl VelocityGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.log_spaced {
            logspace(self.from, self.to, self.points)
        } else {
            linspace(self.from, self.to, self.points)
        }
    }
}

/// Window-search options.
#[derive(Clone, Copy, Debug)]
pub struct WindowSearch {
    pub epsilon: f64,
    pub grid: VelocityGrid,
    /// Relative bisection tolerance on the boundary speeds.
    pub bisect_rel_tol: f64,
}

impl Default for WindowSearch {
    fn default() -> Self {
        WindowSearch {
            epsilon: 0.01,
            grid: VelocityGrid::default(),
            bisect_rel_tol: 1.0e-3,
        }
    }
}

fn classify(b: &FailureBreakdown) -> (BreakdownCause, bool) {
    let tie = b.transmission_deficit == b.reflection_deficit;
    if b.transmission_deficit >= b.reflection_deficit {
        (BreakdownCause::TransmissionFailure, tie)
    } else {
        (BreakdownCause::ReflectionFailure, tie)
    }
}

/// Locate the diodic window on the search grid and refine its boundaries
/// by bisection. An empty window is reported, never raised.
pub fn find_window(
    cfg: &DiodeConfig,
    search: &WindowSearch,
    opts: &SolveOptions,
) -> Result<DiodicWindow, AnalysisError> {
    if !(search.epsilon > 0.0 && search.epsilon.is_finite()) {
        return Err(AnalysisError::InvalidEpsilon(search.epsilon));
    }
    let vs = search.grid.values();
    let measures: Vec<FailureBreakdown> = vs
        .par_iter()
        .map(|&v| failure_measure(cfg, v, opts))
        .collect::<Result<_, _>>()?;
    let ok: Vec<bool> = measures
        .iter()
        .map(|m| m.total() < search.epsilon)
        .collect();

    // contiguous passing runs
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &good) in ok.iter().enumerate() {
        match (good, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, ok.len() - 1));
    }
    if runs.is_empty() {
        return Ok(DiodicWindow::empty(search.epsilon));
    }

    let widest = *runs
        .iter()
        .max_by(|a, b| {
            let wa = vs[a.1] - vs[a.0];
            let wb = vs[b.1] - vs[b.0];
            wa.partial_cmp(&wb).expect("finite widths")
        })
        .expect("nonempty runs");
    let others: Vec<(f64, f64)> = runs
        .iter()
        .filter(|&&r| r != widest)
        .map(|&(a, b)| (vs[a], vs[b]))
        .collect();

    let mut is_ok = |v: f64| -> Result<bool, AnalysisError> {
        Ok(failure_measure(cfg, v, opts)?.total() < search.epsilon)
    };

    let (i0, i1) = widest;
    let (v_min, fail_lo) = if i0 == 0 {
        (vs[0], vs[0])
    } else {
        let v = bisect_boundary(&mut is_ok, vs[i0], vs[i0 - 1], search.bisect_rel_tol)?;
        (v, vs[i0 - 1].max(v * (1.0 - 2.0 * search.bisect_rel_tol)))
    };
    let (v_max, fail_hi) = if i1 == vs.len() - 1 {
        (vs[vs.len() - 1], vs[vs.len() - 1])
    } else {
        let v = bisect_boundary(&mut is_ok, vs[i1], vs[i1 + 1], search.bisect_rel_tol)?;
        (v, vs[i1 + 1].min(v * (1.0 + 2.0 * search.bisect_rel_tol)))
    };

    // classify just outside each boundary, where the sum first breaches
    let (cause_min, tie_min) = classify(&failure_measure(cfg, fail_lo, opts)?);
    let (cause_max, tie_max) = classify(&failure_measure(cfg, fail_hi, opts)?);

    Ok(DiodicWindow {
        empty: false,
        v_min,
        v_max,
        cause_at_vmin: Some(cause_min),
        cause_at_vmax: Some(cause_max),
        epsilon: search.epsilon,
        tie_at_vmin: tie_min,
        tie_at_vmax: tie_max,
        others,
    })
}

/// Which template parameter a scan varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanKind {
    MirrorSeparation,
    PumpShift,
}

/// One scan row: the window and the adiabatic limits at one parameter
/// value. A row failure is recorded in place of the data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub param: f64,
    pub window: Option<DiodicWindow>,
    pub limits: Option<AdiabaticLimits>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanTable {
    pub kind: ScanKind,
    pub epsilon: f64,
    pub rows: Vec<ScanRow>,
}

fn scan_values(values: &[f64], require_positive: bool) -> Result<(), AnalysisError> {
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::NotAscending);
    }
    if require_positive && values.iter().any(|&v| v <= 0.0) {
        return Err(AnalysisError::NotPositive);
    }
    Ok(())
}

fn scan_over<F>(
    kind: ScanKind,
    values: &[f64],
    search: &WindowSearch,
    opts: &SolveOptions,
    make_cfg: F,
) -> ScanTable
where
    F: Fn(f64) -> DiodeConfig + Sync,
{
    let rows: Vec<ScanRow> = values
        .par_iter()
        .map(|&p| {
            let cfg = make_cfg(p);
            let outcome = find_window(&cfg, search, opts).and_then(|w| {
                let limits = adiabatic_limits(&cfg, search.epsilon, &search.grid.values())?;
                Ok((w, limits))
            });
            match outcome {
                Ok((window, limits)) => ScanRow {
                    param: p,
                    window: Some(window),
                    limits: Some(limits),
                    error: None,
                },
                Err(e) => ScanRow {
                    param: p,
                    window: None,
                    limits: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    ScanTable {
        kind,
        epsilon: search.epsilon,
        rows,
    }
}

/// Scan the mirror half-separation `d` (ascending, positive, metres).
pub fn scan_d(
    template: &DiodeConfig,
    d_values: &[f64],
    search: &WindowSearch,
    opts: &SolveOptions,
) -> Result<ScanTable, AnalysisError> {
    scan_values(d_values, true)?;
    let base = *template;
    Ok(scan_over(
        ScanKind::MirrorSeparation,
        d_values,
        search,
        opts,
        move |d| DiodeConfig { d, ..base },
    ))
}

/// Scan the pump-centre shift Δ (ascending, metres).
pub fn scan_shift(
    template: &DiodeConfig,
    delta_values: &[f64],
    search: &WindowSearch,
    opts: &SolveOptions,
) -> Result<ScanTable, AnalysisError> {
    scan_values(delta_values, false)?;
    let base = *template;
    Ok(scan_over(
        ScanKind::PumpShift,
        delta_values,
        search,
        opts,
        move |delta| DiodeConfig { delta, ..base },
    ))
}
