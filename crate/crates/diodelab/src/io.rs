//! CSV emission and the run manifest.
//!
//! Every emitted file starts with `#`-prefixed provenance lines echoing the
//! full configuration, so no output can be separated from the parameters
//! that produced it. Values are printed with 12 significant digits.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::{DiodicWindow, ScanKind, ScanTable};
use crate::config::{ConfigFile, DiodeConfig};
use crate::constants::MICRON;
use crate::solver::{Channel, ProbSet};

/// 12 significant digits, stable across platforms.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        // avoid the sign of negative zero leaking into output bytes
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

/// `#`-prefixed provenance lines with the configuration echo.
pub fn config_echo(cfg: &DiodeConfig, extras: &[(&str, String)]) -> String {
    let f = ConfigFile::from_config(cfg);
    let mut line = format!(
        "# diodelab v{}\n# omega_hat_Msi={} w1_hat_Msi={} w2_hat_Msi={} d_um={} delta_um={} delta_x_um={} species={}",
        env!("CARGO_PKG_VERSION"),
        f.omega_hat_msi,
        f.w1_hat_msi,
        f.w2_hat_msi,
        f.d_um,
        f.delta_um,
        f.delta_x_um,
        f.species.label(),
    );
    for (k, v) in extras {
        line.push_str(&format!(" {k}={v}"));
    }
    line.push('\n');
    line
}

/// Signed-velocity scattering table: one row per `w`, probabilities for the
/// fixed incidence channel.
pub fn write_scatter_csv<W: Write>(
    mut out: W,
    cfg: &DiodeConfig,
    channel: Channel,
    rows: &[(f64, Result<ProbSet, String>)],
    extras: &[(&str, String)],
) -> io::Result<()> {
    out.write_all(config_echo(cfg, extras).as_bytes())?;
    let a = channel.index() + 1;
    let any_error = rows.iter().any(|(_, r)| r.is_err());
    if any_error {
        writeln!(out, "w_m_per_s,R1{a},R2{a},T1{a},T2{a},error")?;
    } else {
        writeln!(out, "w_m_per_s,R1{a},R2{a},T1{a},T2{a}")?;
    }
    for (w, row) in rows {
        match row {
            Ok(p) => {
                let tail = if any_error { "," } else { "" };
                writeln!(
                    out,
                    "{},{},{},{},{}{tail}",
                    fmt12(*w),
                    fmt12(p.r1),
                    fmt12(p.r2),
                    fmt12(p.t1),
                    fmt12(p.t2)
                )?;
            }
            Err(msg) => {
                writeln!(out, "{},,,,,{}", fmt12(*w), msg.replace([',', '\n'], ";"))?;
            }
        }
    }
    Ok(())
}

/// Adiabatic-frame table: potentials, lower-state overlaps, couplings.
pub struct AdiabaticRow {
    pub x: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub p1_minus: f64,
    pub p2_minus: f64,
    pub a_coupling: f64,
    pub b_coupling: f64,
}

pub fn write_adiabatic_csv<W: Write>(
    mut out: W,
    cfg: &DiodeConfig,
    rows: &[AdiabaticRow],
    extras: &[(&str, String)],
) -> io::Result<()> {
    out.write_all(config_echo(cfg, extras).as_bytes())?;
    writeln!(
        out,
        "x_um,lambda_minus_J,lambda_plus_J,p1_minus,p2_minus,A,B"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt12(r.x / MICRON),
            fmt12(r.lambda_minus),
            fmt12(r.lambda_plus),
            fmt12(r.p1_minus),
            fmt12(r.p2_minus),
            fmt12(r.a_coupling),
            fmt12(r.b_coupling)
        )?;
    }
    Ok(())
}

/// Adiabaticity measure versus speed.
pub fn write_q_csv<W: Write>(
    mut out: W,
    cfg: &DiodeConfig,
    rows: &[(f64, f64)],
    extras: &[(&str, String)],
) -> io::Result<()> {
    out.write_all(config_echo(cfg, extras).as_bytes())?;
    writeln!(out, "v_m_per_s,q")?;
    for (v, q) in rows {
        writeln!(out, "{},{}", fmt12(*v), fmt12(*q))?;
    }
    Ok(())
}

fn window_fields(w: &DiodicWindow) -> (String, String, String, String) {
    if w.empty {
        (String::new(), String::new(), "none".into(), "none".into())
    } else {
        (
            fmt12(w.v_min),
            fmt12(w.v_max),
            w.cause_at_vmin.map_or("none".into(), |c| c.to_string()),
            w.cause_at_vmax.map_or("none".into(), |c| c.to_string()),
        )
    }
}

/// Single-configuration window summary with the adiabatic-limit overlays.
pub fn write_window_csv<W: Write>(
    mut out: W,
    cfg: &DiodeConfig,
    window: &DiodicWindow,
    limits: &crate::adiabatic::AdiabaticLimits,
    extras: &[(&str, String)],
) -> io::Result<()> {
    let mut all = vec![("epsilon", window.epsilon.to_string())];
    all.extend(extras.iter().map(|(k, v)| (*k, v.clone())));
    out.write_all(config_echo(cfg, &all).as_bytes())?;
    writeln!(
        out,
        "v_min,v_max,cause_vmin,cause_vmax,v_lambda_min,v_lambda_max,v_ad_max"
    )?;
    let (vmin, vmax, cmin, cmax) = window_fields(window);
    writeln!(
        out,
        "{vmin},{vmax},{cmin},{cmax},{},{},{}",
        fmt12(limits.v_lambda_min),
        fmt12(limits.v_lambda_max),
        fmt12(limits.v_ad_max)
    )?;
    Ok(())
}

/// Parameter scan table (mirror separation or pump shift).
pub fn write_scan_csv<W: Write>(
    mut out: W,
    cfg: &DiodeConfig,
    table: &ScanTable,
    extras: &[(&str, String)],
) -> io::Result<()> {
    let mut all = vec![("epsilon", table.epsilon.to_string())];
    all.extend(extras.iter().map(|(k, v)| (*k, v.clone())));
    out.write_all(config_echo(cfg, &all).as_bytes())?;
    let param_col = match table.kind {
        ScanKind::MirrorSeparation => "d_um",
        ScanKind::PumpShift => "delta_um",
    };
    writeln!(
        out,
        "{param_col},v_min,v_max,cause_vmax,v_lambda_min,v_lambda_max,v_ad_max"
    )?;
    for row in &table.rows {
        let param = fmt12(row.param / MICRON);
        match (&row.window, &row.limits, &row.error) {
            (Some(w), Some(l), None) => {
                let (vmin, vmax, _, cmax) = window_fields(w);
                writeln!(
                    out,
                    "{param},{vmin},{vmax},{cmax},{},{},{}",
                    fmt12(l.v_lambda_min),
                    fmt12(l.v_lambda_max),
                    fmt12(l.v_ad_max)
                )?;
            }
            (_, _, Some(err)) => {
                writeln!(out, "{param},,,error:{},,,", err.replace([',', '\n'], ";"))?;
            }
            _ => writeln!(out, "{param},,,,,,")?,
        }
    }
    Ok(())
}

/// Provenance record written alongside every output file. Re-running the
/// recorded command line reproduces the outputs byte-identically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub config: ConfigFile,
    pub margin: f64,
    pub grid: crate::solver::grid::GridSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity_grid: Option<crate::analysis::VelocityGrid>,
    pub outputs: Vec<String>,
    pub workers: usize,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn path_for(output: &std::path::Path) -> std::path::PathBuf {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    pub fn write(&self, output: &std::path::Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(Self::path_for(output), text + "\n")
    }
}
