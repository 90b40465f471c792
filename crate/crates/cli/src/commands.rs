//! Subcommand implementations: design report, single run, sweep, Gram dump.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use heatstab::controller::ControllerParams;
use heatstab::diagnostics::{certificate_check, fit_decay};
use heatstab::gram::GramMatrix;
use heatstab::simulator::{reconstruct_field, run, SimOutput, Trajectory};
use heatstab::spectral::{controlled_mode_count, enumerate_modes};

use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::manifest::{
    write_atomic, DecaySection, DesignReport, OutputPaths, RunManifest, Timing,
};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Synthesizes the controller for a configuration (no simulation).
pub fn design_for(cfg: &ConfigFile) -> Result<DesignReport> {
    let domain = cfg.domain()?;
    let sigma = cfg.model.sigma.unwrap_or(1e-6);
    let modes = enumerate_modes(&domain, cfg.model.modes, cfg.model.shift)?;
    let n = controlled_mode_count(&modes, cfg.model.lambda)?;
    let gram = GramMatrix::assemble(&modes, &domain)?;
    let constant = gram.spectral_constant(n)?;
    let params = ControllerParams::design(
        cfg.model.lambda,
        &constant,
        cfg.model.disturbance_bound,
        sigma,
        &modes,
    )?;

    let mut notes = Vec::new();
    let unstable = modes.unstable_count();
    if unstable > 0 {
        notes.push(format!(
            "{unstable} mode(s) destabilized by the potential shift; shifted gain \
             formulas in effect (smallest effective eigenvalue {:.6})",
            modes.min_effective_eigenvalue()
        ));
    }
    if cfg.model.disturbance_bound == 0.0 {
        notes.push("disturbance bound is zero: rejection term disabled".into());
    }
    Ok(DesignReport {
        m: modes.len(),
        n: params.n,
        lambda: params.lambda,
        shift: params.shift,
        c_lambda: params.c_lambda,
        gamma: params.gamma,
        mu: params.mu,
        sigma: params.sigma,
        disturbance_bound: params.d_bound,
        alpha: params.alpha(),
        beta: params.beta(),
        notes,
    })
}

pub fn cmd_design(cfg: &ConfigFile, out_dir: Option<&Path>) -> Result<String> {
    let report = design_for(cfg)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Io(format!("report serialization: {e}")))?;
    if let Some(dir) = out_dir {
        write_atomic(&dir.join("design.json"), format!("{json}\n").as_bytes())?;
    }
    Ok(json)
}

fn trajectory_csv(traj: &Trajectory<f64>) -> String {
    let mut csv = String::from("t,V,norm_y,norm_PN,norm_Pperp,norm_u_lin,norm_u_sign,norm_d,r\n");
    for s in &traj.samples {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            s.t, s.v, s.norm_y, s.norm_pn, s.norm_pperp, s.norm_u_lin, s.norm_u_sign, s.norm_d, s.r
        );
    }
    csv
}

fn field_csv(
    out: &SimOutput<f64>,
    domain: &heatstab::spectral::DomainSpec<f64>,
    grid: &[usize],
) -> Result<String> {
    let last = out.trajectory.last();
    let field = reconstruct_field(&last.state, &out.closed_loop.modes, domain, grid)?;
    let dim = field.axes.len();
    let mut csv = String::new();
    for axis in 0..dim {
        let _ = write!(csv, "x{},", axis + 1);
    }
    csv.push_str("value\n");
    let mut index = vec![0usize; dim];
    for value in &field.values {
        for (axis, &i) in index.iter().enumerate() {
            let _ = write!(csv, "{},", field.axes[axis][i]);
        }
        let _ = writeln!(csv, "{value}");
        for axis in (0..dim).rev() {
            index[axis] += 1;
            if index[axis] < field.axes[axis].len() {
                break;
            }
            index[axis] = 0;
        }
    }
    Ok(csv)
}

/// Stagnation floor: max ||y|| from the first sample with r < sigma onward.
fn floor_norm(out: &SimOutput<f64>) -> Option<f64> {
    let params = &out.closed_loop.params;
    if params.d_bound <= 0.0 {
        return None;
    }
    out.trajectory
        .samples
        .iter()
        .position(|s| s.r < params.sigma)
        .map(|first| {
            out.trajectory.samples[first..]
                .iter()
                .map(|s| s.norm_y)
                .fold(0.0, f64::max)
        })
}

/// Runs one configuration and writes `trajectory.csv`, optionally
/// `field.csv`, and `manifest.json` into `out_dir`.
pub fn cmd_simulate(resolved: &ConfigFile, out_dir: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    let sim_cfg = resolved.sim_config()?;
    let out = run(&sim_cfg)?;
    let params = &out.closed_loop.params;

    let tol = 0.05 * params.lambda;
    let (decay, no_fit_reason) = match fit_decay(&out.trajectory, params) {
        Ok(report) => {
            let cert = certificate_check(&out.trajectory, params, tol)?;
            (
                Some(DecaySection {
                    fitted_rate: report.fitted_rate,
                    fit_window: report.fit_window,
                    window_len: report.window_len,
                    r_floor: report.r_floor,
                    certificate_margin: cert.margin,
                    certificate_tol: tol,
                    certificate_pass: cert.pass,
                }),
                None,
            )
        }
        Err(heatstab::Error::NoFit(reason)) => (None, Some(reason)),
        Err(e) => return Err(e.into()),
    };

    let csv = trajectory_csv(&out.trajectory);
    let field = match &resolved.output.field_grid {
        Some(grid) => Some(field_csv(&out, &resolved.domain()?, grid)?),
        None => None,
    };

    let manifest = RunManifest {
        schema_version: crate::config::SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        config: resolved.clone(),
        design: design_for(resolved)?,
        decay,
        no_fit_reason,
        floor_norm: floor_norm(&out),
        outputs: OutputPaths {
            trajectory_csv: "trajectory.csv".into(),
            field_csv: field.as_ref().map(|_| "field.csv".into()),
        },
        timing: Timing {
            wall_ms: started.elapsed().as_millis() as u64,
        },
    };

    write_atomic(&out_dir.join("trajectory.csv"), csv.as_bytes())?;
    if let Some(field) = field {
        write_atomic(&out_dir.join("field.csv"), field.as_bytes())?;
    }
    write_atomic(&out_dir.join("manifest.json"), manifest.to_json()?.as_bytes())?;
    Ok(manifest)
}

/// Runs every sweep cell concurrently and writes a summary table plus one
/// manifest directory per cell.
pub fn cmd_sweep(base: &ConfigFile, out_dir: &Path) -> Result<String> {
    let cells = base.sweep_cells()?;
    let results: Vec<Result<(usize, RunManifest)>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let resolved = cell.resolve()?;
            let cell_dir = out_dir.join(format!("cell_{i:04}"));
            let manifest = cmd_simulate(&resolved, &cell_dir)?;
            Ok((i, manifest))
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    for result in results {
        rows.push(result?);
    }
    rows.sort_by_key(|(i, _)| *i);

    let mut summary = String::from(
        "cell,lambda,sigma,disturbance_bound,omega,fitted_rate,floor_norm,certificate_margin,certificate_pass\n",
    );
    for (i, manifest) in &rows {
        let cfg = &manifest.config;
        let omega: Vec<String> = cfg
            .domain
            .omega_lo
            .iter()
            .zip(&cfg.domain.omega_hi)
            .map(|(lo, hi)| format!("{lo}..{hi}"))
            .collect();
        let (rate, margin, pass) = match &manifest.decay {
            Some(d) => (
                format!("{}", d.fitted_rate),
                format!("{}", d.certificate_margin),
                format!("{}", d.certificate_pass),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        let floor = manifest
            .floor_norm
            .map(|f| format!("{f}"))
            .unwrap_or_default();
        let _ = writeln!(
            summary,
            "cell_{i:04},{},{},{},{},{rate},{floor},{margin},{pass}",
            cfg.model.lambda,
            cfg.model.sigma.expect("resolved"),
            cfg.model.disturbance_bound,
            omega.join("x"),
        );
    }
    write_atomic(&out_dir.join("summary.csv"), summary.as_bytes())?;
    Ok(format!(
        "{} cell(s) complete; summary at {}",
        rows.len(),
        out_dir.join("summary.csv").display()
    ))
}

/// Writes the full Gram matrix as CSV and reports the spectral constant.
pub fn cmd_gram(cfg: &ConfigFile, out_dir: &Path) -> Result<String> {
    let domain = cfg.domain()?;
    let modes = enumerate_modes(&domain, cfg.model.modes, cfg.model.shift)?;
    let gram = GramMatrix::assemble(&modes, &domain)?;
    let n = controlled_mode_count(&modes, cfg.model.lambda)?;
    let constant = gram.spectral_constant(n)?;

    let m = gram.size();
    let mut csv = String::new();
    for i in 0..m {
        for j in 0..m {
            if j > 0 {
                csv.push(',');
            }
            let _ = write!(csv, "{}", gram.entry(i, j));
        }
        csv.push('\n');
    }
    write_atomic(&out_dir.join("gram.csv"), csv.as_bytes())?;

    let report = serde_json::json!({
        "m": m,
        "n": n,
        "c_lambda": constant.value,
        "csv": out_dir.join("gram.csv").display().to_string(),
    });
    serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Io(format!("report serialization: {e}")))
}
