use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use fracmap::analysis::{bifurcation_sweep, lyapunov_sweep, SweepOptions};
use fracmap::output::{
    write_bifurcation_csv, write_bifurcation_plot, write_fixed_point_report, write_lyapunov_csv,
    write_lyapunov_plot, write_threshold_csv, write_threshold_table, write_trajectory_csv,
};
use fracmap::simulation::{simulate, Outcome};
use fracmap::stability::classify;
use fracmap::thresholds::thresholds_with;
use fracmap::{basic_reproduction_number, fixed_points, theta_threshold, Error};

use crate::config::{ConfigError, RunConfig};

/// A run that completed its setup but failed numerically. Maps to exit code 3.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn lift(e: Error) -> anyhow::Error {
    match e {
        Error::SingularJacobian(_) | Error::Diverged(_) => NumericalFailure(e.to_string()).into(),
        _ => ConfigError(e.to_string()).into(),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_file<F>(dir: &Path, name: &str, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(dir, name)?;
    body(&mut w)
        .and_then(|_| w.flush())
        .with_context(|| format!("writing {name}"))
}

pub fn fixed_points_cmd(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let dsc = cfg.discretization()?;
    let mut rows = Vec::new();
    for fp in fixed_points(&cfg.model) {
        let report = if fp.exists {
            Some(classify(&cfg.model, &dsc, &fp).map_err(lift)?)
        } else {
            None
        };
        rows.push((fp, report));
    }
    let r0 = basic_reproduction_number(&cfg.model);
    let theta1 = theta_threshold(&cfg.model);
    let mut text = Vec::new();
    write_fixed_point_report(&mut text, &dsc, r0, theta1, &rows)?;
    write_file(out, "fixed_points.txt", |w| w.write_all(&text))?;
    stdout.write_all(&text)?;
    Ok(())
}

pub fn thresholds_cmd(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let sets = cfg
        .orders()
        .into_iter()
        .map(|a| thresholds_with(&cfg.model, a, cfg.s9_max).map_err(lift))
        .collect::<Result<Vec<_>>>()?;
    let mut text = Vec::new();
    write_threshold_table(&mut text, &sets)?;
    write_file(out, "thresholds.txt", |w| w.write_all(&text))?;
    write_file(out, "thresholds.csv", |w| write_threshold_csv(w, &sets))?;
    stdout.write_all(&text)?;
    Ok(())
}

pub fn simulate_cmd(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let dsc = cfg.discretization()?;
    let traj = simulate(&cfg.model, &dsc, cfg.init_state(), &cfg.sim).map_err(lift)?;
    write_file(out, "trajectory.csv", |w| write_trajectory_csv(w, &traj))?;
    writeln!(
        stdout,
        "alpha = {}, s = {}, rho = {}",
        dsc.alpha(),
        dsc.s(),
        dsc.rho()
    )?;
    writeln!(stdout, "outcome: {}", traj.outcome)?;
    if cfg.require_convergence && !matches!(traj.outcome, Outcome::ConvergedTo { .. }) {
        return Err(NumericalFailure(format!("no convergence: {}", traj.outcome)).into());
    }
    Ok(())
}

pub fn bifurcate_cmd(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let spec = cfg.sweep_spec()?;
    let opts = SweepOptions {
        continuation: cfg.continuation,
    };
    let res =
        bifurcation_sweep(&cfg.model, &spec, cfg.init_state(), &cfg.sim, &opts).map_err(lift)?;
    write_file(out, "bifurcation.csv", |w| write_bifurcation_csv(w, &res))?;
    write_file(out, "bifurcation.dat", |w| write_bifurcation_plot(w, &res))?;
    let diverged = res.points.iter().filter(|p| p.diverged()).count();
    writeln!(stdout, "cells: {}, diverged: {diverged}", res.points.len())?;
    match res.detected_s_star {
        Some(v) => writeln!(stdout, "s* = {v}")?,
        None => writeln!(stdout, "s* = none (every cell collapsed to a point)")?,
    }
    Ok(())
}

pub fn lyapunov_cmd(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let spec = cfg.sweep_spec()?;
    let opts = SweepOptions {
        continuation: cfg.continuation,
    };
    let res =
        lyapunov_sweep(&cfg.model, &spec, cfg.init_state(), &cfg.lyapunov, &opts).map_err(lift)?;
    write_file(out, "lyapunov.csv", |w| write_lyapunov_csv(w, &res))?;
    write_file(out, "lyapunov.dat", |w| write_lyapunov_plot(w, &res))?;
    let changes = res.sign_changes();
    if changes.is_empty() {
        writeln!(stdout, "sign changes: none")?;
    }
    for (lo, hi) in changes {
        writeln!(stdout, "sign change in [{lo}, {hi}]")?;
    }
    if let Some((lo, hi)) = res.first_loss_of_stability() {
        writeln!(stdout, "first loss of stability in [{lo}, {hi}]")?;
    }
    if let Some((v, lle)) = res.max_lle() {
        writeln!(stdout, "max LLE = {lle:.6e} at {v}")?;
    }
    Ok(())
}
