//! Text serializations: CSV files, whitespace plot-data files and report tables.
//!
//! CSV values are written with Rust's shortest round-trip formatting, so a
//! file re-parses to the exact same `f64`s. Tables meant for reading are
//! rounded to four decimals.

use std::io::{self, Write};

use crate::analysis::{BifurcationResult, LyapunovResult};
use crate::model::{Discretization, FixedPoint};
use crate::simulation::Trajectory;
use crate::stability::StabilityReport;
use crate::thresholds::{ThresholdSet, S9};

pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "step,X,Y,Z")?;
    for (i, s) in &traj.states {
        writeln!(w, "{i},{},{},{}", s.x, s.y, s.z)?;
    }
    writeln!(w, "# outcome: {}", traj.outcome)
}

/// Long format: one `(parameter, X sample)` row per sample. Diverged cells get an empty sample.
pub fn write_bifurcation_csv<W: Write>(mut w: W, res: &BifurcationResult) -> io::Result<()> {
    writeln!(w, "{},sample", res.parameter)?;
    for pt in &res.points {
        if pt.diverged() {
            writeln!(w, "{},", pt.value)?;
        }
        for x in pt.x_values() {
            writeln!(w, "{},{x}", pt.value)?;
        }
    }
    Ok(())
}

pub fn write_bifurcation_plot<W: Write>(mut w: W, res: &BifurcationResult) -> io::Result<()> {
    let fixed = match res.parameter {
        crate::analysis::SweepParameter::S => "alpha",
        crate::analysis::SweepParameter::Alpha => "s",
    };
    writeln!(w, "# bifurcation diagram of X against {}", res.parameter)?;
    writeln!(w, "# {fixed} = {}", res.fixed)?;
    match res.detected_s_star {
        Some(v) => writeln!(w, "# detected switch point = {v}")?,
        None => writeln!(w, "# detected switch point = none")?,
    }
    writeln!(w, "# {} X", res.parameter)?;
    for pt in &res.points {
        if pt.diverged() {
            writeln!(w, "# diverged at {} = {}", res.parameter, pt.value)?;
        }
        for x in pt.x_values() {
            writeln!(w, "{} {x}", pt.value)?;
        }
    }
    Ok(())
}

/// `(parameter, lle)` rows; the exponent is left empty for diverged cells.
pub fn write_lyapunov_csv<W: Write>(mut w: W, res: &LyapunovResult) -> io::Result<()> {
    writeln!(w, "{},lle", res.parameter)?;
    for pt in &res.points {
        match pt.lle {
            Some(l) => writeln!(w, "{},{l}", pt.value)?,
            None => writeln!(w, "{},", pt.value)?,
        }
    }
    Ok(())
}

pub fn write_lyapunov_plot<W: Write>(mut w: W, res: &LyapunovResult) -> io::Result<()> {
    writeln!(
        w,
        "# largest Lyapunov exponent per iteration against {}",
        res.parameter
    )?;
    writeln!(
        w,
        "# n_steps = {}, transient = {}, renorm_interval = {}, zero_band = {}",
        res.n_steps, res.transient, res.renorm_interval, res.zero_band
    )?;
    writeln!(w, "# {} lle", res.parameter)?;
    for pt in &res.points {
        match (pt.lle, pt.diverged_at) {
            (Some(l), _) => writeln!(w, "{} {l}", pt.value)?,
            (None, Some(i)) => writeln!(
                w,
                "# diverged at {} = {} (step {i})",
                res.parameter, pt.value
            )?,
            (None, None) => writeln!(w, "# diverged at {} = {}", res.parameter, pt.value)?,
        }
    }
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

/// One row per order, thresholds to four decimals, `-` where undefined.
pub fn write_threshold_table<W: Write>(mut w: W, sets: &[ThresholdSet]) -> io::Result<()> {
    if let Some(first) = sets.first() {
        writeln!(w, "# R0 = {:.4}", first.r0)?;
        writeln!(w, "# theta1 = {}", cell(first.theta1))?;
        writeln!(w, "# d1 = {}", cell(first.d1))?;
    }
    writeln!(
        w,
        "{:<8} {:>12} {:>12} {:>12} {:>12} {:>14} {:>12} {:>12} {:>12}",
        "alpha", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9"
    )?;
    for t in sets {
        write!(w, "{:<8.4}", t.alpha)?;
        for (name, v) in t.entries() {
            let width = if name == "s6" { 14 } else { 12 };
            write!(w, " {:>width$}", cell(v))?;
        }
        let s9 = match t.s9 {
            S9::Undefined => "-".to_string(),
            other => format!("{other:.4}"),
        };
        writeln!(w, " {s9:>12}")?;
    }
    for t in sets {
        writeln!(w)?;
        writeln!(w, "# alpha = {:.4}", t.alpha)?;
        for v in &t.verdicts {
            writeln!(w, "#   {v}")?;
        }
    }
    Ok(())
}

pub fn write_threshold_csv<W: Write>(mut w: W, sets: &[ThresholdSet]) -> io::Result<()> {
    writeln!(w, "alpha,R0,theta1,d1,s2,s3,s4,s5,s6,s7,s8,s9,s9_status")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for t in sets {
        let (s9, status) = match t.s9 {
            S9::Found(v) => (v.to_string(), "found".to_string()),
            S9::AboveMax(m) => (String::new(), format!("above {m}")),
            S9::Undefined => (String::new(), "undefined".to_string()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{s9},{status}",
            t.alpha,
            t.r0,
            opt(t.theta1),
            opt(t.d1),
            opt(t.s2),
            opt(t.s3),
            opt(t.s4),
            opt(t.s5),
            opt(t.s6),
            opt(t.s7),
            opt(t.s8),
        )?;
    }
    Ok(())
}

/// Fixed-point table with existence, coordinates and, for existing points, eigenvalue class.
pub fn write_fixed_point_report<W: Write>(
    mut w: W,
    dsc: &Discretization,
    r0: f64,
    theta1: Option<f64>,
    points: &[(FixedPoint, Option<StabilityReport>)],
) -> io::Result<()> {
    writeln!(
        w,
        "# alpha = {}, s = {}, rho = {}",
        dsc.alpha(),
        dsc.s(),
        dsc.rho()
    )?;
    writeln!(w, "# R0 = {r0:.4}")?;
    writeln!(w, "# theta1 = {}", cell(theta1))?;
    writeln!(
        w,
        "{:<4} {:<7} {:>14} {:>14} {:>14} {:<15} {:>12}  note",
        "pt", "exists", "X", "Y", "Z", "class", "max|xi|"
    )?;
    for (fp, report) in points {
        let (class, radius) = match report {
            Some(r) => (r.classification.to_string(), format!("{:.6}", r.moduli[0])),
            None => ("-".to_string(), "-".to_string()),
        };
        let mut note = fp.existence_note.clone();
        if let Some(pf) = report.as_ref().and_then(|r| r.planar_factor.as_ref()) {
            if pf.disagrees() {
                note = format!(
                    "quadratic-factor window says {}, eigenvalues say {}",
                    if pf.in_factor_window {
                        "stable"
                    } else {
                        "unstable"
                    },
                    if pf.eigen_sink { "stable" } else { "unstable" }
                );
            }
        }
        let coord = |v: f64| {
            if v.is_finite() {
                format!("{v:.4}")
            } else {
                "-".to_string()
            }
        };
        writeln!(
            w,
            "{:<4} {:<7} {:>14} {:>14} {:>14} {:<15} {:>12}  {note}",
            fp.kind.label(),
            fp.exists,
            coord(fp.coords.x),
            coord(fp.coords.y),
            coord(fp.coords.z),
            class,
            radius
        )?;
    }
    for (fp, report) in points {
        if let Some(r) = report {
            let jury: Vec<String> = r
                .jury
                .iter()
                .map(|c| format!("{}: {:+.3e}", c.name, c.margin))
                .collect();
            writeln!(w, "# {} jury margins: {}", fp.kind, jury.join(", "))?;
        }
    }
    Ok(())
}
