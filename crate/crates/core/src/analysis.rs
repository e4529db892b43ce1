//! Parameter sweeps: bifurcation diagrams and largest Lyapunov exponents.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{step, Discretization, ModelParams, State};
use crate::simulation::{terminal_attractor_samples, SimConfig};
use crate::stability::jacobian_unchecked;
use crate::{Error, Result};

/// Relative spread above which post-transient samples count as more than one point.
pub const COLLAPSE_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    /// Step-size `s` at fixed order.
    S,
    /// Fractional order at fixed step-size.
    Alpha,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::S => "s",
            SweepParameter::Alpha => "alpha",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

impl SweepRange {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        let r = Self { lo, hi, n_points };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return Err(Error::Config(format!(
                "sweep range needs 0 < lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.n_points < 2 {
            return Err(Error::Config("sweep needs at least 2 points".into()));
        }
        Ok(())
    }

    /// Equally spaced values, both ends included.
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

/// What is swept, over which range, and the value held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    /// `alpha` when sweeping `s`, `s` when sweeping `alpha`.
    pub fixed: f64,
    pub range: SweepRange,
}

impl SweepSpec {
    pub fn step_size(alpha: f64, lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        let spec = Self {
            parameter: SweepParameter::S,
            fixed: alpha,
            range: SweepRange::new(lo, hi, n_points)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn order(s: f64, lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        let spec = Self {
            parameter: SweepParameter::Alpha,
            fixed: s,
            range: SweepRange::new(lo, hi, n_points)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.range.validate()?;
        // both ends must give a valid discretization
        self.discretization(self.range.lo)?;
        self.discretization(self.range.hi)?;
        Ok(())
    }

    pub fn discretization(&self, value: f64) -> Result<Discretization> {
        match self.parameter {
            SweepParameter::S => Discretization::new(self.fixed, value),
            SweepParameter::Alpha => Discretization::new(value, self.fixed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepOptions {
    /// Start each cell from the last state of the previous one. Forces sequential execution.
    pub continuation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationPoint {
    pub value: f64,
    /// Post-transient samples; empty when the orbit diverged.
    pub samples: Vec<State>,
}

impl BifurcationPoint {
    pub fn diverged(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.x)
    }

    /// Samples sit on a single point within the relative spread tolerance.
    pub fn collapsed(&self) -> bool {
        if self.samples.is_empty() {
            return false;
        }
        let (lo, hi, sum) = self.x_values().fold(
            (f64::INFINITY, f64::NEG_INFINITY, 0.0),
            |(lo, hi, sum), x| (lo.min(x), hi.max(x), sum + x),
        );
        let mean = sum / self.samples.len() as f64;
        hi - lo <= COLLAPSE_REL_TOL * (1.0 + mean.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationResult {
    pub parameter: SweepParameter,
    pub fixed: f64,
    pub points: Vec<BifurcationPoint>,
    /// First swept value whose samples no longer collapse to one point.
    pub detected_s_star: Option<f64>,
}

/// Number of clusters among values, splitting wherever sorted neighbours differ by more than `gap`.
pub fn cluster_count(values: &[f64], gap: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    1 + v.windows(2).filter(|w| w[1] - w[0] > gap).count()
}

fn run_cells<T, F>(values: &[f64], init: State, continuation: bool, cell: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64, State) -> Result<(T, Option<State>)> + Sync,
{
    if continuation {
        let mut out = Vec::with_capacity(values.len());
        let mut start = init;
        for &v in values {
            let (res, last) = cell(v, start)?;
            start = last.unwrap_or(init);
            out.push(res);
        }
        Ok(out)
    } else {
        values
            .par_iter()
            .map(|&v| cell(v, init).map(|(res, _)| res))
            .collect()
    }
}

pub fn bifurcation_sweep(
    p: &ModelParams,
    spec: &SweepSpec,
    init: State,
    cfg: &SimConfig,
    opts: &SweepOptions,
) -> Result<BifurcationResult> {
    spec.validate()?;
    cfg.validate()?;
    let values = spec.range.values();
    let points = run_cells(&values, init, opts.continuation, |value, start| {
        let dsc = spec.discretization(value)?;
        let samples = terminal_attractor_samples(p, &dsc, start, cfg)?;
        let last = samples.last().copied();
        Ok((BifurcationPoint { value, samples }, last))
    })?;
    let detected_s_star = points.iter().find(|pt| !pt.collapsed()).map(|pt| pt.value);
    Ok(BifurcationResult {
        parameter: spec.parameter,
        fixed: spec.fixed,
        points,
        detected_s_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovConfig {
    pub n_steps: usize,
    /// Steps iterated (orbit and tangent vector) before accumulation starts.
    pub transient: usize,
    /// Steps between tangent-vector renormalizations.
    pub renorm_interval: usize,
    pub divergence_bound: f64,
    /// Estimates within this distance of zero are read as zero when counting sign changes.
    pub zero_band: f64,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            n_steps: 400_000,
            transient: 200_000,
            renorm_interval: 1,
            divergence_bound: 1e12,
            zero_band: 1e-5,
        }
    }
}

impl LyapunovConfig {
    pub fn validate(&self) -> Result<()> {
        if self.transient >= self.n_steps {
            return Err(Error::Config(format!(
                "lyapunov transient ({}) must be smaller than n_steps ({})",
                self.transient, self.n_steps
            )));
        }
        if self.renorm_interval == 0 {
            return Err(Error::Config("renorm_interval must be at least 1".into()));
        }
        if !(self.zero_band >= 0.0) || !(self.divergence_bound > 0.0) {
            return Err(Error::Config(
                "zero_band and divergence_bound must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Largest Lyapunov exponent per map iteration (Benettin tangent-vector method).
///
/// A unit tangent vector is carried through the analytic Jacobian along the
/// orbit and renormalized every `renorm_interval` steps; the logs of the
/// renormalization factors after the transient are averaged over the
/// accumulated steps.
pub fn largest_lyapunov(
    p: &ModelParams,
    dsc: &Discretization,
    init: State,
    cfg: &LyapunovConfig,
) -> Result<f64> {
    Ok(lyapunov_orbit(p, dsc, init, cfg)?.0)
}

fn lyapunov_orbit(
    p: &ModelParams,
    dsc: &Discretization,
    init: State,
    cfg: &LyapunovConfig,
) -> Result<(f64, State)> {
    cfg.validate()?;
    let rho = dsc.rho();
    let mut st = init;
    let inv = 1.0 / 3f64.sqrt();
    let mut v = [inv, inv, inv];
    let mut acc = 0.0;
    for i in 1..=cfg.n_steps {
        v = jacobian_unchecked(p, rho, &st).apply(v);
        st = step(p, dsc, &st);
        if !st.is_finite() || st.max_abs() > cfg.divergence_bound {
            return Err(Error::Diverged(i));
        }
        if i % cfg.renorm_interval == 0 || i == cfg.transient || i == cfg.n_steps {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if !norm.is_finite() {
                return Err(Error::Config(format!(
                    "tangent vector overflowed at step {i}; lower renorm_interval"
                )));
            }
            if norm == 0.0 {
                return Ok((f64::NEG_INFINITY, st));
            }
            if i > cfg.transient {
                acc += norm.ln();
            }
            v = v.map(|c| c / norm);
        }
    }
    Ok((acc / (cfg.n_steps - cfg.transient) as f64, st))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovPoint {
    pub value: f64,
    /// `None` when the orbit diverged.
    pub lle: Option<f64>,
    pub diverged_at: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LleSign {
    Negative,
    Zero,
    Positive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovResult {
    pub parameter: SweepParameter,
    pub fixed: f64,
    pub points: Vec<LyapunovPoint>,
    pub renorm_interval: usize,
    pub n_steps: usize,
    pub transient: usize,
    pub zero_band: f64,
}

impl LyapunovResult {
    pub fn sign(&self, lle: f64) -> LleSign {
        if lle < -self.zero_band {
            LleSign::Negative
        } else if lle > self.zero_band {
            LleSign::Positive
        } else {
            LleSign::Zero
        }
    }

    /// Brackets `(a, b)` of neighbouring non-diverged cells where the exponent
    /// enters or leaves the negative range.
    pub fn sign_changes(&self) -> Vec<(f64, f64)> {
        let cells: Vec<(f64, bool)> = self
            .points
            .iter()
            .filter_map(|pt| {
                pt.lle
                    .map(|l| (pt.value, self.sign(l) == LleSign::Negative))
            })
            .collect();
        cells
            .windows(2)
            .filter(|w| w[0].1 != w[1].1)
            .map(|w| (w[0].0, w[1].0))
            .collect()
    }

    /// First bracket where a negative exponent reaches zero or above.
    pub fn first_loss_of_stability(&self) -> Option<(f64, f64)> {
        let cells: Vec<(f64, bool)> = self
            .points
            .iter()
            .filter_map(|pt| {
                pt.lle
                    .map(|l| (pt.value, self.sign(l) == LleSign::Negative))
            })
            .collect();
        cells
            .windows(2)
            .find(|w| w[0].1 && !w[1].1)
            .map(|w| (w[0].0, w[1].0))
    }

    pub fn max_lle(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|pt| pt.lle.map(|l| (pt.value, l)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub fn lyapunov_sweep(
    p: &ModelParams,
    spec: &SweepSpec,
    init: State,
    cfg: &LyapunovConfig,
    opts: &SweepOptions,
) -> Result<LyapunovResult> {
    spec.validate()?;
    cfg.validate()?;
    let values = spec.range.values();
    let points = run_cells(&values, init, opts.continuation, |value, start| {
        let dsc = spec.discretization(value)?;
        match lyapunov_orbit(p, &dsc, start, cfg) {
            Ok((lle, last)) => Ok((
                LyapunovPoint {
                    value,
                    lle: Some(lle),
                    diverged_at: None,
                },
                Some(last),
            )),
            Err(Error::Diverged(i)) => Ok((
                LyapunovPoint {
                    value,
                    lle: None,
                    diverged_at: Some(i),
                },
                None,
            )),
            Err(e) => Err(e),
        }
    })?;
    Ok(LyapunovResult {
        parameter: spec.parameter,
        fixed: spec.fixed,
        points,
        renorm_interval: cfg.renorm_interval,
        n_steps: cfg.n_steps,
        transient: cfg.transient,
        zero_band: cfg.zero_band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values() {
        let r = SweepRange::new(0.1, 0.2, 3).unwrap();
        assert_eq!(r.values(), vec![0.1, 0.15000000000000002, 0.2]);
        assert!(SweepRange::new(0.2, 0.2, 10).is_err());
        assert!(SweepRange::new(0.0, 0.2, 10).is_err());
        assert!(SweepRange::new(0.1, 0.2, 1).is_err());
    }

    #[test]
    fn order_sweep_must_stay_in_unit_interval() {
        assert!(SweepSpec::order(0.05, 0.5, 1.2, 5).is_err());
        assert!(SweepSpec::order(0.05, 0.5, 1.0, 5).is_ok());
    }

    #[test]
    fn clusters() {
        assert_eq!(cluster_count(&[], 0.1), 0);
        assert_eq!(cluster_count(&[1.0, 1.0001, 3.0, 2.9999, 1.0], 0.01), 2);
        assert_eq!(cluster_count(&[1.0, 2.0, 3.0], 0.5), 3);
    }

    #[test]
    fn collapsed_point() {
        let pt = BifurcationPoint {
            value: 0.1,
            samples: vec![State::new(20.0, 1.0, 1.0), State::new(20.0001, 1.0, 1.0)],
        };
        assert!(pt.collapsed());
        let pt = BifurcationPoint {
            value: 0.1,
            samples: vec![State::new(20.0, 1.0, 1.0), State::new(20.1, 1.0, 1.0)],
        };
        assert!(!pt.collapsed());
        let pt = BifurcationPoint {
            value: 0.1,
            samples: vec![],
        };
        assert!(!pt.collapsed());
    }

    #[test]
    fn sign_change_brackets() {
        let mk = |v: &[(f64, Option<f64>)]| LyapunovResult {
            parameter: SweepParameter::S,
            fixed: 0.8,
            points: v
                .iter()
                .map(|&(value, lle)| LyapunovPoint {
                    value,
                    lle,
                    diverged_at: None,
                })
                .collect(),
            renorm_interval: 1,
            n_steps: 10,
            transient: 1,
            zero_band: 1e-5,
        };
        let r = mk(&[
            (0.1, Some(-1e-3)),
            (0.2, Some(-2e-6)),
            (0.3, Some(3e-6)),
            (0.4, None),
            (0.5, Some(-1e-2)),
        ]);
        assert_eq!(r.first_loss_of_stability(), Some((0.1, 0.2)));
        assert_eq!(r.sign_changes(), vec![(0.1, 0.2), (0.3, 0.5)]);
        assert_eq!(r.max_lle(), Some((0.3, 3e-6)));
    }

    #[test]
    fn lyapunov_config_validation() {
        let c = LyapunovConfig {
            transient: 10,
            n_steps: 10,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = LyapunovConfig {
            renorm_interval: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
