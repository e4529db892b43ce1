//! Iterating the map: trajectories, outcomes and post-transient samples.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{fixed_points, step, Discretization, FixedPointKind, ModelParams, State};
use crate::{Error, Result};

/// Number of trailing states inspected when deciding convergence.
pub const CONVERGENCE_WINDOW: usize = 100;
/// Relative distance to a fixed point accepted as "at" that point.
pub const FIXED_POINT_MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub n_steps: usize,
    pub transient: usize,
    pub record_every: usize,
    pub convergence_tol: f64,
    pub divergence_bound: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_steps: 20_000,
            transient: 10_000,
            record_every: 1,
            convergence_tol: 1e-9,
            divergence_bound: 1e12,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.transient >= self.n_steps {
            return Err(Error::Config(format!(
                "transient ({}) must be smaller than n_steps ({})",
                self.transient, self.n_steps
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return Err(Error::Config("convergence_tol must be positive".into()));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(Error::Config("divergence_bound must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Settled on the listed fixed point.
    ConvergedTo { kind: FixedPointKind, state: State },
    /// Bounded but not settling (cycle, invariant curve or chaos).
    Oscillatory,
    /// Left the divergence bound or became non-finite at this step.
    Diverged(usize),
    /// Still contracting toward a fixed point when the step budget ran out.
    MaxStepsReached,
}

impl Outcome {
    pub fn converged_to(&self) -> Option<FixedPointKind> {
        match self {
            Outcome::ConvergedTo { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::ConvergedTo { kind, state } => write!(f, "ConvergedTo({kind} = {state})"),
            Outcome::Oscillatory => f.write_str("Oscillatory"),
            Outcome::Diverged(i) => write!(f, "Diverged(step {i})"),
            Outcome::MaxStepsReached => f.write_str("MaxStepsReached"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(step index, state)` pairs, index 0 is the initial state.
    pub states: Vec<(usize, State)>,
    pub outcome: Outcome,
}

/// Iterator over successive states of the map, stopping at divergence.
pub struct Orbit<'a> {
    params: &'a ModelParams,
    dsc: &'a Discretization,
    state: State,
    index: usize,
    bound: f64,
    diverged: Option<usize>,
}

impl<'a> Orbit<'a> {
    pub fn new(params: &'a ModelParams, dsc: &'a Discretization, init: State, bound: f64) -> Self {
        Self {
            params,
            dsc,
            state: init,
            index: 0,
            bound,
            diverged: None,
        }
    }

    /// Step at which the orbit left the bound, if it did.
    pub fn diverged(&self) -> Option<usize> {
        self.diverged
    }

    pub fn state(&self) -> State {
        self.state
    }
}

impl Iterator for Orbit<'_> {
    /// `(step index, state after that step)`
    type Item = (usize, State);

    fn next(&mut self) -> Option<Self::Item> {
        if self.diverged.is_some() {
            return None;
        }
        let next = step(self.params, self.dsc, &self.state);
        self.index += 1;
        if !next.is_finite() || next.max_abs() > self.bound {
            self.diverged = Some(self.index);
            return None;
        }
        self.state = next;
        Some((self.index, next))
    }
}

fn check_init(init: &State) -> Result<()> {
    for (name, v) in [("X0", init.x), ("Y0", init.y), ("Z0", init.z)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter {
                name,
                value: v,
                reason: "initial populations must be finite and non-negative",
            });
        }
    }
    Ok(())
}

pub fn simulate(
    p: &ModelParams,
    dsc: &Discretization,
    init: State,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_init(&init)?;

    let known: Vec<_> = fixed_points(p).into_iter().filter(|f| f.exists).collect();
    let nearest = |st: &State| -> f64 {
        known
            .iter()
            .map(|f| st.dist(&f.coords))
            .fold(f64::INFINITY, f64::min)
    };

    let mut states = vec![(0, init)];
    let mut window: VecDeque<State> = VecDeque::with_capacity(CONVERGENCE_WINDOW + 1);
    window.push_back(init);
    // max distance to the nearest fixed point over the two halves of the post-transient phase
    let half = cfg.transient + (cfg.n_steps - cfg.transient) / 2;
    let (mut early, mut late) = (0.0f64, 0.0f64);

    let mut orbit = Orbit::new(p, dsc, init, cfg.divergence_bound);
    for (i, st) in orbit.by_ref().take(cfg.n_steps) {
        if i % cfg.record_every == 0 {
            states.push((i, st));
        }
        if window.len() == CONVERGENCE_WINDOW {
            window.pop_front();
        }
        window.push_back(st);
        if i > cfg.transient {
            let d = nearest(&st);
            if i <= half {
                early = early.max(d);
            } else {
                late = late.max(d);
            }
        }
    }

    let outcome = if let Some(i) = orbit.diverged() {
        Outcome::Diverged(i)
    } else {
        let last = orbit.state();
        let scale = 1.0 + last.max_abs();
        let spread = window.iter().map(|s| s.dist(&last)).fold(0.0, f64::max) / scale;
        let matched = known
            .iter()
            .find(|f| last.dist(&f.coords) <= FIXED_POINT_MATCH_TOL * (1.0 + f.coords.max_abs()));
        match matched {
            Some(f) if spread < cfg.convergence_tol => Outcome::ConvergedTo {
                kind: f.kind,
                state: f.coords,
            },
            _ if late < 0.5 * early => Outcome::MaxStepsReached,
            _ => Outcome::Oscillatory,
        }
    };
    Ok(Trajectory { states, outcome })
}

/// Post-transient states, every `record_every`-th; empty if the orbit diverges.
pub fn terminal_attractor_samples(
    p: &ModelParams,
    dsc: &Discretization,
    init: State,
    cfg: &SimConfig,
) -> Result<Vec<State>> {
    cfg.validate()?;
    check_init(&init)?;
    let mut out = Vec::with_capacity((cfg.n_steps - cfg.transient) / cfg.record_every);
    let mut orbit = Orbit::new(p, dsc, init, cfg.divergence_bound);
    for (i, st) in orbit.by_ref().take(cfg.n_steps) {
        if i > cfg.transient && (i - cfg.transient) % cfg.record_every == 0 {
            out.push(st);
        }
    }
    if orbit.diverged().is_some() {
        out.clear();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixed_point;

    fn example1() -> ModelParams {
        ModelParams::new(2.0, 40.0, 0.005, 0.52, 0.28, 15.0, 0.189, 0.09).unwrap()
    }

    fn example2() -> ModelParams {
        ModelParams::new(15.0, 40.0, 0.006, 14.5, 0.0019, 16.0, 11.1, 6.0).unwrap()
    }

    const INIT: State = State::new(30.0, 5.0, 10.0);

    fn long() -> SimConfig {
        SimConfig {
            n_steps: 100_000,
            transient: 50_000,
            ..SimConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig::default();
        c.transient = c.n_steps;
        assert!(c.validate().is_err());
        let c = SimConfig {
            record_every: 0,
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SimConfig {
            convergence_tol: 0.0,
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn negative_init_rejected() {
        let d = Discretization::new(0.8, 0.05).unwrap();
        let r = simulate(
            &example2(),
            &d,
            State::new(-1.0, 1.0, 1.0),
            &SimConfig::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn example2_converges_at_small_step() {
        let p = example2();
        let d = Discretization::new(0.8, 0.05).unwrap();
        let t = simulate(&p, &d, INIT, &long()).unwrap();
        assert_eq!(t.outcome.converged_to(), Some(FixedPointKind::Interior));
        let last = t.states.last().unwrap().1;
        let e = fixed_point(&p, FixedPointKind::Interior).coords;
        assert!(last.dist(&e) < 1e-6);
    }

    #[test]
    fn example2_unsettled_past_bound() {
        let d = Discretization::new(0.8, 0.08).unwrap();
        let t = simulate(&example2(), &d, INIT, &long()).unwrap();
        assert!(t.outcome.converged_to().is_none(), "{}", t.outcome);
    }

    #[test]
    fn started_on_fixed_point() {
        let p = example1();
        let e1 = fixed_point(&p, FixedPointKind::Axial).coords;
        let d = Discretization::new(0.8, 0.65).unwrap();
        let cfg = SimConfig {
            n_steps: 200,
            transient: 100,
            ..SimConfig::default()
        };
        let t = simulate(&p, &d, e1, &cfg).unwrap();
        assert_eq!(t.outcome.converged_to(), Some(FixedPointKind::Axial));
        assert!(t.states.iter().all(|(_, s)| *s == e1));
    }

    #[test]
    fn record_thinning_and_indices() {
        let d = Discretization::new(0.8, 0.05).unwrap();
        let cfg = SimConfig {
            n_steps: 1000,
            transient: 10,
            record_every: 7,
            ..SimConfig::default()
        };
        let t = simulate(&example2(), &d, INIT, &cfg).unwrap();
        assert_eq!(t.states[0], (0, INIT));
        assert!(t.states.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(t.states.iter().skip(1).all(|(i, _)| i % 7 == 0));
        assert_eq!(t.states.len(), 1 + 1000 / 7);
    }

    #[test]
    fn divergence_detected() {
        let d = Discretization::new(1.0, 3.0).unwrap();
        let t = simulate(&example2(), &d, INIT, &SimConfig::default()).unwrap();
        assert!(matches!(t.outcome, Outcome::Diverged(_)));
        assert!(t.states.iter().all(|(_, s)| s.is_finite()));
        assert!(
            terminal_attractor_samples(&example2(), &d, INIT, &SimConfig::default())
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn deterministic() {
        let d = Discretization::new(0.85, 0.09).unwrap();
        let a = simulate(&example2(), &d, INIT, &SimConfig::default()).unwrap();
        let b = simulate(&example2(), &d, INIT, &SimConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_count() {
        let d = Discretization::new(0.8, 0.05).unwrap();
        let cfg = SimConfig {
            n_steps: 1000,
            transient: 400,
            record_every: 3,
            ..SimConfig::default()
        };
        let s = terminal_attractor_samples(&example2(), &d, INIT, &cfg).unwrap();
        assert_eq!(s.len(), 600 / 3);
    }

    #[test]
    fn slow_contraction_is_not_oscillation() {
        // Example 2 at s = 0.05 contracts at ~7e-4 per step; 6000 steps is not enough
        let d = Discretization::new(0.8, 0.05).unwrap();
        let cfg = SimConfig {
            n_steps: 6000,
            transient: 1000,
            ..SimConfig::default()
        };
        let t = simulate(&example2(), &d, INIT, &cfg).unwrap();
        assert_eq!(t.outcome, Outcome::MaxStepsReached);
    }
}
