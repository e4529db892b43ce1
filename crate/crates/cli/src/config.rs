use std::fmt;
use std::path::{Path, PathBuf};

use fracmap::analysis::{LyapunovConfig, SweepParameter, SweepRange, SweepSpec};
use fracmap::model::order_scale;
use fracmap::simulation::SimConfig;
use fracmap::{Discretization, ModelParams, State};
use serde::{Deserialize, Serialize};

/// Problem with the configuration file or its contents. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<fracmap::Error> for ConfigError {
    fn from(e: fracmap::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn default_init() -> [f64; 3] {
    [30.0, 5.0, 10.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

/// Everything one run needs. Every command reads the same file and picks the
/// fields it cares about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    /// Orders tabulated by `thresholds`; falls back to `alpha` when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default = "default_init")]
    pub init: [f64; 3],
    /// Fail with a numerical error when `simulate` does not reach a fixed point.
    #[serde(default)]
    pub require_convergence: bool,
    /// Carry the last state of each sweep cell into the next one.
    #[serde(default)]
    pub continuation: bool,
    /// Upper end of the s9 search; defaults to twice min(s8, 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s9_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelParams,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub lyapunov: LyapunovConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepTable>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate()?;
        for &a in std::iter::once(&self.alpha).chain(&self.alphas) {
            order_scale(a)?;
        }
        if let Some(s) = self.s {
            Discretization::new(self.alpha, s)?;
        }
        if self.init.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ConfigError(format!(
                "init must be finite and non-negative, got {:?}",
                self.init
            )));
        }
        self.sim.validate()?;
        self.lyapunov.validate()?;
        if let Some(m) = self.s9_max {
            if !(m.is_finite() && m > 0.0) {
                return Err(ConfigError(format!("s9_max must be positive, got {m}")));
            }
        }
        if let Some(sw) = &self.sweep {
            SweepRange::new(sw.lo, sw.hi, sw.n_points)?;
        }
        Ok(())
    }

    pub fn init_state(&self) -> State {
        self.init.into()
    }

    pub fn step_size(&self) -> Result<f64, ConfigError> {
        self.s
            .ok_or_else(|| ConfigError("this command needs a step size `s`".into()))
    }

    pub fn discretization(&self) -> Result<Discretization, ConfigError> {
        Ok(Discretization::new(self.alpha, self.step_size()?)?)
    }

    pub fn orders(&self) -> Vec<f64> {
        if self.alphas.is_empty() {
            vec![self.alpha]
        } else {
            self.alphas.clone()
        }
    }

    /// The swept parameter takes the range; the other one is held at its scalar value.
    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let sw = self
            .sweep
            .ok_or_else(|| ConfigError("this command needs a [sweep] table".into()))?;
        let spec = match sw.parameter {
            SweepParameter::S => SweepSpec::step_size(self.alpha, sw.lo, sw.hi, sw.n_points)?,
            SweepParameter::Alpha => {
                SweepSpec::order(self.step_size()?, sw.lo, sw.hi, sw.n_points)?
            }
        };
        Ok(spec)
    }
}
