use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("gamma function evaluated outside (0, 2]: x = {0}")]
    GammaDomain(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fixed point {0} does not exist for these parameters")]
    NotExisting(&'static str),

    #[error("jacobian is singular at Y = -a (Y = {0})")]
    SingularJacobian(f64),

    #[error("orbit diverged at step {0}")]
    Diverged(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
