use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("invalid time interval: t1 = {t1} < t0 = {t0}")]
    Interval { t0: f64, t1: f64 },

    #[error("degenerate coupling schedule at t = {t}: both pulse products vanish")]
    DegenerateSchedule { t: f64 },

    #[error("step resolution too coarse: max |M| dt = {norm_dt:.3} exceeds {limit}")]
    Resolution { norm_dt: f64, limit: f64 },

    #[error("propagator state: {0}")]
    State(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
