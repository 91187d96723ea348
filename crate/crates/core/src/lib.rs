//! Adiabatic dark-state transfer of microwave quantum states between two
//! cavities linked by optomechanical transducers and an optical fiber.
//!
//! The crate is organised bottom-up:
//!
//! - [`matops`]: small dense complex matrices, `expm`, time-ordered products
//! - [`network`]: the seven-mode chain, coupling schedules, `M(t)` and the
//!   dark-state analysis
//! - [`engine`]: propagation, bath-noise moments and the resulting channel
//! - [`fidelity`]: Gaussian and qubit transfer fidelities
//! - [`cli`]: run configurations, parameter sweeps and CSV output

pub mod cli;
pub mod engine;
pub mod error;
pub mod fidelity;
pub mod matops;
pub mod network;

pub use error::{Error, Result};
