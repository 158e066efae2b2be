//! Simulation library for a wired nano-communication link: actin
//! nanowire self-assembly, RLC channel characterization, an SER-based
//! receiver converting current pulses into Ca2+ release and
//! bioluminescent photons, and modulation with Monte-Carlo BER
//! evaluation. Every run is deterministic per (config, seed).

pub mod assembly;
pub mod bioluminescence;
pub mod channel;
pub mod config;
pub mod csvout;
pub mod error;
pub mod experiment;
pub mod modem;
pub mod receiver;
pub mod vec3;

pub use error::{Error, Result};
pub use vec3::Vec3;
