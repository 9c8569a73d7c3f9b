//! Simulation of a reconfigurable Mach-Zehnder interferometer mesh used as a
//! physically unclonable function (PUF).
//!
//! The pipeline runs from seeded fabrication randomness ([`fabrication`])
//! through transfer-matrix propagation ([`photonic`]) and noisy readout to
//! quantized responses and their comparison metrics ([`metrics`]). On top of
//! that sit exact counting of the challenge space ([`combinatorics`]), an
//! enrollment/verification protocol ([`protocol`]) and the two-device
//! experiment campaigns ([`experiments`]).

pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod fabrication;
pub mod metrics;
pub mod photonic;
pub mod protocol;

pub use error::{PufError, Result};
