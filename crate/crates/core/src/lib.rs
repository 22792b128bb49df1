//! Few-mode bosonic Fock-space simulator for dual-rail photonic qubits.
//!
//! The crate covers the pieces needed to study loss on dual-rail qubits and
//! its detection by a balanced QND measurement of the total photon number:
//!
//! - [`fock`]: truncated multi-mode Fock spaces, pure states, density
//!   matrices and mode operators.
//! - [`elements`]: beamsplitters, phase shifters, Kerr cross-phase gates,
//!   loss segments, post-selection and a circuit executor.
//! - [`channels`]: zero-temperature amplitude damping in Kraus form.
//! - [`trajectories`]: Monte-Carlo wavefunction unraveling of loss with
//!   deterministic, parallel ensembles.
//! - [`regen`]: dual-rail encoding, the regenerator circuit, transmission
//!   links and watchdog statistics.
//! - [`analysis`]: classical interferometer visibility and erasure-channel
//!   capacities.
//!
//! Basis order everywhere is lexicographic in the occupation vector with
//! mode 0 most significant.

pub mod analysis;
pub mod channels;
pub mod elements;
mod error;
pub mod fock;
pub mod regen;
pub mod trajectories;

pub use num_complex::Complex64;

pub use analysis::{classical_visibility, erasure_capacity, ErasureCapacity};
pub use channels::{DampingParams, KrausChannel};
pub use elements::{Circuit, CircuitElement, PostSelection};
pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockSpace, ModeOperator, OccupationVector, PureState};
pub use regen::{DualRailQubit, LinkConfig, RegenOutcome, Regenerator, TransmitMode};
pub use trajectories::{LossModel, TrajectoryConfig, TrajectoryRecord};

/// Tolerance for algebraic identities (norms, traces, unitarity).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Most negative eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

/// Norm loss above which a truncated unitary is reported as leaking.
pub const LEAKAGE_TOL: f64 = 1e-9;

/// Outcome probabilities below this are treated as impossible.
pub const IMPOSSIBLE_TOL: f64 = 1e-14;
