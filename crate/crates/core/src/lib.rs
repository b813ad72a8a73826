//! Coherence, photon-phonon correlation and entanglement dynamics of
//! trapped-ion qubits vibrating inside ideal single-mode cavities.
//!
//! The closed-form red-sideband dynamics lives in [`dynamics`]; [`oracle`]
//! re-derives everything by brute-force propagation on the truncated Hilbert
//! space so the two can be checked against each other ([`verify`]).

pub mod composite;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod observables;
pub mod oracle;
pub mod plot;
pub mod scenario;
pub mod signal;
pub mod verify;

pub use composite::{bell_state, concurrence, evolve_two_qubit, two_qubit_coherence, BellKind, BellSpec, TwoQubitDensity};
pub use dynamics::{
    coefficients, evolve_state, reduced_qubit_density, single_qubit_map, stationary_evolve, GlobalState, ModeParams,
    Motion, ProcessMatrix, QubitAmplitudes, QubitDensity,
};
pub use error::{Error, Result};
pub use fock::{choose_truncation, coherent_amplitudes, CoherentAmplitudes};
pub use linalg::C64;
pub use observables::{l1_coherence, mode_moments, CorrelationSample};
pub use scenario::{run_scenario, Mode, Scenario, Table};
