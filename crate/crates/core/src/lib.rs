//! Steady-state entanglement of a two-qubit autonomous thermal machine.
//!
//! Two resonant qubits with gap `E` exchange excitations through a coupling
//! `g`; the first (cold) qubit talks to a cold bath, the second (hot) qubit to
//! a hot one. Three dissipation models are provided:
//!
//! * a reset (collision) model, with a closed-form steady state,
//! * flux qubits with bosonic baths,
//! * a double quantum dot with fermionic leads and a Coulomb penalty `U`.
//!
//! The crate builds the Liouvillian of each model, solves for its steady
//! state, and evaluates concurrence, purity and heat currents. [`optimize`]
//! maximizes the steady-state concurrence over the couplings and locates the
//! temperatures at which entanglement appears.

pub mod analytics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod optimize;
pub mod state;
pub mod steady;

pub use analytics::{
    concurrence, concurrence_closed_form, concurrence_x_state, heat_current, purity, steady_report,
    ConcurrenceBreakdown, ConcurrenceMethod, SweepRecord,
};
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use models::{
    Bath, DotParams, DotRateEnergy, FluxParams, JumpTerm, Liouvillian, ModelKind, ModelParams, ResetParams,
};
pub use optimize::{
    critical_cold_temperature, maximize_concurrence, maximize_over_hot_temperature, threshold_hot_temperature,
    OptimizationProblem, OptimizationResult, TemperatureSearch, Threshold,
};
pub use state::{partial_trace, thermal_qubit, DensityMatrix, Subsystem, Temperature, ThermalQubit};
pub use steady::{analytic_reset_steady, evolve, solve_steady, solve_steady_with, SteadyOptions, SteadyStateResult};
