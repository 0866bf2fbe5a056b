//! Time evolution and stationary states: direct Lindblad integration,
//! quantum trajectories, Liouvillian kernels and the field-matrix reduction.

pub mod compare;
pub mod field_matrix;
pub mod generator;
pub mod master;
pub mod mcwf;
pub mod ode;
pub mod probes;
pub mod series;
pub mod steady;

pub use compare::{adiabatic_gap_check, Deviation, GapReport};
pub use field_matrix::{integrate_field_matrix, FieldBlocks, FieldMatrixModel, PHOTON_COLUMN};
pub use generator::Generator;
pub use master::{integrate_me, MeOptions, Snapshots};
pub use mcwf::{mcwf, McwfOptions};
pub use ode::{StepControl, StepStats};
pub use probes::Probes;
pub use series::{uniform_grid, SolverMeta, TimeSeries};
pub use steady::{liouvillian, steady_state, SteadyOptions, SteadyStateResult};
