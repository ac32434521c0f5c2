//! Sudden-quench dynamics of the spin-1/2 XXZ chain in the self-consistent
//! fermionic mean-field picture.
//!
//! The pipeline runs bottom-up:
//!
//! * [`model`] holds the Hamiltonian point and the Bogoliubov mode data,
//! * [`meanfield`] solves the three self-consistent averages,
//! * [`quench`] evaluates the time-dependent two-point functions,
//! * [`gaussian`] turns them into the two-site X-state through Wick's theorem,
//! * [`measures`] computes concurrence, mutual information and discord,
//! * [`analysis`] extracts suppression times, fits and sweep ridges.
//!
//! [`oracle`] is an exact-diagonalization reference for small chains, and
//! [`cli`] drives the experiments behind the `xxzq` binary.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod meanfield;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod par;
pub mod pfaffian;
pub mod quench;
pub mod sum;

pub use error::{Error, Result};
pub use gaussian::{two_site_state, TwoSiteState};
pub use meanfield::{solve_self_consistent, MeanFieldParams, MeanFieldSolution, SolverOptions};
pub use measures::{quantum_discord, CorrelationMeasures, OptimizerOptions};
pub use model::{momentum_grid, ModelParams, MomentumGrid};
pub use quench::{prepare_quench, CorrelatorBlock, QuenchSetup};
