//! Diffusive predator-prey model with a fear effect on prey reproduction and a
//! Beddington-DeAngelis functional response, posed on a 1-D interval with
//! homogeneous Neumann boundary conditions.
//!
//! The crate is split by concern:
//!
//! - [`model`]: parameters, pointwise kinetics and their Jacobian.
//! - [`equilibria`]: constant steady states, including the coexistence state
//!   found as the unique positive root of a cubic.
//! - [`turing`]: Neumann spectrum, dispersion polynomial, unstable mode window,
//!   index parity and the large-diffusion nonexistence threshold.
//! - [`solver`]: method-of-lines integrator (IMEX or explicit) with monitors
//!   and run classification.
//! - [`completion`]: fills in a parameter set from a target equilibrium and
//!   M/d1, used for the committed figure configurations.
//! - [`oracle`]: closed-form logistic upper solution and an RK4 integrator of
//!   the spatially homogeneous comparison system.

pub mod completion;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod turing;

pub use completion::{complete, CompletionTarget, FreeChoice};
pub use equilibria::{
    constant_equilibria, cubic_coeffs, solve_coexistence, CubicCoeffs, Equilibrium,
    EquilibriumKind, DEFAULT_ROOT_TOL,
};
pub use error::{Error, Result};
pub use model::{
    fear_factor, functional_response, jacobian_at, reaction, JacobianEntries, ModelParams,
    ReactionRates,
};
pub use oracle::{comparison_system, u_star, LogisticParams, Trajectory};
pub use solver::{
    bound_monitor, integrate, laplacian_neumann, step, BoundCheck, BoundStatus, Classification,
    Field, Grid1D, Kinetics, Monitor, NoReaction, PositivityMode, RunSummary, Scheme, Solver,
    SolverConfig,
};
pub use turing::{
    analyze, dispersion_h, mode_window, nonexistence_threshold, spectrum, AnalysisReport,
    DispersionReport, NonexistenceReport, Spectrum,
};
