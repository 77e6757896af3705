//! Fractional Fisher-KPP laboratory on fragmented one-dimensional domains.
//!
//! The crate discretizes the Dirichlet fractional Laplacian `(−Δ)^α` on
//! finite unions of intervals, computes principal eigenpairs, solves the
//! steady KPP problem `(−Δ)^α n = n − n²` by monotone iteration and time
//! marching, checks the envelope and decay estimates of steady states, and
//! runs reproducible parameter sweeps.

pub mod bounds;
pub mod discretization;
pub mod domain;
pub mod eigensolver;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod kernel;
pub mod steady;

pub use bounds::{decay_fit, envelope_check, EnvelopeReport};
pub use discretization::{assemble, assemble_with, build_grid, Grid, OperatorMatrix};
pub use domain::{delta, two_patch, Domain1D, Interval, Tag, TwoPatch};
pub use eigensolver::{extrapolate, principal_eigen, rayleigh, xi_alpha, EigenResult};
pub use error::{Error, Result};
pub use exec::Execution;
pub use kernel::{Alpha, EnvelopeParams};
pub use steady::{monotone_solve, time_march, MarchConfig, MarchResult, Outcome, Source, Start, SteadyState};

