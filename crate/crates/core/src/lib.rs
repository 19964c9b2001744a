//! Numerical laboratory for the two-time, four-apparatus EPRB spin experiment.
//!
//! Particle 1 is measured along `a` at `t1` and along `a'` at `t2`; particle 2
//! along `b` at `t1` and `b'` at `t2`. The crate provides:
//!
//! - [`quantum`]: exact singlet statistics for the sequential experiment and
//!   the closed-form correlators of both the sequential and EPRB settings.
//! - [`inequality`]: the CHSH functional, grid scans and multistart
//!   maximization.
//! - [`hvm`]: finite hidden-variable models, factorizability checks, the
//!   contextual factorizable model that reproduces the quantum statistics,
//!   and a linear-feasibility decision for non-contextual joint distributions.
//! - [`sampler`]: reproducible Monte Carlo sampling and correlator estimation.
//! - [`cli`]: configuration parsing and report generation behind the
//!   `seqbell` binary.

pub mod cli;
pub mod error;
pub mod hvm;
pub mod inequality;
pub mod quantum;
pub mod sampler;
pub mod simplex;

pub use error::{Error, Result};
pub use quantum::{
    CorrelatorSet, GrandJointDistribution, Mode, Observable, OutcomeQuadruple, PairDistribution,
    PairLabel, PlanarAngle, QubitState, Scenario, Sign, TwoQubitState,
};

/// Tolerance for analytic identities.
pub const ANALYTIC_TOL: f64 = 1e-12;

/// Slack allowed above the CHSH bound of 2 before a value counts as a violation.
pub const BOUND_SLACK: f64 = 1e-9;
