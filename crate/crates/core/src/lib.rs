//! Solvers and verifiers for N-player and mean-field portfolio games in which
//! investors carry Epstein–Zin recursive utility and care about their wealth
//! and consumption relative to the population's geometric averages.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the domain types (agent types, type laws, simple
//!   strategies, the horizon grid) and the aggregator/bequest primitives.
//! * [`bernoulli`] solves `h' + φh + ψh^(1-a) = 0, h(T) = 1` in closed form,
//!   with a Runge–Kutta oracle for certification.
//! * [`valuation`] evaluates the recursive utility of a simple strategy in a
//!   given aggregate environment, plus a Monte Carlo oracle for the
//!   time-additive case.
//! * [`bestreply`] computes the optimal simple control against an environment
//!   and scans simple deviations around any strategy.
//! * [`equilibrium`] builds the closed-form Nash and mean-field equilibria and
//!   certifies them against the best-reply map.
//! * [`simulate`] draws exact lognormal wealth paths from counter-based
//!   random streams.
//! * [`asymptotics`] measures the finite-N convergence rates.
//! * [`analysis`] holds the comparative statics of portfolio and consumption.

pub mod analysis;
pub mod asymptotics;
pub mod bernoulli;
pub mod bestreply;
pub mod equilibrium;
pub mod error;
mod formulas;
pub mod model;
pub mod quadrature;
pub mod simulate;
pub mod tolerances;
pub mod valuation;

pub use bernoulli::{solve_bernoulli, solve_bernoulli_rk4, BernoulliProblem, BernoulliSolution};
pub use bestreply::{best_reply, deviation_scan, DeviationGrid, ScanReport};
pub use equilibrium::{
    consumption_identity_residual, mfg_consistency_check, solve_mfge, solve_nash, EquilibriumReport,
    NPlayerGame,
};
pub use error::{Error, Result};
pub use model::{
    aggregator_f, bequest_g, lambda_q, validate_agent, Agent, AgentType, Consumption, Horizon,
    SimpleStrategy, TypeDistribution,
};
pub use tolerances::Tolerances;
pub use valuation::{value_simple, value_time_additive_mc, ValuationContext};
