//! Domain types shared by every solver: agent parameters, the finite type
//! law of the mean-field game, the time grid and simple strategies.

mod agent;
mod config;
mod distribution;
mod horizon;
mod strategy;

pub use agent::{aggregator_f, bequest_g, lambda_q, validate_agent, Agent, AgentType};
pub use config::{AtomSpec, GameConfig, HorizonSpec};
pub use distribution::TypeDistribution;
pub use horizon::Horizon;
pub use strategy::{Consumption, SimpleStrategy, CHI2_BRANCH_EPS};
