//! Closed-form Nash and mean-field equilibria in simple strategies, the
//! environments each agent faces in them, and their certification against
//! the best-reply map.

mod certify;
mod environment;
mod mfg;
mod nash;

use serde::Serialize;

use crate::model::{Agent, Horizon, SimpleStrategy};

pub use certify::{
    certify_fixed_point, consumption_identity_residual, mfg_consistency_check, FixedPointResidual,
    MfgConsistency,
};
pub use environment::{
    approximate_environment, mfg_environment, mfg_profile_environment, nash_environment, profile_environment,
};
pub use mfg::{solve_mfge, solve_mfge_uncertified, MfgAtom, MfgIntermediates};
pub use nash::{solve_nash, solve_nash_uncertified, NPlayerGame, NashAgent, NashIntermediates};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Intermediates {
    Nash(NashIntermediates),
    MeanField(MfgIntermediates),
}

/// Non-negative residual magnitudes; `None` when the check was not run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Residuals {
    /// Max relative distance between `pi` and its best reply.
    pub fixed_point_pi: Option<f64>,
    /// Max sup-norm distance between `c` and its best reply on the grid.
    pub fixed_point_c: Option<f64>,
    /// Max Bernoulli residual met while computing the best replies.
    pub bernoulli: Option<f64>,
    /// Max `sup |c e^{∫c} - chi1 e^{chi2 (T-t)}|` over agents.
    pub consumption_identity: f64,
    pub mfg_consistency: Option<MfgConsistency>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub horizon: Horizon,
    pub strategies: Vec<SimpleStrategy>,
    pub intermediates: Intermediates,
    pub residuals: Residuals,
}

impl EquilibriumReport {
    pub fn nash(&self) -> Option<&NashIntermediates> {
        match &self.intermediates {
            Intermediates::Nash(n) => Some(n),
            Intermediates::MeanField(_) => None,
        }
    }

    pub fn mean_field(&self) -> Option<&MfgIntermediates> {
        match &self.intermediates {
            Intermediates::MeanField(m) => Some(m),
            Intermediates::Nash(_) => None,
        }
    }

    /// `(chi1, chi2)` per agent or atom.
    pub fn chis(&self) -> Vec<(f64, f64)> {
        match &self.intermediates {
            Intermediates::Nash(n) => n.agents.iter().map(|a| (a.chi1, a.chi2)).collect(),
            Intermediates::MeanField(m) => m.atoms.iter().map(|a| (a.chi1, a.chi2)).collect(),
        }
    }
}

/// `1 - mean(theta (1 - delta))`, shared by both games.
pub(crate) fn q_hat<'a>(weighted: impl Iterator<Item = (f64, &'a Agent)>) -> f64 {
    1.0 - weighted.map(|(w, a)| w * (a.theta * (1.0 - a.delta))).sum::<f64>()
}

/// Terminal consumption `chi1 = eps^-delta exp(theta (1 - delta) / q_hat * mean(-delta log eps))`.
pub(crate) fn chi1(agent: &Agent, mean_log_term: f64, q_hat: f64) -> f64 {
    (-agent.delta * agent.epsilon.ln() + agent.theta * (1.0 - agent.delta) / q_hat * mean_log_term).exp()
}

/// `chi2 = -(delta/lambda) rho - theta (1 - delta) K / q_hat`, `K = mean((delta/lambda) rho)`.
pub(crate) fn chi2(agent: &Agent, rho: f64, k_agg: f64, q_hat: f64) -> f64 {
    -(agent.delta / agent.lambda()) * rho - agent.theta * (1.0 - agent.delta) * k_agg / q_hat
}
