//! Closed-form building blocks shared by the best-reply map and both
//! equilibrium solvers. Keeping one implementation makes the solvers agree
//! bit for bit wherever their formulas coincide.

use crate::model::Agent;

/// Own-market exponent `p` and the own and aggregate market coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Market {
    pub p: f64,
    pub mu1: f64,
    pub nu1: f64,
    pub sigma1: f64,
    pub mu2: f64,
    pub nu2: f64,
    pub sigma2: f64,
}

/// `1 - p(1 - gamma)` written as `gamma p + (1 - p)`.
pub(crate) fn risk_denominator(gamma: f64, p: f64) -> f64 {
    gamma * p + (1.0 - p)
}

/// `a = (1 - p(1 - 1/delta))^-1` written as `delta / (p + (1 - p) delta)`.
pub(crate) fn control_exponent(delta: f64, p: f64) -> f64 {
    delta / (p + (1.0 - p) * delta)
}

/// Optimal constant portfolio weight against the market.
pub(crate) fn optimal_pi(agent: &Agent, m: &Market) -> f64 {
    let v1 = m.nu1 * m.nu1 + m.sigma1 * m.sigma1;
    let g = agent.gamma;
    (m.mu1 - m.sigma1 * m.sigma2 * agent.theta * (1.0 - g)) / (risk_denominator(g, m.p) * v1)
}

/// Time-independent part `rho` of the optimal Bernoulli coefficient
/// `phi*(t) = rho + theta (1 - gamma) b_hat(t)`.
pub(crate) fn rho(agent: &Agent, m: &Market) -> f64 {
    let (g, th) = (agent.gamma, agent.theta);
    let v1 = m.nu1 * m.nu1 + m.sigma1 * m.sigma1;
    let v2 = m.nu2 * m.nu2 + m.sigma2 * m.sigma2;
    let cross = m.sigma1 * m.sigma2 * th * (1.0 - g) - m.mu1;
    -agent.eta * agent.lambda()
        + (1.0 - g)
            * (-th * m.mu2
                + 0.5 * th * (1.0 + th * (1.0 - g)) * v2
                + 0.5 * m.p * cross * cross / (risk_denominator(g, m.p) * v1))
}

/// Exponent on the aggregate consumption level in the optimal consumption:
/// `-theta (1 - 1/delta) a`.
pub(crate) fn level_exponent(agent: &Agent, a: f64) -> f64 {
    -agent.theta * (1.0 - 1.0 / agent.delta) * a
}
