use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Market and preference parameters of one investor.
///
/// Field names match the JSON ingestion format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentType {
    /// Initial wealth.
    pub x0: f64,
    /// Stock drift.
    pub mu: f64,
    /// Idiosyncratic volatility.
    pub nu: f64,
    /// Common-noise volatility.
    pub sigma: f64,
    /// Discount rate.
    pub eta: f64,
    /// Relative risk aversion.
    pub gamma: f64,
    /// Elasticity of intertemporal substitution.
    pub delta: f64,
    /// Bequest weight.
    pub epsilon: f64,
    /// Weight of the relative performance concern.
    pub theta: f64,
}

/// An [`AgentType`] that passed validation, carrying the derived exponents
/// `lambda = (1 - gamma) / (1 - 1/delta)` and `q = 1 - 1/lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Agent {
    #[serde(flatten)]
    params: AgentType,
    lambda: f64,
    q: f64,
}

impl Agent {
    pub fn new(params: AgentType) -> Result<Self> {
        validate_agent(params)
    }

    pub fn params(&self) -> &AgentType {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Total instantaneous variance `nu² + sigma²` of the agent's stock.
    pub fn variance(&self) -> f64 {
        self.params.nu * self.params.nu + self.params.sigma * self.params.sigma
    }

    /// Same agent with a different initial wealth.
    pub fn with_x0(&self, x0: f64) -> Result<Self> {
        Agent::new(AgentType { x0, ..self.params })
    }
}

impl Deref for Agent {
    type Target = AgentType;

    fn deref(&self) -> &AgentType {
        &self.params
    }
}

/// `(lambda, q)` for risk aversion `gamma` and EIS `delta`, both different from 1.
pub fn lambda_q(gamma: f64, delta: f64) -> (f64, f64) {
    let lambda = (1.0 - gamma) / (1.0 - 1.0 / delta);
    (lambda, 1.0 - 1.0 / lambda)
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Negative { name, value })
    }
}

/// Slack on `gamma * delta = 1` in the regime check.
pub const REGIME_BOUNDARY_TOL: f64 = 1e-12;

/// Checks the admissible parameter regime and populates `lambda` and `q`.
///
/// Rejects `gamma = 1`, `delta = 1` and the mixed regimes where `gamma*delta`
/// and `delta` sit on opposite sides of 1. Nothing is clamped.
pub fn validate_agent(a: AgentType) -> Result<Agent> {
    let fields = [
        ("x0", a.x0),
        ("mu", a.mu),
        ("nu", a.nu),
        ("sigma", a.sigma),
        ("eta", a.eta),
        ("gamma", a.gamma),
        ("delta", a.delta),
        ("epsilon", a.epsilon),
        ("theta", a.theta),
    ];
    for (name, value) in fields {
        finite(name, value)?;
    }
    positive("x0", a.x0)?;
    positive("eta", a.eta)?;
    positive("gamma", a.gamma)?;
    positive("delta", a.delta)?;
    positive("epsilon", a.epsilon)?;
    non_negative("nu", a.nu)?;
    non_negative("sigma", a.sigma)?;
    if !(0.0..=1.0).contains(&a.theta) {
        return Err(Error::ThetaRange(a.theta));
    }
    if a.nu + a.sigma <= 0.0 {
        return Err(Error::DegenerateVolatility);
    }
    if a.gamma == 1.0 {
        return Err(Error::ParameterRegime("gamma must differ from 1".into()));
    }
    if a.delta == 1.0 {
        return Err(Error::ParameterRegime("delta must differ from 1".into()));
    }
    // gamma * delta = 1 is the time-additive boundary; allow it up to rounding.
    let gd = a.gamma * a.delta;
    let on_boundary = (gd - 1.0).abs() <= REGIME_BOUNDARY_TOL;
    let upper = (gd >= 1.0 || on_boundary) && a.delta >= 1.0;
    let lower = (gd <= 1.0 || on_boundary) && a.delta <= 1.0;
    if !(upper || lower) {
        return Err(Error::ParameterRegime(format!(
            "gamma*delta = {gd} and delta = {} must lie on the same side of 1",
            a.delta
        )));
    }
    let (lambda, q) = lambda_q(a.gamma, a.delta);
    Ok(Agent { params: a, lambda, q })
}

/// Epstein–Zin aggregator `f(C, v)` on the domain `C > 0`, `(1 - gamma) v > 0`.
pub fn aggregator_f(c: f64, v: f64, agent: &Agent) -> Result<f64> {
    let one_minus_gamma = 1.0 - agent.gamma;
    if c <= 0.0 {
        return Err(Error::Domain(format!("consumption must be positive, got {c}")));
    }
    let scaled = one_minus_gamma * v;
    if scaled <= 0.0 {
        return Err(Error::Domain(format!("(1 - gamma) v = {scaled} is not positive")));
    }
    let certainty_equivalent = scaled.powf(1.0 / one_minus_gamma);
    let ratio = (c / certainty_equivalent).powf(1.0 - 1.0 / agent.delta);
    Ok(agent.eta * agent.lambda * v * (ratio - 1.0))
}

/// Bequest utility `g(C) = (eta*epsilon)^lambda C^(1-gamma) / (1 - gamma)`.
pub fn bequest_g(c: f64, agent: &Agent) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::Domain(format!("terminal wealth must be positive, got {c}")));
    }
    let one_minus_gamma = 1.0 - agent.gamma;
    Ok((agent.eta * agent.epsilon).powf(agent.lambda) / one_minus_gamma * c.powf(one_minus_gamma))
}
