use serde::Serialize;

use super::certify::{certify_fixed_point, consumption_identity_residual};
use super::environment::nash_environment;
use super::{chi1, chi2, q_hat, EquilibriumReport, Intermediates, Residuals};
use crate::error::{Error, Result};
use crate::formulas::{rho, Market};
use crate::model::{Agent, AgentType, Consumption, Horizon, SimpleStrategy};

/// `N >= 1` validated agents on a common horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NPlayerGame {
    agents: Vec<Agent>,
    horizon: Horizon,
}

impl NPlayerGame {
    pub fn new(agents: Vec<AgentType>, horizon: Horizon) -> Result<Self> {
        let agents = agents.into_iter().map(Agent::new).collect::<Result<Vec<_>>>()?;
        Self::from_agents(agents, horizon)
    }

    pub fn from_agents(agents: Vec<Agent>, horizon: Horizon) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidInput("a game needs at least one agent".into()));
        }
        Ok(NPlayerGame { agents, horizon })
    }

    /// `n` copies of one type.
    pub fn symmetric(agent: Agent, n: usize, horizon: Horizon) -> Result<Self> {
        Self::from_agents(vec![agent; n], horizon)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn horizon(&self) -> &Horizon {
        &self.horizon
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }
}

/// Per-agent quantities of the Nash equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NashAgent {
    pub pi: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub rho: f64,
    pub nu_hat: f64,
    pub sigma_hat: f64,
    pub mu_hat: f64,
    /// Denominator `(1 + (theta/N)(1/gamma - 1)) nu² + sigma²`.
    pub d: f64,
}

/// Aggregates of the Nash equilibrium.
///
/// The per-agent curves `b_hat_i = (S - c_i)/N` and
/// `b_bar_i = exp((L - log c_i)/N)` are recovered from the population sums
/// `S = Σ c_j` and `L = Σ log c_j` stored here.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashIntermediates {
    pub n: usize,
    pub pi_n: f64,
    pub e_n: f64,
    pub f_n: f64,
    pub q_hat: f64,
    /// `(Π_j eps_j^-delta_j)^(1/N)`.
    pub kappa: f64,
    /// `K = mean((delta/lambda) rho)`.
    pub k_agg: f64,
    pub agents: Vec<NashAgent>,
    pub consumption_sum: Vec<f64>,
    pub log_consumption_sum: Vec<f64>,
}

fn nonzero(v: f64, what: &str) -> Result<()> {
    if v == 0.0 || !v.is_finite() {
        Err(Error::DenominatorZero(format!("{what} = {v}")))
    } else {
        Ok(())
    }
}

/// Closed-form Nash equilibrium without the best-reply certification.
pub fn solve_nash_uncertified(game: &NPlayerGame) -> Result<EquilibriumReport> {
    let agents = game.agents();
    let hz = *game.horizon();
    let n = agents.len();
    let nf = n as f64;

    let d: Vec<f64> = agents
        .iter()
        .map(|a| (1.0 + a.theta / nf * (1.0 / a.gamma - 1.0)) * a.nu * a.nu + a.sigma * a.sigma)
        .collect();
    for (i, &di) in d.iter().enumerate() {
        if di.is_nan() || di <= 0.0 {
            return Err(Error::DenominatorZero(format!(
                "(1 + (theta/N)(1/gamma - 1)) nu² + sigma² = {di} for agent {i}"
            )));
        }
    }
    let e_n = agents.iter().zip(&d).map(|(a, d)| a.sigma * a.mu / (a.gamma * d)).sum::<f64>() / nf;
    let f_n = agents
        .iter()
        .zip(&d)
        .map(|(a, d)| a.sigma * a.sigma * a.theta * (1.0 - a.gamma) / (a.gamma * d))
        .sum::<f64>()
        / nf;
    nonzero(1.0 + f_n, "1 + F_N")?;
    let pi_n = e_n / (1.0 + f_n);
    let pi: Vec<f64> = agents
        .iter()
        .zip(&d)
        .map(|(a, d)| a.mu / (a.gamma * d) - a.sigma * a.theta * (1.0 / a.gamma - 1.0) * pi_n / d)
        .collect();

    // Population totals; each agent's environment removes its own term.
    let nu_sq: Vec<f64> = agents.iter().zip(&pi).map(|(a, p)| (p * a.nu).powi(2)).collect();
    let sig: Vec<f64> = agents.iter().zip(&pi).map(|(a, p)| p * a.sigma).collect();
    let drift: Vec<f64> =
        agents.iter().zip(&pi).map(|(a, p)| p * a.mu - 0.5 * p * p * a.variance()).collect();
    let (nu_tot, sig_tot, drift_tot): (f64, f64, f64) =
        (nu_sq.iter().sum(), sig.iter().sum(), drift.iter().sum());

    let q = q_hat(agents.iter().map(|a| (1.0 / nf, a)));
    nonzero(q, "q_hat = 1 - mean(theta (1 - delta))")?;

    let mut partial = Vec::with_capacity(n);
    for (i, a) in agents.iter().enumerate() {
        let nu_hat = (nu_tot - nu_sq[i]).max(0.0).sqrt() / nf;
        let sigma_hat = (sig_tot - sig[i]) / nf;
        let mu_hat = (drift_tot - drift[i]) / nf + 0.5 * (nu_hat * nu_hat + sigma_hat * sigma_hat);
        let market = Market {
            p: 1.0 - a.theta / nf,
            mu1: a.mu,
            nu1: a.nu,
            sigma1: a.sigma,
            mu2: mu_hat,
            nu2: nu_hat,
            sigma2: sigma_hat,
        };
        partial.push((nu_hat, sigma_hat, mu_hat, rho(a, &market)));
    }
    let k_agg = agents.iter().zip(&partial).map(|(a, p)| a.delta / a.lambda() * p.3).sum::<f64>() / nf;
    let mean_log = agents.iter().map(|a| -a.delta * a.epsilon.ln()).sum::<f64>() / nf;
    let kappa = mean_log.exp();

    let mut out = Vec::with_capacity(n);
    let mut strategies = Vec::with_capacity(n);
    for (i, a) in agents.iter().enumerate() {
        let (nu_hat, sigma_hat, mu_hat, r) = partial[i];
        let c1 = chi1(a, mean_log, q);
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(Error::Chi1Nonpositive { agent: i, value: c1 });
        }
        let c2 = chi2(a, r, k_agg, q);
        if !c2.is_finite() {
            return Err(Error::NonFinite { name: "chi2", value: c2 });
        }
        strategies.push(SimpleStrategy::new(Consumption::chi(c1, c2, hz.t_end())?, pi[i])?);
        out.push(NashAgent { pi: pi[i], chi1: c1, chi2: c2, rho: r, nu_hat, sigma_hat, mu_hat, d: d[i] });
    }

    let mut consumption_sum = vec![0.0; hz.nodes()];
    let mut log_consumption_sum = vec![0.0; hz.nodes()];
    let mut identity = 0.0f64;
    for (s, ag) in strategies.iter().zip(&out) {
        let c = s.consumption.on_grid(&hz);
        identity = identity.max(consumption_identity_residual(ag.chi1, ag.chi2, &c, &hz));
        for (k, v) in c.iter().enumerate() {
            consumption_sum[k] += v;
            log_consumption_sum[k] += v.ln();
        }
    }

    Ok(EquilibriumReport {
        horizon: hz,
        strategies,
        intermediates: Intermediates::Nash(NashIntermediates {
            n,
            pi_n,
            e_n,
            f_n,
            q_hat: q,
            kappa,
            k_agg,
            agents: out,
            consumption_sum,
            log_consumption_sum,
        }),
        residuals: Residuals { consumption_identity: identity, ..Residuals::default() },
    })
}

/// Nash equilibrium in simple strategies, certified by recomputing each
/// agent's best reply against the others' equilibrium strategies.
pub fn solve_nash(game: &NPlayerGame) -> Result<EquilibriumReport> {
    let mut report = solve_nash_uncertified(game)?;
    let contexts = (0..game.n()).map(|i| nash_environment(game, &report, i)).collect::<Result<Vec<_>>>()?;
    let fp = certify_fixed_point(&contexts, &report.strategies)?;
    report.residuals.fixed_point_pi = Some(fp.pi);
    report.residuals.fixed_point_c = Some(fp.c);
    report.residuals.bernoulli = Some(fp.bernoulli);
    Ok(report)
}
