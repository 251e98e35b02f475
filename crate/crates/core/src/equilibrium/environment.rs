use super::{EquilibriumReport, NPlayerGame};
use crate::error::{Error, Result};
use crate::model::{Agent, SimpleStrategy, TypeDistribution};
use crate::valuation::ValuationContext;

/// Environment of agent `i` when everyone plays the strategies of `report`.
///
/// With `X̄ = (Π X^j)^(1/N) = (X^i)^(1/N) Y_i` the agent faces `p = 1 - theta/N`
/// and the aggregate `Y_i = (Π_{j≠i} X^j)^(1/N)`, whose drift, volatilities
/// and consumption curves are sums over the other agents.
pub fn nash_environment(
    game: &NPlayerGame,
    report: &EquilibriumReport,
    i: usize,
) -> Result<ValuationContext> {
    let ne =
        report.nash().ok_or_else(|| Error::InvalidInput("report does not hold a Nash equilibrium".into()))?;
    if ne.n != game.n() || i >= game.n() {
        return Err(Error::DimensionMismatch(format!(
            "agent {i} of a {}-player report for a {}-player game",
            ne.n,
            game.n()
        )));
    }
    let hz = *game.horizon();
    let nf = game.n() as f64;
    let a = game.agents()[i];
    let own = report.strategies[i].consumption.on_grid(&hz);
    let b_hat = ne.consumption_sum.iter().zip(&own).map(|(s, c)| ((s - c) / nf).max(0.0)).collect();
    let b_bar = ne.log_consumption_sum.iter().zip(&own).map(|(l, c)| ((l - c.ln()) / nf).exp()).collect();
    let log_x0_total: f64 = game.agents().iter().map(|a| a.x0.ln()).sum();
    let y0 = ((log_x0_total - a.x0.ln()) / nf).exp();
    let ag = ne.agents[i];
    let ctx = ValuationContext {
        agent: a,
        horizon: hz,
        p: 1.0 - a.theta / nf,
        mu1: a.mu,
        nu1: a.nu,
        sigma1: a.sigma,
        mu2: ag.mu_hat,
        nu2: ag.nu_hat,
        sigma2: ag.sigma_hat,
        b_hat,
        b_bar,
        y0,
    };
    ctx.validate()?;
    Ok(ctx)
}

/// Environment of atom `k` in the mean-field equilibrium `report`: `p = 1`,
/// aggregate `Ŷ = exp E[log X̂]` with no idiosyncratic noise,
/// `b_hat = E[ĉ]` and `b_bar = exp E[log ĉ]`.
pub fn mfg_environment(
    dist: &TypeDistribution,
    report: &EquilibriumReport,
    k: usize,
) -> Result<ValuationContext> {
    let m = report
        .mean_field()
        .ok_or_else(|| Error::InvalidInput("report does not hold a mean-field equilibrium".into()))?;
    if m.atoms.len() != dist.len() || k >= dist.len() {
        return Err(Error::DimensionMismatch(format!(
            "atom {k} of a {}-atom report for a {}-atom law",
            m.atoms.len(),
            dist.len()
        )));
    }
    let a = dist.atoms()[k].1;
    let ctx = ValuationContext {
        agent: a,
        horizon: report.horizon,
        p: 1.0,
        mu1: a.mu,
        nu1: a.nu,
        sigma1: a.sigma,
        mu2: m.mu_hat,
        nu2: 0.0,
        sigma2: m.sigma_hat,
        b_hat: m.b_hat.clone(),
        b_bar: m.b_bar.clone(),
        y0: m.y0,
    };
    ctx.validate()?;
    Ok(ctx)
}

/// Environment of one agent of type `agent` when the other `n - 1` agents of
/// the same type all play the mean-field strategy `mfg`.
///
/// The agent's own initial wealth is `x0`, the others' geometric mean is
/// `exp(log_x0_others)`.
pub fn approximate_environment(
    agent: Agent,
    mfg: &SimpleStrategy,
    n: usize,
    horizon: crate::model::Horizon,
    log_x0_others: f64,
) -> Result<ValuationContext> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one player".into()));
    }
    let nf = n as f64;
    let others = (n - 1) as f64;
    let pi = mfg.pi;
    let nu_hat = others.sqrt() * (pi * agent.nu).abs() / nf;
    let sigma_hat = others * pi * agent.sigma / nf;
    let mu_hat = others * (pi * agent.mu - 0.5 * pi * pi * agent.variance()) / nf
        + 0.5 * (nu_hat * nu_hat + sigma_hat * sigma_hat);
    let c = mfg.consumption.on_grid(&horizon);
    let share = others / nf;
    let ctx = ValuationContext {
        agent,
        horizon,
        p: 1.0 - agent.theta / nf,
        mu1: agent.mu,
        nu1: agent.nu,
        sigma1: agent.sigma,
        mu2: mu_hat,
        nu2: nu_hat,
        sigma2: sigma_hat,
        b_hat: c.iter().map(|c| share * c).collect(),
        b_bar: c.iter().map(|c| (share * c.ln()).exp()).collect(),
        y0: (share * log_x0_others).exp(),
    };
    ctx.validate()?;
    Ok(ctx)
}

/// Environment of agent `i` when the others play an arbitrary simple
/// profile. Agrees with [`nash_environment`] on the equilibrium profile.
pub fn profile_environment(
    game: &NPlayerGame,
    strategies: &[SimpleStrategy],
    i: usize,
) -> Result<ValuationContext> {
    if strategies.len() != game.n() || i >= game.n() {
        return Err(Error::DimensionMismatch(format!(
            "agent {i} with {} strategies for a {}-player game",
            strategies.len(),
            game.n()
        )));
    }
    let hz = *game.horizon();
    let nf = game.n() as f64;
    let a = game.agents()[i];
    let n = hz.nodes();
    let (mut sigma, mut nu2, mut drift, mut log_x0) = (0.0, 0.0, 0.0, 0.0);
    let mut b_hat = vec![0.0; n];
    let mut log_b = vec![0.0; n];
    for (j, (o, s)) in game.agents().iter().zip(strategies).enumerate() {
        if j == i {
            continue;
        }
        sigma += s.pi * o.sigma;
        nu2 += (s.pi * o.nu).powi(2);
        drift += s.pi * o.mu - 0.5 * s.pi * s.pi * o.variance();
        log_x0 += o.x0.ln();
        for (k, c) in s.consumption.on_grid(&hz).into_iter().enumerate() {
            b_hat[k] += c;
            log_b[k] += c.ln();
        }
    }
    let (sigma_hat, nu_hat) = (sigma / nf, nu2.sqrt() / nf);
    let ctx = ValuationContext {
        agent: a,
        horizon: hz,
        p: 1.0 - a.theta / nf,
        mu1: a.mu,
        nu1: a.nu,
        sigma1: a.sigma,
        mu2: drift / nf + 0.5 * (nu_hat * nu_hat + sigma_hat * sigma_hat),
        nu2: nu_hat,
        sigma2: sigma_hat,
        b_hat: b_hat.iter().map(|b| b / nf).collect(),
        b_bar: log_b.iter().map(|l| (l / nf).exp()).collect(),
        y0: (log_x0 / nf).exp(),
    };
    ctx.validate()?;
    Ok(ctx)
}

/// Environment of atom `k` when the population plays an arbitrary simple
/// profile, one strategy per atom. Agrees with [`mfg_environment`] on the
/// equilibrium profile.
pub fn mfg_profile_environment(
    dist: &TypeDistribution,
    strategies: &[SimpleStrategy],
    horizon: &crate::model::Horizon,
    k: usize,
) -> Result<ValuationContext> {
    if strategies.len() != dist.len() || k >= dist.len() {
        return Err(Error::DimensionMismatch(format!(
            "atom {k} with {} strategies for a {}-atom law",
            strategies.len(),
            dist.len()
        )));
    }
    let grids: Vec<Vec<f64>> = strategies.iter().map(|s| s.consumption.on_grid(horizon)).collect();
    let sigma_hat = dist.expect_indexed(|j, o| strategies[j].pi * o.sigma);
    let drift = dist.expect_indexed(|j, o| {
        let pi = strategies[j].pi;
        pi * o.mu - 0.5 * pi * pi * o.variance()
    });
    let a = dist.atoms()[k].1;
    let ctx = ValuationContext {
        agent: a,
        horizon: *horizon,
        p: 1.0,
        mu1: a.mu,
        nu1: a.nu,
        sigma1: a.sigma,
        mu2: drift + 0.5 * sigma_hat * sigma_hat,
        nu2: 0.0,
        sigma2: sigma_hat,
        b_hat: (0..horizon.nodes()).map(|t| dist.expect_indexed(|j, _| grids[j][t])).collect(),
        b_bar: (0..horizon.nodes()).map(|t| dist.geometric_mean(|j, _| grids[j][t])).collect(),
        y0: dist.geometric_mean(|_, o| o.x0),
    };
    ctx.validate()?;
    Ok(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_mfge_uncertified, solve_nash_uncertified};
    use crate::model::{AgentType, Horizon};

    fn close(a: &ValuationContext, b: &ValuationContext) -> bool {
        let near = |x: f64, y: f64| (x - y).abs() <= 1e-13 * x.abs().max(y.abs()).max(1.0);
        near(a.p, b.p)
            && near(a.mu2, b.mu2)
            && near(a.nu2, b.nu2)
            && near(a.sigma2, b.sigma2)
            && near(a.y0, b.y0)
            && a.b_hat.iter().zip(&b.b_hat).all(|(x, y)| near(*x, *y))
            && a.b_bar.iter().zip(&b.b_bar).all(|(x, y)| near(*x, *y))
    }

    fn types() -> Vec<AgentType> {
        let base = AgentType {
            x0: 1.3,
            mu: 0.05,
            nu: 0.1,
            sigma: 0.2,
            eta: 0.1,
            gamma: 2.0,
            delta: 1.5,
            epsilon: 1.0,
            theta: 0.5,
        };
        vec![
            base,
            AgentType { x0: 0.7, gamma: 3.0, theta: 0.8, nu: 0.2, ..base },
            AgentType { x0: 2.0, gamma: 0.5, delta: 0.6, epsilon: 1.5, ..base },
        ]
    }

    #[test]
    fn profile_environment_matches_equilibrium_environment() {
        let game = NPlayerGame::new(types(), Horizon::new(1.0, 100).unwrap()).unwrap();
        let r = solve_nash_uncertified(&game).unwrap();
        for i in 0..game.n() {
            let a = nash_environment(&game, &r, i).unwrap();
            let b = profile_environment(&game, &r.strategies, i).unwrap();
            assert!(close(&a, &b), "agent {i}");
        }
    }

    #[test]
    fn mfg_profile_environment_matches_equilibrium_environment() {
        let hz = Horizon::new(1.0, 100).unwrap();
        let ts = types();
        let dist = TypeDistribution::new(vec![(0.2, ts[0]), (0.5, ts[1]), (0.3, ts[2])]).unwrap();
        let r = solve_mfge_uncertified(&dist, &hz).unwrap();
        for k in 0..dist.len() {
            let a = mfg_environment(&dist, &r, k).unwrap();
            let b = mfg_profile_environment(&dist, &r.strategies, &hz, k).unwrap();
            assert!(close(&a, &b), "atom {k}");
        }
    }
}
