use rayon::prelude::*;
use serde::Serialize;

use super::EquilibriumReport;
use crate::bestreply::best_reply;
use crate::error::{Error, Result};
use crate::model::{Horizon, SimpleStrategy, TypeDistribution};
use crate::quadrature::cumulative_to_end;
use crate::valuation::ValuationContext;

/// Distance between a profile and the best replies to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointResidual {
    /// Max relative `|pi* - pi| / |pi|` (absolute when `pi = 0`).
    pub pi: f64,
    /// Max sup-norm `|c* - c|` on the grid.
    pub c: f64,
    /// Max Bernoulli residual of the best replies.
    pub bernoulli: f64,
}

/// Recomputes the best reply in each context and compares it with the
/// corresponding strategy.
pub fn certify_fixed_point(
    contexts: &[ValuationContext],
    strategies: &[SimpleStrategy],
) -> Result<FixedPointResidual> {
    if contexts.len() != strategies.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} contexts for {} strategies",
            contexts.len(),
            strategies.len()
        )));
    }
    let parts = contexts
        .par_iter()
        .zip(strategies)
        .map(|(ctx, s)| {
            let br = best_reply(ctx)?;
            let dpi = (br.strategy.pi - s.pi).abs();
            let pi = if s.pi != 0.0 { dpi / s.pi.abs() } else { dpi };
            let ours = s.consumption.on_grid(&ctx.horizon);
            let theirs = br.strategy.consumption.on_grid(&ctx.horizon);
            let c = ours.iter().zip(&theirs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let bern = br.bernoulli.map_or(0.0, |b| b.residual_sup);
            Ok((pi, c, bern))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(FixedPointResidual { pi: 0.0, c: 0.0, bernoulli: 0.0 }, |acc, (pi, c, b)| {
        FixedPointResidual { pi: acc.pi.max(pi), c: acc.c.max(c), bernoulli: acc.bernoulli.max(b) }
    }))
}

/// `sup_t |c(t) exp(∫_t^T c) - chi1 exp(chi2 (T - t))|` with the integral by
/// cumulative Simpson on the grid.
pub fn consumption_identity_residual(chi1: f64, chi2: f64, c: &[f64], horizon: &Horizon) -> f64 {
    let tail = cumulative_to_end(c, horizon.dt());
    c.iter()
        .zip(&tail)
        .enumerate()
        .map(|(k, (c, i))| {
            let tau = horizon.t_end() - horizon.time(k);
            (c * i.exp() - chi1 * (chi2 * tau).exp()).abs()
        })
        .fold(0.0, f64::max)
}

/// Self-consistency of the aggregates stored in a mean-field report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MfgConsistency {
    /// `sup_t |exp E[log ĉ_t] - b_bar_t|`.
    pub m_hat: f64,
    /// `sup_t |E[ĉ_t] - b_hat_t|`.
    pub b_hat: f64,
    /// `|E[π̂ sigma] - sigma_hat|`.
    pub sigma_hat: f64,
    /// `|E[π̂ mu - π̂² (nu² + sigma²)/2] + sigma_hat²/2 - mu_hat|`, the drift of
    /// `log Ŷ` recomputed from the strategies.
    pub mu_hat: f64,
}

impl MfgConsistency {
    pub fn max(&self) -> f64 {
        self.m_hat.max(self.b_hat).max(self.sigma_hat).max(self.mu_hat)
    }
}

/// Recomputes the conditional geometric means implied by the strategies of
/// `report` and compares them with the aggregates the report used.
pub fn mfg_consistency_check(report: &EquilibriumReport, dist: &TypeDistribution) -> Result<MfgConsistency> {
    let m = report
        .mean_field()
        .ok_or_else(|| Error::InvalidInput("report does not hold a mean-field equilibrium".into()))?;
    if report.strategies.len() != dist.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} strategies for {} atoms",
            report.strategies.len(),
            dist.len()
        )));
    }
    let hz = &report.horizon;
    let pis: Vec<f64> = report.strategies.iter().map(|s| s.pi).collect();
    let grids: Vec<Vec<f64>> = report.strategies.iter().map(|s| s.consumption.on_grid(hz)).collect();
    let mut m_hat = 0.0f64;
    let mut b_hat = 0.0f64;
    #[allow(clippy::needless_range_loop)]
    for t in 0..hz.nodes() {
        let geo = dist.geometric_mean(|k, _| grids[k][t]);
        let arith = dist.expect_indexed(|k, _| grids[k][t]);
        m_hat = m_hat.max((geo - m.b_bar[t]).abs());
        b_hat = b_hat.max((arith - m.b_hat[t]).abs());
    }
    let sigma = dist.expect_indexed(|k, a| pis[k] * a.sigma);
    let drift = dist.expect_indexed(|k, a| pis[k] * a.mu - 0.5 * pis[k] * pis[k] * a.variance());
    Ok(MfgConsistency {
        m_hat,
        b_hat,
        sigma_hat: (sigma - m.sigma_hat).abs(),
        mu_hat: (drift + 0.5 * m.sigma_hat * m.sigma_hat - m.mu_hat).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_mfge;
    use crate::model::{AgentType, Consumption};

    #[test]
    fn identity_hand_case() {
        let hz = Horizon::new(1.0, 1000).unwrap();
        let c = hz.sample(|t| 1.0 / (2.0 - t));
        assert!(consumption_identity_residual(1.0, 0.0, &c, &hz) < 1e-12);
        let bumped: Vec<f64> = c.iter().map(|v| v + 0.1).collect();
        assert!(consumption_identity_residual(1.0, 0.0, &bumped, &hz) > 0.05);
    }

    #[test]
    fn identity_of_chi_curves() {
        let hz = Horizon::new(2.0, 10_000).unwrap();
        for (c1, c2) in [(0.7, -1.3), (1.0, 0.4), (2.5, 3.0), (0.3, 1e-12)] {
            let c = Consumption::chi(c1, c2, 2.0).unwrap().on_grid(&hz);
            assert!(consumption_identity_residual(c1, c2, &c, &hz) < 1e-10);
        }
    }

    #[test]
    fn perturbed_report_shows_sigma_gap() {
        let t = |g: f64, d: f64| AgentType {
            x0: 1.0,
            mu: 0.05,
            nu: 0.1,
            sigma: 0.2,
            eta: 0.1,
            gamma: g,
            delta: d,
            epsilon: 1.0,
            theta: 0.5,
        };
        let dist = TypeDistribution::new(vec![(0.3, t(2.0, 1.5)), (0.7, t(0.5, 0.8))]).unwrap();
        let mut r = solve_mfge(&dist, &Horizon::new(1.0, 200).unwrap()).unwrap();
        assert!(r.residuals.mfg_consistency.unwrap().max() <= 1e-10);
        r.strategies[0].pi += 0.1;
        let chk = mfg_consistency_check(&r, &dist).unwrap();
        assert!((chk.sigma_hat - 0.3 * 0.1 * 0.2).abs() < 1e-15);
    }
}
