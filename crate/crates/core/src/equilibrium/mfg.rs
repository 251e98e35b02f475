use serde::Serialize;

use super::certify::{certify_fixed_point, consumption_identity_residual, mfg_consistency_check};
use super::environment::mfg_environment;
use super::{chi1, chi2, q_hat, EquilibriumReport, Intermediates, Residuals};
use crate::error::{Error, Result};
use crate::formulas::{rho, Market};
use crate::model::{Consumption, Horizon, SimpleStrategy, TypeDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MfgAtom {
    pub weight: f64,
    pub pi: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub rho: f64,
}

/// Aggregates of the mean-field equilibrium; all expectations are exact
/// weighted sums over atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MfgIntermediates {
    pub e: f64,
    pub f: f64,
    /// `1 + E[theta (delta - 1)]`.
    pub q_hat: f64,
    /// `E[(delta/lambda) rho]`.
    pub k_agg: f64,
    pub sigma_hat: f64,
    pub mu_hat: f64,
    pub atoms: Vec<MfgAtom>,
    /// `E[ĉ(t)]` on the grid.
    pub b_hat: Vec<f64>,
    /// `exp E[log ĉ(t)]` on the grid.
    pub b_bar: Vec<f64>,
    /// `exp E[log x0]`.
    pub y0: f64,
}

/// Closed-form mean-field equilibrium without the best-reply certification.
pub fn solve_mfge_uncertified(dist: &TypeDistribution, horizon: &Horizon) -> Result<EquilibriumReport> {
    let hz = *horizon;
    for (k, (_, a)) in dist.atoms().iter().enumerate() {
        let den = a.gamma * a.variance();
        if den.is_nan() || den <= 0.0 {
            return Err(Error::DenominatorZero(format!("gamma (sigma² + nu²) = {den} for atom {k}")));
        }
    }
    let e = dist.expect(|a| a.mu * a.sigma / (a.gamma * a.variance()));
    let f = dist.expect(|a| a.theta * (1.0 / a.gamma - 1.0) * a.sigma * a.sigma / a.variance());
    if 1.0 + f == 0.0 {
        return Err(Error::DenominatorZero("1 + F = 0".into()));
    }
    let pis: Vec<f64> = dist
        .atoms()
        .iter()
        .map(|(_, a)| {
            let v = a.variance();
            a.mu / (a.gamma * v) - a.theta * (1.0 / a.gamma - 1.0) * (a.sigma / v) * e / (1.0 + f)
        })
        .collect();
    let sigma_hat = dist.expect_indexed(|k, a| pis[k] * a.sigma);
    let mu_hat = dist.expect_indexed(|k, a| pis[k] * a.mu)
        - 0.5 * (dist.expect_indexed(|k, a| pis[k] * pis[k] * a.variance()) - sigma_hat * sigma_hat);
    let q = q_hat(dist.atoms().iter().map(|(w, a)| (*w, a)));
    if q == 0.0 {
        return Err(Error::DenominatorZero("1 + E[theta (delta - 1)] = 0".into()));
    }
    let rhos: Vec<f64> = dist
        .atoms()
        .iter()
        .map(|(_, a)| {
            let m = Market {
                p: 1.0,
                mu1: a.mu,
                nu1: a.nu,
                sigma1: a.sigma,
                mu2: mu_hat,
                nu2: 0.0,
                sigma2: sigma_hat,
            };
            rho(a, &m)
        })
        .collect();
    let k_agg = dist.expect_indexed(|k, a| a.delta / a.lambda() * rhos[k]);
    let mean_log = dist.expect(|a| -a.delta * a.epsilon.ln());

    let mut atoms = Vec::with_capacity(dist.len());
    let mut strategies = Vec::with_capacity(dist.len());
    for (k, (w, a)) in dist.atoms().iter().enumerate() {
        let c1 = chi1(a, mean_log, q);
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(Error::Chi1Nonpositive { agent: k, value: c1 });
        }
        let c2 = chi2(a, rhos[k], k_agg, q);
        if !c2.is_finite() {
            return Err(Error::NonFinite { name: "chi2", value: c2 });
        }
        strategies.push(SimpleStrategy::new(Consumption::chi(c1, c2, hz.t_end())?, pis[k])?);
        atoms.push(MfgAtom { weight: *w, pi: pis[k], chi1: c1, chi2: c2, rho: rhos[k] });
    }

    let grids: Vec<Vec<f64>> = strategies.iter().map(|s| s.consumption.on_grid(&hz)).collect();
    let b_hat = (0..hz.nodes()).map(|t| dist.expect_indexed(|k, _| grids[k][t])).collect();
    let b_bar = (0..hz.nodes()).map(|t| dist.geometric_mean(|k, _| grids[k][t])).collect();
    let y0 = dist.geometric_mean(|_, a| a.x0);
    let identity = atoms
        .iter()
        .zip(&grids)
        .map(|(a, c)| consumption_identity_residual(a.chi1, a.chi2, c, &hz))
        .fold(0.0, f64::max);

    Ok(EquilibriumReport {
        horizon: hz,
        strategies,
        intermediates: Intermediates::MeanField(MfgIntermediates {
            e,
            f,
            q_hat: q,
            k_agg,
            sigma_hat,
            mu_hat,
            atoms,
            b_hat,
            b_bar,
            y0,
        }),
        residuals: Residuals { consumption_identity: identity, ..Residuals::default() },
    })
}

/// Mean-field equilibrium in simple strategies, certified against the
/// best-reply map and the consistency conditions of the aggregates.
pub fn solve_mfge(dist: &TypeDistribution, horizon: &Horizon) -> Result<EquilibriumReport> {
    let mut report = solve_mfge_uncertified(dist, horizon)?;
    let contexts = (0..dist.len()).map(|k| mfg_environment(dist, &report, k)).collect::<Result<Vec<_>>>()?;
    let fp = certify_fixed_point(&contexts, &report.strategies)?;
    report.residuals.fixed_point_pi = Some(fp.pi);
    report.residuals.fixed_point_c = Some(fp.c);
    report.residuals.bernoulli = Some(fp.bernoulli);
    report.residuals.mfg_consistency = Some(mfg_consistency_check(&report, dist)?);
    Ok(report)
}
