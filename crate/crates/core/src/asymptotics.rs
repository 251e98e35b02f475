//! Finite-N experiments on symmetric games: how fast the N-player
//! equilibrium, its wealth aggregate and its values approach the mean-field
//! limit, and how much a single player can gain against the mean-field
//! profile.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bestreply::best_reply;
use crate::equilibrium::{
    approximate_environment, mfg_environment, nash_environment, solve_mfge_uncertified,
    solve_nash_uncertified, NPlayerGame,
};
use crate::error::{Error, Result};
use crate::model::{Agent, AgentType, Horizon, SimpleStrategy, TypeDistribution};
use crate::simulate::{consumption_steps, normal_increments, stream_rng, StreamKind};
use crate::valuation::value_simple;

/// Least-squares line through `(log N, log value)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub ns: Vec<usize>,
    pub values: Vec<f64>,
    /// `None` when some value is zero or not finite and the fit was skipped.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
}

impl RateFit {
    pub fn skipped(&self) -> bool {
        self.slope.is_none()
    }
}

/// Fits `log value = intercept + slope log N`.
pub fn fit_loglog(ns: &[usize], values: &[f64]) -> Result<RateFit> {
    if ns.len() != values.len() {
        return Err(Error::DimensionMismatch(format!("{} Ns for {} values", ns.len(), values.len())));
    }
    check_ns(ns)?;
    let mut fit =
        RateFit { ns: ns.to_vec(), values: values.to_vec(), slope: None, intercept: None, r_squared: None };
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Ok(fit);
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    fit.slope = Some(slope);
    fit.intercept = Some(my - slope * mx);
    fit.r_squared = Some(if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 });
    Ok(fit)
}

fn check_ns(ns: &[usize]) -> Result<()> {
    if ns.len() < 2 {
        return Err(Error::InvalidInput("need at least two values of N".into()));
    }
    if ns[0] == 0 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("Ns must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// One agent type shared by every player, with `log x0 ~ N(log_x0_mean, log_x0_sd²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricFixture {
    pub agent: AgentType,
    pub log_x0_mean: f64,
    pub log_x0_sd: f64,
    pub horizon_t: f64,
}

impl SymmetricFixture {
    /// `mu=0.05, nu=0.1, sigma=0.2, gamma=2, delta=1.5, eta=0.1, eps=1, theta=0.5, T=1`,
    /// `x0` lognormal with log-mean 0 and log-sd 0.1.
    pub fn standard() -> Self {
        SymmetricFixture {
            agent: AgentType {
                x0: 1.0,
                mu: 0.05,
                nu: 0.1,
                sigma: 0.2,
                eta: 0.1,
                gamma: 2.0,
                delta: 1.5,
                epsilon: 1.0,
                theta: 0.5,
            },
            log_x0_mean: 0.0,
            log_x0_sd: 0.1,
            horizon_t: 1.0,
        }
    }

    /// The agent with `x0 = exp E[log x0]`.
    pub fn typical_agent(&self) -> Result<Agent> {
        Agent::new(AgentType { x0: self.log_x0_mean.exp(), ..self.agent })
    }

    pub fn horizon(&self, grid_n: usize) -> Result<Horizon> {
        Horizon::new(self.horizon_t, grid_n)
    }

    fn mfg(&self, horizon: &Horizon) -> Result<(TypeDistribution, SimpleStrategy)> {
        let dist = TypeDistribution::single(AgentType { x0: self.log_x0_mean.exp(), ..self.agent })?;
        let report = solve_mfge_uncertified(&dist, horizon)?;
        let s = report.strategies[0].clone();
        Ok((dist, s))
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyRates {
    /// `|π̂_N - π̂|`.
    pub pi: RateFit,
    /// `sup_t |ĉ_N(t) - ĉ(t)|` on the grid.
    pub c: RateFit,
}

/// Gaps between the symmetric N-player equilibrium and the mean-field one.
pub fn strategy_convergence(
    fixture: &SymmetricFixture,
    ns: &[usize],
    grid_n: usize,
) -> Result<StrategyRates> {
    check_ns(ns)?;
    let hz = fixture.horizon(grid_n)?;
    let (_, mfg) = fixture.mfg(&hz)?;
    let c_mfg = mfg.consumption.on_grid(&hz);
    let agent = fixture.typical_agent()?;
    let gaps = ns
        .iter()
        .map(|&n| {
            let r = solve_nash_uncertified(&NPlayerGame::symmetric(agent, n, hz)?)?;
            let s = &r.strategies[0];
            Ok(((s.pi - mfg.pi).abs(), sup_diff(&s.consumption.on_grid(&hz), &c_mfg)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (pi, c): (Vec<f64>, Vec<f64>) = gaps.into_iter().unzip();
    Ok(StrategyRates { pi: fit_loglog(ns, &pi)?, c: fit_loglog(ns, &c)? })
}

/// `|E log|V_0^i(α̂_N)| - E log|V_0(α̂)||` with every `x0 = exp E[log x0]`;
/// the `E[log x0]` terms cancel between the two sides.
pub fn value_convergence(fixture: &SymmetricFixture, ns: &[usize], grid_n: usize) -> Result<RateFit> {
    check_ns(ns)?;
    let hz = fixture.horizon(grid_n)?;
    let dist = TypeDistribution::single(AgentType { x0: fixture.log_x0_mean.exp(), ..fixture.agent })?;
    let mfg_report = solve_mfge_uncertified(&dist, &hz)?;
    let mfg_ctx = mfg_environment(&dist, &mfg_report, 0)?;
    let v_mfg = value_simple(&mfg_ctx, &mfg_report.strategies[0])?.log_abs_v0;
    let agent = fixture.typical_agent()?;
    let gaps = ns
        .iter()
        .map(|&n| {
            let game = NPlayerGame::symmetric(agent, n, hz)?;
            let r = solve_nash_uncertified(&game)?;
            let ctx = nash_environment(&game, &r, 0)?;
            Ok((value_simple(&ctx, &r.strategies[0])?.log_abs_v0 - v_mfg).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    fit_loglog(ns, &gaps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximateNeRates {
    /// Fit of `|sup_α V(α, α̂_-i) - V(α̂)|`.
    pub fit: RateFit,
    /// Signed gains `V(best reply) - V(α̂)`; never below valuation noise.
    pub signed_gaps: Vec<f64>,
}

/// Gain of one player deviating optimally from the mean-field profile
/// played by everyone in an N-player game.
pub fn approximate_ne_gap(
    fixture: &SymmetricFixture,
    ns: &[usize],
    grid_n: usize,
) -> Result<ApproximateNeRates> {
    check_ns(ns)?;
    let hz = fixture.horizon(grid_n)?;
    let (_, mfg) = fixture.mfg(&hz)?;
    let agent = fixture.typical_agent()?;
    let signed_gaps = ns
        .iter()
        .map(|&n| {
            let ctx = approximate_environment(agent, &mfg, n, hz, fixture.log_x0_mean)?;
            let v = value_simple(&ctx, &mfg)?.v0;
            let br = best_reply(&ctx)?;
            Ok(value_simple(&ctx, &br.strategy)?.v0 - v)
        })
        .collect::<Result<Vec<f64>>>()?;
    let abs: Vec<f64> = signed_gaps.iter().map(|g| g.abs()).collect();
    Ok(ApproximateNeRates { fit: fit_loglog(ns, &abs)?, signed_gaps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WealthRates {
    /// One fit of `sup_t |X̄^N_t - Ŷ_t|` per common-noise realization.
    pub realizations: Vec<RateFit>,
    /// Median of the fitted slopes that were not skipped.
    pub median_slope: Option<f64>,
    pub simulation_grid_n: usize,
}

/// Distance between the empirical geometric-mean wealth of the N-player
/// equilibrium and the mean-field aggregate.
///
/// For each realization one pool of `max(ns)` agents is drawn (initial
/// wealth and idiosyncratic noise) together with one common path, and the
/// game with `N` players uses the first `N` agents of the pool; all `N`
/// therefore share the same common noise.
pub fn wealth_convergence(
    fixture: &SymmetricFixture,
    ns: &[usize],
    n_realizations: usize,
    seed: u64,
    grid_n: usize,
) -> Result<WealthRates> {
    check_ns(ns)?;
    if n_realizations == 0 {
        return Err(Error::InvalidInput("need at least one realization".into()));
    }
    let hz = fixture.horizon(grid_n)?;
    let (_, mfg) = fixture.mfg(&hz)?;
    let agent = fixture.typical_agent()?;
    let a = fixture.agent;
    let steps = hz.grid_n();
    let dt = hz.dt();
    let sq = dt.sqrt();

    // Deterministic part of log wealth, per node: (pi mu - pi² v/2) t - ∫_0^t c.
    let deterministic = |s: &SimpleStrategy| -> Vec<f64> {
        let drift = s.pi * a.mu - 0.5 * s.pi * s.pi * (a.nu * a.nu + a.sigma * a.sigma);
        let mut out = Vec::with_capacity(steps + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for (k, c) in consumption_steps(s, &hz).iter().enumerate() {
            acc += c;
            out.push(drift * hz.time(k + 1) - acc);
        }
        out
    };
    let per_n = ns
        .iter()
        .map(|&n| {
            let r = solve_nash_uncertified(&NPlayerGame::symmetric(agent, n, hz)?)?;
            let s = r.strategies[0].clone();
            Ok((deterministic(&s), s.pi))
        })
        .collect::<Result<Vec<_>>>()?;
    let mfg_det = deterministic(&mfg);
    let n_max = *ns.last().unwrap();

    let realizations = (0..n_realizations as u64)
        .into_par_iter()
        .map(|r| {
            let db = normal_increments(&mut stream_rng(seed, r, StreamKind::Common, 0), steps, sq);
            let mut b = vec![0.0; steps + 1];
            for k in 0..steps {
                b[k + 1] = b[k] + db[k];
            }
            let log_y: Vec<f64> =
                (0..=steps).map(|k| fixture.log_x0_mean + mfg_det[k] + mfg.pi * a.sigma * b[k]).collect();
            let mut sum_w = vec![0.0; steps + 1];
            let mut sum_log_x0 = 0.0;
            let mut gaps = Vec::with_capacity(ns.len());
            let mut next = 0;
            for j in 0..n_max as u64 {
                let z = normal_increments(&mut stream_rng(seed, r, StreamKind::InitialWealth, j), 1, 1.0)[0];
                sum_log_x0 += fixture.log_x0_mean + fixture.log_x0_sd * z;
                let dw = normal_increments(&mut stream_rng(seed, r, StreamKind::Idiosyncratic, j), steps, sq);
                let mut w = 0.0;
                for k in 0..steps {
                    w += dw[k];
                    sum_w[k + 1] += w;
                }
                if j as usize + 1 == ns[next] {
                    let nf = ns[next] as f64;
                    let (det, pi) = (&per_n[next].0, per_n[next].1);
                    let gap = (0..=steps)
                        .map(|k| {
                            let log_x_bar =
                                sum_log_x0 / nf + det[k] + pi * a.nu * sum_w[k] / nf + pi * a.sigma * b[k];
                            (log_x_bar.exp() - log_y[k].exp()).abs()
                        })
                        .fold(0.0, f64::max);
                    gaps.push(gap);
                    next += 1;
                }
            }
            fit_loglog(ns, &gaps)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut slopes: Vec<f64> = realizations.iter().filter_map(|f| f.slope).collect();
    slopes.sort_by(f64::total_cmp);
    let median_slope = if slopes.is_empty() {
        None
    } else if slopes.len() % 2 == 1 {
        Some(slopes[slopes.len() / 2])
    } else {
        Some(0.5 * (slopes[slopes.len() / 2 - 1] + slopes[slopes.len() / 2]))
    };
    Ok(WealthRates { realizations, median_slope, simulation_grid_n: grid_n })
}

/// Log-spaced `10^(k/2)` from 10 to 10^4.
pub fn standard_ns() -> Vec<usize> {
    vec![10, 32, 100, 316, 1000, 3162, 10000]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_theta() -> SymmetricFixture {
        let mut f = SymmetricFixture::standard();
        f.agent.theta = 0.0;
        f
    }

    #[test]
    fn fit_recovers_power_law() {
        let ns = [10, 100, 1000];
        let v: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-1.3)).collect();
        let f = fit_loglog(&ns, &v).unwrap();
        assert!((f.slope.unwrap() + 1.3).abs() < 1e-12);
        assert!((f.intercept.unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_skips_zero_values() {
        let f = fit_loglog(&[10, 100], &[0.0, 0.0]).unwrap();
        assert!(f.skipped());
    }

    #[test]
    fn fit_rejects_bad_ns() {
        assert!(fit_loglog(&[10], &[1.0]).is_err());
        assert!(fit_loglog(&[10, 10], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn no_concern_means_no_gaps() {
        let f = zero_theta();
        let ns = [1, 10, 100];
        let s = strategy_convergence(&f, &ns, 200).unwrap();
        assert!(s.pi.values.iter().all(|v| *v == 0.0));
        assert!(s.c.values.iter().all(|v| *v == 0.0));
        let v = value_convergence(&f, &ns, 200).unwrap();
        assert!(v.values.iter().all(|v| *v == 0.0));
        let g = approximate_ne_gap(&f, &ns, 200).unwrap();
        assert!(g.signed_gaps.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gaps_shrink_with_n() {
        let f = SymmetricFixture::standard();
        let ns = [10, 100, 1000];
        let s = strategy_convergence(&f, &ns, 200).unwrap();
        assert!(s.pi.values.windows(2).all(|w| w[1] < w[0]));
        let g = approximate_ne_gap(&f, &ns, 200).unwrap();
        assert!(g.signed_gaps.iter().all(|v| *v >= -1e-10));
    }

    #[test]
    fn wealth_experiment_is_reproducible() {
        let f = SymmetricFixture::standard();
        let a = wealth_convergence(&f, &[10, 100], 3, 42, 20).unwrap();
        let b = wealth_convergence(&f, &[10, 100], 3, 42, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn common_noise_only_leaves_no_wealth_gap() {
        let mut f = SymmetricFixture::standard();
        f.agent.nu = 0.0;
        f.log_x0_sd = 0.0;
        let s = strategy_convergence(&f, &[10, 100], 200).unwrap();
        assert!(s.pi.values.iter().all(|v| *v <= 1e-14));
        let w = wealth_convergence(&f, &[10, 100, 1000], 3, 5, 20).unwrap();
        for r in &w.realizations {
            assert!(r.values.iter().all(|v| *v <= 1e-12), "{:?}", r.values);
        }
    }
}
