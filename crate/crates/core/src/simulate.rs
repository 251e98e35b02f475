//! Exact log-space simulation of wealth under simple strategies.
//!
//! Every random stream is a ChaCha8 generator keyed by
//! `(seed, kind, index)` with the path number as its stream id, so any path
//! can be regenerated on its own and results never depend on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{EquilibriumReport, NPlayerGame};
use crate::error::{Error, Result};
use crate::model::{Horizon, SimpleStrategy, TypeDistribution};

/// Purpose of a random stream; keeps unrelated draws independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    Common,
    Idiosyncratic,
    InitialWealth,
    Valuation,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for `(seed, path, kind, index)`; `index` is typically the agent.
pub fn stream_rng(seed: u64, path: u64, kind: StreamKind, index: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(seed ^ splitmix64(kind as u64 + 1)) ^ index);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(path);
    rng
}

/// `n` standard normal draws scaled by `scale`.
pub fn normal_increments(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

/// Brownian increments for the common noise `B` and each agent's `W^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub horizon: Horizon,
    pub seed: u64,
    pub n_agents: usize,
    pub n_paths: usize,
    /// `common[path][step]`.
    pub common: Vec<Vec<f64>>,
    /// `idio[path][agent][step]`.
    pub idio: Vec<Vec<Vec<f64>>>,
}

impl PathBundle {
    pub fn generate(seed: u64, horizon: Horizon, n_agents: usize, n_paths: usize) -> Self {
        let n = horizon.grid_n();
        let sq = horizon.dt().sqrt();
        let per_path: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..n_paths as u64)
            .into_par_iter()
            .map(|path| {
                let common = normal_increments(&mut stream_rng(seed, path, StreamKind::Common, 0), n, sq);
                let idio = (0..n_agents as u64)
                    .map(|i| {
                        normal_increments(&mut stream_rng(seed, path, StreamKind::Idiosyncratic, i), n, sq)
                    })
                    .collect();
                (common, idio)
            })
            .collect();
        let (common, idio) = per_path.into_iter().unzip();
        PathBundle { horizon, seed, n_agents, n_paths, common, idio }
    }

    /// Same bundle with every increment negated.
    pub fn antithetic(&self) -> Self {
        let neg = |v: &Vec<f64>| v.iter().map(|x| -x).collect::<Vec<_>>();
        PathBundle {
            common: self.common.iter().map(neg).collect(),
            idio: self.idio.iter().map(|p| p.iter().map(neg).collect()).collect(),
            ..self.clone()
        }
    }
}

/// Simulated wealth of every agent on every path, in log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WealthPaths {
    pub horizon: Horizon,
    /// `log_x[path][agent][node]`.
    pub log_x: Vec<Vec<Vec<f64>>>,
    /// Consumption of each agent on the grid.
    pub consumption: Vec<Vec<f64>>,
}

impl WealthPaths {
    pub fn wealth(&self, path: usize, agent: usize) -> Vec<f64> {
        self.log_x[path][agent].iter().map(|l| l.exp()).collect()
    }

    /// Rows `(path_id, agent_id, t, X)`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.log_x.iter().enumerate().flat_map(move |(p, agents)| {
            agents.iter().enumerate().flat_map(move |(i, lx)| {
                lx.iter().enumerate().map(move |(k, l)| (p, i, self.horizon.time(k), l.exp()))
            })
        })
    }
}

/// Per-step `∫_{t_k}^{t_{k+1}} c`, in closed form for the `chi` family.
pub(crate) fn consumption_steps(s: &SimpleStrategy, horizon: &Horizon) -> Vec<f64> {
    (0..horizon.grid_n())
        .map(|k| s.consumption.integral_between(horizon.time(k), horizon.time(k + 1)))
        .collect()
}

/// `log X_{k+1} = log X_k + (pi mu - pi² (nu² + sigma²)/2) dt - ∫c + pi nu dW + pi sigma dB`.
pub fn simulate_wealth(
    game: &NPlayerGame,
    strategies: &[SimpleStrategy],
    bundle: &PathBundle,
) -> Result<WealthPaths> {
    let n_agents = game.n();
    if strategies.len() != n_agents || bundle.n_agents != n_agents {
        return Err(Error::DimensionMismatch(format!(
            "{n_agents} agents, {} strategies, bundle for {} agents",
            strategies.len(),
            bundle.n_agents
        )));
    }
    let hz = *game.horizon();
    if bundle.horizon != hz {
        return Err(Error::DimensionMismatch("bundle grid differs from the game grid".into()));
    }
    let steps: Vec<Vec<f64>> = strategies.iter().map(|s| consumption_steps(s, &hz)).collect();
    let dt = hz.dt();
    let log_x = (0..bundle.n_paths)
        .into_par_iter()
        .map(|p| {
            game.agents()
                .iter()
                .zip(strategies)
                .enumerate()
                .map(|(i, (a, s))| {
                    let drift = (s.pi * a.mu - 0.5 * s.pi * s.pi * a.variance()) * dt;
                    let mut l = a.x0.ln();
                    let mut out = Vec::with_capacity(hz.nodes());
                    out.push(l);
                    #[allow(clippy::needless_range_loop)]
                    for k in 0..hz.grid_n() {
                        l += drift - steps[i][k]
                            + s.pi * (a.nu * bundle.idio[p][i][k] + a.sigma * bundle.common[p][k]);
                        out.push(l);
                    }
                    out
                })
                .collect()
        })
        .collect();
    let consumption = strategies.iter().map(|s| s.consumption.on_grid(&hz)).collect();
    Ok(WealthPaths { horizon: hz, log_x, consumption })
}

/// `(X̄_t, c̄_t)` on one path: geometric means over agents, via mean logs.
pub fn empirical_geometric_means(paths: &WealthPaths, path: usize) -> (Vec<f64>, Vec<f64>) {
    let agents = &paths.log_x[path];
    let n = agents.len() as f64;
    let nodes = paths.horizon.nodes();
    let x_bar = (0..nodes).map(|k| (agents.iter().map(|a| a[k]).sum::<f64>() / n).exp()).collect();
    let c_bar =
        (0..nodes).map(|k| (paths.consumption.iter().map(|c| c[k].ln()).sum::<f64>() / n).exp()).collect();
    (x_bar, c_bar)
}

/// Mean-field aggregates along each common-noise path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MfgBenchmark {
    /// `y_hat[path][node]`.
    pub y_hat: Vec<Vec<f64>>,
    /// `m̂_t = exp E[log ĉ_t]`.
    pub m_hat: Vec<f64>,
}

/// `Ŷ_t = exp(E[log x0] + E[π̂ mu - π̂²(nu² + sigma²)/2] t - E[∫_0^t ĉ] + E[π̂ sigma] B_t)`
/// driven by the common increments of `common[path][step]`.
pub fn mfg_benchmark(
    dist: &TypeDistribution,
    report: &EquilibriumReport,
    horizon: &Horizon,
    common: &[Vec<f64>],
) -> Result<MfgBenchmark> {
    if report.strategies.len() != dist.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} strategies for {} atoms",
            report.strategies.len(),
            dist.len()
        )));
    }
    let s = &report.strategies;
    let drift = dist.expect_indexed(|k, a| s[k].pi * a.mu - 0.5 * s[k].pi * s[k].pi * a.variance());
    let vol = dist.expect_indexed(|k, a| s[k].pi * a.sigma);
    let log_y0 = dist.expect(|a| a.x0.ln());
    let steps: Vec<Vec<f64>> = s.iter().map(|s| consumption_steps(s, horizon)).collect();
    let cons: Vec<f64> = (0..horizon.grid_n()).map(|k| dist.expect_indexed(|j, _| steps[j][k])).collect();
    let dt = horizon.dt();
    let y_hat = common
        .iter()
        .map(|db| {
            if db.len() != horizon.grid_n() {
                return Err(Error::DimensionMismatch("common increments do not match the grid".into()));
            }
            let mut l = log_y0;
            let mut out = Vec::with_capacity(horizon.nodes());
            out.push(l.exp());
            for k in 0..horizon.grid_n() {
                l += drift * dt - cons[k] + vol * db[k];
                out.push(l.exp());
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let grids: Vec<Vec<f64>> = s.iter().map(|s| s.consumption.on_grid(horizon)).collect();
    let m_hat = (0..horizon.nodes()).map(|t| dist.geometric_mean(|k, _| grids[k][t])).collect();
    Ok(MfgBenchmark { y_hat, m_hat })
}
