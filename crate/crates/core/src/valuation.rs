//! Recursive utility of a simple strategy in a given aggregate environment.
//!
//! The agent's felicity depends on `(c X)^p (b Y)^-theta`, where `X` is own
//! wealth and `Y` a geometric Brownian aggregate with drift `mu2 - b_hat(t)`.
//! For a simple strategy the utility is
//! `V_0 = (eta eps)^lambda / (1 - gamma) h(0) (x0^p y0^-theta)^(1 - gamma)`
//! with `h` the Bernoulli solution for exponent `1/lambda`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bernoulli::{solve_bernoulli, BernoulliProblem, BernoulliSolution};
use crate::error::{Error, Result};
use crate::formulas::Market;
use crate::model::{Agent, Horizon, SimpleStrategy};
use crate::quadrature::trapezoid;
use crate::simulate::{stream_rng, StreamKind};

/// Tolerance on `|lambda - 1|` for the time-additive oracle.
pub const TIME_ADDITIVE_TOL: f64 = 1e-12;

/// Everything the agent takes as given: own market, aggregate dynamics and
/// the aggregate consumption curves, all on the nodes of `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationContext {
    pub agent: Agent,
    pub horizon: Horizon,
    /// Exponent on own wealth and consumption.
    pub p: f64,
    pub mu1: f64,
    pub nu1: f64,
    pub sigma1: f64,
    pub mu2: f64,
    pub nu2: f64,
    pub sigma2: f64,
    /// Drift deduction of the aggregate, `b_hat(t)`.
    pub b_hat: Vec<f64>,
    /// Aggregate consumption level `b(t)` deflating own consumption.
    pub b_bar: Vec<f64>,
    /// Initial aggregate level.
    pub y0: f64,
}

impl ValuationContext {
    /// An agent alone in its market: `p = 1`, no aggregate.
    pub fn standalone(agent: Agent, horizon: Horizon) -> Self {
        let n = horizon.nodes();
        ValuationContext {
            agent,
            horizon,
            p: 1.0,
            mu1: agent.mu,
            nu1: agent.nu,
            sigma1: agent.sigma,
            mu2: 0.0,
            nu2: 0.0,
            sigma2: 0.0,
            b_hat: vec![0.0; n],
            b_bar: vec![1.0; n],
            y0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidInput(format!("p must lie in [0, 1], got {}", self.p)));
        }
        let n = self.horizon.nodes();
        if self.b_hat.len() != n || self.b_bar.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "aggregate curves have {} and {} nodes, grid has {n}",
                self.b_hat.len(),
                self.b_bar.len()
            )));
        }
        for (name, v) in [
            ("mu1", self.mu1),
            ("nu1", self.nu1),
            ("sigma1", self.sigma1),
            ("mu2", self.mu2),
            ("nu2", self.nu2),
            ("sigma2", self.sigma2),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { name, value: v });
            }
        }
        if !(self.y0.is_finite() && self.y0 > 0.0) {
            return Err(Error::NonPositive { name: "y0", value: self.y0 });
        }
        for &v in &self.b_bar {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonPositive { name: "b_bar", value: v });
            }
        }
        for &v in &self.b_hat {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Negative { name: "b_hat", value: v });
            }
        }
        Ok(())
    }

    pub(crate) fn market(&self) -> Market {
        Market {
            p: self.p,
            mu1: self.mu1,
            nu1: self.nu1,
            sigma1: self.sigma1,
            mu2: self.mu2,
            nu2: self.nu2,
            sigma2: self.sigma2,
        }
    }

    /// Own total variance `nu1² + sigma1²`.
    pub fn own_variance(&self) -> f64 {
        self.nu1 * self.nu1 + self.sigma1 * self.sigma1
    }

    /// Aggregate total variance `nu2² + sigma2²`.
    pub fn aggregate_variance(&self) -> f64 {
        self.nu2 * self.nu2 + self.sigma2 * self.sigma2
    }

    /// Same context with own initial wealth replaced.
    pub fn with_x0(&self, x0: f64) -> Result<Self> {
        Ok(ValuationContext { agent: self.agent.with_x0(x0)?, ..self.clone() })
    }

    /// `log((eta eps)^lambda / |1 - gamma|) + (1 - gamma)(p log x0 - theta log y0)`.
    fn log_scale(&self) -> f64 {
        let a = &self.agent;
        a.lambda() * (a.eta * a.epsilon).ln() - (1.0 - a.gamma).abs().ln()
            + (1.0 - a.gamma) * (self.p * a.x0.ln() - a.theta * self.y0.ln())
    }
}

/// Bernoulli coefficients of a simple strategy; `beta_alpha` multiplies the
/// martingale integrands, which vanish for simple strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyCoefficients {
    pub phi_alpha: Vec<f64>,
    pub psi_alpha: Vec<f64>,
    pub beta_alpha: [f64; 3],
}

pub fn strategy_coefficients(ctx: &ValuationContext, alpha: &SimpleStrategy) -> Result<StrategyCoefficients> {
    ctx.validate()?;
    alpha.validate()?;
    let a = &ctx.agent;
    let (g, th, p, pi) = (a.gamma, a.theta, ctx.p, alpha.pi);
    let c = alpha.consumption.on_grid(&ctx.horizon);
    let constant = 0.5 * p * (p * (1.0 - g) - 1.0) * pi * pi * ctx.own_variance()
        + 0.5 * th * (1.0 + th * (1.0 - g)) * ctx.aggregate_variance()
        - p * th * (1.0 - g) * pi * ctx.sigma1 * ctx.sigma2;
    let phi_alpha = c
        .iter()
        .zip(&ctx.b_hat)
        .map(|(c, bh)| {
            -a.eta * a.lambda() + (1.0 - g) * (p * (pi * ctx.mu1 - c) - th * (ctx.mu2 - bh) + constant)
        })
        .collect();
    let e = 1.0 - 1.0 / a.delta;
    let psi_alpha = c
        .iter()
        .zip(&ctx.b_bar)
        .map(|(c, b)| a.lambda() / a.epsilon * (e * (p * c.ln() - th * b.ln())).exp())
        .collect();
    let beta_alpha = [
        p * (1.0 - g) * pi * ctx.nu1,
        -th * (1.0 - g) * ctx.nu2,
        (1.0 - g) * (p * pi * ctx.sigma1 - th * (1.0 - g) * ctx.sigma2),
    ];
    Ok(StrategyCoefficients { phi_alpha, psi_alpha, beta_alpha })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Valuation {
    pub v0: f64,
    /// `log |V_0|`, assembled in log space.
    pub log_abs_v0: f64,
    pub bernoulli: BernoulliSolution,
}

/// Initial utility of `alpha` in the environment `ctx`.
pub fn value_simple(ctx: &ValuationContext, alpha: &SimpleStrategy) -> Result<Valuation> {
    let coef = strategy_coefficients(ctx, alpha)?;
    let a = &ctx.agent;
    let problem = BernoulliProblem::new(1.0 / a.lambda(), coef.phi_alpha, coef.psi_alpha, ctx.horizon)?;
    let bernoulli = solve_bernoulli(&problem)?;
    let log_abs_v0 = ctx.log_scale() + bernoulli.log_h[0];
    let v0 = (1.0 - a.gamma).signum() * log_abs_v0.exp();
    if (1.0 - a.gamma) * v0 <= 0.0 || !v0.is_finite() {
        return Err(Error::SignError(v0));
    }
    Ok(Valuation { v0, log_abs_v0, bernoulli })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// Monte Carlo estimate of the time-additive utility
/// `U_0 = E[∫ e^{-eta s} F_s^(1-gamma)/(1-gamma) ds + eps e^{-eta T} G_T^(1-gamma)/(1-gamma)]`
/// with `F = (c X)^p (b Y)^-theta` and `G = X^p Y^-theta`, valid when
/// `lambda = 1`, where `U_0 = V_0 / eta`.
///
/// Paths are simulated exactly in log space; the time integral uses the
/// trapezoid rule on the grid. Each path owns its random stream, so the
/// result does not depend on the thread count.
pub fn value_time_additive_mc(
    ctx: &ValuationContext,
    alpha: &SimpleStrategy,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    ctx.validate()?;
    alpha.validate()?;
    let a = &ctx.agent;
    if (a.lambda() - 1.0).abs() > TIME_ADDITIVE_TOL {
        return Err(Error::NotTimeAdditive(a.lambda()));
    }
    if n_paths < 2 {
        return Err(Error::InvalidInput("need at least two Monte Carlo paths".into()));
    }
    let hz = &ctx.horizon;
    let n = hz.grid_n();
    let dt = hz.dt();
    let sq = dt.sqrt();
    let (g, th, p, pi) = (a.gamma, a.theta, ctx.p, alpha.pi);
    let c = alpha.consumption.on_grid(hz);
    let c_step: Vec<f64> =
        (0..n).map(|k| alpha.consumption.integral_between(hz.time(k), hz.time(k + 1))).collect();
    let bh_step: Vec<f64> = (0..n).map(|k| 0.5 * (ctx.b_hat[k] + ctx.b_hat[k + 1]) * dt).collect();
    let x_drift = (pi * ctx.mu1 - 0.5 * pi * pi * ctx.own_variance()) * dt;
    let y_drift = (ctx.mu2 - 0.5 * ctx.aggregate_variance()) * dt;
    // Deterministic part of the log felicity: p log c - theta log b - eta t / (1 - gamma).
    let det: Vec<f64> = (0..=n).map(|k| p * c[k].ln() - th * ctx.b_bar[k].ln()).collect();
    let discount: Vec<f64> = hz.times().iter().map(|t| (-a.eta * t).exp()).collect();
    let e = 1.0 - g;

    let samples: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = stream_rng(seed, path, StreamKind::Valuation, 0);
            let mut lx = a.x0.ln();
            let mut ly = ctx.y0.ln();
            let mut felicity = Vec::with_capacity(n + 1);
            felicity.push(discount[0] * (e * (det[0] + p * lx - th * ly)).exp() / e);
            for k in 0..n {
                let w1: f64 = StandardNormal.sample(&mut rng);
                let w2: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                lx += x_drift - c_step[k] + pi * sq * (ctx.nu1 * w1 + ctx.sigma1 * b);
                ly += y_drift - bh_step[k] + sq * (ctx.nu2 * w2 + ctx.sigma2 * b);
                felicity.push(discount[k + 1] * (e * (det[k + 1] + p * lx - th * ly)).exp() / e);
            }
            let bequest = a.epsilon * discount[n] * (e * (p * lx - th * ly)).exp() / e;
            trapezoid(&felicity, dt) + bequest
        })
        .collect();
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(McEstimate { mean, std_error: (var / m).sqrt(), n_paths })
}
