//! Optimal simple control against a fixed aggregate environment, and a
//! numerical certificate that no nearby simple strategy does better.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernoulli::{solve_bernoulli, BernoulliProblem, BernoulliSolution};
use crate::error::{Error, Result};
use crate::formulas::{control_exponent, level_exponent, optimal_pi, rho, risk_denominator};
use crate::model::{Consumption, SimpleStrategy};
use crate::valuation::{value_simple, ValuationContext};

/// Bernoulli data of the optimal value: `h' + phi* h + psi* h^(1 - a/lambda) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestReplyCoefficients {
    pub a: f64,
    /// Time-independent part of `phi*`.
    pub rho: f64,
    pub phi_star: Vec<f64>,
    pub psi_star: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestReply {
    pub strategy: SimpleStrategy,
    pub coefficients: BestReplyCoefficients,
    /// `None` when the coefficients are constant and the consumption curve
    /// is written in closed form.
    pub bernoulli: Option<BernoulliSolution>,
}

pub fn best_reply_coefficients(ctx: &ValuationContext) -> Result<BestReplyCoefficients> {
    ctx.validate()?;
    let ag = &ctx.agent;
    let p = ctx.p;
    if risk_denominator(ag.gamma, p) == 0.0 {
        return Err(Error::DegenerateDenominator("1 - p(1 - gamma)"));
    }
    if ctx.own_variance() == 0.0 {
        return Err(Error::DegenerateDenominator("own variance nu1² + sigma1²"));
    }
    if p + (1.0 - p) * ag.delta == 0.0 {
        return Err(Error::DegenerateDenominator("1 - p(1 - 1/delta)"));
    }
    let a = control_exponent(ag.delta, p);
    let rho = rho(ag, &ctx.market());
    let tilt = ag.theta * (1.0 - ag.gamma);
    let phi_star = ctx.b_hat.iter().map(|bh| rho + tilt * bh).collect();
    let kappa = ag.lambda() - p * (1.0 - ag.gamma);
    let level = level_exponent(ag, a);
    let log_eps = ag.epsilon.ln();
    let psi_star = ctx.b_bar.iter().map(|b| kappa * (-a * log_eps + level * b.ln()).exp()).collect();
    Ok(BestReplyCoefficients { a, rho, phi_star, psi_star })
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| x.to_bits() == v[0].to_bits())
}

/// The optimal simple strategy: constant `pi*` and
/// `c*(t) = eps^-a b(t)^(-theta(1-1/delta)a) h(t)^(-a/lambda)`.
///
/// With constant coefficients the curve is returned in the closed-form
/// `(chi1, chi2)` family, otherwise tabulated on the context grid.
pub fn best_reply(ctx: &ValuationContext) -> Result<BestReply> {
    let coefficients = best_reply_coefficients(ctx)?;
    let ag = &ctx.agent;
    let pi = optimal_pi(ag, &ctx.market());
    let a = coefficients.a;
    let level = level_exponent(ag, a);
    let log_eps = ag.epsilon.ln();
    let hz = &ctx.horizon;

    if is_constant(&coefficients.phi_star) && is_constant(&coefficients.psi_star) {
        let b_end = ctx.b_bar[hz.grid_n()];
        let chi1 = (-a * log_eps + level * b_end.ln()).exp();
        let chi2 = -(a / ag.lambda()) * coefficients.phi_star[0];
        let strategy = SimpleStrategy::new(Consumption::chi(chi1, chi2, hz.t_end())?, pi)?;
        return Ok(BestReply { strategy, coefficients, bernoulli: None });
    }

    let exponent = a / ag.lambda();
    let problem =
        BernoulliProblem::new(exponent, coefficients.phi_star.clone(), coefficients.psi_star.clone(), *hz)?;
    let sol = solve_bernoulli(&problem)?;
    let c = ctx
        .b_bar
        .iter()
        .zip(&sol.log_h)
        .map(|(b, lh)| (-a * log_eps + level * b.ln() - exponent * lh).exp())
        .collect();
    let strategy = SimpleStrategy::new(Consumption::table(hz.t_end(), c)?, pi)?;
    Ok(BestReply { strategy, coefficients, bernoulli: Some(sol) })
}

/// Deviations `pi + i d_pi` and `c (1 + j d_c)` for `|i|, |j| <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationGrid {
    pub k_max: usize,
    pub d_pi: f64,
    pub d_c: f64,
}

impl Default for DeviationGrid {
    /// 21 × 21 points, `d_pi = 0.05`, `d_c = 0.02`.
    fn default() -> Self {
        DeviationGrid { k_max: 10, d_pi: 0.05, d_c: 0.02 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanReport {
    pub v_center: f64,
    /// `max V(deviation) - V(center)` over the grid, center included.
    pub max_improvement: f64,
    /// `max_improvement / |v_center|`.
    pub relative_improvement: f64,
    /// Grid offsets `(i, j)` of the best point.
    pub argmax: (i64, i64),
    pub evaluations: usize,
}

/// Evaluates the utility over a grid of simple deviations around `center`.
pub fn deviation_scan(
    ctx: &ValuationContext,
    center: &SimpleStrategy,
    grid: &DeviationGrid,
) -> Result<ScanReport> {
    let v_center = value_simple(ctx, center)?.v0;
    let k = grid.k_max as i64;
    if grid.k_max > 0 && (grid.d_c * k as f64 >= 1.0 || grid.d_c < 0.0) {
        return Err(Error::InvalidInput(format!(
            "consumption tilts must stay above -100%, got d_c = {}",
            grid.d_c
        )));
    }
    let points: Vec<(i64, i64)> = (-k..=k).flat_map(|i| (-k..=k).map(move |j| (i, j))).collect();
    let values: Vec<Result<f64>> = points
        .par_iter()
        .map(|&(i, j)| {
            if i == 0 && j == 0 {
                return Ok(v_center);
            }
            let consumption = if j == 0 {
                center.consumption.clone()
            } else {
                center.consumption.scaled(1.0 + j as f64 * grid.d_c, &ctx.horizon)?
            };
            let s = SimpleStrategy::new(consumption, center.pi + i as f64 * grid.d_pi)?;
            Ok(value_simple(ctx, &s)?.v0)
        })
        .collect();
    let mut best = (0.0, (0, 0));
    for (&pt, v) in points.iter().zip(values) {
        let gain = v? - v_center;
        if gain > best.0 {
            best = (gain, pt);
        }
    }
    Ok(ScanReport {
        v_center,
        max_improvement: best.0,
        relative_improvement: best.0 / v_center.abs(),
        argmax: best.1,
        evaluations: points.len(),
    })
}
