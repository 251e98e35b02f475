//! Comparative statics: how the equilibrium portfolio reacts to risk
//! aversion, and how elasticity of substitution decides whether equilibrium
//! consumption rises or falls over time.

use serde::{Deserialize, Serialize};

use crate::equilibrium::solve_mfge_uncertified;
use crate::error::{Error, Result};
use crate::model::{Consumption, Horizon, TypeDistribution};

/// Relative tolerance under which two rates are reported as equal.
pub const LEVEL_EPS: f64 = 1e-12;

/// Bisection tolerance for `δ*`.
pub const DELTA_STAR_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Portfolio

/// Population averages entering the common-market portfolio rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortfolioAggregates {
    /// `E[1/γ]`.
    pub mean_inv_gamma: f64,
    /// `E[θ(1/γ - 1)]`.
    pub mean_theta_term: f64,
}

impl PortfolioAggregates {
    pub fn from_distribution(dist: &TypeDistribution) -> Self {
        PortfolioAggregates {
            mean_inv_gamma: dist.expect(|a| 1.0 / a.gamma),
            mean_theta_term: dist.expect(|a| a.theta * (1.0 / a.gamma - 1.0)),
        }
    }

    fn denominator(&self) -> Result<f64> {
        let d = 1.0 + self.mean_theta_term;
        if d == 0.0 {
            return Err(Error::DenominatorZero("1 + E[theta (1/gamma - 1)] = 0".into()));
        }
        Ok(d)
    }
}

/// Equilibrium weight of an investor with `(γ, θ)` in a common market
/// without idiosyncratic noise, the population held fixed.
pub fn pi_gamma(mu: f64, sigma: f64, gamma: f64, theta: f64, agg: &PortfolioAggregates) -> Result<f64> {
    let d = agg.denominator()?;
    Ok(mu / (sigma * sigma) * (1.0 / gamma + agg.mean_inv_gamma * theta * (1.0 - 1.0 / gamma) / d))
}

/// `∂π_γ/∂γ` with the population held fixed.
pub fn dpi_dgamma(mu: f64, sigma: f64, gamma: f64, theta: f64, agg: &PortfolioAggregates) -> Result<f64> {
    let d = agg.denominator()?;
    Ok(mu / (sigma * sigma) * (theta * agg.mean_inv_gamma / d - 1.0) / (gamma * gamma))
}

/// Competition level at which risk aversion stops mattering for the portfolio.
pub fn theta_star(agg: &PortfolioAggregates) -> Result<f64> {
    if agg.mean_inv_gamma == 0.0 {
        return Err(Error::DenominatorZero("E[1/gamma] = 0".into()));
    }
    Ok(agg.denominator()? / agg.mean_inv_gamma)
}

/// Direction in which more risk aversion moves the portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskSensitivity {
    Increases,
    Zero,
    Decreases,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomPortfolio {
    pub gamma: f64,
    pub theta: f64,
    pub pi: f64,
    pub dpi_dgamma: f64,
    pub theta_over_theta_star: f64,
    pub sensitivity: RiskSensitivity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioStatics {
    pub mu: f64,
    pub sigma: f64,
    pub aggregates: PortfolioAggregates,
    pub theta_star: f64,
    pub atoms: Vec<AtomPortfolio>,
}

/// Portfolio statics for every atom. All atoms must trade the same market
/// `(μ, σ)` with `ν = 0`.
pub fn portfolio_statics(dist: &TypeDistribution) -> Result<PortfolioStatics> {
    let first = dist.atoms()[0].1;
    let (mu, sigma) = (first.mu, first.sigma);
    if !(mu > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidInput("portfolio statics need mu > 0 and sigma > 0".into()));
    }
    if dist.atoms().iter().any(|(_, a)| a.nu != 0.0 || a.mu != mu || a.sigma != sigma) {
        return Err(Error::InvalidInput(
            "portfolio statics need one common market (same mu, sigma) and nu = 0".into(),
        ));
    }
    let agg = PortfolioAggregates::from_distribution(dist);
    let ts = theta_star(&agg)?;
    let atoms = dist
        .atoms()
        .iter()
        .map(|(_, a)| {
            let d = dpi_dgamma(mu, sigma, a.gamma, a.theta, &agg)?;
            let ratio = a.theta / ts;
            let sensitivity = if (ratio - 1.0).abs() <= LEVEL_EPS {
                RiskSensitivity::Zero
            } else if ratio > 1.0 {
                RiskSensitivity::Increases
            } else {
                RiskSensitivity::Decreases
            };
            Ok(AtomPortfolio {
                gamma: a.gamma,
                theta: a.theta,
                pi: pi_gamma(mu, sigma, a.gamma, a.theta, &agg)?,
                dpi_dgamma: d,
                theta_over_theta_star: ratio,
                sensitivity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PortfolioStatics { mu, sigma, aggregates: agg, theta_star: ts, atoms })
}

// ---------------------------------------------------------------------------
// Consumption

/// Inputs of the `χ₂(δ)` rule for one investor with fixed `(γ, θ)` facing a
/// fixed population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumptionAggregates {
    pub gamma: f64,
    pub theta: f64,
    /// `E[ρ(δ-1)] / (1 + E[θ(δ-1)])` over the population.
    pub aggregate: f64,
    pub iota: f64,
    #[serde(default = "one")]
    pub eta: f64,
    /// Terminal level; equals 1 when every bequest weight is 1.
    #[serde(default = "one")]
    pub chi1: f64,
}

fn one() -> f64 {
    1.0
}

impl ConsumptionAggregates {
    /// The parameter set of the reference consumption figure, for a given `θ`.
    pub fn figure(theta: f64) -> Self {
        ConsumptionAggregates { gamma: 2.0, theta, aggregate: 0.4, iota: 0.2, eta: 1.0, chi1: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma", self.gamma),
            ("theta", self.theta),
            ("aggregate", self.aggregate),
            ("iota", self.iota),
            ("eta", self.eta),
            ("chi1", self.chi1),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { name, value: v });
            }
        }
        if self.gamma == 1.0 {
            return Err(Error::DenominatorZero("1 - gamma = 0".into()));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::NonPositive { name: "gamma", value: self.gamma });
        }
        if self.chi1.is_nan() || self.chi1 <= 0.0 {
            return Err(Error::NonPositive { name: "chi1", value: self.chi1 });
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::ThetaRange(self.theta));
        }
        Ok(())
    }

    /// `χ₂` as a function of the investor's own `δ`:
    /// `θ(δ-1)A/(1-γ) + ηδ - (δ-1)ι`, affine in `δ`.
    pub fn chi2(&self, delta: f64) -> f64 {
        let g1 = 1.0 - self.gamma;
        (self.theta * (delta - 1.0) * self.aggregate + self.eta * delta * g1 - (delta - 1.0) * g1 * self.iota)
            / g1
    }

    /// `dχ₂/dδ`.
    pub fn slope(&self) -> f64 {
        self.theta * self.aggregate / (1.0 - self.gamma) + self.eta - self.iota
    }

    /// The sufficient condition `θA + (1-γ)η - (1-γ)ι > 0` for the two-case
    /// classification.
    pub fn classification_condition(&self) -> f64 {
        let g1 = 1.0 - self.gamma;
        self.theta * self.aggregate + g1 * self.eta - g1 * self.iota
    }

    /// Aggregates for atom `k` of a population, read off its mean-field
    /// equilibrium. Every atom must share one `γ`.
    pub fn from_distribution(dist: &TypeDistribution, k: usize, horizon: &Horizon) -> Result<Self> {
        let (_, agent) =
            dist.atoms().get(k).ok_or_else(|| Error::InvalidInput(format!("atom {k} out of range")))?;
        if dist.atoms().iter().any(|(_, a)| a.gamma != agent.gamma) {
            return Err(Error::InvalidInput("consumption statics need a common gamma".into()));
        }
        let report = solve_mfge_uncertified(dist, horizon)?;
        let mf = report.mean_field().expect("mean-field report");
        let num: f64 =
            dist.atoms().iter().zip(&mf.atoms).map(|((w, a), m)| w * m.rho * (a.delta - 1.0)).sum();
        let (g, th) = (agent.gamma, agent.theta);
        let (sh, v) = (mf.sigma_hat, agent.variance());
        let cross = agent.sigma * sh * th * (1.0 - g) - agent.mu;
        let iota =
            -th * mf.mu_hat + 0.5 * th * (1.0 + th * (1.0 - g)) * sh * sh + 0.5 * cross * cross / (g * v);
        Ok(ConsumptionAggregates {
            gamma: g,
            theta: th,
            aggregate: num / mf.q_hat,
            iota,
            eta: agent.eta,
            chi1: mf.atoms[k].chi1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Constant,
    Decreasing,
}

/// Consumption rises over time iff `χ₂ < χ₁`.
pub fn label(chi1: f64, chi2: f64) -> Monotonicity {
    if (chi2 - chi1).abs() <= LEVEL_EPS * chi1.abs().max(1.0) {
        Monotonicity::Constant
    } else if chi2 < chi1 {
        Monotonicity::Increasing
    } else {
        Monotonicity::Decreasing
    }
}

/// Which side of `δ*` carries increasing consumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Sufficient condition holds with `γ > 1`.
    IncreasingAboveDeltaStar,
    /// Sufficient condition holds with `γ < 1`.
    IncreasingBelowDeltaStar,
    /// Sufficient condition fails; the scan below still reports what happens.
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub delta: f64,
    pub chi2: f64,
    pub label: Monotonicity,
    /// Whether `(γ, δ)` lies in an admissible preference regime.
    pub regime_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsumptionStatics {
    pub aggregates: ConsumptionAggregates,
    pub slope: f64,
    pub classification_condition: f64,
    pub classification: Classification,
    pub rows: Vec<DeltaRow>,
    pub delta_star: Option<f64>,
    /// Set when `χ₂(δ) - χ₁` keeps its sign over the scanned range.
    pub no_sign_change: bool,
    /// Label found below and above `δ*`, when it exists.
    pub below_delta_star: Option<Monotonicity>,
    pub above_delta_star: Option<Monotonicity>,
}

fn regime_valid(gamma: f64, delta: f64) -> bool {
    delta > 0.0 && ((gamma * delta >= 1.0 && delta >= 1.0) || (gamma * delta <= 1.0 && delta <= 1.0))
}

/// Bisection for the root of `f` on `[lo, hi]` given opposite signs at the ends.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sweeps `deltas` (sorted, increasing) and locates `δ*` where `χ₂ = χ₁`.
pub fn consumption_statics(agg: &ConsumptionAggregates, deltas: &[f64]) -> Result<ConsumptionStatics> {
    agg.validate()?;
    if deltas.len() < 2 || deltas.windows(2).any(|w| w[1] <= w[0]) || deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("need at least two strictly increasing finite deltas".into()));
    }
    let rows: Vec<DeltaRow> = deltas
        .iter()
        .map(|&d| {
            let c2 = agg.chi2(d);
            DeltaRow {
                delta: d,
                chi2: c2,
                label: label(agg.chi1, c2),
                regime_valid: regime_valid(agg.gamma, d),
            }
        })
        .collect();
    let gap = |d: f64| agg.chi2(d) - agg.chi1;
    let (lo, hi) = (deltas[0], *deltas.last().unwrap());
    let (glo, ghi) = (gap(lo), gap(hi));
    let delta_star = if glo == 0.0 {
        Some(lo)
    } else if ghi == 0.0 {
        Some(hi)
    } else if (glo < 0.0) != (ghi < 0.0) {
        Some(bisect(gap, lo, hi, DELTA_STAR_TOL))
    } else {
        None
    };
    let side = |d: f64| label(agg.chi1, agg.chi2(d));
    let (below, above) = match delta_star {
        Some(ds) => ((ds > lo).then(|| side(0.5 * (lo + ds))), (ds < hi).then(|| side(0.5 * (ds + hi)))),
        None => (None, None),
    };
    let cond = agg.classification_condition();
    let classification = if cond > 0.0 && agg.gamma > 1.0 {
        Classification::IncreasingAboveDeltaStar
    } else if cond > 0.0 && agg.gamma < 1.0 {
        Classification::IncreasingBelowDeltaStar
    } else {
        Classification::Unclassified
    };
    Ok(ConsumptionStatics {
        aggregates: *agg,
        slope: agg.slope(),
        classification_condition: cond,
        classification,
        rows,
        delta_star,
        no_sign_change: delta_star.is_none(),
        below_delta_star: below,
        above_delta_star: above,
    })
}

/// One row `(δ, t, c(t))` of the consumption-curve table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub delta: f64,
    pub t: f64,
    pub c: f64,
}

/// Tabulates `c(t)` with terminal level `χ₁` and rate `χ₂(δ)` for each `δ`.
pub fn emit_figure1_data(
    agg: &ConsumptionAggregates,
    deltas: &[f64],
    horizon: &Horizon,
) -> Result<Vec<CurvePoint>> {
    agg.validate()?;
    let mut out = Vec::with_capacity(deltas.len() * horizon.nodes());
    for &d in deltas {
        let c = Consumption::chi(agg.chi1, agg.chi2(d), horizon.t_end())?.on_grid(horizon);
        out.extend(horizon.times().into_iter().zip(c).map(|(t, c)| CurvePoint { delta: d, t, c }));
    }
    Ok(out)
}

/// Label read off a tabulated curve from its finite differences; `None` if
/// the differences disagree in sign.
pub fn observed_monotonicity(values: &[f64]) -> Option<Monotonicity> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let flat = 16.0 * f64::EPSILON * scale;
    if diffs.iter().all(|d| d.abs() <= flat) {
        Some(Monotonicity::Constant)
    } else if diffs.iter().all(|d| *d > 0.0) {
        Some(Monotonicity::Increasing)
    } else if diffs.iter().all(|d| *d < 0.0) {
        Some(Monotonicity::Decreasing)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticsReport {
    pub portfolio: Option<PortfolioStatics>,
    pub consumption: ConsumptionStatics,
}

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AgentType;
    use proptest::prelude::*;

    fn common_market(gamma: f64, theta: f64) -> AgentType {
        AgentType {
            x0: 1.0,
            mu: 0.06,
            nu: 0.0,
            sigma: 0.2,
            eta: 0.1,
            gamma,
            delta: if gamma > 1.0 { 1.5 } else { 0.5 },
            epsilon: 1.0,
            theta,
        }
    }

    #[test]
    fn portfolio_rule_matches_mean_field_solver() {
        let dist =
            TypeDistribution::new(vec![(0.3, common_market(2.0, 0.5)), (0.7, common_market(4.0, 0.8))])
                .unwrap();
        let stat = portfolio_statics(&dist).unwrap();
        let report = solve_mfge_uncertified(&dist, &Horizon::new(1.0, 50).unwrap()).unwrap();
        for (a, s) in stat.atoms.iter().zip(&report.strategies) {
            assert!((a.pi - s.pi).abs() < 1e-12 * s.pi.abs(), "{} vs {}", a.pi, s.pi);
        }
    }

    #[test]
    fn theta_star_two_atom_hand_value() {
        // E[1/gamma] = 0.3/2 + 0.7/4 = 0.325;
        // E[theta(1/gamma - 1)] = 0.3*0.5*(-0.5) + 0.7*0.8*(-0.75) = -0.495.
        let dist =
            TypeDistribution::new(vec![(0.3, common_market(2.0, 0.5)), (0.7, common_market(4.0, 0.8))])
                .unwrap();
        let s = portfolio_statics(&dist).unwrap();
        assert!((s.theta_star - 0.505 / 0.325).abs() < 1e-14);
    }

    #[test]
    fn merton_decreases_in_risk_aversion() {
        let dist = TypeDistribution::single(common_market(2.0, 0.0)).unwrap();
        let s = portfolio_statics(&dist).unwrap();
        let expect = -(0.06 / 0.04) / 4.0;
        assert!((s.atoms[0].dpi_dgamma - expect).abs() < 1e-15);
        assert_eq!(s.atoms[0].sensitivity, RiskSensitivity::Decreases);
    }

    #[test]
    fn full_competition_at_threshold() {
        let dist = TypeDistribution::single(common_market(2.0, 1.0)).unwrap();
        let s = portfolio_statics(&dist).unwrap();
        assert_eq!(s.atoms[0].dpi_dgamma, 0.0);
        assert_eq!(s.atoms[0].sensitivity, RiskSensitivity::Zero);
    }

    #[test]
    fn rejects_idiosyncratic_noise() {
        let mut t = common_market(2.0, 0.5);
        t.nu = 0.1;
        assert!(portfolio_statics(&TypeDistribution::single(t).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn derivative_matches_finite_differences(
            gamma in 0.3f64..6.0, theta in 0.0f64..1.0,
            mig in 0.2f64..2.0, mtt in -0.8f64..0.8,
        ) {
            let agg = PortfolioAggregates { mean_inv_gamma: mig, mean_theta_term: mtt };
            let h = 1e-5;
            let fd = (pi_gamma(0.06, 0.2, gamma + h, theta, &agg).unwrap()
                - pi_gamma(0.06, 0.2, gamma - h, theta, &agg).unwrap()) / (2.0 * h);
            let an = dpi_dgamma(0.06, 0.2, gamma, theta, &agg).unwrap();
            prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "{fd} vs {an}");
        }

        #[test]
        fn sign_flips_across_theta_star(mig in 0.2f64..2.0, mtt in -0.5f64..0.5, gamma in 0.5f64..4.0) {
            let agg = PortfolioAggregates { mean_inv_gamma: mig, mean_theta_term: mtt };
            let ts = theta_star(&agg).unwrap();
            let h = 1e-5;
            let fd = |th: f64| (pi_gamma(0.06, 0.2, gamma + h, th, &agg).unwrap()
                - pi_gamma(0.06, 0.2, gamma - h, th, &agg).unwrap()) / (2.0 * h);
            prop_assert!(fd(ts * (1.0 + 1e-6)) > 0.0);
            prop_assert!(fd(ts * (1.0 - 1e-6)) < 0.0);
        }
    }

    #[test]
    fn figure_rule_is_affine_with_root_at_one() {
        let agg = ConsumptionAggregates::figure(0.5);
        for d in [0.3, 1.7, 2.9] {
            assert!((agg.chi2(d) - (d * 0.6 + 0.4)).abs() < 1e-14);
        }
        let s = consumption_statics(&agg, &linspace(0.25, 3.0, 12)).unwrap();
        assert!((s.delta_star.unwrap() - 1.0).abs() < DELTA_STAR_TOL);
        assert_eq!(s.below_delta_star, Some(Monotonicity::Increasing));
        assert_eq!(s.above_delta_star, Some(Monotonicity::Decreasing));
        assert!(s.classification_condition < 0.0);
        assert_eq!(s.classification, Classification::Unclassified);
    }

    #[test]
    fn classified_case_orientation() {
        // Condition holds with gamma > 1: chi2 decreases in delta.
        let agg =
            ConsumptionAggregates { gamma: 2.0, theta: 0.5, aggregate: 4.0, iota: 0.2, eta: 1.0, chi1: 1.0 };
        let s = consumption_statics(&agg, &linspace(0.1, 5.0, 50)).unwrap();
        assert_eq!(s.classification, Classification::IncreasingAboveDeltaStar);
        assert!(s.slope < 0.0);
        assert_eq!(s.above_delta_star, Some(Monotonicity::Increasing));
        assert_eq!(s.below_delta_star, Some(Monotonicity::Decreasing));
    }

    #[test]
    fn missing_root_is_flagged() {
        let agg = ConsumptionAggregates::figure(0.5);
        let s = consumption_statics(&agg, &[2.0, 3.0]).unwrap();
        assert!(s.no_sign_change);
        assert!(s.delta_star.is_none());
    }

    #[test]
    fn curves_end_at_chi1_and_match_labels() {
        let agg = ConsumptionAggregates::figure(0.5);
        let hz = Horizon::new(5.0, 200).unwrap();
        let deltas = [-2.0 / 3.0, 0.5, 1.0, 1.5, 3.0];
        let pts = emit_figure1_data(&agg, &deltas, &hz).unwrap();
        for (k, d) in deltas.iter().enumerate() {
            let curve: Vec<f64> = pts[k * hz.nodes()..(k + 1) * hz.nodes()].iter().map(|p| p.c).collect();
            assert!((curve.last().unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(observed_monotonicity(&curve), Some(label(1.0, agg.chi2(*d))), "delta {d}");
        }
        // delta = -2/3 gives chi2 = 0: the reciprocal branch.
        assert!(agg.chi2(-2.0 / 3.0).abs() < 1e-15);
        assert!((pts[0].c - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn model_mode_reproduces_equilibrium_rate() {
        let base = AgentType {
            x0: 1.0,
            mu: 0.05,
            nu: 0.1,
            sigma: 0.2,
            eta: 0.1,
            gamma: 2.0,
            delta: 1.5,
            epsilon: 1.0,
            theta: 0.5,
        };
        let hz = Horizon::new(1.0, 50).unwrap();
        let single = TypeDistribution::single(base).unwrap();
        let two = TypeDistribution::new(vec![
            (0.4, base),
            (0.6, AgentType { delta: 3.0, theta: 0.2, mu: 0.07, ..base }),
        ])
        .unwrap();
        for dist in [single, two] {
            let report = solve_mfge_uncertified(&dist, &hz).unwrap();
            for (k, (_, a)) in dist.atoms().iter().enumerate() {
                let agg = ConsumptionAggregates::from_distribution(&dist, k, &hz).unwrap();
                let direct = report.chis()[k].1;
                assert!((agg.chi2(a.delta) - direct).abs() < 1e-10, "{} vs {direct}", agg.chi2(a.delta));
            }
        }
    }
}
