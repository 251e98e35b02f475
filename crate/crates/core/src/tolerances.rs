//! Pass/fail thresholds shared by verification, experiments and the CLI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative gap between a best reply and the equilibrium `π`.
    pub fixed_point_pi: f64,
    /// Sup-norm gap between a best reply and the equilibrium `c`.
    pub fixed_point_c: f64,
    /// `c(t) exp(∫_t^T c) = χ₁ e^{χ₂(T-t)}` residual.
    pub consumption_identity: f64,
    /// Deviation-scan improvement relative to `|V₀|`.
    pub deviation: f64,
    /// Aggregate consistency of a mean-field equilibrium.
    pub mfg_consistency: f64,
    /// Closed-form Bernoulli solution against the RK4 oracle.
    pub bernoulli_oracle: f64,
    /// Central-difference residual of a Bernoulli solution, relative to `sup h`.
    pub bernoulli_residual: f64,
    /// Monte Carlo agreement in standard errors.
    pub mc_standard_errors: f64,
    pub rate_slope_low: f64,
    pub rate_slope_high: f64,
    pub wealth_slope_low: f64,
    pub wealth_slope_high: f64,
    /// Band for the gain of a best reply against the mean-field profile.
    pub approximate_ne_slope_low: f64,
    pub approximate_ne_slope_high: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fixed_point_pi: 1e-8,
            fixed_point_c: 1e-6,
            consumption_identity: 1e-8,
            deviation: 1e-8,
            mfg_consistency: 1e-10,
            bernoulli_oracle: 1e-6,
            bernoulli_residual: 1e-4,
            mc_standard_errors: 3.0,
            rate_slope_low: -1.15,
            rate_slope_high: -0.85,
            wealth_slope_low: -0.65,
            wealth_slope_high: -0.40,
            approximate_ne_slope_low: -1.15,
            approximate_ne_slope_high: -0.85,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 14] = [
        "fixed_point_pi",
        "fixed_point_c",
        "consumption_identity",
        "deviation",
        "mfg_consistency",
        "bernoulli_oracle",
        "bernoulli_residual",
        "mc_standard_errors",
        "rate_slope_low",
        "rate_slope_high",
        "wealth_slope_low",
        "wealth_slope_high",
        "approximate_ne_slope_low",
        "approximate_ne_slope_high",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "fixed_point_pi" => &mut self.fixed_point_pi,
            "fixed_point_c" => &mut self.fixed_point_c,
            "consumption_identity" => &mut self.consumption_identity,
            "deviation" => &mut self.deviation,
            "mfg_consistency" => &mut self.mfg_consistency,
            "bernoulli_oracle" => &mut self.bernoulli_oracle,
            "bernoulli_residual" => &mut self.bernoulli_residual,
            "mc_standard_errors" => &mut self.mc_standard_errors,
            "rate_slope_low" => &mut self.rate_slope_low,
            "rate_slope_high" => &mut self.rate_slope_high,
            "wealth_slope_low" => &mut self.wealth_slope_low,
            "wealth_slope_high" => &mut self.wealth_slope_high,
            "approximate_ne_slope_low" => &mut self.approximate_ne_slope_low,
            "approximate_ne_slope_high" => &mut self.approximate_ne_slope_high,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite { name: "tolerance", value });
        }
        let is_band = key.contains("slope");
        if !is_band && value <= 0.0 {
            return Err(Error::NonPositive { name: "tolerance", value });
        }
        let slot =
            self.slot(key).ok_or_else(|| Error::InvalidInput(format!("unknown tolerance key {key:?}")))?;
        *slot = value;
        Ok(())
    }

    /// Applies `KEY=VALUE` overrides in order.
    pub fn with_overrides<S: AsRef<str>>(mut self, overrides: &[S]) -> Result<Self> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("override {o:?} is not KEY=VALUE")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("override {o:?} has a non-numeric value")))?;
            self.set(k.trim(), v)?;
        }
        if self.rate_slope_low >= self.rate_slope_high
            || self.wealth_slope_low >= self.wealth_slope_high
            || self.approximate_ne_slope_low >= self.approximate_ne_slope_high
        {
            return Err(Error::InvalidInput("slope band is empty".into()));
        }
        Ok(self)
    }

    pub fn rate_in_band(&self, slope: f64) -> bool {
        (self.rate_slope_low..=self.rate_slope_high).contains(&slope)
    }

    pub fn wealth_in_band(&self, slope: f64) -> bool {
        (self.wealth_slope_low..=self.wealth_slope_high).contains(&slope)
    }

    pub fn approximate_ne_in_band(&self, slope: f64) -> bool {
        (self.approximate_ne_slope_low..=self.approximate_ne_slope_high).contains(&slope)
    }
}
