use serde::{Deserialize, Serialize};

use super::Horizon;
use crate::error::{Error, Result};

/// Below this `|chi2|` the curve switches to the `(T - t + 1/chi1)^-1` branch.
pub const CHI2_BRANCH_EPS: f64 = 1e-10;

/// Deterministic consumption rate on `[0, T]`.
///
/// `Chi` is the closed-form family produced by the equilibrium solvers,
/// characterised by `c(t) exp(∫_t^T c) = chi1 exp(chi2 (T - t))`. `Table`
/// holds values on a uniform grid over `[0, T]`, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Consumption {
    Chi { chi1: f64, chi2: f64, t_end: f64 },
    Table { t_end: f64, values: Vec<f64> },
}

impl Consumption {
    pub fn chi(chi1: f64, chi2: f64, t_end: f64) -> Result<Self> {
        if !(chi1.is_finite() && chi1 > 0.0) {
            return Err(Error::NonPositive { name: "chi1", value: chi1 });
        }
        if !chi2.is_finite() {
            return Err(Error::NonFinite { name: "chi2", value: chi2 });
        }
        Ok(Consumption::Chi { chi1, chi2, t_end })
    }

    pub fn table(t_end: f64, values: Vec<f64>) -> Result<Self> {
        let c = Consumption::Table { t_end, values };
        c.validate()?;
        Ok(c)
    }

    /// Tabulates `f` on the nodes of `horizon`.
    pub fn from_fn(horizon: &Horizon, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::table(horizon.t_end(), horizon.sample(f))
    }

    /// Checks positivity and finiteness (deserialised curves skip the constructors).
    pub fn validate(&self) -> Result<()> {
        match self {
            Consumption::Chi { chi1, chi2, t_end } => {
                Self::chi(*chi1, *chi2, *t_end)?;
                if !(t_end.is_finite() && *t_end > 0.0) {
                    return Err(Error::NonPositive { name: "T", value: *t_end });
                }
            }
            Consumption::Table { t_end, values } => {
                if !(t_end.is_finite() && *t_end > 0.0) {
                    return Err(Error::NonPositive { name: "T", value: *t_end });
                }
                if values.len() < 2 {
                    return Err(Error::InvalidInput("consumption table needs at least two nodes".into()));
                }
                for &v in values {
                    if !v.is_finite() {
                        return Err(Error::NonFinite { name: "consumption", value: v });
                    }
                    if v <= 0.0 {
                        return Err(Error::NonPositive { name: "consumption", value: v });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn t_end(&self) -> f64 {
        match self {
            Consumption::Chi { t_end, .. } | Consumption::Table { t_end, .. } => *t_end,
        }
    }

    /// `c(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Consumption::Chi { chi1, chi2, t_end } => chi_curve(*chi1, *chi2, *t_end - t),
            Consumption::Table { t_end, values } => {
                let n = values.len() - 1;
                let s = (t / t_end * n as f64).clamp(0.0, n as f64);
                let k = (s.floor() as usize).min(n - 1);
                let w = s - k as f64;
                if w == 0.0 {
                    values[k]
                } else {
                    values[k] + w * (values[k + 1] - values[k])
                }
            }
        }
    }

    /// `c` on every node of `horizon`.
    pub fn on_grid(&self, horizon: &Horizon) -> Vec<f64> {
        if let Consumption::Table { t_end, values } = self {
            if values.len() == horizon.nodes() && *t_end == horizon.t_end() {
                return values.clone();
            }
        }
        horizon.sample(|t| self.eval(t))
    }

    /// `∫_t^T c(s) ds`: closed form for `Chi`, exact for the piecewise
    /// linear interpolant of `Table`.
    pub fn integral_to_end(&self, t: f64) -> f64 {
        match self {
            Consumption::Chi { chi1, chi2, t_end } => chi_integral(*chi1, *chi2, *t_end - t),
            Consumption::Table { t_end, values } => {
                let n = values.len() - 1;
                let dt = t_end / n as f64;
                let s = (t / t_end * n as f64).clamp(0.0, n as f64);
                let k = (s.floor() as usize).min(n - 1);
                let ct = self.eval(t);
                let head = 0.5 * (ct + values[k + 1]) * ((k + 1) as f64 - s) * dt;
                let tail: f64 = values[k + 1..].windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum();
                head + tail
            }
        }
    }

    /// `∫_s^t c` for `s <= t`.
    pub fn integral_between(&self, s: f64, t: f64) -> f64 {
        match self {
            Consumption::Chi { chi1, chi2, t_end } => {
                let (a, b) = (*t_end - s, *t_end - t);
                chi_integral(*chi1, *chi2, a) - chi_integral(*chi1, *chi2, b)
            }
            Consumption::Table { .. } => self.integral_to_end(s) - self.integral_to_end(t),
        }
    }

    /// `factor * c` tabulated on `horizon`.
    pub fn scaled(&self, factor: f64, horizon: &Horizon) -> Result<Self> {
        let values = self.on_grid(horizon).into_iter().map(|v| v * factor).collect();
        Self::table(horizon.t_end(), values)
    }
}

/// `c` at time-to-go `tau` for the `(chi1, chi2)` family.
pub(crate) fn chi_curve(chi1: f64, chi2: f64, tau: f64) -> f64 {
    if chi2.abs() < CHI2_BRANCH_EPS {
        return 1.0 / (tau + 1.0 / chi1);
    }
    let x = chi2 * tau;
    chi1 * x.exp() / (1.0 + chi1 * x.exp_m1() / chi2)
}

/// `∫ c` over the last `tau` units of time for the `(chi1, chi2)` family.
pub(crate) fn chi_integral(chi1: f64, chi2: f64, tau: f64) -> f64 {
    if chi2.abs() < CHI2_BRANCH_EPS {
        return (chi1 * tau).ln_1p();
    }
    (chi1 * (chi2 * tau).exp_m1() / chi2).ln_1p()
}

/// Deterministic consumption curve plus constant portfolio weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimpleStrategy {
    pub consumption: Consumption,
    pub pi: f64,
}

impl SimpleStrategy {
    pub fn new(consumption: Consumption, pi: f64) -> Result<Self> {
        let s = SimpleStrategy { consumption, pi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.pi.is_finite() {
            return Err(Error::NonFinite { name: "pi", value: self.pi });
        }
        self.consumption.validate()
    }

    pub fn with_pi(&self, pi: f64) -> Self {
        SimpleStrategy { consumption: self.consumption.clone(), pi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn terminal_value_is_chi1() {
        for chi2 in [-3.0, -1e-3, 0.0, 1e-12, 0.4, 7.0] {
            let c = Consumption::chi(0.7, chi2, 2.0).unwrap();
            assert_eq!(c.eval(2.0), 0.7);
        }
    }

    #[test]
    fn zero_branch_matches_hand_curve() {
        let c = Consumption::chi(1.0, 0.0, 1.0).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert!((c.eval(t) - 1.0 / (2.0 - t)).abs() < 1e-15);
            assert!((c.integral_to_end(t) - (2.0 - t).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_when_chi2_equals_chi1() {
        let c = Consumption::chi(0.8, 0.8, 1.5).unwrap();
        for t in [0.0, 0.5, 1.0, 1.5] {
            assert!((c.eval(t) - 0.8).abs() < 1e-14);
        }
    }

    #[test]
    fn branch_is_continuous() {
        let c0 = Consumption::chi(1.3, 0.0, 1.0).unwrap();
        let c1 = Consumption::chi(1.3, 1e-8, 1.0).unwrap();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!((c0.eval(t) - c1.eval(t)).abs() <= 1e-6);
        }
    }

    #[test]
    fn table_interpolates_linearly() {
        let c = Consumption::table(1.0, vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(c.eval(0.25), 1.5);
        assert_eq!(c.eval(0.5), 2.0);
        assert_eq!(c.eval(1.0), 4.0);
        assert!((c.integral_to_end(0.0) - (0.75 + 1.5)).abs() < 1e-15);
        assert!((c.integral_to_end(0.25) - (0.5 * 0.25 * 3.5 + 1.5)).abs() < 1e-15);
    }

    #[test]
    fn table_rejects_nonpositive() {
        assert!(Consumption::table(1.0, vec![1.0, 0.0]).is_err());
        assert!(Consumption::table(1.0, vec![1.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = SimpleStrategy::new(Consumption::chi(0.5, -0.2, 1.0).unwrap(), 0.6).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: SimpleStrategy = serde_json::from_str(&j).unwrap();
        assert_eq!(s, back);
    }

    proptest! {
        #[test]
        fn chi_integral_matches_quadrature(chi1 in 0.05f64..5.0, chi2 in -5.0f64..5.0, t_end in 0.1f64..2.0) {
            let c = Consumption::chi(chi1, chi2, t_end).unwrap();
            let n = 2000;
            let h = t_end / n as f64;
            let mut simpson = 0.0;
            for k in 0..n / 2 {
                let a = 2 * k;
                simpson += h / 3.0 * (c.eval(a as f64 * h) + 4.0 * c.eval((a + 1) as f64 * h) + c.eval((a + 2) as f64 * h));
            }
            let exact = c.integral_to_end(0.0);
            prop_assert!((simpson - exact).abs() <= 1e-8 * (1.0 + exact.abs()));
        }

        #[test]
        fn chi_curve_is_positive(chi1 in 1e-3f64..50.0, chi2 in -50.0f64..50.0, t in 0.0f64..2.0) {
            let c = Consumption::chi(chi1, chi2, 2.0).unwrap();
            let v = c.eval(t);
            prop_assert!(v > 0.0 && v.is_finite());
        }
    }
}
