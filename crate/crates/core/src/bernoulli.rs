//! The scalar Bernoulli ODE `h' + φ(t) h + ψ(t) h^(1-a) = 0`, `h(T) = 1`.
//!
//! With `R(t) = ∫_t^T φ` and `J(t) = ∫_t^T ψ(s) e^{-a R(s)} ds` the solution is
//! `h(t) = e^{R(t)} (1 + a J(t))^{1/a}`, which is the usual
//! `(e^{a∫φ} + a∫ψ e^{a∫φ})^{1/a}` closed form with the nested integral
//! factored. It stays valid at `a = 1`, where the ODE is linear.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Horizon;
use crate::quadrature::cumulative_to_end;

/// Exponent and coefficient curves sampled on the nodes of `horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliProblem {
    pub a: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub horizon: Horizon,
}

impl BernoulliProblem {
    pub fn new(a: f64, phi: Vec<f64>, psi: Vec<f64>, horizon: Horizon) -> Result<Self> {
        let p = BernoulliProblem { a, phi, psi, horizon };
        p.validate()?;
        Ok(p)
    }

    /// Constant coefficients.
    pub fn constant(a: f64, phi: f64, psi: f64, horizon: Horizon) -> Result<Self> {
        let n = horizon.nodes();
        Self::new(a, vec![phi; n], vec![psi; n], horizon)
    }

    fn validate(&self) -> Result<()> {
        if self.a == 0.0 {
            return Err(Error::ZeroExponent);
        }
        if !self.a.is_finite() {
            return Err(Error::NonFinite { name: "a", value: self.a });
        }
        let n = self.horizon.nodes();
        if self.phi.len() != n || self.psi.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "coefficient curves have {} and {} nodes, grid has {n}",
                self.phi.len(),
                self.psi.len()
            )));
        }
        for &v in &self.phi {
            if !v.is_finite() {
                return Err(Error::NonFinite { name: "phi", value: v });
            }
        }
        for &v in &self.psi {
            if !v.is_finite() {
                return Err(Error::NonFinite { name: "psi", value: v });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernoulliSolution {
    pub h: Vec<f64>,
    /// `log h`, computed directly rather than from `h`.
    pub log_h: Vec<f64>,
    pub residual_sup: f64,
}

/// Closed-form solution on the grid.
///
/// Fails with [`Error::NonpositiveBase`] if `1 + a J(t) <= 0` at some node.
pub fn solve_bernoulli(p: &BernoulliProblem) -> Result<BernoulliSolution> {
    p.validate()?;
    let dt = p.horizon.dt();
    let a = p.a;
    let r = cumulative_to_end(&p.phi, dt);
    let weighted: Vec<f64> = p.psi.iter().zip(&r).map(|(psi, r)| psi * (-a * r).exp()).collect();
    let j = cumulative_to_end(&weighted, dt);
    let mut log_h = Vec::with_capacity(r.len());
    for (k, (r, j)) in r.iter().zip(&j).enumerate() {
        let base = a * j;
        if base.is_nan() || base <= -1.0 {
            return Err(Error::NonpositiveBase { t: p.horizon.time(k), value: 1.0 + base });
        }
        log_h.push(r + base.ln_1p() / a);
    }
    let h: Vec<f64> = log_h.iter().map(|l| l.exp()).collect();
    let residual_sup = residual(p, &h);
    Ok(BernoulliSolution { h, log_h, residual_sup })
}

/// Sup over interior nodes of `|h' + φh + ψh^(1-a)|`, with `h'` from
/// fourth-order stencils (central inside, one-sided next to the ends) when
/// the grid has at least four intervals, central differences otherwise.
pub fn residual(p: &BernoulliProblem, h: &[f64]) -> f64 {
    let dt = p.horizon.dt();
    let exponent = 1.0 - p.a;
    let n = h.len() - 1;
    (1..n)
        .map(|k| {
            let dh = if n < 4 {
                (h[k + 1] - h[k - 1]) / (2.0 * dt)
            } else if k == 1 {
                (-3.0 * h[0] - 10.0 * h[1] + 18.0 * h[2] - 6.0 * h[3] + h[4]) / (12.0 * dt)
            } else if k == n - 1 {
                (3.0 * h[n] + 10.0 * h[n - 1] - 18.0 * h[n - 2] + 6.0 * h[n - 3] - h[n - 4]) / (12.0 * dt)
            } else {
                (h[k - 2] - 8.0 * h[k - 1] + 8.0 * h[k + 1] - h[k + 2]) / (12.0 * dt)
            };
            (dh + p.phi[k] * h[k] + p.psi[k] * h[k].powf(exponent)).abs()
        })
        .fold(0.0, f64::max)
}

/// Cubic interpolation of grid samples at the midpoint of `[k, k+1]`.
fn midpoint(f: &[f64], k: usize) -> f64 {
    let n = f.len() - 1;
    if n < 3 {
        return 0.5 * (f[k] + f[k + 1]);
    }
    if k == 0 {
        (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0
    } else if k == n - 1 {
        (f[n - 3] - 5.0 * f[n - 2] + 15.0 * f[n - 1] + 5.0 * f[n]) / 16.0
    } else {
        (-f[k - 1] + 9.0 * f[k] + 9.0 * f[k + 1] - f[k + 2]) / 16.0
    }
}

/// Backward classical Runge–Kutta from `h(T) = 1`; an independent oracle for
/// [`solve_bernoulli`]. Coefficients at half steps come from cubic interpolation.
pub fn solve_bernoulli_rk4(p: &BernoulliProblem) -> Result<BernoulliSolution> {
    p.validate()?;
    let n = p.horizon.grid_n();
    let dt = p.horizon.dt();
    let e = 1.0 - p.a;
    let rhs = |phi: f64, psi: f64, h: f64| -> Result<f64> {
        if h <= 0.0 || !h.is_finite() {
            return Err(Error::NonpositiveBase { t: f64::NAN, value: h });
        }
        Ok(-phi * h - psi * h.powf(e))
    };
    let mut h = vec![0.0; n + 1];
    h[n] = 1.0;
    for k in (0..n).rev() {
        let (phi1, psi1) = (p.phi[k + 1], p.psi[k + 1]);
        let (phim, psim) = (midpoint(&p.phi, k), midpoint(&p.psi, k));
        let (phi0, psi0) = (p.phi[k], p.psi[k]);
        let y = h[k + 1];
        let step = -dt;
        let tag = |r: Result<f64>| r.map_err(|_| Error::NonpositiveBase { t: p.horizon.time(k), value: y });
        let k1 = tag(rhs(phi1, psi1, y))?;
        let k2 = tag(rhs(phim, psim, y + 0.5 * step * k1))?;
        let k3 = tag(rhs(phim, psim, y + 0.5 * step * k2))?;
        let k4 = tag(rhs(phi0, psi0, y + step * k3))?;
        h[k] = y + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if h[k].is_nan() || h[k] <= 0.0 {
            return Err(Error::NonpositiveBase { t: p.horizon.time(k), value: h[k] });
        }
    }
    let log_h = h.iter().map(|v| v.ln()).collect();
    let residual_sup = residual(p, &h);
    Ok(BernoulliSolution { h, log_h, residual_sup })
}
