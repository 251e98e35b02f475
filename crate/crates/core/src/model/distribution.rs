use serde::Serialize;

use super::{Agent, AgentType};
use crate::error::{Error, Result};

/// Weights must sum to one within this tolerance.
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Finite mixture of agent types; the mean-field type law.
///
/// Every expectation is the exact weighted sum over atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeDistribution {
    atoms: Vec<(f64, Agent)>,
}

impl TypeDistribution {
    pub fn new(atoms: Vec<(f64, AgentType)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("type distribution needs at least one atom".into()));
        }
        let mut validated = Vec::with_capacity(atoms.len());
        let mut total = 0.0;
        for (w, t) in atoms {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonPositive { name: "weight", value: w });
            }
            total += w;
            validated.push((w, Agent::new(t)?));
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("atom weights sum to {total}, not 1")));
        }
        Ok(Self { atoms: validated })
    }

    /// Degenerate law concentrated on one type.
    pub fn single(t: AgentType) -> Result<Self> {
        Self::new(vec![(1.0, t)])
    }

    pub fn atoms(&self) -> &[(f64, Agent)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `E[f(type)]`.
    pub fn expect(&self, f: impl Fn(&Agent) -> f64) -> f64 {
        self.atoms.iter().map(|(w, a)| w * f(a)).sum()
    }

    /// `E[f(atom index, type)]`, for quantities already computed per atom.
    pub fn expect_indexed(&self, f: impl Fn(usize, &Agent) -> f64) -> f64 {
        self.atoms.iter().enumerate().map(|(i, (w, a))| w * f(i, a)).sum()
    }

    /// `exp E[log f]` computed as a weighted product, so a single atom
    /// returns `f` itself.
    pub fn geometric_mean(&self, f: impl Fn(usize, &Agent) -> f64) -> f64 {
        self.atoms.iter().enumerate().map(|(i, (w, a))| f(i, a).powf(*w)).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(gamma: f64) -> AgentType {
        AgentType {
            x0: 1.0,
            mu: 0.05,
            nu: 0.0,
            sigma: 0.2,
            eta: 0.1,
            gamma,
            delta: 1.5,
            epsilon: 1.0,
            theta: 0.5,
        }
    }

    #[test]
    fn expectation_is_weighted_sum() {
        let d = TypeDistribution::new(vec![(0.25, t(2.0)), (0.75, t(3.0))]).unwrap();
        assert_eq!(d.expect(|a| a.gamma), 0.25 * 2.0 + 0.75 * 3.0);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(TypeDistribution::new(vec![(0.5, t(2.0)), (0.6, t(3.0))]).is_err());
        assert!(TypeDistribution::new(vec![(0.0, t(2.0)), (1.0, t(3.0))]).is_err());
        assert!(TypeDistribution::new(vec![]).is_err());
    }

    #[test]
    fn every_atom_is_validated() {
        assert!(TypeDistribution::new(vec![(0.5, t(2.0)), (0.5, t(1.0))]).is_err());
    }

    #[test]
    fn single_atom_geometric_mean_is_identity() {
        let d = TypeDistribution::single(t(2.0)).unwrap();
        let x = 0.123_456_789;
        assert_eq!(d.geometric_mean(|_, _| x), x);
    }
}
