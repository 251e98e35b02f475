use serde::{Deserialize, Serialize};

use super::{AgentType, Horizon, TypeDistribution};
use crate::error::{Error, Result};

/// `{"T": .., "grid_n": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSpec {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub grid_n: usize,
}

/// One weighted atom of the mean-field type law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub weight: f64,
    #[serde(rename = "type")]
    pub agent: AgentType,
}

/// The JSON game document: a horizon plus N-player agents and/or
/// mean-field atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub horizon: HorizonSpec,
    #[serde(default)]
    pub agents: Vec<AgentType>,
    #[serde(default)]
    pub mfg_atoms: Vec<AtomSpec>,
}

impl GameConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn horizon(&self) -> Result<Horizon> {
        Horizon::new(self.horizon.t_end, self.horizon.grid_n)
    }

    pub fn distribution(&self) -> Result<TypeDistribution> {
        TypeDistribution::new(self.mfg_atoms.iter().map(|a| (a.weight, a.agent)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "horizon": {"T": 1.0, "grid_n": 100},
        "agents": [{"x0": 1, "mu": 0.05, "nu": 0, "sigma": 0.2, "eta": 0.1,
                    "gamma": 2, "delta": 1.5, "epsilon": 1, "theta": 0.5}],
        "mfg_atoms": [{"weight": 1.0, "type": {"x0": 1, "mu": 0.05, "nu": 0, "sigma": 0.2,
                    "eta": 0.1, "gamma": 2, "delta": 1.5, "epsilon": 1, "theta": 0.5}}]
    }"#;

    #[test]
    fn parses_document() {
        let c = GameConfig::from_json(DOC).unwrap();
        assert_eq!(c.agents.len(), 1);
        assert_eq!(c.horizon().unwrap().grid_n(), 100);
        assert_eq!(c.distribution().unwrap().len(), 1);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = DOC.replace("\"grid_n\": 100", "\"grid_n\": 100, \"dt\": 0.1");
        assert!(GameConfig::from_json(&bad).is_err());
        let bad = DOC.replacen("\"theta\": 0.5}]", "\"theta\": 0.5, \"rho\": 1}]", 1);
        assert!(GameConfig::from_json(&bad).is_err());
    }

    #[test]
    fn sections_are_optional() {
        let c = GameConfig::from_json(r#"{"horizon": {"T": 2.0, "grid_n": 10}}"#).unwrap();
        assert!(c.agents.is_empty());
        assert!(c.distribution().is_err());
    }
}
