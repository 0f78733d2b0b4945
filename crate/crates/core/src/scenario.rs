//! JSON scenario: the interchange format of the command line and of replayable
//! check failures. The shape is described by `schema/scenario.schema.json`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::metric::{DecisionRegion, FiniteMetricSpace, SpaceSpec};
use crate::num::{Num, Rational};
use crate::risk::{GameInstance, LossProblem};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// The scenario JSON schema, shipped with the crate.
pub const SCHEMA: &str = include_str!("../schema/scenario.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Masses must sum to one exactly.
    #[default]
    Exact,
    /// Masses may miss one by `tolerance`; they are then renormalized.
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub classes: Vec<String>,
    pub priors: Vec<Num>,
    /// One mass vector per class.
    pub conditionals: Vec<Vec<Num>>,
    pub hypotheses: Vec<String>,
    /// `loss[hypothesis][class][point]`.
    pub loss: Vec<Vec<Vec<Num>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub space: SpaceSpec,
    pub p0: Vec<Num>,
    pub p1: Vec<Num>,
    #[serde(rename = "T")]
    pub t: Num,
    pub epsilon: Num,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_problem: Option<LossSpec>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Names the offending field.
fn field(name: &str, e: Error) -> Error {
    Error::Scenario(format!("{name}: {e}"))
}

fn rationals(values: &[Num]) -> Vec<Rational> {
    values.iter().map(|v| v.0.clone()).collect()
}

fn nums(values: &[Rational]) -> Vec<Num> {
    values.iter().cloned().map(Num).collect()
}

impl Scenario {
    /// Parses and checks the version; the remaining checks run when the
    /// scenario is turned into an instance.
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        if scenario.schema_version != SCHEMA_VERSION {
            return Err(Error::Scenario(format!(
                "schema_version must be {SCHEMA_VERSION}, got {}",
                scenario.schema_version
            )));
        }
        if let Some(tol) = scenario.tolerance {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(Error::Scenario(format!("tolerance must be a nonnegative number, got {tol}")));
            }
        }
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Replayable scenario for an instance built from `space`.
    pub fn from_instance(space: SpaceSpec, inst: &GameInstance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            space,
            p0: nums(inst.p0().mass()),
            p1: nums(inst.p1().mass()),
            t: Num(inst.t().clone()),
            epsilon: Num(inst.epsilon().clone()),
            region: None,
            loss_problem: None,
            mode: Mode::Exact,
            tolerance: None,
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(DEFAULT_TOLERANCE)
    }

    pub fn build_space(&self) -> Result<Arc<FiniteMetricSpace>> {
        FiniteMetricSpace::build(&self.space).map_err(|e| field("space", e))
    }

    fn measure(&self, space: &Arc<FiniteMetricSpace>, values: &[Num], what: &'static str) -> Result<DiscreteMeasure> {
        self.measure_inner(space, values, what).map_err(|e| field(what, e))
    }

    fn measure_inner(&self, space: &Arc<FiniteMetricSpace>, values: &[Num], what: &'static str) -> Result<DiscreteMeasure> {
        let mu = DiscreteMeasure::new(space, rationals(values))?;
        match self.mode {
            Mode::Exact => {
                mu.require_probability(what)?;
                Ok(mu)
            }
            Mode::Float => {
                if !mu.is_probability_within(self.tolerance()) {
                    mu.require_probability(what)?;
                }
                mu.normalize()
            }
        }
    }

    pub fn instance(&self) -> Result<GameInstance> {
        let space = self.build_space()?;
        self.instance_on(&space)
    }

    pub fn instance_on(&self, space: &Arc<FiniteMetricSpace>) -> Result<GameInstance> {
        let p0 = self.measure(space, &self.p0, "p0")?;
        let p1 = self.measure(space, &self.p1, "p1")?;
        let inst = GameInstance::new(p0, p1, self.t.0.clone(), self.epsilon.0.clone());
        inst.map_err(|e| match e {
            Error::InvalidParameter { what, .. } => field(what, e),
            other => other,
        })
    }

    pub fn region_on(&self, space: &Arc<FiniteMetricSpace>) -> Result<Option<DecisionRegion>> {
        self.region
            .as_ref()
            .map(|r| DecisionRegion::new(space, r.iter().copied()).map_err(|e| field("region", e)))
            .transpose()
    }

    pub fn loss_problem_on(&self, space: &Arc<FiniteMetricSpace>) -> Result<Option<LossProblem>> {
        let Some(spec) = &self.loss_problem else {
            return Ok(None);
        };
        let conditionals = spec
            .conditionals
            .iter()
            .map(|c| self.measure(space, c, "class conditional"))
            .collect::<Result<Vec<_>>>()?;
        let priors = rationals(&spec.priors);
        let loss = spec.loss.iter().map(|table| table.iter().map(|col| rationals(col)).collect()).collect();
        LossProblem::new(space, spec.classes.clone(), priors, conditionals, spec.hypotheses.clone(), loss)
            .map(Some)
            .map_err(|e| field("loss_problem", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    const GRID: &str = r#"{
        "schema_version": 1,
        "space": {"kind": "grid-1d", "n": 3},
        "p0": ["1", 0, 0],
        "p1": [0, 0, "1"],
        "T": 1,
        "epsilon": "1",
        "region": [2]
    }"#;

    #[test]
    fn parses_and_builds() {
        let s = Scenario::from_json(GRID).unwrap();
        let g = s.instance().unwrap();
        assert_eq!(g.space().n(), 3);
        assert_eq!(g.p1().at(2), &int(1));
        let region = s.region_on(g.space()).unwrap().unwrap();
        assert_eq!(region.indices(), vec![2]);
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_version_and_fields() {
        let bad = GRID.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Scenario(_))));
        let extra = GRID.replace("\"T\": 1", "\"T\": 1, \"bogus\": 3");
        assert!(matches!(Scenario::from_json(&extra), Err(Error::Scenario(_))));
        let negative = GRID.replace("\"p0\": [\"1\", 0, 0]", "\"p0\": [\"2\", \"-1\", 0]");
        let err = Scenario::from_json(&negative).unwrap().instance().unwrap_err();
        assert!(err.to_string().contains("p0: negative mass"), "{err}");
    }

    #[test]
    fn float_mode_normalizes_within_tolerance() {
        let text = GRID
            .replace("\"p0\": [\"1\", 0, 0]", "\"p0\": [0.3333333333, 0.3333333333, 0.3333333333]")
            .replace("\"region\": [2]", "\"mode\": \"float\", \"tolerance\": 1e-6");
        let g = Scenario::from_json(&text).unwrap().instance().unwrap();
        assert_eq!(g.p0().at(0), &ratio(1, 3));
        let strict = text.replace("\"float\"", "\"exact\"");
        assert!(matches!(Scenario::from_json(&strict).unwrap().instance(), Err(Error::Scenario(_))));
    }

    #[test]
    fn replay_round_trip() {
        let s = Scenario::from_json(GRID).unwrap();
        let g = s.instance().unwrap();
        let replay = Scenario::from_instance(s.space.clone(), &g);
        assert_eq!(replay.instance().unwrap(), g);
    }

    #[test]
    fn schema_is_json() {
        let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(schema["properties"]["schema_version"]["const"], 1);
    }
}
