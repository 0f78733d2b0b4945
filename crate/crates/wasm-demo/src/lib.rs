//! Browser demo on a 2-D grid. Every entry point takes and returns JSON text;
//! the `*_json` functions hold the logic and run natively as well.

use std::sync::Arc;

use advrisk::game;
use advrisk::metric::{self, GridNorm};
use advrisk::num::{format_rational, to_f64, Num};
use advrisk::optimal;
use advrisk::risk;
use advrisk::{DecisionRegion, DiscreteMeasure, FiniteMetricSpace, GameInstance, Rational, SpaceSpec};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest board the page offers.
pub const MAX_CELLS: usize = 144;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Board {
    pub width: usize,
    pub height: usize,
    pub norm: GridNorm,
    pub epsilon: Num,
}

impl Board {
    fn space(&self) -> Result<Arc<FiniteMetricSpace>, String> {
        let cells = self.width * self.height;
        if cells == 0 || cells > MAX_CELLS {
            return Err(format!("board must have between 1 and {MAX_CELLS} cells, got {cells}"));
        }
        let spec = SpaceSpec::Grid2d { width: self.width, height: self.height, norm: self.norm };
        FiniteMetricSpace::build(&spec).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionRequest {
    pub board: Board,
    pub region: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct ExpansionView {
    pub expanded: Vec<usize>,
    pub contracted: Vec<usize>,
    pub midpoint_complete: bool,
    /// A pair at distance at most 2ε with no common ε-neighbour.
    pub midpoint_witness: Option<(usize, usize)>,
}

/// Per-cell class weights; each class is normalized to a probability.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameRequest {
    pub board: Board,
    pub weights0: Vec<Num>,
    pub weights1: Vec<Num>,
    #[serde(rename = "T")]
    pub t: Num,
    #[serde(default)]
    pub region: Option<Vec<usize>>,
}

/// A value both as an exact fraction and as a float for display.
#[derive(Debug, Serialize, PartialEq)]
pub struct Value {
    pub exact: String,
    pub approx: f64,
}

impl From<&Rational> for Value {
    fn from(r: &Rational) -> Self {
        Value { exact: format_rational(r), approx: to_f64(r) }
    }
}

#[derive(Debug, Serialize)]
pub struct RegionRisk {
    pub standard: Value,
    pub adversarial: Value,
}

#[derive(Debug, Serialize)]
pub struct OptimalView {
    pub value: Value,
    pub witness: Vec<usize>,
    pub witness_risk: Value,
    pub witness_certified: bool,
    pub midpoint_complete: bool,
    pub mode_used: &'static str,
    /// Optimal risk without an adversary.
    pub bayes: Value,
    pub region: Option<RegionRisk>,
}

#[derive(Debug, Serialize)]
pub struct NashView {
    pub value_supinf: Value,
    pub value_infsup: Value,
    pub delta: Value,
    pub a_star: Vec<usize>,
    pub p0_star: Vec<f64>,
    pub p1_star: Vec<f64>,
    pub midpoint_complete: bool,
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("bad request: {e}"))
}

fn emit<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn normalized(space: &Arc<FiniteMetricSpace>, weights: &[Num], class: u8) -> Result<DiscreteMeasure, String> {
    let mu = DiscreteMeasure::new(space, weights.iter().map(|w| w.0.clone()).collect())
        .map_err(|e| format!("class {class} weights: {e}"))?;
    mu.normalize().map_err(|_| format!("class {class} has no mass; paint at least one cell"))
}

fn instance(req: &GameRequest) -> Result<GameInstance, String> {
    let space = req.board.space()?;
    let p0 = normalized(&space, &req.weights0, 0)?;
    let p1 = normalized(&space, &req.weights1, 1)?;
    GameInstance::new(p0, p1, req.t.0.clone(), req.board.epsilon.0.clone()).map_err(|e| e.to_string())
}

pub fn expansion_view_json(request: &str) -> Result<String, String> {
    let req: ExpansionRequest = parse(request)?;
    let space = req.board.space()?;
    let eps = &req.board.epsilon.0;
    let region = DecisionRegion::new(&space, req.region.iter().copied()).map_err(|e| e.to_string())?;
    let report = metric::is_midpoint_complete(&space, eps);
    emit(&ExpansionView {
        expanded: metric::expand(&region, eps).indices(),
        contracted: metric::contract(&region, eps).indices(),
        midpoint_complete: report.complete,
        midpoint_witness: report.witness,
    })
}

pub fn optimal_region_json(request: &str) -> Result<String, String> {
    let req: GameRequest = parse(request)?;
    let inst = instance(&req)?;
    let report = optimal::optimal_risk(&inst).map_err(|e| e.to_string())?;
    let witness_risk = risk::risk_expansion(&inst, &report.witness).map_err(|e| e.to_string())?;
    let bayes = game::bayes_risk(inst.p0(), inst.p1(), inst.t()).map_err(|e| e.to_string())?;
    let region = match &req.region {
        Some(cells) => {
            let a = DecisionRegion::new(inst.space(), cells.iter().copied()).map_err(|e| e.to_string())?;
            Some(RegionRisk {
                standard: (&risk::risk_standard(&inst, &a).map_err(|e| e.to_string())?).into(),
                adversarial: (&risk::risk_expansion(&inst, &a).map_err(|e| e.to_string())?).into(),
            })
        }
        None => None,
    };
    emit(&OptimalView {
        value: (&report.value).into(),
        witness: report.witness.indices(),
        witness_risk: (&witness_risk).into(),
        witness_certified: report.witness_certified,
        midpoint_complete: report.midpoint_complete,
        mode_used: report.mode_used.name(),
        bayes: (&bayes).into(),
        region,
    })
}

pub fn nash_json(request: &str) -> Result<String, String> {
    let req: GameRequest = parse(request)?;
    let inst = instance(&req)?;
    let c = game::nash_construct(&inst).map_err(|e| e.to_string())?;
    let floats = |mu: &DiscreteMeasure| mu.mass().iter().map(to_f64).collect();
    emit(&NashView {
        value_supinf: (&c.value_supinf).into(),
        value_infsup: (&c.value_infsup).into(),
        delta: (&c.delta_achieved).into(),
        a_star: c.a_star.indices(),
        p0_star: floats(&c.p0_star),
        p1_star: floats(&c.p1_star),
        midpoint_complete: c.midpoint_complete,
    })
}

fn js(result: Result<String, String>) -> Result<String, JsValue> {
    result.map_err(|e| JsValue::from_str(&e))
}

/// ε-expansion and contraction of the painted region.
#[wasm_bindgen]
pub fn expansion_view(request: &str) -> Result<String, JsValue> {
    js(expansion_view_json(request))
}

/// Optimal adversarial risk, its witness region and the Bayes baseline.
#[wasm_bindgen]
pub fn optimal_region(request: &str) -> Result<String, JsValue> {
    js(optimal_region_json(request))
}

/// Equilibrium pair of perturbed distributions and the classifier answering it.
#[wasm_bindgen]
pub fn nash(request: &str) -> Result<String, JsValue> {
    js(nash_json(request))
}
