//! Subcommand bodies. Each returns the JSON report.

use advrisk::game;
use advrisk::measure;
use advrisk::metric::{self, DecisionRegion};
use advrisk::num::{format_rational, to_f64};
use advrisk::optimal;
use advrisk::risk::{self, RiskMode};
use advrisk::scenario::{Mode, Scenario};
use advrisk::transport::Coupling;
use advrisk::verify::{self, CheckName};
use advrisk::{DiscreteMeasure, Error, Rational, Result};
use serde_json::{json, Value};

/// Number rendering: rational strings in exact mode, floats in float mode.
struct Out {
    mode: Mode,
}

impl Out {
    fn new(scenario: &Scenario) -> Self {
        Self { mode: scenario.mode }
    }

    fn num(&self, r: &Rational) -> Value {
        match self.mode {
            Mode::Exact => Value::String(format_rational(r)),
            Mode::Float => json!(to_f64(r)),
        }
    }

    fn opt(&self, r: Option<&Rational>) -> Value {
        r.map_or(Value::Null, |r| self.num(r))
    }

    fn measure(&self, mu: &DiscreteMeasure) -> Value {
        Value::Array(mu.mass().iter().map(|m| self.num(m)).collect())
    }

    fn coupling(&self, c: &Coupling) -> Value {
        Value::Array(c.sparse().iter().map(|(i, j, m)| json!([i, j, self.num(m)])).collect())
    }

    fn header(&self, command: &str, scenario: &Scenario, complete: bool) -> serde_json::Map<String, Value> {
        let mut map = serde_json::Map::new();
        map.insert("command".into(), json!(command));
        map.insert("mode".into(), json!(if self.mode == Mode::Exact { "exact" } else { "float" }));
        map.insert("T".into(), self.num(&scenario.t.0));
        map.insert("epsilon".into(), self.num(&scenario.epsilon.0));
        map.insert("midpoint_complete".into(), json!(complete));
        map
    }
}

fn region(r: &DecisionRegion) -> Value {
    json!(r.indices())
}

fn complete(inst: &risk::GameInstance) -> bool {
    metric::is_midpoint_complete(inst.space(), inst.epsilon()).complete
}

fn finish(mut head: serde_json::Map<String, Value>, body: Value) -> Value {
    if let Value::Object(body) = body {
        head.extend(body);
    }
    Value::Object(head)
}

pub fn risk(scenario: &Scenario) -> Result<Value> {
    let out = Out::new(scenario);
    let inst = scenario.instance()?;
    let space = inst.space();
    let problem = scenario.loss_problem_on(space)?;
    let chosen = scenario.region_on(space)?;
    if chosen.is_none() && problem.is_none() {
        return Err(Error::Scenario("region: required by `risk` unless loss_problem is given".into()));
    }
    let mut body = serde_json::Map::new();
    if let Some(a) = &chosen {
        let (maps_value, maps) = risk::risk_transport_maps(&inst, a)?;
        let (ball_value, (w0, w1)) = risk::risk_winf_ball(&inst, a)?;
        body.insert("region".into(), region(a));
        body.insert(
            "risks".into(),
            json!({
                "standard": out.num(&risk::risk_standard(&inst, a)?),
                "expansion": out.num(&risk::risk_expansion(&inst, a)?),
                "closed_expansion": out.num(&risk::risk_closed_expansion(&inst, a)?),
                "transport_maps": out.num(&maps_value),
                "winf_ball": out.num(&ball_value),
            }),
        );
        body.insert("expansions".into(), json!({
            "region": region(&metric::expand(a, inst.epsilon())),
            "complement": region(&metric::expand(&a.complement(), inst.epsilon())),
        }));
        body.insert("transport_maps".into(), json!({ "class0": maps.class0, "class1": maps.class1 }));
        body.insert("worst_pair".into(), json!({ "p0": out.measure(&w0), "p1": out.measure(&w1) }));
    }
    if let Some(problem) = &problem {
        let rows = problem
            .hypotheses()
            .iter()
            .map(|w| {
                let mut row = serde_json::Map::new();
                row.insert("hypothesis".into(), json!(w));
                for mode in RiskMode::ALL {
                    row.insert(mode.name().into(), out.num(&risk::risk_general(problem, w, inst.epsilon(), mode)?));
                }
                Ok(Value::Object(row))
            })
            .collect::<Result<Vec<_>>>()?;
        body.insert("loss_problem".into(), Value::Array(rows));
    }
    Ok(finish(out.header("risk", scenario, complete(&inst)), Value::Object(body)))
}

pub fn optimal_risk(scenario: &Scenario) -> Result<Value> {
    let out = Out::new(scenario);
    let inst = scenario.instance()?;
    let r = optimal::optimal_risk(&inst)?;
    let body = json!({
        "value": out.num(&r.value),
        "witness": region(&r.witness),
        "dual_set": region(&r.dual_set),
        "mode_used": r.mode_used.name(),
        "agreement": r.agreement,
        "value_formula": out.num(&r.value_formula),
        "value_bruteforce": out.opt(r.value_bruteforce.as_ref()),
        "swapped": r.swapped,
        "witness_certified": r.witness_certified,
        "coupling": out.coupling(&r.coupling),
    });
    Ok(finish(out.header("optimal-risk", scenario, r.midpoint_complete), body))
}

pub fn game(scenario: &Scenario) -> Result<Value> {
    let out = Out::new(scenario);
    let inst = scenario.instance()?;
    let sup = game::supinf_value(&inst)?;
    let inf = game::infsup_value(&inst)?;
    let (bayes_region, bayes_value) = game::classifier_best_response(&sup.p0_star, &sup.p1_star, inst.t())?;
    let (a0, a1, adv_value) = game::adversary_best_response(&inst, &inf.witness)?;
    let mut body = json!({
        "supinf": {
            "value": out.num(&sup.value),
            "p0_star": out.measure(&sup.p0_star),
            "p1_star": out.measure(&sup.p1_star),
            "bayes_value": out.num(&sup.bayes_value),
            "flow_matches_bayes": sup.flow_matches_bayes,
        },
        "infsup": { "value": out.num(&inf.value), "A_star": region(&inf.witness) },
        "classifier_best_response": { "region": region(&bayes_region), "value": out.num(&bayes_value) },
        "adversary_best_response": { "p0": out.measure(&a0), "p1": out.measure(&a1), "value": out.num(&adv_value) },
    });
    if let Some(a) = scenario.region_on(inst.space())? {
        let (r0, r1, value) = game::adversary_best_response(&inst, &a)?;
        body["region"] = json!({
            "region": region(&a),
            "payoff": out.num(&game::payoff(&a, inst.p0(), inst.p1(), inst.t())?),
            "adversary_best_response": { "p0": out.measure(&r0), "p1": out.measure(&r1), "value": out.num(&value) },
        });
    }
    Ok(finish(out.header("game", scenario, inf.midpoint_complete), body))
}

pub fn nash(scenario: &Scenario) -> Result<Value> {
    let out = Out::new(scenario);
    let inst = scenario.instance()?;
    let c = game::nash_construct(&inst)?;
    let mut body = json!({
        "value": out.num(&c.value_infsup),
        "p0_star": out.measure(&c.p0_star),
        "p1_star": out.measure(&c.p1_star),
        "A_star": region(&c.a_star),
        "value_supinf": out.num(&c.value_supinf),
        "value_infsup": out.num(&c.value_infsup),
        "adversary_value": out.num(&c.adversary_value),
        "payoff_value": out.num(&c.payoff_value),
        "classifier_value": out.num(&c.classifier_value),
        "delta": out.num(&c.delta_achieved),
    });
    if inst.t() == &Rational::from_integer(1.into()) && c.midpoint_complete {
        let (m0, m1) = game::nash_midpoint_construct(&inst)?;
        body["midpoint_pair"] = json!({
            "p0": out.measure(&m0),
            "p1": out.measure(&m1),
            "total_variation": out.num(&measure::total_variation(&m0, &m1)?),
        });
    }
    Ok(finish(out.header("nash", scenario, c.midpoint_complete), body))
}

pub fn probe(scenario: &Scenario) -> Result<Value> {
    let out = Out::new(scenario);
    let inst = scenario.instance()?;
    let gap = verify::probe_midpoint_gap(inst.p0(), inst.p1(), inst.epsilon())?;
    let body = json!({
        "gap": gap.map(|g| json!({
            "minkowski_form": out.num(&g.minkowski_form),
            "strassen_lhs": out.num(&g.strassen_lhs),
            "minkowski_argmax": region(&g.minkowski_argmax),
            "strassen_argmax": region(&g.strassen_argmax),
        })),
    });
    Ok(finish(out.header("probe", scenario, complete(&inst)), body))
}

/// Report and whether every check passed or skipped.
pub fn verify(suite: &str, seed: u64, count: u64, jobs: usize) -> Result<(Value, bool)> {
    let checks = if suite == "all" { CheckName::ALL.to_vec() } else { vec![CheckName::parse(suite)?] };
    let reports = verify::run_suite(&checks, seed, count, jobs)?;
    let ok = reports.iter().all(|r| r.ok());
    let value = json!({
        "command": "verify",
        "seed": seed,
        "count": count,
        "status": if ok { "pass" } else { "fail" },
        "checks": reports,
    });
    Ok((value, ok))
}
