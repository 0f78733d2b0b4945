//! Acceptance criteria 1 to 10. Every criterion prints one PASS/FAIL line to
//! stderr (unbuffered, so it shows without `--nocapture`); the test fails if
//! any criterion does.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use advrisk::game;
use advrisk::measure::{self, total_variation};
use advrisk::metric::{self, DecisionRegion, FiniteMetricSpace};
use advrisk::num::{format_rational, int, ratio};
use advrisk::optimal;
use advrisk::risk::{self, GameInstance, RiskMode};
use advrisk::transport;
use advrisk::verify::{self, CheckName, EpsilonRule, GeneratedInstance, InstanceGenerator, Outcome};
use advrisk::{DiscreteMeasure, Rational};
use rand::Rng;

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn complete(inst: &GameInstance) -> bool {
    metric::is_midpoint_complete(inst.space(), inst.epsilon()).complete
}

fn items(generator: &InstanceGenerator, count: u64) -> Result<Vec<GeneratedInstance>, String> {
    generator.instances(count).map(ok).collect()
}

/// First `count` midpoint-complete instances of `generator`.
fn complete_items(generator: &InstanceGenerator, count: usize) -> Result<Vec<GeneratedInstance>, String> {
    let mut found = Vec::new();
    let mut index = 0;
    while found.len() < count {
        let item = ok(generator.instance(index))?;
        if complete(&item.instance) {
            found.push(item);
        }
        index += 1;
        ensure!(index < 20 * count as u64, "too few midpoint-complete instances");
    }
    Ok(found)
}

/// Expansion straight from the distance relation.
fn naive_expand(space: &FiniteMetricSpace, bits: u64, eps: &Rational) -> u64 {
    (0..space.n())
        .filter(|&x| (0..space.n()).any(|y| bits >> y & 1 == 1 && space.within(x, y, eps)))
        .fold(0, |acc, x| acc | 1 << x)
}

fn mass_of(mu: &DiscreteMeasure, bits: u64) -> Rational {
    (0..mu.space().n()).filter(|i| bits >> i & 1 == 1).map(|i| mu.at(i).clone()).sum()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let generator = InstanceGenerator::new(101).with_epsilon_rule(EpsilonRule::Arbitrary);
    let (mut grids, mut graphs) = (0, 0);
    for item in items(&generator, 200)? {
        let inst = &item.instance;
        let shrink = [int(1), ratio(2, 3), ratio(1, 2)][item.index as usize % 3].clone();
        let grow = [int(1), ratio(3, 2)][item.index as usize % 2].clone();
        let (mu, nu) = (inst.p1().scale(&shrink), inst.p0().scale(&grow));
        let eps = inst.epsilon();
        let flow = ok(transport::unbalanced_cost(&mu, &nu, eps))?;
        let (brute, _) = ok(transport::strassen_lhs_bruteforce(&mu, &nu, eps))?;
        ensure!(flow.value == brute, "instance {}: flow {} vs enumeration {}", item.index, flow.value, brute);
        ensure!(flow.coupling.row_sums() == mu.mass(), "instance {}: row marginal", item.index);
        ensure!(ok(measure::dominates(&flow.coupling.column_marginal(), &nu))?, "instance {}: column marginal", item.index);
        let rhs = ok(transport::unbalanced_rhs(&mu, &flow, eps))?;
        ensure!(rhs == flow.value, "instance {}: M·D_eps(mu/M, pi2/M) = {} vs {}", item.index, rhs, flow.value);
        match item.spec {
            advrisk::SpaceSpec::Matrix { .. } => graphs += 1,
            _ => grids += 1,
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("200 instances ({grids} grids, {graphs} random metrics) in {elapsed:.2?}"))
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let generator = InstanceGenerator::new(102).with_n_range(2, 10).with_epsilon_rule(EpsilonRule::Arbitrary);
    let mut regions = 0u64;
    for item in items(&generator, 50)? {
        let inst = &item.instance;
        let space = inst.space();
        for bits in 0..1u64 << space.n() {
            let region = DecisionRegion::from_bits(space, bits);
            let expanded = naive_expand(space, bits, inst.epsilon());
            for p in [inst.p0(), inst.p1()] {
                let (value, argmax) = ok(transport::ball_sup_measure(p, &region, inst.epsilon()))?;
                ensure!(value == mass_of(p, expanded), "instance {}: region {bits:#b}", item.index);
                ensure!(ok(transport::in_winf_ball(&argmax, p, inst.epsilon()))?, "argmax left the ball");
            }
            regions += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("50 instances, {regions} regions, both classes, in {elapsed:.2?}"))
}

fn criterion_3() -> Verdict {
    let generator = InstanceGenerator::new(103).with_n_range(2, 10).with_epsilon_rule(EpsilonRule::Arbitrary);
    let mut regions = 0u64;
    let mut problems = 0;
    for item in items(&generator, 50)? {
        let inst = &item.instance;
        let space = inst.space();
        for bits in 0..1u64 << space.n() {
            let region = DecisionRegion::from_bits(space, bits);
            let expansion = ok(risk::risk_expansion(inst, &region))?;
            let maps = ok(risk::risk_transport_maps(inst, &region))?.0;
            let ball = ok(risk::risk_winf_ball(inst, &region))?.0;
            ensure!(expansion == maps && maps == ball, "instance {}: region {bits:#b}", item.index);
            regions += 1;
        }
        let problem = ok(verify::random_loss_problem(inst, &mut item.rng(3)))?;
        for w in problem.hypotheses() {
            let values = RiskMode::ALL
                .iter()
                .map(|&mode| ok(risk::risk_general(&problem, w, inst.epsilon(), mode)))
                .collect::<Result<Vec<_>, _>>()?;
            ensure!(values.windows(2).all(|v| v[0] == v[1]), "instance {}: loss chain {values:?}", item.index);
        }
        problems += 1;
    }
    Ok(format!("50 instances, {regions} regions; {problems} loss problems with equal sup/maps/kernels/ball"))
}

fn criterion_4() -> Verdict {
    let generator = InstanceGenerator::new(104);
    let mut by_t = [0; 3];
    for item in complete_items(&generator, 200)? {
        let inst = &item.instance;
        let formula = ok(optimal::optimal_risk_formula(inst))?;
        let (brute, _) = ok(optimal::optimal_risk_bruteforce(inst))?;
        let space = inst.space();
        let naive = (0..1u64 << space.n())
            .map(|bits| ok(risk::risk_expansion(inst, &DecisionRegion::from_bits(space, bits))))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .min()
            .unwrap();
        ensure!(formula.value == brute && brute == naive, "instance {}: {} / {} / {}", item.index, formula.value, brute, naive);
        let reproduced = ok(risk::risk_expansion(inst, &formula.witness))?;
        ensure!(reproduced == formula.value, "instance {}: witness gives {reproduced}", item.index);
        let d0 = ok(transport::d_epsilon(inst.p0(), inst.p1(), &int(0)))?.value;
        ensure!(d0 == ok(total_variation(inst.p0(), inst.p1()))?, "instance {}: D_0 != TV", item.index);
        let slot = [int(1), int(2), ratio(7, 2)].iter().position(|t| t == inst.t()).unwrap();
        by_t[slot] += 1;
    }
    Ok(format!("200 complete instances (T=1: {}, T=2: {}, T=7/2: {}), witness and D_0 = TV checked", by_t[0], by_t[1], by_t[2]))
}

fn criterion_5() -> Verdict {
    for item in complete_items(&InstanceGenerator::new(105), 200)? {
        let inst = &item.instance;
        let sup = ok(game::supinf_value(inst))?.value;
        let inf = ok(game::infsup_value(inst))?.value;
        ensure!(sup == inf, "instance {}: sup-inf {sup} vs inf-sup {inf}", item.index);
    }
    let arbitrary = InstanceGenerator::new(205).with_n_range(2, 10).with_epsilon_rule(EpsilonRule::Arbitrary);
    let mut incomplete = 0;
    for item in items(&arbitrary, 100)? {
        let inst = &item.instance;
        let sup = ok(game::supinf_value(inst))?.value;
        let inf = ok(game::infsup_value(inst))?.value;
        ensure!(sup <= inf, "instance {}: sup-inf {sup} exceeds inf-sup {inf}", item.index);
        incomplete += usize::from(!complete(inst));
    }
    Ok(format!("equality on 200 complete instances; sup <= inf on 100 arbitrary-eps instances ({incomplete} incomplete)"))
}

fn criterion_6() -> Verdict {
    let mixed = complete_items(&InstanceGenerator::new(106), 200)?;
    let unit = complete_items(&InstanceGenerator::new(206).with_t_set(vec![int(1)]), 100)?;
    let mut midpoint_runs = 0;
    for item in mixed.iter().chain(&unit) {
        let inst = &item.instance;
        let eps = inst.epsilon();
        let c = ok(game::nash_construct(inst))?;
        ensure!(c.delta_achieved == int(0), "instance {}: delta {}", item.index, c.delta_achieved);
        ensure!(ok(transport::in_winf_ball(&c.p0_star, inst.p0(), eps))?, "instance {}: p0* outside ball", item.index);
        ensure!(ok(transport::in_winf_ball(&c.p1_star, inst.p1(), eps))?, "instance {}: p1* outside ball", item.index);
        if inst.t() == &int(1) {
            let (m0, m1) = ok(game::nash_midpoint_construct(inst))?;
            ensure!(ok(transport::in_winf_ball(&m0, inst.p0(), eps))?, "instance {}: midpoint p0 outside ball", item.index);
            ensure!(ok(transport::in_winf_ball(&m1, inst.p1(), eps))?, "instance {}: midpoint p1 outside ball", item.index);
            let tv = ok(total_variation(&m0, &m1))?;
            let d = ok(transport::d_epsilon(inst.p0(), inst.p1(), eps))?.value;
            ensure!(tv == d, "instance {}: TV {tv} vs D_eps {d}", item.index);
            midpoint_runs += 1;
        }
    }
    Ok(format!("delta = 0 on 300 complete instances; midpoint pair attains D_eps on {midpoint_runs} with T = 1"))
}

fn criterion_7() -> Verdict {
    let generator = InstanceGenerator::new(107).with_epsilon_rule(EpsilonRule::Arbitrary);
    let mut pairs = 0;
    for item in items(&generator, 50)? {
        let inst = &item.instance;
        let space = inst.space();
        let full = (1u64 << space.n()) - 1;
        let mut rng = item.rng(7);
        for _ in 0..500 {
            let (a, b) = (rng.random::<u64>() & full, rng.random::<u64>() & full);
            for p in [inst.p0(), inst.p1()] {
                let v = |s: u64| {
                    let region = DecisionRegion::from_bits(space, s);
                    ok(measure::measure_of(p, &metric::expand(&region, inst.epsilon())))
                };
                ensure!(v(a | b)? + v(a & b)? <= v(a)? + v(b)?, "instance {}: {a:#b}, {b:#b}", item.index);
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs over 50 instances, both classes, zero violations"))
}

fn criterion_8() -> Verdict {
    let generator = InstanceGenerator::new(108).with_n_range(2, 8).with_epsilon_rule(EpsilonRule::Arbitrary);
    let mut checked = 0u64;
    for item in items(&generator, 30)? {
        let inst = &item.instance;
        let space = inst.space();
        let eps = inst.epsilon();
        let n = space.n();
        let grow: Vec<u64> = (0..1u64 << n).map(|a| naive_expand(space, a, eps)).collect();
        let double = &(eps * int(2));
        for a in 0..1u64 << n {
            let region = DecisionRegion::from_bits(space, a);
            ensure!(metric::expand(&region, eps).to_bits() == grow[a as usize], "expand {a:#b}");
            for x in 0..n {
                let indicator = (0..n).any(|y| a >> y & 1 == 1 && space.within(x, y, eps));
                ensure!(indicator == (grow[a as usize] >> x & 1 == 1), "indicator at {x} for {a:#b}");
            }
            let shrunk = metric::contract(&region, eps).to_bits();
            ensure!(shrunk & !a == 0 && a & !grow[a as usize] == 0, "sandwich for {a:#b}");
            let twice = grow[grow[a as usize] as usize];
            ensure!(twice & !naive_expand(space, a, double) == 0, "nested expansion bound for {a:#b}");
            for b in 0..1u64 << n {
                ensure!(grow[(a | b) as usize] == grow[a as usize] | grow[b as usize], "union for {a:#b}, {b:#b}");
                checked += 1;
            }
        }
    }
    Ok(format!("30 instances with n <= 8, {checked} region pairs, zero violations"))
}

fn criterion_9() -> Verdict {
    let spec = advrisk::SpaceSpec::Grid1d { n: 4 };
    let space = ok(FiniteMetricSpace::build(&spec))?;
    let dirac = |i| ok(DiscreteMeasure::dirac(&space, i));
    let eps = ratio(3, 2);
    let gap = ok(verify::probe_midpoint_gap(&dirac(3)?, &dirac(0)?, &eps))?.ok_or("no gap found")?;
    ensure!(
        gap.minkowski_form == int(1) && gap.strassen_lhs == int(0),
        "gap values ({}, {})",
        format_rational(&gap.minkowski_form),
        format_rational(&gap.strassen_lhs)
    );
    let inst = ok(GameInstance::new(dirac(0)?, dirac(3)?, int(1), eps))?;
    let item = GeneratedInstance::new(0, 0, spec, inst);
    let gated: Vec<_> = CheckName::ALL.into_iter().filter(|c| c.midpoint_gated()).collect();
    for &check in &gated {
        let outcome = verify::check_instance(check, &item);
        ensure!(matches!(outcome, Outcome::Skipped(_)), "{} gave {outcome:?}", check.name());
    }
    Ok(format!("gap (1, 0) reproduced; skipped by {} gated checks", gated.len()))
}

fn criterion_10() -> Verdict {
    let start = Instant::now();
    let out = ok(Command::new(env!("CARGO_BIN_EXE_advrisk")).args(["verify", "--suite", "all", "--seed", "1"]).output())?;
    let elapsed = start.elapsed();
    ensure!(out.status.code() == Some(0), "exit code {:?}", out.status.code());
    let report: serde_json::Value = ok(serde_json::from_slice(&out.stdout))?;
    ensure!(report["status"] == "pass", "status {}", report["status"]);
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("exit 0, {} checks in {elapsed:.2?}", report["checks"].as_array().map_or(0, Vec::len)))
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, fn() -> Verdict); 10] = [
        (1, "generalized Strassen duality", criterion_1),
        (2, "ball identity", criterion_2),
        (3, "risk equivalences", criterion_3),
        (4, "optimal risk", criterion_4),
        (5, "minimax", criterion_5),
        (6, "Nash certificates", criterion_6),
        (7, "capacity submodularity", criterion_7),
        (8, "expansion algebra", criterion_8),
        (9, "counterexample probe", criterion_9),
        (10, "end-to-end verify", criterion_10),
    ];
    let mut failed = Vec::new();
    for (k, name, run) in criteria {
        let line = match run() {
            Ok(detail) => format!("criterion {k:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed.push(k);
                format!("criterion {k:>2} FAIL  {name}: {detail}")
            }
        };
        let _ = writeln!(std::io::stderr(), "{line}");
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
