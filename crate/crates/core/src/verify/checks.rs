//! One function per invariant. Each compares two independently computed
//! quantities on a generated instance.

use num_traits::{One, Zero};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generator::{random_measure, GeneratedInstance};
use crate::error::{Error, Result};
use crate::game;
use crate::measure;
use crate::metric::{self, BitBalls, DecisionRegion};
use crate::num::{int, ratio, Rational};
use crate::optimal;
use crate::risk::{self, GameInstance, LossProblem, MarkovKernelSet, RiskMode};
use crate::transport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Strassen,
    OptimalRisk,
    Minimax,
    BallIdentity,
    Capacity,
    ExpansionAlgebra,
    RiskEquivalence,
    ChainIneq,
    ShortestTv,
    LayeredBalls,
}

impl CheckName {
    pub const ALL: [CheckName; 10] = [
        CheckName::Strassen,
        CheckName::OptimalRisk,
        CheckName::Minimax,
        CheckName::BallIdentity,
        CheckName::Capacity,
        CheckName::ExpansionAlgebra,
        CheckName::RiskEquivalence,
        CheckName::ChainIneq,
        CheckName::ShortestTv,
        CheckName::LayeredBalls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckName::Strassen => "strassen",
            CheckName::OptimalRisk => "optimal-risk",
            CheckName::Minimax => "minimax",
            CheckName::BallIdentity => "ball-identity",
            CheckName::Capacity => "capacity",
            CheckName::ExpansionAlgebra => "expansion-algebra",
            CheckName::RiskEquivalence => "risk-equivalence",
            CheckName::ChainIneq => "chain-ineq",
            CheckName::ShortestTv => "shortest-tv",
            CheckName::LayeredBalls => "layered-balls",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|c| c.name() == text).ok_or_else(|| Error::UnknownCheck(text.to_string()))
    }

    /// Checks whose main assertion needs ε-midpoint completeness.
    pub fn midpoint_gated(self) -> bool {
        matches!(self, CheckName::OptimalRisk | CheckName::Minimax | CheckName::ShortestTv | CheckName::LayeredBalls)
    }

    fn salt(self) -> u64 {
        Self::ALL.iter().position(|&c| c == self).expect("listed") as u64 + 1
    }
}

/// Result of one check on one instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail { lhs: Option<Rational>, rhs: Option<Rational>, detail: String },
    Skipped(String),
}

fn fail(lhs: &Rational, rhs: &Rational, detail: impl Into<String>) -> Outcome {
    Outcome::Fail { lhs: Some(lhs.clone()), rhs: Some(rhs.clone()), detail: detail.into() }
}

fn fail_plain(detail: impl Into<String>) -> Outcome {
    Outcome::Fail { lhs: None, rhs: None, detail: detail.into() }
}

/// Runs `check` on one instance. Errors raised by the operations count as failures.
pub fn check_instance(check: CheckName, item: &GeneratedInstance) -> Outcome {
    let mut rng = item.rng(check.salt());
    let run = match check {
        CheckName::Strassen => strassen(item),
        CheckName::OptimalRisk => optimal_risk(&item.instance),
        CheckName::Minimax => minimax(&item.instance),
        CheckName::BallIdentity => ball_identity(&item.instance, &mut rng),
        CheckName::Capacity => capacity(&item.instance, &mut rng),
        CheckName::ExpansionAlgebra => expansion_algebra(&item.instance, &mut rng),
        CheckName::RiskEquivalence => risk_equivalence(&item.instance, &mut rng),
        CheckName::ChainIneq => chain_ineq(&item.instance, &mut rng),
        CheckName::ShortestTv => shortest_tv(&item.instance, &mut rng),
        CheckName::LayeredBalls => layered_balls(&item.instance),
    };
    run.unwrap_or_else(|e| fail_plain(e.to_string()))
}

fn complete(inst: &GameInstance) -> bool {
    metric::is_midpoint_complete(inst.space(), inst.epsilon()).complete
}

/// Every region when `n ≤ exhaustive_up_to`, otherwise `samples` random ones.
fn regions(n: usize, exhaustive_up_to: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let full = metric::full_bits(n);
    if n <= exhaustive_up_to {
        (0..=full).collect()
    } else {
        (0..samples).map(|_| rng.next_u64() & full).collect()
    }
}

fn strassen(item: &GeneratedInstance) -> Result<Outcome> {
    let inst = &item.instance;
    let eps = inst.epsilon();
    let share = [int(1), ratio(2, 3), ratio(1, 2)][(item.index % 3) as usize].clone();
    let mu = inst.p1().scale(&share);
    let nu = inst.p0().scale(&inst.t().clone().max(Rational::one()));
    let flow = transport::unbalanced_cost(&mu, &nu, eps)?;
    let (brute, _) = transport::strassen_lhs_bruteforce(&mu, &nu, eps)?;
    if flow.value != brute {
        return Ok(fail(&flow.value, &brute, "unbalanced transport differs from the enumerated dual"));
    }
    let rhs = transport::unbalanced_rhs(&mu, &flow, eps)?;
    if rhs != flow.value {
        return Ok(fail(&flow.value, &rhs, "column-marginal form differs from the transport value"));
    }
    let (minkowski, _) = transport::minkowski_form_bruteforce(&mu, &nu, eps)?;
    if minkowski < brute || (complete(inst) && minkowski != brute) {
        return Ok(fail(&minkowski, &brute, "Minkowski form against the two-sided dual"));
    }
    Ok(Outcome::Pass)
}

fn optimal_risk(inst: &GameInstance) -> Result<Outcome> {
    let d0 = transport::d_epsilon(inst.p0(), inst.p1(), &Rational::zero())?.value;
    let tv = measure::total_variation(inst.p0(), inst.p1())?;
    if d0 != tv {
        return Ok(fail(&d0, &tv, "zero-budget transport differs from total variation"));
    }
    if !complete(inst) {
        return Ok(Outcome::Skipped("not midpoint-complete".into()));
    }
    let report = optimal::optimal_risk_both(inst)?;
    let brute = report.value_bruteforce.clone().expect("both routes ran");
    if report.value_formula != brute {
        return Ok(fail(&report.value_formula, &brute, "formula differs from enumeration"));
    }
    let achieved = risk::risk_expansion(inst, &report.witness)?;
    if achieved != report.value || !report.witness_certified {
        return Ok(fail(&achieved, &report.value, "witness region does not reproduce the value"));
    }
    Ok(Outcome::Pass)
}

fn minimax(inst: &GameInstance) -> Result<Outcome> {
    let sup = game::supinf_value(inst)?;
    let inf = game::infsup_value(inst)?;
    if sup.value > inf.value {
        return Ok(fail(&sup.value, &inf.value, "sup-inf exceeds inf-sup"));
    }
    if !inf.midpoint_complete {
        return Ok(Outcome::Skipped("not midpoint-complete; sup-inf <= inf-sup held".into()));
    }
    if sup.value != inf.value {
        return Ok(fail(&sup.value, &inf.value, "minimax equality fails"));
    }
    let cert = game::nash_construct(inst)?;
    if !cert.delta_achieved.is_zero() {
        return Ok(fail(&cert.delta_achieved, &Rational::zero(), "Nash certificate has positive delta"));
    }
    for (star, center) in [(&cert.p0_star, inst.p0()), (&cert.p1_star, inst.p1())] {
        if !transport::in_winf_ball(star, center, inst.epsilon())? {
            return Ok(fail_plain("certificate measure outside its ball"));
        }
    }
    Ok(Outcome::Pass)
}

fn ball_identity(inst: &GameInstance, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let space = inst.space();
    let eps = inst.epsilon();
    for bits in regions(space.n(), 10, 512, rng) {
        let region = DecisionRegion::from_bits(space, bits);
        let grown = metric::expand(&region, eps);
        for center in [inst.p0(), inst.p1()] {
            let (value, argmax) = transport::ball_sup_measure(center, &region, eps)?;
            let expected = measure::measure_of(center, &grown)?;
            if value != expected {
                return Ok(fail(&value, &expected, format!("ball supremum on region {:?}", region.indices())));
            }
            if !transport::in_winf_ball(&argmax, center, eps)? {
                return Ok(fail_plain(format!("maximizer outside the ball for region {:?}", region.indices())));
            }
        }
    }
    Ok(Outcome::Pass)
}

fn capacity(inst: &GameInstance, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let space = inst.space();
    let full = metric::full_bits(space.n());
    let eps = inst.epsilon();
    for center in [inst.p0(), inst.p1()] {
        let v = |bits: u64| measure::measure_of(center, &metric::expand(&DecisionRegion::from_bits(space, bits), eps));
        for _ in 0..500 {
            let (a, b) = (rng.next_u64() & full, rng.next_u64() & full);
            let lhs = v(a | b)? + v(a & b)?;
            let rhs = v(a)? + v(b)?;
            if lhs > rhs {
                return Ok(fail(&lhs, &rhs, format!("submodularity fails for {a:#b}, {b:#b}")));
            }
            let (small, big) = (v(a & b)?, v(a)?);
            if small > big {
                return Ok(fail(&small, &big, "capacity is not monotone"));
            }
        }
    }
    Ok(Outcome::Pass)
}

fn expansion_algebra(inst: &GameInstance, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let space = inst.space();
    let n = space.n();
    let eps = inst.epsilon();
    let full = metric::full_bits(n);
    let balls = BitBalls::new(space, eps);
    let double = BitBalls::new(space, &(eps * int(2)));
    let is_complete = complete(inst);
    let sets = regions(n, 8, 256, rng);
    for &a in &sets {
        let grown = balls.expand(a);
        let shrunk = balls.contract(a, full);
        let region = DecisionRegion::from_bits(space, a);
        if metric::expand(&region, eps).to_bits() != grown || metric::contract(&region, eps).to_bits() != shrunk {
            return Ok(fail_plain(format!("set and bitmask expansions disagree on {a:#b}")));
        }
        for x in 0..n {
            let indicator = space.ball(x, eps).into_iter().any(|y| a >> y & 1 == 1);
            if indicator != (grown >> x & 1 == 1) {
                return Ok(fail_plain(format!("indicator identity fails at point {x} for {a:#b}")));
            }
        }
        let subset = |p: u64, q: u64| p & !q == 0;
        if !subset(shrunk, a) || !subset(a, grown) {
            return Ok(fail_plain(format!("contraction/expansion sandwich fails for {a:#b}")));
        }
        if !subset(balls.expand(shrunk), a) || !subset(a, balls.contract(grown, full)) {
            return Ok(fail_plain(format!("opening/closing sandwich fails for {a:#b}")));
        }
        let twice = balls.expand(grown);
        let direct = double.expand(a);
        if !subset(twice, direct) || (is_complete && twice != direct) {
            return Ok(fail_plain(format!("nested expansion bound fails for {a:#b}")));
        }
    }
    let pairs: Vec<(u64, u64)> = if n <= 8 {
        sets.iter().flat_map(|&a| sets.iter().map(move |&b| (a, b))).collect()
    } else {
        (0..4096).map(|_| (rng.next_u64() & full, rng.next_u64() & full)).collect()
    };
    for (a, b) in pairs {
        if balls.expand(a | b) != balls.expand(a) | balls.expand(b) {
            return Ok(fail_plain(format!("union distributivity fails for {a:#b}, {b:#b}")));
        }
    }
    Ok(Outcome::Pass)
}

fn risk_equivalence(inst: &GameInstance, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let space = inst.space();
    let n = space.n();
    for (k, bits) in regions(n, 10, 256, rng).into_iter().enumerate() {
        let region = DecisionRegion::from_bits(space, bits);
        let expansion = risk::risk_expansion(inst, &region)?;
        let others = [
            ("closed expansion", risk::risk_closed_expansion(inst, &region)?),
            ("transport maps", risk::risk_transport_maps(inst, &region)?.0),
            ("W-infinity ball", risk::risk_winf_ball(inst, &region)?.0),
        ];
        for (what, value) in others {
            if value != expansion {
                return Ok(fail(&expansion, &value, format!("{what} risk on region {:?}", region.indices())));
            }
        }
        if n <= risk::MAP_ENUMERATION_LIMIT && k < 4 {
            let exhaustive = risk::risk_transport_maps_exhaustive(inst, &region)?;
            if exhaustive != expansion {
                return Ok(fail(&expansion, &exhaustive, "greedy maps are not optimal"));
            }
        }
    }
    Ok(Outcome::Pass)
}

/// Random multi-class problem on the instance's space.
pub fn random_loss_problem(inst: &GameInstance, rng: &mut ChaCha8Rng) -> Result<LossProblem> {
    let space = inst.space();
    let n = space.n();
    let k = rng.random_range(1..=3usize);
    let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let priors = weights.iter().map(|&w| ratio(w, total)).collect();
    let conditionals = (0..k)
        .map(|y| match y {
            0 => Ok(inst.p0().clone()),
            1 => Ok(inst.p1().clone()),
            _ => random_measure(space, super::generator::MassStyle::RationalDirichlet, rng),
        })
        .collect::<Result<Vec<_>>>()?;
    let hypotheses: Vec<String> = (0..rng.random_range(1..=3)).map(|w| format!("h{w}")).collect();
    let loss = hypotheses
        .iter()
        .map(|_| (0..k).map(|_| (0..n).map(|_| ratio(rng.random_range(0..=8), 2)).collect()).collect())
        .collect();
    LossProblem::new(space, (0..k).map(|y| format!("c{y}")).collect(), priors, conditionals, hypotheses, loss)
}

fn random_kernels(problem: &LossProblem, eps: &Rational, rng: &mut ChaCha8Rng) -> Result<MarkovKernelSet> {
    let space = problem.space();
    let n = space.n();
    let kernels = (0..problem.classes().len())
        .map(|_| {
            (0..n)
                .map(|x| {
                    let ball = space.ball(x, eps);
                    let w: Vec<i64> = ball.iter().map(|_| rng.random_range(1..=5)).collect();
                    let total: i64 = w.iter().sum();
                    let mut row = vec![Rational::zero(); n];
                    for (&j, &wj) in ball.iter().zip(&w) {
                        row[j] = ratio(wj, total);
                    }
                    row
                })
                .collect()
        })
        .collect();
    MarkovKernelSet::new(space, eps, kernels)
}

fn chain_ineq(inst: &GameInstance, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let problem = random_loss_problem(inst, rng)?;
    let eps = inst.epsilon();
    let space = problem.space();
    for (wi, w) in problem.hypotheses().iter().enumerate() {
        let value = |mode| risk::risk_general(&problem, w, eps, mode);
        let (sup, maps, kernels, ball) =
            (value(RiskMode::Sup)?, value(RiskMode::Maps)?, value(RiskMode::Kernels)?, value(RiskMode::Ball)?);
        if maps > kernels || kernels > ball {
            return Ok(fail(&maps, &ball, format!("maps <= kernels <= ball fails for {w}")));
        }
        if maps != ball || sup != ball {
            return Ok(fail(&sup, &ball, format!("risk formulations differ for {w}")));
        }
        let random = random_kernels(&problem, eps, rng)?;
        let feasible = risk::kernel_risk(&problem, wi, &random);
        if feasible > kernels {
            return Ok(fail(&feasible, &kernels, format!("a feasible kernel beats the optimum for {w}")));
        }
        let maps_sample: Vec<Vec<usize>> = (0..problem.classes().len())
            .map(|_| {
                (0..space.n())
                    .map(|x| {
                        let ball = space.ball(x, eps);
                        ball[rng.random_range(0..ball.len())]
                    })
                    .collect()
            })
            .collect();
        let feasible = risk::map_risk(&problem, wi, &maps_sample)?;
        if feasible > maps {
            return Ok(fail(&feasible, &maps, format!("a feasible map beats the optimum for {w}")));
        }
    }
    Ok(Outcome::Pass)
}

fn shortest_tv(inst: &GameInstance, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let eps = inst.epsilon();
    let equal = GameInstance::new(inst.p0().clone(), inst.p1().clone(), Rational::one(), eps.clone())?;
    let d = transport::d_epsilon(equal.p0(), equal.p1(), eps)?.value;
    let space = equal.space();
    let full = metric::full_bits(space.n());
    for _ in 0..8 {
        let region = DecisionRegion::from_bits(space, rng.next_u64() & full);
        let (a, b, _) = game::adversary_best_response(&equal, &region)?;
        let tv = measure::total_variation(&a, &b)?;
        if tv < d {
            return Ok(fail(&tv, &d, "a pair inside the balls is closer than D_eps"));
        }
    }
    let sup = game::supinf_value(&equal)?;
    let flow_tv = measure::total_variation(&sup.p0_star, &sup.p1_star)?;
    if flow_tv < d {
        return Ok(fail(&flow_tv, &d, "layered-flow pair is closer than D_eps"));
    }
    if !complete(&equal) {
        return Ok(Outcome::Skipped("not midpoint-complete; D_eps lower bound held".into()));
    }
    if flow_tv != d {
        return Ok(fail(&flow_tv, &d, "layered-flow pair does not attain D_eps"));
    }
    let (a, b) = game::nash_midpoint_construct(&equal)?;
    let tv = measure::total_variation(&a, &b)?;
    if tv != d {
        return Ok(fail(&tv, &d, "midpoint construction does not attain D_eps"));
    }
    if game::bayes_risk(&a, &b, equal.t())? != sup.value {
        return Ok(fail_plain("midpoint and layered-flow pairs have different Bayes risk"));
    }
    Ok(Outcome::Pass)
}

fn layered_balls(inst: &GameInstance) -> Result<Outcome> {
    let work = if inst.t() < &Rational::one() { inst.swapped() } else { inst.clone() };
    let report = game::layered_ball_check(&work)?;
    if report.transport_value > report.ball_value {
        return Ok(fail(&report.transport_value, &report.ball_value, "transport between centers exceeds the ball value"));
    }
    if !report.midpoint_complete {
        return Ok(Outcome::Skipped("not midpoint-complete; transport <= ball value held".into()));
    }
    if !report.equal {
        return Ok(fail(&report.transport_value, &report.ball_value, "two-sided equality fails"));
    }
    if report.constructed.is_none() {
        return Ok(fail_plain("no constructed pair on a midpoint-complete instance"));
    }
    Ok(Outcome::Pass)
}
