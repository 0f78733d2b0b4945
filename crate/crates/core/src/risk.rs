//! Adversarial risk of a decision region (0-1 loss) and of a hypothesis under
//! a general loss table.
//!
//! For 0-1 loss with prior ratio `T : 1` the four formulations are
//!
//! * expansion: `T/(T+1)·p₀(A^{⊕ε}) + 1/(T+1)·p₁((Aᶜ)^{⊕ε})`,
//! * closed expansion: the same with `{x : d(x, A) ≤ ε}`,
//! * transport maps: the best budget-feasible pushforwards of `p₀`, `p₁`,
//! * W∞ balls: the best perturbed pair inside the two `ε`-balls.
//!
//! On a finite space they all agree; each is computed along its own route so
//! the agreement is a real check.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::{self, DiscreteMeasure};
use crate::metric::{self, same_space, DecisionRegion, FiniteMetricSpace};
use crate::num::{self, Rational};
use crate::transport;

/// Binary problem: class-conditional distributions, prior ratio and budget.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    space: Arc<FiniteMetricSpace>,
    p0: DiscreteMeasure,
    p1: DiscreteMeasure,
    t: Rational,
    epsilon: Rational,
}

impl GameInstance {
    pub fn new(p0: DiscreteMeasure, p1: DiscreteMeasure, t: Rational, epsilon: Rational) -> Result<Self> {
        p0.check_same(&p1)?;
        p0.require_probability("p0")?;
        p1.require_probability("p1")?;
        if !t.is_positive() {
            return Err(Error::InvalidParameter { what: "T", constraint: "> 0", value: num::format_rational(&t) });
        }
        transport::check_budget(&epsilon)?;
        Ok(Self { space: p0.space().clone(), p0, p1, t, epsilon })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn p0(&self) -> &DiscreteMeasure {
        &self.p0
    }

    pub fn p1(&self) -> &DiscreteMeasure {
        &self.p1
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: Rational) -> Result<Self> {
        Self::new(self.p0.clone(), self.p1.clone(), self.t.clone(), epsilon)
    }

    /// Labels exchanged: `(p₁, p₀, 1/T)`. Risk of `A` here equals risk of `Aᶜ` there.
    pub fn swapped(&self) -> Self {
        Self {
            space: self.space.clone(),
            p0: self.p1.clone(),
            p1: self.p0.clone(),
            t: self.t.recip(),
            epsilon: self.epsilon.clone(),
        }
    }

    /// `(T/(T+1), 1/(T+1))`.
    pub fn weights(&self) -> (Rational, Rational) {
        let denom = (&self.t + Rational::one()).recip();
        (&self.t * &denom, denom)
    }

    pub(crate) fn check_region(&self, region: &DecisionRegion) -> Result<()> {
        if same_space(&self.space, region.space()) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn weighted(&self, class0: Rational, class1: Rational) -> Rational {
        let (w0, w1) = self.weights();
        w0 * class0 + w1 * class1
    }
}

/// Risk without an adversary.
pub fn risk_standard(inst: &GameInstance, region: &DecisionRegion) -> Result<Rational> {
    inst.check_region(region)?;
    Ok(inst.weighted(measure::measure_of(&inst.p0, region)?, measure::measure_of(&inst.p1, &region.complement())?))
}

pub fn risk_expansion(inst: &GameInstance, region: &DecisionRegion) -> Result<Rational> {
    inst.check_region(region)?;
    let eps = &inst.epsilon;
    let grow0 = metric::expand(region, eps);
    let grow1 = metric::expand(&region.complement(), eps);
    Ok(inst.weighted(measure::measure_of(&inst.p0, &grow0)?, measure::measure_of(&inst.p1, &grow1)?))
}

/// `{x : min_{a∈A} d(x, a) ≤ ε}`, computed from the point-to-set distance.
pub fn closed_expansion(region: &DecisionRegion, epsilon: &Rational) -> DecisionRegion {
    let space = region.space();
    let members = region.indices();
    let mask = (0..space.n())
        .map(|x| {
            members
                .iter()
                .map(|&a| space.distance(x, a))
                .min_by(|a, b| a.partial_cmp(b).expect("total order"))
                .is_some_and(|d| d.within(epsilon))
        })
        .collect();
    DecisionRegion::from_mask(space, mask).expect("length matches")
}

/// Closed-expansion risk; identical to [`risk_expansion`] on finite spaces.
pub fn risk_closed_expansion(inst: &GameInstance, region: &DecisionRegion) -> Result<Rational> {
    inst.check_region(region)?;
    let eps = &inst.epsilon;
    let grow0 = closed_expansion(region, eps);
    let grow1 = closed_expansion(&region.complement(), eps);
    Ok(inst.weighted(measure::measure_of(&inst.p0, &grow0)?, measure::measure_of(&inst.p1, &grow1)?))
}

/// Adversary transport maps, one target point per source point and class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportMaps {
    pub class0: Vec<usize>,
    pub class1: Vec<usize>,
}

/// Pushforward of `mu` under `map`.
pub fn push_forward(mu: &DiscreteMeasure, map: &[usize]) -> Result<DiscreteMeasure> {
    let n = mu.space().n();
    if map.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: map.len() });
    }
    let mut out = vec![Rational::zero(); n];
    for (i, &j) in map.iter().enumerate() {
        mu.space().check_point(j)?;
        out[j] += mu.at(i);
    }
    DiscreteMeasure::new(mu.space(), out)
}

/// Sends each point into `target` when it is not already there and some
/// target point lies within `ε` (lowest index first); otherwise leaves it.
fn greedy_map(space: &FiniteMetricSpace, target: &DecisionRegion, epsilon: &Rational) -> Vec<usize> {
    (0..space.n())
        .map(|x| {
            if target.contains(x) {
                x
            } else {
                (0..space.n()).find(|&y| target.contains(y) && space.within(x, y, epsilon)).unwrap_or(x)
            }
        })
        .collect()
}

/// Transport-map risk with the maps that attain it.
pub fn risk_transport_maps(inst: &GameInstance, region: &DecisionRegion) -> Result<(Rational, TransportMaps)> {
    inst.check_region(region)?;
    let space = &inst.space;
    let class0 = greedy_map(space, region, &inst.epsilon);
    let class1 = greedy_map(space, &region.complement(), &inst.epsilon);
    let moved0 = push_forward(&inst.p0, &class0)?;
    let moved1 = push_forward(&inst.p1, &class1)?;
    let value = inst.weighted(
        measure::measure_of(&moved0, region)?,
        measure::measure_of(&moved1, &region.complement())?,
    );
    Ok((value, TransportMaps { class0, class1 }))
}

/// Largest space [`risk_transport_maps_exhaustive`] accepts.
pub const MAP_ENUMERATION_LIMIT: usize = 6;

/// Transport-map risk maximized over every budget-feasible pair of maps.
pub fn risk_transport_maps_exhaustive(inst: &GameInstance, region: &DecisionRegion) -> Result<Rational> {
    inst.check_region(region)?;
    let n = inst.space.n();
    if n > MAP_ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n, limit: MAP_ENUMERATION_LIMIT });
    }
    let v0 = best_map_mass(&inst.p0, region, &inst.epsilon)?;
    let v1 = best_map_mass(&inst.p1, &region.complement(), &inst.epsilon)?;
    Ok(inst.weighted(v0, v1))
}

fn best_map_mass(mu: &DiscreteMeasure, target: &DecisionRegion, epsilon: &Rational) -> Result<Rational> {
    let space = mu.space();
    let n = space.n();
    let balls: Vec<Vec<usize>> = (0..n).map(|x| space.ball(x, epsilon)).collect();
    // Odometer over all maps; only the digit that moves changes the score.
    let mut choice = vec![0usize; n];
    let mut current: Rational = (0..n).filter(|&x| target.contains(balls[x][0])).map(|x| mu.at(x)).sum();
    let mut best = current.clone();
    loop {
        let mut i = 0;
        loop {
            if i == n {
                return Ok(best);
            }
            let before = target.contains(balls[i][choice[i]]);
            choice[i] = (choice[i] + 1) % balls[i].len();
            let after = target.contains(balls[i][choice[i]]);
            match (before, after) {
                (false, true) => current += mu.at(i),
                (true, false) => current -= mu.at(i),
                _ => {}
            }
            if choice[i] != 0 {
                break;
            }
            i += 1;
        }
        if current > best {
            best = current.clone();
        }
    }
}

/// W∞-ball risk with the worst-case pair `(p₀′, p₁′)`.
pub fn risk_winf_ball(
    inst: &GameInstance,
    region: &DecisionRegion,
) -> Result<(Rational, (DiscreteMeasure, DiscreteMeasure))> {
    inst.check_region(region)?;
    let eps = &inst.epsilon;
    let (v0, worst0) = transport::ball_sup_measure(&inst.p0, region, eps)?;
    let (v1, worst1) = transport::ball_sup_measure(&inst.p1, &region.complement(), eps)?;
    if !transport::in_winf_ball(&worst0, &inst.p0, eps)? || !transport::in_winf_ball(&worst1, &inst.p1, eps)? {
        return Err(Error::Certificate("worst-case measure left its W∞ ball".into()));
    }
    Ok((inst.weighted(v0, v1), (worst0, worst1)))
}

/// Pointwise ball maximum of a loss column.
pub fn worst_case_loss(space: &FiniteMetricSpace, phi: &[Rational], epsilon: &Rational) -> Result<Vec<Rational>> {
    if phi.len() != space.n() {
        return Err(Error::LengthMismatch { expected: space.n(), got: phi.len() });
    }
    Ok((0..space.n())
        .map(|x| {
            space.ball(x, epsilon).into_iter().map(|y| &phi[y]).max().expect("ball contains x").clone()
        })
        .collect())
}

/// Multi-class problem with a finite hypothesis set and a tabulated loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossProblem {
    space: Arc<FiniteMetricSpace>,
    classes: Vec<String>,
    priors: Vec<Rational>,
    conditionals: Vec<DiscreteMeasure>,
    hypotheses: Vec<String>,
    /// `loss[w][y][x]`.
    loss: Vec<Vec<Vec<Rational>>>,
}

impl LossProblem {
    pub fn new(
        space: &Arc<FiniteMetricSpace>,
        classes: Vec<String>,
        priors: Vec<Rational>,
        conditionals: Vec<DiscreteMeasure>,
        hypotheses: Vec<String>,
        loss: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidLossProblem(msg));
        let k = classes.len();
        if k == 0 {
            return bad("no classes".into());
        }
        if priors.len() != k || conditionals.len() != k {
            return bad(format!("expected {k} priors and conditionals"));
        }
        if priors.iter().any(|p| p.is_negative()) || !num::sum(&priors).is_one() {
            return bad("priors must be nonnegative and sum to 1".into());
        }
        for (y, c) in conditionals.iter().enumerate() {
            if !same_space(c.space(), space) {
                return Err(Error::SpaceMismatch);
            }
            if !c.is_probability() {
                return bad(format!("conditional for class {} is not a probability measure", classes[y]));
            }
        }
        if hypotheses.is_empty() || loss.len() != hypotheses.len() {
            return bad("loss table must have one entry per hypothesis".into());
        }
        for (w, table) in loss.iter().enumerate() {
            if table.len() != k || table.iter().any(|col| col.len() != space.n()) {
                return bad(format!("loss table for {} must be classes x points", hypotheses[w]));
            }
            if table.iter().flatten().any(|v| v.is_negative()) {
                return bad(format!("negative loss for {}", hypotheses[w]));
            }
        }
        Ok(Self { space: space.clone(), classes, priors, conditionals, hypotheses, loss })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn hypothesis_index(&self, w: &str) -> Result<usize> {
        self.hypotheses.iter().position(|h| h == w).ok_or_else(|| Error::UnknownHypothesis(w.to_string()))
    }

    /// Loss column `ℓ(·, y, w)`.
    pub fn column(&self, w: usize, y: usize) -> &[Rational] {
        &self.loss[w][y]
    }

    pub fn prior(&self, y: usize) -> &Rational {
        &self.priors[y]
    }

    pub fn conditional(&self, y: usize) -> &DiscreteMeasure {
        &self.conditionals[y]
    }
}

/// A row-stochastic kernel per class, supported on the `ε`-balls.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernelSet {
    kernels: Vec<Vec<Vec<Rational>>>,
}

impl MarkovKernelSet {
    pub fn new(space: &FiniteMetricSpace, epsilon: &Rational, kernels: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let n = space.n();
        for kernel in &kernels {
            if kernel.len() != n || kernel.iter().any(|row| row.len() != n) {
                return Err(Error::InvalidParameter { what: "kernel", constraint: "n x n", value: "ragged".into() });
            }
            for (x, row) in kernel.iter().enumerate() {
                if row.iter().any(|v| v.is_negative()) || !num::sum(row).is_one() {
                    return Err(Error::InvalidParameter {
                        what: "kernel row",
                        constraint: "a probability vector",
                        value: format!("row {x}"),
                    });
                }
                if let Some(y) = (0..n).find(|&y| !row[y].is_zero() && !space.within(x, y, epsilon)) {
                    return Err(Error::InvalidParameter {
                        what: "kernel support",
                        constraint: "d(x, x') <= epsilon",
                        value: format!("({x}, {y})"),
                    });
                }
            }
        }
        Ok(Self { kernels })
    }

    pub fn kernel(&self, y: usize) -> &[Vec<Rational>] {
        &self.kernels[y]
    }

    pub fn classes(&self) -> usize {
        self.kernels.len()
    }
}

/// Which formulation [`risk_general`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskMode {
    /// Expected pointwise worst-case loss.
    Sup,
    /// Best deterministic perturbation maps.
    Maps,
    /// Best Markov kernels.
    Kernels,
    /// Worst distribution in the W∞ ball.
    Ball,
}

impl RiskMode {
    pub const ALL: [RiskMode; 4] = [RiskMode::Sup, RiskMode::Maps, RiskMode::Kernels, RiskMode::Ball];

    pub fn name(self) -> &'static str {
        match self {
            RiskMode::Sup => "sup",
            RiskMode::Maps => "maps",
            RiskMode::Kernels => "kernels",
            RiskMode::Ball => "ball",
        }
    }
}

/// Risk of `kernels` applied to the class conditionals: `Σ_y ρ_y Σ_x ρ(x|y) Σ_x′ κ_y(x, x′) ℓ(x′, y, w)`.
pub fn kernel_risk(problem: &LossProblem, w: usize, kernels: &MarkovKernelSet) -> Rational {
    let n = problem.space.n();
    let mut total = Rational::zero();
    for y in 0..problem.classes.len() {
        let k = kernels.kernel(y);
        let col = problem.column(w, y);
        let mut class_risk = Rational::zero();
        for x in 0..n {
            let cond = problem.conditional(y).at(x);
            if cond.is_zero() {
                continue;
            }
            let inner = (0..n).fold(Rational::zero(), |acc, x2| acc + &k[x][x2] * &col[x2]);
            class_risk += cond * inner;
        }
        total += problem.prior(y) * class_risk;
    }
    total
}

/// Risk of deterministic maps, `map[y][x]` being the perturbed point.
pub fn map_risk(problem: &LossProblem, w: usize, maps: &[Vec<usize>]) -> Result<Rational> {
    let mut total = Rational::zero();
    for (y, map) in maps.iter().enumerate() {
        let pushed = push_forward(problem.conditional(y), map)?;
        let col = problem.column(w, y);
        let e = pushed.mass().iter().zip(col).fold(Rational::zero(), |acc, (p, l)| acc + p * l);
        total += problem.prior(y) * e;
    }
    Ok(total)
}

/// Optimal kernel: each row spreads uniformly over the ball maximizers.
pub fn optimal_kernels(problem: &LossProblem, w: usize, epsilon: &Rational) -> Result<MarkovKernelSet> {
    let space = &problem.space;
    let n = space.n();
    let kernels = (0..problem.classes.len())
        .map(|y| {
            let col = problem.column(w, y);
            (0..n)
                .map(|x| {
                    let ball = space.ball(x, epsilon);
                    let best = ball.iter().map(|&j| &col[j]).max().expect("nonempty ball");
                    let argmax: Vec<usize> = ball.iter().copied().filter(|&j| &col[j] == best).collect();
                    let share = num::ratio(1, argmax.len() as i64);
                    let mut row = vec![Rational::zero(); n];
                    for j in argmax {
                        row[j] = share.clone();
                    }
                    row
                })
                .collect()
        })
        .collect();
    MarkovKernelSet::new(space, epsilon, kernels)
}

pub fn risk_general(problem: &LossProblem, w: &str, epsilon: &Rational, mode: RiskMode) -> Result<Rational> {
    transport::check_budget(epsilon)?;
    let wi = problem.hypothesis_index(w)?;
    let classes = 0..problem.classes.len();
    match mode {
        RiskMode::Sup => {
            let mut total = Rational::zero();
            for y in classes {
                let worst = worst_case_loss(&problem.space, problem.column(wi, y), epsilon)?;
                let e = problem.conditional(y).mass().iter().zip(&worst).fold(Rational::zero(), |a, (p, l)| a + p * l);
                total += problem.prior(y) * e;
            }
            Ok(total)
        }
        RiskMode::Maps => {
            let maps: Vec<Vec<usize>> = classes
                .map(|y| {
                    (0..problem.space.n())
                        .map(|x| transport::argmax_in_ball(&problem.space, problem.column(wi, y), x, epsilon))
                        .collect()
                })
                .collect();
            map_risk(problem, wi, &maps)
        }
        RiskMode::Kernels => Ok(kernel_risk(problem, wi, &optimal_kernels(problem, wi, epsilon)?)),
        RiskMode::Ball => {
            let mut total = Rational::zero();
            for y in classes {
                let (v, _) = transport::ball_sup_expectation(problem.conditional(y), problem.column(wi, y), epsilon)?;
                total += problem.prior(y) * v;
            }
            Ok(total)
        }
    }
}
