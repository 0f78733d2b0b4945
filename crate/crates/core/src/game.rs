//! Zero-sum game between a classifier choosing a region `A` and an adversary
//! choosing `(p₀′, p₁′)` in the W∞ `ε`-balls of `(p₀, p₁)`.
//!
//! The payoff is `T/(T+1)·p₀′(A) + 1/(T+1)·p₁′(Aᶜ)`. The inf-sup value is the
//! optimal adversarial risk. The sup-inf value maximizes the Bayes risk
//! `1/(T+1)·Σ min(T·p₀′, p₁′)` over the balls, which is a max-flow on
//!
//! ```text
//! s --T·p₀(j)--> u_j --d(j,x)≤ε--> v_x --d(x,k)≤ε--> w_k --p₁(k)--> t
//! ```
//!
//! Flow through `v_x` is mass both perturbed measures place at `x`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::flow::{self, Capacity, FlowNetwork};
use crate::measure::{self, DiscreteMeasure};
use crate::metric::{self, DecisionRegion, FiniteMetricSpace};
use crate::num::{self, Rational};
use crate::optimal::{self, OptimalRiskReport};
use crate::risk::{self, GameInstance};
use crate::transport;

fn weights(t: &Rational) -> (Rational, Rational) {
    let denom = (t + Rational::one()).recip();
    (t * &denom, denom)
}

fn probabilities(p0p: &DiscreteMeasure, p1p: &DiscreteMeasure) -> Result<()> {
    p0p.check_same(p1p)?;
    p0p.require_probability("p0")?;
    p1p.require_probability("p1")
}

/// `T/(T+1)·p₀′(A) + 1/(T+1)·p₁′(Aᶜ)`.
pub fn payoff(region: &DecisionRegion, p0p: &DiscreteMeasure, p1p: &DiscreteMeasure, t: &Rational) -> Result<Rational> {
    probabilities(p0p, p1p)?;
    let (w0, w1) = weights(t);
    Ok(w0 * measure::measure_of(p0p, region)? + w1 * measure::measure_of(p1p, &region.complement())?)
}

/// Bayes region `{x : p₁′(x) > T·p₀′(x)}` and the Bayes risk.
pub fn classifier_best_response(
    p0p: &DiscreteMeasure,
    p1p: &DiscreteMeasure,
    t: &Rational,
) -> Result<(DecisionRegion, Rational)> {
    probabilities(p0p, p1p)?;
    let space = p0p.space();
    let mask = (0..space.n()).map(|x| p1p.at(x) > &(t * p0p.at(x))).collect();
    let region = DecisionRegion::from_mask(space, mask)?;
    let value = bayes_risk(p0p, p1p, t)?;
    let direct = payoff(&region, p0p, p1p, t)?;
    if direct != value {
        return Err(Error::Certificate(format!(
            "Bayes region payoff {} differs from the overlap value {}",
            num::format_rational(&direct),
            num::format_rational(&value)
        )));
    }
    Ok((region, value))
}

/// `1/(T+1)·Σ min(T·p₀′(x), p₁′(x))`.
pub fn bayes_risk(p0p: &DiscreteMeasure, p1p: &DiscreteMeasure, t: &Rational) -> Result<Rational> {
    Ok(measure::min_overlap(&p0p.scale(t), p1p)? / (t + Rational::one()))
}

/// Worst-case perturbations against a fixed region.
pub fn adversary_best_response(
    inst: &GameInstance,
    region: &DecisionRegion,
) -> Result<(DiscreteMeasure, DiscreteMeasure, Rational)> {
    let (value, (worst0, worst1)) = risk::risk_winf_ball(inst, region)?;
    let expanded = risk::risk_expansion(inst, region)?;
    let direct = payoff(region, &worst0, &worst1, inst.t())?;
    if value != expanded || direct != value {
        return Err(Error::Certificate(format!(
            "adversary value {} differs from the expansion risk {}",
            num::format_rational(&value),
            num::format_rational(&expanded)
        )));
    }
    Ok((worst0, worst1, value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupInf {
    pub value: Rational,
    /// Max-flow value of the layered network.
    pub flow_value: Rational,
    pub p0_star: DiscreteMeasure,
    pub p1_star: DiscreteMeasure,
    /// Bayes risk of the reconstructed pair.
    pub bayes_value: Rational,
    pub flow_matches_bayes: bool,
}

/// `sup` over the balls of the Bayes risk, with a maximizing pair.
pub fn supinf_value(inst: &GameInstance) -> Result<SupInf> {
    let space = inst.space();
    let n = space.n();
    let (eps, t) = (inst.epsilon(), inst.t());
    let u = |j: usize| 1 + j;
    let v = |x: usize| 1 + n + x;
    let w = |k: usize| 1 + 2 * n + k;
    let sink = 3 * n + 1;
    let mut net = FlowNetwork::new(3 * n + 2, 0, sink);
    for j in 0..n {
        net.add_finite(0, u(j), t * inst.p0().at(j));
    }
    for k in 0..n {
        net.add_finite(w(k), sink, inst.p1().at(k).clone());
    }
    let near = space.within_matrix(eps);
    // Self arcs first, so mass only moves when it has to.
    let neighbours = |i: usize| -> Vec<usize> {
        std::iter::once(i).chain((0..n).filter(|&j| j != i)).filter(|&j| near[i * n + j]).collect()
    };
    let mut first = Vec::new();
    let mut second = Vec::new();
    for j in 0..n {
        for x in neighbours(j) {
            first.push((j, x, net.add_arc(u(j), v(x), Capacity::Unbounded)));
        }
    }
    for x in 0..n {
        for k in neighbours(x) {
            second.push((x, k, net.add_arc(v(x), w(k), Capacity::Unbounded)));
        }
    }
    let res = flow::max_flow(&net)?;

    let t_inv = t.recip();
    let mut mass0: Vec<Rational> = inst.p0().mass().to_vec();
    for &(j, x, k) in &first {
        let f = &res.arc_flows[k];
        if !f.is_zero() {
            let moved = f * &t_inv;
            mass0[j] -= &moved;
            mass0[x] += moved;
        }
    }
    let mut mass1: Vec<Rational> = inst.p1().mass().to_vec();
    for &(x, k, a) in &second {
        let f = &res.arc_flows[a];
        if !f.is_zero() {
            mass1[k] -= f;
            mass1[x] += f;
        }
    }
    let p0_star = DiscreteMeasure::new(space, mass0)?;
    let p1_star = DiscreteMeasure::new(space, mass1)?;
    if !transport::in_winf_ball(&p0_star, inst.p0(), eps)? || !transport::in_winf_ball(&p1_star, inst.p1(), eps)? {
        return Err(Error::Certificate("layered-flow measure left its W∞ ball".into()));
    }
    let value = &res.value / (t + Rational::one());
    let bayes_value = bayes_risk(&p0_star, &p1_star, t)?;
    if bayes_value < value {
        return Err(Error::Certificate(format!(
            "reconstructed Bayes risk {} below the flow bound {}",
            num::format_rational(&bayes_value),
            num::format_rational(&value)
        )));
    }
    let flow_matches_bayes = bayes_value == value;
    Ok(SupInf { value, flow_value: res.value, p0_star, p1_star, bayes_value, flow_matches_bayes })
}

/// `inf_A sup` payoff, i.e. the optimal adversarial risk.
pub fn infsup_value(inst: &GameInstance) -> Result<OptimalRiskReport> {
    optimal::optimal_risk(inst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashCertificate {
    pub p0_star: DiscreteMeasure,
    pub p1_star: DiscreteMeasure,
    pub a_star: DecisionRegion,
    pub value_supinf: Rational,
    pub value_infsup: Rational,
    /// Worst-case payoff of `A*` over the balls.
    pub adversary_value: Rational,
    /// `r(A*, p₀*, p₁*)`.
    pub payoff_value: Rational,
    /// Bayes risk of `(p₀*, p₁*)`.
    pub classifier_value: Rational,
    pub delta_achieved: Rational,
    pub midpoint_complete: bool,
}

/// Assembles `(p₀*, p₁*, A*)` and measures how far it is from a pure equilibrium.
pub fn nash_construct(inst: &GameInstance) -> Result<NashCertificate> {
    let sup = supinf_value(inst)?;
    let inf = infsup_value(inst)?;
    let a_star = inf.witness;
    let t = inst.t();
    let adversary_value = risk::risk_expansion(inst, &a_star)?;
    let payoff_value = payoff(&a_star, &sup.p0_star, &sup.p1_star, t)?;
    let (_, classifier_value) = classifier_best_response(&sup.p0_star, &sup.p1_star, t)?;
    let delta_achieved = (&adversary_value - &payoff_value)
        .max(&payoff_value - &classifier_value)
        .max(Rational::zero());
    if sup.value > inf.value {
        return Err(Error::Certificate(format!(
            "sup-inf {} exceeds inf-sup {}",
            num::format_rational(&sup.value),
            num::format_rational(&inf.value)
        )));
    }
    if inf.midpoint_complete && (sup.value != inf.value || !delta_achieved.is_zero()) {
        return Err(Error::Certificate(format!(
            "midpoint-complete instance with sup-inf {}, inf-sup {}, delta {}",
            num::format_rational(&sup.value),
            num::format_rational(&inf.value),
            num::format_rational(&delta_achieved)
        )));
    }
    Ok(NashCertificate {
        p0_star: sup.p0_star,
        p1_star: sup.p1_star,
        a_star,
        value_supinf: sup.value,
        value_infsup: inf.value,
        adversary_value,
        payoff_value,
        classifier_value,
        delta_achieved,
        midpoint_complete: inf.midpoint_complete,
    })
}

fn midpoint_or_fail(space: &FiniteMetricSpace, x: usize, y: usize, eps: &Rational) -> Result<usize> {
    let (m, radius) = metric::midpoint(space, x, y)?;
    if radius.within(eps) {
        Ok(m)
    } else {
        Err(Error::NotMidpointComplete { x, y })
    }
}

/// Equal priors: moves both ends of every cheap pair of an optimal `D_ε`
/// coupling to their midpoint, giving a pair at total variation `D_ε(p₀, p₁)`.
pub fn nash_midpoint_construct(inst: &GameInstance) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    if !inst.t().is_one() {
        return Err(Error::PriorNotEqual(num::format_rational(inst.t())));
    }
    let space = inst.space();
    let eps = inst.epsilon();
    let report = metric::is_midpoint_complete(space, eps);
    if let Some((x, y)) = report.witness {
        return Err(Error::NotMidpointComplete { x, y });
    }
    let d = transport::d_epsilon(inst.p0(), inst.p1(), eps)?;
    let two_eps = eps * num::int(2);
    let n = space.n();
    let mut mass0 = vec![Rational::zero(); n];
    let mut mass1 = vec![Rational::zero(); n];
    for (i, j, m) in d.coupling.sparse() {
        if space.within(i, j, &two_eps) {
            let mid = midpoint_or_fail(space, i, j, eps)?;
            mass0[mid] += &m;
            mass1[mid] += m;
        } else {
            mass0[i] += &m;
            mass1[j] += m;
        }
    }
    let p0_star = DiscreteMeasure::new(space, mass0)?;
    let p1_star = DiscreteMeasure::new(space, mass1)?;
    let tv = measure::total_variation(&p0_star, &p1_star)?;
    if tv != d.value
        || !transport::in_winf_ball(&p0_star, inst.p0(), eps)?
        || !transport::in_winf_ball(&p1_star, inst.p1(), eps)?
    {
        return Err(Error::Certificate(format!(
            "midpoint pair has total variation {} against D_eps {}",
            num::format_rational(&tv),
            num::format_rational(&d.value)
        )));
    }
    Ok((p0_star, p1_star))
}

/// `p₀′ = p₀ + q′/T − q/T` for `q ⪯ T·p₀` and `q′` a short move of `q`.
///
/// Checks that `p₀′` is a probability measure, dominates `q′/T` and lies in
/// the `ε`-ball of `p₀`.
pub fn construct_p0_prime(
    p0: &DiscreteMeasure,
    q: &DiscreteMeasure,
    q_prime: &DiscreteMeasure,
    t: &Rational,
    epsilon: &Rational,
) -> Result<DiscreteMeasure> {
    p0.check_same(q)?;
    p0.check_same(q_prime)?;
    let t_inv = t.recip();
    let mass = (0..p0.space().n()).map(|x| p0.at(x) + (q_prime.at(x) - q.at(x)) * &t_inv).collect();
    let p0_prime = DiscreteMeasure::new(p0.space(), mass)?;
    p0_prime.require_probability("constructed p0'")?;
    let scaled = q_prime.scale(&t_inv);
    if !measure::dominates(&scaled, &p0_prime)? {
        return Err(Error::Certificate("constructed p0' does not dominate q'/T".into()));
    }
    if !transport::in_winf_ball(&p0_prime, p0, epsilon)? {
        return Err(Error::Certificate("constructed p0' left the ball around p0".into()));
    }
    Ok(p0_prime)
}

/// Perturbed pair built from an optimal unbalanced coupling by midpoint moves.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedPair {
    pub p0_prime: DiscreteMeasure,
    pub p1_prime: DiscreteMeasure,
    /// `p₁(X) − Σ min(T·p₀′, p₁′)`, at most the transport value.
    pub residual: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredBallReport {
    /// `inf_{q ⪯ T·p₀} D_ε(q, p₁)`.
    pub transport_value: Rational,
    /// `inf` over both balls of `inf_{q ⪯ T·p₀′} D_0(q, p₁′)`, which is `1 − (T+1)·supinf`.
    pub ball_value: Rational,
    pub equal: bool,
    pub midpoint_complete: bool,
    /// Present on midpoint-complete instances.
    pub constructed: Option<ConstructedPair>,
}

/// Compares unbalanced transport between the centers with the best total
/// variation between the balls.
pub fn layered_ball_check(inst: &GameInstance) -> Result<LayeredBallReport> {
    let t = inst.t();
    if t < &Rational::one() {
        return Err(Error::InvalidParameter { what: "T", constraint: ">= 1", value: num::format_rational(t) });
    }
    let space = inst.space();
    let eps = inst.epsilon();
    let heavy = inst.p0().scale(t);
    let cost = transport::unbalanced_cost(inst.p1(), &heavy, eps)?;
    let sup = supinf_value(inst)?;
    let ball_value = Rational::one() - (t + Rational::one()) * &sup.value;
    let midpoint_complete = metric::is_midpoint_complete(space, eps).complete;

    let constructed = if midpoint_complete {
        let two_eps = eps * num::int(2);
        let n = space.n();
        let mut moved_q = vec![Rational::zero(); n];
        let mut moved_p1 = vec![Rational::zero(); n];
        for (i, j, m) in cost.coupling.sparse() {
            if space.within(i, j, &two_eps) {
                let mid = midpoint_or_fail(space, i, j, eps)?;
                moved_q[mid] += &m;
                moved_p1[mid] += m;
            } else {
                moved_q[j] += &m;
                moved_p1[i] += m;
            }
        }
        let q = cost.coupling.column_marginal();
        let q_prime = DiscreteMeasure::new(space, moved_q)?;
        let p0_prime = construct_p0_prime(inst.p0(), &q, &q_prime, t, eps)?;
        let p1_prime = DiscreteMeasure::new(space, moved_p1)?;
        if !transport::in_winf_ball(&p1_prime, inst.p1(), eps)? {
            return Err(Error::Certificate("constructed p1' left the ball around p1".into()));
        }
        let residual = Rational::one() - measure::min_overlap(&p0_prime.scale(t), &p1_prime)?;
        if residual > cost.value {
            return Err(Error::Certificate(format!(
                "constructed pair leaves {} unmatched, more than {}",
                num::format_rational(&residual),
                num::format_rational(&cost.value)
            )));
        }
        Some(ConstructedPair { p0_prime, p1_prime, residual })
    } else {
        None
    };

    Ok(LayeredBallReport {
        equal: cost.value == ball_value,
        transport_value: cost.value,
        ball_value,
        midpoint_complete,
        constructed,
    })
}
