//! Optimal adversarial risk `inf_A R_{⊕ε}(A)`.
//!
//! With `T·p₀(X) ≥ p₁(X)` (otherwise the labels are swapped), the optimum is
//! `[1 − T_{c_ε}(p₁, T·p₀)] / (T + 1)` where `T_{c_ε}` is the unbalanced
//! `{0,1}`-cost transport of [`transport::unbalanced_cost`]. The dual set `B`
//! from its min cut yields the candidate region `A* = B^{⊕ε}`.
//!
//! The identity needs `(B^{⊕ε})^{⊕ε} ⊇ B^{⊕2ε}`, which on a finite space is
//! exactly ε-midpoint completeness. Otherwise the formula only bounds the
//! optimum from above, and [`optimal_risk`] falls back to enumeration.

use num_traits::One;

use crate::error::Result;
use crate::measure::DiscreteMeasure;
use crate::metric::{self, BitBalls, DecisionRegion};
use crate::num::Rational;
use crate::risk::{self, GameInstance};
use crate::transport::{self, check_enumerable, enumerate_max, Coupling};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeUsed {
    Formula,
    Bruteforce,
    Both,
}

impl ModeUsed {
    pub fn name(self) -> &'static str {
        match self {
            ModeUsed::Formula => "formula",
            ModeUsed::Bruteforce => "bruteforce",
            ModeUsed::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalRiskReport {
    /// Best available value of the optimal risk.
    pub value: Rational,
    /// Region attaining `value`.
    pub witness: DecisionRegion,
    /// Strassen maximizer `B`, in the original labelling when not swapped.
    pub dual_set: DecisionRegion,
    pub mode_used: ModeUsed,
    /// Formula and enumeration agree (present when both ran).
    pub agreement: Option<bool>,
    pub value_formula: Rational,
    pub value_bruteforce: Option<Rational>,
    pub midpoint_complete: bool,
    /// Labels were exchanged because `T·p₀(X) < p₁(X)`.
    pub swapped: bool,
    /// The formula witness reproduces the formula value.
    pub witness_certified: bool,
    /// Optimal unbalanced coupling behind the formula, in the possibly swapped labelling.
    pub coupling: Coupling,
}

/// Output of the transport route alone.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaOutcome {
    pub value: Rational,
    pub witness: DecisionRegion,
    pub dual_set: DecisionRegion,
    pub swapped: bool,
    pub coupling: Coupling,
}

fn needs_swap(inst: &GameInstance) -> bool {
    inst.p0().total() * inst.t() < inst.p1().total()
}

/// Optimal risk through unbalanced transport, with the witness `A* = B^{⊕ε}`.
pub fn optimal_risk_formula(inst: &GameInstance) -> Result<FormulaOutcome> {
    let swapped = needs_swap(inst);
    let work = if swapped { inst.swapped() } else { inst.clone() };
    let heavy: DiscreteMeasure = work.p0().scale(work.t());
    let cost = transport::unbalanced_cost(work.p1(), &heavy, work.epsilon())?;
    let value = (work.p1().total() - cost.value) / (work.t() + Rational::one());
    let dual_set = cost.witness_set.expect("threshold transport returns a witness");
    let grown = metric::expand(&dual_set, work.epsilon());
    let witness = if swapped { grown.complement() } else { grown };
    Ok(FormulaOutcome { value, witness, dual_set, swapped, coupling: cost.coupling })
}

/// Exhaustive minimum of the expansion risk, lexicographically least argmin.
pub fn optimal_risk_bruteforce(inst: &GameInstance) -> Result<(Rational, DecisionRegion)> {
    let space = inst.space();
    let n = space.n();
    check_enumerable(n)?;
    let balls = BitBalls::new(space, inst.epsilon());
    let full = metric::full_bits(n);
    let (w0, w1) = inst.weights();
    let (m0, m1) = (inst.p0().subset_masses(), inst.p1().subset_masses());
    let (neg, bits) = enumerate_max(n, |a| {
        let risk = &w0 * &m0[balls.expand(a) as usize] + &w1 * &m1[balls.expand(!a & full) as usize];
        -risk
    });
    Ok((-neg, DecisionRegion::from_bits(space, bits)))
}

fn assemble(inst: &GameInstance, force_both: bool) -> Result<OptimalRiskReport> {
    let formula = optimal_risk_formula(inst)?;
    let midpoint_complete = metric::is_midpoint_complete(inst.space(), inst.epsilon()).complete;
    let witness_certified = risk::risk_expansion(inst, &formula.witness)? == formula.value;
    let trusted = midpoint_complete && witness_certified;
    let enumerable = inst.space().n() <= transport::ENUMERATION_LIMIT;
    if (trusted && !force_both) || !enumerable {
        return Ok(OptimalRiskReport {
            value: formula.value.clone(),
            witness: formula.witness,
            dual_set: formula.dual_set,
            mode_used: ModeUsed::Formula,
            agreement: None,
            value_formula: formula.value,
            value_bruteforce: None,
            midpoint_complete,
            swapped: formula.swapped,
            witness_certified,
            coupling: formula.coupling,
        });
    }
    let (brute, argmin) = optimal_risk_bruteforce(inst)?;
    let agreement = brute == formula.value;
    let (value, witness) = if agreement && witness_certified {
        (formula.value.clone(), formula.witness)
    } else {
        (brute.clone(), argmin)
    };
    Ok(OptimalRiskReport {
        value,
        witness,
        dual_set: formula.dual_set,
        mode_used: ModeUsed::Both,
        agreement: Some(agreement),
        value_formula: formula.value,
        value_bruteforce: Some(brute),
        midpoint_complete,
        swapped: formula.swapped,
        witness_certified,
        coupling: formula.coupling,
    })
}

/// Optimal risk with witness region.
///
/// Uses the transport formula when the instance is ε-midpoint-complete and its
/// witness reproduces the value; otherwise enumerates regions (`n ≤ 20`).
/// Larger spaces without midpoints get the formula value, which can then only
/// overestimate the optimum.
pub fn optimal_risk(inst: &GameInstance) -> Result<OptimalRiskReport> {
    assemble(inst, false)
}

/// Runs both routes regardless of the midpoint predicate (`n ≤ 20`).
pub fn optimal_risk_both(inst: &GameInstance) -> Result<OptimalRiskReport> {
    check_enumerable(inst.space().n())?;
    assemble(inst, true)
}
