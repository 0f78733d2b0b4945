//! Randomized cross-checks between independent pipelines.
//!
//! Each [`CheckName`] compares two computations of the same quantity over a
//! stream of generated instances. Checks whose conclusion needs ε-midpoint
//! completeness still test what holds unconditionally, then record the
//! instance as skipped rather than failed.

mod checks;
mod generator;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{check_instance, random_loss_problem, CheckName, Outcome};
pub use generator::{EpsilonRule, GeneratedInstance, InstanceGenerator, MassStyle, SpaceFamily};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::metric::DecisionRegion;
use crate::num::{Num, Rational};
use crate::scenario::Scenario;
use crate::transport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Every instance missed the precondition.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: u64,
    /// Replays the failure with `check_instance` on `(seed, index)`.
    pub scenario: Scenario,
    pub lhs: Option<Num>,
    pub rhs: Option<Num>,
    pub gap: Option<Num>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipEntry {
    pub index: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: CheckName,
    pub seed: u64,
    pub instances_run: u64,
    pub passed: u64,
    pub skipped: Vec<SkipEntry>,
    pub failures: Vec<Failure>,
    pub status: Status,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Generator settings used by `run_suite` for each check.
pub fn default_generator(check: CheckName, seed: u64) -> InstanceGenerator {
    let base = InstanceGenerator::new(seed);
    match check {
        CheckName::Strassen | CheckName::Capacity | CheckName::ChainIneq => {
            base.with_epsilon_rule(EpsilonRule::Arbitrary)
        }
        CheckName::Minimax => base.with_n_range(2, 10).with_epsilon_rule(EpsilonRule::Arbitrary),
        CheckName::OptimalRisk | CheckName::LayeredBalls => base,
        CheckName::ShortestTv => base.with_n_range(2, 10),
        CheckName::BallIdentity | CheckName::RiskEquivalence | CheckName::ExpansionAlgebra => {
            base.with_n_range(2, 8).with_epsilon_rule(EpsilonRule::Arbitrary)
        }
    }
}

fn outcome_of(check: CheckName, generator: &InstanceGenerator, index: u64) -> (Option<GeneratedInstance>, Outcome) {
    match generator.instance(index) {
        Ok(item) => {
            let outcome = check_instance(check, &item);
            (Some(item), outcome)
        }
        Err(e) => (None, Outcome::Fail { lhs: None, rhs: None, detail: format!("generator: {e}") }),
    }
}

/// Runs `check` on instances `0..count` of `generator`, on `jobs` workers.
/// The report does not depend on `jobs`.
pub fn run_check(check: CheckName, generator: &InstanceGenerator, count: u64, jobs: usize) -> Result<CheckReport> {
    if count == 0 {
        return Err(Error::InvalidParameter { what: "count", constraint: ">= 1", value: "0".into() });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter { what: "jobs", constraint: "a usable worker count", value: e.to_string() })?;
    let outcomes: Vec<_> =
        pool.install(|| (0..count).into_par_iter().map(|i| outcome_of(check, generator, i)).collect());

    let mut report = CheckReport {
        check_name: check,
        seed: generator.seed,
        instances_run: count,
        passed: 0,
        skipped: Vec::new(),
        failures: Vec::new(),
        status: Status::Pass,
    };
    for (index, (item, outcome)) in (0..count).zip(outcomes) {
        match outcome {
            Outcome::Pass => report.passed += 1,
            Outcome::Skipped(reason) => report.skipped.push(SkipEntry { index, reason }),
            Outcome::Fail { lhs, rhs, detail } => {
                let Some(item) = item else {
                    return Err(Error::Certificate(detail));
                };
                let gap = match (&lhs, &rhs) {
                    (Some(l), Some(r)) => Some(Num(l - r)),
                    _ => None,
                };
                report.failures.push(Failure {
                    index,
                    scenario: Scenario::from_instance(item.spec.clone(), &item.instance),
                    lhs: lhs.map(Num),
                    rhs: rhs.map(Num),
                    gap,
                    detail,
                });
            }
        }
    }
    report.status = if !report.failures.is_empty() {
        Status::Fail
    } else if report.passed == 0 {
        Status::Skipped
    } else {
        Status::Pass
    };
    Ok(report)
}

/// Runs each check with its default generator; reports sorted by check name.
pub fn run_suite(checks: &[CheckName], seed: u64, count: u64, jobs: usize) -> Result<Vec<CheckReport>> {
    let mut reports = checks
        .iter()
        .map(|&c| run_check(c, &default_generator(c, seed), count, jobs))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.check_name.name().cmp(b.check_name.name()).then(a.seed.cmp(&b.seed)));
    Ok(reports)
}

/// Instance where the Minkowski form and the two-sided dual disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRecord {
    /// `sup_A μ(A^{⊖ε}) − ν(A^{⊕ε})`.
    pub minkowski_form: Rational,
    /// `sup_A μ(A) − ν(A^{⊕2ε})`.
    pub strassen_lhs: Rational,
    pub minkowski_argmax: DecisionRegion,
    pub strassen_argmax: DecisionRegion,
}

/// Compares both suprema by enumeration (`n ≤ 20`); `None` when they agree.
pub fn probe_midpoint_gap(mu: &DiscreteMeasure, nu: &DiscreteMeasure, epsilon: &Rational) -> Result<Option<GapRecord>> {
    let (minkowski_form, minkowski_argmax) = transport::minkowski_form_bruteforce(mu, nu, epsilon)?;
    let (strassen_lhs, strassen_argmax) = transport::strassen_lhs_bruteforce(mu, nu, epsilon)?;
    Ok((minkowski_form != strassen_lhs).then_some(GapRecord {
        minkowski_form,
        strassen_lhs,
        minkowski_argmax,
        strassen_argmax,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FiniteMetricSpace, SpaceSpec};
    use crate::num::{int, ratio};
    use crate::risk::GameInstance;
    use std::sync::Arc;

    fn gap_item() -> GeneratedInstance {
        let spec = SpaceSpec::Grid1d { n: 4 };
        let s = FiniteMetricSpace::build(&spec).unwrap();
        let inst = GameInstance::new(
            DiscreteMeasure::dirac(&s, 0).unwrap(),
            DiscreteMeasure::dirac(&s, 3).unwrap(),
            int(1),
            ratio(3, 2),
        )
        .unwrap();
        GeneratedInstance::new(0, 0, spec, inst)
    }

    #[test]
    fn probe_examples() {
        let s = Arc::new(FiniteMetricSpace::grid_1d(4).unwrap());
        let d = |i| DiscreteMeasure::dirac(&s, i).unwrap();
        let gap = probe_midpoint_gap(&d(3), &d(0), &ratio(3, 2)).unwrap().unwrap();
        assert_eq!((gap.minkowski_form, gap.strassen_lhs), (int(1), int(0)));
        assert!(probe_midpoint_gap(&d(3), &d(0), &int(1)).unwrap().is_none());
        assert!(probe_midpoint_gap(&d(3), &d(0), &int(0)).unwrap().is_none());
    }

    #[test]
    fn gap_instance_is_skipped_not_failed() {
        let item = gap_item();
        for check in CheckName::ALL.into_iter().filter(|c| c.midpoint_gated()) {
            assert!(matches!(check_instance(check, &item), Outcome::Skipped(_)), "{}", check.name());
        }
    }

    #[test]
    fn names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(CheckName::parse(c.name()).unwrap(), c);
        }
        assert!(matches!(CheckName::parse("nope"), Err(Error::UnknownCheck(_))));
    }

    #[test]
    fn reports_do_not_depend_on_workers() {
        let g = default_generator(CheckName::Minimax, 5);
        let one = run_check(CheckName::Minimax, &g, 12, 1).unwrap();
        let four = run_check(CheckName::Minimax, &g, 12, 4).unwrap();
        assert_eq!(one, four);
        assert!(one.ok());
    }

    #[test]
    fn every_check_passes_a_short_run() {
        for c in CheckName::ALL {
            let report = run_check(c, &default_generator(c, 11), 6, 2).unwrap();
            assert!(report.ok(), "{}: {:?}", c.name(), report.failures);
        }
    }
}
