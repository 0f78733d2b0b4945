//! Invariants over small random instances.

use std::sync::Arc;

use advrisk::game;
use advrisk::measure::{self, total_variation};
use advrisk::metric::{self, GridNorm};
use advrisk::num::{int, ratio};
use advrisk::optimal;
use advrisk::risk;
use advrisk::scenario::Scenario;
use advrisk::transport;
use advrisk::{DecisionRegion, DiscreteMeasure, Distance, FiniteMetricSpace, GameInstance, Rational, SpaceSpec};
use proptest::prelude::*;

/// Grid spec and point count.
fn space_spec() -> impl Strategy<Value = SpaceSpec> {
    prop_oneof![
        (2usize..=7).prop_map(|n| SpaceSpec::Grid1d { n }),
        (1usize..=3, 2usize..=3, prop_oneof![Just(GridNorm::L1), Just(GridNorm::Linf)])
            .prop_map(|(width, height, norm)| SpaceSpec::Grid2d { width, height, norm }),
    ]
}

fn probability(space: &Arc<FiniteMetricSpace>, weights: &[u8]) -> DiscreteMeasure {
    let mut w: Vec<Rational> = weights.iter().take(space.n()).map(|&x| int(x as i64)).collect();
    w.resize(space.n(), int(0));
    if w.iter().all(|x| *x == int(0)) {
        w[0] = int(1);
    }
    DiscreteMeasure::new(space, w).unwrap().normalize().unwrap()
}

#[derive(Debug, Clone)]
struct Case {
    spec: SpaceSpec,
    inst: GameInstance,
    bits: (u64, u64),
}

fn case() -> impl Strategy<Value = Case> {
    (
        space_spec(),
        prop::collection::vec(0u8..5, 9),
        prop::collection::vec(0u8..5, 9),
        prop_oneof![Just(int(1)), Just(int(2)), Just(ratio(1, 3)), Just(ratio(7, 2))],
        0i64..=6,
        any::<u64>(),
        any::<u64>(),
    )
        .prop_map(|(spec, w0, w1, t, half_eps, a, b)| {
            let space = FiniteMetricSpace::build(&spec).unwrap();
            let full = (1u64 << space.n()) - 1;
            let inst = GameInstance::new(probability(&space, &w0), probability(&space, &w1), t, ratio(half_eps, 2))
                .unwrap();
            Case { spec, inst, bits: (a & full, b & full) }
        })
}

fn region(inst: &GameInstance, bits: u64) -> DecisionRegion {
    DecisionRegion::from_bits(inst.space(), bits)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn total_variation_is_a_metric(c in case(), w in prop::collection::vec(0u8..5, 9)) {
        let (p, q) = (c.inst.p0(), c.inst.p1());
        let r = &probability(c.inst.space(), &w);
        let d = |a: &DiscreteMeasure, b: &DiscreteMeasure| total_variation(a, b).unwrap();
        prop_assert_eq!(d(p, q), d(q, p));
        prop_assert_eq!(d(p, p), int(0));
        prop_assert!(d(p, r) <= d(p, q) + d(q, r));
        prop_assert!(d(p, q) <= int(1));
        prop_assert_eq!(transport::d_epsilon(p, q, &int(0)).unwrap().value, d(p, q));
    }

    #[test]
    fn expansion_laws(c in case()) {
        let eps = c.inst.epsilon();
        let (a, b) = (region(&c.inst, c.bits.0), region(&c.inst, c.bits.1));
        let ea = metric::expand(&a, eps);
        prop_assert!(a.is_subset(&ea));
        prop_assert_eq!(metric::expand(&a, &int(0)), a.clone());
        prop_assert_eq!(metric::expand(&a.union(&b).unwrap(), eps), ea.union(&metric::expand(&b, eps)).unwrap());
        prop_assert_eq!(metric::contract(&a, eps), metric::expand(&a.complement(), eps).complement());
        let inter = a.intersection(&b).unwrap();
        prop_assert!(metric::expand(&inter, eps).is_subset(&ea));
        prop_assert!(metric::expand(&ea, eps).is_subset(&metric::expand(&a, &(eps * int(2)))));
        prop_assert_eq!(risk::closed_expansion(&a, eps), ea);
    }

    #[test]
    fn winf_balls(c in case()) {
        let (p, q, eps) = (c.inst.p0(), c.inst.p1(), c.inst.epsilon());
        prop_assert!(transport::in_winf_ball(p, p, &int(0)).unwrap());
        let (dpq, dqp) = (transport::w_infinity(p, q).unwrap(), transport::w_infinity(q, p).unwrap());
        prop_assert_eq!(&dpq, &dqp);
        let within = dpq.within(eps);
        prop_assert_eq!(transport::in_winf_ball(p, q, eps).unwrap(), within);
        let a = region(&c.inst, c.bits.0);
        let (value, argmax) = transport::ball_sup_measure(p, &a, eps).unwrap();
        prop_assert!(value >= measure::measure_of(p, &a).unwrap());
        prop_assert!(transport::in_winf_ball(&argmax, p, eps).unwrap());
        prop_assert_eq!(measure::measure_of(&argmax, &a).unwrap(), value);
        if let Distance::Exact(d) = &dpq {
            prop_assert!(transport::in_winf_ball(p, q, d).unwrap());
        }
    }

    #[test]
    fn risk_orderings(c in case()) {
        let inst = &c.inst;
        let a = region(inst, c.bits.0);
        let standard = risk::risk_standard(inst, &a).unwrap();
        let adversarial = risk::risk_expansion(inst, &a).unwrap();
        prop_assert!(standard <= adversarial);
        prop_assert_eq!(risk::risk_winf_ball(inst, &a).unwrap().0, adversarial.clone());
        let report = optimal::optimal_risk(inst).unwrap();
        let t = inst.t();
        let cap = t.clone().min(int(1)) / (t + int(1));
        prop_assert!(report.value <= adversarial);
        prop_assert!(report.value <= cap);
        prop_assert!(report.value >= game::bayes_risk(inst.p0(), inst.p1(), t).unwrap());
        let bigger = inst.with_epsilon(inst.epsilon() + ratio(1, 2)).unwrap();
        prop_assert!(optimal::optimal_risk(&bigger).unwrap().value >= report.value);
    }

    #[test]
    fn optimal_risk_routes_agree_when_complete(c in case()) {
        let report = optimal::optimal_risk_both(&c.inst).unwrap();
        let (brute, _) = optimal::optimal_risk_bruteforce(&c.inst).unwrap();
        prop_assert_eq!(&report.value, &brute);
        prop_assert!(report.value_formula >= brute);
        if report.midpoint_complete {
            prop_assert_eq!(report.agreement, Some(true));
        }
        prop_assert_eq!(risk::risk_expansion(&c.inst, &report.witness).unwrap(), report.value);
    }

    #[test]
    fn weak_duality(c in case()) {
        let sup = game::supinf_value(&c.inst).unwrap();
        let inf = game::infsup_value(&c.inst).unwrap();
        prop_assert!(sup.value <= inf.value);
        prop_assert!(transport::in_winf_ball(&sup.p0_star, c.inst.p0(), c.inst.epsilon()).unwrap());
        prop_assert!(transport::in_winf_ball(&sup.p1_star, c.inst.p1(), c.inst.epsilon()).unwrap());
    }

    #[test]
    fn unbalanced_transport_matches_enumeration(c in case(), shrink in 1i64..=4) {
        let mu = c.inst.p1().scale(&ratio(shrink, 4));
        let nu = c.inst.p0();
        let eps = c.inst.epsilon();
        let flow = transport::unbalanced_cost(&mu, nu, eps).unwrap();
        prop_assert_eq!(&flow.value, &transport::strassen_lhs_bruteforce(&mu, nu, eps).unwrap().0);
        prop_assert!(flow.coupling.satisfies_marginals(&mu, nu));
        prop_assert_eq!(flow.coupling.excess_mass(&(eps * int(2))), flow.value.clone());
        prop_assert_eq!(transport::unbalanced_rhs(&mu, &flow, eps).unwrap(), flow.value);
    }

    #[test]
    fn scenarios_round_trip(c in case()) {
        let s = Scenario::from_instance(c.spec.clone(), &c.inst);
        let back = Scenario::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(back.instance().unwrap(), c.inst);
    }
}
