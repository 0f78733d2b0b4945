//! Seeded random instances.
//!
//! Instance `i` of a generator draws from its own ChaCha stream, so a stream
//! does not depend on how many workers consume it or in which order.

use std::sync::Arc;

use num_traits::Zero;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measure::DiscreteMeasure;
use crate::metric::{FiniteMetricSpace, GridNorm, SpaceSpec};
use crate::num::{int, ratio, Num, Rational};
use crate::risk::GameInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceFamily {
    Grid1d,
    #[serde(rename = "grid2d-l1")]
    Grid2dL1,
    #[serde(rename = "grid2d-linf")]
    Grid2dLinf,
    /// Hop metric of a random connected graph.
    RandomMatrix,
}

impl SpaceFamily {
    pub const ALL: [SpaceFamily; 4] =
        [SpaceFamily::Grid1d, SpaceFamily::Grid2dL1, SpaceFamily::Grid2dLinf, SpaceFamily::RandomMatrix];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonRule {
    /// Whole-number budgets; every family here is then midpoint-complete.
    IntegerMultiples,
    /// Fractions with denominator 2, 3 or 4.
    Arbitrary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassStyle {
    /// Normalized integer weights in `0..=9` on every point.
    RationalDirichlet,
    /// One to three atoms.
    SparseAtoms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceGenerator {
    pub seed: u64,
    pub families: Vec<SpaceFamily>,
    /// Inclusive bounds on the number of points.
    pub n_range: (usize, usize),
    pub epsilon_rule: EpsilonRule,
    pub t_set: Vec<Num>,
    pub mass_styles: Vec<MassStyle>,
}

/// One generated instance together with the `SpaceSpec` that rebuilds its space.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub seed: u64,
    pub index: u64,
    pub spec: SpaceSpec,
    pub instance: GameInstance,
}

impl GeneratedInstance {
    pub fn new(seed: u64, index: u64, spec: SpaceSpec, instance: GameInstance) -> Self {
        Self { seed, index, spec, instance }
    }

    /// Extra randomness for a check, independent of the instance stream.
    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt.rotate_left(32));
        rng.set_stream(self.index);
        rng
    }
}

impl InstanceGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            families: SpaceFamily::ALL.to_vec(),
            n_range: (2, 12),
            epsilon_rule: EpsilonRule::IntegerMultiples,
            t_set: vec![Num(int(1)), Num(int(2)), Num(ratio(7, 2))],
            mass_styles: vec![MassStyle::RationalDirichlet, MassStyle::SparseAtoms],
        }
    }

    pub fn with_n_range(mut self, lo: usize, hi: usize) -> Self {
        self.n_range = (lo.max(1), hi.max(lo.max(1)));
        self
    }

    pub fn with_epsilon_rule(mut self, rule: EpsilonRule) -> Self {
        self.epsilon_rule = rule;
        self
    }

    pub fn with_t_set(mut self, t_set: Vec<Rational>) -> Self {
        self.t_set = t_set.into_iter().map(Num).collect();
        self
    }

    pub fn with_families(mut self, families: Vec<SpaceFamily>) -> Self {
        self.families = families;
        self
    }

    pub fn instance(&self, index: u64) -> Result<GeneratedInstance> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let family = *self.families.choose(&mut rng).expect("at least one family");
        let (spec, diameter) = self.space_spec(family, &mut rng);
        let space = FiniteMetricSpace::build(&spec)?;
        let style0 = *self.mass_styles.choose(&mut rng).expect("at least one mass style");
        let style1 = *self.mass_styles.choose(&mut rng).expect("at least one mass style");
        let p0 = random_measure(&space, style0, &mut rng)?;
        let p1 = random_measure(&space, style1, &mut rng)?;
        let t = self.t_set.choose(&mut rng).expect("at least one T").0.clone();
        let epsilon = match self.epsilon_rule {
            EpsilonRule::IntegerMultiples => int(rng.random_range(0..=(diameter / 2 + 1)) as i64),
            EpsilonRule::Arbitrary => {
                let den = rng.random_range(2..=4i64);
                ratio(rng.random_range(0..=den * (diameter as i64 / 2 + 1)), den)
            }
        };
        let instance = GameInstance::new(p0, p1, t, epsilon)?;
        Ok(GeneratedInstance::new(self.seed, index, spec, instance))
    }

    pub fn instances(&self, count: u64) -> impl Iterator<Item = Result<GeneratedInstance>> + '_ {
        (0..count).map(|i| self.instance(i))
    }

    /// Spec and integer diameter of a random space with `n` in range.
    fn space_spec(&self, family: SpaceFamily, rng: &mut ChaCha8Rng) -> (SpaceSpec, usize) {
        let (lo, hi) = self.n_range;
        match family {
            SpaceFamily::Grid1d => {
                let n = rng.random_range(lo..=hi);
                (SpaceSpec::Grid1d { n }, n - 1)
            }
            SpaceFamily::Grid2dL1 | SpaceFamily::Grid2dLinf => {
                let (width, height) = grid_shape(lo, hi, rng);
                let (norm, diameter) = if family == SpaceFamily::Grid2dL1 {
                    (GridNorm::L1, width + height - 2)
                } else {
                    (GridNorm::Linf, width.max(height) - 1)
                };
                (SpaceSpec::Grid2d { width, height, norm }, diameter)
            }
            SpaceFamily::RandomMatrix => {
                let n = rng.random_range(lo..=hi);
                let rows = hop_metric(n, rng);
                let diameter = rows.iter().flatten().copied().max().unwrap_or(0);
                let rows = rows.into_iter().map(|r| r.into_iter().map(|d| Num(int(d as i64))).collect()).collect();
                (SpaceSpec::Matrix { rows }, diameter)
            }
        }
    }
}

fn grid_shape(lo: usize, hi: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let lo = lo.max(2);
    let hi = hi.max(lo);
    loop {
        let width = rng.random_range(1..=hi.min(4));
        let height = rng.random_range(1..=(hi / width).max(1));
        if (lo..=hi).contains(&(width * height)) {
            return (width, height);
        }
    }
}

/// All-pairs hop distances of a random connected graph: a random spanning
/// tree plus extra edges with probability 1/4.
fn hop_metric(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    const FAR: usize = usize::MAX / 4;
    let mut d = vec![vec![FAR; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for i in 1..n {
        let j = rng.random_range(0..i);
        d[i][j] = 1;
        d[j][i] = 1;
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_ratio(1, 4) {
                d[i][j] = 1;
                d[j][i] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub(crate) fn random_measure(space: &Arc<FiniteMetricSpace>, style: MassStyle, rng: &mut ChaCha8Rng) -> Result<DiscreteMeasure> {
    let n = space.n();
    let mut weights = vec![0i64; n];
    match style {
        MassStyle::RationalDirichlet => {
            for w in weights.iter_mut() {
                *w = rng.random_range(0..=9);
            }
        }
        MassStyle::SparseAtoms => {
            for _ in 0..rng.random_range(1..=3) {
                weights[rng.random_range(0..n)] += rng.random_range(1..=5);
            }
        }
    }
    if weights.iter().all(|w| *w == 0) {
        weights[rng.random_range(0..n)] = 1;
    }
    let total: i64 = weights.iter().sum();
    let mass: Vec<Rational> = weights.iter().map(|&w| ratio(w, total)).collect();
    debug_assert!(!mass.iter().all(Zero::is_zero));
    DiscreteMeasure::new(space, mass)
}
