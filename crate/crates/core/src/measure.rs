//! Finite nonnegative measures on a finite space.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::metric::{same_space, DecisionRegion, FiniteMetricSpace};
use crate::num::{self, Rational};

#[derive(Clone)]
pub struct DiscreteMeasure {
    space: Arc<FiniteMetricSpace>,
    mass: Vec<Rational>,
}

impl DiscreteMeasure {
    pub fn new(space: &Arc<FiniteMetricSpace>, mass: Vec<Rational>) -> Result<Self> {
        if mass.len() != space.n() {
            return Err(Error::LengthMismatch { expected: space.n(), got: mass.len() });
        }
        if let Some((index, value)) = mass.iter().enumerate().find(|(_, m)| m.is_negative()) {
            return Err(Error::NegativeMass { index, value: num::format_rational(value) });
        }
        Ok(Self { space: space.clone(), mass })
    }

    /// Unit mass at `point`.
    pub fn dirac(space: &Arc<FiniteMetricSpace>, point: usize) -> Result<Self> {
        space.check_point(point)?;
        let mut mass = vec![Rational::zero(); space.n()];
        mass[point] = Rational::one();
        Ok(Self { space: space.clone(), mass })
    }

    pub fn zero(space: &Arc<FiniteMetricSpace>) -> Self {
        Self { space: space.clone(), mass: vec![Rational::zero(); space.n()] }
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn mass(&self) -> &[Rational] {
        &self.mass
    }

    pub fn at(&self, i: usize) -> &Rational {
        &self.mass[i]
    }

    pub fn total(&self) -> Rational {
        num::sum(&self.mass)
    }

    pub fn is_probability(&self) -> bool {
        self.total().is_one()
    }

    /// Total mass within `tolerance` of one.
    pub fn is_probability_within(&self, tolerance: f64) -> bool {
        (num::to_f64(&self.total()) - 1.0).abs() <= tolerance
    }

    pub fn require_probability(&self, what: &'static str) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::NotProbability { what, total: num::format_rational(&self.total()) })
        }
    }

    /// Rescales to unit mass.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total();
        if total.is_zero() {
            return Err(Error::ZeroMass);
        }
        Ok(self.scale(&total.recip()))
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self { space: self.space.clone(), mass: self.mass.iter().map(|m| m * factor).collect() }
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.mass.len()).filter(|&i| !self.mass[i].is_zero()).collect()
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub(crate) fn check_region(&self, region: &DecisionRegion) -> Result<()> {
        if same_space(&self.space, region.space()) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Mass of every subset of a space with `n ≤ 24` points, indexed by bitmask.
    pub(crate) fn subset_masses(&self) -> Vec<Rational> {
        let n = self.mass.len();
        let mut out = vec![Rational::zero(); 1 << n];
        for bits in 1usize..1 << n {
            let low = bits.trailing_zeros() as usize;
            out[bits] = &out[bits & (bits - 1)] + &self.mass[low];
        }
        out
    }
}

impl PartialEq for DiscreteMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.mass == other.mass && same_space(&self.space, &other.space)
    }
}

impl fmt::Debug for DiscreteMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: Vec<String> = self.mass.iter().map(num::format_rational).collect();
        write!(f, "[{}]", shown.join(", "))
    }
}

/// `Σᵢ max(μᵢ − νᵢ, 0)` for probability vectors.
pub fn total_variation(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Rational> {
    mu.check_same(nu)?;
    mu.require_probability("first measure")?;
    nu.require_probability("second measure")?;
    Ok(mu
        .mass
        .iter()
        .zip(&nu.mass)
        .filter(|(a, b)| a > b)
        .fold(Rational::zero(), |acc, (a, b)| acc + a - b))
}

/// `μ ⪯ ν`: pointwise mass domination.
pub fn dominates(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<bool> {
    mu.check_same(nu)?;
    Ok(mu.mass.iter().zip(&nu.mass).all(|(a, b)| a <= b))
}

/// `Σᵢ min(αᵢ, βᵢ)`.
pub fn min_overlap(alpha: &DiscreteMeasure, beta: &DiscreteMeasure) -> Result<Rational> {
    alpha.check_same(beta)?;
    Ok(alpha.mass.iter().zip(&beta.mass).fold(Rational::zero(), |acc, (a, b)| acc + a.min(b)))
}

pub fn measure_of(mu: &DiscreteMeasure, region: &DecisionRegion) -> Result<Rational> {
    mu.check_region(region)?;
    Ok(mu.mass.iter().zip(region.mask()).filter(|(_, &m)| m).fold(Rational::zero(), |acc, (v, _)| acc + v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    fn line(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::grid_1d(n).unwrap())
    }

    fn m(space: &Arc<FiniteMetricSpace>, v: &[(i64, i64)]) -> DiscreteMeasure {
        DiscreteMeasure::new(space, v.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
    }

    #[test]
    fn rejects_bad_vectors() {
        let s = line(2);
        assert!(matches!(DiscreteMeasure::new(&s, vec![int(1)]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            DiscreteMeasure::new(&s, vec![int(-1), int(2)]),
            Err(Error::NegativeMass { index: 0, .. })
        ));
    }

    #[test]
    fn total_variation_examples() {
        let s = line(3);
        let a = m(&s, &[(1, 2), (1, 2), (0, 1)]);
        let b = m(&s, &[(0, 1), (1, 2), (1, 2)]);
        assert_eq!(total_variation(&a, &a).unwrap(), int(0));
        let d0 = DiscreteMeasure::dirac(&s, 0).unwrap();
        let d2 = DiscreteMeasure::dirac(&s, 2).unwrap();
        assert_eq!(total_variation(&d0, &d2).unwrap(), int(1));
        assert_eq!(total_variation(&a, &b).unwrap(), ratio(1, 2));
        let heavy = d0.scale(&int(2));
        assert!(matches!(total_variation(&heavy, &d2), Err(Error::NotProbability { .. })));
        let other = line(3);
        let elsewhere = DiscreteMeasure::dirac(&Arc::new(FiniteMetricSpace::grid_1d(4).unwrap()), 0).unwrap();
        assert_eq!(total_variation(&d0, &elsewhere), Err(Error::SpaceMismatch));
        // Structurally equal spaces are interchangeable.
        assert!(total_variation(&d0, &DiscreteMeasure::dirac(&other, 0).unwrap()).is_ok());
    }

    #[test]
    fn dominates_examples() {
        let s = line(2);
        assert!(dominates(&m(&s, &[(2, 10), (3, 10)]), &m(&s, &[(2, 10), (5, 10)])).unwrap());
        assert!(!dominates(&m(&s, &[(6, 10), (0, 1)]), &m(&s, &[(5, 10), (1, 1)])).unwrap());
        let a = m(&s, &[(1, 3), (2, 3)]);
        assert!(dominates(&a, &a).unwrap());
    }

    #[test]
    fn min_overlap_examples() {
        let s = line(3);
        let d1 = DiscreteMeasure::dirac(&s, 1).unwrap();
        assert_eq!(min_overlap(&d1, &d1).unwrap(), int(1));
        let a = DiscreteMeasure::dirac(&s, 0).unwrap().scale(&int(2));
        assert_eq!(min_overlap(&a, &DiscreteMeasure::dirac(&s, 2).unwrap()).unwrap(), int(0));
        assert_eq!(
            min_overlap(&m(&s, &[(1, 1), (1, 1), (0, 1)]), &m(&s, &[(0, 1), (1, 2), (1, 2)])).unwrap(),
            ratio(1, 2)
        );
    }

    #[test]
    fn measure_of_examples() {
        let s = line(2);
        let mu = m(&s, &[(3, 10), (7, 10)]);
        assert_eq!(measure_of(&mu, &DecisionRegion::empty(&s)).unwrap(), int(0));
        assert_eq!(measure_of(&mu, &DecisionRegion::full(&s)).unwrap(), int(1));
        assert_eq!(measure_of(&mu, &DecisionRegion::new(&s, [1]).unwrap()).unwrap(), ratio(7, 10));
    }

    #[test]
    fn normalize_is_explicit() {
        let s = line(2);
        let mu = m(&s, &[(1, 1), (3, 1)]);
        assert!(!mu.is_probability());
        assert_eq!(mu.normalize().unwrap(), m(&s, &[(1, 4), (3, 4)]));
        assert_eq!(DiscreteMeasure::zero(&s).normalize(), Err(Error::ZeroMass));
    }

    #[test]
    fn subset_masses_match_measure_of() {
        let s = line(4);
        let mu = m(&s, &[(1, 10), (2, 10), (3, 10), (4, 10)]);
        let table = mu.subset_masses();
        for bits in 0..16u64 {
            let r = DecisionRegion::from_bits(&s, bits);
            assert_eq!(table[bits as usize], measure_of(&mu, &r).unwrap());
        }
    }
}
