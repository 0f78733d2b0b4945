//! Finite metric spaces, decision regions and set expansions.
//!
//! A space stores its distance matrix either exactly (every builder fed with
//! rational data) or as `f64` (Euclidean grids, general `p`-norm clouds).
//! Threshold tests `d(x, y) ≤ r` are exact in the first case and use an
//! absolute tolerance of [`DISTANCE_TOLERANCE`] in the second.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, Num, Rational};

pub const DISTANCE_TOLERANCE: f64 = 1e-9;

/// A single pairwise distance.
#[derive(Debug, Clone, PartialEq)]
pub enum Distance {
    Exact(Rational),
    Approx(f64),
}

impl Distance {
    pub fn to_f64(&self) -> f64 {
        match self {
            Distance::Exact(r) => num::to_f64(r),
            Distance::Approx(x) => *x,
        }
    }

    pub fn zero(exact: bool) -> Distance {
        if exact {
            Distance::Exact(Rational::zero())
        } else {
            Distance::Approx(0.0)
        }
    }

    /// `self ≤ radius`, tolerant when the distance is approximate.
    pub fn within(&self, radius: &Rational) -> bool {
        match self {
            Distance::Exact(d) => d <= radius,
            Distance::Approx(d) => *d <= num::to_f64(radius) + DISTANCE_TOLERANCE,
        }
    }

    fn total_cmp(&self, other: &Distance) -> Ordering {
        match (self, other) {
            (Distance::Exact(a), Distance::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    fn max(self, other: Distance) -> Distance {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exact(r) => f.write_str(&num::format_rational(r)),
            Distance::Approx(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Distances {
    Exact(Vec<Rational>),
    Approx(Vec<f64>),
}

/// Norm used by the grid and point-cloud builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridNorm {
    L1,
    L2,
    Linf,
}

/// How to build a space; also the `space` object of the scenario JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    /// Explicit symmetric distance matrix.
    Matrix { rows: Vec<Vec<Num>> },
    /// Points `0, 1, …, n−1` on the line.
    #[serde(rename = "grid-1d")]
    Grid1d { n: usize },
    /// `width × height` integer lattice; point `(x, y)` has index `y·width + x`.
    #[serde(rename = "grid-2d")]
    Grid2d { width: usize, height: usize, norm: GridNorm },
    /// Points in ℝᵈ under the `p`-norm; `p` is `"inf"` or a number ≥ 1.
    PointCloud { points: Vec<Vec<Num>>, p: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Distances,
}

impl FiniteMetricSpace {
    pub fn build(spec: &SpaceSpec) -> Result<Arc<Self>> {
        let space = match spec {
            SpaceSpec::Matrix { rows } => {
                let rows = rows.iter().map(|r| r.iter().map(|v| v.0.clone()).collect()).collect();
                Self::from_matrix(rows)?
            }
            SpaceSpec::Grid1d { n } => Self::grid_1d(*n)?,
            SpaceSpec::Grid2d { width, height, norm } => Self::grid_2d(*width, *height, *norm)?,
            SpaceSpec::PointCloud { points, p } => {
                let points = points.iter().map(|r| r.iter().map(|v| v.0.clone()).collect()).collect();
                Self::point_cloud(points, p)?
            }
        };
        Ok(Arc::new(space))
    }

    pub fn from_matrix(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidSpace(format!("row {bad} does not have {n} entries")));
        }
        let space = Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            dist: Distances::Exact(rows.into_iter().flatten().collect()),
        };
        space.validate()?;
        Ok(space)
    }

    pub fn from_f64_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSpace("matrix is not square".into()));
        }
        if rows.iter().flatten().any(|d| !d.is_finite()) {
            return Err(Error::InvalidSpace("non-finite distance".into()));
        }
        let space = Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            dist: Distances::Approx(rows.into_iter().flatten().collect()),
        };
        space.validate()?;
        Ok(space)
    }

    pub fn grid_1d(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let mut d = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                d.push(num::int(i.abs_diff(j) as i64));
            }
        }
        Ok(Self { labels: (0..n).map(|i| i.to_string()).collect(), dist: Distances::Exact(d) })
    }

    pub fn grid_2d(width: usize, height: usize, norm: GridNorm) -> Result<Self> {
        let n = width * height;
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let coord = |i: usize| (i % width, i / width);
        let labels = (0..n).map(|i| format!("({},{})", coord(i).0, coord(i).1)).collect();
        let pairs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)));
        let delta = |i: usize, j: usize| {
            let ((xi, yi), (xj, yj)) = (coord(i), coord(j));
            (xi.abs_diff(xj) as i64, yi.abs_diff(yj) as i64)
        };
        let dist = match norm {
            GridNorm::L1 => Distances::Exact(
                pairs.map(|(i, j)| delta(i, j)).map(|(dx, dy)| num::int(dx + dy)).collect(),
            ),
            GridNorm::Linf => Distances::Exact(
                pairs.map(|(i, j)| delta(i, j)).map(|(dx, dy)| num::int(dx.max(dy))).collect(),
            ),
            GridNorm::L2 => Distances::Approx(
                pairs
                    .map(|(i, j)| delta(i, j))
                    .map(|(dx, dy)| ((dx * dx + dy * dy) as f64).sqrt())
                    .collect(),
            ),
        };
        Ok(Self { labels, dist })
    }

    pub fn point_cloud(points: Vec<Vec<Rational>>, p: &str) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let dim = points[0].len();
        if points.iter().any(|pt| pt.len() != dim) {
            return Err(Error::InvalidSpace("points have differing dimensions".into()));
        }
        let labels = points
            .iter()
            .map(|pt| {
                let c: Vec<String> = pt.iter().map(num::format_rational).collect();
                format!("({})", c.join(","))
            })
            .collect();
        let diffs = |i: usize, j: usize| -> Vec<Rational> {
            points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).abs()).collect()
        };
        let p = p.trim();
        let dist = match p {
            "inf" | "Inf" | "infinity" => Distances::Exact(
                (0..n * n)
                    .map(|k| diffs(k / n, k % n).into_iter().max().unwrap_or_else(Rational::zero))
                    .collect(),
            ),
            "1" => Distances::Exact((0..n * n).map(|k| num::sum(&diffs(k / n, k % n))).collect()),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidSpace(format!("unrecognised norm exponent {other:?}")))?;
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(Error::InvalidSpace(format!("norm exponent must be >= 1, got {p}")));
                }
                Distances::Approx(
                    (0..n * n)
                        .map(|k| {
                            diffs(k / n, k % n)
                                .iter()
                                .map(|d| num::to_f64(d).powf(p))
                                .sum::<f64>()
                                .powf(1.0 / p)
                        })
                        .collect(),
                )
            }
        };
        Ok(Self { labels, dist })
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        let fail = |axiom, at: Vec<usize>| Err(Error::NonMetric { axiom, at });
        for i in 0..n {
            if !self.is_zero(i, i) {
                return fail("zero diagonal", vec![i, i]);
            }
            for j in 0..n {
                if self.is_negative(i, j) {
                    return fail("nonnegativity", vec![i, j]);
                }
                if !self.is_symmetric(i, j) {
                    return fail("symmetry", vec![i, j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if !self.triangle_holds(i, j, k) {
                        return fail("triangle inequality", vec![i, j, k]);
                    }
                }
            }
        }
        Ok(())
    }

    fn is_zero(&self, i: usize, j: usize) -> bool {
        match &self.dist {
            Distances::Exact(d) => d[i * self.n() + j].is_zero(),
            Distances::Approx(d) => d[i * self.n() + j].abs() <= DISTANCE_TOLERANCE,
        }
    }

    fn is_negative(&self, i: usize, j: usize) -> bool {
        match &self.dist {
            Distances::Exact(d) => d[i * self.n() + j].is_negative(),
            Distances::Approx(d) => d[i * self.n() + j] < -DISTANCE_TOLERANCE,
        }
    }

    fn is_symmetric(&self, i: usize, j: usize) -> bool {
        let n = self.n();
        match &self.dist {
            Distances::Exact(d) => d[i * n + j] == d[j * n + i],
            Distances::Approx(d) => (d[i * n + j] - d[j * n + i]).abs() <= DISTANCE_TOLERANCE,
        }
    }

    fn triangle_holds(&self, i: usize, j: usize, k: usize) -> bool {
        let n = self.n();
        match &self.dist {
            Distances::Exact(d) => d[i * n + j] <= &d[i * n + k] + &d[k * n + j],
            Distances::Approx(d) => d[i * n + j] <= d[i * n + k] + d[k * n + j] + DISTANCE_TOLERANCE,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Whether distances are stored exactly.
    pub fn is_exact(&self) -> bool {
        matches!(self.dist, Distances::Exact(_))
    }

    pub fn distance(&self, i: usize, j: usize) -> Distance {
        let n = self.n();
        match &self.dist {
            Distances::Exact(d) => Distance::Exact(d[i * n + j].clone()),
            Distances::Approx(d) => Distance::Approx(d[i * n + j]),
        }
    }

    /// `d(i, j) ≤ radius`.
    pub fn within(&self, i: usize, j: usize, radius: &Rational) -> bool {
        let n = self.n();
        match &self.dist {
            Distances::Exact(d) => &d[i * n + j] <= radius,
            Distances::Approx(d) => d[i * n + j] <= num::to_f64(radius) + DISTANCE_TOLERANCE,
        }
    }

    /// Adjacency matrix of `d ≤ radius`, row-major.
    pub fn within_matrix(&self, radius: &Rational) -> Vec<bool> {
        match &self.dist {
            Distances::Exact(d) => d.iter().map(|x| x <= radius).collect(),
            Distances::Approx(d) => {
                let r = num::to_f64(radius) + DISTANCE_TOLERANCE;
                d.iter().map(|x| *x <= r).collect()
            }
        }
    }

    /// Points within `radius` of `i`, ascending.
    pub fn ball(&self, i: usize, radius: &Rational) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.within(i, j, radius)).collect()
    }

    /// All distinct pairwise distances, ascending.
    pub fn distinct_distances(&self) -> Vec<Distance> {
        let mut all: Vec<Distance> = match &self.dist {
            Distances::Exact(d) => d.iter().cloned().map(Distance::Exact).collect(),
            Distances::Approx(d) => d.iter().copied().map(Distance::Approx).collect(),
        };
        all.sort_by(|a, b| a.total_cmp(b));
        all.dedup_by(|a, b| match (&*a, &*b) {
            (Distance::Exact(x), Distance::Exact(y)) => x == y,
            _ => (a.to_f64() - b.to_f64()).abs() <= DISTANCE_TOLERANCE,
        });
        all
    }

    pub fn check_point(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::PointOutOfRange { index: i, n: self.n() })
        }
    }
}

pub(crate) fn same_space(a: &Arc<FiniteMetricSpace>, b: &Arc<FiniteMetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A subset `A` of the space: the classifier's positive region.
#[derive(Clone)]
pub struct DecisionRegion {
    space: Arc<FiniteMetricSpace>,
    members: Vec<bool>,
}

impl DecisionRegion {
    pub fn new(space: &Arc<FiniteMetricSpace>, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members = vec![false; space.n()];
        for i in indices {
            space.check_point(i)?;
            members[i] = true;
        }
        Ok(Self { space: space.clone(), members })
    }

    pub fn empty(space: &Arc<FiniteMetricSpace>) -> Self {
        Self { space: space.clone(), members: vec![false; space.n()] }
    }

    pub fn full(space: &Arc<FiniteMetricSpace>) -> Self {
        Self { space: space.clone(), members: vec![true; space.n()] }
    }

    pub fn from_mask(space: &Arc<FiniteMetricSpace>, members: Vec<bool>) -> Result<Self> {
        if members.len() != space.n() {
            return Err(Error::LengthMismatch { expected: space.n(), got: members.len() });
        }
        Ok(Self { space: space.clone(), members })
    }

    /// Region from the low `n` bits of `bits` (requires `n ≤ 64`).
    pub fn from_bits(space: &Arc<FiniteMetricSpace>, bits: u64) -> Self {
        let members = (0..space.n()).map(|i| i < 64 && bits >> i & 1 == 1).collect();
        Self { space: space.clone(), members }
    }

    pub fn to_bits(&self) -> u64 {
        self.members.iter().enumerate().filter(|(_, &m)| m).fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn indices(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn complement(&self) -> Self {
        Self { space: self.space.clone(), members: self.members.iter().map(|m| !m).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        let members = self.members.iter().zip(&other.members).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { space: self.space.clone(), members })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.iter().zip(&other.members).all(|(&a, &b)| !a || b)
    }

    /// Lexicographic order of the sorted index lists (`∅ < {0} < {0,1} < {1}`).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.indices().cmp(&other.indices())
    }
}

impl PartialEq for DecisionRegion {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && same_space(&self.space, &other.space)
    }
}

impl fmt::Debug for DecisionRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

/// `A^{⊕ε} = {x : ∃a ∈ A, d(x, a) ≤ ε}`.
pub fn expand(region: &DecisionRegion, epsilon: &Rational) -> DecisionRegion {
    let space = region.space();
    let n = space.n();
    let near = space.within_matrix(epsilon);
    let members = (0..n).map(|x| (0..n).any(|a| region.members[a] && near[x * n + a])).collect();
    DecisionRegion { space: space.clone(), members }
}

/// `A^{⊖ε} = ((Aᶜ)^{⊕ε})ᶜ`.
pub fn contract(region: &DecisionRegion, epsilon: &Rational) -> DecisionRegion {
    expand(&region.complement(), epsilon).complement()
}

/// Per-budget midpoint completeness of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointReport {
    pub complete: bool,
    /// First violating pair `(x, y)`, `x < y`, in lexicographic order.
    pub witness: Option<(usize, usize)>,
    /// Smallest achievable `max(d(x, m), d(m, y))` for the witness.
    pub radius_achieved: Option<Distance>,
}

/// Point minimizing `max(d(x, m), d(m, y))`, lowest index on ties.
pub fn midpoint(space: &FiniteMetricSpace, x: usize, y: usize) -> Result<(usize, Distance)> {
    space.check_point(x)?;
    space.check_point(y)?;
    let mut best: Option<(usize, Distance)> = None;
    for m in 0..space.n() {
        let leg = space.distance(x, m).max(space.distance(m, y));
        let better = match &best {
            None => true,
            Some((_, r)) => match (&leg, r) {
                (Distance::Exact(a), Distance::Exact(b)) => a < b,
                _ => leg.to_f64() < r.to_f64() - DISTANCE_TOLERANCE,
            },
        };
        if better {
            best = Some((m, leg));
        }
    }
    Ok(best.expect("space is nonempty"))
}

/// Checks that every pair with `d(x, y) ≤ 2ε` has a point within `ε` of both.
pub fn is_midpoint_complete(space: &FiniteMetricSpace, epsilon: &Rational) -> MidpointReport {
    let two_eps = epsilon * num::int(2);
    for x in 0..space.n() {
        for y in x + 1..space.n() {
            if !space.within(x, y, &two_eps) {
                continue;
            }
            let (_, radius) = midpoint(space, x, y).expect("indices in range");
            if !radius.within(epsilon) {
                return MidpointReport { complete: false, witness: Some((x, y)), radius_achieved: Some(radius) };
            }
        }
    }
    MidpointReport { complete: true, witness: None, radius_achieved: None }
}

/// Ball bitmasks for spaces of at most 64 points, used by subset enumeration.
#[derive(Debug, Clone)]
pub(crate) struct BitBalls {
    balls: Vec<u64>,
}

impl BitBalls {
    pub(crate) fn new(space: &FiniteMetricSpace, radius: &Rational) -> Self {
        let n = space.n();
        debug_assert!(n <= 64);
        let near = space.within_matrix(radius);
        let balls = (0..n)
            .map(|i| (0..n).filter(|&j| near[i * n + j]).fold(0u64, |acc, j| acc | 1 << j))
            .collect();
        Self { balls }
    }

    pub(crate) fn expand(&self, mut bits: u64) -> u64 {
        let mut out = 0;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            out |= self.balls[i];
            bits &= bits - 1;
        }
        out
    }

    pub(crate) fn contract(&self, bits: u64, full: u64) -> u64 {
        !self.expand(!bits & full) & full
    }
}

pub(crate) fn full_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
