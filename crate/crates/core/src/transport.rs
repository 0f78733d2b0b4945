//! ∞-Wasserstein distance, worst-case measures over W∞ balls, and the
//! `{0,1}`-cost transport problems behind optimal adversarial risk.
//!
//! Every `{0,1}`-cost problem is solved as a bipartite max-flow: source arcs
//! carry `μ`, sink arcs carry `ν`, and a free arc joins `i` to `j` whenever
//! `d(i, j)` is within the threshold. Unrouted mass pays cost one. The source
//! side of the min cut is the dual maximizer `B` of `μ(B) − ν(B^{⊕2ε})`.

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::flow::{self, Capacity, FlowNetwork, FlowResult};
use crate::measure::{self, DiscreteMeasure};
use crate::metric::{self, BitBalls, DecisionRegion, Distance, FiniteMetricSpace};
use crate::num::{self, Rational};

/// Largest space accepted by the subset-enumeration routines.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// Row sums equal `μ`, column sums equal `ν`.
    Balanced,
    /// Row sums equal `μ`, column sums at most `ν`.
    Unbalanced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    space: Arc<FiniteMetricSpace>,
    matrix: Vec<Vec<Rational>>,
    kind: CouplingKind,
}

impl Coupling {
    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.matrix[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        self.matrix.iter().map(num::sum).collect()
    }

    pub fn column_sums(&self) -> Vec<Rational> {
        let n = self.matrix.len();
        (0..n).map(|j| num::sum(self.matrix.iter().map(|row| &row[j]))).collect()
    }

    /// Second marginal as a measure.
    pub fn column_marginal(&self) -> DiscreteMeasure {
        DiscreteMeasure::new(&self.space, self.column_sums()).expect("coupling entries are nonnegative")
    }

    /// Mass on pairs with `d(i, j) > threshold`.
    pub fn excess_mass(&self, threshold: &Rational) -> Rational {
        let mut total = Rational::zero();
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() && !self.space.within(i, j, threshold) {
                    total += v;
                }
            }
        }
        total
    }

    /// Largest distance carrying positive mass.
    pub fn max_displacement(&self) -> Distance {
        let mut best = Distance::zero(self.space.is_exact());
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let d = self.space.distance(i, j);
                if !v.is_zero() && d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// Nonzero entries as `(i, j, mass)`, row-major.
    pub fn sparse(&self) -> Vec<(usize, usize, Rational)> {
        let mut out = Vec::new();
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.push((i, j, v.clone()));
                }
            }
        }
        out
    }

    /// Checks the marginal constraints for `kind` exactly.
    pub fn satisfies_marginals(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> bool {
        let rows_ok = self.row_sums().iter().zip(mu.mass()).all(|(r, m)| r == m);
        let cols = self.column_sums();
        let cols_ok = match self.kind {
            CouplingKind::Balanced => cols.iter().zip(nu.mass()).all(|(c, m)| c == m),
            CouplingKind::Unbalanced => cols.iter().zip(nu.mass()).all(|(c, m)| c <= m),
        };
        rows_ok && cols_ok && self.matrix.iter().flatten().all(|v| !v.is_negative())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub value: Rational,
    pub coupling: Coupling,
    /// Dual maximizer of `μ(B) − ν(B^{⊕2ε})`.
    pub witness_set: Option<DecisionRegion>,
}

/// Node layout of the bipartite threshold network.
struct Bipartite {
    n: usize,
    free_arcs: Vec<(usize, usize, usize)>,
}

impl Bipartite {
    const SOURCE: usize = 0;

    fn left(i: usize) -> usize {
        1 + i
    }

    fn right(&self, j: usize) -> usize {
        1 + self.n + j
    }

    fn sink(&self) -> usize {
        2 * self.n + 1
    }
}

/// Max-flow on `s → i (μᵢ) → j (free, when d(i, j) ≤ radius) → t (νⱼ)`.
fn threshold_flow(
    mu: &DiscreteMeasure,
    nu: Option<&DiscreteMeasure>,
    targets: Option<&[bool]>,
    radius: &Rational,
) -> Result<(FlowResult, Bipartite)> {
    let space = mu.space();
    let n = space.n();
    let mut layout = Bipartite { n, free_arcs: Vec::new() };
    let mut net = FlowNetwork::new(2 * n + 2, Bipartite::SOURCE, layout.sink());
    for i in 0..n {
        net.add_finite(Bipartite::SOURCE, Bipartite::left(i), mu.at(i).clone());
    }
    for j in 0..n {
        let cap = match nu {
            Some(nu) => Capacity::Finite(nu.at(j).clone()),
            None => Capacity::Unbounded,
        };
        net.add_arc(layout.right(j), layout.sink(), cap);
    }
    let near = space.within_matrix(radius);
    for i in 0..n {
        // Staying put is tried first, so mass only moves when it has to.
        for j in std::iter::once(i).chain((0..n).filter(|&j| j != i)) {
            if near[i * n + j] && targets.is_none_or(|t| t[j]) {
                let k = net.add_arc(Bipartite::left(i), layout.right(j), Capacity::Unbounded);
                layout.free_arcs.push((i, j, k));
            }
        }
    }
    let result = flow::max_flow(&net)?;
    Ok((result, layout))
}

/// Whether a coupling supported on `{d ≤ radius}` exists between `mu` and `nu`.
fn coupling_exists(mu: &DiscreteMeasure, nu: &DiscreteMeasure, radius: &Rational) -> Result<bool> {
    let (res, _) = threshold_flow(mu, Some(nu), None, radius)?;
    Ok(res.value == mu.total())
}

fn same_mass_probabilities(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    mu.check_same(nu)?;
    mu.require_probability("first measure")?;
    nu.require_probability("second measure")
}

/// `W∞(μ, ν)`: the smallest pairwise distance `δ` admitting a coupling
/// supported on `{d ≤ δ}`.
pub fn w_infinity(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Distance> {
    same_mass_probabilities(mu, nu)?;
    let candidates = mu.space().distinct_distances();
    let feasible = |d: &Distance| -> Result<bool> {
        match d {
            Distance::Exact(r) => coupling_exists(mu, nu, r),
            Distance::Approx(x) => {
                // Tolerant threshold: the rational image of the float itself.
                coupling_exists(mu, nu, &num::from_f64(*x).expect("finite distance"))
            }
        }
    };
    // The largest distance always admits the product coupling.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(&candidates[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(candidates[lo].clone())
}

/// `W∞(candidate, center) ≤ ε`, decided by a single feasibility flow.
pub fn in_winf_ball(candidate: &DiscreteMeasure, center: &DiscreteMeasure, epsilon: &Rational) -> Result<bool> {
    same_mass_probabilities(candidate, center)?;
    coupling_exists(candidate, center, epsilon)
}

/// `sup { μ′(A) : W∞(μ′, center) ≤ ε }` and a maximizer.
///
/// Each atom routes its mass into `A` when some point of `A` lies within `ε`;
/// unrouted mass stays in place. The value is checked against
/// `center(A^{⊕ε})`.
pub fn ball_sup_measure(
    center: &DiscreteMeasure,
    region: &DecisionRegion,
    epsilon: &Rational,
) -> Result<(Rational, DiscreteMeasure)> {
    center.check_region(region)?;
    let (res, layout) = threshold_flow(center, None, Some(region.mask()), epsilon)?;
    let mut moved: Vec<Rational> = center.mass().to_vec();
    for &(i, j, k) in &layout.free_arcs {
        let f = &res.arc_flows[k];
        if !f.is_zero() {
            moved[i] -= f;
            moved[j] += f;
        }
    }
    let argmax = DiscreteMeasure::new(center.space(), moved)?;
    let expected = measure::measure_of(center, &metric::expand(region, epsilon))?;
    if res.value != expected || measure::measure_of(&argmax, region)? != res.value {
        return Err(Error::Certificate(format!(
            "ball supremum {} differs from the expansion mass {}",
            num::format_rational(&res.value),
            num::format_rational(&expected)
        )));
    }
    Ok((res.value, argmax))
}

/// `sup { E_{μ′}[φ] : W∞(μ′, center) ≤ ε }` and a maximizer that sends each
/// atom to the lowest-index maximizer of `φ` over its ball.
pub fn ball_sup_expectation(
    center: &DiscreteMeasure,
    phi: &[Rational],
    epsilon: &Rational,
) -> Result<(Rational, DiscreteMeasure)> {
    let space = center.space();
    let n = space.n();
    if phi.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: phi.len() });
    }
    if let Some(v) = phi.iter().find(|v| v.is_negative()) {
        return Err(Error::InvalidParameter {
            what: "loss values",
            constraint: ">= 0",
            value: num::format_rational(v),
        });
    }
    let mut moved = vec![Rational::zero(); n];
    let mut value = Rational::zero();
    for i in 0..n {
        let target = argmax_in_ball(space, phi, i, epsilon);
        value += center.at(i) * &phi[target];
        moved[target] += center.at(i);
    }
    Ok((value, DiscreteMeasure::new(space, moved)?))
}

/// Lowest-index maximizer of `phi` over the closed `ε`-ball around `i`.
pub(crate) fn argmax_in_ball(space: &FiniteMetricSpace, phi: &[Rational], i: usize, epsilon: &Rational) -> usize {
    let mut best = i;
    for j in 0..space.n() {
        if space.within(i, j, epsilon) && (phi[j] > phi[best] || (phi[j] == phi[best] && j < best)) {
            best = j;
        }
    }
    best
}

/// Optimal `{0,1}`-cost coupling with cost `𝟙{d > radius}`.
fn threshold_transport(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    epsilon: &Rational,
    kind: CouplingKind,
) -> Result<TransportResult> {
    let space = mu.space().clone();
    let n = space.n();
    let radius = epsilon * num::int(2);
    let (res, layout) = threshold_flow(mu, Some(nu), None, &radius)?;

    let mut matrix = vec![vec![Rational::zero(); n]; n];
    let mut row_left: Vec<Rational> = mu.mass().to_vec();
    let mut col_left: Vec<Rational> = nu.mass().to_vec();
    for &(i, j, k) in &layout.free_arcs {
        let f = &res.arc_flows[k];
        if !f.is_zero() {
            matrix[i][j] += f;
            row_left[i] -= f;
            col_left[j] -= f;
        }
    }
    // Residual mass pays cost one; route it smallest source to smallest sink.
    let mut j = 0;
    for i in 0..n {
        while row_left[i].is_positive() {
            while j < n && !col_left[j].is_positive() {
                j += 1;
            }
            let Some(cap) = col_left.get(j) else {
                return Err(Error::Certificate("residual mass exceeds sink capacity".into()));
            };
            let step = row_left[i].clone().min(cap.clone());
            matrix[i][j] += &step;
            row_left[i] -= &step;
            col_left[j] -= &step;
        }
    }

    let value = mu.total() - &res.value;
    let coupling = Coupling { space: space.clone(), matrix, kind };
    let witness = (0..n).filter(|&i| res.cut_source_side[Bipartite::left(i)]);
    let witness = DecisionRegion::new(&space, witness)?;
    let dual = measure::measure_of(mu, &witness)? - measure::measure_of(nu, &metric::expand(&witness, &radius))?;
    if dual != value || coupling.excess_mass(&radius) != value || !coupling.satisfies_marginals(mu, nu) {
        return Err(Error::Certificate(format!(
            "transport value {} not matched by its dual {} or coupling",
            num::format_rational(&value),
            num::format_rational(&dual)
        )));
    }
    Ok(TransportResult { value, coupling, witness_set: Some(witness) })
}

/// `D_ε(μ, ν)`: optimal transport cost under `𝟙{d(x, x′) > 2ε}`.
pub fn d_epsilon(mu: &DiscreteMeasure, nu: &DiscreteMeasure, epsilon: &Rational) -> Result<TransportResult> {
    same_mass_probabilities(mu, nu)?;
    check_budget(epsilon)?;
    threshold_transport(mu, nu, epsilon, CouplingKind::Balanced)
}

/// Unbalanced `{0,1}`-cost transport for `0 < μ(X) ≤ ν(X)`: row sums equal
/// `μ`, column sums dominated by `ν`.
pub fn unbalanced_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, epsilon: &Rational) -> Result<TransportResult> {
    mu.check_same(nu)?;
    check_budget(epsilon)?;
    let (m, total_nu) = (mu.total(), nu.total());
    if m.is_zero() {
        return Err(Error::ZeroMass);
    }
    if m > total_nu {
        return Err(Error::MassOrder { first: num::format_rational(&m), second: num::format_rational(&total_nu) });
    }
    threshold_transport(mu, nu, epsilon, CouplingKind::Unbalanced)
}

/// `M · D_ε(μ/M, π₂/M)` for the column marginal `π₂` of an unbalanced
/// coupling, the right-hand form of generalized Strassen duality.
pub fn unbalanced_rhs(mu: &DiscreteMeasure, result: &TransportResult, epsilon: &Rational) -> Result<Rational> {
    let m = mu.total();
    let inv = m.recip();
    let nu2 = result.coupling.column_marginal();
    Ok(d_epsilon(&mu.scale(&inv), &nu2.scale(&inv), epsilon)?.value * m)
}

pub(crate) fn check_budget(epsilon: &Rational) -> Result<()> {
    if epsilon.is_negative() {
        return Err(Error::InvalidParameter {
            what: "epsilon",
            constraint: ">= 0",
            value: num::format_rational(epsilon),
        });
    }
    Ok(())
}

pub(crate) fn check_enumerable(n: usize) -> Result<()> {
    if n > ENUMERATION_LIMIT {
        Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT })
    } else {
        Ok(())
    }
}

/// Order of bitmask subsets by their sorted index lists.
pub(crate) fn bits_lex_cmp(a: u64, b: u64) -> Ordering {
    let (mut a, mut b) = (a, b);
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ia, ib) = (a.trailing_zeros(), b.trailing_zeros());
        if ia != ib {
            return ia.cmp(&ib);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

/// Exhaustive maximum of `score(bits)` with the lexicographically least argmax.
pub(crate) fn enumerate_max(n: usize, mut score: impl FnMut(u64) -> Rational) -> (Rational, u64) {
    let mut best = (score(0), 0u64);
    for bits in 1..1u64 << n {
        let v = score(bits);
        match v.cmp(&best.0) {
            Ordering::Greater => best = (v, bits),
            Ordering::Equal if bits_lex_cmp(bits, best.1) == Ordering::Less => best = (v, bits),
            _ => {}
        }
    }
    best
}

/// `sup_A μ(A) − ν(A^{⊕2ε})` by enumerating all subsets.
pub fn strassen_lhs_bruteforce(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    epsilon: &Rational,
) -> Result<(Rational, DecisionRegion)> {
    mu.check_same(nu)?;
    let space = mu.space();
    check_enumerable(space.n())?;
    let balls = BitBalls::new(space, &(epsilon * num::int(2)));
    let (mu_t, nu_t) = (mu.subset_masses(), nu.subset_masses());
    let (value, bits) = enumerate_max(space.n(), |a| &mu_t[a as usize] - &nu_t[balls.expand(a) as usize]);
    Ok((value, DecisionRegion::from_bits(space, bits)))
}

/// `sup_A μ(A^{⊖ε}) − ν(A^{⊕ε})` by enumerating all subsets.
pub fn minkowski_form_bruteforce(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    epsilon: &Rational,
) -> Result<(Rational, DecisionRegion)> {
    mu.check_same(nu)?;
    let space = mu.space();
    let n = space.n();
    check_enumerable(n)?;
    let balls = BitBalls::new(space, epsilon);
    let full = metric::full_bits(n);
    let (mu_t, nu_t) = (mu.subset_masses(), nu.subset_masses());
    let (value, bits) =
        enumerate_max(n, |a| &mu_t[balls.contract(a, full) as usize] - &nu_t[balls.expand(a) as usize]);
    Ok((value, DecisionRegion::from_bits(space, bits)))
}
