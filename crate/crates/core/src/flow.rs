//! Exact max-flow / min-cut.
//!
//! Capacities are rationals. The solver multiplies every capacity by the lcm of
//! the denominators and runs Dinic's algorithm on integers (`i128` when the
//! scaled total fits comfortably, `BigInt` otherwise), so every returned
//! quantity is exact. Arcs are scanned in insertion order, making the result a
//! deterministic function of the network.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::num::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum Capacity {
    Finite(Rational),
    /// Replaced internally by one more than the total source-adjacent capacity,
    /// which no feasible flow can use up.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: Capacity,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    nodes: usize,
    source: usize,
    sink: usize,
    arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        Self { nodes, source, sink, arcs: Vec::new() }
    }

    /// Appends an arc and returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: Capacity) -> usize {
        self.arcs.push(FlowArc { from, to, capacity });
        self.arcs.len() - 1
    }

    pub fn add_finite(&mut self, from: usize, to: usize, capacity: Rational) -> usize {
        self.add_arc(from, to, Capacity::Finite(capacity))
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedNetwork(msg));
        if self.source >= self.nodes || self.sink >= self.nodes {
            return bad("source or sink out of range".into());
        }
        if self.source == self.sink {
            return bad("source equals sink".into());
        }
        for (k, arc) in self.arcs.iter().enumerate() {
            if arc.from >= self.nodes || arc.to >= self.nodes {
                return bad(format!("arc {k} has an endpoint out of range"));
            }
            if arc.to == self.source {
                return bad(format!("arc {k} enters the source"));
            }
            if arc.from == self.sink {
                return bad(format!("arc {k} leaves the sink"));
            }
            if let Capacity::Finite(c) = &arc.capacity {
                if c.is_negative() {
                    return bad(format!("arc {k} has negative capacity"));
                }
            }
        }
        Ok(())
    }

    /// Capacity of the cut `(S, Sᶜ)`, with unbounded arcs resolved as in the solver.
    pub fn cut_capacity(&self, source_side: &[bool]) -> Rational {
        let big = self.unbounded_stand_in();
        self.arcs
            .iter()
            .filter(|a| source_side[a.from] && !source_side[a.to])
            .fold(Rational::zero(), |acc, a| match &a.capacity {
                Capacity::Finite(c) => acc + c,
                Capacity::Unbounded => acc + &big,
            })
    }

    fn unbounded_stand_in(&self) -> Rational {
        let total = self
            .arcs
            .iter()
            .filter(|a| a.from == self.source)
            .filter_map(|a| match &a.capacity {
                Capacity::Finite(c) => Some(c.clone()),
                Capacity::Unbounded => None,
            })
            .fold(Rational::zero(), |acc, c| acc + c);
        total + num::one()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub value: Rational,
    /// Flow on each arc, indexed like [`FlowNetwork::arcs`].
    pub arc_flows: Vec<Rational>,
    /// Nodes reachable from the source in the final residual graph.
    pub cut_source_side: Vec<bool>,
}

trait FlowInt: Integer + Signed + Clone {}
impl FlowInt for i128 {}
impl FlowInt for BigInt {}

struct Edge<C> {
    to: usize,
    residual: C,
}

struct Dinic<C> {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<Edge<C>>,
    level: Vec<i64>,
    cursor: Vec<usize>,
}

impl<C: FlowInt> Dinic<C> {
    fn new(nodes: usize, arcs: &[(usize, usize, C)]) -> Self {
        let mut adjacency = vec![Vec::new(); nodes];
        let mut edges = Vec::with_capacity(arcs.len() * 2);
        for (from, to, cap) in arcs {
            adjacency[*from].push(edges.len());
            edges.push(Edge { to: *to, residual: cap.clone() });
            adjacency[*to].push(edges.len());
            edges.push(Edge { to: *from, residual: C::zero() });
        }
        Self { adjacency, edges, level: vec![-1; nodes], cursor: vec![0; nodes] }
    }

    fn bfs(&mut self, source: usize, sink: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adjacency[u] {
                let v = self.edges[e].to;
                if self.level[v] < 0 && self.edges[e].residual.is_positive() {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[sink] >= 0
    }

    fn augment(&mut self, u: usize, sink: usize, limit: C) -> C {
        if u == sink {
            return limit;
        }
        while self.cursor[u] < self.adjacency[u].len() {
            let e = self.adjacency[u][self.cursor[u]];
            let v = self.edges[e].to;
            if self.level[v] == self.level[u] + 1 && self.edges[e].residual.is_positive() {
                let pushed = self.augment(v, sink, limit.clone().min(self.edges[e].residual.clone()));
                if pushed.is_positive() {
                    self.edges[e].residual = self.edges[e].residual.clone() - pushed.clone();
                    self.edges[e ^ 1].residual = self.edges[e ^ 1].residual.clone() + pushed.clone();
                    return pushed;
                }
            }
            self.cursor[u] += 1;
        }
        C::zero()
    }

    fn run(&mut self, source: usize, sink: usize, bound: C) -> C {
        let mut total = C::zero();
        while self.bfs(source, sink) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let pushed = self.augment(source, sink, bound.clone());
                if pushed.is_zero() {
                    break;
                }
                total = total + pushed;
            }
        }
        total
    }

    fn reachable(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adjacency.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adjacency[u] {
                let v = self.edges[e].to;
                if !seen[v] && self.edges[e].residual.is_positive() {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }
}

fn solve<C: FlowInt>(
    net: &FlowNetwork,
    scaled: Vec<BigInt>,
    convert: impl Fn(&BigInt) -> C,
    back: impl Fn(&C) -> BigInt,
) -> (BigInt, Vec<BigInt>, Vec<bool>) {
    let arcs: Vec<(usize, usize, C)> =
        net.arcs.iter().zip(&scaled).map(|(a, c)| (a.from, a.to, convert(c))).collect();
    let bound = convert(&scaled.iter().fold(BigInt::zero(), |acc, c| acc + c));
    let mut dinic = Dinic::new(net.nodes, &arcs);
    let value = dinic.run(net.source, net.sink, bound);
    let flows = arcs
        .iter()
        .enumerate()
        .map(|(k, (_, _, cap))| back(&(cap.clone() - dinic.edges[2 * k].residual.clone())))
        .collect();
    (back(&value), flows, dinic.reachable(net.source))
}

/// Maximum flow with its min-cut certificate.
pub fn max_flow(net: &FlowNetwork) -> Result<FlowResult> {
    net.validate()?;
    let big = net.unbounded_stand_in();
    let caps: Vec<Rational> = net
        .arcs
        .iter()
        .map(|a| match &a.capacity {
            Capacity::Finite(c) => c.clone(),
            Capacity::Unbounded => big.clone(),
        })
        .collect();
    let scale = caps.iter().fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()));
    let scaled: Vec<BigInt> = caps.iter().map(|c| (c.numer() * &scale) / c.denom()).collect();
    let total: BigInt = scaled.iter().fold(BigInt::zero(), |acc, c| acc + c);
    let (value, flows, reach) = if total.bits() < 100 {
        solve::<i128>(net, scaled, |b| b.to_i128().expect("fits"), |c| BigInt::from(*c))
    } else {
        solve::<BigInt>(net, scaled, BigInt::clone, BigInt::clone)
    };
    let unscale = |b: BigInt| Rational::new(b, scale.clone());
    Ok(FlowResult {
        value: unscale(value),
        arc_flows: flows.into_iter().map(unscale).collect(),
        cut_source_side: reach,
    })
}

/// Source side of a minimum cut: residual reachability after [`max_flow`].
pub fn min_cut(net: &FlowNetwork) -> Result<Vec<bool>> {
    Ok(max_flow(net)?.cut_source_side)
}
