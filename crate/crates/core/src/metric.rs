//! Path metrics on a window, evaluated lazily one source row at a time.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::sync::OnceLock;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{MetricMode, WeightedGraph};
use crate::rational::{to_f64, Rational};

/// Shortest-path distances from one source.
#[derive(Debug, Clone)]
pub struct Row {
    pub exact: Vec<Option<Rational>>,
    pub approx: Vec<f64>,
}

#[derive(Debug)]
pub struct Metric {
    mode: MetricMode,
    ids: Vec<String>,
    lengths: Vec<Vec<(usize, Rational)>>,
    boundary: Vec<usize>,
    rows: Vec<OnceLock<Row>>,
    to_boundary: OnceLock<Row>,
}

/// A vertex set together with whether the window could have cut it short.
#[derive(Debug, Clone, PartialEq)]
pub struct BallResult {
    pub members: Vec<usize>,
    pub reliable: bool,
}

impl Metric {
    /// The combinatorial distance `d₀`.
    pub fn combinatorial(g: &WeightedGraph) -> Self {
        let lengths = (0..g.len())
            .map(|v| g.neighbors(v).iter().map(|a| (a.to, Rational::one())).collect())
            .collect();
        Self::with_lengths(g, MetricMode::Combinatorial, lengths)
    }

    /// The path metric induced by the `len` of every edge.
    pub fn edge_lengths(g: &WeightedGraph) -> Result<Self> {
        let mut lengths = Vec::with_capacity(g.len());
        for v in 0..g.len() {
            let mut row = Vec::with_capacity(g.neighbors(v).len());
            for a in g.neighbors(v) {
                let l = a
                    .length
                    .clone()
                    .ok_or_else(|| Error::MissingLength(g.id(v).into(), g.id(a.to).into()))?;
                row.push((a.to, l));
            }
            lengths.push(row);
        }
        Ok(Self::with_lengths(g, MetricMode::EdgeLengths, lengths))
    }

    /// The metric the graph document asks for.
    pub fn for_graph(g: &WeightedGraph) -> Result<Self> {
        match g.metric_mode() {
            MetricMode::Combinatorial => Ok(Self::combinatorial(g)),
            MetricMode::EdgeLengths => Self::edge_lengths(g),
        }
    }

    fn with_lengths(g: &WeightedGraph, mode: MetricMode, lengths: Vec<Vec<(usize, Rational)>>) -> Self {
        Self {
            mode,
            ids: g.ids().to_vec(),
            lengths,
            boundary: (0..g.len()).filter(|&v| g.is_boundary(v)).collect(),
            rows: (0..g.len()).map(|_| OnceLock::new()).collect(),
            to_boundary: OnceLock::new(),
        }
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Length of the edge `u ~ v`, if present.
    pub fn edge_length(&self, u: usize, v: usize) -> Option<&Rational> {
        self.lengths[u].iter().find(|(w, _)| *w == v).map(|(_, l)| l)
    }

    pub fn max_edge_length(&self) -> Rational {
        self.lengths
            .iter()
            .flatten()
            .map(|(_, l)| l)
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn search(&self, sources: &[usize]) -> Row {
        let n = self.len();
        let mut exact: Vec<Option<Rational>> = vec![None; n];
        if self.mode == MetricMode::Combinatorial {
            let mut hops: Vec<Option<u64>> = vec![None; n];
            let mut queue = VecDeque::new();
            for &s in sources {
                if hops[s].is_none() {
                    hops[s] = Some(0);
                    queue.push_back(s);
                }
            }
            while let Some(u) = queue.pop_front() {
                let d = hops[u].expect("queued");
                for (v, _) in &self.lengths[u] {
                    if hops[*v].is_none() {
                        hops[*v] = Some(d + 1);
                        queue.push_back(*v);
                    }
                }
            }
            for (e, h) in exact.iter_mut().zip(hops) {
                *e = h.map(|h| Rational::from_integer(h.into()));
            }
        } else {
            let mut heap = BinaryHeap::new();
            for &s in sources {
                exact[s] = Some(Rational::zero());
                heap.push(Reverse((Rational::zero(), s)));
            }
            let mut done = vec![false; n];
            while let Some(Reverse((d, u))) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                for (v, l) in &self.lengths[u] {
                    let nd = &d + l;
                    if exact[*v].as_ref().is_none_or(|cur| nd < *cur) {
                        exact[*v] = Some(nd.clone());
                        heap.push(Reverse((nd, *v)));
                    }
                }
            }
        }
        let approx = exact
            .iter()
            .map(|d| d.as_ref().map(to_f64).unwrap_or(f64::INFINITY))
            .collect();
        Row { exact, approx }
    }

    pub fn row(&self, source: usize) -> &Row {
        self.rows[source].get_or_init(|| self.search(&[source]))
    }

    /// Distances to the nearest boundary vertex (`None` everywhere if the
    /// window has no boundary).
    pub fn boundary_row(&self) -> &Row {
        self.to_boundary.get_or_init(|| self.search(&self.boundary))
    }

    pub fn distance(&self, u: usize, v: usize) -> Result<&Rational> {
        self.row(u).exact[v]
            .as_ref()
            .ok_or_else(|| Error::DisconnectedQuery(self.ids[u].clone(), self.ids[v].clone()))
    }

    pub fn distance_f(&self, u: usize, v: usize) -> f64 {
        self.row(u).approx[v]
    }

    pub fn has_boundary(&self) -> bool {
        !self.boundary.is_empty()
    }

    pub fn boundary_distance_f(&self, v: usize) -> f64 {
        self.boundary_row().approx[v]
    }

    /// A window distance is the true distance when no shorter path could
    /// leave the window: `d_W(u,v) ≤ d_W(u,∂) + d_W(v,∂)`.
    pub fn certified(&self, u: usize, v: usize) -> bool {
        if !self.has_boundary() {
            return true;
        }
        let d = self.distance_f(u, v);
        if !d.is_finite() {
            return false;
        }
        let slack = self.boundary_distance_f(u) + self.boundary_distance_f(v);
        d <= slack + 1e-9 * d.max(1.0)
    }

    /// `d(v, W) = min_{w∈W} d(v, w)` and a vertex attaining it.
    pub fn distance_to_set(&self, v: usize, set: &[usize]) -> Option<(usize, f64)> {
        let row = self.row(v);
        set.iter()
            .map(|&w| (w, row.approx[w]))
            .filter(|(_, d)| d.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// `B_R(W)`; unreliable if it reaches a boundary vertex.
    pub fn ball(&self, centers: &[usize], radius: &Rational) -> BallResult {
        let row = self.search(centers);
        let members: Vec<usize> = (0..self.len())
            .filter(|&v| row.exact[v].as_ref().is_some_and(|d| d <= radius))
            .collect();
        let reliable = !members.iter().any(|v| self.boundary.binary_search(v).is_ok());
        BallResult { members, reliable }
    }

    /// `S_R(x) = {v : d(x,v) = R}`; reliability as for the ball.
    pub fn sphere(&self, x: usize, radius: &Rational) -> BallResult {
        let ball = self.ball(&[x], radius);
        let row = self.row(x);
        BallResult {
            members: ball
                .members
                .into_iter()
                .filter(|&v| row.exact[v].as_ref() == Some(radius))
                .collect(),
            reliable: ball.reliable,
        }
    }
}
