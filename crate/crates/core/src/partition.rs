//! Salami partitions `(X, Y, K)`: finite `K`, no edge between `X` and `Y`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::metric::Metric;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    X,
    Y,
    K,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SalamiPartition {
    side: Vec<Side>,
    x: Vec<usize>,
    y: Vec<usize>,
    k: Vec<usize>,
    k_connected: bool,
    x_unbounded: bool,
    y_unbounded: bool,
}

impl SalamiPartition {
    /// Validates an explicit triple.
    pub fn new(g: &WeightedGraph, x: &[usize], y: &[usize], k: &[usize]) -> Result<Self> {
        let mut side: Vec<Option<Side>> = vec![None; g.len()];
        for (set, label) in [(x, Side::X), (y, Side::Y), (k, Side::K)] {
            for &v in set {
                if side[v].replace(label).is_some() {
                    return Err(Error::InvalidPartition(format!("`{}` is listed twice", g.id(v))));
                }
            }
        }
        if let Some(v) = side.iter().position(Option::is_none) {
            return Err(Error::InvalidPartition(format!("`{}` is in none of X, Y, K", g.id(v))));
        }
        if k.is_empty() {
            return Err(Error::InvalidPartition("K is empty".into()));
        }
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidPartition("X and Y must both be non-empty".into()));
        }
        let side: Vec<Side> = side.into_iter().map(|s| s.expect("checked")).collect();
        for &u in x {
            for a in g.neighbors(u) {
                if side[a.to] == Side::Y {
                    return Err(Error::InvalidPartition(format!(
                        "edge {}-{} joins X and Y",
                        g.id(u),
                        g.id(a.to)
                    )));
                }
            }
        }
        let sorted = |s: &[usize]| {
            let mut s = s.to_vec();
            s.sort_unstable();
            s
        };
        Ok(Self {
            x_unbounded: x.iter().any(|&v| g.is_boundary(v)),
            y_unbounded: y.iter().any(|&v| g.is_boundary(v)),
            k_connected: g.is_connected_set(k),
            side,
            x: sorted(x),
            y: sorted(y),
            k: sorted(k),
        })
    }

    pub fn from_ids<S: AsRef<str>>(g: &WeightedGraph, x: &[S], y: &[S], k: &[S]) -> Result<Self> {
        Self::new(g, &g.indices_of(x)?, &g.indices_of(y)?, &g.indices_of(k)?)
    }

    /// Infers `X` and `Y` as the two components of `V \ K`; `X` holds the
    /// smallest id.
    pub fn from_k(g: &WeightedGraph, k: &[usize]) -> Result<Self> {
        let comps = complement_components(g, k);
        if comps.len() != 2 {
            return Err(Error::InvalidPartition(format!(
                "V \\ K has {} components; give X and Y explicitly",
                comps.len()
            )));
        }
        Self::new(g, &comps[0], &comps[1], k)
    }

    /// `X` is the union of the components of `V \ K` that meet `x_seeds`,
    /// `Y` the union of the others.
    pub fn from_k_and_seeds(g: &WeightedGraph, k: &[usize], x_seeds: &[usize]) -> Result<Self> {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for comp in complement_components(g, k) {
            if comp.iter().any(|v| x_seeds.contains(v)) {
                x.extend(comp);
            } else {
                y.extend(comp);
            }
        }
        Self::new(g, &x, &y, k)
    }

    pub fn side(&self, v: usize) -> Side {
        self.side[v]
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn k_is_connected(&self) -> bool {
        self.k_connected
    }

    /// Both `X` and `Y` reach the window rim.
    pub fn sides_unbounded(&self) -> bool {
        self.x_unbounded && self.y_unbounded
    }

    /// The partition with `X` and `Y` exchanged.
    pub fn mirrored(&self) -> Self {
        let side = self
            .side
            .iter()
            .map(|s| match s {
                Side::X => Side::Y,
                Side::Y => Side::X,
                Side::K => Side::K,
            })
            .collect();
        Self {
            side,
            x: self.y.clone(),
            y: self.x.clone(),
            k: self.k.clone(),
            k_connected: self.k_connected,
            x_unbounded: self.y_unbounded,
            y_unbounded: self.x_unbounded,
        }
    }

    /// `B₁(K)`: `K` and its neighbours.
    pub fn closed_neighbourhood(&self, g: &WeightedGraph) -> Vec<usize> {
        let mut out = self.k.clone();
        for &v in &self.k {
            out.extend(g.neighbors(v).iter().map(|a| a.to));
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn complement_components(g: &WeightedGraph, k: &[usize]) -> Vec<Vec<usize>> {
    let mut mask = vec![true; g.len()];
    for &v in k {
        mask[v] = false;
    }
    g.components(&mask)
}

/// Enlarges a disconnected `K₀` to `B_R(K₀)` with `R` the largest distance
/// inside `K₀`; `X` and `Y` lose the absorbed vertices.
pub fn connect_partition(g: &WeightedGraph, d: &Metric, p: &SalamiPartition) -> Result<SalamiPartition> {
    if p.k_is_connected() {
        return Ok(p.clone());
    }
    let mut radius = Rational::zero();
    for &u in p.k() {
        for &v in p.k() {
            let duv = d.distance(u, v)?;
            if *duv > radius {
                radius = duv.clone();
            }
        }
    }
    let ball = d.ball(p.k(), &radius);
    if !ball.reliable {
        let rim = ball
            .members
            .iter()
            .find(|&&v| g.is_boundary(v))
            .copied()
            .unwrap_or(p.k()[0]);
        return Err(Error::WindowTooSmall(g.id(rim).into()));
    }
    let mut in_k = vec![false; g.len()];
    for &v in &ball.members {
        in_k[v] = true;
    }
    let x: Vec<usize> = p.x().iter().copied().filter(|&v| !in_k[v]).collect();
    let y: Vec<usize> = p.y().iter().copied().filter(|&v| !in_k[v]).collect();
    let out = SalamiPartition::new(g, &x, &y, &ball.members)?;
    debug_assert!(out.k_is_connected());
    Ok(out)
}
