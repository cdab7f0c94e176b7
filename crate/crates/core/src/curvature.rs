//! Ollivier curvature `κ(x,y)`.
//!
//! Two independent exact routes are provided: a simplex over 1-Lipschitz
//! potentials on `S = B₁(x) ∪ B₁(y)` and a min-cost transport between the
//! neighbourhood rate vectors. Distances come from the global window metric;
//! any potential feasible on `S` extends to all of `V` by the McShane formula
//! `inf_w f(w) + d(·,w)`, so restricting the dual to `S` loses nothing.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Field, WeightedGraph};
use crate::lipschitz::{gradients, is_lipschitz_on_edges};
use crate::lp::{min_cost_transport, minimize, LpOutcome};
use crate::metric::Metric;
use crate::rational::{to_f64, Number, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub source: usize,
    pub target: usize,
    /// `(x', y', mass)` with `x' ∈ B₁(x)`, `y' ∈ B₁(y)`, positive mass only.
    pub mass: Vec<(usize, usize, Rational)>,
}

impl TransportPlan {
    /// Largest deviation from the marginal conditions `Σ_{y'} ρ(x',y') =
    /// q(x,x')` for `x' ≠ x` and `Σ_{x'} ρ(x',y') = q(y,y')` for `y' ≠ y`.
    pub fn marginal_defect(&self, g: &WeightedGraph) -> Rational {
        let (x, y) = (self.source, self.target);
        let mut rows: HashMap<usize, Rational> = HashMap::new();
        let mut cols: HashMap<usize, Rational> = HashMap::new();
        for (a, b, m) in &self.mass {
            *rows.entry(*a).or_insert_with(Rational::zero) += m;
            *cols.entry(*b).or_insert_with(Rational::zero) += m;
        }
        let mut worst = Rational::zero();
        for a in g.neighbors(x) {
            let got = rows.get(&a.to).cloned().unwrap_or_else(Rational::zero);
            worst = worst.max((got - g.transition_rate(x, a.to)).abs());
        }
        for a in g.neighbors(y) {
            let got = cols.get(&a.to).cloned().unwrap_or_else(Rational::zero);
            worst = worst.max((got - g.transition_rate(y, a.to)).abs());
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Optimal potential on `S`, normalised to `f(x) = 0`, `f(y) = d(x,y)`.
    Potential(Vec<(usize, Rational)>),
    Plan(TransportPlan),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureResult {
    pub x: usize,
    pub y: usize,
    pub distance: Rational,
    pub kappa: Rational,
    pub witness: Witness,
    /// False when `B₁(x) ∪ B₁(y)` meets the rim or one of its distances is
    /// not certified by the window.
    pub reliable: bool,
}

impl CurvatureResult {
    pub fn kappa_f(&self) -> f64 {
        to_f64(&self.kappa)
    }
}

struct Local {
    support: Vec<usize>,
    distance: Rational,
    reliable: bool,
}

fn local(g: &WeightedGraph, d: &Metric, x: usize, y: usize) -> Result<Local> {
    if x == y {
        return Err(Error::InvalidPair);
    }
    let distance = d
        .distance(x, y)
        .map_err(|_| Error::NotAdjacentMetric(g.id(x).into(), g.id(y).into()))?
        .clone();
    let mut support: Vec<usize> = vec![x, y];
    support.extend(g.neighbors(x).iter().map(|a| a.to));
    support.extend(g.neighbors(y).iter().map(|a| a.to));
    support.sort_unstable();
    support.dedup();
    let mut reliable = support.iter().all(|&v| !g.is_boundary(v));
    if reliable {
        'pairs: for (i, &u) in support.iter().enumerate() {
            for &v in &support[i + 1..] {
                if !d.certified(u, v) {
                    reliable = false;
                    break 'pairs;
                }
            }
        }
    }
    Ok(Local {
        support,
        distance,
        reliable,
    })
}

fn require_reliable(g: &WeightedGraph, r: CurvatureResult) -> Result<CurvatureResult> {
    if r.reliable {
        Ok(r)
    } else {
        Err(Error::BallTouchesBoundary(g.id(r.x).into()))
    }
}

/// `κ(x,y)` by minimising `(Δf(x) − Δf(y))/R` over 1-Lipschitz potentials.
/// Fails with `BallTouchesBoundary` unless the neighbourhoods are interior.
pub fn curvature_dual(g: &WeightedGraph, d: &Metric, x: usize, y: usize) -> Result<CurvatureResult> {
    require_reliable(g, curvature_dual_window(g, d, x, y)?)
}

/// As [`curvature_dual`], but returns window values with `reliable = false`
/// instead of failing.
pub fn curvature_dual_window(g: &WeightedGraph, d: &Metric, x: usize, y: usize) -> Result<CurvatureResult> {
    let loc = local(g, d, x, y)?;
    let big_r = &loc.distance;
    let dist = |u: usize, v: usize| -> Rational { d.row(u).exact[v].clone().expect("connected") };

    // f = f0 + g with f0(v) = R − d(v,y) and g ≥ 0 vanishing at x and y.
    let free: Vec<usize> = loc.support.iter().copied().filter(|&v| v != x && v != y).collect();
    let f0 = |v: usize| big_r - dist(v, y);
    let upper: Vec<Rational> = free.iter().map(|&v| dist(x, v) + dist(v, y) - big_r).collect();

    let n = free.len();
    let mut a: Vec<Vec<Rational>> = Vec::new();
    let mut b: Vec<Rational> = Vec::new();
    for (i, ub) in upper.iter().enumerate() {
        let mut row = vec![Rational::zero(); n];
        row[i] = Rational::from_integer(1.into());
        a.push(row);
        b.push(ub.clone());
    }
    for (iu, &u) in free.iter().enumerate() {
        for (iv, &v) in free.iter().enumerate() {
            if iu == iv {
                continue;
            }
            // g(v) − g(u) ≤ d(u,v) + d(v,y) − d(u,y); redundant once the
            // bound reaches the upper bound on g(v)
            let rhs = dist(u, v) + dist(v, y) - dist(u, y);
            if rhs >= upper[iv] {
                continue;
            }
            let mut row = vec![Rational::zero(); n];
            row[iv] = Rational::from_integer(1.into());
            row[iu] = Rational::from_integer((-1).into());
            a.push(row);
            b.push(rhs);
        }
    }
    let c: Vec<Rational> = free
        .iter()
        .map(|&v| (g.transition_rate(x, v) - g.transition_rate(y, v)) / big_r)
        .collect();
    let gvals = match minimize(&c, &a, &b) {
        LpOutcome::Optimal { x: sol, .. } => sol,
        LpOutcome::Unbounded => unreachable!("potentials are bounded on S"),
    };

    let mut potential: Vec<(usize, Rational)> = Vec::with_capacity(loc.support.len());
    let mut lookup: HashMap<usize, Rational> = HashMap::new();
    for &v in &loc.support {
        let value = if v == x {
            Rational::zero()
        } else if v == y {
            big_r.clone()
        } else {
            let i = free.binary_search(&v).expect("free vertex");
            f0(v) + &gvals[i]
        };
        lookup.insert(v, value.clone());
        potential.push((v, value));
    }
    let lap = |z: usize| -> Rational {
        g.neighbors(z)
            .iter()
            .map(|a| &a.weight * (&lookup[&a.to] - &lookup[&z]))
            .sum::<Rational>()
            / g.measure(z)
    };
    let kappa = (lap(x) - lap(y)) / big_r;
    Ok(CurvatureResult {
        x,
        y,
        distance: loc.distance.clone(),
        kappa,
        witness: Witness::Potential(potential),
        reliable: loc.reliable,
    })
}

/// `κ(x,y) = sup_ρ Σ ρ(x',y')(1 − d(x',y')/R)` as a balanced min-cost
/// transport: the free row at `x` and column at `y` absorb the slack.
pub fn curvature_primal(g: &WeightedGraph, d: &Metric, x: usize, y: usize) -> Result<CurvatureResult> {
    require_reliable(g, curvature_primal_window(g, d, x, y)?)
}

pub fn curvature_primal_window(g: &WeightedGraph, d: &Metric, x: usize, y: usize) -> Result<CurvatureResult> {
    let loc = local(g, d, x, y)?;
    let big_r = &loc.distance;
    let mut rows: Vec<usize> = g.neighbors(x).iter().map(|a| a.to).collect();
    let mut supply: Vec<Rational> = rows.iter().map(|&v| g.transition_rate(x, v)).collect();
    rows.push(x);
    supply.push(g.degree(y));
    let mut cols: Vec<usize> = g.neighbors(y).iter().map(|a| a.to).collect();
    let mut demand: Vec<Rational> = cols.iter().map(|&v| g.transition_rate(y, v)).collect();
    cols.push(y);
    demand.push(g.degree(x));
    let one = Rational::from_integer(1.into());
    let cost: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&u| {
            let row = &d.row(u).exact;
            cols.iter()
                .map(|&v| row[v].clone().expect("connected") / big_r - &one)
                .collect()
        })
        .collect();
    let out = min_cost_transport(&supply, &demand, &cost)?;
    let mut mass = Vec::new();
    for (i, &u) in rows.iter().enumerate() {
        for (j, &v) in cols.iter().enumerate() {
            if out.flow[i][j].is_positive() {
                mass.push((u, v, out.flow[i][j].clone()));
            }
        }
    }
    Ok(CurvatureResult {
        x,
        y,
        distance: loc.distance.clone(),
        kappa: -out.cost,
        witness: Witness::Plan(TransportPlan {
            source: x,
            target: y,
            mass,
        }),
        reliable: loc.reliable,
    })
}

/// Checks the dual witness: 1-Lipschitz on `S` and `f(y) − f(x) = d(x,y)`.
pub fn witness_is_feasible(d: &Metric, r: &CurvatureResult) -> bool {
    let Witness::Potential(pot) = &r.witness else {
        return false;
    };
    let value = |v: usize| pot.iter().find(|(w, _)| *w == v).map(|(_, f)| f);
    let (Some(fx), Some(fy)) = (value(r.x), value(r.y)) else {
        return false;
    };
    if fy - fx != r.distance {
        return false;
    }
    pot.iter().all(|(u, fu)| {
        pot.iter()
            .all(|(v, fv)| u == v || fv - fu <= *d.distance(*u, *v).expect("connected"))
    })
}

/// Tree closed form `2(q(x,y) + q(y,x)) − Deg(x) − Deg(y)` for `d₀`.
pub fn curvature_tree(g: &WeightedGraph, x: usize, y: usize) -> Result<Rational> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    if !g.adjacent(x, y) {
        return Err(Error::NotAdjacent(g.id(x).into(), g.id(y).into()));
    }
    let two = Rational::from_integer(2.into());
    Ok(two * (g.transition_rate(x, y) + g.transition_rate(y, x)) - g.degree(x) - g.degree(y))
}

/// Lattice coordinates encoded in an id `"x,y"` or `"prefix:x,y"`.
pub fn lattice_coords(id: &str) -> Option<(String, i64, i64)> {
    let (prefix, rest) = match id.split_once(':') {
        Some((p, r)) => (p.to_string(), r),
        None => (String::new(), id),
    };
    let (a, b) = rest.split_once(',')?;
    Some((prefix, a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Closed form for edges of graphs that look like `ℤ²` around the edge:
/// `q(x,y) + q(y,x) − q(x,x−e) − q(y,y+e) − |q(x,x+ie) − q(y,y+ie)| −
/// |q(x,x−ie) − q(y,y−ie)|` with `e = y − x` and `i` the quarter turn.
pub fn curvature_lattice(g: &WeightedGraph, x: usize, y: usize) -> Result<Rational> {
    let not_lattice = |why: &str| Error::NotLatticeLike(g.id(x).into(), why.into());
    let all = vec![true; g.len()];
    let hx = g.hop_distances(&[x], &all);
    let hy = g.hop_distances(&[y], &all);
    let region: Vec<usize> = (0..g.len())
        .filter(|&v| hx[v].is_some_and(|h| h <= 2) || hy[v].is_some_and(|h| h <= 2))
        .collect();
    let mut at: HashMap<(i64, i64), usize> = HashMap::new();
    let mut coords: HashMap<usize, (i64, i64)> = HashMap::new();
    for &v in &region {
        let (_, a, b) = lattice_coords(g.id(v)).ok_or_else(|| not_lattice("ids carry no coordinates"))?;
        if at.insert((a, b), v).is_some() {
            return Err(not_lattice("two vertices share coordinates"));
        }
        coords.insert(v, (a, b));
    }
    for &u in &region {
        let hu = g.hop_distances(&[u], &all);
        let (ua, ub) = coords[&u];
        for &v in &region {
            let (va, vb) = coords[&v];
            let l1 = ((ua - va).abs() + (ub - vb).abs()) as usize;
            if hu[v] != Some(l1) {
                return Err(not_lattice("graph distance differs from the l1 distance"));
            }
        }
    }
    let (xa, xb) = coords[&x];
    let (ya, yb) = coords[&y];
    let e = (ya - xa, yb - xb);
    if e.0.abs() + e.1.abs() != 1 {
        return Err(Error::NotAdjacent(g.id(x).into(), g.id(y).into()));
    }
    let ie = (-e.1, e.0);
    let q = |from: usize, (a, b): (i64, i64), step: (i64, i64)| -> Rational {
        match at.get(&(a + step.0, b + step.1)) {
            Some(&to) => g.transition_rate(from, to),
            None => Rational::zero(),
        }
    };
    let neg = |s: (i64, i64)| (-s.0, -s.1);
    let (px, py) = ((xa, xb), (ya, yb));
    Ok(g.transition_rate(x, y) + g.transition_rate(y, x)
        - q(x, px, neg(e))
        - q(y, py, e)
        - (q(x, px, ie) - q(y, py, ie)).abs()
        - (q(x, px, neg(ie)) - q(y, py, neg(ie))).abs())
}

/// `κ(x) = min_{y∼x} κ(x,y)`.
pub fn vertex_curvature(g: &WeightedGraph, d: &Metric, x: usize) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for a in g.neighbors(x) {
        let k = curvature_dual(g, d, x, a.to)?.kappa;
        if best.as_ref().is_none_or(|b| k < *b) {
            best = Some(k);
        }
    }
    Ok(best.unwrap_or_else(Rational::zero))
}

/// One row of an edge sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCurvature {
    pub x: usize,
    pub y: usize,
    pub distance: Rational,
    pub kappa_dual: Rational,
    pub kappa_primal: Rational,
    pub kappa_closed: Option<Rational>,
    pub reliable: bool,
}

/// Both solvers (and a closed form where one applies) on every listed edge,
/// in the given order.
pub fn edge_sweep(g: &WeightedGraph, d: &Metric, edges: &[(usize, usize)]) -> Result<Vec<EdgeCurvature>> {
    let tree = g.is_tree() && d.mode() == crate::graph::MetricMode::Combinatorial;
    edges
        .par_iter()
        .map(|&(x, y)| {
            let dual = curvature_dual_window(g, d, x, y)?;
            let primal = curvature_primal_window(g, d, x, y)?;
            let kappa_closed = if tree {
                curvature_tree(g, x, y).ok()
            } else if d.mode() == crate::graph::MetricMode::Combinatorial && dual.reliable {
                curvature_lattice(g, x, y).ok()
            } else {
                None
            };
            Ok(EdgeCurvature {
                x,
                y,
                distance: dual.distance,
                kappa_dual: dual.kappa,
                kappa_primal: primal.kappa,
                kappa_closed,
                reliable: dual.reliable,
            })
        })
        .collect()
}

/// All edges `(u, v)` with `u < v`.
pub fn all_edges(g: &WeightedGraph) -> Vec<(usize, usize)> {
    g.edges().map(|(u, a)| (u, a.to)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    pub rows: Vec<EdgeCurvature>,
    pub vertex_kappa: Vec<(usize, Rational)>,
    pub flat: bool,
}

/// Edge table for every edge at a region vertex and `κ(x)` per vertex;
/// flat iff every `κ(x)` vanishes.
pub fn flatness_report(g: &WeightedGraph, d: &Metric, region: &[usize]) -> Result<FlatnessReport> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &x in region {
        for a in g.neighbors(x) {
            edges.push((x.min(a.to), x.max(a.to)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let rows = edge_sweep(g, d, &edges)?;
    let mut vertex_kappa = Vec::with_capacity(region.len());
    for &x in region {
        let mut best: Option<Rational> = None;
        for r in rows.iter().filter(|r| r.x == x || r.y == x) {
            if !r.reliable {
                return Err(Error::BallTouchesBoundary(g.id(x).into()));
            }
            if best.as_ref().is_none_or(|b| r.kappa_dual < *b) {
                best = Some(r.kappa_dual.clone());
            }
        }
        vertex_kappa.push((x, best.unwrap_or_else(Rational::zero)));
    }
    let flat = vertex_kappa.iter().all(|(_, k)| k.is_zero());
    Ok(FlatnessReport {
        rows,
        vertex_kappa,
        flat,
    })
}

/// `Hf = f + εΔf` at every vertex where `Δf` is available.
pub fn heat_step<T: Number>(g: &WeightedGraph, f: &Field<T>, epsilon: &T) -> Field<T> {
    let lap = g.laplacian(f);
    Field::from_fn(g.len(), |v| {
        let fv = f.get(v)?;
        let lv = lap.get(v)?;
        Some(fv.clone() + epsilon.clone() * lv.clone())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub kappa: Rational,
    pub holds: bool,
}

/// `|Hf(y) − Hf(x)| ≤ d(x,y)(1 − εκ(x,y))` for `f ∈ Lip(1)` and
/// `0 < ε ≤ 1/(Deg(x) + Deg(y))`.
pub fn contraction_check(
    g: &WeightedGraph,
    d: &Metric,
    f: &Field<f64>,
    epsilon: f64,
    x: usize,
    y: usize,
) -> Result<ContractionCheck> {
    let bound = 1.0 / (g.degree_f(x) + g.degree_f(y));
    if !(epsilon > 0.0 && epsilon <= bound * (1.0 + 1e-12)) {
        return Err(Error::EpsilonTooLarge { epsilon, bound });
    }
    if let Some((u, v, du, dv)) = is_lipschitz_on_edges(g, d, f) {
        return Err(Error::NotLipschitz(g.id(u).into(), g.id(v).into(), du, dv));
    }
    let kappa = curvature_dual(g, d, x, y)?.kappa;
    let hx = f.get(x).copied().unwrap_or(0.0) + epsilon * g.laplacian_at(f, x)?;
    let hy = f.get(y).copied().unwrap_or(0.0) + epsilon * g.laplacian_at(f, y)?;
    let lhs = (hy - hx).abs();
    let rhs = d.distance_f(x, y) * (1.0 - epsilon * to_f64(&kappa));
    Ok(ContractionCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9,
        kappa,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientMaxReport {
    pub max_inside: f64,
    pub max_on_sphere: f64,
    pub holds: bool,
}

fn abs_gradient_max(g: &WeightedGraph, d: &Metric, u: &Field<f64>, set: &[usize]) -> Result<f64> {
    let mut best = 0.0f64;
    for &v in set {
        best = best.max(gradients(g, d, u, v)?.abs);
    }
    Ok(best)
}

/// `max_W |∇u| ≤ max_{S₁(W)} |∇u|` under `κ ≥ 0` on edges of `W` and the
/// monotonicity hypothesis on `Δu`.
pub fn gradient_max_principle_check(
    g: &WeightedGraph,
    d: &Metric,
    u: &Field<f64>,
    w: &[usize],
) -> Result<GradientMaxReport> {
    let mut in_w = vec![false; g.len()];
    for &v in w {
        in_w[v] = true;
    }
    for &x in w {
        for a in g.neighbors(x) {
            let y = a.to;
            if !in_w[y] || y < x {
                continue;
            }
            if curvature_dual(g, d, x, y)?.kappa.is_negative() {
                return Err(Error::CurvatureNegativeInW(g.id(x).into(), g.id(y).into()));
            }
            for (p, q) in [(x, y), (y, x)] {
                let (Some(up), Some(uq)) = (u.get(p), u.get(q)) else {
                    return Err(Error::MissingValue(g.id(p).into()));
                };
                if uq >= up && g.laplacian_at(u, q)? < g.laplacian_at(u, p)? - 1e-12 {
                    return Err(Error::HypothesisFails(g.id(q).into()));
                }
            }
        }
    }
    let sphere = d.ball(w, &Rational::from_integer(1.into())).members;
    let sphere: Vec<usize> = sphere.into_iter().filter(|&v| !in_w[v]).collect();
    let max_inside = abs_gradient_max(g, d, u, w)?;
    let max_on_sphere = abs_gradient_max(g, d, u, &sphere)?;
    Ok(GradientMaxReport {
        max_inside,
        max_on_sphere,
        holds: max_inside <= max_on_sphere + 1e-9,
    })
}

/// `max_{B_R(x)} |∇u| = max_{S_R(x)} |∇u|` for `u` harmonic on `B_{R−1}(x)`.
pub fn gradient_max_on_ball(
    g: &WeightedGraph,
    d: &Metric,
    u: &Field<f64>,
    x: usize,
    radius: u32,
) -> Result<GradientMaxReport> {
    let r = Rational::from_integer(radius.into());
    let ball = d.ball(&[x], &r);
    if !ball.reliable {
        return Err(Error::BallTouchesBoundary(g.id(x).into()));
    }
    let inner = d.ball(&[x], &(r.clone() - Rational::from_integer(1.into()))).members;
    let inside = gradient_max_principle_check(g, d, u, &inner)?;
    let sphere = d.sphere(x, &r).members;
    let max_ball = abs_gradient_max(g, d, u, &ball.members)?;
    let max_sphere = abs_gradient_max(g, d, u, &sphere)?;
    Ok(GradientMaxReport {
        max_inside: max_ball,
        max_on_sphere: max_sphere,
        holds: inside.holds && (max_ball - max_sphere).abs() <= 1e-9,
    })
}
