//! Windowed generators for the example graphs, with the curvature values
//! and harmonic fields they are known to carry.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, MetricMode, WeightedGraph};
use crate::io::rational_value;
use crate::rational::{format_rational, int, pow2, pow_int, ratio, Rational};

/// Diagonal weight `w(n)` on the edge `(n, n+1) ~ (n+1, n)` of the strip.
#[derive(Debug, Clone, PartialEq)]
pub enum DiagonalWeights {
    Constant(Rational),
    /// `w(n) = |n|`.
    Linear,
}

impl DiagonalWeights {
    pub fn at(&self, n: i64) -> Rational {
        match self {
            Self::Constant(c) => c.clone(),
            Self::Linear => int(n.abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    UniformChain {
        radius: i64,
    },
    /// Chain on `ℤ` with `w(n, n+1) = weights[n mod p]` and
    /// `m(n) = measures[n mod q]`.
    BirthDeath {
        weights: Vec<Rational>,
        measures: Vec<Rational>,
        metric: MetricMode,
        radius: i64,
    },
    /// `k` chains sharing the root `0`: one uniform, the others with
    /// `w(n, n+1) = 3^{-n}/2` and `m(n) = 3^{-n}`.
    GluedChains {
        k: usize,
        radius: i64,
    },
    /// The folded product of the doubling chain and the halving chain on the
    /// quadrant `ℕ₀²`, one copy or two copies glued at the corner.
    FoldedProduct {
        radius: i64,
        glued: bool,
    },
    DiagonalStrip {
        diagonal: DiagonalWeights,
        radius: i64,
    },
    /// `ℤ` with unit weights between points at distance one or two.
    TwoJumpLine {
        radius: i64,
    },
}

/// Known relation between a curvature value and a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaFixture {
    pub x: String,
    pub y: String,
    pub relation: Relation,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixtures {
    pub family: String,
    pub kappa: Vec<KappaFixture>,
    /// A Lipschitz-sharp harmonic function, where one is known.
    pub h0: Option<Vec<(String, Rational)>>,
    /// The finite set `K` of the default partition.
    pub default_k: Vec<String>,
}

impl Fixtures {
    pub fn to_json(&self) -> serde_json::Value {
        let kappa: Vec<serde_json::Value> = self
            .kappa
            .iter()
            .map(|k| {
                serde_json::json!({
                    "x": k.x,
                    "y": k.y,
                    "relation": k.relation,
                    "value": format_rational(&k.value),
                })
            })
            .collect();
        let h0 = self.h0.as_ref().map(|vals| {
            let map: serde_json::Map<String, serde_json::Value> = vals
                .iter()
                .map(|(id, v)| (id.clone(), rational_value(v)))
                .collect();
            serde_json::json!({ "values": map })
        });
        serde_json::json!({
            "family": self.family,
            "kappa": kappa,
            "h0": h0,
            "default_k": self.default_k,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Family {
    pub graph: WeightedGraph,
    pub fixtures: Fixtures,
}

pub const FAMILY_NAMES: [&str; 6] = [
    "uniform_chain",
    "birth_death",
    "glued_chains",
    "folded_product",
    "diagonal_strip",
    "two_jump_line",
];

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UniformChain { .. } => "uniform_chain",
            Self::BirthDeath { .. } => "birth_death",
            Self::GluedChains { .. } => "glued_chains",
            Self::FoldedProduct { .. } => "folded_product",
            Self::DiagonalStrip { .. } => "diagonal_strip",
            Self::TwoJumpLine { .. } => "two_jump_line",
        }
    }

    pub fn radius(&self) -> i64 {
        match self {
            Self::UniformChain { radius }
            | Self::BirthDeath { radius, .. }
            | Self::GluedChains { radius, .. }
            | Self::FoldedProduct { radius, .. }
            | Self::DiagonalStrip { radius, .. }
            | Self::TwoJumpLine { radius } => *radius,
        }
    }

    /// The same family on a different window.
    pub fn with_radius(&self, r: i64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::UniformChain { radius }
            | Self::BirthDeath { radius, .. }
            | Self::GluedChains { radius, .. }
            | Self::FoldedProduct { radius, .. }
            | Self::DiagonalStrip { radius, .. }
            | Self::TwoJumpLine { radius } => *radius = r,
        }
        out
    }

    /// Default windows: 12 for chains, 10 for the two-dimensional families.
    pub fn default_for(name: &str) -> Result<Self> {
        Ok(match name {
            "uniform_chain" => Self::UniformChain { radius: 12 },
            "birth_death" => Self::BirthDeath {
                weights: vec![int(1), int(2)],
                measures: vec![int(1)],
                metric: MetricMode::EdgeLengths,
                radius: 12,
            },
            "glued_chains" => Self::GluedChains { k: 3, radius: 12 },
            "folded_product" => Self::FoldedProduct {
                radius: 10,
                glued: true,
            },
            "diagonal_strip" => Self::DiagonalStrip {
                diagonal: DiagonalWeights::Linear,
                radius: 10,
            },
            "two_jump_line" => Self::TwoJumpLine { radius: 12 },
            other => return Err(Error::BadSpec(format!("unknown family `{other}`"))),
        })
    }

    fn validate(&self) -> Result<()> {
        let min = if matches!(self, Self::FoldedProduct { .. }) { 4 } else { 3 };
        if self.radius() < min {
            return Err(Error::BadSpec(format!(
                "{}: radius must be at least {min}",
                self.name()
            )));
        }
        match self {
            Self::BirthDeath {
                weights, measures, ..
            } => {
                if weights.is_empty() || weights.iter().any(|w| !w.is_positive()) {
                    return Err(Error::BadSpec("birth_death: weights must be positive".into()));
                }
                if measures.is_empty() || measures.iter().any(|m| !m.is_positive()) {
                    return Err(Error::BadSpec("birth_death: measures must be positive".into()));
                }
            }
            Self::GluedChains { k, .. } if *k < 2 => {
                return Err(Error::BadSpec("glued_chains: need at least two chains".into()));
            }
            Self::DiagonalStrip {
                diagonal: DiagonalWeights::Constant(c),
                ..
            } if c.is_negative() => {
                return Err(Error::BadSpec("diagonal_strip: weights must be non-negative".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Family> {
        self.validate()?;
        let family = match self {
            Self::UniformChain { radius } => birth_death(
                "uniform_chain",
                &[int(1)],
                &[int(1)],
                MetricMode::Combinatorial,
                *radius,
            )?,
            Self::BirthDeath {
                weights,
                measures,
                metric,
                radius,
            } => birth_death("birth_death", weights, measures, *metric, *radius)?,
            Self::GluedChains { k, radius } => glued_chains(*k, *radius)?,
            Self::FoldedProduct { radius, glued } => folded_product(*radius, *glued)?,
            Self::DiagonalStrip { diagonal, radius } => diagonal_strip(diagonal, *radius)?,
            Self::TwoJumpLine { radius } => two_jump_line(*radius)?,
        };
        if !family.graph.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(family)
    }
}

/// Edges whose closed neighbourhoods avoid the rim.
fn interior_edges(g: &WeightedGraph) -> Vec<(usize, usize)> {
    let clear = |v: usize| !g.is_boundary(v) && g.neighbors(v).iter().all(|a| !g.is_boundary(a.to));
    g.edges()
        .map(|(u, a)| (u, a.to))
        .filter(|&(u, v)| clear(u) && clear(v))
        .collect()
}

fn kappa_table(g: &WeightedGraph, relation: Relation, value: Rational) -> Vec<KappaFixture> {
    interior_edges(g)
        .into_iter()
        .map(|(u, v)| KappaFixture {
            x: g.id(u).into(),
            y: g.id(v).into(),
            relation,
            value: value.clone(),
        })
        .collect()
}

fn cyclic(seq: &[Rational], n: i64) -> Rational {
    seq[n.rem_euclid(seq.len() as i64) as usize].clone()
}

fn birth_death(
    name: &str,
    weights: &[Rational],
    measures: &[Rational],
    metric: MetricMode,
    r: i64,
) -> Result<Family> {
    let mut b = GraphBuilder::new();
    b.metric(metric);
    for n in -r..=r {
        b.vertex(n.to_string(), cyclic(measures, n), n.abs() == r);
    }
    for n in -r..r {
        let w = cyclic(weights, n);
        match metric {
            MetricMode::Combinatorial => b.edge(n.to_string(), (n + 1).to_string(), w),
            MetricMode::EdgeLengths => {
                let len = w.recip();
                b.edge_with_length(n.to_string(), (n + 1).to_string(), w, len)
            }
        };
    }
    let g = b.build()?;
    let uniform = weights.iter().all(|w| *w == weights[0]);
    // the signed distance from 0 is harmonic and Lipschitz-sharp
    let h0 = match metric {
        MetricMode::EdgeLengths => {
            let mut vals = Vec::new();
            let mut acc = Rational::zero();
            vals.push(("0".to_string(), acc.clone()));
            for n in 0..r {
                acc += cyclic(weights, n).recip();
                vals.push(((n + 1).to_string(), acc.clone()));
            }
            acc = Rational::zero();
            for n in (-r..0).rev() {
                acc -= cyclic(weights, n).recip();
                vals.push((n.to_string(), acc.clone()));
            }
            Some(vals)
        }
        MetricMode::Combinatorial if uniform => Some((-r..=r).map(|n| (n.to_string(), int(n))).collect()),
        MetricMode::Combinatorial => None,
    };
    let constant = uniform && measures.iter().all(|m| *m == measures[0]);
    let kappa = if constant {
        kappa_table(&g, Relation::Eq, Rational::zero())
    } else if metric == MetricMode::EdgeLengths {
        kappa_table(&g, Relation::Ge, Rational::zero())
    } else {
        Vec::new()
    };
    Ok(Family {
        fixtures: Fixtures {
            family: name.into(),
            kappa,
            h0: h0.map(sorted),
            default_k: vec!["0".into()],
        },
        graph: g,
    })
}

fn sorted(mut v: Vec<(String, Rational)>) -> Vec<(String, Rational)> {
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn glued_chains(k: usize, r: i64) -> Result<Family> {
    let mut b = GraphBuilder::new();
    b.vertex("0", Rational::one(), false);
    let id = |branch: usize, n: i64| if n == 0 { "0".to_string() } else { format!("{branch}:{n}") };
    for branch in 1..=k {
        for n in 1..=r {
            let m = if branch == 1 { Rational::one() } else { pow_int(3, -n) };
            b.vertex(id(branch, n), m, n == r);
        }
        for n in 0..r {
            let w = if branch == 1 {
                Rational::one()
            } else {
                ratio(1, 2) * pow_int(3, -n)
            };
            b.edge(id(branch, n), id(branch, n + 1), w);
        }
    }
    let g = b.build()?;
    let kappa = if k == 3 {
        kappa_table(&g, Relation::Eq, Rational::zero())
    } else {
        Vec::new()
    };
    Ok(Family {
        fixtures: Fixtures {
            family: "glued_chains".into(),
            kappa,
            h0: None,
            default_k: vec!["0".into()],
        },
        graph: g,
    })
}

fn folded_product(r: i64, glued: bool) -> Result<Family> {
    let w_x = |n: i64| pow2(n);
    let m_x = |n: i64| if n == 0 { Rational::one() } else { pow2(n - 1) };
    let w_y = |n: i64| pow2(-n);
    let m_y = |n: i64| pow2(-n);
    let fold = |x: i64, y: i64| (x.min(y), x.max(y));
    // product weight between lattice neighbours of the folded quadrant
    let w0 = |(x1, y1): (i64, i64), (x2, y2): (i64, i64)| -> Rational {
        if y1 == y2 {
            w_x(x1.min(x2)) * m_y(y1)
        } else {
            w_y(y1.min(y2)) * m_x(x1)
        }
    };
    let copies: &[&str] = if glued { &["A", "B"] } else { &["A"] };
    let id = |copy: &str, x: i64, y: i64| {
        if x == 0 && y == 0 {
            "0,0".to_string()
        } else {
            format!("{copy}:{x},{y}")
        }
    };
    let mut b = GraphBuilder::new();
    b.vertex("0,0", m_x(0) * m_y(0), false);
    let mut h0 = vec![("0,0".to_string(), Rational::zero())];
    for (ci, copy) in copies.iter().enumerate() {
        let sign = if ci == 0 { -1 } else { 1 };
        for s in 0..=r {
            for x in 0..=s {
                let y = s - x;
                if s > 0 {
                    let (a, c) = fold(x, y);
                    b.vertex(id(copy, x, y), m_x(a) * m_y(c), s == r);
                    h0.push((id(copy, x, y), int(sign * s)));
                }
                for (nx, ny) in [(x + 1, y), (x, y + 1)] {
                    if nx + ny <= r {
                        let w = w0(fold(x, y), fold(nx, ny));
                        b.edge(id(copy, x, y), id(copy, nx, ny), w);
                    }
                }
            }
        }
    }
    let g = b.build()?;
    let mut kappa = kappa_table(&g, Relation::Ge, Rational::zero());
    if !glued {
        for k in kappa.iter_mut() {
            let corner = [k.x.as_str(), k.y.as_str()];
            if corner.contains(&"0,0") && (corner.contains(&"A:0,1") || corner.contains(&"A:1,0")) {
                k.relation = Relation::Eq;
                k.value = int(2);
            }
        }
    }
    Ok(Family {
        fixtures: Fixtures {
            family: "folded_product".into(),
            kappa,
            h0: if glued { Some(sorted(h0)) } else { None },
            default_k: vec!["0,0".into()],
        },
        graph: g,
    })
}

fn diagonal_strip(diagonal: &DiagonalWeights, r: i64) -> Result<Family> {
    let id = |x: i64, y: i64| format!("{x},{y}");
    let inside = |x: i64, y: i64| (x - y).abs() <= 1 && (x + y).abs() <= r;
    let mut b = GraphBuilder::new();
    let mut h0 = Vec::new();
    let mut points = Vec::new();
    for x in -r..=r {
        for y in x - 1..=x + 1 {
            if inside(x, y) {
                points.push((x, y));
            }
        }
    }
    points.sort_unstable();
    points.dedup();
    for &(x, y) in &points {
        b.vertex(id(x, y), Rational::one(), (x + y).abs() == r);
        h0.push((id(x, y), int(x + y)));
    }
    for &(x, y) in &points {
        for (nx, ny) in [(x + 1, y), (x, y + 1)] {
            if inside(nx, ny) {
                b.edge(id(x, y), id(nx, ny), Rational::one());
            }
        }
        if y == x + 1 && inside(x + 1, x) {
            let w = diagonal.at(x);
            if !w.is_zero() {
                b.edge(id(x, y), id(x + 1, x), w);
            }
        }
    }
    let g = b.build()?;
    Ok(Family {
        fixtures: Fixtures {
            family: "diagonal_strip".into(),
            kappa: kappa_table(&g, Relation::Ge, Rational::zero()),
            h0: Some(sorted(h0)),
            default_k: vec!["0,0".into()],
        },
        graph: g,
    })
}

fn two_jump_line(r: i64) -> Result<Family> {
    let mut b = GraphBuilder::new();
    for n in -r..=r {
        b.vertex(n.to_string(), Rational::one(), n.abs() >= r - 1);
    }
    for n in -r..=r {
        for step in [1, 2] {
            if n + step <= r {
                b.edge(n.to_string(), (n + step).to_string(), Rational::one());
            }
        }
    }
    let g = b.build()?;
    Ok(Family {
        fixtures: Fixtures {
            family: "two_jump_line".into(),
            kappa: kappa_table(&g, Relation::Ge, Rational::zero()),
            h0: Some(sorted((-r..=r).map(|n| (n.to_string(), ratio(n, 2))).collect())),
            default_k: vec!["0".into(), "1".into()],
        },
        graph: g,
    })
}
