//! Level sets, the quasi-isometry sandwich, recurrence quotients and the
//! edge-weight bound of a Lipschitz-sharp harmonic function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dense;
use crate::error::{Error, Result};
use crate::graph::{ScalarField, WeightedGraph};
use crate::metric::Metric;
use crate::partition::{SalamiPartition, Side};

const TOL: f64 = 1e-9;
const EXHAUSTIVE_LIMIT: usize = 2000;
const SAMPLED_PAIRS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetReport {
    /// The band `[a, b)`.
    pub band: (f64, f64),
    pub members: Vec<usize>,
    pub connected: bool,
    pub size: usize,
    /// Size bound from the crossing sum, when one was requested.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiIsometryReport {
    pub c: f64,
    pub holds: bool,
    pub pairs_checked: usize,
    pub exhaustive: bool,
    /// First failing pair `(u, v, |f(u) − f(v)|, d(u,v))`.
    pub violation: Option<(usize, usize, f64, f64)>,
    /// The left inequality is an equality on every checked pair.
    pub left_tight: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeWeightReport {
    /// `⟨Δ1_X, f⟩ / ε_gap`.
    pub bound: f64,
    pub flux: f64,
    pub gap: f64,
    pub jump_edges: usize,
    /// First jump edge heavier than the bound.
    pub violation: Option<(usize, usize, f64)>,
}

impl EdgeWeightReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// A harmonic field on a window together with the range of values the
/// window resolves: every vertex with `|f| < safe` lies at distance less than
/// `d(∂, K)` from `K`, so its value and neighbourhood are genuine.
#[derive(Debug, Clone)]
pub struct HarmonicField<'a> {
    pub(crate) g: &'a WeightedGraph,
    pub(crate) d: &'a Metric,
    pub(crate) p: &'a SalamiPartition,
    pub(crate) f: Vec<f64>,
    safe: f64,
}

impl<'a> HarmonicField<'a> {
    /// Shifts `f` so that it vanishes at the least vertex of `K`.
    pub fn new(g: &'a WeightedGraph, d: &'a Metric, p: &'a SalamiPartition, f: &ScalarField) -> Result<Self> {
        let mut f = dense(g, f)?;
        let shift = f[p.k()[0]];
        for v in &mut f {
            *v -= shift;
        }
        let safe = if d.has_boundary() {
            let rim = p
                .k()
                .iter()
                .map(|&k| d.boundary_distance_f(k))
                .fold(f64::INFINITY, f64::min);
            let sup = p.k().iter().map(|&k| f[k].abs()).fold(0.0, f64::max);
            rim - sup
        } else {
            f64::INFINITY
        };
        Ok(Self { g, d, p, f, safe })
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn value(&self, v: usize) -> f64 {
        self.f[v]
    }

    /// Values in `(−safe, safe)` are resolved by the window.
    pub fn safe_range(&self) -> f64 {
        self.safe
    }

    pub fn in_region(&self, v: usize) -> bool {
        self.f[v].abs() < self.safe - TOL
    }

    /// Vertices whose value is resolved by the window.
    pub fn region(&self) -> Vec<usize> {
        (0..self.g.len()).filter(|&v| self.in_region(v)).collect()
    }

    /// The `f` values attained, lowest and highest.
    fn value_range(&self) -> (f64, f64) {
        let lo = self.f.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn nearest_rim(&self) -> String {
        let rim = (0..self.g.len())
            .filter(|&v| self.g.is_boundary(v))
            .min_by(|&a, &b| self.f[a].abs().total_cmp(&self.f[b].abs()));
        rim.map(|v| self.g.id(v).to_string()).unwrap_or_default()
    }

    /// `f⁻¹([a, b))`, connectivity by search inside the band.
    pub fn level_sets(&self, a: f64, b: f64) -> Result<LevelSetReport> {
        if a <= -self.safe || b > self.safe {
            return Err(Error::BandTouchesBoundary(a, b));
        }
        let mask: Vec<bool> = self.f.iter().map(|&v| v >= a - TOL && v < b - TOL).collect();
        let members: Vec<usize> = (0..self.g.len()).filter(|&v| mask[v]).collect();
        let connected = self.g.components(&mask).len() <= 1;
        Ok(LevelSetReport {
            band: (a, b),
            size: members.len(),
            members,
            connected,
            bound: None,
        })
    }

    /// Every band `[a, a + width)` with integer `a` that the window resolves.
    pub fn bands(&self, width: f64) -> Vec<LevelSetReport> {
        let (lo, hi) = if self.safe.is_finite() {
            (-self.safe, self.safe)
        } else {
            let (lo, hi) = self.value_range();
            (lo - 1.0, hi + 1.0)
        };
        let mut out = Vec::new();
        let mut a = lo.floor();
        while a + width <= hi {
            if let Ok(report) = self.level_sets(a, a + width) {
                out.push(report);
            }
            a += 1.0;
        }
        out
    }

    fn check_weights(&self, eps_w: f64) -> Result<()> {
        for (u, a) in self.g.edges() {
            if a.weight_f < eps_w - TOL * eps_w.max(1.0) {
                return Err(Error::WeightBelowEpsilon(self.g.id(u).into(), self.g.id(a.to).into()));
            }
        }
        Ok(())
    }

    /// `s₀ = Σ_{f(y) < 0 ≤ f(x)} w(x,y) (f(x) − f(y))`.
    pub fn crossing_sum(&self) -> f64 {
        self.g
            .edges()
            .map(|(u, a)| {
                let (fu, fv) = (self.f[u], self.f[a.to]);
                let (lo, hi) = if fu < fv { (fu, fv) } else { (fv, fu) };
                if lo < -TOL && hi >= -TOL {
                    a.weight_f * (hi - lo)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// `s₀ / ε_w`, bounding the size of every band of width one.
    pub fn level_set_size_bound(&self, eps_w: f64) -> Result<f64> {
        self.check_weights(eps_w)?;
        Ok(self.crossing_sum() / eps_w)
    }

    /// Width-one bands with the size bound attached.
    pub fn bounded_bands(&self, eps_w: f64) -> Result<Vec<LevelSetReport>> {
        let bound = self.level_set_size_bound(eps_w)?;
        Ok(self
            .bands(1.0)
            .into_iter()
            .map(|mut r| {
                r.bound = Some(bound);
                r
            })
            .collect())
    }

    /// Twice the level-set bound.
    pub fn dim_bound(&self, eps_w: f64) -> Result<f64> {
        Ok(2.0 * self.level_set_size_bound(eps_w)?)
    }

    /// `|f(x) − f(y)| ≤ d(x,y) ≤ |f(x) − f(y)| + C` with `C = 2 s₀ / ε_w`,
    /// over pairs of resolved vertices with certified distance.
    pub fn quasi_isometry_check(&self, eps_w: f64) -> Result<QuasiIsometryReport> {
        let c = 2.0 * self.level_set_size_bound(eps_w)?;
        let region = self.region();
        let exhaustive = region.len() <= EXHAUSTIVE_LIMIT;
        let pairs: Vec<(usize, usize)> = if exhaustive {
            region
                .iter()
                .enumerate()
                .flat_map(|(i, &u)| region[i + 1..].iter().map(move |&v| (u, v)))
                .collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            (0..SAMPLED_PAIRS)
                .map(|_| (region[rng.random_range(0..region.len())], region[rng.random_range(0..region.len())]))
                .filter(|(u, v)| u != v)
                .collect()
        };
        let mut report = QuasiIsometryReport {
            c,
            holds: true,
            pairs_checked: 0,
            exhaustive,
            violation: None,
            left_tight: true,
        };
        for (u, v) in pairs {
            if !self.d.certified(u, v) {
                continue;
            }
            let dist = self.d.distance_f(u, v);
            let jump = (self.f[u] - self.f[v]).abs();
            report.pairs_checked += 1;
            if (jump - dist).abs() > TOL * dist.max(1.0) {
                report.left_tight = false;
            }
            let ok = jump <= dist + TOL * dist.max(1.0) && dist <= jump + c + TOL * dist.max(1.0);
            if !ok && report.violation.is_none() {
                report.holds = false;
                report.violation = Some((u, v, jump, dist));
            }
        }
        Ok(report)
    }

    /// `−⟨g, Δg⟩ / R²` for the tent `g = (R − |f|)₊`.
    pub fn recurrence_quotient(&self, radius: f64) -> Result<f64> {
        if radius <= 0.0 {
            return Err(Error::DegenerateTestFunction);
        }
        if radius > self.safe {
            return Err(Error::SupportTouchesBoundary(self.nearest_rim()));
        }
        let tent: Vec<f64> = self.f.iter().map(|&v| (radius - v.abs()).max(0.0)).collect();
        let mut energy = 0.0;
        for v in 0..self.g.len() {
            if tent[v] == 0.0 {
                continue;
            }
            if self.g.is_boundary(v) {
                return Err(Error::SupportTouchesBoundary(self.g.id(v).into()));
            }
            let mut lap = 0.0;
            for a in self.g.neighbors(v) {
                lap += a.weight_f * (tent[a.to] - tent[v]);
            }
            // m(v) g(v) Δg(v) with the measure cancelled
            energy -= tent[v] * lap;
        }
        Ok(energy / (radius * radius))
    }

    /// `⟨Δ1_X, f⟩ = Σ_{x∈X, y∉X} w(x,y) (f(y) − f(x))`.
    pub fn flux(&self) -> f64 {
        flux(self.g, self.p, &self.f)
    }

    /// `⟨Δ1_X, f⟩ / ε_gap` with `ε_gap` the smallest non-zero jump of `f`
    /// along a resolved edge, checked against the weight of every jump edge.
    pub fn edge_weight_upper_bound(&self) -> Result<EdgeWeightReport> {
        let jumps: Vec<(usize, usize, f64, f64)> = self
            .g
            .edges()
            .filter(|&(u, a)| self.in_region(u) && self.in_region(a.to))
            .map(|(u, a)| (u, a.to, (self.f[u] - self.f[a.to]).abs(), a.weight_f))
            .filter(|&(_, _, jump, _)| jump > TOL)
            .collect();
        let gap = jumps.iter().map(|j| j.2).fold(f64::INFINITY, f64::min);
        if jumps.is_empty() {
            return Err(Error::NoJumpEdges);
        }
        let flux = self.flux();
        let bound = flux / gap;
        let violation = jumps
            .iter()
            .find(|&&(_, _, _, w)| w > bound + TOL * bound.abs().max(1.0))
            .map(|&(u, v, _, w)| (u, v, w));
        Ok(EdgeWeightReport {
            bound,
            flux,
            gap,
            jump_edges: jumps.len(),
            violation,
        })
    }
}

pub(crate) fn flux(g: &WeightedGraph, p: &SalamiPartition, u: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &x in p.x() {
        for a in g.neighbors(x) {
            if p.side(a.to) != Side::X {
                acc += a.weight_f * (u[a.to] - u[x]);
            }
        }
    }
    acc
}
