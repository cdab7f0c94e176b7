//! 1-Lipschitz predicates, discrete gradients and the extremal extension
//! `S(P)`: the smallest 1-Lipschitz extension of `f|K` towards `X` and the
//! largest towards `Y`.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Field, WeightedGraph};
use crate::metric::Metric;
use crate::partition::{SalamiPartition, Side};
use crate::rational::{Number, Rational};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradients<T> {
    pub plus: T,
    pub minus: T,
    pub abs: T,
}

/// `∇₊f(x) = max_{y∼x} (f(y) − f(x))/d(x,y)`, `∇₋f(x)` with the sign
/// flipped and `|∇f|(x) = max(∇₊, ∇₋)`. Maxima are reported as found, so
/// `∇₊` is negative at a strict local maximum.
pub fn gradients<T: Number>(g: &WeightedGraph, d: &Metric, f: &Field<T>, x: usize) -> Result<Gradients<T>> {
    let fx = f.get(x).ok_or_else(|| Error::MissingValue(g.id(x).into()))?;
    let mut plus: Option<T> = None;
    let mut minus: Option<T> = None;
    for a in g.neighbors(x) {
        let fy = f.get(a.to).ok_or_else(|| Error::MissingValue(g.id(a.to).into()))?;
        let dist = d.distance(x, a.to)?;
        let dt = T::from_parts(dist, crate::rational::to_f64(dist));
        let up = (fy.clone() - fx.clone()).div(&dt);
        let down = (fx.clone() - fy.clone()).div(&dt);
        if plus.as_ref().is_none_or(|p| up > *p) {
            plus = Some(up);
        }
        if minus.as_ref().is_none_or(|m| down > *m) {
            minus = Some(down);
        }
    }
    let plus = plus.unwrap_or_else(T::nil);
    let minus = minus.unwrap_or_else(T::nil);
    let abs = if plus > minus { plus.clone() } else { minus.clone() };
    Ok(Gradients { plus, minus, abs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzVerdict {
    /// First pair `(u, v, f(v) − f(u), d(u,v))` with `f(v) − f(u) > d(u,v)`.
    pub violation: Option<(usize, usize, f64, f64)>,
    pub pairs_checked: usize,
    /// Pairs whose window distance the rim could have shortened. A violation
    /// on such a pair is still genuine since window distances never
    /// undershoot; a pass there is not a certificate.
    pub uncertified: usize,
    pub exhaustive: bool,
}

impl LipschitzVerdict {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

const EXHAUSTIVE_LIMIT: usize = 600;
const SAMPLED_PAIRS: usize = 20_000;

/// Checks `f(v) − f(u) ≤ d(u,v)` on `subset`: every pair for small subsets,
/// otherwise every edge plus a seeded sample of pairs.
pub fn is_lipschitz(g: &WeightedGraph, d: &Metric, f: &Field<f64>, subset: &[usize]) -> Result<LipschitzVerdict> {
    for &v in subset {
        if f.get(v).is_none() {
            return Err(Error::MissingValue(g.id(v).into()));
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let exhaustive = subset.len() <= EXHAUSTIVE_LIMIT;
    if exhaustive {
        for (i, &u) in subset.iter().enumerate() {
            for &v in &subset[i + 1..] {
                pairs.push((u, v));
            }
        }
    } else {
        let mut inside = vec![false; g.len()];
        for &v in subset {
            inside[v] = true;
        }
        for (u, a) in g.edges() {
            if inside[u] && inside[a.to] {
                pairs.push((u, a.to));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..SAMPLED_PAIRS {
            let pick: Vec<&usize> = subset.choose_multiple(&mut rng, 2).collect();
            pairs.push((*pick[0], *pick[1]));
        }
    }
    let mut verdict = LipschitzVerdict {
        violation: None,
        pairs_checked: 0,
        uncertified: 0,
        exhaustive,
    };
    for (u, v) in pairs {
        let (fu, fv) = (f.get(u).copied().unwrap_or(0.0), f.get(v).copied().unwrap_or(0.0));
        let dist = d.distance_f(u, v);
        verdict.pairs_checked += 1;
        if !d.certified(u, v) {
            verdict.uncertified += 1;
        }
        if (fv - fu).abs() > dist + 1e-9 {
            let (a, b) = if fv > fu { (u, v) } else { (v, u) };
            verdict.violation = Some((a, b, (fv - fu).abs(), dist));
            break;
        }
    }
    Ok(verdict)
}

/// First edge `(u, v)` with `f(v) − f(u) > d(u,v)`; on a path metric this
/// is equivalent to a global violation.
pub fn is_lipschitz_on_edges(g: &WeightedGraph, d: &Metric, f: &Field<f64>) -> Option<(usize, usize, f64, f64)> {
    for (u, a) in g.edges() {
        let (Some(fu), Some(fv)) = (f.get(u), f.get(a.to)) else { continue };
        let dist = d.distance_f(u, a.to);
        if (fv - fu).abs() > dist + 1e-9 {
            let (x, y) = if fv > fu { (u, a.to) } else { (a.to, u) };
            return Some((x, y, (fv - fu).abs(), dist));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionResult<T> {
    pub field: Field<T>,
    /// The `K` vertex attaining the sup (on `X`) or inf (on `Y`); `v` itself
    /// on `K`.
    pub attained_at: Vec<usize>,
    /// Every distance from the vertex to `K` is certified by the window.
    pub reliable: Vec<bool>,
}

/// `S(P)` with the distances from `K` tabulated once, for repeated use.
#[derive(Debug, Clone)]
pub struct Extender<T> {
    k: Vec<usize>,
    side: Vec<Side>,
    /// `dist[v][i] = d(v, k_i)`.
    dist: Vec<Vec<T>>,
    reliable: Vec<bool>,
}

impl<T: Number> Extender<T> {
    /// Fails with `WindowBufferTooSmall` if a vertex of `B₁(K)` has an
    /// uncertified distance to `K`.
    pub fn new(g: &WeightedGraph, d: &Metric, p: &SalamiPartition) -> Result<Self> {
        let k = p.k().to_vec();
        let mut dist = vec![Vec::with_capacity(k.len()); g.len()];
        let mut reliable = vec![true; g.len()];
        for &w in &k {
            let row = d.row(w);
            for v in 0..g.len() {
                let exact = row.exact[v]
                    .as_ref()
                    .ok_or_else(|| Error::DisconnectedQuery(g.id(v).into(), g.id(w).into()))?;
                dist[v].push(T::from_parts(exact, row.approx[v]));
                if reliable[v] && !d.certified(v, w) {
                    reliable[v] = false;
                }
            }
        }
        for v in p.closed_neighbourhood(g) {
            if !reliable[v] {
                return Err(Error::WindowBufferTooSmall(g.id(v).into()));
            }
        }
        Ok(Self {
            k,
            side: (0..g.len()).map(|v| p.side(v)).collect(),
            dist,
            reliable,
        })
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn reliable(&self) -> &[bool] {
        &self.reliable
    }

    /// `S(P)f` from the values on `K`, listed in the order of [`Self::k`].
    pub fn apply(&self, on_k: &[T]) -> ExtensionResult<T> {
        let n = self.side.len();
        let mut values = Vec::with_capacity(n);
        let mut attained_at = Vec::with_capacity(n);
        for v in 0..n {
            let (value, at) = match self.side[v] {
                Side::K => {
                    let i = self.k.binary_search(&v).expect("K vertex");
                    (on_k[i].clone(), v)
                }
                Side::X => {
                    let mut best: Option<(T, usize)> = None;
                    for (i, fk) in on_k.iter().enumerate() {
                        let c = fk.clone() - self.dist[v][i].clone();
                        if best.as_ref().is_none_or(|(b, _)| c > *b) {
                            best = Some((c, self.k[i]));
                        }
                    }
                    best.expect("K is non-empty")
                }
                Side::Y => {
                    let mut best: Option<(T, usize)> = None;
                    for (i, fk) in on_k.iter().enumerate() {
                        let c = fk.clone() + self.dist[v][i].clone();
                        if best.as_ref().is_none_or(|(b, _)| c < *b) {
                            best = Some((c, self.k[i]));
                        }
                    }
                    best.expect("K is non-empty")
                }
            };
            values.push(value);
            attained_at.push(at);
        }
        ExtensionResult {
            field: Field::total(values),
            attained_at,
            reliable: self.reliable.clone(),
        }
    }

    /// Values of `f` on `K`, in the order of [`Self::k`].
    pub fn restrict(&self, g: &WeightedGraph, f: &Field<T>) -> Result<Vec<T>> {
        self.k
            .iter()
            .map(|&v| f.get(v).cloned().ok_or_else(|| Error::MissingValue(g.id(v).into())))
            .collect()
    }

    /// Checks `f|K ∈ Lip(1, K)`.
    pub fn check_lipschitz_on_k(&self, g: &WeightedGraph, on_k: &[T]) -> Result<()> {
        for (i, &u) in self.k.iter().enumerate() {
            for (j, &v) in self.k.iter().enumerate() {
                if i != j && on_k[j].clone() - on_k[i].clone() > self.dist[u][j].clone() + T::slack() {
                    return Err(Error::NotLipschitzOnK(g.id(u).into(), g.id(v).into()));
                }
            }
        }
        Ok(())
    }
}

/// `S(P)f`: `sup_{w∈K} f(w) − d(v,w)` on `X`, `inf_{w∈K} f(w) + d(v,w)` on
/// `Y` and `f` on `K`.
pub fn extend<T: Number>(
    g: &WeightedGraph,
    d: &Metric,
    p: &SalamiPartition,
    f: &Field<T>,
) -> Result<ExtensionResult<T>> {
    let ext = Extender::new(g, d, p)?;
    let on_k = ext.restrict(g, f)?;
    ext.check_lipschitz_on_k(g, &on_k)?;
    Ok(ext.apply(&on_k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    /// Largest `|S(P)(f|K) − f|` over reliable vertices.
    pub deviation: f64,
    /// `f` falls below `min_K f − ρ/2` on `X` and rises above
    /// `max_K f + ρ/2` on `Y`, where `ρ` is the distance from `K` to the rim.
    pub diverges: bool,
    /// The limit conditions were replaced by the window proxy.
    pub window_approximate: bool,
}

fn rim_radius(g: &WeightedGraph, d: &Metric, p: &SalamiPartition) -> Option<f64> {
    (0..g.len())
        .filter(|&v| g.is_boundary(v))
        .filter_map(|v| d.distance_to_set(v, p.k()).map(|(_, r)| r))
        .min_by(f64::total_cmp)
}

fn divergence_proxy(g: &WeightedGraph, d: &Metric, p: &SalamiPartition, f: &Field<f64>) -> (bool, bool) {
    let Some(radius) = rim_radius(g, d, p) else {
        return (true, true);
    };
    let on_k: Vec<f64> = p.k().iter().filter_map(|&v| f.get(v).copied()).collect();
    let lo = on_k.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = on_k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_x = p.x().iter().filter_map(|&v| f.get(v).copied()).fold(f64::INFINITY, f64::min);
    let max_y = p.y().iter().filter_map(|&v| f.get(v).copied()).fold(f64::NEG_INFINITY, f64::max);
    (min_x < lo - radius / 2.0 && max_y > hi + radius / 2.0, true)
}

/// `f ∈ F(P)` on the window: `S(P)(f|K) = f` on reliable vertices, together
/// with the divergence proxy for the limits along `X` and `Y`.
pub fn in_f(g: &WeightedGraph, d: &Metric, p: &SalamiPartition, f: &Field<f64>) -> Result<MembershipReport> {
    let ext = Extender::<f64>::new(g, d, p)?;
    let on_k = ext.restrict(g, f)?;
    if ext.check_lipschitz_on_k(g, &on_k).is_err() {
        return Ok(MembershipReport {
            member: false,
            deviation: f64::INFINITY,
            diverges: false,
            window_approximate: true,
        });
    }
    let sf = ext.apply(&on_k);
    let mut deviation = 0.0f64;
    for v in 0..g.len() {
        if !sf.reliable[v] {
            continue;
        }
        let fv = f.get(v).ok_or_else(|| Error::MissingValue(g.id(v).into()))?;
        deviation = deviation.max((sf.field.get(v).expect("total") - fv).abs());
    }
    let (diverges, window_approximate) = divergence_proxy(g, d, p, f);
    Ok(MembershipReport {
        member: deviation <= 1e-9 && diverges,
        deviation,
        diverges,
        window_approximate,
    })
}

/// The gradient characterisation of `F(P)`: `f ∈ Lip(1)`, `∇₊f = 1` on `X`,
/// `∇₋f = 1` on `Y` (at vertices off the rim) and the divergence proxy.
pub fn in_f_by_gradients(g: &WeightedGraph, d: &Metric, p: &SalamiPartition, f: &Field<f64>) -> Result<bool> {
    if is_lipschitz_on_edges(g, d, f).is_some() {
        return Ok(false);
    }
    for v in 0..g.len() {
        if g.is_boundary(v) {
            continue;
        }
        let grad = gradients(g, d, f, v)?;
        let ok = match p.side(v) {
            Side::X => (grad.plus - 1.0).abs() <= 1e-9,
            Side::Y => (grad.minus - 1.0).abs() <= 1e-9,
            Side::K => true,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(divergence_proxy(g, d, p, f).0)
}

/// `Sf ≤ Sg` everywhere whenever `f|K ≤ g|K`.
pub fn monotonicity_check(
    g: &WeightedGraph,
    d: &Metric,
    p: &SalamiPartition,
    f: &Field<f64>,
    h: &Field<f64>,
) -> Result<bool> {
    for &v in p.k() {
        let (Some(a), Some(b)) = (f.get(v), h.get(v)) else {
            return Err(Error::MissingValue(g.id(v).into()));
        };
        if a > b {
            return Err(Error::HypothesisFails(g.id(v).into()));
        }
    }
    let sf = extend(g, d, p, f)?;
    let sh = extend(g, d, p, h)?;
    Ok((0..g.len()).all(|v| sf.field.get(v).expect("total") <= &(sh.field.get(v).expect("total") + 1e-9)))
}

/// Exact Lipschitz check of a rational field on all pairs of `subset`.
pub fn is_lipschitz_exact(d: &Metric, f: &Field<Rational>, subset: &[usize]) -> bool {
    subset.iter().all(|&u| {
        subset.iter().all(|&v| match (f.get(u), f.get(v)) {
            (Some(fu), Some(fv)) => u == v || fv - fu <= *d.distance(u, v).expect("connected"),
            _ => false,
        })
    })
}
