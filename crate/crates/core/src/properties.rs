//! Randomised checks of the structural properties of `S(P)` in exact
//! arithmetic: idempotence, the Lipschitz bound, monotonicity, attainment,
//! extremality, the gradient characterisation and bounded sublevel bands.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{ExactField, Field, WeightedGraph};
use crate::lipschitz::{gradients, Extender};
use crate::metric::Metric;
use crate::partition::{SalamiPartition, Side};
use crate::rational::{ratio, Rational};

/// Names of the checked properties, in report order.
pub const PROPERTY_NAMES: [&str; 9] = [
    "idempotent",
    "lipschitz",
    "monotone",
    "attained-on-x",
    "attained-on-y",
    "minimal-on-x",
    "maximal-on-y",
    "gradient-characterisation",
    "bands-in-ball",
];

/// Values on `K` for one trial, listed in the order of `p.k()`.
#[derive(Debug, Clone)]
pub struct Draw {
    pub f: Vec<Rational>,
    /// Pointwise at least `f`.
    pub upper: Vec<Rational>,
    /// 1-Lipschitz functions on the window agreeing with `f` on `K`.
    pub competitors: Vec<ExactField>,
    /// Half-width of the value band checked for property nine.
    pub band: Rational,
}

fn random_quarter(rng: &mut impl Rng, span: i64) -> Rational {
    ratio(rng.random_range(-4 * span..=4 * span), 4)
}

/// Random 1-Lipschitz data on `K` obtained by inf-convolution of random
/// values with the metric, a dominating copy and two competitors.
pub fn random_draw(g: &WeightedGraph, d: &Metric, p: &SalamiPartition, rng: &mut impl Rng) -> Result<Draw> {
    let k = p.k();
    let dist = |u: usize, v: usize| d.distance(u, v).cloned();
    let inf_conv = |raw: &[Rational]| -> Result<Vec<Rational>> {
        let mut out = Vec::with_capacity(k.len());
        for &a in k {
            let mut best: Option<Rational> = None;
            for (j, &b) in k.iter().enumerate() {
                let c = &raw[j] + dist(a, b)?;
                if best.as_ref().is_none_or(|x| c < *x) {
                    best = Some(c);
                }
            }
            out.push(best.expect("K is non-empty"));
        }
        Ok(out)
    };
    let raw: Vec<Rational> = k.iter().map(|_| random_quarter(rng, 3)).collect();
    let f = inf_conv(&raw)?;
    let lifted: Vec<Rational> = raw
        .iter()
        .map(|r| r + ratio(rng.random_range(0..=8), 4))
        .collect();
    let upper = inf_conv(&lifted)?;

    let mut competitors = Vec::new();
    for lower in [true, false] {
        let anchors: Vec<usize> = (0..3).map(|_| rng.random_range(0..g.len())).collect();
        let mut offsets = Vec::new();
        for &j in &anchors {
            let mut bound: Option<Rational> = None;
            for (i, &a) in k.iter().enumerate() {
                // r_j + d(a, j) ≥ f(a) keeps the minimum equal to f on K
                let c = if lower { &f[i] - dist(a, j)? } else { &f[i] + dist(a, j)? };
                let tighter = bound.as_ref().is_none_or(|b| if lower { c > *b } else { c < *b });
                if tighter {
                    bound = Some(c);
                }
            }
            let t = ratio(rng.random_range(0..=8), 4);
            let b = bound.expect("K is non-empty");
            offsets.push(if lower { b + t } else { b - t });
        }
        let mut h = Vec::with_capacity(g.len());
        for v in 0..g.len() {
            let mut best: Option<Rational> = None;
            let candidates = k
                .iter()
                .zip(&f)
                .map(|(&a, fa)| (a, fa.clone()))
                .chain(anchors.iter().copied().zip(offsets.iter().cloned()));
            for (a, value) in candidates {
                let c = if lower { value + dist(v, a)? } else { value - dist(v, a)? };
                let better = best.as_ref().is_none_or(|b| if lower { c < *b } else { c > *b });
                if better {
                    best = Some(c);
                }
            }
            h.push(best.expect("non-empty"));
        }
        competitors.push(Field::total(h));
    }
    Ok(Draw {
        f,
        upper,
        competitors,
        band: ratio(rng.random_range(0..=12), 2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub holds: [bool; 9],
    /// First failure as (property index, vertex id).
    pub first_failure: Option<(usize, String)>,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

/// Checks the nine properties for one draw. Comparisons are restricted to
/// vertices whose distances to `K` are certified.
pub fn check_properties(g: &WeightedGraph, d: &Metric, p: &SalamiPartition, draw: &Draw) -> Result<PropertyReport> {
    let ext = Extender::<Rational>::new(g, d, p)?;
    ext.check_lipschitz_on_k(g, &draw.f)?;
    let sf = ext.apply(&draw.f);
    let sg = ext.apply(&draw.upper);
    let reliable: Vec<usize> = (0..g.len()).filter(|&v| sf.reliable[v]).collect();
    let value = |field: &ExactField, v: usize| field.get(v).expect("total").clone();
    let mut report = PropertyReport {
        holds: [true; 9],
        first_failure: None,
    };
    let fail = |report: &mut PropertyReport, item: usize, v: usize| {
        if report.holds[item] {
            report.holds[item] = false;
            if report.first_failure.is_none() {
                report.first_failure = Some((item, g.id(v).to_string()));
            }
        }
    };

    let again = ext.apply(&ext.restrict(g, &sf.field)?);
    for v in 0..g.len() {
        if again.field.get(v) != sf.field.get(v) {
            fail(&mut report, 0, v);
        }
    }

    'pairs: for (i, &u) in reliable.iter().enumerate() {
        for &v in &reliable[i + 1..] {
            if !d.certified(u, v) {
                continue;
            }
            let duv = d.distance(u, v)?;
            let diff = value(&sf.field, v) - value(&sf.field, u);
            if diff > *duv || -diff > *duv {
                fail(&mut report, 1, u);
                break 'pairs;
            }
        }
    }

    for v in 0..g.len() {
        if value(&sf.field, v) > value(&sg.field, v) {
            fail(&mut report, 2, v);
        }
    }

    for &v in &reliable {
        let at = sf.attained_at[v];
        let gap = value(&sf.field, at) - value(&sf.field, v);
        match p.side(v) {
            Side::X if gap != *d.distance(at, v)? => fail(&mut report, 3, v),
            Side::Y if -gap != *d.distance(at, v)? => fail(&mut report, 4, v),
            _ => {}
        }
    }

    for h in &draw.competitors {
        for &v in &reliable {
            let (s, hv) = (value(&sf.field, v), value(h, v));
            match p.side(v) {
                Side::X if s > hv => fail(&mut report, 5, v),
                Side::Y if s < hv => fail(&mut report, 6, v),
                Side::K if s != hv => {
                    fail(&mut report, 5, v);
                    fail(&mut report, 6, v);
                }
                _ => {}
            }
        }
    }

    let one = Rational::one();
    for &v in &reliable {
        if g.is_boundary(v) || !g.neighbors(v).iter().all(|a| sf.reliable[a.to]) {
            continue;
        }
        let grad = gradients(g, d, &sf.field, v)?;
        match p.side(v) {
            Side::X if grad.plus != one => fail(&mut report, 7, v),
            Side::Y if grad.minus != one => fail(&mut report, 7, v),
            _ => {}
        }
    }

    let sup_k = draw
        .f
        .iter()
        .fold(Rational::zero(), |m, x| if x.abs() > m { x.abs() } else { m });
    let ball = d.ball(p.k(), &(&sup_k + &draw.band));
    for v in 0..g.len() {
        if value(&sf.field, v).abs() <= draw.band && ball.members.binary_search(&v).is_err() {
            fail(&mut report, 8, v);
        }
    }
    Ok(report)
}

/// A random connected `K = B_ρ(c)` with `ρ ≤ max_radius` around an interior
/// centre whose complement splits; the component holding the least vertex
/// becomes `X` and the rest `Y`. `None` after 200 failed attempts.
pub fn random_partition(
    g: &WeightedGraph,
    d: &Metric,
    rng: &mut impl Rng,
    max_radius: i64,
) -> Option<SalamiPartition> {
    let interior: Vec<usize> = (0..g.len()).filter(|&v| !g.is_boundary(v)).collect();
    if interior.is_empty() {
        return None;
    }
    for _ in 0..200 {
        let centre = interior[rng.random_range(0..interior.len())];
        let radius = Rational::from_integer(rng.random_range(0..=max_radius).into());
        let ball = d.ball(&[centre], &radius);
        if !ball.reliable {
            continue;
        }
        let mut mask = vec![true; g.len()];
        for &v in &ball.members {
            mask[v] = false;
        }
        let comps = g.components(&mask);
        if comps.len() < 2 {
            continue;
        }
        let Ok(p) = SalamiPartition::from_k_and_seeds(g, &ball.members, &comps[0]) else {
            continue;
        };
        if Extender::<f64>::new(g, d, &p).is_ok() {
            return Some(p);
        }
    }
    None
}

/// A random connected set grown from `root` by adding uniformly chosen
/// frontier vertices, of size at most `max_size`, keeping distance at least
/// `margin` hops from the rim.
pub fn random_connected_set(
    g: &WeightedGraph,
    root: usize,
    rng: &mut impl Rng,
    max_size: usize,
    margin: usize,
) -> Vec<usize> {
    let rim: Vec<usize> = (0..g.len()).filter(|&v| g.is_boundary(v)).collect();
    let hops = g.hop_distances(&rim, &vec![true; g.len()]);
    let allowed = |v: usize| hops[v].is_none_or(|h| h >= margin);
    let target = rng.random_range(1..=max_size.max(1));
    let mut set = vec![root];
    let mut frontier: Vec<usize> = Vec::new();
    let mut seen = vec![false; g.len()];
    seen[root] = true;
    let push_neighbours = |v: usize, frontier: &mut Vec<usize>, seen: &mut Vec<bool>| {
        for a in g.neighbors(v) {
            if !seen[a.to] && allowed(a.to) {
                seen[a.to] = true;
                frontier.push(a.to);
            }
        }
    };
    push_neighbours(root, &mut frontier, &mut seen);
    while set.len() < target && !frontier.is_empty() {
        let v = frontier.swap_remove(rng.random_range(0..frontier.len()));
        set.push(v);
        push_neighbours(v, &mut frontier, &mut seen);
    }
    set.sort_unstable();
    set
}
