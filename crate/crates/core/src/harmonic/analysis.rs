//! Ball-scale ratios (doubling, Poincaré, Harnack, Cheng-Yau) and the two
//! probes behind the classification of slowly growing harmonic functions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dense;
use super::levels::{flux, HarmonicField};
use crate::error::{Error, Result};
use crate::graph::{Field, ScalarField, WeightedGraph};
use crate::lipschitz::gradients;
use crate::metric::Metric;
use crate::rational::Rational;

const TOL: f64 = 1e-9;

/// Solves `Δu = 0` on `interior` with the values of `boundary` on every
/// neighbour outside it.
pub fn solve_dirichlet(g: &WeightedGraph, interior: &[usize], boundary: &ScalarField) -> Result<ScalarField> {
    let n = interior.len();
    let mut slot = vec![usize::MAX; g.len()];
    for (i, &v) in interior.iter().enumerate() {
        slot[v] = i;
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (i, &v) in interior.iter().enumerate() {
        for e in g.neighbors(v) {
            a[(i, i)] += e.weight_f;
            if slot[e.to] != usize::MAX {
                a[(i, slot[e.to])] -= e.weight_f;
            } else {
                let value = boundary
                    .get(e.to)
                    .ok_or_else(|| Error::MissingValue(g.id(e.to).into()))?;
                b[i] += e.weight_f * value;
            }
        }
    }
    let x = a.lu().solve(&b).ok_or(Error::SingularSystem)?;
    let mut out = boundary.clone();
    for (i, &v) in interior.iter().enumerate() {
        if !x[i].is_finite() {
            return Err(Error::SingularSystem);
        }
        out.set(v, x[i]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Bounded-geometry constant: measure and weight ratios and degrees
    /// must stay below it.
    pub lambda: f64,
    /// Random fields for the Poincaré ratio and random positive harmonics
    /// for Harnack and Cheng-Yau.
    pub samples: usize,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            lambda: 100.0,
            samples: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRatios {
    pub radius: u32,
    /// `|B_{2R}| / |B_R|`.
    pub doubling: f64,
    /// Largest sampled `Σ_{B_R} |f − f_R|² / (R² Σ_{B_{2R}} |f(w) − f(z)|²)`.
    pub poincare: f64,
    /// `sup_{B_R} u / inf_{B_R} u`, one entry per sampled harmonic.
    pub harnack: Vec<f64>,
    /// `|∇u|(x) R / u(x)`, one entry per sampled harmonic.
    pub cheng_yau: Vec<f64>,
}

impl AnalysisRatios {
    pub fn harnack_max(&self) -> f64 {
        self.harnack.iter().copied().fold(0.0, f64::max)
    }

    pub fn cheng_yau_max(&self) -> f64 {
        self.cheng_yau.iter().copied().fold(0.0, f64::max)
    }
}

fn check_geometry(g: &WeightedGraph, set: &[usize], lambda: f64) -> Result<()> {
    let b = g.geometry_bounds(set);
    if b.max_measure > lambda * b.min_measure {
        return Err(Error::NotBoundedGeometry(format!(
            "measures range over [{}, {}]",
            b.min_measure, b.max_measure
        )));
    }
    if b.min_weight <= 0.0 || b.max_weight > lambda * b.min_weight {
        return Err(Error::NotBoundedGeometry(format!(
            "weights range over [{}, {}]",
            b.min_weight, b.max_weight
        )));
    }
    if b.max_degree > lambda {
        return Err(Error::NotBoundedGeometry(format!("degree {} exceeds {lambda}", b.max_degree)));
    }
    Ok(())
}

/// The four ball-scale ratios at `x` and radius `R`. Harmonic functions are
/// solved on `{v : d(x,v) < 2R}` with random boundary values in `[1, 2]`.
pub fn analysis_ratios(g: &WeightedGraph, d: &Metric, x: usize, radius: u32, opts: &AnalysisOptions) -> Result<AnalysisRatios> {
    let r = Rational::from_integer(radius.into());
    let big = d.ball(&[x], &(&r * Rational::from_integer(2.into())));
    if !big.reliable {
        return Err(Error::BallTouchesBoundary(g.id(x).into()));
    }
    let small = d.ball(&[x], &r);
    check_geometry(g, &big.members, opts.lambda)?;
    let rf = f64::from(radius);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let doubling = big.members.len() as f64 / small.members.len() as f64;

    let mut poincare: f64 = 0.0;
    for _ in 0..opts.samples {
        let values: Vec<f64> = big.members.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let (sum, sq) = values.iter().fold((0.0, 0.0), |(s, q), v| (s + v, q + v * v));
        let pairs = values.len() as f64 * sq - sum * sum;
        let on_small: Vec<f64> = big
            .members
            .iter()
            .zip(&values)
            .filter(|(v, _)| small.members.binary_search(v).is_ok())
            .map(|(_, &f)| f)
            .collect();
        let mean = on_small.iter().sum::<f64>() / on_small.len() as f64;
        let spread: f64 = on_small.iter().map(|f| (f - mean).powi(2)).sum();
        if pairs > 0.0 {
            poincare = poincare.max(spread / (rf * rf * pairs));
        }
    }

    let row = d.row(x);
    let inner: Vec<usize> = (0..g.len())
        .filter(|&v| row.exact[v].as_ref().is_some_and(|dv| *dv < &r * Rational::from_integer(2.into())))
        .collect();
    let mut outer = Vec::new();
    for &v in &inner {
        for a in g.neighbors(v) {
            if inner.binary_search(&a.to).is_err() {
                outer.push(a.to);
            }
        }
    }
    outer.sort_unstable();
    outer.dedup();

    let mut harnack = Vec::with_capacity(opts.samples);
    let mut cheng_yau = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        let mut data = Field::empty(g.len());
        for &v in &outer {
            data.set(v, rng.random_range(1.0..2.0));
        }
        let u = solve_dirichlet(g, &inner, &data)?;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for &v in &small.members {
            let value = *u.get(v).expect("solved on the ball");
            if value <= 0.0 {
                return Err(Error::NonpositiveHarmonic(g.id(v).into()));
            }
            lo = lo.min(value);
            hi = hi.max(value);
        }
        harnack.push(hi / lo);
        let grad = gradients(g, d, &u, x)?;
        let ux = *u.get(x).expect("centre is solved");
        cheng_yau.push(grad.abs * rf / ux);
    }

    Ok(AnalysisRatios {
        radius,
        doubling,
        poincare,
        harnack,
        cheng_yau,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignChangeReport {
    /// A level met by every band, if one exists.
    pub c: Option<f64>,
    /// `(r, min, max)` of `u` on each resolved band `f⁻¹((r−1, r])`.
    pub bands: Vec<(i64, f64, f64)>,
    /// Bands `(r₁, r₂)` with `min_{A_{r₁}} u > max_{A_{r₂}} u`.
    pub violation: Option<(i64, i64)>,
}

/// Looks for one `c` with `min_{A_r} u ≤ c ≤ max_{A_r} u` on every resolved
/// band `A_r = f⁻¹((r−1, r])`. Requires `⟨u, Δ1_X⟩ = 0`.
pub fn sign_change_probe(hf: &HarmonicField, u: &ScalarField) -> Result<SignChangeReport> {
    let u = dense(hf.g, u)?;
    let scale = u.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let normal = flux(hf.g, hf.p, &u);
    if normal.abs() > TOL * scale {
        return Err(Error::NormalizationFailed(normal));
    }
    let safe = hf.safe_range();
    let (lo_r, hi_r) = if safe.is_finite() {
        ((-safe).floor() as i64 + 1, safe.ceil() as i64 - 1)
    } else {
        let lo = hf.values().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = hf.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo.floor() as i64, hi.ceil() as i64)
    };
    let mut bands = Vec::new();
    for r in lo_r..=hi_r {
        let (a, b) = ((r - 1) as f64, r as f64);
        if a < -safe || b >= safe {
            continue;
        }
        let members = (0..hf.g.len()).filter(|&v| {
            let f = hf.value(v);
            f > a + TOL && f <= b + TOL
        });
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in members {
            min = min.min(u[v]);
            max = max.max(u[v]);
        }
        if min.is_finite() {
            bands.push((r, min, max));
        }
    }
    let high_min = bands.iter().max_by(|a, b| a.1.total_cmp(&b.1));
    let low_max = bands.iter().min_by(|a, b| a.2.total_cmp(&b.2));
    let (c, violation) = match (high_min, low_max) {
        (Some(hm), Some(lm)) if hm.1 > lm.2 + TOL * scale => (None, Some((hm.0, lm.0))),
        (Some(hm), Some(_)) => (Some(hm.1), None),
        _ => (Some(0.0), None),
    };
    Ok(SignChangeReport { c, bands, violation })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubexpRow {
    pub r: i64,
    /// `α_r = ⟨Δ1_{C_r}, u²⟩` with `C_r = f⁻¹((−∞, 2r])`.
    pub alpha: f64,
    /// `α_{r+1} / α_r` where `α_r > 0`, `α_{r−1} / α_r` where `α_r < 0`.
    pub factor: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubexpReport {
    /// Multiple of `f` subtracted from `u` to cancel the end flux.
    pub multiple: f64,
    /// Constant subtracted so that `u` changes sign on every band.
    pub shift: f64,
    pub eps_w: f64,
    /// Edge-weight bound `C`.
    pub edge_bound: f64,
    /// Band size bound `c` for width two.
    pub band_bound: f64,
    /// `ε / (C c⁴)`.
    pub threshold: f64,
    pub rows: Vec<SubexpRow>,
    pub holds: bool,
}

/// Normalises a harmonic `u` against `f` and checks the growth recursion
/// `α_{r+1} − α_r ≥ ε/(C c⁴) α_r` wherever `α_r` is positive (and its
/// mirror image where it is negative).
pub fn subexp_rigidity_probe(hf: &HarmonicField, u: &ScalarField, eps_w: f64) -> Result<SubexpReport> {
    let g = hf.g;
    let raw = dense(g, u)?;
    let multiple = flux(g, hf.p, &raw) / hf.flux();
    let mut u: Vec<f64> = raw.iter().zip(hf.values()).map(|(a, f)| a - multiple * f).collect();
    let shifted = Field::total(u.clone());
    let shift = sign_change_probe(hf, &shifted)?.c.unwrap_or(0.0);
    for v in &mut u {
        *v -= shift;
    }

    let edge_bound = hf.edge_weight_upper_bound()?.bound;
    let band_bound = 2.0 * hf.level_set_size_bound(eps_w)?;
    let threshold = eps_w / (edge_bound * band_bound.powi(4));

    let safe = hf.safe_range();
    let top = if safe.is_finite() {
        safe
    } else {
        hf.values().iter().copied().fold(0.0_f64, |m, v| m.max(v.abs())) + 2.0
    };
    let alpha = |r: i64| -> f64 {
        let level = 2.0 * r as f64;
        let mut acc = 0.0;
        for (x, a) in g.edges() {
            let (fx, fy) = (hf.value(x), hf.value(a.to));
            let (inside, outside) = if fx <= level + TOL && fy > level + TOL {
                (x, a.to)
            } else if fy <= level + TOL && fx > level + TOL {
                (a.to, x)
            } else {
                continue;
            };
            acc += a.weight_f * (u[outside].powi(2) - u[inside].powi(2));
        }
        acc
    };
    // C_r, D_r and D_{r−1} must be resolved: values in (2r − 3, 2r + 3]
    let resolved = |r: i64| {
        let level = 2.0 * r as f64;
        level - 3.0 > -top && level + 3.0 < top
    };
    let lo = (-top / 2.0).floor() as i64;
    let hi = (top / 2.0).ceil() as i64;
    let mut rows = Vec::new();
    let scale = u.iter().fold(1.0_f64, |m, v| m.max(v * v));
    for r in lo..=hi {
        if !resolved(r) {
            continue;
        }
        let a = alpha(r);
        let (factor, ok) = if a > TOL {
            let next = alpha(r + 1);
            (Some(next / a), next - a >= threshold * a - TOL * scale)
        } else if a < -TOL {
            let prev = alpha(r - 1);
            (Some(prev / a), (-prev) - (-a) >= threshold * (-a) - TOL * scale)
        } else {
            (None, true)
        };
        rows.push(SubexpRow { r, alpha: a, factor, ok });
    }
    let holds = rows.iter().all(|row| row.ok);
    Ok(SubexpReport {
        multiple,
        shift,
        eps_w,
        edge_bound,
        band_bound,
        threshold,
        rows,
        holds,
    })
}
