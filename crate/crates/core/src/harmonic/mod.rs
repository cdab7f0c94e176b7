//! Synthesis of Lipschitz-sharp harmonic functions through the iteration
//! `f ← S(P)(f + εΔf)` and the quantitative checks built on the result.

mod analysis;
mod levels;

pub use analysis::{
    analysis_ratios, sign_change_probe, solve_dirichlet, subexp_rigidity_probe, AnalysisOptions, AnalysisRatios,
    SignChangeReport, SubexpReport, SubexpRow,
};
pub use levels::{EdgeWeightReport, HarmonicField, LevelSetReport, QuasiIsometryReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ExactField, Field, ScalarField, WeightedGraph};
use crate::lipschitz::{gradients, Extender};
use crate::metric::Metric;
use crate::partition::SalamiPartition;
use crate::rational::{approximate, Rational};

/// Largest denominator accepted when snapping converged values on `K` to
/// rationals.
const SNAP_DENOMINATOR: u64 = 1 << 20;
const SNAP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Step size; `None` picks the default from the degrees around `K`.
    pub epsilon: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            epsilon: None,
            tol: 1e-9,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub field: ScalarField,
    /// `Δf` on each vertex of `K`.
    pub laplacian_on_k: Vec<(usize, f64)>,
    /// Mean of `Δf` over `K`.
    pub constant_c: f64,
    pub iterations: usize,
    /// `max_K Δf − min_K Δf` of the returned field.
    pub residual: f64,
    /// Residual of every iterate, starting with `S(P)(0|K)`.
    pub history: Vec<f64>,
    /// `max_K Δf` of every iterate.
    pub max_history: Vec<f64>,
    pub epsilon: f64,
    /// Per vertex: every distance to `K` is certified by the window.
    pub reliable: Vec<bool>,
}

impl SynthesisResult {
    /// `max_K Δf` never increased along the iteration (up to `1e-9`).
    pub fn max_laplacian_monotone(&self) -> bool {
        self.max_history.windows(2).all(|w| w[1] <= w[0] + 1e-9)
    }

    /// Interior vertices whose closed neighbourhood carries reliable values:
    /// the vertices where `Δf` and the gradients are those of the infinite
    /// graph.
    pub fn certified_region(&self, g: &WeightedGraph) -> Vec<usize> {
        (0..g.len())
            .filter(|&v| {
                !g.is_boundary(v) && self.reliable[v] && g.neighbors(v).iter().all(|a| self.reliable[a.to])
            })
            .collect()
    }
}

/// `1 / max (Deg(x) + Deg(y))` over distinct `x, y ∈ K`: the step sizes for
/// which `f + εΔf` stays 1-Lipschitz on `K`. Infinite for a single vertex.
pub fn admissible_epsilon(g: &WeightedGraph, p: &SalamiPartition) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &x) in p.k().iter().enumerate() {
        for &y in &p.k()[i + 1..] {
            worst = worst.max(g.degree_f(x) + g.degree_f(y));
        }
    }
    if worst > 0.0 {
        1.0 / worst
    } else {
        f64::INFINITY
    }
}

/// `0.9 / max (Deg(x) + Deg(y))` over edges inside `B₁(K)` and over pairs
/// in `K`.
pub fn default_epsilon(g: &WeightedGraph, p: &SalamiPartition) -> f64 {
    let ball = p.closed_neighbourhood(g);
    let mut worst: f64 = 0.0;
    for &x in &ball {
        for a in g.neighbors(x) {
            if ball.binary_search(&a.to).is_ok() {
                worst = worst.max(g.degree_f(x) + g.degree_f(a.to));
            }
        }
    }
    let on_k = admissible_epsilon(g, p);
    if on_k.is_finite() {
        worst = worst.max(1.0 / on_k);
    }
    if worst > 0.0 {
        0.9 / worst
    } else {
        0.9
    }
}

/// Iterates `f ← S(P)((f + εΔf)|K)` from `S(P)(0|K)`, keeping `f(x₀) = 0`
/// at the least vertex `x₀` of `K`, until `Δf` is constant on `K` up to
/// `tol`.
pub fn synthesize(
    g: &WeightedGraph,
    d: &Metric,
    p: &SalamiPartition,
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    let bound = admissible_epsilon(g, p);
    let epsilon = match opts.epsilon {
        Some(e) if e > bound || e <= 0.0 => return Err(Error::EpsilonTooLarge { epsilon: e, bound }),
        Some(e) => e,
        None => default_epsilon(g, p),
    };
    let ext = Extender::<f64>::new(g, d, p)?;
    let k = ext.k().to_vec();
    let mut on_k = vec![0.0; k.len()];
    let mut history = Vec::new();
    let mut max_history = Vec::new();
    let mut iterations = 0;
    loop {
        let ext_f = ext.apply(&on_k);
        let lap = k
            .iter()
            .map(|&v| g.laplacian_at(&ext_f.field, v))
            .collect::<Result<Vec<f64>>>()?;
        let max = lap.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = lap.iter().copied().fold(f64::INFINITY, f64::min);
        let residual = max - min;
        history.push(residual);
        max_history.push(max);
        if residual <= opts.tol {
            return Ok(SynthesisResult {
                field: ext_f.field,
                laplacian_on_k: k.iter().copied().zip(lap.iter().copied()).collect(),
                constant_c: lap.iter().sum::<f64>() / lap.len() as f64,
                iterations,
                residual,
                history,
                max_history,
                epsilon,
                reliable: ext_f.reliable,
            });
        }
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual,
                history,
            });
        }
        for (value, l) in on_k.iter_mut().zip(&lap) {
            *value += epsilon * l;
        }
        let shift = on_k[0];
        for value in &mut on_k {
            *value -= shift;
        }
        ext.check_lipschitz_on_k(g, &on_k)?;
        iterations += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicCheck {
    pub pass: bool,
    pub checked: usize,
    /// Vertex with the largest `|Δf|` and that value.
    pub worst: Option<(usize, f64)>,
}

/// `|Δf| ≤ tol` on every vertex of `region`.
pub fn verify_harmonic_everywhere(g: &WeightedGraph, f: &ScalarField, region: &[usize], tol: f64) -> Result<HarmonicCheck> {
    let mut worst: Option<(usize, f64)> = None;
    for &v in region {
        let l = g.laplacian_at(f, v)?.abs();
        if worst.is_none_or(|(_, w)| l > w) {
            worst = Some((v, l));
        }
    }
    Ok(HarmonicCheck {
        pass: worst.is_none_or(|(_, w)| w <= tol),
        checked: region.len(),
        worst,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactCertificate {
    /// `S(P)` of the snapped values on `K`, in exact arithmetic.
    pub field: ExactField,
    pub checked: usize,
    /// First vertex where `Δf ≠ 0`, with the value.
    pub laplacian_failure: Option<(usize, Rational)>,
    /// First vertex where `∇₊f ≠ 1` or `∇₋f ≠ 1`.
    pub gradient_failure: Option<usize>,
}

impl ExactCertificate {
    pub fn harmonic(&self) -> bool {
        self.laplacian_failure.is_none()
    }

    pub fn gradient_sharp(&self) -> bool {
        self.gradient_failure.is_none()
    }
}

/// Snaps the converged values on `K` to nearby rationals, recomputes
/// `S(P)` exactly and checks `Δf = 0` and `∇₊f = ∇₋f = 1` on `region`
/// without rounding.
pub fn certify_exact(
    g: &WeightedGraph,
    d: &Metric,
    p: &SalamiPartition,
    result: &SynthesisResult,
    region: &[usize],
) -> Result<ExactCertificate> {
    let ext = Extender::<Rational>::new(g, d, p)?;
    let on_k = ext
        .k()
        .iter()
        .map(|&v| {
            let value = *result.field.get(v).ok_or_else(|| Error::MissingValue(g.id(v).into()))?;
            approximate(value, SNAP_TOLERANCE, SNAP_DENOMINATOR).ok_or_else(|| Error::NotInH0(g.id(v).into()))
        })
        .collect::<Result<Vec<_>>>()?;
    ext.check_lipschitz_on_k(g, &on_k)?;
    let field = ext.apply(&on_k).field;
    let one = Rational::from_integer(1.into());
    let mut laplacian_failure = None;
    let mut gradient_failure = None;
    for &v in region {
        let l = g.laplacian_at(&field, v)?;
        if laplacian_failure.is_none() && l != Rational::from_integer(0.into()) {
            laplacian_failure = Some((v, l));
        }
        let grad = gradients(g, d, &field, v)?;
        if gradient_failure.is_none() && (grad.plus != one || grad.minus != one) {
            gradient_failure = Some(v);
        }
    }
    Ok(ExactCertificate {
        field,
        checked: region.len(),
        laplacian_failure,
        gradient_failure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Uniqueness {
    SameUpToConstant,
    MirrorUpToConstant,
    Distinct,
}

/// Compares two Lipschitz-sharp harmonic functions on `region`: `f − h` or
/// `f + h` constant to `1e-9`. Both must be harmonic with `∇₊ = ∇₋ = 1`
/// there.
pub fn h_uniqueness_check(
    g: &WeightedGraph,
    d: &Metric,
    f: &ScalarField,
    h: &ScalarField,
    region: &[usize],
) -> Result<Uniqueness> {
    const TOL: f64 = 1e-9;
    for field in [f, h] {
        for &v in region {
            let grad = gradients(g, d, field, v)?;
            let lap = g.laplacian_at(field, v)?;
            if (grad.plus - 1.0).abs() > TOL || (grad.minus - 1.0).abs() > TOL || lap.abs() > TOL {
                return Err(Error::NotInH0(g.id(v).into()));
            }
        }
    }
    let spread = |sign: f64| -> Result<f64> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in region {
            let a = f.get(v).ok_or_else(|| Error::MissingValue(g.id(v).into()))?;
            let b = h.get(v).ok_or_else(|| Error::MissingValue(g.id(v).into()))?;
            let diff = a - sign * b;
            lo = lo.min(diff);
            hi = hi.max(diff);
        }
        Ok(if region.is_empty() { 0.0 } else { hi - lo })
    };
    Ok(if spread(1.0)? <= TOL {
        Uniqueness::SameUpToConstant
    } else if spread(-1.0)? <= TOL {
        Uniqueness::MirrorUpToConstant
    } else {
        Uniqueness::Distinct
    })
}

/// The field values as a dense vector; fails on a missing value.
pub(crate) fn dense(g: &WeightedGraph, f: &Field<f64>) -> Result<Vec<f64>> {
    (0..g.len())
        .map(|v| f.get(v).copied().ok_or_else(|| Error::MissingValue(g.id(v).into())))
        .collect()
}
