//! `gen`, `curvature`, `harmonic` and `recurrence`.

use std::path::{Path, PathBuf};

use salami_core::curvature::{all_edges, edge_sweep, EdgeCurvature};
use salami_core::families::FamilySpec;
use salami_core::harmonic::{synthesize, verify_harmonic_everywhere, HarmonicField, SynthesisOptions};
use salami_core::lipschitz::gradients;
use salami_core::rational::{format_rational, format_sig, to_f64};
use salami_core::{Error, Metric, SalamiPartition, WeightedGraph};
use serde_json::{json, Map, Value};

use crate::{emit, CliError, Output, Result, EXIT_CHECK_FAILED, EXIT_OK};

/// Significant digits in CSV output.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn num(x: f64) -> String {
    format_sig(x, CSV_DIGITS)
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON serialises");
    s.push('\n');
    s
}

/// Writes the graph and its fixtures sidecar `<stem>.fixtures.json`.
pub fn gen(spec: &FamilySpec, out: Option<&Path>) -> Result<Output> {
    let family = spec.generate()?;
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", spec.name())));
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph");
    let sidecar = path.with_file_name(format!("{stem}.fixtures.json"));
    emit(salami_core::io::write_graph(&family.graph), Some(&path))?;
    emit(pretty(&family.fixtures.to_json()), Some(&sidecar))?;
    Ok(Output {
        text: format!(
            "wrote {} ({} vertices, {} edges) and {}\n",
            path.display(),
            family.graph.len(),
            family.graph.edge_count(),
            sidecar.display()
        ),
        status: EXIT_OK,
    })
}

fn edges_touching(g: &WeightedGraph, region: Option<&[String]>) -> Result<Vec<(usize, usize)>> {
    let all = all_edges(g);
    let Some(ids) = region else { return Ok(all) };
    let region = g.indices_of(ids)?;
    Ok(all
        .into_iter()
        .filter(|(u, v)| region.contains(u) || region.contains(v))
        .collect())
}

fn rows_agree(r: &EdgeCurvature) -> bool {
    r.kappa_dual == r.kappa_primal && r.kappa_closed.as_ref().is_none_or(|c| *c == r.kappa_dual)
}

/// Per-edge curvature from both solvers; exit 1 when they disagree.
pub fn curvature(g: &WeightedGraph, region: Option<&[String]>, format: Format) -> Result<Output> {
    let d = Metric::for_graph(g)?;
    let rows = edge_sweep(g, &d, &edges_touching(g, region)?)?;
    let status = if rows.iter().all(rows_agree) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    let text = match format {
        Format::Csv => {
            let mut s = String::from("x,y,distance,kappa_dual,kappa_primal,kappa_closed,kappa_exact,reliable\n");
            for r in &rows {
                let closed = r.kappa_closed.as_ref().map(|c| num(to_f64(c))).unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    g.id(r.x),
                    g.id(r.y),
                    num(to_f64(&r.distance)),
                    num(to_f64(&r.kappa_dual)),
                    num(to_f64(&r.kappa_primal)),
                    closed,
                    format_rational(&r.kappa_dual),
                    r.reliable
                ));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "x": g.id(r.x),
                        "y": g.id(r.y),
                        "distance": format_rational(&r.distance),
                        "kappa_dual": format_rational(&r.kappa_dual),
                        "kappa_primal": format_rational(&r.kappa_primal),
                        "kappa_closed": r.kappa_closed.as_ref().map(format_rational),
                        "reliable": r.reliable,
                    })
                })
                .collect();
            pretty(&json!({ "rows": rows }))
        }
    };
    Ok(Output { text, status })
}

fn synthesis_options(epsilon: Option<f64>, tol: Option<f64>, max_iter: Option<usize>) -> SynthesisOptions {
    let mut opts = SynthesisOptions::default();
    opts.epsilon = epsilon;
    if let Some(t) = tol {
        opts.tol = t;
    }
    if let Some(m) = max_iter {
        opts.max_iter = m;
    }
    opts
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HarmonicFlags {
    pub epsilon: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl HarmonicFlags {
    pub fn options(&self) -> SynthesisOptions {
        synthesis_options(self.epsilon, self.tol, self.max_iter)
    }
}

/// Synthesises `f`, checks `Δf = 0` and `∇₊f = ∇₋f = 1` on the certified
/// region and reports everything as JSON.
pub fn harmonic(g: &WeightedGraph, p: &SalamiPartition, flags: &HarmonicFlags) -> Result<Output> {
    let d = Metric::for_graph(g)?;
    let result = match synthesize(g, &d, p, &flags.options()) {
        Ok(r) => r,
        Err(Error::NoConvergence {
            iterations,
            residual,
            history,
        }) => {
            let report = json!({
                "converged": false,
                "iterations": iterations,
                "residual": residual,
                "history": history,
            });
            return Ok(Output {
                text: pretty(&report),
                status: EXIT_CHECK_FAILED,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let region = result.certified_region(g);
    let check = verify_harmonic_everywhere(g, &result.field, &region, 1e-9)?;
    let mut worst_gradient: f64 = 0.0;
    for &v in &region {
        let grad = gradients(g, &d, &result.field, v)?;
        worst_gradient = worst_gradient.max((grad.plus - 1.0).abs()).max((grad.minus - 1.0).abs());
    }
    let gradient_sharp = worst_gradient <= 1e-9;
    let on_k: Map<String, Value> = result
        .laplacian_on_k
        .iter()
        .map(|(v, l)| (g.id(*v).to_string(), json!(l)))
        .collect();
    let report = json!({
        "converged": true,
        "epsilon": result.epsilon,
        "iterations": result.iterations,
        "residual": result.residual,
        "constant_c": result.constant_c,
        "max_laplacian_monotone": result.max_laplacian_monotone(),
        "laplacian_on_k": on_k,
        "history": result.history,
        "certified_region": region.len(),
        "harmonic_everywhere": {
            "pass": check.pass,
            "checked": check.checked,
            "worst_vertex": check.worst.map(|(v, _)| g.id(v).to_string()),
            "worst": check.worst.map(|(_, l)| l),
        },
        "gradient": {
            "sharp": gradient_sharp,
            "worst_deviation": worst_gradient,
        },
        "field": result.field.to_json(g),
    });
    let status = if check.pass && gradient_sharp {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    Ok(Output {
        text: pretty(&report),
        status,
    })
}

/// `(R, −⟨g,Δg⟩/R²)` for `R = 1..=r_max`, with rows the window cannot
/// resolve flagged unreliable and left blank.
pub fn recurrence(
    g: &WeightedGraph,
    p: &SalamiPartition,
    r_max: u32,
    flags: &HarmonicFlags,
    format: Format,
) -> Result<Output> {
    if r_max == 0 {
        return Err(CliError::Usage("--r-max must be at least 1".into()));
    }
    let d = Metric::for_graph(g)?;
    let result = synthesize(g, &d, p, &flags.options())?;
    let hf = HarmonicField::new(g, &d, p, &result.field)?;
    let mut rows = Vec::new();
    for r in 1..=r_max {
        let q = match hf.recurrence_quotient(f64::from(r)) {
            Ok(q) => Some(q),
            Err(Error::SupportTouchesBoundary(_)) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push((r, q));
    }
    let text = match format {
        Format::Csv => {
            let mut s = String::from("R,quotient,reliable\n");
            for (r, q) in &rows {
                s.push_str(&format!("{r},{},{}\n", q.map(num).unwrap_or_default(), q.is_some()));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(r, q)| json!({ "R": r, "quotient": q, "reliable": q.is_some() }))
                .collect();
            pretty(&json!({ "rows": rows }))
        }
    };
    Ok(Output { text, status: EXIT_OK })
}
