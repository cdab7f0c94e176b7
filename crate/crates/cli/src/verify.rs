//! The verification harness: every check runs against one graph and one
//! partition and reports labelled rows.

use std::cell::OnceCell;
use std::collections::BTreeMap;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salami_core::curvature::{all_edges, curvature_dual, edge_sweep, flatness_report, EdgeCurvature};
use salami_core::families::{Fixtures, Relation};
use salami_core::harmonic::{
    analysis_ratios, certify_exact, h_uniqueness_check, sign_change_probe, solve_dirichlet, subexp_rigidity_probe,
    synthesize, verify_harmonic_everywhere, AnalysisOptions, HarmonicField, SynthesisOptions, SynthesisResult,
    Uniqueness,
};
use salami_core::lipschitz::{extend, gradients, in_f};
use salami_core::partition::Side;
use salami_core::properties::{check_properties, random_connected_set, random_draw, random_partition, PROPERTY_NAMES};
use salami_core::rational::{format_rational, to_f64};
use salami_core::{Error, Field, Metric, MetricMode, SalamiPartition, ScalarField, WeightedGraph};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::pretty;
use crate::input::default_partition;
use crate::{CliError, Output, Result, EXIT_CHECK_FAILED, EXIT_OK};

/// Floating-point tolerance shared by the numerical checks.
pub const FLOAT_TOL: f64 = 1e-9;
/// Ball doubling ratio allowed on bounded-geometry windows.
pub const DOUBLING_BOUND: f64 = 3.5;
/// Pinned constant for the gradient estimate `|∇u|(x) R / u(x)`.
pub const CHENG_YAU_BOUND: f64 = 1.0;
/// Largest log-log slope of the recurrence quotient that still counts as
/// decay to zero.
pub const RECURRENCE_SLOPE: f64 = -0.5;
const PROPERTY_DRAWS: usize = 100;
const ENDS_DRAWS: usize = 50;
const SUPERPARTITION_DRAWS: usize = 40;
const UNIQUENESS_DRAWS: usize = 5;
const MAX_ANALYSIS_RADIUS: u32 = 16;

pub struct Check {
    pub id: &'static str,
    pub group: &'static str,
    pub statement: &'static str,
}

/// Every check, in report order.
pub const CHECKS: &[Check] = &[
    Check {
        id: "curvature-golden",
        group: "curvature",
        statement: "Curvature matches the values known in closed form for the family.",
    },
    Check {
        id: "solver-agreement",
        group: "curvature",
        statement: "Dual LP, primal transport and closed forms give identical rational curvature.",
    },
    Check {
        id: "nonnegative-curvature",
        group: "curvature",
        statement: "Curvature is non-negative on every edge the window resolves.",
    },
    Check {
        id: "flatness",
        group: "curvature",
        statement: "Vertex curvature vanishes wherever a salami is resolved.",
    },
    Check {
        id: "two-ends",
        group: "ends",
        statement: "Removing a connected finite set leaves exactly two infinite components.",
    },
    Check {
        id: "extension-properties",
        group: "extension",
        statement: "The extension operator is idempotent, 1-Lipschitz, monotone, attains its values through K, is extremal on each side, is characterised by one-sided gradients and keeps bands inside balls.",
    },
    Check {
        id: "superpartition",
        group: "extension",
        statement: "Members of the fixed-point class stay members when K grows.",
    },
    Check {
        id: "synthesis",
        group: "harmonic",
        statement: "Iterating the extension of a heat step converges to constant Laplacian on K.",
    },
    Check {
        id: "harmonic-everywhere",
        group: "harmonic",
        statement: "The limit is harmonic at every resolved vertex.",
    },
    Check {
        id: "constant-gradient",
        group: "harmonic",
        statement: "The limit has both one-sided gradients equal to one.",
    },
    Check {
        id: "h0-fixture",
        group: "harmonic",
        statement: "The limit agrees with the known sharp harmonic function up to sign and constant.",
    },
    Check {
        id: "uniqueness",
        group: "harmonic",
        statement: "Limits from different partitions agree up to sign and constant.",
    },
    Check {
        id: "level-set-connected",
        group: "levels",
        statement: "Preimages of intervals of length two are connected.",
    },
    Check {
        id: "level-set-size",
        group: "levels",
        statement: "Preimages of unit intervals are no larger than the crossing flux over the least weight.",
    },
    Check {
        id: "quasi-isometry",
        group: "levels",
        statement: "The harmonic function is a quasi-isometry onto its image.",
    },
    Check {
        id: "recurrence",
        group: "levels",
        statement: "Tent energies over squared radius decay, so the walk is recurrent.",
    },
    Check {
        id: "edge-weight-bound",
        group: "levels",
        statement: "Edges with a jump of the harmonic function carry weight at most flux over gap.",
    },
    Check {
        id: "analysis-ratios",
        group: "analysis",
        statement: "Bounded-geometry salamis have doubling balls and a uniform gradient estimate for positive harmonics.",
    },
    Check {
        id: "sign-change",
        group: "analysis",
        statement: "A harmonic function orthogonal to the end flux crosses one common level on every band.",
    },
    Check {
        id: "growth-recursion",
        group: "analysis",
        statement: "The square mass of a non-trivial harmonic function grows geometrically across bands.",
    },
];

pub const GROUPS: [&str; 6] = ["curvature", "ends", "extension", "harmonic", "levels", "analysis"];

/// Expands `all`, group names and check ids into check ids in report order.
pub fn select(suites: &[String]) -> Result<Vec<&'static str>> {
    let mut wanted = vec![false; CHECKS.len()];
    for suite in suites.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        let mut hit = false;
        for (i, c) in CHECKS.iter().enumerate() {
            if suite == "all" || suite == c.group || suite == c.id {
                wanted[i] = true;
                hit = true;
            }
        }
        if !hit {
            return Err(CliError::UnknownCheck(suite.to_string()));
        }
    }
    if !wanted.iter().any(|&w| w) {
        return Err(CliError::Usage("no checks selected".into()));
    }
    Ok(CHECKS.iter().zip(wanted).filter(|(_, w)| *w).map(|(c, _)| c.id).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Unreliable,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub check: &'static str,
    pub detail: String,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub reliable: bool,
    pub note: Option<String>,
}

impl Row {
    fn new(check: &'static str, detail: impl Into<String>) -> Self {
        Self {
            check,
            detail: detail.into(),
            status: Status::Pass,
            value: None,
            tolerance: None,
            reliable: true,
            note: None,
        }
    }

    fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    fn tolerance(mut self, t: f64) -> Self {
        self.tolerance = Some(t);
        self
    }

    fn passes(mut self, ok: bool) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }

    fn unreliable(mut self, note: impl Into<String>) -> Self {
        self.status = Status::Unreliable;
        self.reliable = false;
        self.note = Some(note.into());
        self
    }

    fn not_applicable(mut self, note: impl Into<String>) -> Self {
        self.status = Status::NotApplicable;
        self.note = Some(note.into());
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn error(check: &'static str, detail: impl Into<String>, e: &Error) -> Self {
        let row = Self::new(check, detail);
        match e {
            Error::BallTouchesBoundary(_)
            | Error::SupportTouchesBoundary(_)
            | Error::KTouchesBoundary(_)
            | Error::WindowTooSmall(_)
            | Error::WindowBufferTooSmall(_)
            | Error::BandTouchesBoundary(..)
            | Error::UnreliableDistance(..) => row.unreliable(e.to_string()),
            _ => row.passes(false).note(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs_digest: String,
    pub seed: u64,
    pub suites: Vec<String>,
    pub rows: Vec<Row>,
    pub traceability: BTreeMap<&'static str, &'static str>,
    pub exit_status: i32,
}

pub struct VerifyInput<'a> {
    pub graph: &'a WeightedGraph,
    pub partition: SalamiPartition,
    pub fixtures: Option<&'a Fixtures>,
    pub suites: Vec<String>,
    pub seed: u64,
}

fn ids(g: &WeightedGraph, set: &[usize]) -> String {
    set.iter().map(|&v| g.id(v)).collect::<Vec<_>>().join(",")
}

/// SHA-256 over the canonical graph, the resolved partition, the suites and
/// the seed.
pub fn inputs_digest(g: &WeightedGraph, p: &SalamiPartition, suites: &[String], seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(salami_core::io::write_graph(g).as_bytes());
    h.update(format!("\nk={}\nx={}\ny={}", ids(g, p.k()), ids(g, p.x()), ids(g, p.y())).as_bytes());
    h.update(format!("\nsuites={}\nseed={seed}", suites.join(",")).as_bytes());
    hex::encode(h.finalize())
}

pub fn run(input: VerifyInput<'_>) -> Result<RunReport> {
    let selected = select(&input.suites)?;
    let ctx = Ctx::new(input.graph, input.partition, input.fixtures, input.seed)?;
    let mut rows = Vec::new();
    for id in &selected {
        rows.extend(ctx.run(id));
    }
    let exit_status = if rows.iter().any(|r| r.status == Status::Fail) {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    };
    let traceability = CHECKS
        .iter()
        .filter(|c| selected.contains(&c.id))
        .map(|c| (c.id, c.statement))
        .collect();
    Ok(RunReport {
        command: "verify",
        inputs_digest: inputs_digest(input.graph, &ctx.p, &input.suites, input.seed),
        seed: input.seed,
        suites: input.suites,
        rows,
        traceability,
        exit_status,
    })
}

/// Runs the selected checks and renders the report as JSON.
pub fn verify(input: VerifyInput<'_>) -> Result<Output> {
    let report = run(input)?;
    let value = serde_json::to_value(&report).expect("report serialises");
    Ok(Output {
        text: pretty(&value),
        status: report.exit_status,
    })
}

fn flux(g: &WeightedGraph, p: &SalamiPartition, u: &[f64]) -> f64 {
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

fn dense(f: &ScalarField) -> Vec<f64> {
    f.values().iter().map(|v| v.unwrap_or(0.0)).collect()
}

/// Least squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest spread of `f − h` and of `f + h` over `region`, the smaller one.
fn spread_up_to_sign(f: &[f64], h: &[f64], region: &[usize]) -> f64 {
    let spread = |sign: f64| {
        let diffs = region.iter().map(|&v| f[v] - sign * h[v]);
        let lo = diffs.clone().fold(f64::INFINITY, f64::min);
        let hi = diffs.fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    spread(1.0).min(spread(-1.0))
}

struct Ctx<'a> {
    g: &'a WeightedGraph,
    d: Metric,
    p: SalamiPartition,
    fixtures: Option<&'a Fixtures>,
    seed: u64,
    sweep: OnceCell<std::result::Result<Vec<EdgeCurvature>, Error>>,
    synthesis: OnceCell<std::result::Result<SynthesisResult, Error>>,
    hypothesis: OnceCell<Option<String>>,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a WeightedGraph, p: SalamiPartition, fixtures: Option<&'a Fixtures>, seed: u64) -> Result<Self> {
        Ok(Self {
            g,
            d: Metric::for_graph(g)?,
            p,
            fixtures,
            seed,
            sweep: OnceCell::new(),
            synthesis: OnceCell::new(),
            hypothesis: OnceCell::new(),
        })
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
    }

    fn sweep(&self) -> std::result::Result<&[EdgeCurvature], &Error> {
        self.sweep
            .get_or_init(|| edge_sweep(self.g, &self.d, &all_edges(self.g)))
            .as_deref()
    }

    fn synthesis(&self) -> std::result::Result<&SynthesisResult, &Error> {
        self.synthesis
            .get_or_init(|| synthesize(self.g, &self.d, &self.p, &SynthesisOptions::default()))
            .as_ref()
    }

    fn eps_w(&self) -> f64 {
        self.g.edges().map(|(_, a)| a.weight_f).fold(f64::INFINITY, f64::min)
    }

    /// Why the window is not a salami, if it is not.
    fn hypothesis(&self) -> Option<&str> {
        self.hypothesis
            .get_or_init(|| {
                match self.sweep() {
                    Ok(rows) => {
                        if let Some(r) = rows.iter().find(|r| r.reliable && r.kappa_dual.is_negative()) {
                            return Some(format!(
                                "hypothesis fails: curvature {} on {}-{}",
                                format_rational(&r.kappa_dual),
                                self.g.id(r.x),
                                self.g.id(r.y)
                            ));
                        }
                    }
                    Err(e) => return Some(format!("hypothesis undecided: {e}")),
                }
                side_measure_failure(self.g, &self.p)
            })
            .as_deref()
    }

    fn run(&self, id: &str) -> Vec<Row> {
        match id {
            "curvature-golden" => self.curvature_golden(),
            "solver-agreement" => vec![self.solver_agreement()],
            "nonnegative-curvature" => vec![self.nonnegative_curvature()],
            "flatness" => vec![self.flatness()],
            "two-ends" => self.two_ends(),
            "extension-properties" => self.extension_properties(),
            "superpartition" => vec![self.superpartition()],
            "synthesis" => vec![self.synthesis_row()],
            "harmonic-everywhere" => self.harmonic_everywhere(),
            "constant-gradient" => self.constant_gradient(),
            "h0-fixture" => vec![self.h0_fixture()],
            "uniqueness" => self.uniqueness(),
            "level-set-connected" => vec![self.level_set_connected()],
            "level-set-size" => vec![self.level_set_size()],
            "quasi-isometry" => vec![self.quasi_isometry()],
            "recurrence" => vec![self.recurrence()],
            "edge-weight-bound" => vec![self.edge_weight_bound()],
            "analysis-ratios" => self.analysis_ratios(),
            "sign-change" => vec![self.sign_change()],
            "growth-recursion" => vec![self.growth_recursion()],
            other => unreachable!("check `{other}` is registered but not dispatched"),
        }
    }

    /// Why a check stated for salamis does not apply; `combinatorial` when
    /// the statement also needs the combinatorial distance.
    fn precondition(&self, combinatorial: bool) -> Option<String> {
        if let Some(reason) = self.hypothesis() {
            return Some(reason.to_string());
        }
        (combinatorial && self.g.metric_mode() != MetricMode::Combinatorial)
            .then(|| "stated for the combinatorial distance only".to_string())
    }

    /// Runs `body` with the harmonic field, or explains why it cannot.
    fn with_field(
        &self,
        check: &'static str,
        detail: &str,
        combinatorial: bool,
        body: impl FnOnce(&HarmonicField) -> Row,
    ) -> Row {
        if let Some(reason) = self.precondition(combinatorial) {
            return Row::new(check, detail).not_applicable(reason);
        }
        let result = match self.synthesis() {
            Ok(r) => r,
            Err(e) => return Row::error(check, detail, e),
        };
        match HarmonicField::new(self.g, &self.d, &self.p, &result.field) {
            Ok(hf) => body(&hf),
            Err(e) => Row::error(check, detail, &e),
        }
    }

    fn curvature_golden(&self) -> Vec<Row> {
        const ID: &str = "curvature-golden";
        let Some(fixtures) = self.fixtures.filter(|f| !f.kappa.is_empty()) else {
            return vec![Row::new(ID, "golden curvature values").not_applicable("no golden values for this graph")];
        };
        fixtures
            .kappa
            .iter()
            .map(|fx| {
                let rel = match fx.relation {
                    Relation::Eq => "=",
                    Relation::Ge => ">=",
                };
                let detail = format!("kappa({}, {}) {rel} {}", fx.x, fx.y, format_rational(&fx.value));
                let pair = self.g.index_of(&fx.x).and_then(|x| Ok((x, self.g.index_of(&fx.y)?)));
                let result = pair.and_then(|(x, y)| curvature_dual(self.g, &self.d, x, y));
                match result {
                    Ok(r) if !r.reliable => Row::new(ID, detail)
                        .value(to_f64(&r.kappa))
                        .unreliable("neighbourhoods reach the window rim"),
                    Ok(r) => {
                        let ok = match fx.relation {
                            Relation::Eq => r.kappa == fx.value,
                            Relation::Ge => r.kappa >= fx.value,
                        };
                        Row::new(ID, detail).value(to_f64(&r.kappa)).tolerance(0.0).passes(ok)
                    }
                    Err(e) => Row::error(ID, detail, &e),
                }
            })
            .collect()
    }

    fn solver_agreement(&self) -> Row {
        const ID: &str = "solver-agreement";
        let detail = "dual, primal and closed form agree exactly on every edge";
        let rows = match self.sweep() {
            Ok(rows) => rows,
            Err(e) => return Row::error(ID, detail, e),
        };
        let mut worst = 0.0f64;
        let mut disagreeing = 0;
        for r in rows {
            let closed_gap = r.kappa_closed.as_ref().map_or(0.0, |c| to_f64(&(c - &r.kappa_dual)).abs());
            let gap = to_f64(&(&r.kappa_primal - &r.kappa_dual)).abs().max(closed_gap);
            let exact = r.kappa_dual == r.kappa_primal && r.kappa_closed.as_ref().is_none_or(|c| *c == r.kappa_dual);
            if !exact {
                disagreeing += 1;
            }
            worst = worst.max(gap);
        }
        Row::new(ID, format!("{detail} ({} edges)", rows.len()))
            .value(worst)
            .tolerance(0.0)
            .passes(disagreeing == 0)
    }

    fn nonnegative_curvature(&self) -> Row {
        const ID: &str = "nonnegative-curvature";
        let rows = match self.sweep() {
            Ok(rows) => rows,
            Err(e) => return Row::error(ID, "minimum curvature", e),
        };
        let reliable: Vec<&EdgeCurvature> = rows.iter().filter(|r| r.reliable).collect();
        let Some(min) = reliable.iter().map(|r| &r.kappa_dual).min() else {
            return Row::new(ID, "minimum curvature").unreliable("no edge is resolved by the window");
        };
        let row = Row::new(ID, format!("minimum curvature over {} resolved edges", reliable.len()))
            .value(to_f64(min))
            .tolerance(0.0);
        if min.is_negative() {
            row.not_applicable("the window is not a salami")
        } else {
            row
        }
    }

    fn flatness(&self) -> Row {
        const ID: &str = "flatness";
        let detail = "largest |vertex curvature| over resolved vertices";
        if let Some(reason) = self.hypothesis() {
            return Row::new(ID, detail).not_applicable(reason);
        }
        let rows = match self.sweep() {
            Ok(rows) => rows,
            Err(e) => return Row::error(ID, detail, e),
        };
        let mut resolved = vec![!self.g.is_boundary(0); self.g.len()];
        for v in 0..self.g.len() {
            resolved[v] = !self.g.is_boundary(v);
        }
        for r in rows.iter().filter(|r| !r.reliable) {
            resolved[r.x] = false;
            resolved[r.y] = false;
        }
        let region: Vec<usize> = (0..self.g.len()).filter(|&v| resolved[v]).collect();
        if region.is_empty() {
            return Row::new(ID, detail).unreliable("no vertex is resolved by the window");
        }
        match flatness_report(self.g, &self.d, &region) {
            Ok(report) => {
                let worst = report
                    .vertex_kappa
                    .iter()
                    .map(|(_, k)| to_f64(k).abs())
                    .fold(0.0, f64::max);
                Row::new(ID, format!("{detail} ({} vertices)", region.len()))
                    .value(worst)
                    .tolerance(0.0)
                    .passes(report.flat)
            }
            Err(e) => Row::error(ID, detail, &e),
        }
    }

    fn two_ends(&self) -> Vec<Row> {
        const ID: &str = "two-ends";
        let given = format!("infinite components of V \\ K for K = {{{}}}", ids(self.g, self.p.k()));
        let first = match self.g.count_ends(self.p.k()) {
            Ok(ends) => {
                let row = Row::new(ID, given).value(ends.infinite as f64).tolerance(0.0);
                match side_measure_failure(self.g, &self.p) {
                    Some(reason) => row.not_applicable(reason),
                    None => row.passes(ends.infinite == 2),
                }
            }
            Err(e) => Row::error(ID, given, &e),
        };

        let detail = format!("{ENDS_DRAWS} random connected K grown from the least vertex of K");
        let mut rng = self.rng(1);
        let root = self.p.k()[0];
        let (mut separating, mut wrong, mut worst) = (0, 0, 0usize);
        let mut note = None;
        for _ in 0..ENDS_DRAWS {
            let k = random_connected_set(self.g, root, &mut rng, 6, 2);
            let ends = match self.g.count_ends(&k) {
                Ok(e) => e,
                Err(e) => {
                    note = Some(e.to_string());
                    continue;
                }
            };
            // K that does not split the heavy part only bounds the count
            // from below
            if ends.infinite_measure_ends() < 2 {
                continue;
            }
            separating += 1;
            worst = worst.max(ends.infinite);
            if ends.infinite != 2 {
                wrong += 1;
            }
        }
        let row = Row::new(ID, detail).tolerance(0.0);
        let second = if separating == 0 {
            row.not_applicable("no draw leaves two ends of infinite measure")
        } else {
            let row = row
                .value(worst as f64)
                .passes(wrong == 0)
                .note(format!("{separating} of {ENDS_DRAWS} draws separate"));
            match note {
                Some(n) => row.note(format!("{separating} of {ENDS_DRAWS} draws separate; {n}")),
                None => row,
            }
        };
        vec![first, second]
    }

    fn extension_properties(&self) -> Vec<Row> {
        const ID: &str = "extension-properties";
        let mut rng = self.rng(2);
        let mut failures = [0usize; 9];
        let mut first: [Option<String>; 9] = Default::default();
        let mut draws = 0;
        let mut error = None;
        for _ in 0..PROPERTY_DRAWS {
            let Some(p) = random_partition(self.g, &self.d, &mut rng, 3) else {
                break;
            };
            let report = random_draw(self.g, &self.d, &p, &mut rng)
                .and_then(|draw| check_properties(self.g, &self.d, &p, &draw));
            match report {
                Ok(report) => {
                    draws += 1;
                    for (i, holds) in report.holds.iter().enumerate() {
                        if !holds {
                            failures[i] += 1;
                            first[i].get_or_insert_with(|| format!("first failure with K = {{{}}}", ids(self.g, p.k())));
                        }
                    }
                }
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        PROPERTY_NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let detail = format!("{name}: failures over {draws} random draws");
                if let Some(e) = &error {
                    return Row::error(ID, detail, e);
                }
                if draws == 0 {
                    return Row::new(ID, detail).unreliable("no random partition fits in the window");
                }
                let row = Row::new(ID, detail)
                    .value(failures[i] as f64)
                    .tolerance(0.0)
                    .passes(failures[i] == 0);
                match &first[i] {
                    Some(n) => row.note(n.clone()),
                    None => row,
                }
            })
            .collect()
    }

    fn superpartition(&self) -> Row {
        const ID: &str = "superpartition";
        let detail = format!("membership kept on {SUPERPARTITION_DRAWS} random enlargements of K");
        let Some(rim) = (0..self.g.len()).find(|&v| self.g.is_boundary(v)) else {
            return Row::new(ID, detail).unreliable("the window has no rim");
        };
        let mut rng = self.rng(3);
        let root = self.p.k()[0];
        let (mut checked, mut lost) = (0, 0);
        for _ in 0..10 * SUPERPARTITION_DRAWS {
            if checked == SUPERPARTITION_DRAWS {
                break;
            }
            let k = random_connected_set(self.g, root, &mut rng, 4, 4);
            let Ok(p) = SalamiPartition::from_k_and_seeds(self.g, &k, &[rim]) else {
                continue;
            };
            let extra = random_connected_set(self.g, k[rng.random_range(0..k.len())], &mut rng, 4, 4);
            let mut big = k.clone();
            big.extend(extra);
            big.sort_unstable();
            big.dedup();
            let seeds: Vec<usize> = p.x().iter().copied().filter(|v| big.binary_search(v).is_err()).collect();
            let Ok(q) = SalamiPartition::from_k_and_seeds(self.g, &big, &seeds) else {
                continue;
            };
            let (a, slope) = (rng.random_range(0..self.g.len()), rng.random_range(-1.0..=1.0));
            let on_k: ScalarField =
                Field::from_fn(self.g.len(), |v| k.contains(&v).then(|| slope * self.d.distance_f(a, v)));
            let outcome = extend(self.g, &self.d, &p, &on_k).and_then(|sf| {
                let own = in_f(self.g, &self.d, &p, &sf.field)?;
                let wider = in_f(self.g, &self.d, &q, &sf.field)?;
                Ok((own.member, wider.member))
            });
            match outcome {
                Ok((true, kept)) => {
                    checked += 1;
                    if !kept {
                        lost += 1;
                    }
                }
                Ok((false, _)) | Err(_) => continue,
            }
        }
        if checked == 0 {
            return Row::new(ID, detail).unreliable("no separating K fits in the window");
        }
        let row = Row::new(ID, detail).value(lost as f64).tolerance(0.0).passes(lost == 0);
        if checked < SUPERPARTITION_DRAWS {
            row.note(format!("only {checked} draws fit in the window"))
        } else {
            row
        }
    }

    fn synthesis_row(&self) -> Row {
        const ID: &str = "synthesis";
        let detail = "spread of the Laplacian on K at convergence";
        match self.synthesis() {
            Ok(r) => Row::new(ID, format!("{detail} after {} iterations", r.iterations))
                .value(r.residual)
                .tolerance(SynthesisOptions::default().tol)
                .passes(r.residual <= SynthesisOptions::default().tol),
            Err(e) => Row::error(ID, detail, e),
        }
    }

    fn harmonic_everywhere(&self) -> Vec<Row> {
        const ID: &str = "harmonic-everywhere";
        let float = "largest |Laplacian| on the certified region";
        let exact = "Laplacian is exactly zero after rational snapping";
        if let Some(reason) = self.hypothesis() {
            return vec![
                Row::new(ID, float).not_applicable(reason),
                Row::new(ID, exact).not_applicable(reason),
            ];
        }
        let result = match self.synthesis() {
            Ok(r) => r,
            Err(e) => return vec![Row::error(ID, float, e), Row::error(ID, exact, e)],
        };
        let region = result.certified_region(self.g);
        let first = match verify_harmonic_everywhere(self.g, &result.field, &region, FLOAT_TOL) {
            Ok(c) => Row::new(ID, format!("{float} ({} vertices)", c.checked))
                .value(c.worst.map_or(0.0, |(_, l)| l.abs()))
                .tolerance(FLOAT_TOL)
                .passes(c.pass),
            Err(e) => Row::error(ID, float, &e),
        };
        let second = match certify_exact(self.g, &self.d, &self.p, result, &region) {
            Ok(c) => {
                let row = Row::new(ID, exact).tolerance(0.0).passes(c.harmonic());
                match &c.laplacian_failure {
                    Some((v, l)) => row
                        .value(to_f64(l))
                        .note(format!("Laplacian {} at {}", format_rational(l), self.g.id(*v))),
                    None => row.value(0.0),
                }
            }
            Err(e) => Row::error(ID, exact, &e),
        };
        vec![first, second]
    }

    fn constant_gradient(&self) -> Vec<Row> {
        const ID: &str = "constant-gradient";
        let float = "largest deviation of the one-sided gradients from 1";
        let exact = "one-sided gradients are exactly 1 after rational snapping";
        if let Some(reason) = self.hypothesis() {
            return vec![
                Row::new(ID, float).not_applicable(reason),
                Row::new(ID, exact).not_applicable(reason),
            ];
        }
        let result = match self.synthesis() {
            Ok(r) => r,
            Err(e) => return vec![Row::error(ID, float, e), Row::error(ID, exact, e)],
        };
        let region = result.certified_region(self.g);
        let mut worst = 0.0f64;
        let mut error = None;
        for &v in &region {
            match gradients(self.g, &self.d, &result.field, v) {
                Ok(grad) => worst = worst.max((grad.plus - 1.0).abs()).max((grad.minus - 1.0).abs()),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        let first = match error {
            Some(e) => Row::error(ID, float, &e),
            None => Row::new(ID, format!("{float} ({} vertices)", region.len()))
                .value(worst)
                .tolerance(FLOAT_TOL)
                .passes(worst <= FLOAT_TOL),
        };
        let second = match certify_exact(self.g, &self.d, &self.p, result, &region) {
            Ok(c) => {
                let row = Row::new(ID, exact).tolerance(0.0).passes(c.gradient_sharp());
                match c.gradient_failure {
                    Some(v) => row.note(format!("fails at {}", self.g.id(v))),
                    None => row,
                }
            }
            Err(e) => Row::error(ID, exact, &e),
        };
        vec![first, second]
    }

    fn h0_fixture(&self) -> Row {
        const ID: &str = "h0-fixture";
        let detail = "spread of f - h or f + h against the known sharp harmonic h";
        let Some(h0) = self.fixtures.and_then(|f| f.h0.as_ref()) else {
            return Row::new(ID, detail).not_applicable("no known sharp harmonic function for this graph");
        };
        if let Some(reason) = self.hypothesis() {
            return Row::new(ID, detail).not_applicable(reason);
        }
        let result = match self.synthesis() {
            Ok(r) => r,
            Err(e) => return Row::error(ID, detail, e),
        };
        let mut h = vec![f64::NAN; self.g.len()];
        for (id, value) in h0 {
            match self.g.index_of(id) {
                Ok(v) => h[v] = to_f64(value),
                Err(e) => return Row::error(ID, detail, &e),
            }
        }
        let region: Vec<usize> = result
            .certified_region(self.g)
            .into_iter()
            .filter(|&v| h[v].is_finite())
            .collect();
        if region.is_empty() {
            return Row::new(ID, detail).unreliable("the certified region is empty");
        }
        let spread = spread_up_to_sign(&dense(&result.field), &h, &region);
        Row::new(ID, format!("{detail} ({} vertices)", region.len()))
            .value(spread)
            .tolerance(FLOAT_TOL)
            .passes(spread <= FLOAT_TOL)
    }

    /// The synthesised field snapped to rationals, provided it is exactly
    /// harmonic and sharp on its certified region.
    fn certified_field(&self, p: &SalamiPartition, result: &SynthesisResult) -> std::result::Result<(ScalarField, Vec<usize>), String> {
        let region = result.certified_region(self.g);
        let cert = certify_exact(self.g, &self.d, p, result, &region).map_err(|e| e.to_string())?;
        if let Some((v, _)) = cert.laplacian_failure {
            return Err(format!("not harmonic at {}", self.g.id(v)));
        }
        if let Some(v) = cert.gradient_failure {
            return Err(format!("not sharp at {}", self.g.id(v)));
        }
        Ok((cert.field.map(to_f64), region))
    }

    fn uniqueness(&self) -> Vec<Row> {
        const ID: &str = "uniqueness";
        let detail = "syntheses from other partitions";
        if let Some(reason) = self.precondition(true) {
            return vec![Row::new(ID, detail).not_applicable(reason)];
        }
        let base = match self.synthesis() {
            Ok(r) => r,
            Err(e) => return vec![Row::error(ID, detail, e)],
        };
        let mut fields = match self.certified_field(&self.p, base) {
            Ok(f) => vec![f],
            Err(n) => return vec![Row::new(ID, detail).passes(false).note(n)],
        };
        let mut seen = vec![self.p.k().to_vec()];
        let mut rows = Vec::new();
        let mut rng = self.rng(4);
        let root = self.p.k()[0];
        for _ in 0..40 * UNIQUENESS_DRAWS {
            if rows.len() == UNIQUENESS_DRAWS {
                break;
            }
            let k = random_connected_set(self.g, root, &mut rng, 4, 4);
            if seen.contains(&k) {
                continue;
            }
            let Ok(p) = default_partition(self.g, &k) else { continue };
            if side_measure_failure(self.g, &p).is_some() {
                continue;
            }
            seen.push(k.clone());
            let detail = format!("K = {{{}}} against the earlier partitions", ids(self.g, &k));
            let result = match synthesize(self.g, &self.d, &p, &SynthesisOptions::default()) {
                Ok(r) => r,
                Err(e) => {
                    rows.push(Row::error(ID, detail, &e));
                    continue;
                }
            };
            let (field, region) = match self.certified_field(&p, &result) {
                Ok(f) => f,
                Err(n) => {
                    rows.push(Row::new(ID, detail).passes(false).note(n));
                    continue;
                }
            };
            let mut note = None;
            let mut compared = 0;
            for (other, other_region) in &fields {
                let common: Vec<usize> = region.iter().copied().filter(|v| other_region.contains(v)).collect();
                if common.is_empty() {
                    continue;
                }
                compared += 1;
                match h_uniqueness_check(self.g, &self.d, other, &field, &common) {
                    Ok(Uniqueness::Distinct) => {
                        note.get_or_insert_with(|| "differs by more than sign and constant".to_string());
                    }
                    Ok(_) => {}
                    Err(e) => {
                        note.get_or_insert_with(|| e.to_string());
                    }
                }
            }
            let row = Row::new(ID, detail).value(compared as f64).tolerance(FLOAT_TOL);
            rows.push(match note {
                Some(n) => row.passes(false).note(n),
                None if compared == 0 => row.unreliable("no overlap between certified regions"),
                None => row,
            });
            fields.push((field, region));
        }
        if rows.is_empty() {
            rows.push(Row::new(ID, detail).unreliable("no other partition fits in the window"));
        }
        rows
    }

    fn level_set_connected(&self) -> Row {
        const ID: &str = "level-set-connected";
        self.with_field(ID, "disconnected bands of width 2", true, |hf| {
            let bands = hf.bands(2.0);
            if bands.is_empty() {
                return Row::new(ID, "disconnected bands of width 2").unreliable("no band is resolved");
            }
            let broken: Vec<&_> = bands.iter().filter(|b| !b.connected).collect();
            let row = Row::new(ID, format!("disconnected bands of width 2 among {}", bands.len()))
                .value(broken.len() as f64)
                .tolerance(0.0)
                .passes(broken.is_empty());
            match broken.first() {
                Some(b) => row.note(format!("[{}, {}) is disconnected", b.band.0, b.band.1)),
                None => row,
            }
        })
    }

    fn level_set_size(&self) -> Row {
        const ID: &str = "level-set-size";
        let detail = "largest band of width 1 against the size bound";
        self.with_field(ID, detail, true, |hf| match hf.bounded_bands(self.eps_w()) {
            Ok(bands) if bands.is_empty() => Row::new(ID, detail).unreliable("no band is resolved"),
            Ok(bands) => {
                let bound = bands[0].bound.unwrap_or(f64::INFINITY);
                let largest = bands.iter().map(|b| b.size).max().unwrap_or(0);
                Row::new(ID, format!("{detail} ({} bands)", bands.len()))
                    .value(largest as f64)
                    .tolerance(bound)
                    .passes(largest as f64 <= bound + FLOAT_TOL)
            }
            Err(e) => Row::error(ID, detail, &e),
        })
    }

    fn quasi_isometry(&self) -> Row {
        const ID: &str = "quasi-isometry";
        let detail = "|f(x) - f(y)| <= d(x,y) <= |f(x) - f(y)| + C";
        self.with_field(ID, detail, true, |hf| match hf.quasi_isometry_check(self.eps_w()) {
            Ok(q) => {
                let row = Row::new(ID, format!("{detail} over {} pairs", q.pairs_checked))
                    .value(q.c)
                    .tolerance(FLOAT_TOL)
                    .passes(q.holds);
                match q.violation {
                    Some((u, v, jump, dist)) => row.note(format!(
                        "{}-{}: jump {jump}, distance {dist}",
                        self.g.id(u),
                        self.g.id(v)
                    )),
                    None if !q.exhaustive => row.note("pairs sampled"),
                    None => row,
                }
            }
            Err(e) => Row::error(ID, detail, &e),
        })
    }

    fn recurrence(&self) -> Row {
        const ID: &str = "recurrence";
        let detail = "log-log slope of the tent quotient over R >= 4";
        self.with_field(ID, detail, false, |hf| {
            let mut points = Vec::new();
            for r in 4u32.. {
                match hf.recurrence_quotient(f64::from(r)) {
                    Ok(q) => points.push((f64::from(r), q)),
                    Err(Error::SupportTouchesBoundary(_)) => break,
                    Err(e) => return Row::error(ID, detail, &e),
                }
            }
            if points.len() < 3 || points.iter().any(|p| p.1 <= 0.0) {
                return Row::new(ID, detail).unreliable(format!("only {} radii are resolved", points.len()));
            }
            let slope = log_log_slope(&points);
            Row::new(ID, format!("{detail} ({} radii)", points.len()))
                .value(slope)
                .tolerance(RECURRENCE_SLOPE)
                .passes(slope <= RECURRENCE_SLOPE)
        })
    }

    fn edge_weight_bound(&self) -> Row {
        const ID: &str = "edge-weight-bound";
        let detail = "jump edges weigh at most flux over gap";
        self.with_field(ID, detail, true, |hf| match hf.edge_weight_upper_bound() {
            Ok(r) => {
                let row = Row::new(ID, format!("{detail} ({} jump edges)", r.jump_edges))
                    .value(r.bound)
                    .tolerance(FLOAT_TOL)
                    .passes(r.holds());
                match r.violation {
                    Some((u, v, w)) => row.note(format!("{}-{} weighs {w}", self.g.id(u), self.g.id(v))),
                    None => row,
                }
            }
            Err(e) => Row::error(ID, detail, &e),
        })
    }

    fn analysis_ratios(&self) -> Vec<Row> {
        const ID: &str = "analysis-ratios";
        let doubling = "largest doubling ratio";
        let cheng_yau = "largest |grad u| R / u over random positive harmonics";
        if let Some(reason) = self.precondition(true) {
            let reason = reason.as_str();
            return vec![
                Row::new(ID, doubling).not_applicable(reason),
                Row::new(ID, cheng_yau).not_applicable(reason),
            ];
        }
        let opts = AnalysisOptions {
            seed: self.seed,
            ..AnalysisOptions::default()
        };
        let x = self.p.k()[0];
        let mut ratios = Vec::new();
        for r in 2..=MAX_ANALYSIS_RADIUS {
            match analysis_ratios(self.g, &self.d, x, r, &opts) {
                Ok(a) => ratios.push(a),
                Err(Error::BallTouchesBoundary(_)) => break,
                Err(e @ Error::NotBoundedGeometry(_)) => {
                    return vec![
                        Row::new(ID, doubling).not_applicable(e.to_string()),
                        Row::new(ID, cheng_yau).not_applicable(e.to_string()),
                    ];
                }
                Err(e) => return vec![Row::error(ID, doubling, &e), Row::error(ID, cheng_yau, &e)],
            }
        }
        if ratios.is_empty() {
            return vec![
                Row::new(ID, doubling).unreliable("no ball of radius 2 fits in the window"),
                Row::new(ID, cheng_yau).unreliable("no ball of radius 2 fits in the window"),
            ];
        }
        let radii = format!("R = 2..{}", ratios.last().map_or(2, |a| a.radius));
        let worst_doubling = ratios.iter().map(|a| a.doubling).fold(0.0, f64::max);
        let worst_cy = ratios.iter().map(|a| a.cheng_yau_max()).fold(0.0, f64::max);
        vec![
            Row::new(ID, format!("{doubling} over {radii}"))
                .value(worst_doubling)
                .tolerance(DOUBLING_BOUND)
                .passes(worst_doubling <= DOUBLING_BOUND),
            Row::new(ID, format!("{cheng_yau} over {radii}"))
                .value(worst_cy)
                .tolerance(CHENG_YAU_BOUND)
                .passes(worst_cy <= CHENG_YAU_BOUND),
        ]
    }

    /// A harmonic function with alternating boundary values.
    fn test_harmonic(&self) -> Result<ScalarField> {
        let interior: Vec<usize> = (0..self.g.len()).filter(|&v| !self.g.is_boundary(v)).collect();
        let mut sign = 1.0;
        let boundary = Field::from_fn(self.g.len(), |v| {
            self.g.is_boundary(v).then(|| {
                sign = -sign;
                sign
            })
        });
        Ok(solve_dirichlet(self.g, &interior, &boundary)?)
    }

    fn sign_change(&self) -> Row {
        const ID: &str = "sign-change";
        let detail = "one level is crossed on every unit band";
        self.with_field(ID, detail, true, |hf| {
            let u = match self.test_harmonic() {
                Ok(u) => dense(&u),
                Err(CliError::Core(e)) => return Row::error(ID, detail, &e),
                Err(e) => return Row::new(ID, detail).passes(false).note(e.to_string()),
            };
            let multiple = flux(self.g, &self.p, &u) / hf.flux();
            let normal: Vec<f64> = u.iter().zip(hf.values()).map(|(a, f)| a - multiple * f).collect();
            match sign_change_probe(hf, &Field::total(normal)) {
                Ok(r) => {
                    let row = Row::new(ID, format!("{detail} ({} bands)", r.bands.len()))
                        .tolerance(FLOAT_TOL)
                        .passes(r.violation.is_none());
                    match (r.c, r.violation) {
                        (Some(c), _) => row.value(c),
                        (None, Some((a, b))) => row.note(format!("band {a} lies above band {b}")),
                        (None, None) => row,
                    }
                }
                Err(e) => Row::error(ID, detail, &e),
            }
        })
    }

    fn growth_recursion(&self) -> Row {
        const ID: &str = "growth-recursion";
        let detail = "growth factor of the square mass wherever it is non-zero";
        self.with_field(ID, detail, true, |hf| {
            let u = match self.test_harmonic() {
                Ok(u) => u,
                Err(CliError::Core(e)) => return Row::error(ID, detail, &e),
                Err(e) => return Row::new(ID, detail).passes(false).note(e.to_string()),
            };
            match subexp_rigidity_probe(hf, &u, self.eps_w()) {
                Ok(r) => {
                    let weakest = r.rows.iter().filter_map(|row| row.factor).fold(f64::INFINITY, f64::min);
                    let row = Row::new(ID, format!("{detail} ({} bands)", r.rows.len()))
                        .tolerance(1.0 + r.threshold)
                        .passes(r.holds);
                    if weakest.is_finite() {
                        row.value(weakest)
                    } else {
                        row.note("the square mass vanishes on every band")
                    }
                }
                Err(e) => Row::error(ID, detail, &e),
            }
        })
    }
}

/// Why `X` or `Y` fails to hold an end of infinite measure, if one does.
pub fn side_measure_failure(g: &WeightedGraph, p: &SalamiPartition) -> Option<String> {
    let ends = match g.count_ends(p.k()) {
        Ok(e) => e,
        Err(e) => return Some(format!("hypothesis undecided: {e}")),
    };
    let heavy = |side: Side| {
        ends.components
            .iter()
            .any(|c| c.infinite_measure && p.side(c.vertices[0]) == side)
    };
    if heavy(Side::X) && heavy(Side::Y) {
        None
    } else {
        Some(format!(
            "hypothesis fails: {} ends, {} of infinite measure, not one on each side",
            ends.infinite,
            ends.infinite_measure_ends()
        ))
    }
}
