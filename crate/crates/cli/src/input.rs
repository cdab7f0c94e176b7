//! Reading graphs, partitions and family parameters.

use std::path::Path;

use std::path::PathBuf;

use salami_core::families::{DiagonalWeights, FamilySpec, Fixtures, KappaFixture, Relation};
use salami_core::rational::parse_rational;
use salami_core::{Error, MetricMode, Rational, SalamiPartition, WeightedGraph};
use serde::Deserialize;
use serde_json::Value;

use crate::{CliError, Result};

pub const SEED_VAR: &str = "SALAMI_SEED";

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_graph(path: &Path) -> Result<WeightedGraph> {
    Ok(salami_core::io::parse_graph(&read(path)?)?)
}

/// Seed for the randomised checks, from `SALAMI_SEED` (default 0).
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_VAR} must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(0),
    }
}

/// Partition document: `K` as a list of ids; `X` and `Y` optional.
///
/// With neither side given, `V \ K` must have exactly two components. With
/// only `x`, the components meeting `x` form `X` and the rest `Y`. With both,
/// the triple is taken as written.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub k: Vec<String>,
    #[serde(default)]
    pub x: Option<Vec<String>>,
    #[serde(default)]
    pub y: Option<Vec<String>>,
}

impl PartitionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("partition: {e}")).into())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn resolve(&self, g: &WeightedGraph) -> Result<SalamiPartition> {
        let k = g.indices_of(&self.k)?;
        let p = match (&self.x, &self.y) {
            (None, None) => SalamiPartition::from_k(g, &k)?,
            (Some(x), None) => SalamiPartition::from_k_and_seeds(g, &k, &g.indices_of(x)?)?,
            (None, Some(y)) => SalamiPartition::from_k_and_seeds(g, &k, &g.indices_of(y)?)?.mirrored(),
            (Some(x), Some(y)) => SalamiPartition::new(g, &g.indices_of(x)?, &g.indices_of(y)?, &k)?,
        };
        Ok(p)
    }

    /// Canonical text used in digests.
    pub fn canonical(&self) -> String {
        let list = |v: &Option<Vec<String>>| v.as_ref().map(|v| v.join(",")).unwrap_or_default();
        format!("k={};x={};y={}", self.k.join(","), list(&self.x), list(&self.y))
    }
}

/// The partition with the given `K` whose `X` is the union of the components
/// of `V \ K` holding the least vertex id outside `K`, and `Y` the rest.
pub fn default_partition(g: &WeightedGraph, k: &[usize]) -> Result<SalamiPartition> {
    if let Ok(p) = SalamiPartition::from_k(g, k) {
        return Ok(p);
    }
    let first = (0..g.len())
        .find(|v| !k.contains(v))
        .ok_or_else(|| Error::InvalidPartition("K covers the whole window".into()))?;
    Ok(SalamiPartition::from_k_and_seeds(g, k, &[first])?)
}

/// `dir/name.json` pairs with `dir/name.fixtures.json`.
pub fn sidecar_path(graph: &Path) -> PathBuf {
    let stem = graph.file_stem().and_then(|s| s.to_str()).unwrap_or("graph");
    graph.with_file_name(format!("{stem}.fixtures.json"))
}

fn rational_from_json(v: &Value, at: &str) -> Result<Rational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(Error::Parse(format!("{at}: expected a number or \"p/q\"")).into()),
    };
    parse_rational(&text).ok_or_else(|| Error::Parse(format!("{at}: cannot parse `{text}`")).into())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KappaDoc {
    x: String,
    y: String,
    relation: Relation,
    value: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixturesDoc {
    family: String,
    kappa: Vec<KappaDoc>,
    h0: Option<H0Doc>,
    default_k: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct H0Doc {
    values: serde_json::Map<String, Value>,
}

/// Reads a fixtures sidecar as written by `gen`.
pub fn parse_fixtures(text: &str) -> Result<Fixtures> {
    let doc: FixturesDoc = serde_json::from_str(text).map_err(|e| Error::Parse(format!("fixtures: {e}")))?;
    let kappa = doc
        .kappa
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            Ok(KappaFixture {
                value: rational_from_json(&k.value, &format!("kappa[{i}].value"))?,
                x: k.x,
                y: k.y,
                relation: k.relation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let h0 = doc
        .h0
        .map(|h| {
            h.values
                .iter()
                .map(|(id, v)| Ok((id.clone(), rational_from_json(v, &format!("h0.values.{id}"))?)))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok(Fixtures {
        family: doc.family,
        kappa,
        h0,
        default_k: doc.default_k,
    })
}

/// The sidecar next to `graph`, when there is one.
pub fn load_fixtures(graph: &Path) -> Result<Option<Fixtures>> {
    let path = sidecar_path(graph);
    if !path.exists() {
        return Ok(None);
    }
    parse_fixtures(&read(&path)?).map(Some)
}

/// The partition file when given, else the fixtures' default `K`.
pub fn resolve_partition(
    g: &WeightedGraph,
    partition: Option<&Path>,
    fixtures: Option<&Fixtures>,
) -> Result<SalamiPartition> {
    if let Some(path) = partition {
        return PartitionSpec::load(path)?.resolve(g);
    }
    match fixtures {
        Some(f) => default_partition(g, &g.indices_of(&f.default_k)?),
        None => Err(CliError::Usage(
            "--partition is required when the graph has no fixtures sidecar".into(),
        )),
    }
}

/// Family parameters as they arrive from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FamilyArgs {
    pub radius: Option<i64>,
    pub k: Option<usize>,
    pub weights: Option<String>,
    pub measures: Option<String>,
    pub metric: Option<String>,
    pub diagonal: Option<String>,
    pub unglued: bool,
}

fn rationals(list: &str, what: &str) -> Result<Vec<Rational>> {
    list.split(',')
        .map(|s| {
            parse_rational(s).ok_or_else(|| Error::BadSpec(format!("{what}: cannot parse `{}`", s.trim())).into())
        })
        .collect()
}

pub const GEN_USAGE: &str = "usage: salami gen <family> --radius <R> [--k <K>] [--weights w1,w2,..] \
[--measures m1,..] [--metric combinatorial|edge-lengths] [--diagonal linear|<c>] [--unglued] [--out <path>]";

impl FamilyArgs {
    /// Builds the family, requiring an explicit radius when `require_radius`.
    pub fn spec(&self, name: &str, require_radius: bool) -> Result<FamilySpec> {
        let mut spec = FamilySpec::default_for(name)?;
        match self.radius {
            Some(r) => spec = spec.with_radius(r),
            None if require_radius => {
                return Err(Error::BadSpec(format!("--radius is required\n{GEN_USAGE}")).into());
            }
            None => {}
        }
        let unused = |flag: &str| -> Result<FamilySpec> {
            Err(Error::BadSpec(format!("{flag} does not apply to {name}")).into())
        };
        if self.k.is_some() && !matches!(spec, FamilySpec::GluedChains { .. }) {
            return unused("--k");
        }
        if (self.weights.is_some() || self.measures.is_some() || self.metric.is_some())
            && !matches!(spec, FamilySpec::BirthDeath { .. })
        {
            return unused("--weights, --measures and --metric");
        }
        if self.diagonal.is_some() && !matches!(spec, FamilySpec::DiagonalStrip { .. }) {
            return unused("--diagonal");
        }
        if self.unglued && !matches!(spec, FamilySpec::FoldedProduct { .. }) {
            return unused("--unglued");
        }
        match &mut spec {
            FamilySpec::GluedChains { k, .. } => {
                if let Some(n) = self.k {
                    *k = n;
                }
            }
            FamilySpec::BirthDeath {
                weights,
                measures,
                metric,
                ..
            } => {
                if let Some(w) = &self.weights {
                    *weights = rationals(w, "--weights")?;
                }
                if let Some(m) = &self.measures {
                    *measures = rationals(m, "--measures")?;
                }
                if let Some(m) = &self.metric {
                    *metric = match m.as_str() {
                        "combinatorial" => MetricMode::Combinatorial,
                        "edge-lengths" => MetricMode::EdgeLengths,
                        other => return Err(Error::BadSpec(format!("unknown metric `{other}`")).into()),
                    };
                }
            }
            FamilySpec::DiagonalStrip { diagonal, .. } => {
                if let Some(s) = &self.diagonal {
                    *diagonal = match s.as_str() {
                        "linear" => DiagonalWeights::Linear,
                        c => DiagonalWeights::Constant(
                            parse_rational(c).ok_or_else(|| Error::BadSpec(format!("--diagonal: cannot parse `{c}`")))?,
                        ),
                    };
                }
            }
            FamilySpec::FoldedProduct { glued, .. } => *glued = !self.unglued,
            _ => {}
        }
        Ok(spec)
    }
}
