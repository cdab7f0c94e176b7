use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use salami_cli::commands::{self, Format, HarmonicFlags};
use salami_cli::input::{load_fixtures, load_graph, resolve_partition, seed_from_env, FamilyArgs};
use salami_cli::verify::{self, VerifyInput};
use salami_cli::{emit, CliError, Output, Result, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "salami", version, about = "Curvature, Lipschitz extension and harmonic functions on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a family window and its fixtures sidecar.
    Gen {
        family: String,
        #[command(flatten)]
        params: FamilyFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-edge curvature from both solvers.
    Curvature {
        #[arg(long)]
        graph: PathBuf,
        /// Only edges touching these vertex ids.
        #[arg(long, value_delimiter = ',')]
        region: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesise the sharp harmonic function for a partition.
    Harmonic {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[command(flatten)]
        synthesis: SynthesisFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification checks and print a report.
    Verify {
        #[arg(long, conflicts_with = "family")]
        graph: Option<PathBuf>,
        #[arg(long)]
        family: Option<String>,
        #[command(flatten)]
        params: FamilyFlags,
        #[arg(long)]
        partition: Option<PathBuf>,
        /// `all`, a group or check ids, comma separated.
        #[arg(long, default_value = "all")]
        suite: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tent quotients for R = 1..=r-max.
    Recurrence {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        r_max: u32,
        #[command(flatten)]
        synthesis: SynthesisFlags,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FamilyFlags {
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<i64>,
    /// Number of glued chains.
    #[arg(long)]
    k: Option<usize>,
    /// Periodic edge weights of a birth-death chain.
    #[arg(long)]
    weights: Option<String>,
    /// Periodic vertex measures of a birth-death chain.
    #[arg(long)]
    measures: Option<String>,
    /// `combinatorial` or `edge-lengths`.
    #[arg(long)]
    metric: Option<String>,
    /// Diagonal weights of the strip: `linear` or a constant.
    #[arg(long)]
    diagonal: Option<String>,
    /// One quadrant of the folded product instead of two.
    #[arg(long)]
    unglued: bool,
}

impl FamilyFlags {
    fn args(&self) -> FamilyArgs {
        FamilyArgs {
            radius: self.radius,
            k: self.k,
            weights: self.weights.clone(),
            measures: self.measures.clone(),
            metric: self.metric.clone(),
            diagonal: self.diagonal.clone(),
            unglued: self.unglued,
        }
    }

    fn is_empty(&self) -> bool {
        self.args() == FamilyArgs::default()
    }
}

#[derive(Args)]
struct SynthesisFlags {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

impl SynthesisFlags {
    fn flags(&self) -> HarmonicFlags {
        HarmonicFlags {
            epsilon: self.epsilon,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn graph_with_partition(
    graph: &Path,
    partition: Option<&Path>,
) -> Result<(salami_core::WeightedGraph, salami_core::SalamiPartition)> {
    let g = load_graph(graph)?;
    let fixtures = load_fixtures(graph)?;
    let p = resolve_partition(&g, partition, fixtures.as_ref())?;
    Ok((g, p))
}

fn run(command: Command) -> Result<(Output, Option<PathBuf>)> {
    match command {
        Command::Gen { family, params, out } => {
            let spec = params.args().spec(&family, true)?;
            Ok((commands::gen(&spec, out.as_deref())?, None))
        }
        Command::Curvature {
            graph,
            region,
            format,
            out,
        } => {
            let g = load_graph(&graph)?;
            Ok((commands::curvature(&g, region.as_deref(), format.into())?, out))
        }
        Command::Harmonic {
            graph,
            partition,
            synthesis,
            out,
        } => {
            let (g, p) = graph_with_partition(&graph, partition.as_deref())?;
            Ok((commands::harmonic(&g, &p, &synthesis.flags())?, out))
        }
        Command::Recurrence {
            graph,
            partition,
            r_max,
            synthesis,
            format,
            out,
        } => {
            let (g, p) = graph_with_partition(&graph, partition.as_deref())?;
            Ok((
                commands::recurrence(&g, &p, r_max, &synthesis.flags(), format.into())?,
                out,
            ))
        }
        Command::Verify {
            graph,
            family,
            params,
            partition,
            suite,
            out,
        } => {
            let (g, fixtures) = match (graph, family) {
                (Some(path), None) => {
                    if !params.is_empty() {
                        return Err(CliError::Usage("family parameters need --family".into()));
                    }
                    (load_graph(&path)?, load_fixtures(&path)?)
                }
                (None, Some(name)) => {
                    let generated = params.args().spec(&name, false)?.generate()?;
                    (generated.graph, Some(generated.fixtures))
                }
                _ => return Err(CliError::Usage("verify needs --graph or --family".into())),
            };
            let p = resolve_partition(&g, partition.as_deref(), fixtures.as_ref())?;
            let input = VerifyInput {
                graph: &g,
                partition: p,
                fixtures: fixtures.as_ref(),
                suites: suite,
                seed: seed_from_env()?,
            };
            Ok((verify::verify(input)?, out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command).and_then(|(output, out)| {
        if let Some(text) = emit(output.text, out.as_deref())? {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not worth a second error
            let _ = stdout.write_all(text.as_bytes());
        }
        Ok(output.status)
    }) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_INPUT as u8))
}
