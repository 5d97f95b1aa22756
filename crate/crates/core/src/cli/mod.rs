//! The `graphprobe` command line: one subcommand per pipeline stage plus
//! `all`, which runs the seven-model Grid-House experiment end to end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 missing input, 4 runtime
//! failure. `GRAPHPROBE_THREADS` caps the worker threads.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_all, cmd_generate, cmd_probe, cmd_props, cmd_report, cmd_train, probe_config_with, train_and_export,
    AllOutcome, TrainOutputs, VariantOutcome,
};
pub use config::{default_roster, ModelSection, OutputSection, RunConfig};

use crate::error::{Error, Result};
use crate::gnn::EmbeddingFormat;
use crate::probe::Aggregation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MISSING_INPUT: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;
pub const THREADS_ENV: &str = "GRAPHPROBE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "graphprobe", version, about = "Train small GNNs and probe their layers for graph properties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the Grid-House corpus as JSON lines.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of graphs (overrides `dataset.count`).
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute graph-level (and optionally node-level) properties.
    Props {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-node properties here.
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train the `[model]` of the config and export its embeddings.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch loss and accuracy of every restart.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Embeddings directory (default: `<out stem>_embeddings` beside the model).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// `csv` or `binary` (overrides `output.embeddings_format`).
        #[arg(long)]
        format: Option<EmbeddingFormat>,
    },
    /// Fit ridge probes of every property on every layer.
    Probe {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        props: PathBuf,
        /// `norm_sort`, `mean` or `pooled` (overrides `probe.aggregation`).
        #[arg(long)]
        agg: Option<Aggregation>,
        #[arg(long)]
        out: PathBuf,
        /// Per-node properties; enables node-level probes.
        #[arg(long, requires = "node_out")]
        node_props: Option<PathBuf>,
        #[arg(long, requires = "node_props")]
        node_out: Option<PathBuf>,
    },
    /// Turn probe tables into R² series and a markdown summary.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        probes: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Combine probe files produced under different configs.
        #[arg(long)]
        force: bool,
    },
    /// Generate, compute properties, train the roster, probe and report.
    All {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "graphprobe-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Exit code for an error: 2 configuration, 3 missing input, 4 anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Param(_) => EXIT_CONFIG,
        Error::MissingInput { .. } => EXIT_MISSING_INPUT,
        _ => EXIT_RUNTIME,
    }
}

fn load(config: Option<&PathBuf>, seed: Option<u64>) -> Result<RunConfig> {
    let mut c = RunConfig::load_or_default(config)?;
    if let Some(s) = seed {
        c.seed = s;
    }
    Ok(c)
}

/// Worker-thread cap from `GRAPHPROBE_THREADS`, if set.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            config,
            count,
            seed,
            out,
        } => {
            let mut c = load(config.as_ref(), seed)?;
            if let Some(n) = count {
                c.dataset.count = n;
            }
            cmd_generate(&c, &out).map(drop)
        }
        Command::Props {
            config,
            input,
            out,
            nodes,
            seed,
        } => {
            let c = load(config.as_ref(), seed)?;
            cmd_props(&c, &input, &out, nodes.as_deref()).map(drop)
        }
        Command::Train {
            config,
            data,
            out,
            metrics,
            embeddings,
            format,
        } => {
            let mut c = load(config.as_ref(), None)?;
            if let Some(f) = format {
                c.output.embeddings_format = f;
            }
            cmd_train(&c, &data, &TrainOutputs::new(out, metrics, embeddings)).map(drop)
        }
        Command::Probe {
            config,
            embeddings,
            props,
            agg,
            out,
            node_props,
            node_out,
        } => {
            let c = load(config.as_ref(), None)?;
            let nodes = node_props.as_deref().zip(node_out.as_deref());
            cmd_probe(&embeddings, &props, &probe_config_with(&c, agg), &out, nodes).map(drop)
        }
        Command::Report { probes, out, force } => cmd_report(&probes, &out, force).map(drop),
        Command::All { config, out, seed } => {
            let c = load(config.as_ref(), seed)?;
            let outcome = cmd_all(&c, &out)?;
            for v in &outcome.variants {
                println!(
                    "{:<12} test accuracy {:.4}  max graph-level R² {}",
                    v.name,
                    v.test_accuracy,
                    v.probes.max_graph_r2().map_or("—".into(), |r| format!("{r:.3}"))
                );
            }
            match outcome.correlation.correlation {
                Some(r) => println!("accuracy vs. probing correlation {r:.3}"),
                None => println!("accuracy vs. probing correlation undefined"),
            }
            println!("report written to {}", out.join("report").display());
            Ok(())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();
    let result = thread_limit().and_then(|limit| {
        if let Some(n) = limit {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        run(cli)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
