use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use beliefmap::artifacts::{convergence_tsv, write_artifacts};
use beliefmap::config::{load_sim_config, AnalysisConfig};
use beliefmap::corpus::synth::{generate_synthetic_corpus, SyntheticSpec};
use beliefmap::corpus::{load_corpus, save_corpus, Corpus};
use beliefmap::mapgen::{compare_graphs, export_map, export_reconstruction, reconstruct_environment, ExportFormat};
use beliefmap::pipeline::{analyze, AnalysisOutput};
use beliefmap::server::{serve, ServerConfig, DEFAULT_MAX_POSTS};
use beliefmap::sim::{posts_to_corpus, run_simulation, Environment};
use beliefmap::{Error, Result};

/// Belief maps from multi-group chat corpora, and the agent simulation
/// behind them.
#[derive(Parser)]
#[command(name = "beliefmap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus file and report its groups and rejected lines.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        /// Write the accepted posts back out in canonical form.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full analysis and write every artifact into a directory.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write only the map, as dot or structured text.
    Map {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// dot or structured; defaults to the output file's extension.
        #[arg(long)]
        format: Option<ExportFormat>,
    },
    /// Run the convergence study, optionally on a subset of groups.
    Converge {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated groups replacing the configured selection.
        #[arg(long, value_delimiter = ',')]
        groups: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulation and write its posts, regime and reconstruction.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a synthetic corpus with planted vocabularies.
    Synth {
        /// Spec file (.json or .toml), or `four-rooms` for the built-in spec.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "SERVER_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "STORE_DIR", default_value = "store")]
        store: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_POSTS)]
        max_posts: usize,
    },
}

fn load_inputs(corpus: &Path, config: &Path) -> Result<(Corpus, AnalysisConfig)> {
    let config = AnalysisConfig::load(config)?;
    let report = load_corpus(corpus)?;
    if !report.rejects.is_empty() {
        eprintln!(
            "{} lines rejected, see {}",
            report.rejects.len(),
            beliefmap::corpus::rejects_path(corpus).display()
        );
    }
    Ok((report.corpus, config))
}

fn run_analysis(corpus: &Path, config: &Path, groups: Option<Vec<String>>) -> Result<AnalysisOutput> {
    let (corpus, mut cfg) = load_inputs(corpus, config)?;
    if let Some(groups) = groups {
        cfg.groups.include = groups;
    }
    analyze(&corpus, &cfg, config.parent())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout().write_all(bytes).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    emit(Some(path), bytes.as_ref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { corpus, out } => {
            let report = load_corpus(&corpus)?;
            let c = &report.corpus;
            println!(
                "{} posts in {} groups, {} lines rejected",
                c.len(),
                c.groups().len(),
                report.rejects.len()
            );
            for (group, n) in c.post_counts() {
                println!("{group}\t{n}");
            }
            if let Some(out) = out {
                save_corpus(c, out)?;
            }
        }
        Command::Analyze { corpus, config, out } => {
            let output = run_analysis(&corpus, &config, None)?;
            for d in &output.diagnostics {
                eprintln!("warning: {d}");
            }
            write_artifacts(&out, &output)?;
            println!("{}", output.map.labels().join(" -> "));
        }
        Command::Map {
            corpus,
            config,
            out,
            format,
        } => {
            let format = match (format, &out) {
                (Some(f), _) => f,
                (None, Some(path)) => ExportFormat::from_path(path)?,
                (None, None) => ExportFormat::Dot,
            };
            let output = run_analysis(&corpus, &config, None)?;
            emit(out.as_deref(), &export_map(&output.map, format))?;
        }
        Command::Converge {
            corpus,
            config,
            groups,
            out,
        } => {
            let groups = (!groups.is_empty()).then_some(groups);
            let output = run_analysis(&corpus, &config, groups)?;
            if output.convergence.levels.is_empty() {
                return Err(Error::Study(
                    output
                        .diagnostics
                        .iter()
                        .find(|d| d.starts_with("convergence"))
                        .cloned()
                        .unwrap_or_else(|| "no convergence levels".into()),
                ));
            }
            emit(out.as_deref(), convergence_tsv(&output.convergence).as_bytes())?;
        }
        Command::Simulate { config, out, seed } => {
            let mut cfg = load_sim_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let env = Environment::for_config(&cfg);
            let result = run_simulation(&cfg, &env)?;
            let rec = reconstruct_environment(&result.posts);
            let comparison = compare_graphs(&rec, &env);
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            save_corpus(&posts_to_corpus(&result.posts), out.join("posts.tsv"))?;
            write_file(&out.join("regime.json"), pretty_json(&result.report))?;
            write_file(&out.join("comparison.json"), pretty_json(&comparison))?;
            write_file(
                &out.join("reconstruction.dot"),
                export_reconstruction(&rec, ExportFormat::Dot),
            )?;
            println!(
                "{} (polarization {:.3}, spread {:.3}, clusters {}); node jaccard {:.3}, edge jaccard {:.3}",
                result.report.regime,
                result.report.polarization,
                result.report.spread,
                result.report.cluster_count,
                comparison.node_jaccard,
                comparison.edge_jaccard
            );
        }
        Command::Synth { spec, out, seed } => {
            let spec = if spec == "four-rooms" {
                SyntheticSpec::four_rooms()
            } else {
                SyntheticSpec::load(&spec)?
            };
            let corpus = generate_synthetic_corpus(&spec, seed)?;
            save_corpus(&corpus, &out)?;
            println!("{} posts in {} groups", corpus.len(), corpus.groups().len());
        }
        Command::Serve { addr, store, max_posts } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Io {
                path: store.clone(),
                source: e,
            })?;
            eprintln!("listening on {addr}, store {}", store.display());
            rt.block_on(serve(ServerConfig {
                addr,
                store_dir: store,
                max_posts,
            }))?;
        }
    }
    Ok(())
}

fn pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports always serialize");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Alignment { diagnostics, .. } = &e {
                for d in diagnostics {
                    eprintln!("  {d}");
                }
            }
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
