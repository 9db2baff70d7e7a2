//! `ftm`: match, diverge, eval, stats, build-triple-gold and snapshot.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{RunConfig, CONFIG_KEYS};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ftm", version, about = "Entity and triple alignment between two RDF knowledge graphs")]
#[command(after_long_help = CONFIG_KEYS, after_help = CONFIG_KEYS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Align two graphs; writes entity_mappings.tsv, triple_mappings.tsv and run_report.json.
    #[command(after_help = CONFIG_KEYS)]
    Match(GraphArgs),
    /// Score conflicting triples for given entity mappings; writes divergences.tsv.
    #[command(after_help = CONFIG_KEYS)]
    Diverge {
        #[command(flatten)]
        graphs: GraphArgs,
        /// Entity mappings TSV as written by `match`.
        #[arg(long)]
        mappings: PathBuf,
    },
    /// Hit@k and precision/recall/F of entity mappings against a gold standard.
    #[command(after_help = CONFIG_KEYS)]
    Eval(EvalArgs),
    /// Per-predicate functionality, inverse functionality and unique ratio.
    #[command(after_help = CONFIG_KEYS)]
    Stats {
        #[arg(long)]
        source: String,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Candidate triple pairs with mechanical labels; writes triple_gold.tsv.
    #[command(after_help = CONFIG_KEYS)]
    BuildTripleGold {
        #[command(flatten)]
        graphs: GraphArgs,
        /// Gold entity pairs (TSV or OAEI XML).
        #[arg(long)]
        gold: PathBuf,
        /// Gold predicate pairs; when absent, pairs of `--gold` naming source predicates are used.
        #[arg(long)]
        predicate_gold: Option<PathBuf>,
        /// Keep predicates with functionality above this on both sides.
        #[arg(long, default_value_t = ftm_core::eval::DEFAULT_FUNCTIONALITY_MIN)]
        fun_min: f64,
    },
    /// Save a graph as a binary snapshot for fast reloads.
    Snapshot {
        #[arg(long)]
        source: String,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    #[value(alias = "nt")]
    Ntriples,
    #[value(alias = "ttl")]
    Turtle,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum EmbedderArg {
    Local,
    Remote,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Left graph: .nt, .ttl, snapshot file, or SPARQL endpoint URL.
    #[arg(long)]
    pub source: Option<String>,
    /// Right graph, same forms as --source.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Treat --source and --target as SPARQL endpoints.
    #[arg(long)]
    pub endpoint: bool,
    #[arg(long)]
    pub page_size: Option<usize>,
    #[arg(long, value_enum)]
    pub embedder: Option<EmbedderArg>,
    #[arg(long)]
    pub embedder_url: Option<String>,
    /// Entity threshold (thresholds.entity).
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub k_top: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl GraphArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.source {
            c.source = Some(v.clone());
        }
        if let Some(v) = &self.target {
            c.target = Some(v.clone());
        }
        if let Some(f) = self.format {
            c.format = Some(format_name(f).into());
        }
        if self.endpoint {
            c.endpoint.force = true;
        }
        if let Some(v) = self.page_size {
            c.endpoint.page_size = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        match (self.embedder, &self.embedder_url) {
            (Some(EmbedderArg::Local), _) => c.embedder = None,
            (Some(EmbedderArg::Remote), Some(url)) | (None, Some(url)) => {
                c.embedder = Some(ftm_core::embedding::ProviderConfig::remote(url.clone()))
            }
            (Some(EmbedderArg::Remote), None) => {
                if !matches!(c.embedder, Some(ftm_core::embedding::ProviderConfig::Remote { .. })) {
                    return Err(CliError::config("--embedder remote needs --embedder-url"));
                }
            }
            (None, None) => {}
        }
        if let Some(v) = self.threshold {
            c.thresholds.entity = v;
        }
        if let Some(v) = self.k_top {
            c.k_top = v;
        }
        if let Some(v) = self.max_iters {
            c.max_iterations = v;
        }
        if let Some(v) = self.threads {
            c.threads = Some(v);
        }
        if let Some(v) = &self.output_dir {
            c.output_dir = v.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

pub fn format_name(f: FormatArg) -> &'static str {
    match f {
        FormatArg::Ntriples => "ntriples",
        FormatArg::Turtle => "turtle",
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Entity mappings TSV (left, right, score).
    #[arg(long)]
    pub predictions: PathBuf,
    /// Gold entity pairs (TSV or OAEI XML).
    #[arg(long)]
    pub gold: PathBuf,
    /// Comma-separated k values for Hit@k.
    #[arg(long, value_delimiter = ',', default_value = "1,10")]
    pub k: Vec<usize>,
    /// Score threshold for precision/recall/F; defaults to thresholds.entity.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Search the threshold that maximizes F.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = ftm_core::eval::DEFAULT_SWEEP_STEP)]
    pub step: f64,
    /// Also write eval_report.json here.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Match(args) => {
            let cfg = args.resolve()?;
            init_threads(cfg.threads);
            commands::cmd_match(&cfg)
        }
        Command::Diverge { graphs, mappings } => {
            let cfg = graphs.resolve()?;
            init_threads(cfg.threads);
            commands::cmd_diverge(&cfg, &mappings)
        }
        Command::Eval(args) => commands::cmd_eval(&args),
        Command::Stats { source, format, config } => {
            let mut cfg = match config {
                Some(p) => RunConfig::from_file(&p)?,
                None => RunConfig::default(),
            };
            if let Some(f) = format {
                cfg.format = Some(format_name(f).into());
            }
            cfg.validate()?;
            let stdout = std::io::stdout();
            commands::cmd_stats(&cfg, &source, &mut stdout.lock())
        }
        Command::BuildTripleGold { graphs, gold, predicate_gold, fun_min } => {
            let cfg = graphs.resolve()?;
            init_threads(cfg.threads);
            commands::cmd_build_triple_gold(&cfg, &gold, predicate_gold.as_deref(), fun_min)
        }
        Command::Snapshot { source, format, out } => {
            let mut cfg = RunConfig::default();
            cfg.format = format.map(|f| format_name(f).into());
            commands::cmd_snapshot(&cfg, &source, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category, e.message);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
