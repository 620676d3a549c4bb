use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use provenance::classifier::{write_report, PredictionRecord};
use provenance::interchange::{
    read_embedding_file, write_embedding_file, EmbeddingVector, Label, Record,
};
use provenance::ledger::GasMode;
use provenance::perturb::{synthetic_corpus, write_details, write_grid, Perturbation};
use provenance::pipeline::{
    cmd_bench, cmd_gas, embed_images, load_corpus, service, verify_ledger_files, BenchInput,
    Engine, EngineConfig, EngineError, Prediction,
};

const EXIT_USAGE: u8 = 1;
const EXIT_LEDGER: u8 = 3;

#[derive(Parser)]
#[command(name = "provenance", version, about = "AI-image provenance engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Data root holding the store, ledgers and config.
    #[arg(long, default_value = ".provenance")]
    root: PathBuf,
    /// Config file (default: <root>/provenance.toml when present).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detection mode: hash_only, vector_only or hybrid.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    namespace: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> Result<EngineConfig, EngineError> {
        let mut c = EngineConfig::load(&self.root, self.config.as_deref())?;
        if let Some(m) = &self.mode {
            c.mode = m.parse()?;
        }
        if let Some(ns) = &self.namespace {
            c.namespace = ns.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }

    fn engine(&self) -> Result<Engine, EngineError> {
        Engine::open(&self.root, self.config()?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Create the two collections and the two ledgers.
    Init {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: usize,
    },
    /// Toy-embed a directory of images into an embedding file.
    Embed {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        label: Label,
        #[arg(long, default_value = "train")]
        namespace: String,
    },
    /// Add an embedding file to a collection.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        file: PathBuf,
        /// `ai`, `human`, or a configured collection name.
        #[arg(long)]
        collection: String,
    },
    /// Classify embeddings; prints one JSON response per line.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with_all = ["vector", "image"])]
        file: Option<PathBuf>,
        /// Comma-separated components.
        #[arg(long, conflicts_with = "image", allow_hyphen_values = true)]
        vector: Option<String>,
        #[arg(long)]
        image: Option<PathBuf>,
        /// Also write the CSV prediction report (file input only).
        #[arg(long, requires = "file")]
        report: Option<PathBuf>,
    },
    /// Labeled evaluation: confusion matrix and metrics.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ai_file: PathBuf,
        #[arg(long)]
        human_file: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Perturbation robustness benchmark.
    Bench(BenchArgs),
    /// Simulated storage gas for digest stores.
    Gas {
        #[arg(long, default_value = "uint256")]
        mode: GasMode,
        #[arg(long, default_value_t = 9000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Recompute every ledger link; exits 3 on any defect.
    LedgerVerify {
        #[arg(long, default_value = ".provenance")]
        root: PathBuf,
        /// Verify a single ledger file instead.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of PNG/JPEG originals.
    #[arg(long, conflicts_with_all = ["synthetic", "originals"])]
    corpus: Option<PathBuf>,
    /// Generate N synthetic originals instead.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long, default_value_t = 512)]
    size: u32,
    /// Precomputed original embeddings (with --modified).
    #[arg(long, requires = "modified")]
    originals: Option<PathBuf>,
    #[arg(long, requires = "originals")]
    modified: Option<PathBuf>,
    /// Comma-separated perturbation tags (default: the seven standard ones).
    #[arg(long, value_delimiter = ',')]
    perturbations: Vec<String>,
    #[arg(long)]
    include_identity: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "bench_grid.csv")]
    out: PathBuf,
    #[arg(long)]
    details: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), EngineError> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn parse_vector(s: &str) -> Result<EmbeddingVector, EngineError> {
    let parts = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f32>()
                .map_err(|_| EngineError::InvalidInput(format!("bad component {p:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EmbeddingVector::new(parts)?)
}

fn run(command: Command) -> Result<u8, EngineError> {
    match command {
        Command::Init { common, dim } => {
            let engine = Engine::init(&common.root, dim, common.config()?)?;
            print_json(&engine.health()?)?;
        }
        Command::Embed {
            images,
            out,
            label,
            namespace,
        } => {
            let records = embed_images(&load_corpus(&images)?, label, &namespace)?;
            write_embedding_file(&records, &out)?;
            eprintln!("wrote {} embeddings to {}", records.len(), out.display());
        }
        Command::Ingest {
            common,
            file,
            collection,
        } => {
            let engine = common.engine()?;
            let ns = engine.config().namespace.clone();
            print_json(&engine.ingest_file(&file, &collection, &ns)?)?;
        }
        Command::Classify {
            common,
            file,
            vector,
            image,
            report,
        } => {
            let engine = common.engine()?;
            let mode = engine.config().mode;
            let records: Vec<Record> = if let Some(f) = &file {
                read_embedding_file(f)?
            } else if let Some(v) = vector {
                vec![(query_meta("vector"), parse_vector(&v)?)]
            } else if let Some(p) = image {
                let img = image::open(&p)?.to_rgb8();
                let name = p.file_name().map_or("image".into(), |n| n.to_string_lossy().into_owned());
                vec![(query_meta(&name), provenance::interchange::toy_embed(&img)?)]
            } else {
                return Err(EngineError::InvalidInput(
                    "one of --file, --vector or --image is required".into(),
                ));
            };
            let responses = engine.classify_records(&records, mode)?;
            for r in &responses {
                print_json(r)?;
            }
            if let Some(path) = report {
                if !mode.uses_vectors() {
                    return Err(EngineError::InvalidInput(
                        "the prediction report needs similarities; use vector_only or hybrid".into(),
                    ));
                }
                let rows: Vec<PredictionRecord> = records
                    .iter()
                    .zip(&responses)
                    .map(|((meta, _), r)| to_record(meta, r))
                    .collect();
                write_report(&rows, &path)?;
            }
        }
        Command::Evaluate {
            common,
            ai_file,
            human_file,
            report,
        } => {
            let engine = common.engine()?;
            let eval = engine.evaluate(&read_embedding_file(&ai_file)?, &read_embedding_file(&human_file)?)?;
            print_json(&serde_json::json!({
                "confusion_matrix": eval.matrix,
                "metrics": eval.metrics,
            }))?;
            if let Some(path) = report {
                write_report(&eval.records, &path)?;
            }
        }
        Command::Bench(args) => bench(args)?,
        Command::Gas {
            mode,
            n,
            seed,
            config,
        } => {
            let mut c = match config {
                Some(p) => EngineConfig::from_file(&p)?,
                None => EngineConfig::default(),
            };
            c.seed = seed;
            print!("{}", cmd_gas(mode, n, &c)?);
        }
        Command::LedgerVerify { root, ledger } => {
            let statuses = match ledger {
                Some(p) => vec![(p.display().to_string(), provenance::ledger::verify_chain(&p)?)],
                None => verify_ledger_files(&root)?,
            };
            let mut ok = true;
            for (name, s) in &statuses {
                println!("{name}: {s}");
                ok &= s.ok;
            }
            if !ok {
                return Ok(EXIT_LEDGER);
            }
        }
        Command::Serve { common, bind } => {
            let engine = Arc::new(common.engine()?);
            let bind = bind.unwrap_or_else(|| engine.config().bind.clone());
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&bind).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                service::serve(engine, listener, async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await
            })?;
        }
    }
    Ok(0)
}

fn query_meta(name: &str) -> provenance::interchange::RecordMeta {
    provenance::interchange::RecordMeta::new(name, name, Label::Ai, "query")
}

fn to_record(
    meta: &provenance::interchange::RecordMeta,
    r: &provenance::pipeline::ClassifyResponse,
) -> PredictionRecord {
    PredictionRecord {
        source_name: meta.source_name.clone(),
        true_label: Some(meta.label),
        human_similarity: r.human_similarity.unwrap_or_default(),
        ai_similarity: r.ai_similarity.unwrap_or_default(),
        predicted_label: if r.prediction == Prediction::Human {
            Label::Human
        } else {
            Label::Ai
        },
        nearest_ai_id: r.nearest_ai_id.clone().unwrap_or_default(),
        nearest_human_id: r.nearest_human_id.clone().unwrap_or_default(),
        verified_on_ledger: r.verified,
    }
}

fn bench(args: BenchArgs) -> Result<(), EngineError> {
    let mut grid: Vec<Perturbation> = if args.perturbations.is_empty() {
        Perturbation::standard_grid()
    } else {
        args.perturbations
            .iter()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()?
    };
    if args.include_identity && !grid.contains(&Perturbation::Identity) {
        grid.insert(0, Perturbation::Identity);
    }
    let input = match (&args.corpus, args.synthetic, &args.originals, &args.modified) {
        (Some(dir), None, None, None) => BenchInput::Images(load_corpus(dir)?),
        (None, Some(n), None, None) => BenchInput::Images(synthetic_corpus(n, args.size, args.seed)),
        (None, None, Some(o), Some(m)) => BenchInput::Embeddings {
            originals: read_embedding_file(o)?,
            modified: read_embedding_file(m)?,
        },
        _ => {
            return Err(EngineError::InvalidInput(
                "give exactly one of --corpus, --synthetic or --originals/--modified".into(),
            ))
        }
    };
    let report = cmd_bench(input, &grid, args.seed)?;
    write_grid(&report.rows, &args.out)?;
    if let Some(d) = &args.details {
        write_details(&report.matches, d)?;
    }
    print_grid(&report.rows, &args.out);
    Ok(())
}

fn print_grid(rows: &[provenance::perturb::BenchRow], out: &Path) {
    for r in rows {
        println!(
            "{:<14} {:>4}/{:<4} {:>7.2}%",
            r.perturbation, r.correct, r.total, r.accuracy_percent
        );
    }
    eprintln!("grid written to {}", out.display());
}
