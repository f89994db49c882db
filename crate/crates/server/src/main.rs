use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};
use waypoint_core::engine::plan;
use waypoint_core::llm::{fixture_file_name, request_digest, PromptKind};
use waypoint_core::model::{ExperienceLevel, PlanningPreferences, VideoLength};
use waypoint_server::config::{IngestMode, Layer, LlmMode, Settings};

#[derive(Parser)]
#[command(name = "waypoint", version, about = "Plan video learning pathways and serve the learning API")]
struct Cli {
    /// TOML settings file; flags and environment override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        /// Directory for stored pathways and sessions.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, value_name = "mock|live")]
        llm_mode: Option<LlmMode>,
        #[arg(long, value_name = "fixture|live")]
        ingest_mode: Option<IngestMode>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Mock reply directory.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Built UI bundle to serve at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Plan one pathway and write it as JSON.
    Plan {
        #[arg(long)]
        topic: String,
        #[arg(long, default_value = "medium", value_name = "short|medium|long")]
        length: VideoLength,
        #[arg(long, default_value = "beginner")]
        level: ExperienceLevel,
        #[arg(long, default_value_t = 5)]
        concepts: u32,
        /// Fixture corpus; implies fixture ingestion.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Mock reply directory; implies the mock model.
        #[arg(long, value_name = "DIR")]
        mock_llm: Option<PathBuf>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the digest and fixture file name for a mock request.
    FixtureDigest {
        #[arg(long)]
        kind: PromptKind,
        /// Template parameter as key=value; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
    },
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

fn layers(config: Option<&PathBuf>, flags: Layer) -> anyhow::Result<Settings> {
    let file = match config {
        Some(path) => Layer::from_file(path)?,
        None => Layer::default(),
    };
    let env = Layer::from_env(|k| std::env::var(k).ok())?;
    Settings::resolve(flags.over(env.over(file)))
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Serve { port, store, llm_mode, ingest_mode, corpus, fixtures, static_dir } => {
            let flags = Layer { port, store, llm_mode, ingest_mode, corpus, fixtures, static_dir, ..Layer::default() };
            let settings = layers(cli.config.as_ref(), flags)?;
            tokio::runtime::Runtime::new()?.block_on(waypoint_server::serve(settings))
        }
        Command::Plan { topic, length, level, concepts, corpus, mock_llm, out } => {
            let flags = Layer {
                ingest_mode: corpus.as_ref().map(|_| IngestMode::Fixture),
                corpus,
                llm_mode: mock_llm.as_ref().map(|_| LlmMode::Mock),
                fixtures: mock_llm,
                ..Layer::default()
            };
            let settings = layers(cli.config.as_ref(), flags)?;
            let prefs = PlanningPreferences::new(&topic, length, level, concepts)?;
            let result = plan(
                &prefs,
                settings.backend()?.as_ref(),
                &settings.transcript_cache()?,
                &settings.gateway()?,
                &settings.engine(),
            )
            .map_err(|e| anyhow::anyhow!("{} ({})", e, e.code()))?;
            let mut json = serde_json::to_string_pretty(&result.pathway)?;
            json.push('\n');
            match out {
                Some(path) => std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
                None => std::io::stdout().write_all(json.as_bytes())?,
            }
            Ok(())
        }
        Command::FixtureDigest { kind, params } => {
            let params: BTreeMap<String, String> = params.into_iter().collect();
            let digest = request_digest(kind, &params);
            println!("{digest}\t{}", fixture_file_name(kind, Some(&digest)));
            Ok(())
        }
    }
}
