//! `sema`: run scenarios, sweep the shipped set, generate screen
//! corpora, self-check against the acceptance criteria, and poke at the
//! wire format by hand.
//!
//! Exit codes: 0 on success, 1 when a run or the acceptance check fails,
//! 2 for configuration errors (bad flags, bad files, bad field paths).

use std::env;
use std::path::{Path, PathBuf};
use std::process;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sema_core::{
    decode_frame, encode_frame, generate_corpus, load_profile, load_with_overrides,
    run_acceptance, save_corpus, AcceptanceConfig, CodebookRegistry, ConfigError, CorpusSpec,
    Modality, Payload, Scenario, ScenarioError, TokenFrame,
};

#[derive(Parser)]
#[command(name = "sema", version, about = "Semantic transport simulation suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files and write their CSVs.
    Run(RunArgs),
    /// Run every scenario file in a directory.
    Sweep(SweepArgs),
    /// Corpus tooling.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Run the acceptance criteria and print the report.
    Check(CheckArgs),
    /// Encode or decode single frames for debugging and golden vectors.
    Frame {
        #[command(subcommand)]
        command: FrameCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML files.
    #[arg(required = true)]
    scenarios: Vec<PathBuf>,
    /// Output directory; defaults to $SEMA_OUT_DIR, then ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a scenario field, e.g. --set seed=9 or --set grid.rtt_ms=80.
    #[arg(long = "set", value_name = "FIELD=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for multiple scenarios.
    #[arg(long, default_value_t = 4)]
    jobs: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory holding scenario files.
    #[arg(long, default_value = "scenarios")]
    dir: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    jobs: usize,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Generate a synthetic desktop-screen corpus file.
    Gen(CorpusGenArgs),
}

#[derive(Args)]
struct CorpusGenArgs {
    /// Output corpus file.
    #[arg(long, default_value = "corpus.json")]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    #[arg(long, default_value_t = 1920)]
    width: u32,
    #[arg(long, default_value_t = 1080)]
    height: u32,
    #[arg(long, default_value_t = 72)]
    min_nodes: usize,
    #[arg(long, default_value_t = 92)]
    max_nodes: usize,
}

#[derive(Args)]
struct CheckArgs {
    /// Builtin profile name or a profile TOML path.
    #[arg(long, default_value = "paper_defaults")]
    profile: String,
    /// Trials per playout sweep point.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum FrameCommand {
    /// Build a frame and print its wire bytes as hex.
    Encode(FrameEncodeArgs),
    /// Parse wire bytes from hex and print the frame as JSON.
    Decode {
        hex: String,
    },
}

#[derive(Args)]
struct FrameEncodeArgs {
    /// audio_tokens, visual_tokens, structured_text, action_command, or
    /// tts_tokens.
    #[arg(long, default_value = "audio_tokens")]
    modality: String,
    #[arg(long, default_value_t = 1)]
    codebook_id: u16,
    #[arg(long, default_value_t = 0)]
    sequence: u32,
    #[arg(long, default_value_t = 0)]
    timestamp_us: u64,
    /// Comma-separated token indices, for token modalities.
    #[arg(long, conflicts_with = "text")]
    tokens: Option<String>,
    /// Payload text, for text modalities.
    #[arg(long)]
    text: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            process::exit(exit_code_for(&err));
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<sema_core::FrameError>().is_some() {
        return 2;
    }
    if let Some(ScenarioError::Config(_)) = err.downcast_ref::<ScenarioError>() {
        return 2;
    }
    1
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Corpus {
            command: CorpusCommand::Gen(args),
        } => corpus_gen(args),
        Command::Check(args) => check(args),
        Command::Frame { command } => frame(command),
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| env::var_os("SEMA_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>> {
    raw.iter()
        .map(|entry| {
            entry
                .split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| {
                    anyhow::Error::new(ConfigError::Invalid {
                        field: entry.clone(),
                        reason: "expected FIELD=VALUE".to_string(),
                    })
                })
        })
        .collect()
}

fn run(args: RunArgs) -> Result<i32> {
    let overrides = parse_overrides(&args.overrides)?;
    let scenarios = args
        .scenarios
        .iter()
        .map(|path| load_with_overrides(path, &overrides).map_err(anyhow::Error::new))
        .collect::<Result<Vec<_>>>()?;
    run_pool(scenarios, &out_dir(args.out), args.jobs)
}

fn sweep(args: SweepArgs) -> Result<i32> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .with_context(|| format!("cannot list {}", args.dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no scenario files in {}", args.dir.display());
    }
    let scenarios = paths
        .iter()
        .map(|path| Scenario::from_path(path).map_err(anyhow::Error::new))
        .collect::<Result<Vec<_>>>()?;
    run_pool(scenarios, &out_dir(args.out), args.jobs)
}

fn run_pool(scenarios: Vec<Scenario>, out: &Path, jobs: usize) -> Result<i32> {
    if jobs == 0 {
        return Err(anyhow::Error::new(ConfigError::Invalid {
            field: "jobs".to_string(),
            reason: "must be at least 1".to_string(),
        }));
    }
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<Result<String, ScenarioError>>>> =
        scenarios.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..jobs.min(scenarios.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(scenario) = scenarios.get(i) else {
                    break;
                };
                let outcome = scenario.run(out).map(|output| {
                    format!(
                        "{}: wrote {} ({} rows)",
                        output.name,
                        output.csv_path.display(),
                        output.rows.len()
                    )
                });
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    for cell in results {
        match cell.into_inner().unwrap().expect("every index visited") {
            Ok(line) => println!("{line}"),
            Err(err) => return Err(err.into()),
        }
    }
    Ok(0)
}

fn corpus_gen(args: CorpusGenArgs) -> Result<i32> {
    let invalid = |field: &str, reason: &str| {
        anyhow::Error::new(ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.to_string(),
        })
    };
    if args.count == 0 {
        return Err(invalid("count", "must be at least 1"));
    }
    if args.min_nodes < 8 {
        return Err(invalid("min-nodes", "snapshots need at least 8 elements"));
    }
    if args.min_nodes > args.max_nodes {
        return Err(invalid("min-nodes", "must not exceed max-nodes"));
    }
    if args.width == 0 || args.height == 0 {
        return Err(invalid("width/height", "must be positive"));
    }
    let spec = CorpusSpec {
        count: args.count,
        seed: args.seed,
        width: args.width,
        height: args.height,
        min_nodes: args.min_nodes,
        max_nodes: args.max_nodes,
    };
    let corpus = generate_corpus(&spec);
    save_corpus(&args.out, &corpus)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    println!(
        "wrote {} snapshots ({}x{}, seed {}) to {}",
        corpus.len(),
        spec.width,
        spec.height,
        spec.seed,
        args.out.display()
    );
    Ok(0)
}

fn check(args: CheckArgs) -> Result<i32> {
    let profile = load_profile(&args.profile, Path::new("."))?;
    let config = AcceptanceConfig {
        profile,
        playout_trials: args.trials,
        seed: args.seed,
        ..AcceptanceConfig::default()
    };
    let report = run_acceptance(&config);
    print!("{}", report.render());
    Ok(if report.passed() { 0 } else { 1 })
}

fn frame(command: FrameCommand) -> Result<i32> {
    let registry = CodebookRegistry::simulation_defaults();
    match command {
        FrameCommand::Encode(args) => {
            let modality = parse_modality(&args.modality)?;
            let frame = if modality.carries_tokens() {
                let raw = args.tokens.as_deref().ok_or_else(|| {
                    anyhow::Error::new(ConfigError::Invalid {
                        field: "tokens".to_string(),
                        reason: format!("required for {} frames", args.modality),
                    })
                })?;
                let tokens = raw
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<u32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| {
                        anyhow::Error::new(ConfigError::Invalid {
                            field: "tokens".to_string(),
                            reason: e.to_string(),
                        })
                    })?;
                TokenFrame::tokens(
                    modality,
                    args.codebook_id,
                    args.sequence,
                    args.timestamp_us,
                    tokens,
                )?
            } else {
                let text = args.text.ok_or_else(|| {
                    anyhow::Error::new(ConfigError::Invalid {
                        field: "text".to_string(),
                        reason: format!("required for {} frames", args.modality),
                    })
                })?;
                TokenFrame::text(modality, args.sequence, args.timestamp_us, text)?
            };
            let wire = encode_frame(&frame, &registry)?;
            println!("{}", hex::encode(wire));
            Ok(0)
        }
        FrameCommand::Decode { hex: input } => {
            let bytes = hex::decode(input.trim()).map_err(|e| {
                anyhow::Error::new(ConfigError::Invalid {
                    field: "hex".to_string(),
                    reason: e.to_string(),
                })
            })?;
            let frame = decode_frame(&bytes, &registry)?;
            let payload = match &frame.payload {
                Payload::Tokens(tokens) => serde_json::json!({ "tokens": tokens }),
                Payload::Text(text) => serde_json::json!({ "text": text }),
            };
            let doc = serde_json::json!({
                "version": frame.header.version,
                "modality": frame.header.modality,
                "codebook_id": frame.header.codebook_id,
                "count": frame.header.count,
                "sequence": frame.header.sequence,
                "timestamp_us": frame.header.timestamp_us,
                "payload": payload,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(0)
        }
    }
}

fn parse_modality(name: &str) -> Result<Modality> {
    Modality::ALL
        .into_iter()
        .find(|m| modality_name(*m) == name)
        .ok_or_else(|| {
            anyhow!(ConfigError::Invalid {
                field: "modality".to_string(),
                reason: format!(
                    "unknown modality {name:?}; expected one of audio_tokens, visual_tokens, \
                     structured_text, action_command, tts_tokens"
                ),
            })
        })
}

fn modality_name(modality: Modality) -> &'static str {
    match modality {
        Modality::AudioTokens => "audio_tokens",
        Modality::VisualTokens => "visual_tokens",
        Modality::StructuredText => "structured_text",
        Modality::ActionCommand => "action_command",
        Modality::TtsTokens => "tts_tokens",
    }
}
