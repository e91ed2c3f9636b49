use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mrr::assessment::{self, Assessment};
use mrr::patient::PatientModel;
use mrr::server::{Server, ServerConfig};
use mrr::session_store::{compute_metrics, load_session, metrics_csv, metrics_summary, StoreError};
use mrr::sim::{replay, simulate, SimOptions};
use mrr::GameConfig;

#[derive(Parser)]
#[command(name = "mrr", version, about = "Tabletop rehabilitation game server and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the WebSocket session service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long, env = "MRR_DATA_DIR", default_value = "sessions")]
        data_dir: PathBuf,
    },
    /// Run a headless session with a simulated patient.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in profile (stuck, mid, fast, tremor) or a profile JSON file.
        #[arg(long)]
        patient: String,
        #[arg(long, default_value_t = 120.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Re-execute a recorded session.
    Replay {
        #[arg(long)]
        session: PathBuf,
        /// Compare the regenerated log with the recorded one.
        #[arg(long)]
        verify: bool,
    },
    /// Session metrics or questionnaire reports.
    Report(ReportArgs),
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct ReportArgs {
    #[command(subcommand)]
    kind: Option<ReportKind>,
    #[arg(long)]
    session: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[arg(long, conflicts_with = "json")]
    csv: bool,
}

#[derive(Subcommand)]
enum ReportKind {
    /// GEQ report from response CSVs, ranking text files and assessment JSON.
    Geq {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

/// Exit status: 1 for domain errors, 2 for usage and input-shape errors.
enum Failure {
    Domain(String),
    Usage(String),
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        Failure::Domain(e.to_string())
    }
}

fn load_config(path: Option<&Path>) -> Result<GameConfig, Failure> {
    match path {
        Some(p) => GameConfig::load(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => Ok(GameConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve { config, bind, data_dir } => serve(config.as_deref(), &bind, data_dir),
        Command::Simulate {
            config,
            patient,
            duration,
            seed,
            out,
            json,
        } => run_simulate(config.as_deref(), &patient, duration, seed, out.as_deref(), json),
        Command::Replay { session, verify } => run_replay(&session, verify),
        Command::Report(args) => run_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn serve(config: Option<&Path>, bind: &str, data_dir: PathBuf) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Domain(e.to_string()))?;
    rt.block_on(async {
        let server = Server::bind(bind, ServerConfig::new(cfg, data_dir.clone()))
            .await
            .map_err(|e| Failure::Domain(e.to_string()))?;
        let addr = server.local_addr().map_err(|e| Failure::Domain(e.to_string()))?;
        println!("listening on ws://{addr}/session/{{id}} (data dir {})", data_dir.display());
        let records = server
            .run(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Failure::Domain(e.to_string()))?;
        println!("shut down; {} session(s) finalized", records.len());
        Ok(())
    })
}

fn run_simulate(
    config: Option<&Path>,
    patient: &str,
    duration: f64,
    seed: u64,
    out: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let cfg = load_config(config)?;
    let model = PatientModel::resolve(patient).map_err(|e| Failure::Usage(e.to_string()))?;
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Failure::Usage("--duration must be a non-negative number of seconds".into()));
    }
    let outcome = simulate(&cfg, &model, &SimOptions::new(duration, seed), out)
        .map_err(|e| Failure::Domain(e.to_string()))?;
    if let Some(p) = out {
        eprintln!("wrote {}", p.display());
    }
    print_metrics(&outcome.record, json, false)
}

fn print_metrics(record: &mrr::session_store::SessionRecord, json: bool, csv: bool) -> Result<(), Failure> {
    match compute_metrics(record) {
        Ok(m) if json => println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize")),
        Ok(m) if csv => print!("{}", metrics_csv(&m)),
        Ok(m) => print!("{}", metrics_summary(&m)),
        Err(StoreError::InsufficientData(n)) => {
            println!("session {}: insufficient data for metrics ({n} trace point(s))", record.header.session_id);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn load(path: &Path) -> Result<mrr::session_store::LoadedSession, Failure> {
    match load_session(path) {
        Ok(l) => {
            if l.truncated {
                eprintln!(
                    "warning: {} ends in a partial line; recovered {} complete line(s)",
                    path.display(),
                    l.complete_lines
                );
            }
            Ok(l)
        }
        Err(StoreError::Corrupt { line, message }) => Err(Failure::Domain(format!(
            "{} is corrupt at line {line}: {message}; lines 1..{} are readable",
            path.display(),
            line.saturating_sub(1)
        ))),
        Err(e) => Err(Failure::Domain(format!("{}: {e}", path.display()))),
    }
}

fn run_replay(path: &Path, verify: bool) -> Result<(), Failure> {
    let loaded = load(path)?;
    let report = replay(&loaded.record)?;
    let ticks = report.regenerated.tick_count();
    let events = report.regenerated.events.len();
    match (&report.divergence, verify) {
        (None, _) => {
            println!("replayed {ticks} tick(s), {events} event(s); matches the recording");
            Ok(())
        }
        (Some(d), true) => Err(Failure::Domain(format!(
            "replay diverges at tick {}: {}",
            d.tick, d.detail
        ))),
        (Some(d), false) => {
            println!("replayed {ticks} tick(s), {events} event(s); first divergence at tick {}: {}", d.tick, d.detail);
            Ok(())
        }
    }
}

fn run_report(args: ReportArgs) -> Result<(), Failure> {
    match (args.kind, args.session) {
        (Some(ReportKind::Geq { files, json }), _) => report_geq(&files, json || args.json),
        (None, Some(session)) => {
            let loaded = load(&session)?;
            print_metrics(&loaded.record, args.json, args.csv)
        }
        (None, None) => Err(Failure::Usage("report needs --session PATH or `geq <files...>`".into())),
    }
}

fn report_geq(files: &[PathBuf], json: bool) -> Result<(), Failure> {
    let mut doc = Assessment::default();
    let mut responses = Vec::new();
    for f in files {
        let ext = f.extension().and_then(|e| e.to_str()).unwrap_or("");
        let input = |e: assessment::AssessmentError| Failure::Usage(format!("{}: {e}", f.display()));
        match ext {
            "csv" => responses.extend(assessment::load_responses(f).map_err(input)?),
            "json" => {
                let text = std::fs::read_to_string(f).map_err(|e| input(e.into()))?;
                let part = Assessment::from_json(&text).map_err(input)?;
                doc.stats.extend(part.stats);
                doc.rankings.extend(part.rankings);
                doc.acceptance.extend(part.acceptance);
                if part.rubric.is_some() {
                    doc.rubric = part.rubric;
                }
            }
            _ => {
                let text = std::fs::read_to_string(f).map_err(|e| input(e.into()))?;
                doc.rankings.extend(assessment::parse_rankings(&text).map_err(input)?);
            }
        }
    }
    let computed = assessment::aggregate_all(&responses).map_err(|e| Failure::Domain(e.to_string()))?;
    doc.stats.extend(computed);
    if json {
        println!("{}", serde_json::to_string_pretty(&assessment::report_json(&doc)).expect("report serializes"));
    } else {
        print!("{}", assessment::render_report(&doc));
    }
    Ok(())
}
