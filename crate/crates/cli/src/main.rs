use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rimay_cli::commands::{self, Status};
use rimay_cli::config::{LogLevel, ServiceConfig, CONFIG_ENV};
use rimay_cli::service::{router, AppState};
use rimay_core::analytics::DEFAULT_ALPHA;

#[derive(Parser)]
#[command(name = "rimay", version, about = "Check, parse and analyse Rimay requirements")]
struct Cli {
    /// Config file (JSON); defaults to the file named by RIMAY_CONFIG.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Lexicon file replacing the built-in default lexicon.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Model file with actors, classes, instances and elements.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check requirement documents; exits 1 if any requirement is not representable.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Representability tables, saturation and z-tests, one file per SRS in order.
    Stats {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        json: bool,
    },
    /// Parse one requirement given as an argument or on stdin.
    Parse {
        text: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        cors_origin: Option<String>,
        #[arg(long, value_enum)]
        log_level: Option<LogLevel>,
    },
    /// List the lexicon or look up a verb.
    Lexicon {
        #[arg(long)]
        lookup: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(message) => {
            eprintln!("rimay: {message}");
            ExitCode::from(Status::Usage as u8)
        }
    }
}

fn run(cli: Cli) -> Result<Status, String> {
    let mut config = match &cli.config {
        Some(path) => ServiceConfig::from_file(path),
        None => Ok(ServiceConfig::default()),
    }
    .map_err(|e| e.to_string())?;
    if cli.lexicon.is_some() {
        config.lexicon_path = cli.lexicon;
    }
    if cli.model.is_some() {
        config.model_path = cli.model;
    }
    let ctx = config.context().map_err(|e| e.to_string())?;
    let mut out = std::io::stdout().lock();
    let result = match cli.command {
        Command::Check { paths, json } => commands::check(&paths, json, &ctx, &mut out),
        Command::Stats { paths, alpha, json } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(format!("--alpha must be in (0, 1), got {alpha}"));
            }
            commands::stats(&paths, alpha, json, &ctx, &mut out, &mut std::io::stderr())
        }
        Command::Parse { text, json } => {
            let text = match text.filter(|t| t != "-") {
                Some(t) => t,
                None => {
                    let mut buf = String::new();
                    std::io::stdin().read_to_string(&mut buf).map_err(|e| e.to_string())?;
                    buf
                }
            };
            commands::parse(&text, json, &ctx, &mut out)
        }
        Command::Lexicon { lookup, json } => commands::lexicon(&ctx.lexicon, lookup.as_deref(), json, &mut out),
        Command::Serve { bind, cors_origin, log_level } => {
            if bind.is_some() {
                config.bind_address = bind;
            }
            if cors_origin.is_some() {
                config.cors_allowed_origin = cors_origin;
            }
            if let Some(level) = log_level {
                config.log_level = level;
            }
            drop(out);
            return serve(config, ctx);
        }
    };
    result.map_err(|e| e.to_string())
}

fn serve(config: ServiceConfig, ctx: rimay_core::parser::ParserContext) -> Result<Status, String> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::new(config.log_level.as_str()))
        .with_writer(std::io::stderr)
        .init();
    let addr = config.bind().map_err(|e| e.to_string())?;
    let state = Arc::new(AppState::new(ctx, config.model_path.clone(), config.lexicon_path.clone()));
    let app = router(state, config.cors_allowed_origin.as_deref());
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| format!("cannot bind {addr}: {e}"))?;
        tracing::info!("listening on {}", listener.local_addr().map_err(|e| e.to_string())?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| e.to_string())
    })?;
    Ok(Status::Ok)
}
