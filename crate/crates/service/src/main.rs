use std::io::IsTerminal;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sessionlens_core::embed::EmbedParams;
use sessionlens_core::synthgen::{generate_degraded, SynthgenFile};
use sessionlens_service::{log_quality, router, AppState, ServiceConfig};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "sessionlens", version, about = "Explore AR task-guidance session recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset and serve the JSON API.
    Serve(ServeArgs),
    /// Write a synthetic dataset described by a JSON spec.
    Synthgen(SynthgenArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// Dataset root holding manifest.json.
    #[arg(long, env = "SESSIONLENS_DATA")]
    data: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Default shapelet count.
    #[arg(long, default_value_t = 64)]
    embed_k: usize,
    /// Default shapelet length.
    #[arg(long, default_value_t = 32)]
    embed_m: usize,
    /// Default resampled series length.
    #[arg(long, default_value_t = 256)]
    embed_len: usize,
    #[arg(long, default_value_t = 0)]
    embed_seed: u64,
}

#[derive(Args)]
struct SynthgenArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    match Cli::parse().command {
        Command::Serve(args) => serve(args),
        Command::Synthgen(args) => synthgen(args),
    }
}

fn synthgen(args: SynthgenArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let file: SynthgenFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.spec.display()))?;
    let truth = generate_degraded(&file.spec, &file.degradations, &args.out)?;
    println!(
        "wrote {} sessions to {} ({} dropped stream sets, {} injected gaps)",
        truth.sessions.len(),
        args.out.display(),
        truth.dropped_streams.len(),
        truth.gaps.len()
    );
    Ok(())
}

#[tokio::main]
async fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let config = ServiceConfig {
        data_root: args.data.clone(),
        embed: EmbedParams {
            k: args.embed_k,
            m: args.embed_m,
            len: args.embed_len,
            seed: args.embed_seed,
        },
    };
    let state = tokio::task::spawn_blocking(move || AppState::load(config))
        .await?
        .with_context(|| format!("loading dataset from {}", args.data.display()))?;
    let state = Arc::new(state);
    log_quality(&state.snapshot().dataset);

    #[cfg(unix)]
    tokio::spawn(reload_on_hangup(Arc::clone(&state)));

    let listener = tokio::net::TcpListener::bind(args.bind)
        .await
        .with_context(|| format!("binding {}", args.bind))?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[cfg(unix)]
async fn reload_on_hangup(state: Arc<AppState>) {
    use tokio::signal::unix::{signal, SignalKind};
    let Ok(mut hangups) = signal(SignalKind::hangup()) else {
        tracing::warn!("cannot listen for SIGHUP; live reload disabled");
        return;
    };
    while hangups.recv().await.is_some() {
        let target = Arc::clone(&state);
        match tokio::task::spawn_blocking(move || target.reload()).await {
            Ok(Ok(snapshot)) => log_quality(&snapshot.dataset),
            Ok(Err(e)) => tracing::error!(error = %e, "reload failed; keeping current dataset"),
            Err(e) => tracing::error!(error = %e, "reload task failed"),
        }
    }
}
