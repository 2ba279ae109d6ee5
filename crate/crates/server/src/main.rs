use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::http::HeaderValue;
use clap::Parser;
use datapal_server::{app_with_cors, AppState};
use tower_http::cors::{AllowOrigin, CorsLayer};

/// HTTP JSON API for data-aware palette optimization.
#[derive(Parser)]
#[command(name = "datapal-server", version)]
struct Args {
    #[arg(long, env = "DATAPAL_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "DATAPAL_HOST", default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Name-count matrix CSV (default: built-in basic-term matrix)
    #[arg(long, env = "DATAPAL_NAMES")]
    names: Option<PathBuf>,
    /// Seconds of annealing per request before the best palette so far is returned
    #[arg(long, env = "DATAPAL_TIME_BUDGET", default_value_t = 30.0)]
    time_budget: f64,
    /// Origin allowed by CORS; any origin when omitted
    #[arg(long, env = "DATAPAL_CORS_ORIGIN")]
    cors_origin: Option<String>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();
    let names = datapal::load_name_matrix(args.names.as_deref())?;
    let state = AppState {
        names,
        time_budget: Duration::try_from_secs_f64(args.time_budget)?,
    };
    let cors = match &args.cors_origin {
        Some(origin) => CorsLayer::permissive().allow_origin(AllowOrigin::exact(HeaderValue::from_str(origin)?)),
        None => CorsLayer::permissive(),
    };
    let app = app_with_cors(Arc::new(state), cors);
    let addr = SocketAddr::new(args.host, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
