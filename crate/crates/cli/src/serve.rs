use std::io::Write;

use harmonia_service::{serve, ServiceConfig};

use crate::error::CliError;
use crate::ServeArgs;

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

pub fn run(args: &ServeArgs) -> Result<(), CliError> {
    let mut config = ServiceConfig {
        max_duration: args.max_duration,
        cors_origins: args.cors_origins.clone(),
        ..ServiceConfig::default()
    };
    if let Some(w) = args.workers {
        config.workers = w.max(1);
    }
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::env)?;
    runtime.block_on(async {
        let addr = format!("{}:{}", args.bind, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Env(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(CliError::env)?;
        println!("harmonia listening on http://{local}");
        let _ = std::io::stdout().flush();
        serve(listener, config, shutdown_signal()).await.map_err(CliError::env)?;
        println!("harmonia stopped");
        Ok(())
    })
}
