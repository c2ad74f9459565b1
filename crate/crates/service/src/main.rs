use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;
use ecomate_core::HomeTemplate;
use ecomate_gateway::{MockProvider, Secret};
use ecomate_service::config::{ProviderMode, ServiceConfig};
use ecomate_service::{default_starters, router, AppState, ProviderSource, Store};

async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    if config.api_token.trim().is_empty() {
        anyhow::bail!("ECOMATE_API_TOKEN must not be empty");
    }
    let seed_text = std::fs::read_to_string(&config.seed)
        .with_context(|| format!("reading seed home {}", config.seed.display()))?;
    let seed = HomeTemplate::from_json(&seed_text).context("seed home")?;
    let store = Store::open(&config.store, &seed)?;
    let starters = match &config.starters {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("{} must be a JSON array of strings", path.display()))?
        }
        None => default_starters(),
    };
    let provider = match config.provider {
        ProviderMode::Http => ProviderSource::Settings,
        ProviderMode::Mock => ProviderSource::Fixed(Arc::new(MockProvider::always_valid())),
    };
    let state = AppState::build(
        store,
        Secret::new(config.api_token),
        provider,
        Secret::new(config.provider_token),
        starters,
    );
    let app = router(state, config.static_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .with_context(|| format!("binding {}", config.listen))?;
    tracing::info!(addr = %config.listen, store = %config.store.display(), "listening");
    axum::serve(listener, app).await?;
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    match serve(ServiceConfig::parse()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
