//! Process configuration from flags and environment variables.

use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderMode {
    /// Call the model endpoint configured on the settings page.
    Http,
    /// Answer every message with a canned routine; no network needed.
    Mock,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "ecomate-service", about = "Serve the EcoMate API and UI")]
pub struct ServiceConfig {
    #[arg(long, env = "ECOMATE_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// JSON store file; created from the seed home when missing.
    #[arg(long, env = "ECOMATE_STORE", default_value = "ecomate_store.json")]
    pub store: PathBuf,
    #[arg(long, env = "ECOMATE_SEED", default_value = "fixtures/ecomate_seed.json")]
    pub seed: PathBuf,
    /// Built UI bundle to serve at `/`.
    #[arg(long, env = "ECOMATE_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
    /// JSON array of conversation starters replacing the built-in list.
    #[arg(long, env = "ECOMATE_STARTERS")]
    pub starters: Option<PathBuf>,
    #[arg(long, env = "ECOMATE_PROVIDER", value_enum, default_value = "http")]
    pub provider: ProviderMode,
    /// Bearer token clients must present on every API call.
    #[arg(long, env = "ECOMATE_API_TOKEN", hide_env_values = true)]
    pub api_token: String,
    /// Model API token used when the settings page holds none.
    #[arg(long, env = "ECOMATE_PROVIDER_TOKEN", hide_env_values = true, default_value = "")]
    pub provider_token: String,
}
