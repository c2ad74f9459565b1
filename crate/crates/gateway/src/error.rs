use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("request timed out after {0} ms")]
    Timeout(u64),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    BadResponse(String),
    #[error("no replay fixture for {model}/{temperature}/{digest}")]
    MissingFixture {
        model: String,
        temperature: String,
        digest: String,
    },
    #[error("replay store: {0}")]
    Store(String),
    #[error("invalid provider config: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HaError {
    #[error("HomeAssistant unreachable: {0}")]
    Unreachable(String),
    #[error("HomeAssistant rejected the token (HTTP {0})")]
    Unauthorized(u16),
    #[error("unexpected HomeAssistant response (HTTP {status}): {body}")]
    Unexpected { status: u16, body: String },
    #[error("invalid HomeAssistant endpoint: {0}")]
    Config(String),
}
