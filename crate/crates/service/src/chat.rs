//! One chat turn: prompt, completion, extraction, offline validation and the
//! optional draft routine.

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use ecomate_core::energy::EnergyEntry;
use ecomate_core::{
    build_prompt, extract, validate_offline, ChatMessage, EnergyProfile, ExtractionMethod, HomeTemplate, PromptVariant,
    Role,
};
use ecomate_gateway::{HttpProvider, LlmRequest, Provider};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::routine::{RoutineRecord, RoutineStatus};
use crate::store::{ChatSession, SessionMessage};
use crate::{AppState, ProviderSource};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChatRequest {
    #[serde(default)]
    pub session_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatReply {
    pub session_id: String,
    pub reply_text: String,
    pub routine_id: Option<String>,
    /// Validator message when the reply held a routine that failed checks.
    pub validation_error: Option<String>,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or_default()
}

/// Consumption block for the prompt: one entry per appliance type, averaged
/// over the appliances of that type in the home.
pub fn energy_from_home(home: &HomeTemplate) -> EnergyProfile {
    let mut profile = EnergyProfile::default();
    for appliance in &home.appliances {
        let entry = profile
            .entries
            .entry(appliance.appliance_type.trim().to_lowercase())
            .or_insert(EnergyEntry {
                mean_power_watts: 0.0,
                sample_count: 0,
            });
        let n = entry.sample_count as f64;
        entry.mean_power_watts = (entry.mean_power_watts * n + appliance.avg_power_watts) / (n + 1.0);
        entry.sample_count += 1;
    }
    profile
}

/// Remove every JSON document the extractor can find, plus any fenced
/// block tagged as JSON that failed to parse, and tidy the blank lines left
/// behind.
pub fn strip_json(raw: &str) -> String {
    let mut text = raw.to_string();
    loop {
        let result = extract(&text);
        if result.method == ExtractionMethod::None {
            break;
        }
        text = result.remainder_text;
    }
    let json_blocks: Vec<_> = ecomate_core::extract::fenced_blocks(&text)
        .into_iter()
        .filter(|b| b.info.trim().eq_ignore_ascii_case("json"))
        .map(|b| b.span)
        .collect();
    for span in json_blocks.into_iter().rev() {
        text.replace_range(span, "");
    }

    let mut out = String::with_capacity(text.len());
    let mut blank_run = 0;
    for line in text.trim().lines() {
        if line.trim().is_empty() {
            blank_run += 1;
            if blank_run > 1 {
                continue;
            }
        } else {
            blank_run = 0;
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out.trim_end().to_string()
}

fn resolve_provider(state: &AppState, settings: &crate::settings::Settings) -> Result<Arc<dyn Provider>, ApiError> {
    match &state.inner.provider {
        ProviderSource::Fixed(p) => Ok(p.clone()),
        ProviderSource::Settings => {
            let config = settings.provider_config(&state.inner.provider_token)?;
            let provider = HttpProvider::new(config).map_err(|e| ApiError::SettingsMissing(e.to_string()))?;
            Ok(Arc::new(provider))
        }
    }
}

pub async fn turn(state: &AppState, request: ChatRequest) -> Result<ChatReply, ApiError> {
    let message = request.message.trim().to_string();
    if message.is_empty() {
        return Err(ApiError::Schema("message must not be empty".into()));
    }
    let session_id = match request.session_id.filter(|s| !s.trim().is_empty()) {
        Some(id) => id,
        None => format!("s-{}", state.inner.ids.next()),
    };

    let store = &state.inner.store;
    let (settings, home) = store.read(|d| (d.settings.clone(), d.home.clone())).await;
    let username = settings.chat_username()?.to_string();
    let provider = resolve_provider(state, &settings)?;

    // one completion in flight per session; later turns queue behind it
    let lock = state.inner.locks.get(&format!("session:{session_id}"));
    let _turn = lock.lock().await;

    let history: Vec<ChatMessage> = store
        .read(|d| {
            d.sessions
                .get(&session_id)
                .map(|s| {
                    s.messages
                        .iter()
                        .map(|m| ChatMessage {
                            role: m.role,
                            content: m.text.clone(),
                        })
                        .collect()
                })
                .unwrap_or_default()
        })
        .await;

    let energy = energy_from_home(&home);
    let bundle = build_prompt(PromptVariant::EcoMateChat, &home, &energy, &message, &history, Some(&username))
        .map_err(|e| ApiError::Schema(e.to_string()))?;
    let llm_request = LlmRequest::from_bundle(settings.provider.model_id.clone(), settings.provider.temperature, &bundle);
    let response = provider.complete(&llm_request).await.map_err(|e| {
        tracing::warn!(session = %session_id, kind = "ProviderError", "completion failed");
        ApiError::Provider(format!("The assistant is unavailable right now: {e}"))
    })?;

    let extraction = extract(&response.text);
    let mut reply_text = strip_json(&response.text);
    let mut validation_error = None;
    let draft = match extraction.submission() {
        Some(json) => {
            let outcome = validate_offline(json, &home, false);
            if outcome.is_valid() {
                Some(json.to_string())
            } else {
                if !reply_text.is_empty() {
                    reply_text.push_str("\n\n");
                }
                reply_text.push_str(&format!("The proposed routine could not be used: {}", outcome.message));
                validation_error = Some(outcome.message);
                None
            }
        }
        None => None,
    };

    let now = now_ms();
    let routine_id = store
        .write(|doc| {
            let routine_id = draft.map(|json| {
                let id = doc.allocate_routine_id();
                doc.routines.push(RoutineRecord {
                    id: id.clone(),
                    alias: RoutineRecord::alias_of(&json),
                    automation_json: json,
                    status: RoutineStatus::Draft,
                    created_at_ms: now,
                    source_session: session_id.clone(),
                });
                id
            });
            let session = doc.sessions.entry(session_id.clone()).or_insert_with(|| ChatSession {
                id: session_id.clone(),
                username: username.clone(),
                messages: Vec::new(),
            });
            session.messages.push(SessionMessage {
                role: Role::User,
                text: message.clone(),
                timestamp_ms: now,
                routine_id: None,
            });
            session.messages.push(SessionMessage {
                role: Role::Assistant,
                text: response.text.clone(),
                timestamp_ms: now,
                routine_id: routine_id.clone(),
            });
            Ok(routine_id)
        })
        .await?;
    tracing::info!(session = %session_id, routine = ?routine_id, latency_ms = response.latency_ms, "chat turn");

    Ok(ChatReply {
        session_id,
        reply_text,
        routine_id,
        validation_error,
    })
}

/// A stored session as the UI shows it: assistant turns without their JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptMessage {
    pub role: Role,
    pub text: String,
    pub timestamp_ms: u64,
    pub routine_id: Option<String>,
}

pub fn transcript(session: &ChatSession) -> Vec<TranscriptMessage> {
    session
        .messages
        .iter()
        .map(|m| TranscriptMessage {
            role: m.role,
            text: match m.role {
                Role::Assistant => strip_json(&m.text),
                _ => m.text.clone(),
            },
            timestamp_ms: m.timestamp_ms,
            routine_id: m.routine_id.clone(),
        })
        .collect()
}
