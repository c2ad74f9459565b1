//! REST handlers for appliances, routines, settings, sessions and starters.

use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::StatusCode;
use axum::Json;
use ecomate_core::{Appliance, Room};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chat::{self, ChatReply, ChatRequest, TranscriptMessage};
use crate::error::ApiError;
use crate::routine::{transition, RoutineAction, RoutineRecord, RoutineStatus};
use crate::settings::{SettingsUpdate, SettingsView};
use crate::AppState;

/// JSON body whose rejections are reported as `SchemaError`.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(value)) => Ok(Body(value)),
            Err(rejection) => Err(ApiError::Schema(rejection.body_text())),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub async fn post_chat(State(state): State<AppState>, Body(request): Body<ChatRequest>) -> ApiResult<ChatReply> {
    chat::turn(&state, request).await.map(Json)
}

pub async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Vec<TranscriptMessage>> {
    state
        .inner
        .store
        .read(|d| d.sessions.get(&id).map(chat::transcript))
        .await
        .map(Json)
        .ok_or_else(|| ApiError::NotFound(format!("session '{id}'")))
}

#[derive(Debug, Deserialize)]
pub struct RoomFilter {
    pub room: Option<String>,
}

pub async fn list_appliances(State(state): State<AppState>, Query(filter): Query<RoomFilter>) -> ApiResult<Vec<Appliance>> {
    let list = state
        .inner
        .store
        .read(|d| {
            d.home
                .appliances
                .iter()
                .filter(|a| filter.room.as_deref().is_none_or(|room| a.room_id == room))
                .cloned()
                .collect()
        })
        .await;
    Ok(Json(list))
}

pub async fn get_appliance(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Appliance> {
    state
        .inner
        .store
        .read(|d| d.home.appliances.iter().find(|a| a.entity_id == id).cloned())
        .await
        .map(Json)
        .ok_or_else(|| ApiError::NotFound(format!("appliance '{id}'")))
}

pub async fn create_appliance(
    State(state): State<AppState>,
    Body(appliance): Body<Appliance>,
) -> Result<(StatusCode, Json<Appliance>), ApiError> {
    let created = appliance.clone();
    state
        .inner
        .store
        .write(|d| {
            let mut home = d.home.clone();
            home.appliances.push(appliance);
            home.validate().map_err(|e| ApiError::Schema(e.to_string()))?;
            d.home = home;
            Ok(())
        })
        .await?;
    Ok((StatusCode::CREATED, Json(created)))
}

pub async fn update_appliance(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(appliance): Body<Appliance>,
) -> ApiResult<Appliance> {
    if appliance.entity_id != id {
        return Err(ApiError::Schema(format!(
            "entity_id '{}' does not match the path '{id}'",
            appliance.entity_id
        )));
    }
    let updated = appliance.clone();
    state
        .inner
        .store
        .write(|d| {
            let mut home = d.home.clone();
            let slot = home
                .appliances
                .iter_mut()
                .find(|a| a.entity_id == id)
                .ok_or_else(|| ApiError::NotFound(format!("appliance '{id}'")))?;
            *slot = appliance;
            home.validate().map_err(|e| ApiError::Schema(e.to_string()))?;
            d.home = home;
            Ok(())
        })
        .await?;
    Ok(Json(updated))
}

pub async fn delete_appliance(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    state
        .inner
        .store
        .write(|d| {
            let before = d.home.appliances.len();
            d.home.appliances.retain(|a| a.entity_id != id);
            if d.home.appliances.len() == before {
                return Err(ApiError::NotFound(format!("appliance '{id}'")));
            }
            Ok(())
        })
        .await?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn list_rooms(State(state): State<AppState>) -> ApiResult<Vec<Room>> {
    Ok(Json(state.inner.store.read(|d| d.home.rooms.clone()).await))
}

pub async fn list_routines(State(state): State<AppState>) -> ApiResult<Vec<RoutineRecord>> {
    Ok(Json(state.inner.store.read(|d| d.routines.clone()).await))
}

pub async fn get_routine(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<RoutineRecord> {
    state.inner.store.read(|d| d.routine(&id).cloned()).await.map(Json)
}

pub async fn delete_routine(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let lock = state.inner.locks.get(&format!("routine:{id}"));
    let _guard = lock.lock().await;
    state
        .inner
        .store
        .write(|d| {
            transition(d.routine(&id)?.status, RoutineAction::Delete)?;
            d.routines.retain(|r| r.id != id);
            Ok(())
        })
        .await?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn save_routine(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<RoutineRecord> {
    let lock = state.inner.locks.get(&format!("routine:{id}"));
    let _guard = lock.lock().await;
    state
        .inner
        .store
        .write(|d| {
            let routine = d.routine_mut(&id)?;
            routine.status = transition(routine.status, RoutineAction::Save)?.expect("save keeps the routine");
            Ok(routine.clone())
        })
        .await
        .map(Json)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitReply {
    pub routine: RoutineRecord,
    pub message: String,
}

/// Send a saved routine to HomeAssistant. The routine becomes `submitted`
/// only when HomeAssistant accepts it.
pub async fn submit_routine(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<SubmitReply> {
    let lock = state.inner.locks.get(&format!("routine:{id}"));
    let _guard = lock.lock().await;
    let store = &state.inner.store;
    let (routine, settings) = store
        .read(|d| d.routine(&id).cloned().map(|r| (r, d.settings.clone())))
        .await?;
    transition(routine.status, RoutineAction::Submit)?;
    let endpoint = settings.ha_endpoint()?;

    let outcome = state
        .inner
        .ha
        .submit_live(&routine.automation_json, &endpoint)
        .await
        .map_err(|e| ApiError::Ha(e.to_string()))?;
    if !outcome.is_valid() {
        tracing::info!(routine = %id, status = %outcome.status, "HomeAssistant rejected routine");
        return Err(ApiError::HaRejected(outcome));
    }
    let routine = store
        .write(|d| {
            let r = d.routine_mut(&id)?;
            r.status = RoutineStatus::Submitted;
            Ok(r.clone())
        })
        .await?;
    tracing::info!(routine = %id, "routine submitted");
    Ok(Json(SubmitReply {
        routine,
        message: outcome.message,
    }))
}

pub async fn get_settings(State(state): State<AppState>) -> ApiResult<SettingsView> {
    let token = &state.inner.provider_token;
    Ok(Json(state.inner.store.read(|d| d.settings.view(token)).await))
}

pub async fn put_settings(State(state): State<AppState>, Body(update): Body<SettingsUpdate>) -> ApiResult<SettingsView> {
    let token = &state.inner.provider_token;
    state
        .inner
        .store
        .write(|d| {
            let mut settings = d.settings.clone();
            settings.apply(update)?;
            d.settings = settings;
            Ok(d.settings.view(token))
        })
        .await
        .map(Json)
}

pub async fn get_starters(State(state): State<AppState>) -> ApiResult<Vec<String>> {
    Ok(Json(state.inner.starters.clone()))
}

pub async fn api_not_found() -> ApiError {
    ApiError::NotFound("endpoint".into())
}
