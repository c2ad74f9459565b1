mod support;

use std::path::PathBuf;

use ecomate_core::extract::fenced_blocks;
use ecomate_core::{extract, ExtractionMethod};
use ecomate_gateway::{ReplayEntry, Secret};
use ecomate_service::chat::strip_json;
use ecomate_service::routine::{transition, RoutineAction, RoutineStatus};
use ecomate_service::settings::{ProviderUpdate, Settings, SettingsUpdate};
use proptest::prelude::*;
use reqwest::StatusCode;
use serde_json::json;
use support::{spawn, Scripted, SUNSET_REPLY};

/// No fenced block in `text` parses as JSON and the extractor finds nothing.
fn holds_no_json(text: &str) -> bool {
    let parses = |body: &str| serde_json::from_str::<serde_json::Value>(body.trim()).is_ok();
    extract(text).method == ExtractionMethod::None && fenced_blocks(text).iter().all(|b| !parses(b.body))
}

fn replay_texts() -> Vec<String> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/replay");
    let mut stack = vec![root];
    let mut texts = Vec::new();
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "json") {
                let entry: ReplayEntry = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
                texts.push(entry.text);
            }
        }
    }
    texts
}

#[test]
fn stripping_holds_over_every_provider_fixture() {
    let texts = replay_texts();
    assert_eq!(texts.len(), 960);
    for text in &texts {
        let stripped = strip_json(text);
        assert!(holds_no_json(&stripped), "{text:?}\n=> {stripped:?}");
    }
}

fn prose() -> impl Strategy<Value = String> {
    "[A-Za-z ,.!'{}\\[\\]\n]{0,60}"
}

fn json_doc() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        any::<i32>().prop_map(|n| json!(n)),
        "[a-z_]{0,8}".prop_map(|s| json!(s)),
        any::<bool>().prop_map(|b| json!(b)),
    ];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(|v| json!(v)),
            prop::collection::btree_map("[a-z]{1,6}", inner, 0..4).prop_map(|m| json!(m)),
        ]
    })
    .prop_map(|v| v.to_string())
}

fn fence() -> impl Strategy<Value = String> {
    (prop_oneof![Just(""), Just("json"), Just("yaml")], json_doc(), any::<bool>())
        .prop_map(|(info, body, newline)| if newline { format!("```{info}\n{body}\n```") } else { format!("```{body}```") })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn stripped_replies_hold_no_json(parts in prop::collection::vec(prop_oneof![prose(), fence(), json_doc()], 0..6)) {
        let raw = parts.join("\n");
        let stripped = strip_json(&raw);
        prop_assert!(holds_no_json(&stripped), "{raw:?} => {stripped:?}");
    }

    #[test]
    fn state_machine_admits_only_forward_edges(actions in prop::collection::vec(0u8..3, 0..12)) {
        let mut status = Some(RoutineStatus::Draft);
        let mut history = vec![RoutineStatus::Draft];
        for a in actions {
            let action = [RoutineAction::Save, RoutineAction::Submit, RoutineAction::Delete][a as usize];
            let Some(current) = status else { break };
            match transition(current, action) {
                Ok(next) => {
                    let allowed = matches!(
                        (current, next),
                        (RoutineStatus::Draft, Some(RoutineStatus::Saved))
                            | (RoutineStatus::Saved, Some(RoutineStatus::Submitted))
                            | (RoutineStatus::Draft | RoutineStatus::Saved, None)
                    );
                    prop_assert!(allowed, "{current:?} --{action}--> {next:?}");
                    status = next;
                    history.extend(next);
                }
                Err(e) => prop_assert_eq!(e.from, current),
            }
        }
        if let Some(i) = history.iter().position(|s| *s == RoutineStatus::Submitted) {
            prop_assert_eq!(history[i - 1], RoutineStatus::Saved);
        }
    }

    #[test]
    fn settings_view_never_shows_a_token(ha in "[!-~]{5,40}", model in "[!-~]{5,40}") {
        let mut settings = Settings::default();
        settings.apply(SettingsUpdate {
            ha_base_url: "http://ha.local".into(),
            ha_token: Some(ha.clone()),
            username: "u".into(),
            provider: ProviderUpdate {
                endpoint_url: "http://model.local".into(),
                model_id: "m".into(),
                temperature: 0.0,
                timeout_ms: None,
                auth_token: Some(model.clone()),
            },
        }).unwrap();
        let view = serde_json::to_string(&settings.view(&Secret::default())).unwrap();
        let shown = format!("{:?} {:?}", settings, settings.view(&Secret::default()));
        for token in [&ha, &model] {
            // a token embedded in another field's text (for example the url) is not a leak
            if "http://ha.local http://model.local".contains(token.as_str()) {
                continue;
            }
            prop_assert!(!view.contains(token.as_str()), "{token} in {view}");
            prop_assert!(!shown.contains(token.as_str()));
        }
    }
}

/// Drive one routine through random action sequences over HTTP, against a
/// HomeAssistant that accepts everything, and check each reply against the
/// reference state machine.
#[test]
fn service_follows_the_state_machine() {
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let server = runtime.block_on(async {
        let app = axum::Router::new().fallback(axum::routing::post(|| async { "{}" }));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let ha = format!("http://{}", listener.local_addr().unwrap());
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        let s = spawn(&dir.path().join("store.json"), Some(Scripted::text(SUNSET_REPLY))).await;
        s.configure(&ha, "accepting-ha-token").await;
        s
    });
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(48));
    runner
        .run(&prop::collection::vec(0u8..3, 1..8), |actions| {
            runtime.block_on(async {
                let (_, reply) = server.chat(None, "sunset").await;
                let id = reply["routine_id"].as_str().unwrap().to_string();
                let mut model = Some(RoutineStatus::Draft);
                for a in actions {
                    let action = [RoutineAction::Save, RoutineAction::Submit, RoutineAction::Delete][a as usize];
                    let path = format!("/api/routines/{id}");
                    let (status, _) = match action {
                        RoutineAction::Save => server.post(&format!("{path}/save"), json!({})).await,
                        RoutineAction::Submit => server.post(&format!("{path}/submit"), json!({})).await,
                        RoutineAction::Delete => server.delete(&path).await,
                    };
                    let expected = match model.map(|m| (m, transition(m, action))) {
                        None => StatusCode::NOT_FOUND,
                        Some((_, Err(_))) => StatusCode::CONFLICT,
                        Some((_, Ok(next))) => {
                            model = next;
                            if next.is_some() { StatusCode::OK } else { StatusCode::NO_CONTENT }
                        }
                    };
                    prop_assert_eq!(status, expected, "{:?}", action);
                    let (_, stored) = server.get(&path).await;
                    let stored_status = stored["status"].as_str().map(str::to_string);
                    prop_assert_eq!(stored_status, model.map(|m| m.to_string()));
                }
                Ok(())
            })
        })
        .unwrap();
}
