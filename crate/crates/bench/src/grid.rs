//! Running the model × prompt × temperature × command grid.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use ecomate_core::analysis::{classify_failure, RunRecord};
use ecomate_core::energy::{ingest_energy_annotations, AnnotationTable, EnergyProfile};
use ecomate_core::prompt::explanation_over_budget;
use ecomate_core::validate::validate_offline;
use ecomate_core::{build_prompt, extract, CommandDataset, HomeTemplate, PromptBundle, PromptVariant, UserCommand};
use ecomate_gateway::{
    load_replay_store, GatewayError, HttpProvider, LlmRequest, LlmResponse, MockProvider, Provider,
};
use tokio::sync::Semaphore;
use tokio::task::JoinSet;

use crate::config::{GridConfig, ProviderKind};
use crate::BenchError;

/// Everything a run reads besides the model replies.
#[derive(Debug, Clone)]
pub struct GridInputs {
    pub home: HomeTemplate,
    pub dataset: CommandDataset,
    pub profile: EnergyProfile,
}

fn read(path: &Path) -> Result<String, BenchError> {
    std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))
}

/// Annotation CSVs at `path`: the file itself, or every `*.csv` in the
/// directory in name order.
pub fn load_energy_tables(path: &Path) -> Result<Vec<AnnotationTable>, BenchError> {
    let files = if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| BenchError::io(path, e))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    files
        .iter()
        .map(|f| {
            let file = std::fs::File::open(f).map_err(|e| BenchError::io(f, e))?;
            AnnotationTable::from_csv(file).map_err(|e| BenchError::Input(format!("{}: {e}", f.display())))
        })
        .collect()
}

impl GridInputs {
    pub fn load(config: &GridConfig) -> Result<Self, BenchError> {
        let input = |e: &dyn std::fmt::Display| BenchError::Input(e.to_string());
        let home = HomeTemplate::from_json(&read(&config.template_path)?).map_err(|e| input(&e))?;
        let dataset = CommandDataset::from_json(&read(&config.command_dataset_path)?).map_err(|e| input(&e))?;
        let profile = ingest_energy_annotations(&load_energy_tables(&config.energy_path)?).map_err(|e| input(&e))?;
        Ok(Self { home, dataset, profile })
    }

    pub fn bundle(&self, variant: PromptVariant, command: &UserCommand) -> Result<PromptBundle, BenchError> {
        build_prompt(variant, &self.home, &self.profile, &command.text, &[], None)
            .map_err(|e| BenchError::Input(e.to_string()))
    }

    /// The exact request a grid cell sends.
    pub fn request(
        &self,
        model_id: &str,
        variant: PromptVariant,
        temperature: f64,
        command: &UserCommand,
    ) -> Result<LlmRequest, BenchError> {
        Ok(LlmRequest::from_bundle(model_id, temperature, &self.bundle(variant, command)?))
    }
}

/// One provider per configured model, in config order. Replay models share
/// one loaded store.
pub fn build_providers(config: &GridConfig) -> Result<Vec<Arc<dyn Provider>>, BenchError> {
    let mut replay: Option<Arc<dyn Provider>> = None;
    config
        .llms
        .iter()
        .map(|spec| -> Result<Arc<dyn Provider>, BenchError> {
            match &spec.provider {
                ProviderKind::Replay => {
                    if replay.is_none() {
                        let dir = config
                            .replay_dir
                            .as_deref()
                            .ok_or_else(|| BenchError::Config("replay_dir is not set".into()))?;
                        let store = load_replay_store(dir).map_err(|e| BenchError::io(dir, e))?;
                        replay = Some(Arc::new(store));
                    }
                    Ok(replay.clone().expect("initialized above"))
                }
                ProviderKind::Mock => Ok(Arc::new(MockProvider::always_valid())),
                http @ ProviderKind::Http { .. } => {
                    let cfg = http.http_config(&spec.model_id).expect("http variant")?;
                    let provider = HttpProvider::new(cfg).map_err(|e| BenchError::Config(e.to_string()))?;
                    Ok(Arc::new(provider))
                }
            }
        })
        .collect()
}

/// Turn a model reply (or the error in its place) into a record: extract,
/// validate against the home, classify failures.
pub fn evaluate_cell(
    inputs: &GridInputs,
    command: &UserCommand,
    llm: &str,
    prompt: PromptVariant,
    temperature: f64,
    reply: Result<LlmResponse, GatewayError>,
) -> RunRecord {
    let mut record = RunRecord {
        user_command: command.text.clone(),
        goal_type: command.goal_type,
        category: command.category.clone(),
        llm: llm.to_string(),
        prompt,
        temperature,
        output: String::new(),
        json: None,
        latency_ms: 0,
        json_validity: false,
        ha_response: String::new(),
        failure_class: None,
        explanation_over_budget: false,
    };
    match reply {
        Err(err) => {
            record.ha_response = format!("ProviderError: {err}");
        }
        Ok(response) => {
            let extracted = extract(&response.text);
            let submission = extracted.submission().map(str::to_string);
            // With nothing to submit, the upload is an empty body.
            let outcome = validate_offline(submission.as_deref().unwrap_or(""), &inputs.home, true);
            record.explanation_over_budget = explanation_over_budget(&extracted.remainder_text);
            record.output = response.text;
            record.json = submission;
            record.latency_ms = response.latency_ms;
            record.json_validity = outcome.is_valid();
            record.ha_response = outcome.message;
        }
    }
    if !record.json_validity {
        record.failure_class = classify_failure(&record, &inputs.home, &inputs.dataset.categories).ok();
    }
    record
}

/// Position of a cell in the grid, used to order records.
type CellKey = (usize, usize, usize, usize);

/// Run every cell on a bounded pool of `parallelism` workers. Records come
/// back ordered by (command, llm, prompt, temperature), each in config
/// order, whatever the completion order was.
pub async fn run_grid(
    config: &GridConfig,
    inputs: Arc<GridInputs>,
    providers: &[Arc<dyn Provider>],
) -> Result<Vec<RunRecord>, BenchError> {
    if providers.len() != config.llms.len() {
        return Err(BenchError::Config("one provider per llm is required".into()));
    }
    // Prompts depend only on (variant, command); build each once.
    let mut bundles: HashMap<(usize, usize), Arc<PromptBundle>> = HashMap::new();
    for (ci, command) in inputs.dataset.commands.iter().enumerate() {
        for (pi, variant) in config.prompts.iter().enumerate() {
            bundles.insert((ci, pi), Arc::new(inputs.bundle(*variant, command)?));
        }
    }

    let permits = Arc::new(Semaphore::new(config.parallelism));
    let mut tasks: JoinSet<(CellKey, RunRecord)> = JoinSet::new();
    for ci in 0..inputs.dataset.commands.len() {
        for (li, spec) in config.llms.iter().enumerate() {
            for (pi, variant) in config.prompts.iter().copied().enumerate() {
                for (ti, temperature) in config.temperatures.iter().copied().enumerate() {
                    let permits = permits.clone();
                    let inputs = inputs.clone();
                    let provider = providers[li].clone();
                    let bundle = bundles[&(ci, pi)].clone();
                    let model = spec.model_id.clone();
                    tasks.spawn(async move {
                        let _permit = permits.acquire_owned().await.expect("semaphore is never closed");
                        let request = LlmRequest::from_bundle(&model, temperature, &bundle);
                        let reply = provider.complete(&request).await;
                        if let Err(err) = &reply {
                            tracing::warn!(model = %model, command = ci, "cell failed: {err}");
                        }
                        let command = &inputs.dataset.commands[ci];
                        let record = evaluate_cell(&inputs, command, &model, variant, temperature, reply);
                        ((ci, li, pi, ti), record)
                    });
                }
            }
        }
    }

    let mut cells = Vec::with_capacity(config.cardinality(inputs.dataset.commands.len()));
    while let Some(joined) = tasks.join_next().await {
        cells.push(joined.map_err(|e| BenchError::Input(format!("worker panicked: {e}")))?);
    }
    cells.sort_by_key(|(key, _)| *key);
    Ok(cells.into_iter().map(|(_, r)| r).collect())
}

/// Records whose cell failed at the provider.
pub fn errored_cells(records: &[RunRecord]) -> usize {
    records
        .iter()
        .filter(|r| r.ha_response.starts_with("ProviderError: "))
        .count()
}
