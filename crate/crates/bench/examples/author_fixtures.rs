//! Regenerates the replay store under `fixtures/replay`.
//!
//! Every cell of the grid gets a synthetic reply. Replies are chosen per
//! configuration so the aggregates land on the published study numbers:
//! validity counts, false positives and negatives, relevance, and latency
//! minimum, maximum and mean. Green/no-green validity is split per pair so
//! the paired boolean difference matches as well.
//!
//! Run with `cargo run -p ecomate-bench --example author_fixtures`, then
//! check the printed tables.

use std::path::{Path, PathBuf};

use ecomate_bench::{report, GridConfig, GridInputs};
use ecomate_core::analysis::round_half_up;
use ecomate_core::{CommandCategory, GoalType, HomeTemplate, PromptVariant, UserCommand};
use ecomate_gateway::{write_fixture, ReplayEntry};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const N: usize = 40;
/// Commands reserved for missing routines, always Other Appliances.
const NO_ROUTINE_SLOTS: [usize; 2] = [39, 38];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Gpt,
    Llama,
    Mistral,
    CodeLlama,
}

fn family(llm: &str) -> Family {
    match llm {
        "GPT3.5" | "GPT4" => Family::Gpt,
        "MISTRAL" => Family::Mistral,
        "codeLLAMA" => Family::CodeLlama,
        _ => Family::Llama,
    }
}

/// Per-configuration targets.
struct Cell {
    llm: &'static str,
    prompt: PromptVariant,
    t: f64,
    fp: usize,
    fn_: usize,
    rel: f64,
    min: u64,
    max: u64,
    mean: f64,
}

/// Validity split of the 40 green/no-green pairs at one temperature.
struct Split {
    llm: &'static str,
    t: f64,
    green_only: usize,
    nogreen_only: usize,
    both: usize,
}

const G: PromptVariant = PromptVariant::Green;
const NG: PromptVariant = PromptVariant::NoGreen;

#[rustfmt::skip]
const CELLS: [Cell; 24] = [
    Cell { llm: "GPT3.5", prompt: G, t: 0.0, fp: 7, fn_: 0, rel: 0.32, min: 2472, max: 8955, mean: 5305.43 },
    Cell { llm: "GPT3.5", prompt: G, t: 0.7, fp: 9, fn_: 0, rel: 0.37, min: 1704, max: 11351, mean: 4809.83 },
    Cell { llm: "GPT3.5", prompt: NG, t: 0.0, fp: 7, fn_: 0, rel: 0.47, min: 2462, max: 8907, mean: 5092.35 },
    Cell { llm: "GPT3.5", prompt: NG, t: 0.7, fp: 6, fn_: 0, rel: 0.33, min: 1990, max: 9559, mean: 5059.35 },
    Cell { llm: "GPT4", prompt: G, t: 0.0, fp: 8, fn_: 0, rel: 0.51, min: 6926, max: 27204, mean: 15346.60 },
    Cell { llm: "GPT4", prompt: G, t: 0.7, fp: 7, fn_: 1, rel: 0.52, min: 7508, max: 30496, mean: 16481.50 },
    Cell { llm: "GPT4", prompt: NG, t: 0.0, fp: 6, fn_: 0, rel: 0.53, min: 5996, max: 38401, mean: 16357.30 },
    Cell { llm: "GPT4", prompt: NG, t: 0.7, fp: 7, fn_: 0, rel: 0.54, min: 6036, max: 22995, mean: 15458.00 },
    Cell { llm: "LLAMA2-70b", prompt: G, t: 0.0, fp: 0, fn_: 0, rel: 0.0, min: 10738, max: 89666, mean: 24322.66 },
    Cell { llm: "LLAMA2-70b", prompt: G, t: 0.7, fp: 0, fn_: 0, rel: 0.0, min: 11259, max: 89994, mean: 24783.03 },
    Cell { llm: "LLAMA2-70b", prompt: NG, t: 0.0, fp: 0, fn_: 0, rel: 0.0, min: 9756, max: 75800, mean: 24023.97 },
    Cell { llm: "LLAMA2-70b", prompt: NG, t: 0.7, fp: 0, fn_: 0, rel: 0.0, min: 7196, max: 64823, mean: 20742.31 },
    Cell { llm: "LLAMA2-7b", prompt: G, t: 0.0, fp: 0, fn_: 0, rel: 0.0, min: 5392, max: 41343, mean: 12942.93 },
    Cell { llm: "LLAMA2-7b", prompt: G, t: 0.7, fp: 0, fn_: 0, rel: 0.0, min: 5190, max: 34398, mean: 13133.83 },
    Cell { llm: "LLAMA2-7b", prompt: NG, t: 0.0, fp: 0, fn_: 0, rel: 0.0, min: 6000, max: 41947, mean: 12981.10 },
    Cell { llm: "LLAMA2-7b", prompt: NG, t: 0.7, fp: 0, fn_: 0, rel: 0.0, min: 3332, max: 42804, mean: 14032.03 },
    Cell { llm: "MISTRAL", prompt: G, t: 0.0, fp: 0, fn_: 2, rel: 0.58, min: 963, max: 18851, mean: 9915.65 },
    Cell { llm: "MISTRAL", prompt: G, t: 0.7, fp: 0, fn_: 1, rel: 0.41, min: 1065, max: 29623, mean: 10636.85 },
    Cell { llm: "MISTRAL", prompt: NG, t: 0.0, fp: 0, fn_: 1, rel: 0.54, min: 1110, max: 28178, mean: 10605.33 },
    Cell { llm: "MISTRAL", prompt: NG, t: 0.7, fp: 1, fn_: 1, rel: 0.58, min: 912, max: 33440, mean: 9930.43 },
    Cell { llm: "codeLLAMA", prompt: G, t: 0.0, fp: 2, fn_: 0, rel: 0.24, min: 9383, max: 34592, mean: 16133.15 },
    Cell { llm: "codeLLAMA", prompt: G, t: 0.7, fp: 4, fn_: 1, rel: 0.40, min: 5262, max: 35300, mean: 13351.74 },
    Cell { llm: "codeLLAMA", prompt: NG, t: 0.0, fp: 2, fn_: 0, rel: 0.38, min: 9193, max: 46016, mean: 17245.23 },
    Cell { llm: "codeLLAMA", prompt: NG, t: 0.7, fp: 1, fn_: 0, rel: 0.29, min: 8543, max: 46445, mean: 14230.82 },
];

#[rustfmt::skip]
const SPLITS: [Split; 12] = [
    Split { llm: "GPT3.5", t: 0.0, green_only: 12, nogreen_only: 8, both: 16 },
    Split { llm: "GPT3.5", t: 0.7, green_only: 12, nogreen_only: 10, both: 13 },
    Split { llm: "GPT4", t: 0.0, green_only: 7, nogreen_only: 2, both: 29 },
    Split { llm: "GPT4", t: 0.7, green_only: 4, nogreen_only: 4, both: 31 },
    Split { llm: "LLAMA2-70b", t: 0.0, green_only: 0, nogreen_only: 0, both: 0 },
    Split { llm: "LLAMA2-70b", t: 0.7, green_only: 0, nogreen_only: 0, both: 0 },
    Split { llm: "LLAMA2-7b", t: 0.0, green_only: 0, nogreen_only: 0, both: 0 },
    Split { llm: "LLAMA2-7b", t: 0.7, green_only: 0, nogreen_only: 0, both: 0 },
    Split { llm: "MISTRAL", t: 0.0, green_only: 1, nogreen_only: 4, both: 2 },
    Split { llm: "MISTRAL", t: 0.7, green_only: 3, nogreen_only: 10, both: 1 },
    Split { llm: "codeLLAMA", t: 0.0, green_only: 3, nogreen_only: 2, both: 2 },
    Split { llm: "codeLLAMA", t: 0.7, green_only: 4, nogreen_only: 1, both: 0 },
];

/// What one reply looks like.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// A routine acting on `relevant` + `irrelevant` appliances.
    Routine { relevant: usize, irrelevant: usize, valid: bool },
    /// A routine that only sends a notification.
    NotifyOnly { valid: bool },
    /// A fenced block that is not JSON.
    Unparseable,
    /// Prose only.
    NoRoutine,
}

/// Appliance counts giving relevance `v`.
fn composition(v: f64) -> (usize, usize) {
    const TABLE: [(f64, (usize, usize)); 7] = [
        (1.0, (1, 0)),
        (0.5, (3, 1)),
        (1.0 / 3.0, (2, 1)),
        (0.0, (1, 1)),
        (-1.0 / 3.0, (1, 2)),
        (-0.5, (1, 3)),
        (-1.0, (0, 1)),
    ];
    TABLE
        .iter()
        .find(|(x, _)| (x - v).abs() < 1e-9)
        .map(|(_, c)| *c)
        .expect("supported relevance value")
}

/// Relevance values for `k` routines so that, together with `fixed_sum`
/// from the other parseable replies, the mean over `p` rounds to `target`.
/// Fractional values come first and need a category with several
/// relevant appliances; at most `fine_slots` of them are used.
fn solve_relevance(target: f64, k: usize, fine_slots: usize, fixed_sum: f64, p: usize) -> Vec<f64> {
    if p == 0 {
        assert_eq!(target, 0.0, "no parseable replies but a non-zero target");
        return vec![];
    }
    let fines: [f64; 4] = [0.5, 1.0 / 3.0, -1.0 / 3.0, -0.5];
    let mut combos: Vec<Vec<f64>> = vec![vec![]];
    for a in 0..fines.len() {
        combos.push(vec![fines[a]]);
        for b in a..fines.len() {
            combos.push(vec![fines[a], fines[b]]);
        }
    }
    let mut best: Option<(usize, Vec<f64>)> = None;
    for fine in combos.iter().filter(|c| c.len() <= fine_slots && c.len() <= k) {
        let rest = k - fine.len();
        for minus in 0..=rest {
            for zero in 0..=rest - minus {
                let ones = rest - minus - zero;
                let sum = fixed_sum + ones as f64 - minus as f64 + fine.iter().sum::<f64>();
                if round_half_up(sum / p as f64, 2) != round_half_up(target, 2) {
                    continue;
                }
                let cost = 2 * minus + zero + 3 * fine.len();
                if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    let mut values = fine.clone();
                    values.extend(std::iter::repeat_n(1.0, ones));
                    values.extend(std::iter::repeat_n(0.0, zero));
                    values.extend(std::iter::repeat_n(-1.0, minus));
                    best = Some((cost, values));
                }
            }
        }
    }
    best.map(|(_, v)| v)
        .unwrap_or_else(|| panic!("no relevance assignment for target {target} (k={k}, p={p})"))
}

/// 40 latencies with the given extremes whose sum is `sum`.
fn latencies(rng: &mut ChaCha8Rng, min: u64, max: u64, sum: u64) -> Vec<u64> {
    let mut values = vec![min, max];
    let inner = N - 2;
    let inner_sum = sum - min - max;
    let center = inner_sum / inner as u64;
    // Skewed spread around the required mean, like real response times.
    for _ in 0..inner {
        let low = min + (center - min) / 3;
        let high = (center + (max - center) / 2).min(max);
        values.push(rng.random_range(low..=high));
    }
    let mut diff = inner_sum as i64 - values[2..].iter().sum::<u64>() as i64;
    while diff != 0 {
        let i = 2 + rng.random_range(0..inner);
        let v = values[i] as i64;
        let step = diff.signum() * diff.abs().min(97);
        let next = (v + step).clamp(min as i64, max as i64);
        diff -= next - v;
        values[i] = next as u64;
    }
    values.shuffle(rng);
    values
}

/// Integer latency sum whose mean rounds to `mean`, or the closest one.
fn latency_sum(mean: f64) -> (u64, bool) {
    let approx = (mean * N as f64).round() as i64;
    for delta in [0, -1, 1, -2, 2] {
        let s = (approx + delta) as u64;
        if round_half_up(s as f64 / N as f64, 2) == mean {
            return (s, true);
        }
    }
    (approx as u64, false)
}

struct Home<'a> {
    home: &'a HomeTemplate,
    categories: &'a [CommandCategory],
}

impl Home<'_> {
    fn category(&self, name: &str) -> &CommandCategory {
        self.categories.iter().find(|c| c.name == name).expect("known category")
    }

    fn split(&self, category: &str) -> (Vec<String>, Vec<String>) {
        let cat = self.category(category);
        let (rel, irr): (Vec<_>, Vec<_>) = self
            .home
            .appliances
            .iter()
            .partition(|a| cat.is_relevant(&a.appliance_type));
        let ids = |v: Vec<&ecomate_core::Appliance>| v.into_iter().map(|a| a.entity_id.clone()).collect();
        (ids(rel), ids(irr))
    }

    fn has_relevant(&self, category: &str) -> bool {
        self.category(category).has_relevant_appliance(self.home)
    }
}

fn action_for(entity: &str, green: bool) -> Value {
    let domain = entity.split('.').next().unwrap_or_default();
    match domain {
        "light" => json!({"service": "light.turn_on", "entity_id": entity,
                          "data": {"brightness_pct": if green { 40 } else { 80 }}}),
        "cover" => json!({"service": "cover.open_cover", "entity_id": entity}),
        "media_player" if green => json!({"service": "media_player.volume_set", "entity_id": entity,
                                          "data": {"volume_level": 0.3}}),
        "media_player" => json!({"service": "media_player.turn_on", "entity_id": entity}),
        "lock" => json!({"service": "lock.lock", "entity_id": entity}),
        "camera" => json!({"service": "camera.turn_on", "entity_id": entity}),
        "fan" if green => json!({"service": "fan.set_preset_mode", "entity_id": entity,
                                 "data": {"preset_mode": "auto"}}),
        "fan" => json!({"service": "fan.turn_on", "entity_id": entity}),
        "vacuum" => json!({"service": "vacuum.start", "entity_id": entity}),
        _ => json!({"service": "switch.turn_on", "entity_id": entity}),
    }
}

fn trigger_for(command: &UserCommand, idx: usize, t: f64) -> Value {
    let hour = 6 + (idx * 7 + (t * 10.0) as usize) % 16;
    match (command.goal_type, command.category.as_str()) {
        (GoalType::Persistent, "Ambient Luminance") => json!({"platform": "sun", "event": "sunset"}),
        (GoalType::Persistent, "Security") => {
            json!({"platform": "state", "entity_id": "binary_sensor.front_door", "to": "on"})
        }
        (GoalType::Persistent, "Ambient Temperature") => json!({"platform": "numeric_state",
            "entity_id": "sensor.temperature_living_room", "below": 18}),
        _ => json!({"platform": "time", "at": format!("{hour:02}:00:00")}),
    }
}

fn alias(command: &UserCommand, green: bool) -> String {
    let mut text = command.text.clone();
    if let Some(first) = text.get(0..1) {
        text.replace_range(0..1, &first.to_uppercase());
    }
    if green {
        format!("Eco: {text}")
    } else {
        text
    }
}

struct Reply<'a> {
    llm: &'a str,
    command: &'a UserCommand,
    idx: usize,
    green: bool,
    t: f64,
    /// Selects among equivalent wordings.
    variant: usize,
}

impl Reply<'_> {
    fn routine(&self, targets: &[String], valid: bool) -> Value {
        let actions: Vec<Value> = if targets.is_empty() {
            vec![json!({"service": "notify.notify",
                        "data": {"message": "Consider a sweater or opening a window before using energy."}})]
        } else {
            targets.iter().map(|e| action_for(e, self.green)).collect()
        };
        let trigger = trigger_for(self.command, self.idx, self.t);
        let mut doc = json!({
            "alias": alias(self.command, self.green),
            "trigger": [trigger],
            "action": actions,
        });
        if valid {
            return doc;
        }
        let obj = doc.as_object_mut().expect("object");
        let malformation = match family(self.llm) {
            Family::Gpt => self.variant % 2,
            Family::Mistral => 2 + self.variant % 2,
            _ => [0, 3][self.variant % 2],
        };
        match malformation {
            // "name" in place of "alias".
            0 => {
                let alias = obj.remove("alias").expect("alias");
                obj.insert("name".into(), alias);
            }
            // A numeric bound on a time trigger.
            1 => {
                obj.insert(
                    "trigger".into(),
                    json!([{"platform": "time", "at": "22:00:00", "below": 20}]),
                );
            }
            // "algorithm" in place of "alias".
            2 => {
                let alias = obj.remove("alias").expect("alias");
                obj.insert("algorithm".into(), alias);
            }
            // Plural trigger key.
            _ => {
                let trigger = obj.remove("trigger").expect("trigger");
                obj.insert("triggers".into(), trigger);
            }
        }
        doc
    }

    fn wrap(&self, doc: &Value) -> String {
        let pretty = serde_json::to_string_pretty(doc).expect("json");
        let compact = serde_json::to_string(doc).expect("json");
        let lead = if self.green {
            "Here is an energy-saving routine for your request."
        } else {
            "Here is a routine for your request."
        };
        match family(self.llm) {
            Family::Gpt => format!(
                "{lead}\n```json\n{pretty}\n```\nIt only uses the appliances available in your home."
            ),
            Family::CodeLlama => format!("```json\n{pretty}\n```\nThis automation handles: {}", self.command.text),
            Family::Mistral | Family::Llama => match self.variant % 3 {
                // Backticks around the code instead of a fence.
                0 => format!("{lead} Code: `{compact}` Let me know if you need changes."),
                // The word "code" inside the fence.
                1 => format!("{lead}\n```\ncode\n{pretty}\n```"),
                _ => format!("{lead}\n```json\n{pretty}\n```"),
            },
        }
    }

    fn unparseable(&self) -> String {
        let time = format!("{:02}:00:00", 6 + self.idx % 16);
        let alias = alias(self.command, self.green).replace('\'', "");
        match family(self.llm) {
            Family::Gpt => format!(
                "Sure.\n```json\n{{\"alias\": \"{alias}\", \"trigger\": [{{\"platform\": \"time\", \"at\"; \"{time}\"}}], \"action\": []}}\n```"
            ),
            Family::Llama => format!(
                "Sure! Here is the automation:\n```json\n{{'name': '{alias}', 'trigger': [{{'platform': 'time', 'at': '{time}'}}], 'action': [{{'service': 'turn_on', 'device': 'lights'}}]}}\n```\nThe routine will run every day."
            ),
            Family::Mistral | Family::CodeLlama => format!(
                "```\ncode: {{'alias': '{alias}', 'trigger': [{{'platform': 'time', 'at': '{time}'}}]}}\n```"
            ),
        }
    }

    fn no_routine(&self) -> String {
        match family(self.llm) {
            Family::Gpt => "I could not find a suitable appliance for this request, so no routine was created.".into(),
            _ => format!("To {} you can ask me again later.", self.command.text),
        }
    }
}

fn target_entities(rel_ids: &[String], irr_ids: &[String], relevant: usize, irrelevant: usize, seed: usize) -> Vec<String> {
    let pick = |pool: &[String], n: usize, offset: usize| -> Vec<String> {
        (0..n).map(|i| pool[(offset + i) % pool.len()].clone()).collect()
    };
    let mut out = pick(rel_ids, relevant, seed);
    out.extend(pick(irr_ids, irrelevant, seed * 3));
    out
}

fn main() -> anyhow::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let config = GridConfig::load(&root.join("grid.toml"))?;
    let inputs = GridInputs::load(&config)?;
    let home = Home {
        home: &inputs.home,
        categories: &inputs.dataset.categories,
    };
    let commands = &inputs.dataset.commands;
    assert_eq!(commands.len(), N);
    for slot in NO_ROUTINE_SLOTS {
        assert!(home.has_relevant(&commands[slot].category));
    }

    let replay_dir = config.replay_dir.clone().expect("replay_dir");
    if replay_dir.exists() {
        std::fs::remove_dir_all(&replay_dir)?;
    }

    let mut unreachable = Vec::new();
    for (cell_no, cell) in CELLS.iter().enumerate() {
        let fam = family(cell.llm);
        let split = SPLITS
            .iter()
            .find(|s| s.llm == cell.llm && s.t == cell.t)
            .expect("split for every cell");
        let green = cell.prompt == PromptVariant::Green;
        let llm_no = CELLS.iter().position(|c| c.llm == cell.llm).unwrap_or(0);

        // Validity order: a per-model shuffle, with the no-routine slots last.
        let mut order: Vec<usize> = (0..N).filter(|i| !NO_ROUTINE_SLOTS.contains(i)).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(1000 + llm_no as u64));
        order.extend(NO_ROUTINE_SLOTS.iter().rev());
        let own = if green { split.green_only } else { split.nogreen_only };
        let skip = if green { 0 } else { split.green_only };
        let valid: Vec<bool> = (0..N)
            .map(|cmd| {
                let pos = order.iter().position(|&o| o == cmd).expect("in order");
                pos < split.both || (pos >= split.both + skip && pos < split.both + skip + own)
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(cell_no as u64);
        let ambient: Vec<usize> = (0..N).filter(|&i| !home.has_relevant(&commands[i].category)).collect();
        let mut ambient_order = ambient.clone();
        ambient_order.shuffle(&mut rng);
        let fp_set: Vec<usize> = ambient_order[..cell.fp].to_vec();
        let fn_set: Vec<usize> = NO_ROUTINE_SLOTS[..cell.fn_].to_vec();
        for &i in &fn_set {
            assert!(!valid[i], "{} {:?} {}: no-routine slot {i} must be invalid", cell.llm, cell.prompt, cell.t);
        }

        // Decide which invalid replies carry no JSON at all.
        let max_unparseable = match fam {
            Family::Gpt => 2,
            Family::Mistral => 6,
            Family::CodeLlama => 8,
            Family::Llama => N,
        };
        let mut unparseable = vec![false; N];
        let mut budget = max_unparseable;
        for i in (0..N).rev() {
            let luminance = commands[i].category == "Ambient Luminance";
            if budget > 0 && !valid[i] && !fp_set.contains(&i) && !fn_set.contains(&i) && !luminance {
                unparseable[i] = true;
                budget -= 1;
            }
        }
        if fam == Family::Llama {
            unparseable = vec![true; N];
        }

        // Relevance values for the routines on relevant categories.
        let routine_slots: Vec<usize> = (0..N)
            .filter(|&i| home.has_relevant(&commands[i].category) && !unparseable[i] && !fn_set.contains(&i))
            .collect();
        let parseable = (0..N).filter(|&i| !unparseable[i] && !fn_set.contains(&i)).count();
        let fine_slots: Vec<usize> = routine_slots
            .iter()
            .copied()
            .filter(|&i| home.split(&commands[i].category).0.len() >= 3)
            .collect();
        let values = solve_relevance(
            cell.rel,
            routine_slots.len(),
            fine_slots.len(),
            -(cell.fp as f64),
            parseable,
        );
        let fines: Vec<f64> = values.iter().copied().filter(|v| v.fract() != 0.0).collect();
        let mut whole: Vec<f64> = values.iter().copied().filter(|v| v.fract() == 0.0).collect();
        whole.shuffle(&mut rng);
        let mut assigned = vec![None; N];
        for (slot, v) in fine_slots.iter().zip(&fines) {
            assigned[*slot] = Some(*v);
        }
        let mut whole_iter = whole.into_iter();
        for &slot in &routine_slots {
            if assigned[slot].is_none() {
                assigned[slot] = whole_iter.next();
            }
        }

        let (sum, exact) = latency_sum(cell.mean);
        if !exact {
            unreachable.push(format!(
                "{} {} t={}: mean {:.2} is not reachable with {N} integer latencies; using {:.3}",
                cell.llm,
                cell.prompt.label(),
                cell.t,
                cell.mean,
                sum as f64 / N as f64
            ));
        }
        let lat = latencies(&mut rng, cell.min, cell.max, sum);

        for (idx, command) in commands.iter().enumerate() {
            let (rel_ids, irr_ids) = home.split(&command.category);
            let shape = if fn_set.contains(&idx) {
                Shape::NoRoutine
            } else if unparseable[idx] {
                Shape::Unparseable
            } else if fp_set.contains(&idx) {
                Shape::Routine { relevant: 0, irrelevant: 1, valid: valid[idx] }
            } else if rel_ids.is_empty() {
                Shape::NotifyOnly { valid: valid[idx] }
            } else {
                let (relevant, irrelevant) = composition(assigned[idx].expect("relevance assigned"));
                Shape::Routine { relevant, irrelevant, valid: valid[idx] }
            };
            let reply = Reply {
                llm: cell.llm,
                command,
                idx,
                green,
                t: cell.t,
                variant: idx + cell_no,
            };
            let text = match shape {
                Shape::Routine { relevant, irrelevant, valid } => {
                    let targets = target_entities(&rel_ids, &irr_ids, relevant, irrelevant, idx);
                    reply.wrap(&reply.routine(&targets, valid))
                }
                Shape::NotifyOnly { valid } => reply.wrap(&reply.routine(&[], valid)),
                Shape::Unparseable => reply.unparseable(),
                Shape::NoRoutine => reply.no_routine(),
            };
            let request = inputs.request(cell.llm, cell.prompt, cell.t, command)?;
            write_fixture(&replay_dir, &request, &ReplayEntry { text, latency_ms: lat[idx] })?;
        }
    }

    verify(&config, &root)?;
    for line in &unreachable {
        println!("note: {line}");
    }
    Ok(())
}

/// Run the grid over the new store and print the tables.
fn verify(config: &GridConfig, root: &Path) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    let output = runtime.block_on(ecomate_bench::run(config))?;
    println!("{} records, {} errored ({})", output.records.len(), output.errored, root.display());
    print!("{}", report::summary_table(&output.analysis.summaries));
    println!();
    print!("{}", report::pair_table(&output.analysis.pair_summaries));
    let mut mismatches = 0;
    for (cell, s) in CELLS.iter().zip(&output.analysis.summaries) {
        let r2 = |v: f64| round_half_up(v, 2);
        let checks = [
            ("fp", r2(s.fp), r2(cell.fp as f64 / N as f64)),
            ("fn", r2(s.fn_), r2(cell.fn_ as f64 / N as f64)),
            ("rel", r2(s.rel), cell.rel),
            ("min", s.latency_min_ms as f64, cell.min as f64),
            ("max", s.latency_max_ms as f64, cell.max as f64),
            ("mean", r2(s.latency_mean_ms), cell.mean),
        ];
        for (name, got, want) in checks {
            if got != want {
                mismatches += 1;
                println!("mismatch {} {} t={} {name}: {got} != {want}", s.llm, s.prompt.label(), s.temperature);
            }
        }
    }
    println!("{mismatches} mismatches");
    Ok(())
}
