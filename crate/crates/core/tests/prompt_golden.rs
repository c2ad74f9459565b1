//! The green and no-green instruction texts differ only in a fixed set of
//! word runs, pinned in `prompts/green_vs_no_green.diff`.

use ecomate_core::energy::EnergyProfile;
use ecomate_core::{build_prompt, HomeTemplate, PromptVariant};

fn empty_home() -> HomeTemplate {
    HomeTemplate::from_json(r#"{"id":"h","rooms":[],"appliances":[],"sensors":[]}"#).unwrap()
}

/// Word-level diff from `old` to `new` via longest common subsequence.
/// Each contiguous change run becomes `- <old words>` then `+ <new words>`.
fn word_diff(old: &str, new: &str) -> Vec<String> {
    let a: Vec<&str> = old.split_whitespace().collect();
    let b: Vec<&str> = new.split_whitespace().collect();
    let (n, m) = (a.len(), b.len());
    let mut lcs = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }

    let mut out = Vec::new();
    let (mut del, mut ins): (Vec<&str>, Vec<&str>) = (Vec::new(), Vec::new());
    let flush = |del: &mut Vec<&str>, ins: &mut Vec<&str>, out: &mut Vec<String>| {
        if !del.is_empty() {
            out.push(format!("- {}", del.join(" ")));
        }
        if !ins.is_empty() {
            out.push(format!("+ {}", ins.join(" ")));
        }
        del.clear();
        ins.clear();
    };
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            flush(&mut del, &mut ins, &mut out);
            i += 1;
            j += 1;
        } else if j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j]) {
            ins.push(b[j]);
            j += 1;
        } else {
            del.push(a[i]);
            i += 1;
        }
    }
    flush(&mut del, &mut ins, &mut out);
    out
}

fn system_text(variant: PromptVariant) -> String {
    build_prompt(variant, &empty_home(), &EnergyProfile::default(), "clean the house", &[], None)
        .unwrap()
        .system_text
}

#[test]
fn green_and_no_green_differ_only_in_pinned_segments() {
    let diff = word_diff(&system_text(PromptVariant::NoGreen), &system_text(PromptVariant::Green));
    let golden: Vec<String> = include_str!("../prompts/green_vs_no_green.diff")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(str::to_string)
        .collect();
    assert_eq!(diff, golden, "actual diff:\n{}", diff.join("\n"));
}

#[test]
fn word_diff_basics() {
    assert!(word_diff("a b c", "a b c").is_empty());
    assert_eq!(word_diff("a b c", "a x c"), vec!["- b", "+ x"]);
    assert_eq!(word_diff("a c", "a b c"), vec!["+ b"]);
}

#[test]
fn batch_prompts_share_routine_and_explanation_structure() {
    let green = system_text(PromptVariant::Green);
    let plain = system_text(PromptVariant::NoGreen);
    for text in [&green, &plain] {
        assert_eq!(text.split("\n\n").count(), 3);
        assert!(text.ends_with("Generate only one routine that \"clean the house\""));
        assert!(text.starts_with("You are EcoMate."));
    }
}

#[test]
fn chat_prompt_addresses_the_user() {
    let bundle = build_prompt(
        PromptVariant::EcoMateChat,
        &empty_home(),
        &EnergyProfile::default(),
        "hi",
        &[],
        Some("Ada"),
    )
    .unwrap();
    assert!(bundle.system_text.starts_with("You are EcoMate. Address me as Ada."));
    assert!(!bundle.system_text.contains("{{"));
}
