//! End-to-end harness tests over the bundled worlds and toy embeddings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use affordance_core::action_space::StrategyKind;
use affordance_core::harness::{compare, replay_qtable, run_experiment, ExperimentConfig};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
}

fn toy_config(out: &Path) -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.world = data("worlds/cellar.json");
    config.embeddings = Some(data("embeddings/toy_vectors.txt"));
    config.verbs = data("lexicon/verbs.txt");
    config.nouns = data("lexicon/nouns.txt");
    config.adjectives = Some(data("lexicon/adjectives.txt"));
    config.out = out.to_path_buf();
    config
}

/// Every file under a directory, keyed by relative path.
fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in std::fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn single_run_produces_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = toy_config(dir.path());
    config.strategies = vec![StrategyKind::Affordance];
    config.epochs = 1;
    config.runs = 1;
    config.steps = 60;
    config.seed = 3;

    let output = run_experiment(&config).unwrap();
    assert_eq!(output.runs.len(), 1);
    assert_eq!(output.runs[0].epochs.len(), 1);
    assert_eq!(output.max_score, 8);
    let peak = output.runs[0].peak_performance(output.max_score);
    assert!((0.0..=1.0).contains(&peak));
    assert_eq!(
        peak,
        output.runs[0].best_score() as f64 / output.max_score as f64
    );

    let run_csv = dir.path().join("affordance_run0.csv");
    let text = std::fs::read_to_string(run_csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epoch,score,cum_reward,distinct_states");
    assert_eq!(lines.len(), 2);
    assert!(dir.path().join("summary.csv").exists());
    assert!(dir.path().join("affordance_run0_qtable.csv").exists());
}

#[test]
fn identical_configs_produce_byte_identical_trees() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let mut config = toy_config(dir.path());
        config.strategies = vec![StrategyKind::Baseline, StrategyKind::Affordance];
        config.epochs = 4;
        config.runs = 2;
        config.steps = 40;
        config.seed = 11;
        config.jobs = 2;
        compare(&config).unwrap();
    }
    let a = dir_contents(dir_a.path());
    let b = dir_contents(dir_b.path());
    assert_eq!(
        a.keys().collect::<Vec<_>>(),
        b.keys().collect::<Vec<_>>(),
        "file sets differ"
    );
    for (name, bytes) in &a {
        assert_eq!(bytes, &b[name], "{name} differs between runs");
    }
    assert!(a.contains_key("comparison.csv"));
    assert!(a.contains_key("summary.csv"));
}

#[test]
fn completed_runs_are_resumed_not_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = toy_config(dir.path());
    config.strategies = vec![StrategyKind::Baseline];
    config.epochs = 3;
    config.runs = 2;
    config.steps = 40;
    config.seed = 5;

    let first = run_experiment(&config).unwrap();
    assert!(first.runs.iter().all(|r| !r.resumed));
    let kept = std::fs::read(dir.path().join("baseline_run0.csv")).unwrap();
    std::fs::remove_file(dir.path().join("baseline_run1.csv")).unwrap();

    let second = run_experiment(&config).unwrap();
    let by_run: BTreeMap<u32, bool> =
        second.runs.iter().map(|r| (r.run, r.resumed)).collect();
    assert_eq!(by_run[&0], true);
    assert_eq!(by_run[&1], false);
    assert_eq!(
        std::fs::read(dir.path().join("baseline_run0.csv")).unwrap(),
        kept
    );
    // Aggregates are identical either way.
    assert_eq!(
        format!("{:?}", first.summaries),
        format!("{:?}", second.summaries)
    );
}

#[test]
fn partial_run_files_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = toy_config(dir.path());
    config.strategies = vec![StrategyKind::Baseline];
    config.epochs = 3;
    config.runs = 1;
    config.steps = 20;

    run_experiment(&config).unwrap();
    // Truncate to simulate an interrupted run.
    let path = dir.path().join("baseline_run0.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let truncated: Vec<&str> = text.lines().take(2).collect();
    std::fs::write(&path, truncated.join("\n")).unwrap();

    let output = run_experiment(&config).unwrap();
    assert!(!output.runs[0].resumed);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn trained_qtable_replays_to_a_reward() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = toy_config(dir.path());
    config.strategies = vec![StrategyKind::Affordance];
    config.epochs = 40;
    config.runs = 1;
    config.steps = 200;
    config.seed = 2;

    run_experiment(&config).unwrap();
    let transcript = replay_qtable(
        &dir.path().join("affordance_run0_qtable.csv"),
        &data("worlds/cellar.json"),
        50,
    )
    .unwrap();
    assert!(
        transcript.final_score >= 3,
        "greedy replay scored {}",
        transcript.final_score
    );
    assert!(!transcript.steps.is_empty());
}

#[test]
fn cooccurrence_and_conceptnet_strategies_run_offline() {
    // Build a co-occurrence table from the bundled corpus first.
    let dir = tempfile::tempdir().unwrap();
    let lexicon = affordance_core::embedding::Lexicon::load(
        &data("lexicon/verbs.txt"),
        &data("lexicon/nouns.txt"),
        None,
    )
    .unwrap();
    let table = affordance_core::cooccurrence::CooccurrenceTable::build(
        &data("corpus/tiny_wiki.txt"),
        &lexicon,
        1000,
        30000,
        9,
    )
    .unwrap();
    assert!(table.count("take", "coin") > 3);
    let table_path = dir.path().join("cooc.csv");
    table.save_csv(&table_path).unwrap();

    let out = dir.path().join("out");
    let mut config = toy_config(&out);
    config.strategies = vec![StrategyKind::Cooccurrence, StrategyKind::Conceptnet];
    config.epochs = 2;
    config.runs = 1;
    config.steps = 40;
    config.cooc_table = Some(table_path);
    config.conceptnet_cache = Some(data("conceptnet"));
    config.conceptnet_offline = true;

    let output = run_experiment(&config).unwrap();
    assert_eq!(output.runs.len(), 2);
    assert!(output.runs.iter().all(|r| r.failed.is_none()));
}
