//! Experiment runner: strategy comparisons over scripted or external games,
//! multi-run averaging, CSV outputs, and greedy replay of persisted
//! Q-tables.
//!
//! All randomness flows from the config seed, so a full experiment replays
//! bit-for-bit. Per-run CSVs are the raw record; aggregation is re-derived
//! from them, and the normalized comparison report never touches the stored
//! raw data.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action_space::{ActionSpaceError, StrategyKind, StrategyParams, VerbInventory};
use crate::affordance::{
    AffordanceError, AffordanceModel, CanonicalPairSet, ProjectionAxis, DEFAULT_AXIS,
};
use crate::agent::{Agent, AgentConfig, AgentError, EpochRecord, EpsilonSchedule, QTable};
use crate::conceptnet::{ConceptNetClient, ConceptNetConfig};
use crate::cooccurrence::{CoocError, CooccurrenceTable};
use crate::embedding::{EmbeddingError, EmbeddingFormat, EmbeddingStore, Lexicon};
use crate::env::{
    EnvError, Environment, ExternalEnv, ExternalEnvConfig, ScriptedEnv, ScriptedWorld, WorldError,
};
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad experiment config: {0}")]
    Config(String),
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Affordance(#[from] AffordanceError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Cooccurrence(#[from] CoocError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    ActionSpace(#[from] ActionSpaceError),
    #[error("every run failed; see warnings above")]
    AllRunsFailed,
}

/// External interpreter settings for experiments on real games.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExternalSpec {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_prompt")]
    pub prompt: String,
    #[serde(default = "default_score_pattern")]
    pub score_pattern: String,
    #[serde(default = "default_read_timeout_ms")]
    pub read_timeout_ms: u64,
    /// Required so peak performance stays a fraction of the maximum.
    pub max_score: i64,
}

fn default_prompt() -> String {
    ">".to_string()
}

fn default_score_pattern() -> String {
    r"Score:\s*(-?\d+)".to_string()
}

fn default_read_timeout_ms() -> u64 {
    2000
}

/// Full experiment description. The JSON config file mirrors these field
/// names, and every key can be overridden by a CLI flag of the same name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Scripted world file; ignored when `external` is set.
    pub world: PathBuf,
    pub external: Option<ExternalSpec>,
    pub strategies: Vec<StrategyKind>,
    pub epochs: u32,
    pub steps: u32,
    pub runs: u32,
    pub seed: u64,
    pub jobs: usize,
    pub out: PathBuf,

    pub embeddings: Option<PathBuf>,
    /// "word2vec-text", "glove-text", or "auto".
    pub embeddings_format: String,
    pub verbs: PathBuf,
    pub nouns: PathBuf,
    pub adjectives: Option<PathBuf>,
    pub canonical_pairs: Option<PathBuf>,
    /// Manipulability axis as (positive, negative) tokens.
    pub axis: Option<[String; 2]>,
    pub manipulation_k: usize,

    pub verb_budget: usize,
    pub noun_budget: usize,
    pub freeform_budget: usize,
    pub cooc_threshold: u64,
    pub cooc_table: Option<PathBuf>,
    pub conceptnet_cache: Option<PathBuf>,
    pub conceptnet_offline: bool,

    pub gamma: f64,
    pub epsilon_initial: f64,
    pub epsilon_decay: f64,
    pub epsilon_floor: f64,
    pub intrinsic: bool,
    pub intrinsic_bonus: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let params = StrategyParams::default();
        let eps = EpsilonSchedule::default();
        ExperimentConfig {
            world: PathBuf::new(),
            external: None,
            strategies: vec![StrategyKind::Baseline],
            epochs: 100,
            steps: 200,
            runs: 10,
            seed: 0,
            jobs: 1,
            out: PathBuf::from("out"),
            embeddings: None,
            embeddings_format: "auto".to_string(),
            verbs: PathBuf::new(),
            nouns: PathBuf::new(),
            adjectives: None,
            canonical_pairs: None,
            axis: None,
            manipulation_k: 1000,
            verb_budget: params.verb_budget,
            noun_budget: params.noun_budget,
            freeform_budget: params.freeform_budget,
            cooc_threshold: params.cooc_threshold,
            cooc_table: None,
            conceptnet_cache: None,
            conceptnet_offline: true,
            gamma: 0.9,
            epsilon_initial: eps.initial,
            epsilon_decay: eps.decay,
            epsilon_floor: eps.floor,
            intrinsic: false,
            intrinsic_bonus: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.epochs < 1 || self.steps < 1 || self.runs < 1 {
            return fail("epochs, steps, and runs must all be >= 1".into());
        }
        if self.strategies.is_empty() {
            return fail("at least one strategy is required".into());
        }
        if self.out.as_os_str().is_empty() {
            return fail("an output directory is required".into());
        }
        let must_exist = |path: &Path, what: &str| -> Result<(), HarnessError> {
            if path.as_os_str().is_empty() {
                return Err(HarnessError::Config(format!("{what} path is required")));
            }
            if !path.exists() {
                return Err(HarnessError::Config(format!(
                    "{what} file {} does not exist",
                    path.display()
                )));
            }
            Ok(())
        };
        if self.external.is_none() {
            must_exist(&self.world, "world")?;
        }
        must_exist(&self.verbs, "verbs lexicon")?;
        must_exist(&self.nouns, "nouns lexicon")?;
        if let Some(adjectives) = &self.adjectives {
            must_exist(adjectives, "adjectives lexicon")?;
        }
        let needs_store = self.strategies.iter().any(StrategyKind::needs_embeddings);
        match &self.embeddings {
            Some(path) => must_exist(path, "embeddings")?,
            None if needs_store => {
                return fail("the affordance and freeform strategies need --embeddings".into())
            }
            None => {}
        }
        if self.strategies.contains(&StrategyKind::Cooccurrence) {
            match &self.cooc_table {
                Some(path) => must_exist(path, "co-occurrence table")?,
                None => return fail("the cooccurrence strategy needs --cooc-table".into()),
            }
        }
        if self.strategies.contains(&StrategyKind::Conceptnet) && self.conceptnet_cache.is_none() {
            return fail("the conceptnet strategy needs --conceptnet-cache".into());
        }
        Ok(())
    }

    fn epsilon(&self) -> EpsilonSchedule {
        EpsilonSchedule {
            initial: self.epsilon_initial,
            decay: self.epsilon_decay,
            floor: self.epsilon_floor,
        }
    }

    fn params(&self) -> StrategyParams {
        StrategyParams {
            verb_budget: self.verb_budget,
            noun_budget: self.noun_budget,
            cooc_threshold: self.cooc_threshold,
            freeform_budget: self.freeform_budget,
        }
    }
}

/// Load every resource an experiment's strategies need, once.
pub fn load_resources(config: &ExperimentConfig) -> Result<Arc<crate::agent::Resources>, HarnessError> {
    let lexicon = Arc::new(Lexicon::load(
        &config.verbs,
        &config.nouns,
        config.adjectives.as_deref(),
    )?);
    let inventory = Arc::new(VerbInventory::from_lexicon(&lexicon, config.manipulation_k));

    let store = match &config.embeddings {
        Some(path) => Some(Arc::new(match config.embeddings_format.as_str() {
            "auto" => EmbeddingStore::load_auto(path)?,
            other => EmbeddingStore::load(path, other.parse::<EmbeddingFormat>()?)?,
        })),
        None => None,
    };
    let (model, axis) = match &store {
        Some(store) => {
            let pairs = match &config.canonical_pairs {
                Some(path) => CanonicalPairSet::from_file(path)?,
                None => CanonicalPairSet::default(),
            };
            let model = Arc::new(AffordanceModel::build(store, pairs)?);
            let (positive, negative) = match &config.axis {
                Some([p, n]) => (p.as_str(), n.as_str()),
                None => DEFAULT_AXIS,
            };
            let axis = Arc::new(ProjectionAxis::new(store, positive, negative)?);
            (Some(model), Some(axis))
        }
        None => (None, None),
    };
    let cooccurrence = match &config.cooc_table {
        Some(path) => Some(Arc::new(CooccurrenceTable::load_csv(path)?)),
        None => None,
    };
    let conceptnet = config.conceptnet_cache.as_ref().map(|dir| {
        let mut cn = ConceptNetConfig::new(dir.clone());
        cn.offline = config.conceptnet_offline;
        Arc::new(ConceptNetClient::new(cn))
    });

    Ok(Arc::new(crate::agent::Resources {
        lexicon,
        inventory,
        params: config.params(),
        store,
        model,
        axis,
        cooccurrence,
        conceptnet,
    }))
}

fn build_env(config: &ExperimentConfig) -> Result<Box<dyn Environment>, HarnessError> {
    match &config.external {
        Some(spec) => {
            let mut env_config = ExternalEnvConfig::new(spec.command.clone(), spec.args.clone());
            env_config.prompt = spec.prompt.clone();
            env_config.score_pattern = spec.score_pattern.clone();
            env_config.read_timeout = Duration::from_millis(spec.read_timeout_ms);
            env_config.max_score = Some(spec.max_score);
            Ok(Box::new(ExternalEnv::new(env_config)?))
        }
        None => {
            let world = Arc::new(ScriptedWorld::load(&config.world)?);
            Ok(Box::new(ScriptedEnv::new(world)))
        }
    }
}

/// Outcome of one (strategy, run) training.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub strategy: StrategyKind,
    pub run: u32,
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    /// Loaded from an existing CSV instead of recomputed.
    pub resumed: bool,
    pub failed: Option<String>,
}

impl RunOutcome {
    pub fn final_score(&self) -> i64 {
        self.epochs.last().map(|e| e.score).unwrap_or(0)
    }

    pub fn best_score(&self) -> i64 {
        self.epochs.iter().map(|e| e.score).max().unwrap_or(0)
    }

    /// Max score over epochs as a fraction of the game maximum.
    pub fn peak_performance(&self, max_score: i64) -> f64 {
        if max_score <= 0 {
            return 0.0;
        }
        let peak = self.best_score() as f64 / max_score as f64;
        peak.clamp(0.0, 1.0)
    }

    /// 1-based epoch of the first nonzero score, if any.
    pub fn epochs_to_first_reward(&self) -> Option<u32> {
        self.epochs
            .iter()
            .position(|e| e.score > 0)
            .map(|i| i as u32 + 1)
    }
}

/// Per-strategy aggregates over completed runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: StrategyKind,
    pub runs_completed: u32,
    pub mean_final_score: f64,
    pub mean_peak_performance: f64,
    pub mean_cumulative_reward: f64,
    pub mean_distinct_states: f64,
    /// Median over runs, counting reward-free runs as infinite; absent when
    /// the median run never scored.
    pub median_epochs_to_first_reward: Option<f64>,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub runs: Vec<RunOutcome>,
    pub summaries: Vec<StrategySummary>,
    pub out_dir: PathBuf,
    pub max_score: i64,
}

fn run_csv_path(out: &Path, strategy: StrategyKind, run: u32) -> PathBuf {
    out.join(format!("{strategy}_run{run}.csv"))
}

const RUN_CSV_HEADER: &str = "epoch,score,cum_reward,distinct_states";

fn write_epoch_row(w: &mut impl Write, record: &EpochRecord) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{}",
        record.epoch, record.score, record.cumulative_reward, record.distinct_states
    )
}

/// Parse a completed per-run CSV; `None` when the file is absent or holds
/// fewer epochs than expected (the run is then recomputed from scratch).
fn load_completed_run(path: &Path, epochs: u32) -> Option<Vec<EpochRecord>> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut records = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return None;
        }
        records.push(EpochRecord {
            epoch: fields[0].parse().ok()?,
            score: fields[1].parse().ok()?,
            cumulative_reward: fields[2].parse().ok()?,
            distinct_states: fields[3].parse().ok()?,
            steps_completed: 0,
            truncated: false,
        });
    }
    (records.len() == epochs as usize).then_some(records)
}

fn execute_run(
    config: &ExperimentConfig,
    resources: &Arc<crate::agent::Resources>,
    strategy: StrategyKind,
    run: u32,
) -> RunOutcome {
    let seed = derive_seed(config.seed, strategy.as_str(), u64::from(run));
    let path = run_csv_path(&config.out, strategy, run);
    if let Some(epochs) = load_completed_run(&path, config.epochs) {
        return RunOutcome {
            strategy,
            run,
            seed,
            epochs,
            resumed: true,
            failed: None,
        };
    }

    let mut outcome = RunOutcome {
        strategy,
        run,
        seed,
        epochs: Vec::with_capacity(config.epochs as usize),
        resumed: false,
        failed: None,
    };
    let mut env = match build_env(config) {
        Ok(env) => env,
        Err(e) => {
            outcome.failed = Some(e.to_string());
            return outcome;
        }
    };
    let mut agent_config = AgentConfig::new(strategy, seed);
    agent_config.gamma = config.gamma;
    agent_config.epsilon = config.epsilon();
    agent_config.intrinsic = config.intrinsic;
    agent_config.intrinsic_bonus = config.intrinsic_bonus;
    let mut agent = Agent::new(Arc::clone(resources), agent_config);

    // Records are written incrementally so an interrupted experiment keeps
    // its completed epochs on disk (incomplete files are recomputed).
    let file = match File::create(&path) {
        Ok(f) => f,
        Err(e) => {
            outcome.failed = Some(format!("cannot create {}: {e}", path.display()));
            return outcome;
        }
    };
    let mut writer = BufWriter::new(file);
    if let Err(e) = writeln!(writer, "{RUN_CSV_HEADER}") {
        outcome.failed = Some(e.to_string());
        return outcome;
    }
    for epoch in 0..config.epochs {
        match agent.run_epoch(env.as_mut(), epoch, config.steps) {
            Ok(record) => {
                if write_epoch_row(&mut writer, &record)
                    .and_then(|()| writer.flush())
                    .is_err()
                {
                    outcome.failed = Some(format!("write to {} failed", path.display()));
                    break;
                }
                outcome.epochs.push(record);
            }
            Err(e) => {
                outcome.failed = Some(e.to_string());
                break;
            }
        }
    }

    if outcome.failed.is_none() {
        let q_path = config
            .out
            .join(format!("{strategy}_run{run}_qtable.csv"));
        if let Err(e) = agent
            .qtable()
            .save_csv(&q_path, strategy.as_str(), config.epochs)
        {
            log::warn!("could not persist q-table for {strategy} run {run}: {e}");
        }
    }
    outcome
}

fn summarize(
    strategies: &[StrategyKind],
    runs: &[RunOutcome],
    max_score: i64,
) -> Vec<StrategySummary> {
    strategies
        .iter()
        .map(|&strategy| {
            let complete: Vec<&RunOutcome> = runs
                .iter()
                .filter(|r| r.strategy == strategy && r.failed.is_none())
                .collect();
            let n = complete.len() as f64;
            let mean = |f: &dyn Fn(&RunOutcome) -> f64| -> f64 {
                if complete.is_empty() {
                    0.0
                } else {
                    complete.iter().map(|r| f(r)).sum::<f64>() / n
                }
            };
            StrategySummary {
                strategy,
                runs_completed: complete.len() as u32,
                mean_final_score: mean(&|r| r.final_score() as f64),
                mean_peak_performance: mean(&|r| r.peak_performance(max_score)),
                mean_cumulative_reward: mean(&|r| {
                    r.epochs.iter().map(|e| e.cumulative_reward).sum::<f64>()
                }),
                mean_distinct_states: mean(&|r| {
                    r.epochs.last().map(|e| e.distinct_states as f64).unwrap_or(0.0)
                }),
                median_epochs_to_first_reward: median_epochs_to_first_reward(&complete),
            }
        })
        .collect()
}

/// Median over runs with reward-free runs counted as infinite; `None` when
/// the median itself is infinite.
pub fn median_epochs_to_first_reward(runs: &[&RunOutcome]) -> Option<f64> {
    if runs.is_empty() {
        return None;
    }
    let mut firsts: Vec<Option<u32>> = runs.iter().map(|r| r.epochs_to_first_reward()).collect();
    firsts.sort_by_key(|f| f.map(u64::from).unwrap_or(u64::MAX));
    let mid = firsts.len() / 2;
    if firsts.len() % 2 == 1 {
        firsts[mid].map(f64::from)
    } else {
        match (firsts[mid - 1], firsts[mid]) {
            (Some(a), Some(b)) => Some((f64::from(a) + f64::from(b)) / 2.0),
            _ => None,
        }
    }
}

fn write_summary_csv(path: &Path, summaries: &[StrategySummary]) -> Result<(), HarnessError> {
    let io_err = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(
        out,
        "strategy,runs_completed,mean_final_score,mean_peak_performance,\
         mean_cumulative_reward,mean_distinct_states,median_epochs_to_first_reward"
    )
    .map_err(io_err)?;
    for s in summaries {
        let median = s
            .median_epochs_to_first_reward
            .map(|m| m.to_string())
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{median}",
            s.strategy,
            s.runs_completed,
            s.mean_final_score,
            s.mean_peak_performance,
            s.mean_cumulative_reward,
            s.mean_distinct_states
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Normalized comparison report: each strategy's peak and final score
/// relative to the best any strategy achieved in this experiment. Raw
/// records are never normalized.
pub fn write_comparison_csv(
    path: &Path,
    summaries: &[StrategySummary],
) -> Result<(), HarnessError> {
    let io_err = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let best_peak = summaries
        .iter()
        .map(|s| s.mean_peak_performance)
        .fold(0.0_f64, f64::max);
    let best_final = summaries
        .iter()
        .map(|s| s.mean_final_score)
        .fold(0.0_f64, f64::max);
    let normalize = |value: f64, best: f64| if best > 0.0 { value / best } else { 0.0 };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(
        out,
        "strategy,mean_peak_performance,normalized_peak,mean_final_score,normalized_final"
    )
    .map_err(io_err)?;
    for s in summaries {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.strategy,
            s.mean_peak_performance,
            normalize(s.mean_peak_performance, best_peak),
            s.mean_final_score,
            normalize(s.mean_final_score, best_final)
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Train every (strategy, run) pair in the config and write per-run CSVs
/// plus `summary.csv` under the output directory.
///
/// Completed per-run CSVs are reused, so an interrupted experiment resumes
/// per completed run. Individual run failures are warned about and skipped
/// in aggregation; if every run fails the experiment errors.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    config.validate()?;
    std::fs::create_dir_all(&config.out).map_err(|source| HarnessError::Io {
        path: config.out.clone(),
        source,
    })?;
    let resources = load_resources(config)?;
    let max_score = match &config.external {
        Some(spec) => spec.max_score,
        None => ScriptedWorld::load(&config.world)?.max_score,
    };

    let tasks: Vec<(StrategyKind, u32)> = config
        .strategies
        .iter()
        .flat_map(|&s| (0..config.runs).map(move |r| (s, r)))
        .collect();

    let runs: Vec<RunOutcome> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            tasks
                .par_iter()
                .map(|&(strategy, run)| execute_run(config, &resources, strategy, run))
                .collect()
        })
    } else {
        tasks
            .iter()
            .map(|&(strategy, run)| execute_run(config, &resources, strategy, run))
            .collect()
    };

    for run in &runs {
        if let Some(reason) = &run.failed {
            log::warn!(
                "{} run {} failed and is excluded from aggregation: {reason}",
                run.strategy,
                run.run
            );
        }
    }
    if runs.iter().all(|r| r.failed.is_some()) {
        return Err(HarnessError::AllRunsFailed);
    }

    let summaries = summarize(&config.strategies, &runs, max_score);
    write_summary_csv(&config.out.join("summary.csv"), &summaries)?;

    Ok(ExperimentOutput {
        runs,
        summaries,
        out_dir: config.out.clone(),
        max_score,
    })
}

/// `run_experiment` plus the normalized `comparison.csv` report.
pub fn compare(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let output = run_experiment(config)?;
    write_comparison_csv(&output.out_dir.join("comparison.csv"), &output.summaries)?;
    Ok(output)
}

/// One replayed command and its response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayStep {
    pub command: String,
    pub response: String,
    pub score: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayTranscript {
    pub steps: Vec<ReplayStep>,
    pub final_score: i64,
}

/// Greedily replay a persisted Q-table against a scripted world: from each
/// look state, issue the recorded action with the highest value (ties to
/// the lexicographically first), stopping at `max_steps` pairs or at a
/// state with no recorded actions.
pub fn replay_qtable(
    qtable_path: &Path,
    world_path: &Path,
    max_steps: u32,
) -> Result<ReplayTranscript, HarnessError> {
    let (qtable, _meta) = QTable::load_csv(qtable_path)?;
    let world = Arc::new(ScriptedWorld::load(world_path)?);
    let mut env = ScriptedEnv::new(world);
    let obs = env.reset()?;
    let mut state = crate::agent::hash_state(&obs.text);
    let mut steps = Vec::new();
    let mut score = obs.score;
    for _ in 0..max_steps {
        let recorded = qtable.recorded_actions(state);
        if recorded.is_empty() {
            break;
        }
        let best = recorded
            .iter()
            .map(|a| qtable.value(state, a))
            .fold(f64::NEG_INFINITY, f64::max);
        let command = recorded
            .iter()
            .filter(|a| qtable.value(state, a) == best)
            .min()
            .expect("recorded nonempty")
            .clone();
        let action_obs = env.step(&command)?;
        let look_obs = env.step("look")?;
        score = look_obs.score;
        steps.push(ReplayStep {
            command,
            response: action_obs.text,
            score,
        });
        state = crate::agent::hash_state(&look_obs.text);
    }
    Ok(ReplayTranscript {
        steps,
        final_score: score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_round_trip_through_json() {
        let config = ExperimentConfig::default();
        let text = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.epochs, config.epochs);
        assert_eq!(back.embeddings_format, "auto");
    }

    #[test]
    fn sparse_config_files_fill_in_defaults() {
        let parsed: ExperimentConfig =
            serde_json::from_str(r#"{"epochs": 3, "strategies": ["affordance"]}"#).unwrap();
        assert_eq!(parsed.epochs, 3);
        assert_eq!(parsed.steps, 200);
        assert_eq!(parsed.strategies, vec![StrategyKind::Affordance]);
    }

    #[test]
    fn validation_catches_missing_pieces() {
        let mut config = ExperimentConfig::default();
        config.epochs = 0;
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::default();
        config.world = PathBuf::from("/nonexistent/world.json");
        assert!(config.validate().is_err());

        let mut config = ExperimentConfig::default();
        config.strategies = vec![StrategyKind::Affordance];
        // No embeddings configured.
        assert!(matches!(config.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn median_counts_rewardless_runs_as_infinite() {
        let mk = |first: Option<u32>| RunOutcome {
            strategy: StrategyKind::Baseline,
            run: 0,
            seed: 0,
            epochs: match first {
                Some(epoch) => (1..=epoch)
                    .map(|e| EpochRecord {
                        epoch: e - 1,
                        score: if e == epoch { 1 } else { 0 },
                        cumulative_reward: 0.0,
                        distinct_states: 0,
                        steps_completed: 0,
                        truncated: false,
                    })
                    .collect(),
                None => vec![EpochRecord {
                    epoch: 0,
                    score: 0,
                    cumulative_reward: 0.0,
                    distinct_states: 0,
                    steps_completed: 0,
                    truncated: false,
                }],
            },
            resumed: false,
            failed: None,
        };
        let runs = [mk(Some(2)), mk(Some(4)), mk(None)];
        let refs: Vec<&RunOutcome> = runs.iter().collect();
        assert_eq!(median_epochs_to_first_reward(&refs), Some(4.0));

        let runs = [mk(Some(2)), mk(None), mk(None)];
        let refs: Vec<&RunOutcome> = runs.iter().collect();
        assert_eq!(median_epochs_to_first_reward(&refs), None);
    }
}
