//! The modified tabular Q-learner: numeral-stripped state hashing, noun
//! extraction with adjective augmentation, strategy-driven noun and verb
//! selection, epsilon-greedy control, a monotone value update (learning
//! rate fixed at 1), and the look-alternation training loop.
//!
//! The update never lets a value decrease, so behavior that produced a
//! reward at least once is retained even when the (consumable) reward fails
//! to reappear later in the same episode.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::action_space::{
    head_token, verbs_for, ActionSpaceError, StrategyContext, StrategyKind, StrategyParams,
    VerbInventory,
};
use crate::affordance::{manipulability_score, AffordanceModel, ProjectionAxis};
use crate::conceptnet::ConceptNetClient;
use crate::cooccurrence::{tokenize, CooccurrenceTable};
use crate::embedding::{EmbeddingStore, Lexicon};
use crate::env::Environment;
use crate::rng::{derive_seed, fnv1a64};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    ActionSpace(#[from] ActionSpaceError),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// 64-bit hash of normalized game text. Texts differing only in decimal
/// digits hash identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateHash(pub u64);

impl fmt::Display for StateHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Strip ASCII digits, collapse whitespace runs to single spaces, trim.
pub fn normalize_state_text(text: &str) -> String {
    let stripped: String = text.chars().filter(|c| !c.is_ascii_digit()).collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// FNV-1a over the normalized text, stable across runs and platforms so
/// persisted Q-tables rehash identically.
pub fn hash_state(text: &str) -> StateHash {
    StateHash(fnv1a64(normalize_state_text(text).as_bytes()))
}

/// A verb with an optional noun phrase, rendered as "verb" or
/// "verb noun-phrase" with a single space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameAction {
    pub verb: String,
    pub noun: Option<String>,
}

impl GameAction {
    pub fn bare(verb: impl Into<String>) -> Self {
        GameAction {
            verb: verb.into(),
            noun: None,
        }
    }

    pub fn with_noun(verb: impl Into<String>, noun: impl Into<String>) -> Self {
        GameAction {
            verb: verb.into(),
            noun: Some(noun.into()),
        }
    }

    pub fn render(&self) -> String {
        match &self.noun {
            Some(noun) => format!("{} {}", self.verb, noun),
            None => self.verb.clone(),
        }
    }

    pub fn parse(command: &str) -> Self {
        match command.split_once(' ') {
            Some((verb, noun)) => GameAction::with_noun(verb, noun),
            None => GameAction::bare(command),
        }
    }
}

/// Decaying exploration rate: `max(floor, initial * decay^epoch)`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct EpsilonSchedule {
    pub initial: f64,
    pub decay: f64,
    pub floor: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule {
            initial: 1.0,
            decay: 0.99,
            floor: 0.05,
        }
    }
}

impl EpsilonSchedule {
    pub fn value(&self, epoch: u32) -> f64 {
        (self.initial * self.decay.powi(epoch.min(i32::MAX as u32) as i32)).max(self.floor)
    }
}

/// (state, action) -> value map with monotone update semantics and a fixed
/// learning rate of 1. Unseen pairs read as 0.
pub struct QTable {
    gamma: f64,
    values: HashMap<(StateHash, String), f64>,
    by_state: HashMap<StateHash, Vec<String>>,
}

impl QTable {
    pub fn new(gamma: f64) -> Self {
        QTable {
            gamma,
            values: HashMap::new(),
            by_state: HashMap::new(),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, state: StateHash, action: &str) -> f64 {
        self.values
            .get(&(state, action.to_string()))
            .copied()
            .unwrap_or(0.0)
    }

    /// Actions recorded for a state, in first-seen order.
    pub fn recorded_actions(&self, state: StateHash) -> &[String] {
        self.by_state
            .get(&state)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Max value over actions recorded for `state`; 0 when none are.
    pub fn max_recorded(&self, state: StateHash) -> f64 {
        self.recorded_actions(state)
            .iter()
            .map(|a| self.value(state, a))
            .fold(0.0_f64, f64::max)
            .max(0.0)
    }

    /// The update: `delta = reward + gamma * max_a' Q(s', a') - Q(s, a)`,
    /// stored value `max(Q(s, a), Q(s, a) + delta)`. Returns the stored
    /// value. Values never decrease.
    pub fn update(&mut self, state: StateHash, action: &str, reward: f64, next: StateHash) -> f64 {
        let old = self.value(state, action);
        let delta = reward + self.gamma * self.max_recorded(next) - old;
        let stored = old.max(old + delta);
        let key = (state, action.to_string());
        if !self.values.contains_key(&key) {
            self.by_state
                .entry(state)
                .or_default()
                .push(action.to_string());
        }
        self.values.insert(key, stored);
        stored
    }

    /// Persist as CSV: a comment recording gamma, strategy, and epoch
    /// count, a `state_hash,action,value` header, then rows sorted by
    /// (state, action).
    pub fn save_csv(&self, path: &Path, strategy: &str, epochs: u32) -> Result<(), AgentError> {
        let io_err = |source| AgentError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut rows: Vec<(&(StateHash, String), &f64)> = self.values.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        writeln!(
            out,
            "#gamma={},strategy={strategy},epochs={epochs}",
            self.gamma
        )
        .map_err(io_err)?;
        writeln!(out, "state_hash,action,value").map_err(io_err)?;
        for ((state, action), value) in rows {
            writeln!(out, "{state},{action},{value}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    pub fn load_csv(path: &Path) -> Result<(Self, QTableMeta), AgentError> {
        let io_err = |source| AgentError::Io {
            path: path.to_path_buf(),
            source,
        };
        let parse_err = |line: usize, message: String| AgentError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let file = File::open(path).map_err(io_err)?;
        let mut table = QTable::new(0.9);
        let mut meta = QTableMeta::default();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(io_err)?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed == "state_hash,action,value" {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                for field in rest.split(',') {
                    match field.split_once('=') {
                        Some(("gamma", v)) => {
                            table.gamma = v
                                .parse()
                                .map_err(|_| parse_err(line_no, format!("bad gamma {v:?}")))?;
                        }
                        Some(("strategy", v)) => meta.strategy = Some(v.to_string()),
                        Some(("epochs", v)) => meta.epochs = v.parse().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            // Rows are hash,action,value; split the value off the right so
            // an action containing a comma would still parse.
            let (head, value) = trimmed
                .rsplit_once(',')
                .ok_or_else(|| parse_err(line_no, "expected state_hash,action,value".into()))?;
            let (hash, action) = head
                .split_once(',')
                .ok_or_else(|| parse_err(line_no, "expected state_hash,action,value".into()))?;
            let state = StateHash(
                hash.parse()
                    .map_err(|_| parse_err(line_no, format!("bad state hash {hash:?}")))?,
            );
            let value: f64 = value
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad value {value:?}")))?;
            table
                .by_state
                .entry(state)
                .or_default()
                .push(action.to_string());
            table.values.insert((state, action.to_string()), value);
        }
        Ok((table, meta))
    }
}

#[derive(Debug, Default, Clone)]
pub struct QTableMeta {
    pub strategy: Option<String>,
    pub epochs: Option<u32>,
}

/// Nouns found in game text, in first-appearance order, with adjective
/// bigrams added after their head noun ("pill", then "red pill").
pub fn extract_nouns(text: &str, lexicon: &Lexicon) -> Vec<String> {
    let tokens = tokenize(text);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if !lexicon.is_noun(token) {
            continue;
        }
        if seen.insert(token.clone()) {
            out.push(token.clone());
        }
        if i > 0 && lexicon.is_adjective(&tokens[i - 1]) {
            let bigram = format!("{} {}", tokens[i - 1], token);
            if seen.insert(bigram.clone()) {
                out.push(bigram);
            }
        }
    }
    out
}

/// Shared read-only resources for agents.
pub struct Resources {
    pub lexicon: Arc<Lexicon>,
    pub inventory: Arc<VerbInventory>,
    pub params: StrategyParams,
    pub store: Option<Arc<EmbeddingStore>>,
    pub model: Option<Arc<AffordanceModel>>,
    pub axis: Option<Arc<ProjectionAxis>>,
    pub cooccurrence: Option<Arc<CooccurrenceTable>>,
    pub conceptnet: Option<Arc<ConceptNetClient>>,
}

impl Resources {
    fn context(&self, run_seed: u64) -> StrategyContext<'_> {
        StrategyContext {
            inventory: &self.inventory,
            lexicon: &self.lexicon,
            params: self.params,
            store: self.store.as_deref(),
            model: self.model.as_deref(),
            cooccurrence: self.cooccurrence.as_deref(),
            conceptnet: self.conceptnet.as_deref(),
            run_seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AgentConfig {
    pub strategy: StrategyKind,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub intrinsic: bool,
    pub intrinsic_bonus: f64,
    pub seed: u64,
}

impl AgentConfig {
    pub fn new(strategy: StrategyKind, seed: u64) -> Self {
        AgentConfig {
            strategy,
            gamma: 0.9,
            epsilon: EpsilonSchedule::default(),
            intrinsic: false,
            intrinsic_bonus: 1.0,
            seed,
        }
    }
}

/// Per-epoch training record.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: u32,
    /// End-of-epoch game score (intrinsic bonuses excluded).
    pub score: i64,
    /// Total training reward this epoch, including intrinsic bonuses.
    pub cumulative_reward: f64,
    /// Distinct states seen by this agent so far, at epoch end.
    pub distinct_states: usize,
    pub steps_completed: u32,
    pub truncated: bool,
}

/// One Q-learning agent owning its table, RNG, and novelty memory.
pub struct Agent {
    resources: Arc<Resources>,
    config: AgentConfig,
    qtable: QTable,
    rng: ChaCha8Rng,
    seen_states: HashSet<StateHash>,
    // verbs_for is pure per (noun, epoch-key), so rendered candidate lists
    // are cached; only the random strategy varies by epoch.
    candidate_cache: HashMap<(Option<String>, u64), Arc<Vec<GameAction>>>,
}

impl Agent {
    pub fn new(resources: Arc<Resources>, config: AgentConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "agent", 0));
        let qtable = QTable::new(config.gamma);
        Agent {
            resources,
            config,
            qtable,
            rng,
            seen_states: HashSet::new(),
            candidate_cache: HashMap::new(),
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn qtable(&self) -> &QTable {
        &self.qtable
    }

    pub fn into_qtable(self) -> QTable {
        self.qtable
    }

    pub fn distinct_states(&self) -> usize {
        self.seen_states.len()
    }

    /// Pick this step's noun phrase from the game text. Embedding-backed
    /// strategies keep the most manipulable `noun_budget` phrases (scored
    /// by their head noun) and draw uniformly; other strategies draw
    /// uniformly over everything extracted. No extractable noun means a
    /// navigation-only step.
    pub fn select_noun(&mut self, text: &str) -> Option<String> {
        let extracted = extract_nouns(text, &self.resources.lexicon);
        if extracted.is_empty() {
            return None;
        }
        let use_ranking = self.config.strategy.needs_embeddings()
            && self.resources.store.is_some()
            && self.resources.axis.is_some();
        let pool: Vec<String> = if use_ranking {
            let store = self.resources.store.as_ref().unwrap();
            let axis = self.resources.axis.as_ref().unwrap();
            let mut scored: Vec<(String, f64)> = extracted
                .iter()
                .filter_map(|phrase| {
                    manipulability_score(store, axis, head_token(phrase))
                        .ok()
                        .map(|score| (phrase.clone(), score))
                })
                .collect();
            if scored.is_empty() {
                extracted
            } else {
                scored.sort_by(|a, b| {
                    a.1.partial_cmp(&b.1)
                        .expect("scores are finite")
                        .then_with(|| a.0.cmp(&b.0))
                });
                scored.truncate(self.resources.params.noun_budget);
                scored.into_iter().map(|(phrase, _)| phrase).collect()
            }
        } else {
            extracted
        };
        pool.choose(&mut self.rng).cloned()
    }

    fn candidates(
        &mut self,
        noun: Option<&str>,
        epoch: u32,
    ) -> Result<Arc<Vec<GameAction>>, ActionSpaceError> {
        let epoch_key = if self.config.strategy == StrategyKind::Random {
            u64::from(epoch)
        } else {
            0
        };
        let key = (noun.map(str::to_string), epoch_key);
        if let Some(hit) = self.candidate_cache.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let ctx = self.resources.context(self.config.seed);
        let verbs = verbs_for(&ctx, self.config.strategy, noun, u64::from(epoch))?;
        let mut actions = Vec::with_capacity(verbs.len());
        for verb in verbs {
            if self.resources.inventory.is_navigation(&verb) {
                actions.push(GameAction::bare(verb));
            } else if let Some(noun) = noun {
                actions.push(GameAction::with_noun(verb, noun));
            }
        }
        let actions = Arc::new(actions);
        self.candidate_cache.insert(key, Arc::clone(&actions));
        Ok(actions)
    }

    /// Epsilon-greedy: with probability epsilon, a uniform draw over the
    /// rendered candidates (navigation verbs bare, other verbs paired with
    /// the chosen noun); otherwise the argmax over actions already recorded
    /// for this state, ties broken uniformly. With nothing recorded the
    /// exploratory draw is used.
    pub fn choose_action(
        &mut self,
        state: StateHash,
        noun: Option<&str>,
        epoch: u32,
    ) -> Result<GameAction, ActionSpaceError> {
        let candidates = self.candidates(noun, epoch)?;
        let epsilon = self.config.epsilon.value(epoch);
        let explore = self.rng.random::<f64>() < epsilon;
        if !explore {
            let recorded = self.qtable.recorded_actions(state);
            if !recorded.is_empty() {
                let best = recorded
                    .iter()
                    .map(|a| self.qtable.value(state, a))
                    .fold(f64::NEG_INFINITY, f64::max);
                let maximizers: Vec<&String> = recorded
                    .iter()
                    .filter(|a| self.qtable.value(state, a) == best)
                    .collect();
                let pick = maximizers
                    .choose(&mut self.rng)
                    .expect("maximizers nonempty");
                return Ok(GameAction::parse(pick));
            }
        }
        Ok(candidates
            .choose(&mut self.rng)
            .expect("candidate set is never empty")
            .clone())
    }

    /// One training epoch: `steps` environment interactions, alternating a
    /// chosen action with a "look" whose response becomes the next state.
    /// Reward is the score delta across the action and its look, plus an
    /// optional intrinsic bonus the first time a state is reached. Odd step
    /// budgets round down to whole action/look pairs.
    ///
    /// Environment failures mid-epoch truncate the record; strategy errors
    /// propagate.
    pub fn run_epoch<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        epoch: u32,
        steps: u32,
    ) -> Result<EpochRecord, AgentError> {
        let mut record = EpochRecord {
            epoch,
            score: 0,
            cumulative_reward: 0.0,
            distinct_states: self.seen_states.len(),
            steps_completed: 0,
            truncated: false,
        };
        let obs = match env.reset() {
            Ok(obs) => obs,
            Err(e) => {
                log::warn!("epoch {epoch}: reset failed: {e}");
                record.truncated = true;
                return Ok(record);
            }
        };
        let mut state_text = obs.text;
        let mut prev_score = obs.score;
        let mut state = hash_state(&state_text);
        self.seen_states.insert(state);

        for _ in 0..steps / 2 {
            let noun = self.select_noun(&state_text);
            let action = self.choose_action(state, noun.as_deref(), epoch)?;
            let command = action.render();

            let action_obs = match env.step(&command) {
                Ok(obs) => obs,
                Err(e) => {
                    log::warn!("epoch {epoch}: step {command:?} failed: {e}");
                    record.truncated = true;
                    break;
                }
            };
            record.steps_completed += 1;
            if action_obs.terminal {
                record.truncated = true;
                prev_score = action_obs.score;
                break;
            }
            let look_obs = match env.step("look") {
                Ok(obs) => obs,
                Err(e) => {
                    log::warn!("epoch {epoch}: look failed: {e}");
                    record.truncated = true;
                    break;
                }
            };
            record.steps_completed += 1;

            let next = hash_state(&look_obs.text);
            let mut reward = (look_obs.score - prev_score) as f64;
            if self.config.intrinsic && !self.seen_states.contains(&next) {
                reward += self.config.intrinsic_bonus;
            }
            self.seen_states.insert(next);
            self.qtable.update(state, &command, reward, next);
            record.cumulative_reward += reward;

            prev_score = look_obs.score;
            state = next;
            state_text = look_obs.text;
            if look_obs.terminal {
                record.truncated = true;
                break;
            }
        }
        record.score = prev_score;
        record.distinct_states = self.seen_states.len();
        Ok(record)
    }
}
