//! Shared service state: loaded store bundles, experiment jobs, and
//! environment sessions.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::AtomicU64;
use std::sync::{Arc, Mutex, RwLock};

use affordance_api::types::{
    ExperimentState, ExperimentStatus, StoreInfo, StoreSpec, StrategySummary,
};
use affordance_core::action_space::VerbInventory;
use affordance_core::affordance::{
    AffordanceModel, CanonicalPairSet, ProjectionAxis, DEFAULT_AXIS,
};
use affordance_core::embedding::{EmbeddingFormat, EmbeddingStore, Lexicon};
use affordance_core::env::ScriptedEnv;

/// An embedding store with its lexicon, affordance model, and default axis,
/// loaded once and shared read-only.
pub struct StoreBundle {
    pub store: Arc<EmbeddingStore>,
    pub lexicon: Arc<Lexicon>,
    pub inventory: Arc<VerbInventory>,
    pub model: Arc<AffordanceModel>,
    /// Absent when the default axis endpoints are not in the store and no
    /// explicit axis was given.
    pub axis: Option<Arc<ProjectionAxis>>,
}

impl StoreBundle {
    pub fn load(spec: &StoreSpec) -> Result<Self, String> {
        let store = match spec.format.as_str() {
            "auto" => EmbeddingStore::load_auto(&spec.embeddings),
            other => other
                .parse::<EmbeddingFormat>()
                .and_then(|format| EmbeddingStore::load(&spec.embeddings, format)),
        }
        .map_err(|e| e.to_string())?;
        let lexicon = Lexicon::load(&spec.verbs, &spec.nouns, spec.adjectives.as_deref())
            .map_err(|e| e.to_string())?;
        let inventory = VerbInventory::from_lexicon(&lexicon, spec.manipulation_k);
        let pairs = match &spec.canonical_pairs {
            Some(path) => CanonicalPairSet::from_file(path).map_err(|e| e.to_string())?,
            None => CanonicalPairSet::default(),
        };
        let model = AffordanceModel::build(&store, pairs).map_err(|e| e.to_string())?;
        let axis = match &spec.axis {
            Some([positive, negative]) => Some(
                ProjectionAxis::new(&store, positive, negative).map_err(|e| e.to_string())?,
            ),
            None => {
                let (positive, negative) = DEFAULT_AXIS;
                ProjectionAxis::new(&store, positive, negative).ok()
            }
        };
        Ok(StoreBundle {
            store: Arc::new(store),
            lexicon: Arc::new(lexicon),
            inventory: Arc::new(inventory),
            model: Arc::new(model),
            axis: axis.map(Arc::new),
        })
    }

    pub fn info(&self, id: u64) -> StoreInfo {
        StoreInfo {
            id,
            dimension: self.store.dimension(),
            tokens: self.store.len(),
            duplicates_skipped: self.store.duplicates_skipped(),
            verbs: self.lexicon.verbs().len(),
            nouns: self.lexicon.nouns().len(),
        }
    }
}

#[derive(Debug)]
pub enum JobState {
    Queued,
    Running,
    Completed {
        summaries: Vec<StrategySummary>,
        failed_runs: Vec<String>,
    },
    Failed(String),
}

pub struct ExperimentJob {
    pub out: PathBuf,
    pub state: Mutex<JobState>,
}

impl ExperimentJob {
    pub fn status(&self, id: u64) -> ExperimentStatus {
        let state = self.state.lock().unwrap();
        let (status, error, summaries, failed_runs) = match &*state {
            JobState::Queued => (ExperimentState::Queued, None, None, Vec::new()),
            JobState::Running => (ExperimentState::Running, None, None, Vec::new()),
            JobState::Completed {
                summaries,
                failed_runs,
            } => (
                ExperimentState::Completed,
                None,
                Some(summaries.clone()),
                failed_runs.clone(),
            ),
            JobState::Failed(message) => (
                ExperimentState::Failed,
                Some(message.clone()),
                None,
                Vec::new(),
            ),
        };
        ExperimentStatus {
            id,
            state: status,
            error,
            out: self.out.clone(),
            summaries,
            failed_runs,
        }
    }
}

#[derive(Default)]
pub struct AppState {
    pub stores: RwLock<HashMap<u64, Arc<StoreBundle>>>,
    pub next_store_id: AtomicU64,
    pub experiments: RwLock<HashMap<u64, Arc<ExperimentJob>>>,
    pub next_experiment_id: AtomicU64,
    pub envs: RwLock<HashMap<u64, Arc<Mutex<ScriptedEnv>>>>,
    pub next_env_id: AtomicU64,
}
