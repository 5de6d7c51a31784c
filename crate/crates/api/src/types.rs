//! JSON request/response bodies shared by the service and its clients.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use affordance_core::env::EnvObservation;
pub use affordance_core::harness::{
    ExperimentConfig, ReplayStep, ReplayTranscript, StrategySummary,
};

/// Body for `POST /api/v1/stores`: load an embedding store plus lexicon
/// into the service.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreSpec {
    pub embeddings: PathBuf,
    /// "word2vec-text", "glove-text", or "auto" (default).
    #[serde(default = "default_format")]
    pub format: String,
    pub verbs: PathBuf,
    pub nouns: PathBuf,
    #[serde(default)]
    pub adjectives: Option<PathBuf>,
    #[serde(default)]
    pub canonical_pairs: Option<PathBuf>,
    /// Manipulability axis as [positive, negative] tokens.
    #[serde(default)]
    pub axis: Option<[String; 2]>,
    #[serde(default = "default_manipulation_k")]
    pub manipulation_k: usize,
}

fn default_format() -> String {
    "auto".to_string()
}

fn default_manipulation_k() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreInfo {
    pub id: u64,
    pub dimension: usize,
    pub tokens: usize,
    pub duplicates_skipped: usize,
    pub verbs: usize,
    pub nouns: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffordancesRequest {
    pub noun: String,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Restrict candidates to the manipulation list instead of the whole
    /// verb lexicon.
    #[serde(default)]
    pub manipulation_only: bool,
}

fn default_n() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedVerb {
    pub token: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffordancesResponse {
    pub noun: String,
    pub verbs: Vec<RankedVerb>,
    pub skipped_candidates: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManipulabilityRequest {
    pub nouns: Vec<String>,
    #[serde(default)]
    pub axis: Option<[String; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredNoun {
    pub token: String,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManipulabilityResponse {
    pub axis: [String; 2],
    /// Ascending score order: most manipulable first.
    pub nouns: Vec<ScoredNoun>,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Project2dRequest {
    pub xaxis: [String; 2],
    pub yaxis: [String; 2],
    pub words: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectedWord {
    pub token: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Project2dResponse {
    pub rows: Vec<ProjectedWord>,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoocBuildRequest {
    pub corpus: PathBuf,
    pub verbs: PathBuf,
    pub nouns: PathBuf,
    #[serde(default = "default_verb_k")]
    pub verb_k: usize,
    #[serde(default = "default_noun_k")]
    pub noun_k: usize,
    #[serde(default = "default_radius")]
    pub radius: usize,
    /// Where the service writes the table CSV.
    pub out: PathBuf,
}

fn default_verb_k() -> usize {
    1000
}

fn default_noun_k() -> usize {
    30_000
}

fn default_radius() -> usize {
    9
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoocBuildResponse {
    pub pairs: usize,
    pub total: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapableOfRequest {
    pub noun: String,
    pub cache_dir: PathBuf,
    #[serde(default = "default_true")]
    pub offline: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapableOfResponse {
    pub noun: String,
    pub verbs: Vec<String>,
    pub network_calls: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSubmitted {
    pub id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentState {
    Queued,
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentStatus {
    pub id: u64,
    pub state: ExperimentState,
    #[serde(default)]
    pub error: Option<String>,
    pub out: PathBuf,
    #[serde(default)]
    pub summaries: Option<Vec<StrategySummary>>,
    #[serde(default)]
    pub failed_runs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplayRequest {
    pub qtable: PathBuf,
    pub world: PathBuf,
    #[serde(default = "default_replay_steps")]
    pub max_steps: u32,
}

fn default_replay_steps() -> u32 {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvCreateRequest {
    pub world: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvCreated {
    pub id: u64,
    pub observation: EnvObservation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvStepRequest {
    pub command: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
}
