//! Text-game environments behind one protocol: a deterministic scripted
//! world engine for reproducible experiments, and an adapter driving an
//! external interactive-fiction interpreter as a child process.

mod external;
mod scripted;
mod world;

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use external::{parse_score, ExternalEnv, ExternalEnvConfig};
pub use scripted::ScriptedEnv;
pub use world::{Effect, Room, Rule, ScriptedWorld, WorldError, WorldObject};

/// Response returned when a command matches no rule or exit.
pub const FAILURE_RESPONSE: &str = "Nothing happens.";

/// One game response: the full text, the cumulative score, and whether the
/// backend considers the episode over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvObservation {
    pub text: String,
    pub score: i64,
    pub terminal: bool,
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("failed to start backend: {message}")]
    Spawn { message: String },
    #[error("bad environment config: {message}")]
    Config { message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Uniform protocol over text-game backends. An instance is owned by one
/// agent loop at a time.
pub trait Environment {
    /// Restart the episode: score back to zero, consumable rules re-armed.
    fn reset(&mut self) -> Result<EnvObservation, EnvError>;

    /// Issue one command and return the backend's response.
    fn step(&mut self, command: &str) -> Result<EnvObservation, EnvError>;

    /// Declared maximum score, when the backend knows it.
    fn max_score(&self) -> Option<i64>;
}
