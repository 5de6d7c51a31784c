//! Affordance extraction from word embeddings, and affordance-guided
//! action-space reduction for tabular Q-learning agents in text-adventure
//! environments.
//!
//! The crate is organized around six subsystems:
//!
//! - [`embedding`]: word-vector files, lookup, cosine similarity, and
//!   exhaustive nearest-neighbour queries over restricted candidate sets.
//! - [`affordance`]: the affordant-verb analogy query and the manipulability
//!   projection built on top of an [`embedding::EmbeddingStore`].
//! - [`action_space`]: per-state verb lists under the available reduction
//!   strategies, with [`cooccurrence`] statistics and the [`conceptnet`]
//!   client as supporting knowledge sources.
//! - [`env`]: a deterministic scripted world engine plus an adapter that
//!   drives an external interactive-fiction interpreter as a child process.
//! - [`agent`]: the modified tabular Q-learner (state hashing, noun and verb
//!   selection, the monotone value update, and the look-alternation loop).
//! - [`harness`]: experiment configs, multi-run training, CSV outputs,
//!   and greedy replay of persisted Q-tables.

pub mod action_space;
pub mod affordance;
pub mod agent;
pub mod conceptnet;
pub mod cooccurrence;
pub mod embedding;
pub mod env;
pub mod harness;
pub mod rng;
