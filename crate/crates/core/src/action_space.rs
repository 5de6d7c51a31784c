//! Per-state verb lists under each action-space reduction strategy.
//!
//! Every strategy's output is the union of the navigation and essential
//! lists with a strategy-specific manipulation subset, so an agent can
//! always move and always try the universally applicable verbs.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affordance::{AffordanceError, AffordanceModel};
use crate::conceptnet::{ConceptNetClient, ConceptNetError};
use crate::cooccurrence::CooccurrenceTable;
use crate::embedding::{EmbeddingStore, Lexicon};
use crate::rng::derive_seed;

/// Conventional movement words, always kept in the action set.
pub const NAVIGATION_VERBS: [&str; 11] = [
    "north",
    "south",
    "east",
    "west",
    "northeast",
    "southeast",
    "southwest",
    "northwest",
    "up",
    "down",
    "enter",
];

/// Manipulation verbs that apply to essentially any object.
pub const ESSENTIAL_VERBS: [&str; 6] = ["get", "drop", "push", "pull", "open", "close"];

#[derive(Debug, Error)]
pub enum ActionSpaceError {
    #[error("strategy {strategy} requires {resource}")]
    MissingResource {
        strategy: StrategyKind,
        resource: &'static str,
    },
    #[error(transparent)]
    Affordance(#[from] AffordanceError),
    #[error(transparent)]
    ConceptNet(#[from] ConceptNetError),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
}

/// The navigation, essential, and manipulation verb lists.
pub struct VerbInventory {
    navigation: Vec<String>,
    navigation_set: HashSet<String>,
    essential: Vec<String>,
    manipulation: Vec<String>,
    manipulation_set: HashSet<String>,
}

impl VerbInventory {
    /// Default lists plus the `k` most common lexicon verbs as the
    /// manipulation list.
    pub fn from_lexicon(lexicon: &Lexicon, manipulation_k: usize) -> Self {
        Self::with_lists(
            NAVIGATION_VERBS.iter().map(|s| s.to_string()).collect(),
            ESSENTIAL_VERBS.iter().map(|s| s.to_string()).collect(),
            lexicon.top_verbs(manipulation_k).to_vec(),
        )
    }

    pub fn with_lists(
        navigation: Vec<String>,
        essential: Vec<String>,
        manipulation: Vec<String>,
    ) -> Self {
        let navigation_set = navigation.iter().cloned().collect();
        let manipulation_set = manipulation.iter().cloned().collect();
        VerbInventory {
            navigation,
            navigation_set,
            essential,
            manipulation,
            manipulation_set,
        }
    }

    pub fn navigation(&self) -> &[String] {
        &self.navigation
    }

    pub fn essential(&self) -> &[String] {
        &self.essential
    }

    pub fn manipulation(&self) -> &[String] {
        &self.manipulation
    }

    pub fn is_navigation(&self, verb: &str) -> bool {
        self.navigation_set.contains(verb)
    }

    pub fn is_manipulation(&self, verb: &str) -> bool {
        self.manipulation_set.contains(verb)
    }

    /// navigation ∪ essential, the floor of every strategy's output.
    pub fn base_union(&self) -> BTreeSet<String> {
        self.navigation
            .iter()
            .chain(self.essential.iter())
            .cloned()
            .collect()
    }
}

/// Action-space reduction strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Full manipulation list, no reduction.
    Baseline,
    /// Top affordant verbs for the state's noun, intersected with the
    /// manipulation list.
    Affordance,
    /// A fixed-size manipulation subset redrawn uniformly each epoch.
    Random,
    /// Manipulation verbs whose corpus co-occurrence with the noun exceeds
    /// a threshold.
    Cooccurrence,
    /// Manipulation verbs intersected with the noun's CapableOf verbs.
    Conceptnet,
    /// Top affordant verbs over the entire verb lexicon, no manipulation
    /// intersection.
    Freeform,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Baseline,
        StrategyKind::Affordance,
        StrategyKind::Random,
        StrategyKind::Cooccurrence,
        StrategyKind::Conceptnet,
        StrategyKind::Freeform,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Baseline => "baseline",
            StrategyKind::Affordance => "affordance",
            StrategyKind::Random => "random",
            StrategyKind::Cooccurrence => "cooccurrence",
            StrategyKind::Conceptnet => "conceptnet",
            StrategyKind::Freeform => "freeform",
        }
    }

    /// Strategies whose verb choice depends on the embedding store.
    pub fn needs_embeddings(&self) -> bool {
        matches!(self, StrategyKind::Affordance | StrategyKind::Freeform)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = ActionSpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| ActionSpaceError::UnknownStrategy(s.to_string()))
    }
}

/// Budgets and thresholds shared by the strategies.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StrategyParams {
    /// Verbs kept by the affordance and random reductions.
    pub verb_budget: usize,
    /// Nouns kept per state by manipulability ranking.
    pub noun_budget: usize,
    /// Strict lower bound on counts for the co-occurrence reduction.
    pub cooc_threshold: u64,
    /// Verbs kept by the free-form reduction.
    pub freeform_budget: usize,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            verb_budget: 30,
            noun_budget: 15,
            cooc_threshold: 3,
            freeform_budget: 15,
        }
    }
}

/// Read-only resources a strategy may draw on.
pub struct StrategyContext<'a> {
    pub inventory: &'a VerbInventory,
    pub lexicon: &'a Lexicon,
    pub params: StrategyParams,
    pub store: Option<&'a EmbeddingStore>,
    pub model: Option<&'a AffordanceModel>,
    pub cooccurrence: Option<&'a CooccurrenceTable>,
    pub conceptnet: Option<&'a ConceptNetClient>,
    /// Seeds the per-epoch draw of the random strategy.
    pub run_seed: u64,
}

/// The final verb set for one state: navigation ∪ essential ∪ the
/// strategy's manipulation subset.
///
/// `noun` is the phrase chosen for this state; embedding-backed strategies
/// resolve it to its head token. A noun absent from the store (or no noun
/// at all) falls back to navigation ∪ essential. Outputs are pure functions
/// of `(context, strategy, noun, epoch)`.
pub fn verbs_for(
    ctx: &StrategyContext<'_>,
    strategy: StrategyKind,
    noun: Option<&str>,
    epoch: u64,
) -> Result<BTreeSet<String>, ActionSpaceError> {
    let mut out = ctx.inventory.base_union();
    match strategy {
        StrategyKind::Baseline => {
            out.extend(ctx.inventory.manipulation().iter().cloned());
        }
        StrategyKind::Random => {
            let manipulation = ctx.inventory.manipulation();
            let budget = ctx.params.verb_budget.min(manipulation.len());
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(ctx.run_seed, "random-verbs", epoch));
            for i in sample(&mut rng, manipulation.len(), budget) {
                out.insert(manipulation[i].clone());
            }
        }
        StrategyKind::Affordance => {
            let store = ctx.store.ok_or(ActionSpaceError::MissingResource {
                strategy,
                resource: "an embedding store",
            })?;
            let model = ctx.model.ok_or(ActionSpaceError::MissingResource {
                strategy,
                resource: "an affordance model",
            })?;
            if let Some(head) = noun.map(head_token) {
                if store.contains(head) {
                    let ranked = model.affordant_verbs(
                        store,
                        head,
                        ctx.params.verb_budget,
                        ctx.lexicon.verbs(),
                    )?;
                    out.extend(
                        ranked
                            .matches
                            .into_iter()
                            .map(|(verb, _)| verb)
                            .filter(|verb| ctx.inventory.is_manipulation(verb)),
                    );
                } else {
                    log::debug!("noun {head:?} not in store; affordance reduction falls back");
                }
            }
        }
        StrategyKind::Cooccurrence => {
            let table = ctx.cooccurrence.ok_or(ActionSpaceError::MissingResource {
                strategy,
                resource: "a co-occurrence table",
            })?;
            if let Some(head) = noun.map(head_token) {
                out.extend(
                    ctx.inventory
                        .manipulation()
                        .iter()
                        .filter(|verb| table.count(verb, head) > ctx.params.cooc_threshold)
                        .cloned(),
                );
            }
        }
        StrategyKind::Conceptnet => {
            let client = ctx.conceptnet.ok_or(ActionSpaceError::MissingResource {
                strategy,
                resource: "a conceptnet client",
            })?;
            if let Some(head) = noun.map(head_token) {
                let capable = client.capable_of(head)?;
                out.extend(
                    capable
                        .into_iter()
                        .filter(|verb| ctx.inventory.is_manipulation(verb)),
                );
            }
        }
        StrategyKind::Freeform => {
            let store = ctx.store.ok_or(ActionSpaceError::MissingResource {
                strategy,
                resource: "an embedding store",
            })?;
            let model = ctx.model.ok_or(ActionSpaceError::MissingResource {
                strategy,
                resource: "an affordance model",
            })?;
            if let Some(head) = noun.map(head_token) {
                if store.contains(head) {
                    let ranked = model.affordant_verbs(
                        store,
                        head,
                        ctx.params.freeform_budget,
                        ctx.lexicon.verbs(),
                    )?;
                    out.extend(ranked.matches.into_iter().map(|(verb, _)| verb));
                } else {
                    log::debug!("noun {head:?} not in store; freeform reduction falls back");
                }
            }
        }
    }
    Ok(out)
}

/// Last whitespace-separated token of a noun phrase: the head of an
/// adjective-augmented noun like "brass lamp".
pub fn head_token(phrase: &str) -> &str {
    phrase.split_whitespace().last().unwrap_or(phrase)
}
