//! Affordant-verb analogy queries and manipulability projections over an
//! [`EmbeddingStore`].
//!
//! The affordance vector is the mean of verb-minus-noun differences over a
//! canonical pair set; adding it to a noun vector points toward verbs that
//! "make sense" for that noun. Manipulability is estimated by projecting a
//! noun onto a word-pair axis such as forest - tree: lower scores sit closer
//! to the concrete, graspable end.
//!
//! Query arithmetic happens in raw vector space; ranking uses cosine over
//! unit-normalized vectors. Axes are normalized before projection so scores
//! are comparable across axes (rankings are unaffected).

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::embedding::{add, dot, norm, sub, EmbeddingError, EmbeddingStore, NearestResult};

/// Default canonical verb/noun pairs defining the affordance relation.
pub const DEFAULT_CANONICAL_PAIRS: [(&str, &str); 15] = [
    ("sing", "song"),
    ("drink", "water"),
    ("read", "book"),
    ("eat", "food"),
    ("wear", "coat"),
    ("drive", "car"),
    ("ride", "horse"),
    ("give", "gift"),
    ("attack", "enemy"),
    ("say", "word"),
    ("open", "door"),
    ("climb", "tree"),
    ("heal", "wound"),
    ("cure", "disease"),
    ("paint", "picture"),
];

/// Default manipulability axis, written (less manipulable, more manipulable)
/// so ascending projection scores mean more manipulable.
pub const DEFAULT_AXIS: (&str, &str) = ("forest", "tree");

#[derive(Debug, Error)]
pub enum AffordanceError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("tokens missing from the embedding store: {0:?}")]
    MissingTokens(Vec<String>),
    #[error("projection axis {positive:?} - {negative:?} is the zero vector")]
    ZeroAxis { positive: String, negative: String },
    #[error("canonical pair set is empty")]
    EmptyPairSet,
    #[error("{path}:{line}: expected two whitespace-separated tokens")]
    BadPairLine { path: PathBuf, line: usize },
}

/// Ordered list of (verb, noun) exemplar pairs.
#[derive(Debug, Clone)]
pub struct CanonicalPairSet {
    pairs: Vec<(String, String)>,
}

impl Default for CanonicalPairSet {
    fn default() -> Self {
        CanonicalPairSet {
            pairs: DEFAULT_CANONICAL_PAIRS
                .iter()
                .map(|(v, n)| (v.to_string(), n.to_string()))
                .collect(),
        }
    }
}

impl CanonicalPairSet {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self, AffordanceError> {
        if pairs.is_empty() {
            return Err(AffordanceError::EmptyPairSet);
        }
        let pairs = pairs
            .into_iter()
            .map(|(v, n)| (v.to_lowercase(), n.to_lowercase()))
            .collect();
        Ok(CanonicalPairSet { pairs })
    }

    /// Parse a config file of `verb noun` lines; `#` comments and blank
    /// lines are ignored.
    pub fn from_file(path: &Path) -> Result<Self, AffordanceError> {
        let file = File::open(path).map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut pairs = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| EmbeddingError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            match (fields.next(), fields.next(), fields.next()) {
                (Some(v), Some(n), None) => pairs.push((v.to_string(), n.to_string())),
                _ => {
                    return Err(AffordanceError::BadPairLine {
                        path: path.to_path_buf(),
                        line: i + 1,
                    })
                }
            }
        }
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// The averaged verb-minus-noun difference vector and its source pairs.
#[derive(Debug, Clone)]
pub struct AffordanceModel {
    vector: Vec<f64>,
    pairs: CanonicalPairSet,
}

impl AffordanceModel {
    /// Average the raw-space differences `verb - noun` over the pair set.
    /// Any token absent from the store fails the build, listing every
    /// missing token.
    pub fn build(
        store: &EmbeddingStore,
        pairs: CanonicalPairSet,
    ) -> Result<Self, AffordanceError> {
        if pairs.is_empty() {
            return Err(AffordanceError::EmptyPairSet);
        }
        let mut missing: Vec<String> = Vec::new();
        for (verb, noun) in pairs.pairs() {
            for token in [verb, noun] {
                if !store.contains(token) {
                    missing.push(token.clone());
                }
            }
        }
        if !missing.is_empty() {
            missing.sort();
            missing.dedup();
            return Err(AffordanceError::MissingTokens(missing));
        }
        let mut sum = vec![0.0; store.dimension()];
        for (verb, noun) in pairs.pairs() {
            let diff = sub(store.lookup(verb)?, store.lookup(noun)?);
            for (s, d) in sum.iter_mut().zip(&diff) {
                *s += d;
            }
        }
        let m = pairs.len() as f64;
        for s in sum.iter_mut() {
            *s /= m;
        }
        Ok(AffordanceModel {
            vector: sum,
            pairs,
        })
    }

    /// The affordance vector `a`.
    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn pairs(&self) -> &CanonicalPairSet {
        &self.pairs
    }

    /// The `n` verbs among `candidates` closest to `noun + a`, ranked by
    /// descending cosine. The query noun itself is excluded from results.
    pub fn affordant_verbs<S: AsRef<str>>(
        &self,
        store: &EmbeddingStore,
        noun: &str,
        n: usize,
        candidates: &[S],
    ) -> Result<NearestResult, AffordanceError> {
        let query = add(store.lookup(noun)?, &self.vector);
        let exclude: HashSet<String> = [noun.to_lowercase()].into_iter().collect();
        Ok(store.nearest(&query, candidates, n, &exclude)?)
    }
}

/// A word-pair difference axis with its unit-normalized vector.
#[derive(Debug, Clone)]
pub struct ProjectionAxis {
    positive: String,
    negative: String,
    unit: Vec<f64>,
}

impl ProjectionAxis {
    /// Axis vector `positive - negative`, normalized to unit length.
    pub fn new(
        store: &EmbeddingStore,
        positive: &str,
        negative: &str,
    ) -> Result<Self, AffordanceError> {
        let axis = sub(store.lookup(positive)?, store.lookup(negative)?);
        let n = norm(&axis);
        if n == 0.0 {
            return Err(AffordanceError::ZeroAxis {
                positive: positive.to_string(),
                negative: negative.to_string(),
            });
        }
        Ok(ProjectionAxis {
            positive: positive.to_lowercase(),
            negative: negative.to_lowercase(),
            unit: axis.into_iter().map(|v| v / n).collect(),
        })
    }

    pub fn positive(&self) -> &str {
        &self.positive
    }

    pub fn negative(&self) -> &str {
        &self.negative
    }

    pub fn unit(&self) -> &[f64] {
        &self.unit
    }
}

/// Dot product of the noun's raw vector with the unit axis. With an axis
/// written (abstract - concrete), lower scores mean more manipulable.
pub fn manipulability_score(
    store: &EmbeddingStore,
    axis: &ProjectionAxis,
    noun: &str,
) -> Result<f64, AffordanceError> {
    Ok(dot(store.lookup(noun)?, &axis.unit))
}

/// Ranked output of [`rank_manipulable`].
#[derive(Debug, Clone)]
pub struct RankedNouns {
    /// `(noun, score)` in ascending score order (most manipulable first).
    pub ranked: Vec<(String, f64)>,
    /// Nouns skipped because they were not in the store.
    pub skipped: usize,
}

/// Up to `k` nouns sorted ascending by manipulability score, ties broken
/// lexicographically. Missing nouns are skipped with a count; duplicates
/// are ranked once.
pub fn rank_manipulable<S: AsRef<str>>(
    store: &EmbeddingStore,
    axis: &ProjectionAxis,
    nouns: &[S],
    k: usize,
) -> RankedNouns {
    let mut seen: HashSet<String> = HashSet::new();
    let mut ranked: Vec<(String, f64)> = Vec::new();
    let mut skipped = 0usize;
    for noun in nouns {
        let key = noun.as_ref().to_lowercase();
        if !seen.insert(key.clone()) {
            continue;
        }
        match manipulability_score(store, axis, &key) {
            Ok(score) => ranked.push((key, score)),
            Err(_) => skipped += 1,
        }
    }
    ranked.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("scores are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked.truncate(k);
    RankedNouns { ranked, skipped }
}

/// One projected word from [`project_2d`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedWord {
    pub token: String,
    pub x: f64,
    pub y: f64,
}

/// Output of [`project_2d`].
#[derive(Debug, Clone)]
pub struct Projection2D {
    pub rows: Vec<ProjectedWord>,
    pub skipped: usize,
}

/// Project words onto a pair of axes: `x = word . unit(axis_x)`,
/// `y = word . unit(axis_y)`. Missing words are skipped with a count.
pub fn project_2d<S: AsRef<str>>(
    store: &EmbeddingStore,
    axis_x: &ProjectionAxis,
    axis_y: &ProjectionAxis,
    words: &[S],
) -> Projection2D {
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for word in words {
        let token = word.as_ref().to_lowercase();
        match store.lookup(&token) {
            Ok(v) => rows.push(ProjectedWord {
                x: dot(v, &axis_x.unit),
                y: dot(v, &axis_y.unit),
                token,
            }),
            Err(_) => skipped += 1,
        }
    }
    Projection2D { rows, skipped }
}

/// Write a projection as CSV: header `token,x,y`, 6-decimal fixed point.
pub fn write_projection_csv<W: Write>(mut w: W, projection: &Projection2D) -> std::io::Result<()> {
    writeln!(w, "token,x,y")?;
    for row in &projection.rows {
        writeln!(w, "{},{:.6},{:.6}", row.token, row.x, row.y)?;
    }
    Ok(())
}
