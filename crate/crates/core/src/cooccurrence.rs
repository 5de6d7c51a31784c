//! Verb/noun co-occurrence counts over a plain-text corpus, within a fixed
//! token-window radius.
//!
//! Tokenization is lowercase alphanumeric runs; windows never cross document
//! boundaries (one corpus file is one document). A token pair instance at
//! positions `i < j` with `j - i <= radius` counts once for each role
//! assignment that fits the vocabularies: once toward `(w_i, w_j)` when
//! `w_i` is a verb and `w_j` a noun, and once toward `(w_j, w_i)` when the
//! reverse holds. When both words are the same token, the instance counts
//! once.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::embedding::Lexicon;

#[derive(Debug, Error)]
pub enum CoocError {
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

/// (verb, noun) -> count table with its window radius.
#[derive(Debug, Clone)]
pub struct CooccurrenceTable {
    counts: HashMap<(String, String), u64>,
    radius: usize,
    corpus_id: String,
}

impl CooccurrenceTable {
    /// Count co-occurrences in a corpus file using the `verb_k` most common
    /// verbs and `noun_k` most common nouns from the lexicon.
    pub fn build(
        corpus: &Path,
        lexicon: &Lexicon,
        verb_k: usize,
        noun_k: usize,
        radius: usize,
    ) -> Result<Self, CoocError> {
        let verbs: HashSet<&str> = lexicon.top_verbs(verb_k).iter().map(|s| s.as_str()).collect();
        let nouns: HashSet<&str> = lexicon.top_nouns(noun_k).iter().map(|s| s.as_str()).collect();
        let file = File::open(corpus).map_err(|source| CoocError::Io {
            path: corpus.to_path_buf(),
            source,
        })?;
        let corpus_id = corpus.display().to_string();

        let mut counts: HashMap<(String, String), u64> = HashMap::new();
        // Sliding window of the previous `radius` tokens; the stream is flat
        // across lines.
        let mut window: Vec<String> = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|source| CoocError::Io {
                path: corpus.to_path_buf(),
                source,
            })?;
            for token in tokenize(&line) {
                count_against_window(&mut counts, &window, &token, &verbs, &nouns);
                window.push(token);
                if window.len() > radius {
                    window.remove(0);
                }
            }
        }
        Ok(CooccurrenceTable {
            counts,
            radius,
            corpus_id,
        })
    }

    /// In-memory variant over a single text treated as one document.
    pub fn build_from_text(
        text: &str,
        verbs: &HashSet<&str>,
        nouns: &HashSet<&str>,
        radius: usize,
        corpus_id: &str,
    ) -> Self {
        let mut counts: HashMap<(String, String), u64> = HashMap::new();
        let mut window: Vec<String> = Vec::new();
        for token in tokenize(text) {
            count_against_window(&mut counts, &window, &token, verbs, nouns);
            window.push(token);
            if window.len() > radius {
                window.remove(0);
            }
        }
        CooccurrenceTable {
            counts,
            radius,
            corpus_id: corpus_id.to_string(),
        }
    }

    pub fn count(&self, verb: &str, noun: &str) -> u64 {
        self.counts
            .get(&(verb.to_lowercase(), noun.to_lowercase()))
            .copied()
            .unwrap_or(0)
    }

    /// Number of distinct (verb, noun) pairs with a nonzero count.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn corpus_id(&self) -> &str {
        &self.corpus_id
    }

    /// Persist as CSV: a `#radius=<r>` comment, a `verb,noun,count` header,
    /// then rows sorted by (verb, noun).
    pub fn save_csv(&self, path: &Path) -> Result<(), CoocError> {
        let io_err = |source| CoocError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut rows: Vec<(&(String, String), &u64)> = self.counts.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
        writeln!(out, "#radius={}", self.radius).map_err(io_err)?;
        writeln!(out, "verb,noun,count").map_err(io_err)?;
        for ((verb, noun), count) in rows {
            writeln!(out, "{verb},{noun},{count}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    pub fn load_csv(path: &Path) -> Result<Self, CoocError> {
        let io_err = |source| CoocError::Io {
            path: path.to_path_buf(),
            source,
        };
        let parse_err = |line: usize, message: String| CoocError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let file = File::open(path).map_err(io_err)?;
        let mut counts = HashMap::new();
        let mut radius: Option<usize> = None;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(io_err)?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("#radius=") {
                radius = Some(
                    rest.parse()
                        .map_err(|_| parse_err(line_no, format!("bad radius {rest:?}")))?,
                );
                continue;
            }
            if trimmed.starts_with('#') || trimmed == "verb,noun,count" {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 3 {
                return Err(parse_err(line_no, "expected verb,noun,count".to_string()));
            }
            let count: u64 = fields[2]
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad count {:?}", fields[2])))?;
            counts.insert((fields[0].to_string(), fields[1].to_string()), count);
        }
        let radius =
            radius.ok_or_else(|| parse_err(0, "missing #radius= header".to_string()))?;
        Ok(CooccurrenceTable {
            counts,
            radius,
            corpus_id: path.display().to_string(),
        })
    }
}

fn count_against_window(
    counts: &mut HashMap<(String, String), u64>,
    window: &[String],
    token: &str,
    verbs: &HashSet<&str>,
    nouns: &HashSet<&str>,
) {
    for prev in window {
        let mut bump = |verb: &str, noun: &str| {
            *counts
                .entry((verb.to_string(), noun.to_string()))
                .or_insert(0) += 1;
        };
        if verbs.contains(prev.as_str()) && nouns.contains(token) {
            bump(prev, token);
        }
        if verbs.contains(token) && nouns.contains(prev.as_str()) && prev != token {
            bump(token, prev);
        }
    }
}

/// Lowercase alphanumeric runs, in order.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::io::Write as IoWrite;

    fn sets<'a>(verbs: &[&'a str], nouns: &[&'a str]) -> (HashSet<&'a str>, HashSet<&'a str>) {
        (
            verbs.iter().copied().collect(),
            nouns.iter().copied().collect(),
        )
    }

    /// Independently coded O(n^2) all-pairs counter used as the oracle.
    fn brute_force(
        text: &str,
        verbs: &HashSet<&str>,
        nouns: &HashSet<&str>,
        radius: usize,
    ) -> HashMap<(String, String), u64> {
        let tokens = tokenize(text);
        let mut counts: HashMap<(String, String), u64> = HashMap::new();
        for i in 0..tokens.len() {
            for j in (i + 1)..tokens.len() {
                if j - i > radius {
                    break;
                }
                let (a, b) = (&tokens[i], &tokens[j]);
                if verbs.contains(a.as_str()) && nouns.contains(b.as_str()) {
                    *counts.entry((a.clone(), b.clone())).or_insert(0) += 1;
                }
                if verbs.contains(b.as_str()) && nouns.contains(a.as_str()) && a != b {
                    *counts.entry((b.clone(), a.clone())).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    #[test]
    fn counts_simple_phrase() {
        let (verbs, nouns) = sets(&["ride"], &["horse"]);
        let table = CooccurrenceTable::build_from_text("ride the horse", &verbs, &nouns, 9, "t");
        assert_eq!(table.count("ride", "horse"), 1);
    }

    #[test]
    fn radius_boundary_is_inclusive() {
        let (verbs, nouns) = sets(&["ride"], &["horse"]);
        // 9 filler tokens puts "horse" exactly 10 positions after "ride".
        let far = "ride a b c d e f g h i horse";
        let table = CooccurrenceTable::build_from_text(far, &verbs, &nouns, 9, "t");
        assert_eq!(table.count("ride", "horse"), 0);
        let near = "ride a b c d e f g h horse";
        let table = CooccurrenceTable::build_from_text(near, &verbs, &nouns, 9, "t");
        assert_eq!(table.count("ride", "horse"), 1);
    }

    #[test]
    fn counts_verb_after_noun_once_per_instance() {
        let (verbs, nouns) = sets(&["ride"], &["horse"]);
        let table =
            CooccurrenceTable::build_from_text("horse lovers ride daily", &verbs, &nouns, 9, "t");
        assert_eq!(table.count("ride", "horse"), 1);
    }

    #[test]
    fn same_token_in_both_vocabularies_counts_once() {
        let (verbs, nouns) = sets(&["ring"], &["ring"]);
        let table = CooccurrenceTable::build_from_text("ring the ring", &verbs, &nouns, 9, "t");
        assert_eq!(table.count("ring", "ring"), 1);
    }

    #[test]
    fn matches_quadratic_oracle_on_random_corpora() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let vocab: Vec<String> = (0..12)
            .map(|i| format!("w{i}"))
            .chain(["ride", "take", "horse", "key"].iter().map(|s| s.to_string()))
            .collect();
        let (verbs, nouns) = sets(&["ride", "take", "w0", "w1"], &["horse", "key", "w1", "w2"]);
        for radius in [1usize, 3, 9] {
            for _ in 0..5 {
                let text: Vec<&str> = (0..200)
                    .map(|_| vocab[rng.random_range(0..vocab.len())].as_str())
                    .collect();
                let text = text.join(" ");
                let table =
                    CooccurrenceTable::build_from_text(&text, &verbs, &nouns, radius, "t");
                let oracle = brute_force(&text, &verbs, &nouns, radius);
                assert_eq!(table.counts, oracle, "radius {radius}");
            }
        }
    }

    #[test]
    fn build_reads_corpus_file_and_respects_lexicon_ks() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "Ride the horse!\nThen take the key; take it.\n").unwrap();
        let lexicon = Lexicon::from_lists(
            ["ride".to_string(), "take".to_string()],
            ["horse".to_string(), "key".to_string()],
            [],
        );
        let table = CooccurrenceTable::build(f.path(), &lexicon, 1000, 30000, 9).unwrap();
        assert_eq!(table.count("ride", "horse"), 1);
        assert_eq!(table.count("take", "key"), 2);
        // verb_k = 1 drops "take" from the vocabulary.
        let limited = CooccurrenceTable::build(f.path(), &lexicon, 1, 30000, 9).unwrap();
        assert_eq!(limited.count("take", "key"), 0);
    }

    #[test]
    fn empty_corpus_yields_empty_table() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let lexicon = Lexicon::from_lists(["ride".to_string()], ["horse".to_string()], []);
        let table = CooccurrenceTable::build(f.path(), &lexicon, 10, 10, 9).unwrap();
        assert!(table.is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let (verbs, nouns) = sets(&["ride", "take"], &["horse", "key"]);
        let table = CooccurrenceTable::build_from_text(
            "take key ride horse take key",
            &verbs,
            &nouns,
            9,
            "t",
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cooc.csv");
        table.save_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("#radius=9\nverb,noun,count\n"));
        let loaded = CooccurrenceTable::load_csv(&path).unwrap();
        assert_eq!(loaded.radius(), 9);
        assert_eq!(loaded.counts, table.counts);
    }

    proptest! {
        /// Appending text at a token boundary never reduces any count.
        #[test]
        fn counts_grow_monotonically(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vocab = ["ride", "take", "horse", "key", "w0", "w1"];
            let mk = |rng: &mut ChaCha8Rng, len: usize| -> String {
                (0..len)
                    .map(|_| vocab[rng.random_range(0..vocab.len())])
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let base = mk(&mut rng, 30);
            let extra = mk(&mut rng, 10);
            let combined = format!("{base} {extra}");
            let (verbs, nouns) = sets(&["ride", "take", "w0"], &["horse", "key", "w1"]);
            let before = CooccurrenceTable::build_from_text(&base, &verbs, &nouns, 3, "t");
            let after = CooccurrenceTable::build_from_text(&combined, &verbs, &nouns, 3, "t");
            for (pair, count) in &before.counts {
                prop_assert!(after.counts.get(pair).copied().unwrap_or(0) >= *count);
            }
        }
    }
}
