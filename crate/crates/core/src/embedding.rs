//! Word-embedding storage: text-format parsers, vector lookup, cosine
//! similarity, and exhaustive nearest-neighbour queries over restricted
//! candidate sets, plus the verb/noun/adjective lexicon.
//!
//! Corpus sizes in this domain make an exhaustive scan acceptable, so there
//! is deliberately no approximate index here.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

/// Errors from embedding and lexicon loading and queries.
#[derive(Debug, Error)]
pub enum EmbeddingError {
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
    #[error("embedding file {path} contains no entries")]
    Empty { path: PathBuf },
    #[error("token not found: {0:?}")]
    TokenNotFound(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("zero vector is not a valid {0}")]
    ZeroVector(&'static str),
    #[error("unknown embedding format {0:?} (expected \"word2vec-text\" or \"glove-text\")")]
    UnknownFormat(String),
}

/// On-disk text format of an embedding file.
///
/// `Word2vecText` starts with a `<count> <dimension>` header line;
/// `GloveText` has data lines only, with the dimension inferred from the
/// first line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Word2vecText,
    GloveText,
}

impl FromStr for EmbeddingFormat {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word2vec-text" | "word2vec" => Ok(EmbeddingFormat::Word2vecText),
            "glove-text" | "glove" => Ok(EmbeddingFormat::GloveText),
            other => Err(EmbeddingError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for EmbeddingFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbeddingFormat::Word2vecText => write!(f, "word2vec-text"),
            EmbeddingFormat::GloveText => write!(f, "glove-text"),
        }
    }
}

/// Immutable token -> vector map with parallel unit-normalized vectors.
///
/// Tokens are lowercased at load and at query time. Duplicate tokens in a
/// file keep the first occurrence; the number of skipped duplicates is
/// reported via [`EmbeddingStore::duplicates_skipped`].
#[derive(Debug)]
pub struct EmbeddingStore {
    dimension: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    raw: Vec<f64>,
    normalized: Vec<f64>,
    duplicates_skipped: usize,
}

impl EmbeddingStore {
    /// Load an embedding file in the given text format.
    pub fn load(path: &Path, format: EmbeddingFormat) -> Result<Self, EmbeddingError> {
        let file = File::open(path).map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read(BufReader::new(file), format, path)
    }

    /// Load an embedding file, sniffing the format from the first line:
    /// exactly two integer fields means a word2vec-text header.
    pub fn load_auto(path: &Path) -> Result<Self, EmbeddingError> {
        let file = File::open(path).map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut reader = BufReader::new(file);
        let mut first = String::new();
        reader
            .read_line(&mut first)
            .map_err(|source| EmbeddingError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        let fields: Vec<&str> = first.split_whitespace().collect();
        let format = if fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
            EmbeddingFormat::Word2vecText
        } else {
            EmbeddingFormat::GloveText
        };
        drop(reader);
        Self::load(path, format)
    }

    fn read<R: Read>(
        reader: BufReader<R>,
        format: EmbeddingFormat,
        path: &Path,
    ) -> Result<Self, EmbeddingError> {
        let io_err = |source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        };
        let parse_err = |line: usize, message: String| EmbeddingError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };

        let mut lines = reader.lines().enumerate();
        let mut dimension: Option<usize> = None;

        if format == EmbeddingFormat::Word2vecText {
            let (_, first) = lines
                .next()
                .ok_or_else(|| EmbeddingError::Empty {
                    path: path.to_path_buf(),
                })?;
            let first = first.map_err(io_err)?;
            let fields: Vec<&str> = first.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(parse_err(
                    1,
                    format!("expected header \"<count> <dimension>\", got {first:?}"),
                ));
            }
            let dim: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(1, format!("bad dimension in header: {:?}", fields[1])))?;
            if dim == 0 {
                return Err(parse_err(1, "dimension must be positive".to_string()));
            }
            dimension = Some(dim);
        }

        let mut tokens = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut raw: Vec<f64> = Vec::new();
        let mut duplicates_skipped = 0usize;

        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(io_err)?;
            let mut fields = line.split_whitespace();
            let token = fields
                .next()
                .ok_or_else(|| parse_err(line_no, "blank line".to_string()))?;
            let mut values = Vec::with_capacity(dimension.unwrap_or(0));
            for field in fields {
                let v: f64 = field.parse().map_err(|_| {
                    parse_err(line_no, format!("bad float {field:?}"))
                })?;
                if !v.is_finite() {
                    return Err(parse_err(line_no, format!("non-finite value {field:?}")));
                }
                values.push(v);
            }
            let dim = *dimension.get_or_insert(values.len());
            if dim == 0 {
                return Err(parse_err(line_no, "vector has no components".to_string()));
            }
            if values.len() != dim {
                return Err(parse_err(
                    line_no,
                    format!("dimension mismatch: expected {dim}, got {}", values.len()),
                ));
            }
            let token = token.to_lowercase();
            if index.contains_key(&token) {
                duplicates_skipped += 1;
                continue;
            }
            if norm(&values) == 0.0 {
                return Err(parse_err(
                    line_no,
                    format!("zero-norm vector for token {token:?}"),
                ));
            }
            index.insert(token.clone(), tokens.len());
            tokens.push(token);
            raw.extend_from_slice(&values);
        }

        if tokens.is_empty() {
            return Err(EmbeddingError::Empty {
                path: path.to_path_buf(),
            });
        }

        let dimension = dimension.expect("dimension set once an entry exists");
        let mut normalized = raw.clone();
        for chunk in normalized.chunks_mut(dimension) {
            let n = norm(chunk);
            for v in chunk.iter_mut() {
                *v /= n;
            }
        }

        Ok(EmbeddingStore {
            dimension,
            tokens,
            index,
            raw,
            normalized,
            duplicates_skipped,
        })
    }

    /// Build a store from in-memory entries (mainly for synthetic stores in
    /// tests and tools). Applies the same rules as file loading: lowercase
    /// tokens, first duplicate wins, zero vectors rejected.
    pub fn from_entries<I>(entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut dimension: Option<usize> = None;
        let mut tokens = Vec::new();
        let mut index = HashMap::new();
        let mut raw = Vec::new();
        let mut duplicates_skipped = 0usize;
        for (token, values) in entries {
            let dim = *dimension.get_or_insert(values.len());
            if values.len() != dim || dim == 0 {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: dim,
                    actual: values.len(),
                });
            }
            if values.iter().any(|v| !v.is_finite()) || norm(&values) == 0.0 {
                return Err(EmbeddingError::ZeroVector("stored vector"));
            }
            let token = token.to_lowercase();
            if index.contains_key(&token) {
                duplicates_skipped += 1;
                continue;
            }
            index.insert(token.clone(), tokens.len());
            tokens.push(token);
            raw.extend_from_slice(&values);
        }
        if tokens.is_empty() {
            return Err(EmbeddingError::Empty {
                path: PathBuf::from("<memory>"),
            });
        }
        let dimension = dimension.unwrap();
        let mut normalized = raw.clone();
        for chunk in normalized.chunks_mut(dimension) {
            let n = norm(chunk);
            for v in chunk.iter_mut() {
                *v /= n;
            }
        }
        Ok(EmbeddingStore {
            dimension,
            tokens,
            index,
            raw,
            normalized,
            duplicates_skipped,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn duplicates_skipped(&self) -> usize {
        self.duplicates_skipped
    }

    /// All stored tokens, in file order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(&token.to_lowercase())
    }

    /// Raw (unnormalized) vector for a token; the query is lowercased.
    pub fn lookup(&self, token: &str) -> Result<&[f64], EmbeddingError> {
        let key = token.to_lowercase();
        match self.index.get(&key) {
            Some(&i) => Ok(&self.raw[i * self.dimension..(i + 1) * self.dimension]),
            None => Err(EmbeddingError::TokenNotFound(token.to_string())),
        }
    }

    /// Unit-normalized vector for a token.
    pub fn normalized_vector(&self, token: &str) -> Result<&[f64], EmbeddingError> {
        let key = token.to_lowercase();
        match self.index.get(&key) {
            Some(&i) => Ok(&self.normalized[i * self.dimension..(i + 1) * self.dimension]),
            None => Err(EmbeddingError::TokenNotFound(token.to_string())),
        }
    }

    /// Exhaustive nearest-neighbour scan of `candidates` against `query`.
    ///
    /// Returns at most `n` tokens sorted by descending cosine similarity
    /// (against unit-normalized stored vectors), ties broken by lexicographic
    /// token order. Candidates absent from the store are skipped and counted
    /// in [`NearestResult::skipped`]; excluded tokens are dropped silently.
    /// An empty eligible set yields an empty list; a zero query vector is an
    /// error.
    pub fn nearest<S: AsRef<str>>(
        &self,
        query: &[f64],
        candidates: &[S],
        n: usize,
        exclude: &HashSet<String>,
    ) -> Result<NearestResult, EmbeddingError> {
        if query.len() != self.dimension {
            return Err(EmbeddingError::DimensionMismatch {
                expected: self.dimension,
                actual: query.len(),
            });
        }
        let qn = norm(query);
        if qn == 0.0 {
            return Err(EmbeddingError::ZeroVector("query"));
        }
        let unit_query: Vec<f64> = query.iter().map(|v| v / qn).collect();

        let mut seen: HashSet<String> = HashSet::new();
        let mut skipped = 0usize;
        let mut scored: Vec<(String, f64)> = Vec::new();
        for cand in candidates {
            let key = cand.as_ref().to_lowercase();
            if !seen.insert(key.clone()) {
                continue;
            }
            if exclude.contains(&key) {
                continue;
            }
            match self.index.get(&key) {
                Some(&i) => {
                    let v = &self.normalized[i * self.dimension..(i + 1) * self.dimension];
                    scored.push((key, dot(v, &unit_query)));
                }
                None => skipped += 1,
            }
        }
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("similarities are finite")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(n);
        Ok(NearestResult {
            matches: scored,
            skipped,
        })
    }
}

/// Ranked output of [`EmbeddingStore::nearest`].
#[derive(Debug, Clone)]
pub struct NearestResult {
    /// `(token, cosine similarity)` in descending similarity order.
    pub matches: Vec<(String, f64)>,
    /// Number of candidates skipped because they were not in the store.
    pub skipped: usize,
}

/// Cosine similarity of two raw vectors. Both must be nonzero and of equal
/// dimension.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroVector("cosine operand"));
    }
    Ok(dot(u, v) / (nu * nv))
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub(crate) fn add(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

pub(crate) fn sub(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

/// Verb and noun lists ordered by descending corpus frequency, plus an
/// adjective set used to augment extracted nouns.
#[derive(Debug)]
pub struct Lexicon {
    verbs: Vec<String>,
    verb_set: HashSet<String>,
    nouns: Vec<String>,
    noun_set: HashSet<String>,
    adjectives: HashSet<String>,
}

impl Lexicon {
    /// Build from in-memory lists. Tokens are lowercased; duplicates keep
    /// their first (highest-frequency) position.
    pub fn from_lists<I, J, K>(verbs: I, nouns: J, adjectives: K) -> Self
    where
        I: IntoIterator<Item = String>,
        J: IntoIterator<Item = String>,
        K: IntoIterator<Item = String>,
    {
        let dedup = |items: &mut dyn Iterator<Item = String>| {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for item in items {
                let t = item.to_lowercase();
                if seen.insert(t.clone()) {
                    out.push(t);
                }
            }
            out
        };
        let verbs = dedup(&mut verbs.into_iter());
        let nouns = dedup(&mut nouns.into_iter());
        let verb_set = verbs.iter().cloned().collect();
        let noun_set = nouns.iter().cloned().collect();
        let adjectives = adjectives.into_iter().map(|a| a.to_lowercase()).collect();
        Lexicon {
            verbs,
            verb_set,
            nouns,
            noun_set,
            adjectives,
        }
    }

    /// Load lexicon files: one token per line, descending frequency,
    /// `#` comments and blank lines ignored.
    pub fn load(
        verbs: &Path,
        nouns: &Path,
        adjectives: Option<&Path>,
    ) -> Result<Self, EmbeddingError> {
        let verbs = read_token_file(verbs)?;
        let nouns = read_token_file(nouns)?;
        let adjectives = match adjectives {
            Some(path) => read_token_file(path)?,
            None => Vec::new(),
        };
        Ok(Self::from_lists(verbs, nouns, adjectives))
    }

    /// The `min(k, |verbs|)` most frequent verbs, preserving order.
    pub fn top_verbs(&self, k: usize) -> &[String] {
        &self.verbs[..k.min(self.verbs.len())]
    }

    pub fn top_nouns(&self, k: usize) -> &[String] {
        &self.nouns[..k.min(self.nouns.len())]
    }

    pub fn verbs(&self) -> &[String] {
        &self.verbs
    }

    pub fn nouns(&self) -> &[String] {
        &self.nouns
    }

    /// Membership tests expect already-lowercased tokens.
    pub fn is_verb(&self, token: &str) -> bool {
        self.verb_set.contains(token)
    }

    pub fn is_noun(&self, token: &str) -> bool {
        self.noun_set.contains(token)
    }

    pub fn is_adjective(&self, token: &str) -> bool {
        self.adjectives.contains(token)
    }
}

fn read_token_file(path: &Path) -> Result<Vec<String>, EmbeddingError> {
    let file = File::open(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let token = line.trim();
        if token.is_empty() || token.starts_with('#') {
            continue;
        }
        out.push(token.to_lowercase());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    fn store_ab() -> EmbeddingStore {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "2 3\na 1 0 0\nb 0 1 0\n").unwrap();
        EmbeddingStore::load(f.path(), EmbeddingFormat::Word2vecText).unwrap()
    }

    #[test]
    fn loads_minimal_word2vec_file() {
        let store = store_ab();
        assert_eq!(store.dimension(), 3);
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn glove_dimension_mismatch_names_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "tree 0.1 0.2\nrock 0.3\n").unwrap();
        let err = EmbeddingStore::load(f.path(), EmbeddingFormat::GloveText).unwrap_err();
        match err {
            EmbeddingError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(
            EmbeddingStore::load(f.path(), EmbeddingFormat::GloveText),
            Err(EmbeddingError::Empty { .. })
        ));
        let mut g = tempfile::NamedTempFile::new().unwrap();
        write!(g, "0 5\n").unwrap();
        assert!(matches!(
            EmbeddingStore::load(g.path(), EmbeddingFormat::Word2vecText),
            Err(EmbeddingError::Empty { .. })
        ));
    }

    #[test]
    fn zero_norm_vector_rejected_at_load() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "a 1 0\nz 0 0\n").unwrap();
        let err = EmbeddingStore::load(f.path(), EmbeddingFormat::GloveText).unwrap_err();
        match err {
            EmbeddingError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("zero-norm"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn duplicate_tokens_keep_first_occurrence() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "a 1 0\nA 5 5\nb 0 2\n").unwrap();
        let store = EmbeddingStore::load(f.path(), EmbeddingFormat::GloveText).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.duplicates_skipped(), 1);
        assert_eq!(store.lookup("a").unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn lookup_known_and_unknown_tokens() {
        let store = store_ab();
        assert_eq!(store.lookup("a").unwrap(), &[1.0, 0.0, 0.0]);
        match store.lookup("zzz") {
            Err(EmbeddingError::TokenNotFound(t)) => assert_eq!(t, "zzz"),
            other => panic!("expected not-found, got {other:?}"),
        }
    }

    #[test]
    fn lookup_is_case_normalized() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "tree 0.5 0.5\n").unwrap();
        let store = EmbeddingStore::load(f.path(), EmbeddingFormat::GloveText).unwrap();
        assert_eq!(store.lookup("Tree").unwrap(), &[0.5, 0.5]);
    }

    #[test]
    fn normalized_vectors_have_unit_norm() {
        let store = store_ab();
        for token in store.tokens() {
            let n = norm(store.normalized_vector(token).unwrap());
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    /// Write-then-read oracle: a randomly generated file round-trips every
    /// component bit-for-bit (Rust's float Display is shortest-roundtrip).
    #[test]
    fn random_file_round_trips_bit_for_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dim = 8;
        let mut table: Vec<(String, Vec<f64>)> = Vec::new();
        for i in 0..50 {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            table.push((format!("tok{i}"), v));
        }
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{} {}", table.len(), dim).unwrap();
        for (tok, v) in &table {
            let joined: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            writeln!(f, "{tok} {}", joined.join(" ")).unwrap();
        }
        let store = EmbeddingStore::load(f.path(), EmbeddingFormat::Word2vecText).unwrap();
        assert_eq!(store.len(), 50);
        for (tok, v) in &table {
            let got = store.lookup(tok).unwrap();
            for (a, b) in got.iter().zip(v) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn load_auto_sniffs_both_formats() {
        let mut w2v = tempfile::NamedTempFile::new().unwrap();
        write!(w2v, "1 2\na 1 0\n").unwrap();
        assert_eq!(EmbeddingStore::load_auto(w2v.path()).unwrap().len(), 1);
        let mut glove = tempfile::NamedTempFile::new().unwrap();
        write!(glove, "a 1 0\nb 0 1\n").unwrap();
        assert_eq!(EmbeddingStore::load_auto(glove.path()).unwrap().len(), 2);
    }

    #[test]
    fn cosine_identity_and_orthogonality() {
        assert!((cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap().abs() < 1e-12);
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(EmbeddingError::ZeroVector(_))
        ));
        assert!(matches!(
            cosine(&[1.0], &[1.0, 0.0]),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
    }

    /// Independent arithmetic oracle for cosine over random pairs.
    #[test]
    fn cosine_matches_naive_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let u: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            if norm(&u) == 0.0 || norm(&v) == 0.0 {
                continue;
            }
            let mut d = 0.0;
            let mut nu = 0.0;
            let mut nv = 0.0;
            for i in 0..6 {
                d += u[i] * v[i];
                nu += u[i] * u[i];
                nv += v[i] * v[i];
            }
            let expected = d / (nu.sqrt() * nv.sqrt());
            assert!((cosine(&u, &v).unwrap() - expected).abs() < 1e-9);
            assert!(cosine(&u, &v).unwrap().abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn nearest_self_match_and_exclusion() {
        let store = store_ab();
        let cands = vec!["a".to_string(), "b".to_string()];
        let q = store.lookup("a").unwrap().to_vec();
        let res = store.nearest(&q, &cands, 1, &HashSet::new()).unwrap();
        assert_eq!(res.matches.len(), 1);
        assert_eq!(res.matches[0].0, "a");
        assert!((res.matches[0].1 - 1.0).abs() < 1e-9);

        let exclude: HashSet<String> = ["a".to_string()].into_iter().collect();
        let res = store.nearest(&q, &cands, 1, &exclude).unwrap();
        assert_eq!(res.matches[0].0, "b");
        let expected = cosine(store.lookup("a").unwrap(), store.lookup("b").unwrap()).unwrap();
        assert!((res.matches[0].1 - expected).abs() < 1e-9);
    }

    #[test]
    fn nearest_skips_absent_candidates_and_handles_empty() {
        let store = store_ab();
        let cands = vec!["a".to_string(), "ghost".to_string()];
        let q = vec![1.0, 0.0, 0.0];
        let res = store.nearest(&q, &cands, 5, &HashSet::new()).unwrap();
        assert_eq!(res.skipped, 1);
        assert_eq!(res.matches.len(), 1);

        let none: Vec<String> = vec![];
        let res = store.nearest(&q, &none, 5, &HashSet::new()).unwrap();
        assert!(res.matches.is_empty());

        assert!(matches!(
            store.nearest(&[0.0, 0.0, 0.0], &cands, 1, &HashSet::new()),
            Err(EmbeddingError::ZeroVector(_))
        ));
    }

    /// Exhaustive oracle: an independently coded full scan and sort must
    /// agree with `nearest` on a random store.
    #[test]
    fn nearest_matches_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let dim = 5;
        let entries: Vec<(String, Vec<f64>)> = (0..30)
            .map(|i| {
                (
                    format!("w{i:02}"),
                    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let store = EmbeddingStore::from_entries(entries.clone()).unwrap();
        let cands: Vec<String> = entries.iter().map(|(t, _)| t.clone()).collect();
        let query: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();

        let res = store.nearest(&query, &cands, 5, &HashSet::new()).unwrap();

        // Oracle: score every candidate with the standalone cosine.
        let mut oracle: Vec<(String, f64)> = entries
            .iter()
            .map(|(t, v)| (t.clone(), cosine(v, &query).unwrap()))
            .collect();
        oracle.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        oracle.truncate(5);

        for ((t1, s1), (t2, s2)) in res.matches.iter().zip(&oracle) {
            assert_eq!(t1, t2);
            assert!((s1 - s2).abs() < 1e-9);
        }
    }

    #[test]
    fn lexicon_basics() {
        let lex = Lexicon::from_lists(
            ["Take".to_string(), "read".to_string(), "take".to_string()],
            ["key".to_string()],
            ["rusty".to_string()],
        );
        assert_eq!(lex.verbs(), &["take".to_string(), "read".to_string()]);
        assert_eq!(lex.top_verbs(1), &["take".to_string()]);
        assert_eq!(lex.top_verbs(10).len(), 2);
        assert!(lex.is_noun("key"));
        assert!(lex.is_adjective("rusty"));
        assert!(!lex.is_verb("key"));
    }

    #[test]
    fn lexicon_file_skips_comments_and_blanks() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "# most common verbs\ntake\n\nread\n").unwrap();
        let mut g = tempfile::NamedTempFile::new().unwrap();
        write!(g, "key\n").unwrap();
        let lex = Lexicon::load(f.path(), g.path(), None).unwrap();
        assert_eq!(lex.verbs().len(), 2);
        assert_eq!(lex.nouns().len(), 1);
    }

    proptest! {
        /// Similarities are non-increasing and each eligible candidate
        /// appears exactly once when n covers the whole set.
        #[test]
        fn nearest_invariants(seed in 0u64..500, n in 1usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = 4;
            let count = rng.random_range(2usize..20);
            let entries: Vec<(String, Vec<f64>)> = (0..count)
                .map(|i| {
                    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    if norm(&v) == 0.0 { v[0] = 1.0; }
                    (format!("t{i}"), v)
                })
                .collect();
            let store = EmbeddingStore::from_entries(entries.clone()).unwrap();
            let cands: Vec<String> = entries.iter().map(|(t, _)| t.clone()).collect();
            let probe = entries[0].1.clone();
            let res = store.nearest(&probe, &cands, n, &HashSet::new()).unwrap();

            for w in res.matches.windows(2) {
                prop_assert!(w[0].1 >= w[1].1 - 1e-12);
            }
            if n >= cands.len() {
                prop_assert_eq!(res.matches.len(), cands.len());
                let unique: HashSet<&String> = res.matches.iter().map(|(t, _)| t).collect();
                prop_assert_eq!(unique.len(), cands.len());
            }
            // A stored token queried by its own vector ranks first.
            prop_assert_eq!(res.matches[0].0.as_str(), "t0");
            prop_assert!((res.matches[0].1 - 1.0).abs() < 1e-6);
        }
    }
}
