//! ConceptNet CapableOf lookups with a disk cache.
//!
//! Live mode issues `GET {base}/query?start=/c/en/<noun>&rel=/r/CapableOf`
//! and caches the JSON edge list on disk, one file per noun. Offline mode
//! reads cache files only, so test suites and experiment replays never need
//! a network. Multi-word capability phrases are reduced to their first
//! token, since agent commands are verb + noun only.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use thiserror::Error;

/// Environment variable consulted for a default cache directory.
pub const CACHE_ENV_VAR: &str = "AFFORDANCE_CONCEPTNET_CACHE";

pub const DEFAULT_BASE_URL: &str = "https://api.conceptnet.io";

#[derive(Debug, Error)]
pub enum ConceptNetError {
    #[error("no cached response for {noun:?} and client is offline")]
    CacheMiss { noun: String },
    #[error("http request for {noun:?} failed: {message}")]
    Http { noun: String, message: String },
    #[error("malformed response for {noun:?}: {message}")]
    Malformed { noun: String, message: String },
    #[error("cache i/o at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct ConceptNetConfig {
    pub cache_dir: PathBuf,
    /// When true, only cache files are consulted; a miss is an error.
    pub offline: bool,
    pub base_url: String,
}

impl ConceptNetConfig {
    pub fn new(cache_dir: PathBuf) -> Self {
        ConceptNetConfig {
            cache_dir,
            offline: false,
            base_url: DEFAULT_BASE_URL.to_string(),
        }
    }

    pub fn offline(cache_dir: PathBuf) -> Self {
        ConceptNetConfig {
            cache_dir,
            offline: true,
            base_url: DEFAULT_BASE_URL.to_string(),
        }
    }
}

/// Transport abstraction so tests can count and fake network traffic.
pub trait EdgeFetcher: Send + Sync {
    fn fetch(&self, url: &str, noun: &str) -> Result<String, ConceptNetError>;
}

/// Blocking HTTP transport.
pub struct HttpFetcher;

impl EdgeFetcher for HttpFetcher {
    fn fetch(&self, url: &str, noun: &str) -> Result<String, ConceptNetError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(15))
            .build()
            .map_err(|e| ConceptNetError::Http {
                noun: noun.to_string(),
                message: e.to_string(),
            })?;
        let response = client.get(url).send().map_err(|e| ConceptNetError::Http {
            noun: noun.to_string(),
            message: e.to_string(),
        })?;
        if !response.status().is_success() {
            return Err(ConceptNetError::Http {
                noun: noun.to_string(),
                message: format!("status {}", response.status()),
            });
        }
        response.text().map_err(|e| ConceptNetError::Http {
            noun: noun.to_string(),
            message: e.to_string(),
        })
    }
}

/// CapableOf query client with an in-memory memo and a disk cache.
pub struct ConceptNetClient {
    config: ConceptNetConfig,
    fetcher: Box<dyn EdgeFetcher>,
    memo: Mutex<HashMap<String, BTreeSet<String>>>,
    network_calls: AtomicUsize,
    cache_write: Mutex<()>,
}

impl ConceptNetClient {
    pub fn new(config: ConceptNetConfig) -> Self {
        Self::with_fetcher(config, Box::new(HttpFetcher))
    }

    pub fn with_fetcher(config: ConceptNetConfig, fetcher: Box<dyn EdgeFetcher>) -> Self {
        ConceptNetClient {
            config,
            fetcher,
            memo: Mutex::new(HashMap::new()),
            network_calls: AtomicUsize::new(0),
            cache_write: Mutex::new(()),
        }
    }

    /// Total network fetches performed by this client.
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::SeqCst)
    }

    pub fn cache_dir(&self) -> &Path {
        &self.config.cache_dir
    }

    /// Verbs a noun is CapableOf, per cached or fetched edges.
    ///
    /// A noun with no CapableOf edges yields an empty set. Offline with no
    /// cache file is a [`ConceptNetError::CacheMiss`]; a live fetch failure
    /// is [`ConceptNetError::Http`].
    pub fn capable_of(&self, noun: &str) -> Result<BTreeSet<String>, ConceptNetError> {
        let noun = noun.to_lowercase();
        if let Some(hit) = self.memo.lock().unwrap().get(&noun) {
            return Ok(hit.clone());
        }

        let path = self.cache_path(&noun);
        let body = if path.exists() {
            std::fs::read_to_string(&path).map_err(|source| ConceptNetError::Io {
                path: path.clone(),
                source,
            })?
        } else if self.config.offline {
            return Err(ConceptNetError::CacheMiss { noun });
        } else {
            let url = format!(
                "{}/query?start=/c/en/{}&rel=/r/CapableOf",
                self.config.base_url,
                noun.replace(' ', "_")
            );
            self.network_calls.fetch_add(1, Ordering::SeqCst);
            let body = self.fetcher.fetch(&url, &noun)?;
            let _guard = self.cache_write.lock().unwrap();
            std::fs::create_dir_all(&self.config.cache_dir).map_err(|source| {
                ConceptNetError::Io {
                    path: self.config.cache_dir.clone(),
                    source,
                }
            })?;
            std::fs::write(&path, &body).map_err(|source| ConceptNetError::Io {
                path: path.clone(),
                source,
            })?;
            body
        };

        let verbs = parse_capable_of(&body, &noun)?;
        self.memo.lock().unwrap().insert(noun, verbs.clone());
        Ok(verbs)
    }

    fn cache_path(&self, noun: &str) -> PathBuf {
        let safe: String = noun
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        self.config.cache_dir.join(format!("{safe}.json"))
    }
}

/// Extract capability verbs from a ConceptNet JSON edge list: the first
/// token of each CapableOf edge's `end.label`, lowercased.
pub fn parse_capable_of(body: &str, noun: &str) -> Result<BTreeSet<String>, ConceptNetError> {
    let malformed = |message: String| ConceptNetError::Malformed {
        noun: noun.to_string(),
        message,
    };
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| malformed(e.to_string()))?;
    let edges = value
        .get("edges")
        .and_then(|e| e.as_array())
        .ok_or_else(|| malformed("missing \"edges\" array".to_string()))?;
    let mut verbs = BTreeSet::new();
    for edge in edges {
        let rel = edge
            .get("rel")
            .and_then(|r| r.get("@id"))
            .and_then(|id| id.as_str())
            .unwrap_or("");
        if rel != "/r/CapableOf" {
            continue;
        }
        let label = edge
            .get("end")
            .and_then(|e| e.get("label"))
            .and_then(|l| l.as_str())
            .ok_or_else(|| malformed("CapableOf edge without end.label".to_string()))?;
        if let Some(first) = label.split_whitespace().next() {
            verbs.insert(first.to_lowercase());
        }
    }
    Ok(verbs)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FixedFetcher {
        body: Result<String, String>,
    }

    impl EdgeFetcher for FixedFetcher {
        fn fetch(&self, _url: &str, noun: &str) -> Result<String, ConceptNetError> {
            self.body.clone().map_err(|message| ConceptNetError::Http {
                noun: noun.to_string(),
                message,
            })
        }
    }

    fn edge_body(noun: &str, labels: &[&str]) -> String {
        let edges: Vec<String> = labels
            .iter()
            .map(|l| {
                format!(
                    r#"{{"rel": {{"@id": "/r/CapableOf", "label": "CapableOf"}},
                        "start": {{"@id": "/c/en/{noun}", "label": "{noun}"}},
                        "end": {{"@id": "/c/en/x", "label": "{l}"}},
                        "weight": 1.0}}"#
                )
            })
            .collect();
        format!(r#"{{"edges": [{}]}}"#, edges.join(","))
    }

    #[test]
    fn extracts_capability_verbs_from_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let body = edge_body("sword", &["kill", "harm", "parry", "look cool"]);
        std::fs::write(dir.path().join("sword.json"), body).unwrap();
        let client = ConceptNetClient::new(ConceptNetConfig::offline(dir.path().to_path_buf()));
        let verbs = client.capable_of("sword").unwrap();
        let expected: BTreeSet<String> = ["kill", "harm", "parry", "look"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(verbs, expected);
        assert_eq!(client.network_calls(), 0);
    }

    #[test]
    fn zero_edges_yield_empty_set() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("pebble.json"), r#"{"edges": []}"#).unwrap();
        let client = ConceptNetClient::new(ConceptNetConfig::offline(dir.path().to_path_buf()));
        assert!(client.capable_of("pebble").unwrap().is_empty());
    }

    #[test]
    fn offline_miss_is_distinguished_from_http_failure() {
        let dir = tempfile::tempdir().unwrap();
        let offline = ConceptNetClient::new(ConceptNetConfig::offline(dir.path().to_path_buf()));
        assert!(matches!(
            offline.capable_of("ghost"),
            Err(ConceptNetError::CacheMiss { .. })
        ));

        let live = ConceptNetClient::with_fetcher(
            ConceptNetConfig::new(dir.path().to_path_buf()),
            Box::new(FixedFetcher {
                body: Err("connection refused".to_string()),
            }),
        );
        assert!(matches!(
            live.capable_of("ghost"),
            Err(ConceptNetError::Http { .. })
        ));
        assert_eq!(live.network_calls(), 1);
    }

    #[test]
    fn live_fetch_populates_cache_and_is_not_repeated() {
        let dir = tempfile::tempdir().unwrap();
        let client = ConceptNetClient::with_fetcher(
            ConceptNetConfig::new(dir.path().to_path_buf()),
            Box::new(FixedFetcher {
                body: Ok(edge_body("key", &["unlock", "open"])),
            }),
        );
        let first = client.capable_of("key").unwrap();
        assert_eq!(client.network_calls(), 1);
        assert!(dir.path().join("key.json").exists());

        // Memoized: no new fetch.
        let second = client.capable_of("key").unwrap();
        assert_eq!(client.network_calls(), 1);
        assert_eq!(first, second);

        // A fresh client finds the cache file: still no fetch.
        let fresh = ConceptNetClient::with_fetcher(
            ConceptNetConfig::new(dir.path().to_path_buf()),
            Box::new(FixedFetcher {
                body: Err("should not be called".to_string()),
            }),
        );
        assert_eq!(fresh.capable_of("key").unwrap(), first);
        assert_eq!(fresh.network_calls(), 0);
    }

    #[test]
    fn malformed_response_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("bad.json"), "not json").unwrap();
        let client = ConceptNetClient::new(ConceptNetConfig::offline(dir.path().to_path_buf()));
        assert!(matches!(
            client.capable_of("bad"),
            Err(ConceptNetError::Malformed { .. })
        ));
        std::fs::write(dir.path().join("worse.json"), r#"{"nope": 1}"#).unwrap();
        assert!(matches!(
            client.capable_of("worse"),
            Err(ConceptNetError::Malformed { .. })
        ));
    }

    #[test]
    fn non_capableof_edges_are_ignored() {
        let body = r#"{"edges": [
            {"rel": {"@id": "/r/UsedFor"}, "end": {"label": "cutting"}},
            {"rel": {"@id": "/r/CapableOf"}, "end": {"label": "slice bread"}}
        ]}"#;
        let verbs = parse_capable_of(body, "knife").unwrap();
        assert_eq!(verbs.into_iter().collect::<Vec<_>>(), vec!["slice"]);
    }
}
