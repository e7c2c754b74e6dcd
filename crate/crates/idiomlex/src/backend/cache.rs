//! Content-addressed response cache.
//!
//! Keys hash the full request identity: backend id, model, every message,
//! temperature, max_tokens and sample_index. Any single-character change
//! anywhere in a rendered prompt therefore changes the key. Entries are
//! one JSON file per key under a two-character fan-out directory, written
//! via temp-file-then-rename so concurrent writers never corrupt a file.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, BackendResponse, ChatBackend, ChatMessage, ChatRequest};

/// Hex SHA-256 digest identifying one completed request.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn digest(&self) -> &str {
        &self.0
    }
}

/// Canonical key material. Field order is fixed by this struct, so the
/// serialized bytes (and hence the digest) are stable.
#[derive(Serialize)]
struct KeyMaterial<'a> {
    backend_id: &'a str,
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
    sample_index: u32,
}

/// Computes the cache key for a request against a given backend.
pub fn cache_key(backend_id: &str, request: &ChatRequest) -> CacheKey {
    let material = KeyMaterial {
        backend_id,
        model: &request.params.model,
        messages: &request.messages,
        temperature: request.params.temperature,
        max_tokens: request.params.max_tokens,
        sample_index: request.params.sample_index,
    };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    CacheKey(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CacheEntry {
    text: String,
    backend_id: String,
}

/// Cache usage counters for one process.
#[derive(Debug, Default)]
pub struct CacheCounters {
    hits: AtomicU64,
    misses: AtomicU64,
}

/// On-disk cache statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub entries: u64,
    pub bytes: u64,
}

/// File-backed cache rooted at a directory.
#[derive(Debug, Clone)]
pub struct FileCache {
    dir: PathBuf,
}

impl FileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(&key.digest()[..2]).join(format!("{}.json", key.digest()))
    }

    pub fn get(&self, key: &CacheKey) -> Result<Option<BackendResponse>, BackendError> {
        let path = self.entry_path(key);
        let raw = match fs::read_to_string(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let entry: CacheEntry = serde_json::from_str(&raw)?;
        Ok(Some(BackendResponse {
            text: entry.text,
            backend_id: entry.backend_id,
            cached: true,
            latency_ms: 0,
        }))
    }

    pub fn put(&self, key: &CacheKey, response: &BackendResponse) -> Result<(), BackendError> {
        let path = self.entry_path(key);
        let parent = path.parent().expect("entry path has a parent");
        fs::create_dir_all(parent)?;
        let entry =
            CacheEntry { text: response.text.clone(), backend_id: response.backend_id.clone() };
        let payload = serde_json::to_vec(&entry)?;
        // unique temp name per writer, then atomic rename into place
        let tmp = parent.join(format!(
            ".{}.{}.{:?}.tmp",
            key.digest(),
            std::process::id(),
            std::thread::current().id()
        ));
        fs::write(&tmp, payload)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Number of entries and total bytes on disk.
    pub fn stats(&self) -> Result<CacheStats, BackendError> {
        let mut stats = CacheStats { entries: 0, bytes: 0 };
        if !self.dir.exists() {
            return Ok(stats);
        }
        for shard in fs::read_dir(&self.dir)? {
            let shard = shard?.path();
            if !shard.is_dir() {
                continue;
            }
            for file in fs::read_dir(&shard)? {
                let file = file?;
                if file.path().extension().is_some_and(|e| e == "json") {
                    stats.entries += 1;
                    stats.bytes += file.metadata()?.len();
                }
            }
        }
        Ok(stats)
    }

    /// Removes every cached entry.
    pub fn clear(&self) -> Result<(), BackendError> {
        if self.dir.exists() {
            fs::remove_dir_all(&self.dir)?;
        }
        Ok(())
    }
}

/// Wraps a backend with the file cache. Hits never touch the inner
/// backend; misses are stored before returning.
pub struct CachedBackend<B> {
    inner: B,
    cache: FileCache,
    counters: CacheCounters,
}

impl<B: ChatBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: FileCache) -> Self {
        Self { inner, cache, counters: CacheCounters::default() }
    }

    pub fn hits(&self) -> u64 {
        self.counters.hits.load(Ordering::SeqCst)
    }

    pub fn misses(&self) -> u64 {
        self.counters.misses.load(Ordering::SeqCst)
    }
}

impl<B: ChatBackend> ChatBackend for CachedBackend<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, request: &ChatRequest) -> Result<BackendResponse, BackendError> {
        let key = cache_key(self.inner.id(), request);
        if let Some(hit) = self.cache.get(&key)? {
            self.counters.hits.fetch_add(1, Ordering::SeqCst);
            return Ok(hit);
        }
        self.counters.misses.fetch_add(1, Ordering::SeqCst);
        let response = self.inner.complete(request)?;
        self.cache.put(&key, &response)?;
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testing::ScriptedBackend;
    use super::super::{CountingBackend, GenerationParams};
    use super::*;

    fn request(content: &str) -> ChatRequest {
        ChatRequest {
            messages: vec![ChatMessage::user(content)],
            params: GenerationParams {
                model: "m".into(),
                temperature: 0.7,
                max_tokens: 64,
                sample_index: 0,
            },
        }
    }

    #[test]
    fn put_then_get_returns_stored_text() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FileCache::new(dir.path());
        let key = cache_key("b", &request("hello"));
        let response = BackendResponse {
            text: "stored".into(),
            backend_id: "b".into(),
            cached: false,
            latency_ms: 12,
        };
        cache.put(&key, &response).unwrap();
        let got = cache.get(&key).unwrap().unwrap();
        assert_eq!(got.text, "stored");
        assert!(got.cached);
    }

    #[test]
    fn get_on_empty_cache_misses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FileCache::new(dir.path());
        assert_eq!(cache.get(&cache_key("b", &request("nothing"))).unwrap(), None);
    }

    #[test]
    fn every_key_field_matters() {
        let base = request("hello");
        let key = cache_key("b", &base);

        let mut other = base.clone();
        other.params.sample_index = 1;
        assert_ne!(key, cache_key("b", &other));

        let mut other = base.clone();
        other.params.temperature = 0.0;
        assert_ne!(key, cache_key("b", &other));

        let mut other = base.clone();
        other.params.max_tokens = 65;
        assert_ne!(key, cache_key("b", &other));

        let mut other = base.clone();
        other.params.model = "m2".into();
        assert_ne!(key, cache_key("b", &other));

        let mut other = base.clone();
        other.messages[0].content = "hellp".into();
        assert_ne!(key, cache_key("b", &other));

        assert_ne!(key, cache_key("b2", &base));
        assert_eq!(key, cache_key("b", &base.clone()));
    }

    #[test]
    fn single_character_change_in_any_message_changes_key() {
        let mut base = request("judge this");
        base.messages.insert(0, ChatMessage::system("be terse"));
        let key = cache_key("b", &base);
        let mut mutated = base.clone();
        mutated.messages[0].content = "be terse!".into();
        assert_ne!(key, cache_key("b", &mutated));
    }

    #[test]
    fn cached_backend_skips_inner_on_second_call() {
        let dir = tempfile::tempdir().unwrap();
        let counted = CountingBackend::new(ScriptedBackend::new(&[("q", "a")]));
        let cached = CachedBackend::new(counted, FileCache::new(dir.path()));

        let first = cached.complete(&request("q")).unwrap();
        assert!(!first.cached);
        let second = cached.complete(&request("q")).unwrap();
        assert!(second.cached);
        assert_eq!(second.text, "a");
        assert_eq!(cached.inner.calls(), 1);
        assert_eq!((cached.hits(), cached.misses()), (1, 1));
    }

    #[test]
    fn distinct_sample_indices_go_upstream_twice() {
        let dir = tempfile::tempdir().unwrap();
        let counted = CountingBackend::new(ScriptedBackend::new(&[("q", "a")]));
        let cached = CachedBackend::new(counted, FileCache::new(dir.path()));

        let mut second = request("q");
        second.params.sample_index = 1;
        cached.complete(&request("q")).unwrap();
        cached.complete(&second).unwrap();
        assert_eq!(cached.inner.calls(), 2);
    }

    #[test]
    fn hundred_random_requests_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FileCache::new(dir.path());
        for i in 0..100 {
            let req = request(&format!("prompt number {i} with payload {}", i * 31));
            let key = cache_key("b", &req);
            let response = BackendResponse {
                text: format!("answer {i}"),
                backend_id: "b".into(),
                cached: false,
                latency_ms: 0,
            };
            cache.put(&key, &response).unwrap();
            assert_eq!(cache.get(&key).unwrap().unwrap().text, format!("answer {i}"));
        }
        let stats = cache.stats().unwrap();
        assert_eq!(stats.entries, 100);
        assert!(stats.bytes > 0);
    }

    #[test]
    fn clear_empties_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FileCache::new(dir.path().join("cache"));
        let key = cache_key("b", &request("x"));
        let response = BackendResponse {
            text: "y".into(),
            backend_id: "b".into(),
            cached: false,
            latency_ms: 0,
        };
        cache.put(&key, &response).unwrap();
        cache.clear().unwrap();
        assert_eq!(cache.stats().unwrap().entries, 0);
        assert_eq!(cache.get(&key).unwrap(), None);
    }
}
