//! In-memory session store with optional write-through to a directory.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use smecs_core::Session;

struct Entry {
    session: Arc<Mutex<Session>>,
    last_seen: Mutex<u64>,
}

/// Sessions keyed by id. Each session has its own lock, so edits to one
/// session never wait on another.
pub struct SessionStore {
    entries: RwLock<HashMap<String, Entry>>,
    dir: Option<PathBuf>,
    ttl_ms: u64,
}

/// Session ids are generated by the service; anything else is refused
/// before it can reach the file system.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-')
}

pub fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl SessionStore {
    pub fn in_memory(ttl_ms: u64) -> Self {
        SessionStore { entries: RwLock::new(HashMap::new()), dir: None, ttl_ms }
    }

    /// Opens a store backed by `dir`, loading the sessions already there.
    /// Unreadable files are skipped with a warning.
    pub fn open(dir: &Path, ttl_ms: u64) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let mut map = HashMap::new();
        for item in fs::read_dir(dir)? {
            let path = item?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let loaded = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|text| serde_json::from_str::<Session>(&text).map_err(|e| e.to_string()));
            match loaded {
                Ok(session) if is_valid_id(&session.id) => {
                    let last_seen = Mutex::new(session.modified_at);
                    map.insert(session.id.clone(), Entry { session: Arc::new(Mutex::new(session)), last_seen });
                }
                Ok(_) => log::warn!("skipping {}: invalid session id", path.display()),
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        log::info!("loaded {} session(s) from {}", map.len(), dir.display());
        Ok(SessionStore { entries: RwLock::new(map), dir: Some(dir.into()), ttl_ms })
    }

    fn path_of(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.json")))
    }

    /// Writes a session file. Sessions never hold tokens, so nothing secret
    /// reaches the disk.
    pub fn persist(&self, session: &Session) -> io::Result<()> {
        let Some(path) = self.path_of(&session.id) else { return Ok(()) };
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string(session).map_err(io::Error::other)?;
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)
    }

    pub fn insert(&self, session: Session, now: u64) -> io::Result<Arc<Mutex<Session>>> {
        self.persist(&session)?;
        let id = session.id.clone();
        let shared = Arc::new(Mutex::new(session));
        let entry = Entry { session: shared.clone(), last_seen: Mutex::new(now) };
        self.entries.write().unwrap_or_else(|e| e.into_inner()).insert(id, entry);
        Ok(shared)
    }

    /// Looks up a live session and marks it as used.
    pub fn get(&self, id: &str, now: u64) -> Option<Arc<Mutex<Session>>> {
        if !is_valid_id(id) {
            return None;
        }
        {
            let entries = self.entries.read().unwrap_or_else(|e| e.into_inner());
            let entry = entries.get(id)?;
            let mut seen = lock(&entry.last_seen);
            if now.saturating_sub(*seen) <= self.ttl_ms {
                *seen = (*seen).max(now);
                return Some(entry.session.clone());
            }
        }
        self.remove(id);
        None
    }

    pub fn remove(&self, id: &str) {
        self.entries.write().unwrap_or_else(|e| e.into_inner()).remove(id);
        if let Some(path) = self.path_of(id) {
            if let Err(e) = fs::remove_file(&path) {
                if e.kind() != io::ErrorKind::NotFound {
                    log::warn!("cannot remove {}: {e}", path.display());
                }
            }
        }
    }

    /// Drops every session idle for longer than the TTL.
    pub fn purge_expired(&self, now: u64) -> usize {
        let expired: Vec<String> = self
            .entries
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .filter(|(_, e)| now.saturating_sub(*lock(&e.last_seen)) > self.ttl_ms)
            .map(|(id, _)| id.clone())
            .collect();
        for id in &expired {
            self.remove(id);
        }
        expired.len()
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
