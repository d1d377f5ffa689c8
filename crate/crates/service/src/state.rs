use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use graphscene_core::persist::{
    document_to_scenario, ingest_map, list_catalog, load_bundle, read_document, scenario_to_document,
    write_atomic, AssetCatalog, IngestOutcome, IngestParams, MapCatalogEntry, SCENARIO_DIR,
};
use graphscene_core::scenario::{MapBundle, Scenario};
use graphscene_core::{Error, Result};
use tokio::sync::Mutex;

pub const DEFAULT_UNDO_DEPTH: usize = 50;

/// Immutable view of the map cache. Ingest builds a fresh one and swaps it in.
#[derive(Debug, Default)]
pub struct MapStore {
    pub entries: Vec<MapCatalogEntry>,
    /// Sorted by map id, the order the sampler expects.
    pub bundles: Vec<MapBundle>,
}

impl MapStore {
    pub fn load(cache_root: &Path) -> Result<MapStore> {
        let entries = list_catalog(cache_root)?;
        let mut bundles = Vec::new();
        for entry in &entries {
            match load_bundle(cache_root, &entry.map_id) {
                Ok(b) => bundles.push(b),
                Err(e) => log::warn!("skipping cached map {}: {e}", entry.map_id),
            }
        }
        bundles.sort_by(|a, b| a.map_id.cmp(&b.map_id));
        let entries = entries
            .into_iter()
            .filter(|e| bundles.iter().any(|b| b.map_id == e.map_id))
            .collect();
        Ok(MapStore { entries, bundles })
    }

    pub fn bundle(&self, map_id: &str) -> Option<&MapBundle> {
        self.bundles
            .binary_search_by(|b| b.map_id.as_str().cmp(map_id))
            .ok()
            .map(|i| &self.bundles[i])
    }
}

/// A live scenario together with the values it replaced, newest last.
#[derive(Debug)]
pub struct Session {
    pub scenario: Scenario,
    history: VecDeque<Scenario>,
}

impl Session {
    pub fn can_undo(&self) -> bool {
        !self.history.is_empty()
    }
}

struct Inner {
    cache_root: PathBuf,
    catalog: AssetCatalog,
    undo_depth: usize,
    maps: RwLock<Arc<MapStore>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

/// Shared service state. Cloning is cheap.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// Loads every cached map and every scenario previously written through
    /// to `<cache_root>/scenarios`. Scenarios that no longer match their map
    /// are skipped with a warning.
    pub fn open(cache_root: impl Into<PathBuf>, catalog: AssetCatalog) -> Result<AppState> {
        let cache_root = cache_root.into();
        let maps = MapStore::load(&cache_root)?;
        let sessions = restore_sessions(&cache_root, &maps, &catalog);
        Ok(AppState {
            inner: Arc::new(Inner {
                cache_root,
                catalog,
                undo_depth: DEFAULT_UNDO_DEPTH,
                maps: RwLock::new(Arc::new(maps)),
                sessions: RwLock::new(sessions),
            }),
        })
    }

    pub fn catalog(&self) -> &AssetCatalog {
        &self.inner.catalog
    }

    pub fn cache_root(&self) -> &Path {
        &self.inner.cache_root
    }

    pub fn maps(&self) -> Arc<MapStore> {
        self.inner.maps.read().unwrap().clone()
    }

    /// Ingests a source file and publishes the refreshed map store.
    pub fn ingest(&self, source: &Path, params: IngestParams) -> Result<IngestOutcome> {
        let outcome = ingest_map(source, &self.inner.cache_root, params)?;
        let fresh = MapStore::load(&self.inner.cache_root)?;
        *self.inner.maps.write().unwrap() = Arc::new(fresh);
        Ok(outcome)
    }

    pub fn session(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.inner.sessions.read().unwrap().get(id).cloned()
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.inner.sessions.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    fn scenario_path(&self, id: &str) -> PathBuf {
        self.inner.cache_root.join(SCENARIO_DIR).join(format!("{id}.json"))
    }

    fn persist(&self, scenario: &Scenario) -> Result<()> {
        write_atomic(&self.scenario_path(&scenario.scenario_id), scenario_to_document(scenario).as_bytes())
    }

    /// Registers a scenario under a fresh random id, which replaces the
    /// scenario's own id.
    pub fn insert(&self, mut scenario: Scenario) -> Result<Scenario> {
        scenario.scenario_id = uuid::Uuid::new_v4().to_string();
        self.persist(&scenario)?;
        let session = Session {
            scenario: scenario.clone(),
            history: VecDeque::new(),
        };
        self.inner
            .sessions
            .write()
            .unwrap()
            .insert(scenario.scenario_id.clone(), Arc::new(Mutex::new(session)));
        Ok(scenario)
    }

    /// Applies `change` under the scenario's writer lock. The new value is
    /// written to disk before it becomes visible, and the old one goes onto
    /// the undo stack.
    pub async fn mutate<F>(&self, id: &str, change: F) -> Result<Option<(Scenario, bool)>>
    where
        F: FnOnce(&Scenario) -> Result<Scenario>,
    {
        let Some(session) = self.session(id) else {
            return Ok(None);
        };
        let mut guard = session.lock().await;
        let next = change(&guard.scenario)?;
        if next == guard.scenario {
            return Ok(Some((next, guard.can_undo())));
        }
        self.persist(&next)?;
        let prev = std::mem::replace(&mut guard.scenario, next.clone());
        guard.history.push_back(prev);
        while guard.history.len() > self.inner.undo_depth {
            guard.history.pop_front();
        }
        Ok(Some((next, guard.can_undo())))
    }

    /// Restores the value before the last mutation. `Ok(None)` means the id
    /// is unknown; an empty history is a conflict.
    pub async fn undo(&self, id: &str) -> Result<Option<(Scenario, bool)>> {
        let Some(session) = self.session(id) else {
            return Ok(None);
        };
        let mut guard = session.lock().await;
        let Some(prev) = guard.history.back().cloned() else {
            return Err(Error::Conflict("nothing to undo".into()));
        };
        self.persist(&prev)?;
        guard.history.pop_back();
        guard.scenario = prev.clone();
        Ok(Some((prev, guard.can_undo())))
    }
}

fn restore_sessions(
    cache_root: &Path,
    maps: &MapStore,
    catalog: &AssetCatalog,
) -> HashMap<String, Arc<Mutex<Session>>> {
    let mut out = HashMap::new();
    let Ok(dir) = fs::read_dir(cache_root.join(SCENARIO_DIR)) else {
        return out;
    };
    for entry in dir.flatten() {
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let restored = fs::read_to_string(&path)
            .map_err(|e| Error::io(&path, e))
            .and_then(|text| {
                let doc = read_document(&text)?;
                let bundle = maps
                    .bundle(&doc.map_id)
                    .ok_or_else(|| Error::domain(format!("map {} is not cached", doc.map_id)))?;
                document_to_scenario(&text, bundle, catalog)
            });
        match restored {
            Ok(scenario) => {
                let session = Session {
                    scenario,
                    history: VecDeque::new(),
                };
                out.insert(session.scenario.scenario_id.clone(), Arc::new(Mutex::new(session)));
            }
            Err(e) => log::warn!("not restoring {}: {e}", path.display()),
        }
    }
    out
}
