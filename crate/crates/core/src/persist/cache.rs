//! Map cache on disk: `<cache_root>/<map_id>/` holds `meta.json`,
//! `graph.graphml`, `regions.json` and `digest`. The digest file is written
//! last, so a cache entry whose digest matches the source is complete.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::graphml::{graphml_to_graphs, graphs_to_graphml};
use super::FORMAT_VERSION;
use crate::error::{Error, Result};
use crate::lanegraph::{build_lane_graph, build_pedestrian_graph, GraphKind, DEFAULT_SPACING};
use crate::opendrive::{extract_metadata, parse_opendrive, MapMetadata};
use crate::regions::{segment_regions, RegionPartition, DEFAULT_TARGET_LENGTH};
use crate::scenario::MapBundle;

pub const META_FILE: &str = "meta.json";
pub const GRAPH_FILE: &str = "graph.graphml";
pub const REGIONS_FILE: &str = "regions.json";
pub const DIGEST_FILE: &str = "digest";
const LOCK_FILE: &str = ".lock";
/// Sub-directory of the cache root reserved for saved scenarios.
pub const SCENARIO_DIR: &str = "scenarios";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestParams {
    pub spacing: f64,
    pub target_length: f64,
}

impl Default for IngestParams {
    fn default() -> Self {
        IngestParams {
            spacing: DEFAULT_SPACING,
            target_length: DEFAULT_TARGET_LENGTH,
        }
    }
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub format_version: u32,
    pub map_id: String,
    pub source: PathBuf,
    pub digest: String,
    pub params: IngestParams,
    pub metadata: MapMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RegionsDocument {
    format_version: u32,
    partition: RegionPartition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCatalogEntry {
    pub map_id: String,
    pub source: PathBuf,
    pub metadata: MapMetadata,
    pub meta_path: PathBuf,
    pub graph_path: PathBuf,
    pub regions_path: PathBuf,
    pub digest: String,
    pub params: IngestParams,
}

impl MapCatalogEntry {
    fn new(dir: &Path, meta: MapMeta) -> Self {
        MapCatalogEntry {
            map_id: meta.map_id,
            source: meta.source,
            metadata: meta.metadata,
            meta_path: dir.join(META_FILE),
            graph_path: dir.join(GRAPH_FILE),
            regions_path: dir.join(REGIONS_FILE),
            digest: meta.digest,
            params: meta.params,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    pub entry: MapCatalogEntry,
    /// False when the cache already matched the source and nothing was written.
    pub rebuilt: bool,
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Map id for a source path: its file stem.
pub fn map_id_for(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty() && !s.starts_with('.') && *s != SCENARIO_DIR)
        .map(str::to_string)
        .ok_or_else(|| Error::domain(format!("cannot derive a map id from {}", path.display())))
}

fn read_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Exclusive advisory lock on one cache entry, released on drop.
struct EntryLock(File);

impl EntryLock {
    fn acquire(dir: &Path) -> Result<EntryLock> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        file.lock().map_err(|e| Error::io(&path, e))?;
        Ok(EntryLock(file))
    }
}

impl Drop for EntryLock {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

fn cached_meta(dir: &Path) -> Option<MapMeta> {
    let digest = fs::read_to_string(dir.join(DIGEST_FILE)).ok()?;
    let meta: MapMeta = serde_json::from_str(&fs::read_to_string(dir.join(META_FILE)).ok()?).ok()?;
    let complete = dir.join(GRAPH_FILE).is_file() && dir.join(REGIONS_FILE).is_file();
    (complete && meta.digest == digest.trim() && meta.format_version == FORMAT_VERSION).then_some(meta)
}

/// Parses an OpenDRIVE file and stores its metadata, graphs and regions in
/// the cache. Re-running with an unchanged source and parameters writes
/// nothing.
pub fn ingest_map(source: &Path, cache_root: &Path, params: IngestParams) -> Result<IngestOutcome> {
    let bytes = fs::read(source).map_err(|e| Error::io(source, e))?;
    let map_id = map_id_for(source)?;
    let digest = digest_bytes(&bytes);
    let dir = cache_root.join(&map_id);
    let _lock = EntryLock::acquire(&dir)?;

    if let Some(meta) = cached_meta(&dir) {
        if meta.digest == digest && meta.params == params {
            log::info!("{map_id}: cache is current");
            return Ok(IngestOutcome {
                entry: MapCatalogEntry::new(&dir, meta),
                rebuilt: false,
            });
        }
    }

    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Format(format!("{} is not UTF-8: {e}", source.display())))?;
    let network = parse_opendrive(&text)?;
    let road = build_lane_graph(&network, &map_id, params.spacing)?;
    let pedestrian = build_pedestrian_graph(&network, &map_id, params.spacing)?;
    let partition = segment_regions(&road, Some(&pedestrian), &network, params.target_length)?;
    let meta = MapMeta {
        format_version: FORMAT_VERSION,
        map_id: map_id.clone(),
        source: source.to_path_buf(),
        digest: digest.clone(),
        params,
        metadata: extract_metadata(&network, &map_id),
    };
    let regions = RegionsDocument {
        format_version: FORMAT_VERSION,
        partition,
    };

    // stale digest first, so an interrupted rebuild never looks complete
    let _ = fs::remove_file(dir.join(DIGEST_FILE));
    write_atomic(&dir.join(META_FILE), &json_bytes(&meta))?;
    write_atomic(&dir.join(GRAPH_FILE), graphs_to_graphml(&[&road, &pedestrian]).as_bytes())?;
    write_atomic(&dir.join(REGIONS_FILE), &json_bytes(&regions))?;
    write_atomic(&dir.join(DIGEST_FILE), format!("{digest}\n").as_bytes())?;
    log::info!(
        "{map_id}: cached {} road nodes, {} pedestrian nodes, {} regions",
        road.node_count(),
        pedestrian.node_count(),
        regions.partition.regions.len()
    );
    Ok(IngestOutcome {
        entry: MapCatalogEntry::new(&dir, meta),
        rebuilt: true,
    })
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("cache documents serialize");
    v.push(b'\n');
    v
}

/// Every complete cache entry under `cache_root`, sorted by map id.
pub fn list_catalog(cache_root: &Path) -> Result<Vec<MapCatalogEntry>> {
    let read = match fs::read_dir(cache_root) {
        Ok(r) => r,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(cache_root, e)),
    };
    let mut out = Vec::new();
    for entry in read {
        let entry = entry.map_err(|e| Error::io(cache_root, e))?;
        let dir = entry.path();
        if !dir.is_dir() || entry.file_name() == SCENARIO_DIR {
            continue;
        }
        if let Some(meta) = cached_meta(&dir) {
            out.push(MapCatalogEntry::new(&dir, meta));
        }
    }
    out.sort_by(|a, b| a.map_id.cmp(&b.map_id));
    Ok(out)
}

/// Loads a cached map without re-parsing its source.
pub fn load_bundle(cache_root: &Path, map_id: &str) -> Result<MapBundle> {
    let dir = cache_root.join(map_id);
    let meta = cached_meta(&dir).ok_or_else(|| Error::domain(format!("map {map_id} is not in the cache")))?;
    let parsed = graphml_to_graphs(&read_string(&dir.join(GRAPH_FILE))?)?;
    for w in &parsed.warnings {
        log::warn!("{map_id}: {w}");
    }
    let mut road = None;
    let mut pedestrian = None;
    for g in parsed.graphs {
        match g.kind {
            GraphKind::Road => road = Some(g),
            GraphKind::Pedestrian => pedestrian = Some(g),
        }
    }
    let (Some(road_graph), Some(pedestrian_graph)) = (road, pedestrian) else {
        return Err(Error::Format(format!("{map_id}: graph document lacks a road or pedestrian graph")));
    };
    let regions_path = dir.join(REGIONS_FILE);
    let regions: RegionsDocument = serde_json::from_str(&read_string(&regions_path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", regions_path.display())))?;
    if regions.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "{}: version {} is not supported",
            regions_path.display(),
            regions.format_version
        )));
    }
    Ok(MapBundle {
        map_id: meta.map_id,
        digest: meta.digest,
        metadata: meta.metadata,
        road_graph,
        pedestrian_graph,
        partition: regions.partition,
    })
}

/// Loads every cached map.
pub fn load_all_bundles(cache_root: &Path) -> Result<Vec<MapBundle>> {
    list_catalog(cache_root)?
        .iter()
        .map(|e| load_bundle(cache_root, &e.map_id))
        .collect()
}
