//! Serialization and the on-disk map cache.

mod cache;
mod catalog;
mod document;
mod graphml;

pub use cache::{
    digest_bytes, ingest_map, list_catalog, load_all_bundles, load_bundle, map_id_for, write_atomic,
    IngestOutcome, IngestParams, MapCatalogEntry, MapMeta, DIGEST_FILE, GRAPH_FILE, META_FILE,
    REGIONS_FILE, SCENARIO_DIR,
};
pub use catalog::{ActorModel, AssetCatalog, WeatherPreset};
pub use document::{document_to_scenario, read_document, scenario_to_document, ScenarioDocument};
pub use graphml::{graph_to_graphml, graphml_to_graph, graphml_to_graphs, graphs_to_graphml, ParsedGraphs};

/// Version written into every document this crate produces.
pub const FORMAT_VERSION: u32 = 1;
