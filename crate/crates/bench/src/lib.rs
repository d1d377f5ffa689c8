//! Inputs shared by the criterion benches.

use std::path::PathBuf;

/// Path of a map under the core test fixtures.
pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(format!("{name}.xodr"))
}

/// Contents of a fixture map.
pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture is readable")
}

/// Parses a fixture and builds its graphs and regions in memory.
pub fn bundle(name: &str, spacing: f64, target_length: f64) -> graphscene_core::scenario::MapBundle {
    use graphscene_core::lanegraph::{build_lane_graph, build_pedestrian_graph};
    use graphscene_core::opendrive::{extract_metadata, parse_opendrive};

    let xml = fixture_text(name);
    let net = parse_opendrive(&xml).expect("fixture parses");
    let road_graph = build_lane_graph(&net, name, spacing).expect("road graph");
    let pedestrian_graph = build_pedestrian_graph(&net, name, spacing).expect("pedestrian graph");
    let partition = graphscene_core::regions::segment_regions(&road_graph, Some(&pedestrian_graph), &net, target_length)
        .expect("regions");
    graphscene_core::scenario::MapBundle {
        map_id: name.to_string(),
        digest: graphscene_core::persist::digest_bytes(xml.as_bytes()),
        metadata: extract_metadata(&net, name),
        road_graph,
        pedestrian_graph,
        partition,
    }
}
